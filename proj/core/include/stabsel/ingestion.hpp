#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stabsel/data_model.hpp"

namespace stabsel {

/// Names of the three non-feature columns. Every other column is a feature,
/// kept in header order.
struct CsvSchema {
  std::string id_col = "subject_id";
  std::string cohort_col = "cohort";
  std::string label_col = "label";
};

/// Reads a comma-separated, '.'-decimal, UTF-8 table with a header row.
/// Throws SchemaError, ParseError or ValidationError.
FeatureTable read_csv(const std::filesystem::path& path, const CsvSchema& schema = {});
FeatureTable parse_csv(std::istream& in, const CsvSchema& schema = {},
                       std::string_view source = "<stream>");

/// Writes the table with header `id,cohort,label,<features...>`. Values use the
/// shortest representation that round-trips exactly.
void write_csv(const FeatureTable& table, const std::filesystem::path& path,
               const CsvSchema& schema = {});
void write_csv(const FeatureTable& table, std::ostream& out, const CsvSchema& schema = {});

/// Row-concatenates tables that share an identical feature header.
FeatureTable concat_tables(std::span<const FeatureTable> tables);

struct SyntheticConfig {
  std::size_t n_cohorts = 4;
  std::size_t subjects_per_cohort = 100;
  std::size_t n_features = 30;
  std::size_t n_informative = 8;
  double class_balance = 0.5;  // P(label = 1)
  double cohort_shift = 0.3;   // SD of the per-cohort offset on informative features
  double noise_sd = 1.0;
  std::uint64_t seed = 0;
  /// Optional; defaults to "A", "B", ... (or "cohort_1", ... past 26).
  std::vector<std::string> cohort_names;

  void validate() const;
  std::vector<std::string> resolved_cohort_names() const;
};

/// Seeded multi-cohort dataset. Informative feature j of subject s in cohort c
/// is (+1 if label else -1) + offset[c][j] + noise, with offset ~ N(0, shift^2)
/// and noise ~ N(0, noise_sd^2); the other features are pure noise.
///
/// Each (cohort, subject) draws from its own xoshiro256** stream, so growing
/// subjects_per_cohort appends subjects without altering existing ones.
FeatureTable generate_synthetic(const SyntheticConfig& cfg);

}  // namespace stabsel
