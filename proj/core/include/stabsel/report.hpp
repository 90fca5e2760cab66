#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stabsel/data_model.hpp"
#include "stabsel/harness.hpp"
#include "stabsel/ingestion.hpp"
#include "stabsel/metrics.hpp"

namespace stabsel {

/// Everything that determines a run. Parsed from JSON; see README for the schema.
struct RunConfig {
  std::vector<std::filesystem::path> inputs;
  CsvSchema schema;
  std::vector<std::string> cohort_order;  // empty: order of first appearance
  std::set<std::string> cv_only;
  std::size_t folds = 5;
  std::size_t target_dim = 10;
  AveragingMode metric_mode = AveragingMode::Weighted;
  std::vector<std::pair<ReducerId, Params>> reducers;
  std::vector<std::pair<ClassifierId, Params>> classifiers;
  bool grid_search = false;
  std::size_t inner_k = 3;
  ParamGrid grid;
  std::size_t top_n = 10;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "stabsel_out";
};

/// Parses a config document. A manifest.json written by cmd_run is accepted
/// too (its "config" member is used). Relative paths resolve against
/// `base_dir`. Throws ConfigError on unknown keys, bad types or unknown ids.
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Canonical JSON for the config (fixed key order, absolute paths); hashed into
/// the manifest and accepted back by parse_run_config.
std::string canonical_config(const RunConfig& config);
std::uint64_t config_hash(const RunConfig& config);

/// reducers x classifiers, reducer-major. Each spec's seed is derived from the
/// global seed and the pipeline id, so it does not depend on list order.
std::vector<PipelineSpec> build_specs(const RunConfig& config);
EvalOptions eval_options(const RunConfig& config);

struct RunOptions {
  std::size_t workers = 1;
  bool allow_failures = false;
};

struct RunSummary {
  std::size_t n_pipelines = 0;
  std::size_t n_failed = 0;
  std::vector<std::pair<std::string, std::string>> quarantined;  // id, error
  std::vector<ScoreCard> ranking;
  std::vector<std::filesystem::path> files;
  /// 0 iff every pipeline completed or failures were allowed.
  int exit_code = 0;
};

/// ingestion -> sweep -> scoring -> reports in config.output_dir.
RunSummary cmd_run(const RunConfig& config, const RunOptions& options = {});

/// The report writers behind cmd_run, usable on any scored sweep.
struct ReportInputs {
  const FeatureTable* table = nullptr;
  const SweepResult* sweep = nullptr;
  const std::vector<ScoreCard>* ranking = nullptr;
  std::size_t top_n = 10;
  AveragingMode metric_mode = AveragingMode::Weighted;
};
/// Every ranked pipeline; CV mean over rotations plus/minus the sample SD of
/// the rotation means.
void write_ranking_csv(const ReportInputs& in, std::ostream& out);
/// top_n pipelines, external metrics aggregated likewise.
void write_external_csv(const ReportInputs& in, std::ostream& out);
/// top_n pipelines, CV and external blocks of one rotation.
void write_rotation_csv(const ReportInputs& in, std::size_t rotation, std::ostream& out);
void write_full_dump(const ReportInputs& in, std::ostream& out);

/// Writes the table to `out` as CSV.
void cmd_gen_synth(const SyntheticConfig& config, const std::filesystem::path& out);

/// Reads <dir>/full_dump.json, compares the top_n ranked pipelines and writes
/// <dir>/comparison.csv. Throws ConfigError when the dump is missing.
ComparisonReport cmd_compare(const std::filesystem::path& dir, std::size_t top_n = 10, double alpha = 0.05);
void write_comparison_csv(const ComparisonReport& report, std::ostream& out);

/// "0.94 ± 0.02"
std::string format_mean_sd(double mean, double sd);
/// Quotes the field if it contains a comma, quote or newline.
std::string csv_field(std::string_view text);

}  // namespace stabsel
