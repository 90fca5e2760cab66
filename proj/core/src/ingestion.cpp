#include "stabsel/ingestion.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <system_error>

#include <fmt/format.h>

#include "stabsel/errors.hpp"
#include "stabsel/rng.hpp"

namespace stabsel {
namespace {

std::vector<std::string> split_record(std::string_view line, std::size_t line_no, std::string_view source) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw ParseError(fmt::format("{}:{}: unterminated quoted field", source, line_no));
  fields.push_back(std::move(cur));
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

FeatureTable parse_csv(std::istream& in, const CsvSchema& schema, std::string_view source) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (trim(line).empty()) continue;
    header = split_record(line, line_no, source);
    break;
  }
  if (header.empty()) throw SchemaError(fmt::format("{}: missing header row", source));
  for (auto& h : header) h = std::string(trim(h));

  auto find_col = [&](const std::string& name, std::string_view role) {
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (header[j] == name) return j;
    }
    throw SchemaError(fmt::format("{}: {} not found (expected column '{}')", source, role, name));
  };
  const std::size_t id_col = find_col(schema.id_col, "id_col");
  const std::size_t cohort_col = find_col(schema.cohort_col, "cohort_col");
  const std::size_t label_col = find_col(schema.label_col, "label_col");

  FeatureTable table;
  std::vector<std::size_t> feature_cols;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j == id_col || j == cohort_col || j == label_col) continue;
    feature_cols.push_back(j);
    table.feature_names.push_back(header[j]);
  }

  std::vector<double> flat;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_record(line, line_no, source);
    if (fields.size() != header.size()) {
      throw ParseError(fmt::format("{}:{}: expected {} fields, found {}", source, line_no, header.size(),
                                   fields.size()));
    }
    table.subject_ids.emplace_back(trim(fields[id_col]));
    table.cohort_ids.emplace_back(trim(fields[cohort_col]));

    const auto label_text = trim(fields[label_col]);
    int label = 0;
    const auto lres = std::from_chars(label_text.data(), label_text.data() + label_text.size(), label);
    if (lres.ec != std::errc{} || lres.ptr != label_text.data() + label_text.size()) {
      throw ParseError(fmt::format("{}:{}: label '{}' is not an integer", source, line_no, label_text));
    }
    table.labels.push_back(label);

    for (std::size_t j : feature_cols) {
      const auto cell = trim(fields[j]);
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || res.ec != std::errc{} || res.ptr != cell.data() + cell.size()) {
        throw ParseError(fmt::format("{}:{}: column '{}' (col {}): non-numeric value '{}'", source, line_no,
                                     header[j], j + 1, cell));
      }
      flat.push_back(v);
    }
  }

  const auto n = static_cast<Eigen::Index>(table.subject_ids.size());
  const auto p = static_cast<Eigen::Index>(feature_cols.size());
  table.values = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      flat.data(), n, p);
  require_valid(table);
  return table;
}

FeatureTable read_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  return parse_csv(in, schema, path.string());
}

void write_csv(const FeatureTable& table, std::ostream& out, const CsvSchema& schema) {
  out << quote_if_needed(schema.id_col) << ',' << quote_if_needed(schema.cohort_col) << ','
      << quote_if_needed(schema.label_col);
  for (const auto& f : table.feature_names) out << ',' << quote_if_needed(f);
  out << '\n';
  for (std::size_t i = 0; i < table.n_subjects(); ++i) {
    out << quote_if_needed(table.subject_ids[i]) << ',' << quote_if_needed(table.cohort_ids[i]) << ','
        << table.labels[i];
    for (Eigen::Index j = 0; j < table.values.cols(); ++j) {
      out << ',' << format_double(table.values(static_cast<Eigen::Index>(i), j));
    }
    out << '\n';
  }
}

void write_csv(const FeatureTable& table, const std::filesystem::path& path, const CsvSchema& schema) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  write_csv(table, out, schema);
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

FeatureTable concat_tables(std::span<const FeatureTable> tables) {
  if (tables.empty()) throw InvalidArgument("concat_tables: no tables");
  FeatureTable out;
  out.feature_names = tables.front().feature_names;
  Eigen::Index rows = 0;
  for (const auto& t : tables) {
    if (t.feature_names != out.feature_names) {
      throw SchemaError("concat_tables: input tables have different feature columns");
    }
    rows += t.values.rows();
  }
  out.values.resize(rows, static_cast<Eigen::Index>(out.feature_names.size()));
  Eigen::Index at = 0;
  for (const auto& t : tables) {
    out.subject_ids.insert(out.subject_ids.end(), t.subject_ids.begin(), t.subject_ids.end());
    out.cohort_ids.insert(out.cohort_ids.end(), t.cohort_ids.begin(), t.cohort_ids.end());
    out.labels.insert(out.labels.end(), t.labels.begin(), t.labels.end());
    out.values.middleRows(at, t.values.rows()) = t.values;
    at += t.values.rows();
  }
  require_valid(out);
  return out;
}

void SyntheticConfig::validate() const {
  if (n_cohorts < 1) throw InvalidArgument("n_cohorts must be >= 1");
  if (subjects_per_cohort < 1) throw InvalidArgument("subjects_per_cohort must be >= 1");
  if (n_features < 1) throw InvalidArgument("n_features must be >= 1");
  if (n_informative > n_features) throw InvalidArgument("n_informative must be <= n_features");
  if (!(class_balance > 0.0 && class_balance < 1.0)) throw InvalidArgument("class_balance must be in (0,1)");
  if (!(cohort_shift >= 0.0)) throw InvalidArgument("cohort_shift must be >= 0");
  if (!(noise_sd > 0.0)) throw InvalidArgument("noise_sd must be > 0");
  if (!cohort_names.empty() && cohort_names.size() != n_cohorts) {
    throw InvalidArgument("cohort_names must have n_cohorts entries");
  }
}

std::vector<std::string> SyntheticConfig::resolved_cohort_names() const {
  if (!cohort_names.empty()) return cohort_names;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < n_cohorts; ++c) {
    names.push_back(n_cohorts <= 26 ? std::string(1, static_cast<char>('A' + c)) : fmt::format("cohort_{}", c + 1));
  }
  return names;
}

FeatureTable generate_synthetic(const SyntheticConfig& cfg) {
  cfg.validate();
  const auto names = cfg.resolved_cohort_names();
  const std::size_t n = cfg.n_cohorts * cfg.subjects_per_cohort;
  constexpr std::uint64_t kOffsetStream = 0x0FF5E7;

  FeatureTable table;
  table.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cfg.n_features));
  for (std::size_t j = 0; j < cfg.n_features; ++j) table.feature_names.push_back(fmt::format("f{:03d}", j + 1));

  std::size_t row = 0;
  for (std::size_t c = 0; c < cfg.n_cohorts; ++c) {
    Rng offset_rng(derive_seed(cfg.seed, {kOffsetStream, c}));
    std::vector<double> offsets(cfg.n_informative);
    for (auto& o : offsets) o = cfg.cohort_shift * offset_rng.normal();

    for (std::size_t s = 0; s < cfg.subjects_per_cohort; ++s, ++row) {
      Rng rng(derive_seed(cfg.seed, {c, s}));
      const int label = rng.bernoulli(cfg.class_balance) ? 1 : 0;
      table.subject_ids.push_back(fmt::format("{}_{:04d}", names[c], s + 1));
      table.cohort_ids.push_back(names[c]);
      table.labels.push_back(label);
      const double centre = label == 1 ? 1.0 : -1.0;
      for (std::size_t j = 0; j < cfg.n_features; ++j) {
        const double noise = cfg.noise_sd * rng.normal();
        table.values(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j)) =
            j < cfg.n_informative ? centre + offsets[j] + noise : noise;
      }
    }
  }
  return table;
}

}  // namespace stabsel
