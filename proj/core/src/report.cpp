#include "stabsel/report.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "stabsel/errors.hpp"
#include "stabsel/rng.hpp"
#include "stabsel/scoring.hpp"
#include "stabsel/stats.hpp"

#ifndef STABSEL_VERSION
#define STABSEL_VERSION "0.0.0"
#endif

namespace stabsel {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void config_error(const std::string& what) { throw ConfigError("config: " + what); }

void check_keys(const Json& obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) config_error(std::string(where) + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      config_error(fmt::format("unknown key '{}' in {}", key, where));
    }
  }
}

std::size_t get_count(const Json& obj, const char* key, std::size_t fallback, std::size_t min_value) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < static_cast<long long>(min_value)) {
    config_error(fmt::format("'{}' must be an integer >= {}", key, min_value));
  }
  return v.get<std::size_t>();
}

double get_number(const Json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number()) config_error(fmt::format("'{}' must be a number", key));
  return obj.at(key).get<double>();
}

std::string get_string(const Json& obj, const char* key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_string()) config_error(fmt::format("'{}' must be a string", key));
  return obj.at(key).get<std::string>();
}

std::vector<std::string> get_strings(const Json& v, std::string_view what) {
  if (!v.is_array()) config_error(std::string(what) + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) config_error(std::string(what) + " must be an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

Params parse_params(const Json& v, std::string_view owner) {
  Params out;
  if (!v.is_object()) config_error(fmt::format("params of {} must be an object", owner));
  for (const auto& [key, val] : v.items()) {
    if (!val.is_number()) config_error(fmt::format("param {}.{} must be a number", owner, key));
    out[key] = val.get<double>();
  }
  return out;
}

template <class Id, class ParseFn, class AllFn>
std::vector<std::pair<Id, Params>> parse_components(const Json& obj, const char* key, ParseFn parse, AllFn all) {
  std::vector<std::pair<Id, Params>> out;
  if (!obj.contains(key) || (obj.at(key).is_string() && obj.at(key).get<std::string>() == "all")) {
    for (Id id : all()) out.emplace_back(id, Params{});
    return out;
  }
  const auto& list = obj.at(key);
  if (!list.is_array() || list.empty()) config_error(fmt::format("'{}' must be \"all\" or a non-empty array", key));
  for (const auto& e : list) {
    std::string name;
    Params params;
    if (e.is_string()) {
      name = e.get<std::string>();
    } else if (e.is_object()) {
      check_keys(e, key, {"id", "params"});
      name = get_string(e, "id", "");
      if (e.contains("params")) params = parse_params(e.at("params"), name);
    } else {
      config_error(fmt::format("entries of '{}' must be ids or {{\"id\", \"params\"}} objects", key));
    }
    const auto id = parse(name);
    if (!id) config_error(fmt::format("unknown id '{}' in '{}'", name, key));
    for (const auto& [prev_id, prev_params] : out) {
      if (prev_id == *id && prev_params == params) config_error(fmt::format("duplicate entry '{}' in '{}'", name, key));
    }
    out.emplace_back(*id, std::move(params));
  }
  return out;
}

fs::path resolve(const fs::path& p, const fs::path& base) {
  if (p.empty()) return p;
  return fs::weakly_canonical(p.is_absolute() || base.empty() ? p : base / p);
}

Json params_json(const Params& p) {
  Json out = Json::object();
  for (const auto& [k, v] : p) out[k] = v;
  return out;
}

std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

}  // namespace

RunConfig parse_run_config(std::string_view json_text, const fs::path& base_dir) {
  Json doc;
  try {
    doc = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    config_error(std::string("invalid JSON: ") + e.what());
  }
  if (doc.is_object() && doc.contains("config") && doc.contains("config_hash")) doc = doc.at("config");

  check_keys(doc, "config",
             {"input", "schema", "cohorts", "folds", "target_dim", "metric_mode", "reducers", "classifiers",
              "grid_search", "top_n", "alpha", "seed", "output_dir"});

  RunConfig cfg;
  if (!doc.contains("input")) config_error("'input' is required");
  const auto& input = doc.at("input");
  const auto inputs = input.is_string() ? std::vector<std::string>{input.get<std::string>()} : get_strings(input, "'input'");
  if (inputs.empty()) config_error("'input' is empty");
  for (const auto& p : inputs) cfg.inputs.push_back(resolve(p, base_dir));

  if (doc.contains("schema")) {
    const auto& s = doc.at("schema");
    check_keys(s, "schema", {"id_col", "cohort_col", "label_col"});
    cfg.schema.id_col = get_string(s, "id_col", cfg.schema.id_col);
    cfg.schema.cohort_col = get_string(s, "cohort_col", cfg.schema.cohort_col);
    cfg.schema.label_col = get_string(s, "label_col", cfg.schema.label_col);
  }
  if (doc.contains("cohorts")) {
    const auto& c = doc.at("cohorts");
    check_keys(c, "cohorts", {"order", "cv_only"});
    if (c.contains("order")) cfg.cohort_order = get_strings(c.at("order"), "cohorts.order");
    if (c.contains("cv_only")) {
      for (auto& name : get_strings(c.at("cv_only"), "cohorts.cv_only")) cfg.cv_only.insert(std::move(name));
    }
  }

  cfg.folds = get_count(doc, "folds", cfg.folds, 2);
  cfg.target_dim = get_count(doc, "target_dim", cfg.target_dim, 1);
  const auto mode = get_string(doc, "metric_mode", std::string(to_string(cfg.metric_mode)));
  const auto parsed_mode = parse_averaging_mode(mode);
  if (!parsed_mode) config_error("metric_mode must be \"binary\" or \"weighted\"");
  cfg.metric_mode = *parsed_mode;

  cfg.reducers = parse_components<ReducerId>(doc, "reducers", parse_reducer, default_reducers);
  cfg.classifiers = parse_components<ClassifierId>(doc, "classifiers", parse_classifier, all_classifiers);

  if (doc.contains("grid_search")) {
    const auto& g = doc.at("grid_search");
    check_keys(g, "grid_search", {"enabled", "inner_k", "grid"});
    if (g.contains("enabled")) {
      if (!g.at("enabled").is_boolean()) config_error("grid_search.enabled must be a boolean");
      cfg.grid_search = g.at("enabled").get<bool>();
    }
    cfg.inner_k = get_count(g, "inner_k", cfg.inner_k, 2);
    if (g.contains("grid")) {
      if (!g.at("grid").is_array()) config_error("grid_search.grid must be an array");
      for (const auto& axis : g.at("grid")) {
        check_keys(axis, "grid_search.grid entry", {"target", "param", "values"});
        ParamAxis a;
        a.target = get_string(axis, "target", "");
        a.name = get_string(axis, "param", "");
        if (!parse_reducer(a.target) && !parse_classifier(a.target)) {
          config_error(fmt::format("grid target '{}' is not a reducer or classifier id", a.target));
        }
        if (a.name.empty()) config_error("grid entry needs a 'param'");
        if (!axis.contains("values") || !axis.at("values").is_array() || axis.at("values").empty()) {
          config_error(fmt::format("grid entry {}.{} needs a non-empty 'values' array", a.target, a.name));
        }
        for (const auto& v : axis.at("values")) {
          if (!v.is_number()) config_error(fmt::format("grid values of {}.{} must be numbers", a.target, a.name));
          a.values.push_back(v.get<double>());
        }
        cfg.grid.push_back(std::move(a));
      }
    }
  }

  cfg.top_n = get_count(doc, "top_n", cfg.top_n, 1);
  cfg.alpha = get_number(doc, "alpha", cfg.alpha);
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) config_error("alpha must be in (0, 1)");
  if (doc.contains("seed")) {
    const auto& s = doc.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
      config_error("seed must be a non-negative integer");
    }
    cfg.seed = s.get<std::uint64_t>();
  }
  cfg.output_dir = resolve(get_string(doc, "output_dir", cfg.output_dir.string()), base_dir);
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  return parse_run_config(read_file(path), fs::absolute(path).parent_path());
}

namespace {

Json config_json(const RunConfig& c) {
  Json j;
  Json inputs = Json::array();
  for (const auto& p : c.inputs) inputs.push_back(p.generic_string());
  j["input"] = inputs;
  j["schema"] = {{"id_col", c.schema.id_col}, {"cohort_col", c.schema.cohort_col}, {"label_col", c.schema.label_col}};
  j["cohorts"] = {{"order", c.cohort_order}, {"cv_only", Json(std::vector<std::string>(c.cv_only.begin(), c.cv_only.end()))}};
  j["folds"] = c.folds;
  j["target_dim"] = c.target_dim;
  j["metric_mode"] = std::string(to_string(c.metric_mode));
  Json reducers = Json::array();
  for (const auto& [id, p] : c.reducers) reducers.push_back({{"id", std::string(to_string(id))}, {"params", params_json(p)}});
  j["reducers"] = reducers;
  Json classifiers = Json::array();
  for (const auto& [id, p] : c.classifiers) classifiers.push_back({{"id", std::string(to_string(id))}, {"params", params_json(p)}});
  j["classifiers"] = classifiers;
  Json grid = Json::array();
  for (const auto& a : c.grid) grid.push_back({{"target", a.target}, {"param", a.name}, {"values", a.values}});
  j["grid_search"] = {{"enabled", c.grid_search}, {"inner_k", c.inner_k}, {"grid", grid}};
  j["top_n"] = c.top_n;
  j["alpha"] = c.alpha;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir.generic_string();
  return j;
}

}  // namespace

std::string canonical_config(const RunConfig& config) { return config_json(config).dump(); }

std::uint64_t config_hash(const RunConfig& config) { return fnv1a(canonical_config(config)); }

std::vector<PipelineSpec> build_specs(const RunConfig& config) {
  std::vector<PipelineSpec> specs;
  for (const auto& [r, rp] : config.reducers) {
    for (const auto& [c, cp] : config.classifiers) {
      PipelineSpec s;
      s.reducer = r;
      s.reducer_params = rp;
      s.classifier = c;
      s.classifier_params = cp;
      s.target_dim = config.target_dim;
      s.seed = derive_seed(config.seed, {fnv1a(s.id())});
      specs.push_back(std::move(s));
    }
  }
  return specs;
}

EvalOptions eval_options(const RunConfig& config) {
  EvalOptions o;
  o.k = config.folds;
  o.fold_seed = derive_seed(config.seed, {0xF01D});
  o.mode = config.metric_mode;
  o.grid_search = config.grid_search;
  o.inner_k = config.inner_k;
  o.grid = config.grid;
  return o;
}

std::string format_mean_sd(double mean, double sd) { return fmt::format("{:.2f} ± {:.2f}", mean, sd); }

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char ch : text) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

namespace {

enum class Block { Cv, External };

// Mean over rotations of the per-rotation means, and the sample SD across them.
std::pair<double, double> across_rotations(const PipelineResult& p, Block block, std::size_t metric) {
  std::vector<double> v;
  for (const auto& rot : p.rotations) {
    v.push_back(block == Block::Cv ? rot.record.cv_mean[metric] : rot.record.ext_mean[metric]);
  }
  return {mean(v), sample_sd(v)};
}

void write_header(std::ostream& out, std::initializer_list<std::string_view> lead, std::string_view prefix) {
  bool first = true;
  for (auto h : lead) {
    out << (first ? "" : ",") << h;
    first = false;
  }
  for (auto m : kAllMetrics) out << ',' << prefix << metric_name(m);
}

void write_aggregate(const ReportInputs& in, std::ostream& out, Block block, std::size_t n_rows) {
  write_header(out, {"DRA+CA", "Rank", "Score"}, "");
  out << '\n';
  for (std::size_t i = 0; i < n_rows; ++i) {
    const auto& card = (*in.ranking)[i];
    const auto& p = in.sweep->pipelines[card.pipeline_index];
    out << csv_field(card.pipeline_id) << ',' << card.rank << ',' << fmt::format("{:.6f}", card.final_score);
    for (std::size_t m = 0; m < kMetricCount; ++m) {
      const auto [mu, sd] = across_rotations(p, block, m);
      out << ',' << format_mean_sd(mu, sd);
    }
    out << '\n';
  }
}

Json metrics_json(const MetricArray& a) {
  Json j = Json::object();
  for (auto m : kAllMetrics) j[std::string(metric_key(m))] = a[static_cast<std::size_t>(m)];
  return j;
}

Json metric_vector_json(const MetricVector& v) {
  Json j = metrics_json(v.metrics.values);
  j["auc_undefined"] = v.auc_undefined;
  return j;
}

}  // namespace

void write_ranking_csv(const ReportInputs& in, std::ostream& out) {
  write_aggregate(in, out, Block::Cv, in.ranking->size());
}

void write_external_csv(const ReportInputs& in, std::ostream& out) {
  write_aggregate(in, out, Block::External, std::min(in.top_n, in.ranking->size()));
}

void write_rotation_csv(const ReportInputs& in, std::size_t rotation, std::ostream& out) {
  write_header(out, {"DRA+CA", "Score", "Rank"}, "CV ");
  for (auto m : kAllMetrics) out << ",External " << metric_name(m);
  out << '\n';
  const std::size_t n = std::min(in.top_n, in.ranking->size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& card = (*in.ranking)[i];
    const auto& rec = in.sweep->pipelines[card.pipeline_index].rotations.at(rotation).record;
    out << csv_field(card.pipeline_id) << ',' << fmt::format("{:.6f}", card.final_score) << ',' << card.rank;
    for (std::size_t m = 0; m < kMetricCount; ++m) out << ',' << format_mean_sd(rec.cv_mean[m], rec.cv_sd[m]);
    for (std::size_t m = 0; m < kMetricCount; ++m) out << ',' << format_mean_sd(rec.ext_mean[m], rec.ext_sd[m]);
    out << '\n';
  }
}

void write_full_dump(const ReportInputs& in, std::ostream& out) {
  const auto& sweep = *in.sweep;
  const auto& table = *in.table;
  Json doc;
  doc["k"] = sweep.k;
  doc["metric_mode"] = std::string(to_string(in.metric_mode));
  doc["metrics"] = Json::array();
  for (auto m : kAllMetrics) doc["metrics"].push_back(std::string(metric_key(m)));

  // Fold membership is shared by every pipeline; record it once per rotation.
  const PipelineResult* reference = nullptr;
  for (const auto& p : sweep.pipelines) {
    if (p.ok) {
      reference = &p;
      break;
    }
  }
  Json rotations = Json::array();
  for (std::size_t r = 0; r < sweep.rotations.size(); ++r) {
    const auto& rot = sweep.rotations[r];
    Json jr = {{"rotation", r + 1}, {"test_cohort", rot.test}, {"train_cohorts", rot.train}};
    if (reference) {
      Json folds = Json::array();
      for (const auto& f : reference->rotations[r].folds) {
        Json ids = Json::array();
        for (auto row : f.heldout_rows) ids.push_back(table.subject_ids[row]);
        folds.push_back(ids);
      }
      jr["heldout_subjects"] = folds;
    }
    rotations.push_back(jr);
  }
  doc["rotations"] = rotations;

  std::vector<const ScoreCard*> card_of(sweep.pipelines.size(), nullptr);
  Json ranking = Json::array();
  for (const auto& c : *in.ranking) {
    card_of[c.pipeline_index] = &c;
    ranking.push_back(c.pipeline_id);
  }
  doc["ranking"] = ranking;

  Json pipelines = Json::array();
  for (std::size_t i = 0; i < sweep.pipelines.size(); ++i) {
    const auto& p = sweep.pipelines[i];
    Json jp;
    jp["id"] = p.id;
    jp["reducer"] = std::string(to_string(p.spec.reducer));
    jp["reducer_params"] = params_json(p.spec.reducer_params);
    jp["classifier"] = std::string(to_string(p.spec.classifier));
    jp["classifier_params"] = params_json(p.spec.classifier_params);
    jp["target_dim"] = p.spec.target_dim;
    jp["seed"] = p.spec.seed;
    jp["ok"] = p.ok;
    if (!p.ok) {
      jp["error"] = p.error;
      pipelines.push_back(jp);
      continue;
    }
    const ScoreCard* card = card_of[i];
    if (card) {
      jp["rank"] = card->rank;
      jp["final_score"] = card->final_score;
      jp["mean_cv_accuracy"] = card->mean_cv_accuracy;
    }
    Json jrots = Json::array();
    for (std::size_t r = 0; r < p.rotations.size(); ++r) {
      const auto& ro = p.rotations[r];
      Json jr;
      jr["rotation"] = r + 1;
      jr["test_cohort"] = ro.record.test_cohort;
      jr["cv_mean"] = metrics_json(ro.record.cv_mean);
      jr["cv_sd"] = metrics_json(ro.record.cv_sd);
      jr["ext_mean"] = metrics_json(ro.record.ext_mean);
      jr["ext_sd"] = metrics_json(ro.record.ext_sd);
      if (card) {
        jr["norm_mean"] = metrics_json(card->norm_mean[r]);
        jr["norm_sd"] = metrics_json(card->norm_sd[r]);
        jr["stability"] = metrics_json(card->stability[r]);
      }
      Json jfolds = Json::array();
      for (const auto& f : ro.folds) {
        Json jf;
        jf["fold"] = f.fold;
        jf["n_train"] = f.train_rows.size();
        jf["n_heldout"] = f.heldout_rows.size();
        jf["cv"] = metric_vector_json(f.cv);
        jf["external"] = metric_vector_json(f.external);
        jf["reducer_params"] = params_json(f.fitted_spec.reducer_params);
        jf["classifier_hyperparameters"] = params_json(f.classifier_hyperparameters);
        jf["model_seed"] = f.fitted_spec.seed;
        jf["reduced_dim"] = f.reduced_dim;
        jf["selected_features"] = f.selected_features;
        jf["minmax_fingerprint"] = hex64(f.minmax_fingerprint);
        jf["reducer_digest"] = hex64(f.reducer_digest);
        jf["classifier_digest"] = hex64(f.classifier_digest);
        jf["warnings"] = f.warnings;
        jfolds.push_back(jf);
      }
      jr["folds"] = jfolds;
      jrots.push_back(jr);
    }
    jp["rotations"] = jrots;
    pipelines.push_back(jp);
  }
  doc["pipelines"] = pipelines;
  out << doc.dump(1) << '\n';
}

void write_comparison_csv(const ComparisonReport& report, std::ostream& out) {
  out << "Model A,Rank A,Model B,Rank B,Mean Difference,t,p,p (BH),Rejected\n";
  for (const auto& pc : report.pairs) {
    out << csv_field(pc.model_a) << ',' << pc.rank_a << ',' << csv_field(pc.model_b) << ',' << pc.rank_b << ','
        << fmt::format("{:.6f},{:.6f},{:.6g},{:.6g}", pc.mean_difference, pc.t, pc.p_value, pc.p_adjusted) << ','
        << (pc.rejected ? "yes" : "no") << '\n';
  }
}

RunSummary cmd_run(const RunConfig& config, const RunOptions& options) {
  std::vector<FeatureTable> parts;
  for (const auto& p : config.inputs) parts.push_back(read_csv(p, config.schema));
  const FeatureTable table = parts.size() == 1 ? std::move(parts.front()) : concat_tables(parts);
  const CohortPlan plan = CohortPlan::from_table(table, config.cv_only, config.cohort_order);

  const auto specs = build_specs(config);
  SweepOptions sweep_opts;
  static_cast<EvalOptions&>(sweep_opts) = eval_options(config);
  sweep_opts.workers = options.workers;
  const SweepResult sweep = run_sweep(table, plan, specs, sweep_opts);

  RunSummary summary;
  summary.n_pipelines = sweep.pipelines.size();
  summary.n_failed = sweep.n_failed();
  for (const auto& p : sweep.pipelines) {
    if (!p.ok) summary.quarantined.emplace_back(p.id, p.error);
  }
  if (summary.n_failed < summary.n_pipelines) summary.ranking = rank_pipelines(normalize_scores(sweep));

  fs::create_directories(config.output_dir);
  auto emit = [&](const std::string& name, auto&& writer) {
    const fs::path path = config.output_dir / name;
    auto out = open_out(path);
    writer(out);
    summary.files.push_back(path);
  };
  const ReportInputs in{&table, &sweep, &summary.ranking, config.top_n, config.metric_mode};
  emit("ranking.csv", [&](std::ostream& o) { write_ranking_csv(in, o); });
  emit("external.csv", [&](std::ostream& o) { write_external_csv(in, o); });
  for (std::size_t r = 0; r < plan.n_rotations() && !summary.ranking.empty(); ++r) {
    emit(fmt::format("rotation_{}_{}.csv", r + 1, plan.rotation(r).test),
         [&](std::ostream& o) { write_rotation_csv(in, r, o); });
  }
  emit("full_dump.json", [&](std::ostream& o) { write_full_dump(in, o); });
  if (summary.ranking.size() >= 2) {
    const auto report = compare_top(sweep, summary.ranking, config.top_n, config.alpha);
    emit("comparison.csv", [&](std::ostream& o) { write_comparison_csv(report, o); });
  }

  Json manifest;
  manifest["tool"] = "stabsel";
  manifest["version"] = STABSEL_VERSION;
  manifest["config_hash"] = hex64(config_hash(config));
  manifest["seed"] = config.seed;
  Json digests = Json::array();
  for (const auto& p : config.inputs) digests.push_back({{"path", p.generic_string()}, {"fnv1a", hex64(fnv1a(read_file(p)))}});
  manifest["inputs"] = digests;
  manifest["n_pipelines"] = summary.n_pipelines;
  manifest["n_failed"] = summary.n_failed;
  Json quarantined = Json::array();
  for (const auto& [id, err] : summary.quarantined) quarantined.push_back({{"id", id}, {"error", err}});
  manifest["quarantined"] = quarantined;
  Json files = Json::array();
  for (const auto& f : summary.files) files.push_back(f.filename().string());
  manifest["files"] = files;
  manifest["config"] = config_json(config);
  emit("manifest.json", [&](std::ostream& o) { o << manifest.dump(2) << '\n'; });

  summary.exit_code = summary.n_failed == 0 || options.allow_failures ? 0 : 1;
  return summary;
}

void cmd_gen_synth(const SyntheticConfig& config, const fs::path& out) {
  const auto table = generate_synthetic(config);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_csv(table, out);
}

ComparisonReport cmd_compare(const fs::path& dir, std::size_t top_n, double alpha) {
  const fs::path dump_path = dir / "full_dump.json";
  if (!fs::exists(dump_path)) throw ConfigError("no full_dump.json in " + dir.string());
  Json doc;
  try {
    doc = Json::parse(read_file(dump_path));
  } catch (const Json::exception& e) {
    throw ConfigError(dump_path.string() + ": " + e.what());
  }

  std::vector<RankedSeries> series;
  try {
    std::map<std::string, const Json*> by_id;
    for (const auto& p : doc.at("pipelines")) by_id[p.at("id").get<std::string>()] = &p;
    const auto& ranking = doc.at("ranking");
    for (std::size_t i = 0; i < ranking.size() && series.size() < top_n; ++i) {
      const auto& p = *by_id.at(ranking[i].get<std::string>());
      RankedSeries s;
      s.id = p.at("id").get<std::string>();
      s.rank = p.at("rank").get<std::size_t>();
      for (const auto& rot : p.at("rotations")) {
        for (const auto& f : rot.at("folds")) s.fold_accuracies.push_back(f.at("cv").at("accuracy").get<double>());
      }
      series.push_back(std::move(s));
    }
  } catch (const std::exception& e) {
    throw ConfigError(dump_path.string() + ": malformed dump (" + e.what() + ")");
  }
  if (series.size() < 2) throw ConfigError("compare needs at least two ranked pipelines in " + dump_path.string());

  auto report = compare_series(series, alpha);
  auto out = open_out(dir / "comparison.csv");
  write_comparison_csv(report, out);
  return report;
}

}  // namespace stabsel
