// stabsel: run a pipeline sweep, generate synthetic cohorts, compare top models.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "stabsel/errors.hpp"
#include "stabsel/report.hpp"

namespace {

int run(const std::string& config_path, std::size_t workers, bool allow_failures) {
  const auto config = stabsel::load_run_config(config_path);
  const auto summary = stabsel::cmd_run(config, {workers, allow_failures});

  std::cout << fmt::format("{} pipelines, {} failed\n", summary.n_pipelines, summary.n_failed);
  for (const auto& [id, error] : summary.quarantined) std::cerr << "quarantined " << id << ": " << error << '\n';
  const std::size_t shown = std::min<std::size_t>(summary.ranking.size(), config.top_n);
  for (std::size_t i = 0; i < shown; ++i) {
    const auto& c = summary.ranking[i];
    std::cout << fmt::format("{:>4}  {:.6f}  {}\n", c.rank, c.final_score, c.pipeline_id);
  }
  std::cout << "wrote " << config.output_dir.string() << '\n';
  if (summary.exit_code != 0) std::cerr << "pipelines failed; rerun with --allow-failures to accept\n";
  return summary.exit_code;
}

int compare(const std::string& dir, std::size_t top, double alpha) {
  const auto report = stabsel::cmd_compare(dir, top, alpha);
  stabsel::write_comparison_csv(report, std::cout);
  std::cout << fmt::format("{} of {} comparisons rejected at alpha={}\n", report.n_rejected, report.pairs.size(),
                           report.alpha);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rotational-validation model selection for tabular binary classifiers"};
  app.require_subcommand(1);

  std::string config_path;
  std::size_t workers = 1;
  bool allow_failures = false;
  auto* run_cmd = app.add_subcommand("run", "Sweep every reducer x classifier pipeline and write reports");
  run_cmd->add_option("--config", config_path, "JSON run config (or a previous manifest.json)")
      ->required()
      ->check(CLI::ExistingFile);
  run_cmd->add_option("--workers", workers, "Worker threads (0 = all cores)");
  run_cmd->add_flag("--allow-failures", allow_failures, "Exit 0 even if some pipelines were quarantined");

  stabsel::SyntheticConfig synth;
  std::string synth_out;
  auto* gen_cmd = app.add_subcommand("gen-synth", "Write a seeded multi-cohort synthetic CSV");
  gen_cmd->add_option("--out", synth_out, "Output CSV path")->required();
  gen_cmd->add_option("--cohorts", synth.n_cohorts, "Number of cohorts")->capture_default_str();
  gen_cmd->add_option("--subjects", synth.subjects_per_cohort, "Subjects per cohort")->capture_default_str();
  gen_cmd->add_option("--features", synth.n_features, "Feature count")->capture_default_str();
  gen_cmd->add_option("--informative", synth.n_informative, "Informative features")->capture_default_str();
  gen_cmd->add_option("--balance", synth.class_balance, "P(label = 1)")->capture_default_str();
  gen_cmd->add_option("--shift", synth.cohort_shift, "SD of per-cohort offsets")->capture_default_str();
  gen_cmd->add_option("--noise", synth.noise_sd, "Noise SD")->capture_default_str();
  gen_cmd->add_option("--seed", synth.seed, "Seed")->capture_default_str();
  gen_cmd->add_option("--names", synth.cohort_names, "Cohort names");

  std::string compare_dir;
  std::size_t top = 10;
  double alpha = 0.05;
  auto* cmp_cmd = app.add_subcommand("compare", "Paired t-tests with BH correction among the top models of a run");
  cmp_cmd->add_option("--dir", compare_dir, "Run output directory")->required();
  cmp_cmd->add_option("--top", top, "Number of top-ranked models")->capture_default_str();
  cmp_cmd->add_option("--alpha", alpha, "FDR level")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return run(config_path, workers, allow_failures);
    if (*gen_cmd) {
      stabsel::cmd_gen_synth(synth, synth_out);
      std::cout << "wrote " << synth_out << '\n';
      return 0;
    }
    if (*cmp_cmd) return compare(compare_dir, top, alpha);
  } catch (const stabsel::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
