#include <benchmark/benchmark.h>

#include <stabsel/classification.hpp>
#include <stabsel/harness.hpp>
#include <stabsel/ingestion.hpp>
#include <stabsel/metrics.hpp>
#include <stabsel/preprocessing.hpp>
#include <stabsel/reduction.hpp>
#include <stabsel/rng.hpp>

namespace {

using namespace stabsel;

const FeatureTable& desk_table() {
  static const FeatureTable table = [] {
    SyntheticConfig cfg;
    cfg.seed = 7;
    return generate_synthetic(cfg);
  }();
  return table;
}

PipelineSpec spec_of(ReducerId r, ClassifierId c) {
  PipelineSpec s;
  s.reducer = r;
  s.classifier = c;
  s.target_dim = 10;
  s.seed = 1;
  return s;
}

void BM_RocAuc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  std::vector<int> y(n);
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = rng.bernoulli(0.5) ? 1 : 0;
    s[i] = rng.uniform();
  }
  for (auto _ : state) benchmark::DoNotOptimize(roc_auc(y, s));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RocAuc)->RangeMultiplier(4)->Range(64, 16384)->Complexity();

// Min-max scaled features of the whole table, as reducers see them in a fold.
const Matrix& scaled() {
  static const Matrix X = [] {
    const auto& t = desk_table();
    RowIndices rows(t.n_subjects());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    return transform_minmax(fit_minmax(t, rows), t, rows);
  }();
  return X;
}

void BM_FitClassifier(benchmark::State& state) {
  const auto id = all_classifiers()[static_cast<std::size_t>(state.range(0))];
  const auto& t = desk_table();
  state.SetLabel(std::string(to_string(id)));
  for (auto _ : state) benchmark::DoNotOptimize(fit_classifier(spec_of(ReducerId::VT, id), scaled(), t.labels));
}
BENCHMARK(BM_FitClassifier)->DenseRange(0, 8)->Unit(benchmark::kMillisecond);

void BM_FitReducer(benchmark::State& state) {
  const auto id = all_reducers()[static_cast<std::size_t>(state.range(0))];
  const auto& t = desk_table();
  state.SetLabel(std::string(to_string(id)));
  for (auto _ : state) benchmark::DoNotOptimize(fit_reducer(spec_of(id, ClassifierId::NC), scaled(), t.labels));
}
BENCHMARK(BM_FitReducer)->DenseRange(0, 12)->Unit(benchmark::kMillisecond);

void BM_RunRotation(benchmark::State& state) {
  const auto& t = desk_table();
  const auto plan = CohortPlan::from_table(t, {});
  const auto spec = spec_of(ReducerId::MI, ClassifierId::RandF);
  for (auto _ : state) benchmark::DoNotOptimize(run_rotation(t, plan, 0, spec));
}
BENCHMARK(BM_RunRotation)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
