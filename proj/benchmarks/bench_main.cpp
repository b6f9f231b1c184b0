#include <benchmark/benchmark.h>

#include <numeric>

#include "prefelicit/design_space.hpp"
#include "prefelicit/engine.hpp"
#include "prefelicit/harness.hpp"
#include "prefelicit/pl_model.hpp"
#include "prefelicit/posterior.hpp"

using namespace prefelicit;

namespace {

GeneratedScenario replicationScenario() {
  ScenarioConfig sc;
  sc.seed = 7;
  return generateScenario(sc);
}

Dataset initialData(const GeneratedScenario& gs, int count) {
  Rng rng(8);
  return initializeData(gs.scenario, count, rng, gs.groundTruth);
}

void BM_ResponseHessianFullRanking(benchmark::State& state) {
  const GeneratedScenario gs = replicationScenario();
  std::vector<int> all(10);
  std::iota(all.begin(), all.end(), 0);
  Rng rng(1);
  const Response r = sampleResponse(gs.scenario, 5, Question{all, 9}, gs.groundTruth, rng);
  for (auto _ : state) benchmark::DoNotOptimize(responseHessian(gs.scenario, r, gs.groundTruth));
}
BENCHMARK(BM_ResponseHessianFullRanking);

void BM_FitPosterior(benchmark::State& state) {
  const GeneratedScenario gs = replicationScenario();
  const Dataset d = initialData(gs, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(fitPosterior(gs.scenario, d, Parameter::zeros(3, 3)));
  }
}
BENCHMARK(BM_FitPosterior)->Arg(50)->Arg(200);

void BM_SelectDesign(benchmark::State& state) {
  const GeneratedScenario gs = replicationScenario();
  const GaussianPosterior post = fitPosterior(gs.scenario, initialData(gs, 50), Parameter::zeros(3, 3));
  const auto designs = buildDesignSpace(gs.scenario, {{1, 2}, {1, 10}, {9, 10}});
  const CostModel costs = CostModel::builtinMturkHotels();
  const CriterionSpec spec = state.range(0) == 0   ? CriterionSpec::dOpt()
                             : state.range(0) == 1 ? CriterionSpec::eOpt()
                                                   : CriterionSpec::mpcGroup();
  state.SetLabel(toString(spec));
  Rng rng(2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(selectDesign(designs, post, gs.scenario, spec, costs, 0.9, GainConfig{}, rng));
  }
}
BENCHMARK(BM_SelectDesign)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
