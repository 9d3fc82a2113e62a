#include <benchmark/benchmark.h>

#include "etpr/estimate.hpp"
#include "etpr/predict.hpp"
#include "etpr/simulate.hpp"

namespace {

using namespace etpr;

std::vector<CurveData> training(std::size_t m, std::size_t n) {
  SimConfig cfg = SimConfig::for_case(1);
  cfg.m = m;
  cfg.n_train = n;
  cfg.n_total = n + 10;
  Rng rng(1);
  return gen_case(cfg, rng).training();
}

void BM_LogPosterior(benchmark::State& state) {
  const auto data = training(4, static_cast<std::size_t>(state.range(0)));
  const EtprModel model = default_init(data);
  const PriorConfig priors;
  for (auto _ : state) benchmark::DoNotOptimize(log_posterior(model, data, priors));
}
BENCHMARK(BM_LogPosterior)->Arg(10)->Arg(40)->Arg(160);

void BM_GradLogPosterior(benchmark::State& state) {
  const auto data = training(4, static_cast<std::size_t>(state.range(0)));
  const EtprModel model = default_init(data);
  const PriorConfig priors;
  for (auto _ : state) benchmark::DoNotOptimize(grad_log_posterior(model, data, priors));
}
BENCHMARK(BM_GradLogPosterior)->Arg(10)->Arg(40)->Arg(160);

void BM_FitBetpr(benchmark::State& state) {
  const auto data = training(2, static_cast<std::size_t>(state.range(0)));
  FitOptions opts;
  opts.restarts = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_betpr_map(data, PriorConfig{}, std::nullopt, opts).objective);
  }
}
BENCHMARK(BM_FitBetpr)->Arg(10)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_PredictBatch(benchmark::State& state) {
  const auto data = training(1, 40);
  const EtprModel model = default_init(data);
  const Matrix u = Vector::LinSpaced(state.range(0), 0.0, 3.0);
  for (auto _ : state) benchmark::DoNotOptimize(predict_batch(model, 0, data[0], u));
}
BENCHMARK(BM_PredictBatch)->Arg(10)->Arg(100);

}  // namespace
BENCHMARK_MAIN();
