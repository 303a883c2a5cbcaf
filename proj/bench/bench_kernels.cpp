#include <benchmark/benchmark.h>

#include <random>

#include "tailrisk/econ.hpp"
#include "tailrisk/ensemble.hpp"
#include "tailrisk/nn.hpp"
#include "tailrisk/parallel.hpp"
#include "tailrisk/rolling.hpp"
#include "tailrisk/synth.hpp"
#include "tailrisk/timeseries.hpp"

using namespace tailrisk;

namespace {

// Arg 0 runs the serial twin, otherwise the OpenMP kernel with that many workers.

const ReturnSeries& market() {
  static const ReturnSeries r = ts::log_returns(synth::regime_prices(20001, 3));
  return r;
}

void BM_rolling_hist_var(benchmark::State& state) {
  const ScopedWorkers workers(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto t = state.range(0) == 0 ? ts::rolling_hist_var_serial(market(), {0.01, 2880})
                                 : ts::rolling_hist_var(market(), {0.01, 2880});
    benchmark::DoNotOptimize(t.upper.data());
  }
}

void BM_lpa_select(benchmark::State& state) {
  const ScopedWorkers workers(static_cast<int>(state.range(0)));
  std::vector<double> losses;
  for (std::size_t t = 0; t < 960; ++t) losses.push_back(-market()[t]);
  econ::LpaOptions opt;
  opt.max_length = 960;
  opt.bootstrap = 50;
  for (auto _ : state) {
    auto h = state.range(0) == 0 ? econ::lpa_select_interval_serial(losses, losses.size() - 1, opt)
                                 : econ::lpa_select_interval(losses, losses.size() - 1, opt);
    benchmark::DoNotOptimize(h.start);
  }
}

struct NnBatch {
  nn::FeatureMatrix features;
  nn::Network net{nn::Arch::Lstm};
  std::vector<std::size_t> rows;
  std::vector<int> targets;
  std::vector<std::vector<double>> masks;
};

const NnBatch& nn_batch() {
  static const NnBatch b = [] {
    NnBatch out;
    const ReturnSeries r = ts::log_returns(synth::regime_prices(2001, 5));
    out.features = nn::build_features(r, ts::rolling_hist_var(r, {0.05, 24}), nn::Arch::Lstm);
    out.net = nn::Network::initialised(nn::Arch::Lstm, 1);
    std::mt19937_64 rng(2);
    for (std::size_t i = 0; i < 128; ++i) {
      out.rows.push_back(rng() % out.features.rows());
      out.targets.push_back(static_cast<int>(rng() % 3));
      out.masks.push_back(out.net.draw_mask(rng));
    }
    return out;
  }();
  return b;
}

void BM_lstm_batch_gradient(benchmark::State& state) {
  const ScopedWorkers workers(static_cast<int>(state.range(0)));
  const NnBatch& b = nn_batch();
  std::vector<double> grad(b.net.parameter_count());
  for (auto _ : state) {
    const double loss = state.range(0) == 0
                            ? nn::batch_gradient_serial(b.net, b.features, b.rows, b.targets, b.masks, grad)
                            : nn::batch_gradient(b.net, b.features, b.rows, b.targets, b.masks, grad);
    benchmark::DoNotOptimize(loss);
  }
}

void BM_stack_online(benchmark::State& state) {
  const ScopedWorkers workers(static_cast<int>(state.range(0)));
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = 3000;
  LabelSeries labels{0, {}};
  for (std::size_t t = 0; t < n; ++t) labels.values.push_back(u(rng) < 0.05 ? 2 : (u(rng) < 0.5 ? 0 : 1));
  std::vector<ProbabilitySeries> level0(6);
  for (auto& p : level0) {
    p.first = 10;
    for (std::size_t t = 10; t < n; ++t) p.values.push_back(0.1 * (labels.values[t] == 2) + 0.5 * u(rng));
  }
  for (auto _ : state) {
    auto s = state.range(0) == 0 ? ensemble::stack_online_serial(level0, labels) : ensemble::stack_online(level0, labels);
    benchmark::DoNotOptimize(s.meta.values.data());
  }
}

void BM_garch_path(benchmark::State& state) {
  const ScopedWorkers workers(static_cast<int>(state.range(0)));
  const rolling::Schedule schedule{2880, 2880 + 40, 1, 2880};
  for (auto _ : state) {
    auto p = state.range(0) == 0 ? rolling::fit_garch_path_serial(market(), schedule, {})
                                 : rolling::fit_garch_path(market(), schedule, {});
    benchmark::DoNotOptimize(p.refits.data());
  }
}

void BM_carlvol_path(benchmark::State& state) {
  const ScopedWorkers workers(static_cast<int>(state.range(0)));
  const TvarSeries tvar = ts::rolling_hist_var(market(), {0.05, 24});
  const rolling::Schedule schedule{2880, 2880 + 40, 1, 2880};
  for (auto _ : state) {
    auto p = state.range(0) == 0 ? rolling::fit_carlvol_path_serial(market(), tvar, schedule)
                                 : rolling::fit_carlvol_path(market(), tvar, schedule);
    benchmark::DoNotOptimize(p.refits.data());
  }
}

void worker_args(benchmark::internal::Benchmark* b) {
  b->Arg(0)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
}

}  // namespace

BENCHMARK(BM_rolling_hist_var)->Apply(worker_args);
BENCHMARK(BM_lpa_select)->Apply(worker_args);
BENCHMARK(BM_lstm_batch_gradient)->Apply(worker_args);
BENCHMARK(BM_stack_online)->Apply(worker_args);
BENCHMARK(BM_garch_path)->Apply(worker_args);
BENCHMARK(BM_carlvol_path)->Apply(worker_args);

BENCHMARK_MAIN();
