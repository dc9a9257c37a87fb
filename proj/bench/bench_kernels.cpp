#include <benchmark/benchmark.h>

#include <omp.h>

#include <numeric>

#include "twd/instance.hpp"
#include "twd/kernels.hpp"
#include "twd/routing.hpp"

namespace {

struct Fixture {
  twd::Network net;
  Eigen::MatrixXd factor;
  twd::SampleSet samples;
  twd::Route route;

  static const Fixture& get() {
    static const Fixture f = [] {
      twd::RandomInstanceParams p;
      p.customers = 12;
      p.complete = true;
      p.seed = 1;
      twd::Network net = twd::random_instance(p);
      std::vector<int> seq(14, 0);
      std::iota(seq.begin() + 1, seq.end() - 1, 1);
      twd::Route r = twd::route_to_xy(seq, net);
      return Fixture{net, twd::covariance_factor(net.cov()), twd::sample_travel_times(net, 20000, 3), r};
    }();
    return f;
  }
};

void set_threads(const benchmark::State& state) { omp_set_num_threads(static_cast<int>(state.range(0))); }

void BM_DrawSerial(benchmark::State& state) {
  const auto& f = Fixture::get();
  for (auto _ : state) benchmark::DoNotOptimize(twd::kernels::draw_normal_rows_serial(f.net.mean(), f.factor, 2000, 7));
}
void BM_DrawParallel(benchmark::State& state) {
  const auto& f = Fixture::get();
  set_threads(state);
  for (auto _ : state) benchmark::DoNotOptimize(twd::kernels::draw_normal_rows(f.net.mean(), f.factor, 2000, 7));
}

void BM_ArrivalsSerial(benchmark::State& state) {
  const auto& f = Fixture::get();
  for (auto _ : state) benchmark::DoNotOptimize(twd::kernels::arrival_times_serial(f.route.path(), f.samples.values));
}
void BM_ArrivalsParallel(benchmark::State& state) {
  const auto& f = Fixture::get();
  set_threads(state);
  for (auto _ : state) benchmark::DoNotOptimize(twd::kernels::arrival_times(f.route.path(), f.samples.values));
}

void BM_TallySerial(benchmark::State& state) {
  const auto& f = Fixture::get();
  const auto arr = twd::kernels::arrival_times_serial(f.route.path(), f.samples.values);
  const Eigen::VectorXd m = arr.colwise().mean();
  const std::vector<double> lo(m.data(), m.data() + m.size());
  for (auto _ : state) benchmark::DoNotOptimize(twd::kernels::tally_violations_serial(arr, lo, lo));
}
void BM_TallyParallel(benchmark::State& state) {
  const auto& f = Fixture::get();
  set_threads(state);
  const auto arr = twd::kernels::arrival_times_serial(f.route.path(), f.samples.values);
  const Eigen::VectorXd m = arr.colwise().mean();
  const std::vector<double> lo(m.data(), m.data() + m.size());
  for (auto _ : state) benchmark::DoNotOptimize(twd::kernels::tally_violations(arr, lo, lo));
}

}  // namespace

BENCHMARK(BM_DrawSerial);
BENCHMARK(BM_DrawParallel)->Arg(1)->Arg(2)->Arg(4);
BENCHMARK(BM_ArrivalsSerial);
BENCHMARK(BM_ArrivalsParallel)->Arg(1)->Arg(2)->Arg(4);
BENCHMARK(BM_TallySerial);
BENCHMARK(BM_TallyParallel)->Arg(1)->Arg(2)->Arg(4);
BENCHMARK_MAIN();
