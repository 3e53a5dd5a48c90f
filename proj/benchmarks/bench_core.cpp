#include <benchmark/benchmark.h>

#include "osn/experiment.hpp"
#include "osn/monolithic.hpp"
#include "osn/schwarz.hpp"

namespace {

void BM_BandedLU(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto spec = osn::make_benchmark_spec(n, 10.0, 10.0, 0.01, 1e-5, osn::ControlBound(1e3));
  const osn::MonolithicSystem sys(spec);
  const auto jac = osn::monolithic_jacobian(sys, osn::random_pair(sys.grid(), 1));
  for (auto _ : state) {
    osn::BandedLU lu(jac);
    benchmark::DoNotOptimize(lu);
  }
}
BENCHMARK(BM_BandedLU)->Arg(26)->Arg(51)->Unit(benchmark::kMillisecond);

void BM_SubdomainSolve(benchmark::State& state) {
  const int nsub = static_cast<int>(state.range(0));
  const auto spec = osn::make_benchmark_spec(101, 100.0, 10.0, 0.01, 1e-5, osn::ControlBound(1e3));
  const osn::Decomposition dec(osn::Grid(101, 101, 1.0, 1.0), nsub);
  const auto s = osn::random_state(dec, 1);
  const osn::ControlLaw law(spec);
  const auto data = osn::make_subproblem(spec, dec, nsub / 2, s, law);
  for (auto _ : state) {
    auto sol = osn::solve_subdomain(data, s.parts[static_cast<std::size_t>(nsub / 2)], {});
    benchmark::DoNotOptimize(sol);
  }
}
BENCHMARK(BM_SubdomainSolve)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_ResidualFP(benchmark::State& state) {
  const auto spec = osn::make_benchmark_spec(51, 10.0, 10.0, 0.01, 1e-5, osn::ControlBound(1e3));
  const osn::Decomposition dec(osn::Grid(51, 51, 1.0, 1.0), 2);
  const auto s = osn::random_state(dec, 1);
  const osn::ControlLaw law(spec);
  for (auto _ : state) {
    auto eval = osn::residual_FP(spec, dec, s, law, {});
    benchmark::DoNotOptimize(eval);
  }
}
BENCHMARK(BM_ResidualFP)->Unit(benchmark::kMillisecond);

void BM_JacobianApply(benchmark::State& state) {
  const auto spec = osn::make_benchmark_spec(51, 10.0, 10.0, 0.01, 1e-5, osn::ControlBound(1e3));
  const osn::Decomposition dec(osn::Grid(51, 51, 1.0, 1.0), 2);
  const auto s = osn::random_state(dec, 1);
  const osn::ControlLaw law(spec);
  const auto eval = osn::residual_FP(spec, dec, s, law, {});
  const osn::FPJacobian jac(spec, dec, s, eval, law);
  const std::vector<double> d(jac.size(), 1.0);
  std::vector<double> out(jac.size());
  for (auto _ : state) {
    jac.apply(d, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_JacobianApply)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
