#include <benchmark/benchmark.h>

#include "ddec/floquet.hpp"
#include "ddec/models.hpp"
#include "ddec/periodic.hpp"

namespace {

using namespace ddec;

PeriodicOrbitVar sample_orbit(int NT) {
  DdeSystem sys = make_pendulum();
  PeriodicOrbitVar orbit;
  orbit.p = Vec(3);
  orbit.p << 3.0, 0.7, 1.0;
  orbit.T = 4.0;
  CollocationMesh mesh = CollocationMesh::uniform(NT, 4);
  orbit.profile = sample(mesh, 2, [](double s) {
    Vec v(2);
    v << 0.3 * std::sin(2 * M_PI * s), 0.3 * std::cos(2 * M_PI * s);
    return v;
  });
  return orbit;
}

void BM_PoResidual(benchmark::State& state) {
  DdeSystem sys = make_pendulum();
  PeriodicOrbitVar orbit = sample_orbit(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    Vec r = po_residual(sys, orbit.profile, orbit.T, orbit.p, orbit.profile);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_PoResidual)->Arg(10)->Arg(20)->Arg(40);

void BM_PoJacobian(benchmark::State& state) {
  DdeSystem sys = make_pendulum();
  PeriodicOrbitVar orbit = sample_orbit(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    PoJacobian J =
        po_jacobian(sys, orbit.profile, orbit.T, orbit.p, orbit.profile);
    benchmark::DoNotOptimize(J.Jc);
  }
}
BENCHMARK(BM_PoJacobian)->Arg(10)->Arg(20);

void BM_MeshEval(benchmark::State& state) {
  PeriodicOrbitVar orbit = sample_orbit(20);
  double s = 0.0;
  for (auto _ : state) {
    s = ddec::wrap(s + 0.0137);
    Vec v = orbit.profile.eval(s);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_MeshEval);

void BM_FloquetMultipliers(benchmark::State& state) {
  DdeSystem sys = make_pendulum();
  PeriodicOrbitVar orbit = sample_orbit(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    FloquetSpectrum fs = floquet_multipliers(sys, orbit, 6);
    benchmark::DoNotOptimize(fs.multipliers);
  }
}
BENCHMARK(BM_FloquetMultipliers)->Arg(10)->Arg(20);

}  // namespace

BENCHMARK_MAIN();
