#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <memory>

#include "ddec/equilibrium.hpp"
#include "ddec/floquet.hpp"
#include "ddec/models.hpp"

using namespace ddec;

namespace {

HopfPoint pendulum_hopf(const DdeSystem& sys, Vec& p_out) {
  Vec p = sys.p;
  p(0) = 3.59;
  EquilibriumPoint ep = analyze_equilibrium(sys, Vec::Zero(2), p);
  const Eigenpair* pair = nullptr;
  for (const Eigenpair& pr : ep.spectrum)
    if (pr.lambda.imag() > kOmegaMin &&
        (!pair || pr.lambda.real() > pair->lambda.real()))
      pair = &pr;
  REQUIRE(pair != nullptr);
  auto v_ref = std::make_shared<CVec>();
  Vec y = seed_hopf(sys, 0, 1, Vec::Zero(2), p, *pair, v_ref);
  HopfPoint h = unpack_hopf(y, 2);
  p_out = p;
  p_out(0) = h.pi_val;
  p_out(1) = h.pj_val;
  return h;
}

PeriodicOrbitVar pendulum_orbit(const DdeSystem& sys, double eps = 0.05) {
  Vec p_h;
  HopfPoint h = pendulum_hopf(sys, p_h);
  CollocationMesh mesh = CollocationMesh::uniform(20, 4);
  auto [a, b] = branch_off_hopf(sys, 0, h, p_h, eps, mesh);
  return b;
}

}  // namespace

TEST_CASE("constant-delay linearization reduces to scaled rhs jacobians") {
  DdeSystem sys = make_pendulum();
  Vec p = sys.p;
  p(0) = 3.6;
  CollocationMesh mesh = CollocationMesh::uniform(8, 4);
  PeriodicOrbitVar po;
  po.profile = sample(mesh, 2, [](double s) {
    Vec v(2);
    v << 0.3 * std::sin(2 * M_PI * s), 0.2 * std::cos(2 * M_PI * s);
    return v;
  });
  po.T = 3.4;
  po.p = p;
  for (double s : {0.0, 0.31, 0.77}) {
    OrbitLinearization lin = linearize_along_orbit(sys, po, s);
    std::vector<Vec> xs;
    Vec taus, args;
    po_delays_at(sys, po.profile, po.T, po.p, s, taus, args, &xs);
    DirectionalDerivatives dd = eval_derivatives(sys, xs, po.p);
    REQUIRE(lin.A.size() == 2);
    for (int j = 0; j <= 1; ++j)
      CHECK((lin.A[j] - po.T * dd.A[j]).lpNorm<Eigen::Infinity>() < 1e-8);
    CHECK(std::abs(lin.taus(0) - p(2)) < 1e-14);
  }
}

TEST_CASE("state-dependent chain factor matches the hand formula") {
  DdeSystem sys = make_two_delay();
  CollocationMesh mesh = CollocationMesh::uniform(10, 4);
  PeriodicOrbitVar po;
  po.profile = sample(mesh, 1, [](double s) {
    Vec v(1);
    v(0) = 0.3 * std::sin(2 * M_PI * s) + 0.1;
    return v;
  });
  po.T = 4.0;
  po.p = sys.p;
  const double kappa1 = sys.p(1), kappa2 = sys.p(2);
  const double c1 = sys.p(5), c2 = sys.p(6);
  for (double s : {0.1, 0.45, 0.9}) {
    OrbitLinearization lin = linearize_along_orbit(sys, po, s);
    Vec taus, args;
    po_delays_at(sys, po.profile, po.T, po.p, s, taus, args);
    // tau_j = a_j + c_j u(t): depends on the head value only, so
    // X^j = 1 - u'(s - tau_j/T) c_j / T
    double X1 = 1.0 - po.profile.eval(wrap(args(0)), 1)(0) * c1 / po.T;
    double X2 = 1.0 - po.profile.eval(wrap(args(1)), 1)(0) * c2 / po.T;
    CHECK(lin.A[1](0, 0) ==
          doctest::Approx(po.T * -kappa1 * X1).epsilon(1e-9));
    CHECK(lin.A[2](0, 0) ==
          doctest::Approx(po.T * -kappa2 * X2).epsilon(1e-9));
  }
}

TEST_CASE("trivial multiplier with derivative eigenfunction") {
  DdeSystem sys = make_pendulum();
  PeriodicOrbitVar po = pendulum_orbit(sys);
  FloquetSpectrum fs = floquet_multipliers(sys, po, 8);
  REQUIRE(!fs.multipliers.empty());
  const FloquetMode* triv = nullptr;
  for (const FloquetMode& m : fs.multipliers)
    if (!triv || std::abs(m.mu - Complex(1.0)) <
                     std::abs(triv->mu - Complex(1.0)))
      triv = &m;
  CHECK(std::abs(triv->mu - Complex(1.0)) < 1e-4);

  // eigenfunction proportional to the profile derivative
  Complex scale = fs.eval(*triv, 0.3)(0) / po.profile.eval(0.3, 1)(0);
  for (double s : {0.1, 0.55, 0.8}) {
    CVec ev = fs.eval(*triv, s);
    Vec dx = po.profile.eval(s, 1);
    CHECK((ev - scale * dx.cast<Complex>()).norm() < 1e-3 * dx.norm());
  }
}

TEST_CASE("embedded equilibrium reproduces the exponential spectrum map") {
  DdeSystem sys = make_pendulum();
  Vec p = sys.p;
  p(0) = 2.0;
  EquilibriumPoint ep = analyze_equilibrium(sys, Vec::Zero(2), p);
  REQUIRE(ep.spectrum.size() >= 4);

  CollocationMesh mesh = CollocationMesh::uniform(24, 4);
  PeriodicOrbitVar po;
  po.profile = sample(mesh, 2, [](double) { return Vec::Zero(2); });
  po.T = 1.0;
  po.p = p;
  FloquetSpectrum fs = floquet_multipliers(sys, po, 10);
  for (int i = 0; i < 4; ++i) {
    Complex want = std::exp(ep.spectrum[i].lambda * po.T);
    double best = 1e300;
    for (const FloquetMode& m : fs.multipliers)
      best = std::min(best, std::abs(m.mu - want));
    CHECK(best < 1e-5);
  }
}

TEST_CASE("multipliers come in conjugate pairs") {
  DdeSystem sys = make_pendulum();
  PeriodicOrbitVar po = pendulum_orbit(sys);
  FloquetSpectrum fs = floquet_multipliers(sys, po, 8);
  for (const FloquetMode& m : fs.multipliers) {
    if (std::abs(m.mu.imag()) < 1e-8) continue;
    double best = 1e300;
    for (const FloquetMode& q : fs.multipliers)
      best = std::min(best, std::abs(q.mu - std::conj(m.mu)));
    CHECK(best < 1e-7);
  }
}

TEST_CASE("history-mesh refinement leaves the leading multipliers fixed") {
  DdeSystem sys = make_pendulum();
  PeriodicOrbitVar po = pendulum_orbit(sys);
  FloquetSpectrum f1 = floquet_multipliers(sys, po, 5);
  FloquetOptions o2;
  o2.count = 5;
  o2.n_tau_override = 2 * f1.n_tau;
  FloquetSpectrum f2 = floquet_multipliers(sys, po, 5, o2);
  for (int i = 0; i < 4; ++i) {
    double best = 1e300;
    for (const FloquetMode& m : f2.multipliers)
      best = std::min(best, std::abs(m.mu - f1.multipliers[i].mu));
    CHECK(best < 1e-6);
  }
}

TEST_CASE("monodromy reduction agrees with the full generalized solve") {
  DdeSystem sys = make_pendulum();
  PeriodicOrbitVar po = pendulum_orbit(sys);
  FloquetSpectrum fr = floquet_multipliers(sys, po, 6);
  FloquetOptions og;
  og.count = 6;
  og.force_generalized = true;
  FloquetSpectrum fg = floquet_multipliers(sys, po, 6, og);
  CHECK(fg.used_generalized);
  for (int i = 0; i < 4; ++i) {
    double best = 1e300;
    for (const FloquetMode& m : fg.multipliers)
      best = std::min(best, std::abs(m.mu - fr.multipliers[i].mu));
    CHECK(best < 1e-7);
  }
}
