#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <memory>

#include "ddec/equilibrium.hpp"
#include "ddec/models.hpp"
#include "ddec/periodic.hpp"

using namespace ddec;

namespace {

// u' = -kappa u(t-tau) - u(t-tau)^3, Hopf at kappa tau = pi/2
DdeSystem scalar_cubic() {
  DdeSystem s;
  s.name = "scalar_cubic";
  s.n = 1;
  s.d = 1;
  s.mass = Mat::Identity(1, 1);
  s.p = Vec(2);
  s.p << M_PI / 2.0, 1.0;
  s.param_names = {"kappa", "tau"};
  s.rhs = [](const std::vector<Vec>& xs, const Vec& p) {
    Vec f(1);
    double u = xs[1](0);
    f(0) = -p(0) * u - u * u * u;
    return f;
  };
  DelaySpec ds;
  ds.kind = DelaySpec::Kind::FromParameter;
  ds.param_index = 1;
  s.delays = {ds};
  return s;
}

HopfPoint scalar_cubic_hopf() {
  HopfPoint h;
  h.x = Vec::Zero(1);
  h.v = CVec::Ones(1);
  h.omega = M_PI / 2.0;
  h.pi_val = M_PI / 2.0;
  h.pj_val = 1.0;
  return h;
}

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

double orbit_amplitude(const PeriodicOrbitVar& po, int comp = 0) {
  double lo = 1e300, hi = -1e300;
  for (int i = 0; i <= 400; ++i) {
    double v = po.profile.eval(double(i) / 400.0)(comp);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return 0.5 * (hi - lo);
}

}  // namespace

TEST_CASE("constant equilibrium profile is a degenerate periodic solution") {
  DdeSystem sys = make_pendulum();
  Vec p = sys.p;
  p(0) = 2.0;
  CollocationMesh mesh = CollocationMesh::uniform(10, 4);
  MeshFunction prof = sample(mesh, 2, [](double) { return Vec::Zero(2); });
  for (double T : {1.0, 3.7, 12.0}) {
    Vec r = po_residual(sys, prof, T, p, prof);
    CHECK(r.size() == 2 * (4 * 10 + 1) + 1);
    CHECK(r.norm() < 1e-13);
  }
}

TEST_CASE("analytic jacobian matches finite differences, constant delay") {
  DdeSystem sys = make_pendulum();
  Vec p = sys.p;
  p(0) = 3.6;
  CollocationMesh mesh = CollocationMesh::uniform(6, 3);
  MeshFunction prof = sample(mesh, 2, [](double s) {
    Vec v(2);
    v << 0.4 * std::sin(2 * M_PI * s), 0.3 * std::cos(2 * M_PI * s);
    return v;
  });
  double T = 3.3;
  MeshFunction x_ref = prof;
  PoJacobian pj = po_jacobian(sys, prof, T, p, x_ref);

  const double h = 1e-6;
  auto res = [&](const MeshFunction& q, double TT, const Vec& pp) {
    return po_residual(sys, q, TT, pp, x_ref);
  };
  Vec r0 = res(prof, T, p);
  for (int c = 0; c < prof.coeffs.size(); ++c) {
    MeshFunction q = prof;
    q.coeffs(c) += h;
    Vec col = (res(q, T, p) - r0) / h;
    CHECK((col - pj.Jc.col(c)).lpNorm<Eigen::Infinity>() <
          1e-4 * (1.0 + pj.Jc.col(c).lpNorm<Eigen::Infinity>()));
  }
  Vec colT = (res(prof, T + h, p) - r0) / h;
  CHECK((colT - pj.JT).lpNorm<Eigen::Infinity>() < 1e-4);
  for (int ip = 0; ip < 2; ++ip) {
    Vec pp = p;
    pp(ip) += h;
    Vec col = (res(prof, T, pp) - r0) / h;
    CHECK((col - pj.Jp.col(ip)).lpNorm<Eigen::Infinity>() < 1e-4);
  }
}

TEST_CASE("analytic jacobian matches finite differences, state-dependent") {
  DdeSystem sys = make_two_delay();
  CollocationMesh mesh = CollocationMesh::uniform(5, 4);
  MeshFunction prof = sample(mesh, 1, [](double s) {
    Vec v(1);
    v(0) = 0.3 * std::sin(2 * M_PI * s) + 0.1;
    return v;
  });
  double T = 4.0;
  MeshFunction x_ref = prof;
  PoJacobian pj = po_jacobian(sys, prof, T, sys.p, x_ref);

  const double h = 1e-6;
  Vec r0 = po_residual(sys, prof, T, sys.p, x_ref);
  for (int c = 0; c < prof.coeffs.size(); ++c) {
    MeshFunction q = prof;
    q.coeffs(c) += h;
    Vec col = (po_residual(sys, q, T, sys.p, x_ref) - r0) / h;
    CHECK((col - pj.Jc.col(c)).lpNorm<Eigen::Infinity>() <
          1e-4 * (1.0 + pj.Jc.col(c).lpNorm<Eigen::Infinity>()));
  }
  Vec colT = (po_residual(sys, prof, T + h, sys.p, x_ref) - r0) / h;
  CHECK((colT - pj.JT).lpNorm<Eigen::Infinity>() < 1e-4);
}

TEST_CASE("hopf branch-off keeps the pendulum half-period antisymmetry") {
  DdeSystem sys = make_pendulum();
  Vec p_h;
  HopfPoint h = pendulum_hopf(sys, p_h);
  CollocationMesh mesh = CollocationMesh::uniform(20, 4);
  auto [a, b] = branch_off_hopf(sys, 0, h, p_h, 1e-2, mesh);
  CHECK(std::abs(a.T - 2.0 * M_PI / h.omega) < 0.1);
  for (const PeriodicOrbitVar& po : {a, b}) {
    double worst = 0.0;
    for (int i = 0; i <= 200; ++i) {
      double s = 0.5 * double(i) / 200.0;
      worst = std::max(worst,
                       (po.profile.eval(s + 0.5) + po.profile.eval(s))
                           .lpNorm<Eigen::Infinity>());
    }
    CHECK(worst < 1e-6);
    // boundary condition and positive amplitude
    CHECK((po.profile.eval(0.0) - po.profile.eval(1.0)).norm() < 1e-9);
    CHECK(orbit_amplitude(po) > 1e-4);
  }
  CHECK(orbit_amplitude(b) > orbit_amplitude(a));
}

TEST_CASE("square-root amplitude growth past the scalar hopf point") {
  DdeSystem sys = scalar_cubic();
  HopfPoint h = scalar_cubic_hopf();
  CollocationMesh mesh = CollocationMesh::uniform(16, 4);
  auto [s1, s2] = branch_off_hopf(sys, 0, h, sys.p, 0.02, mesh);

  PoOptions opts;
  opts.cont.initial_step = 0.03;
  opts.cont.max_step = 0.1;
  opts.cont.max_points = 30;
  opts.floquet = true;
  PoBranch br = continue_po(sys, 0, s1, s2, opts);
  REQUIRE(br.points.size() >= 15);

  // trivial multiplier along the whole branch
  for (const PoBranchPoint& pt : br.points) {
    double best = 1e300;
    for (const Complex& mu : pt.multipliers)
      best = std::min(best, std::abs(mu - Complex(1.0)));
    CHECK(best < 1e-4);
  }

  // log-log fit of amplitude against distance past the hopf point
  std::vector<double> lx, ly;
  for (const PoBranchPoint& pt : br.points) {
    double dist = std::abs(pt.orbit.p(0) - M_PI / 2.0);
    double amp = orbit_amplitude(pt.orbit);
    if (dist < 1e-4 || amp < 1e-3) continue;
    lx.push_back(std::log(dist));
    ly.push_back(std::log(amp));
  }
  REQUIRE(lx.size() >= 8);
  double n = lx.size(), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(std::abs(slope - 0.5) < 0.05);
}

TEST_CASE("converged orbit is stable under mesh doubling") {
  DdeSystem sys = scalar_cubic();
  HopfPoint h = scalar_cubic_hopf();
  CollocationMesh mesh = CollocationMesh::uniform(12, 4);
  auto [s1, s2] = branch_off_hopf(sys, 0, h, sys.p, 0.05, mesh);

  PoOptions opts;
  opts.cont.initial_step = 0.05;
  opts.cont.max_step = 0.1;
  opts.cont.max_points = 10;
  opts.floquet = false;
  PoBranch br = continue_po(sys, 0, s1, s2, opts);
  PeriodicOrbitVar po = br.points.back().orbit;
  REQUIRE(orbit_amplitude(po) > 0.05);

  CollocationMesh fine = CollocationMesh::uniform(24, 4);
  auto x_ref = std::make_shared<MeshFunction>(transfer(po.profile, fine));
  auto p_base = std::make_shared<Vec>(po.p);
  DefiningSystem ds = po_defining_system(sys, x_ref, p_base, {0});
  Vec y = pack_po(*x_ref, po.T, {po.p(0)});
  const int cj = ds.param_components.back();
  NewtonResult nr = newton_correct(ds, y, Vec::Unit(ds.dim_y, cj));
  MeshFunction prof2(fine, 1);
  prof2.coeffs = nr.y.head(x_ref->coeffs.size());
  double worst = 0.0;
  for (int i = 0; i <= 300; ++i) {
    double s = double(i) / 300.0;
    worst = std::max(
        worst, (po.profile.eval(s) - prof2.eval(s)).lpNorm<Eigen::Infinity>());
  }
  CHECK(worst < 1e-5);
  CHECK(std::abs(nr.y(x_ref->coeffs.size()) - po.T) < 1e-6);
}

TEST_CASE("converged orbit is a fixed point of its own phase anchor") {
  DdeSystem sys = scalar_cubic();
  HopfPoint h = scalar_cubic_hopf();
  CollocationMesh mesh = CollocationMesh::uniform(12, 4);
  auto [s1, s2] = branch_off_hopf(sys, 0, h, sys.p, 0.05, mesh);

  auto x_ref = std::make_shared<MeshFunction>(s2.profile);
  auto p_base = std::make_shared<Vec>(s2.p);
  DefiningSystem ds = po_defining_system(sys, x_ref, p_base, {0});
  Vec y = pack_po(s2.profile, s2.T, {s2.p(0)});
  const int cj = ds.param_components.back();
  NewtonResult nr = newton_correct(ds, y, Vec::Unit(ds.dim_y, cj));
  CHECK((nr.y - y).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("pendulum branch reaches long periods and the locus freezes T") {
  DdeSystem sys = make_pendulum();
  Vec p_h;
  HopfPoint h = pendulum_hopf(sys, p_h);
  CollocationMesh mesh = CollocationMesh::uniform(20, 4);
  auto [s1, s2] = branch_off_hopf(sys, 0, h, p_h, 1e-2, mesh);

  PoOptions opts;
  opts.cont.initial_step = 0.05;
  opts.cont.max_step = 0.5;
  opts.cont.max_points = 60;
  opts.floquet = false;
  PoBranch br = continue_po(sys, 0, s1, s2, opts);
  const PoBranchPoint* longest = &br.points.front();
  for (const PoBranchPoint& pt : br.points)
    if (pt.orbit.T > longest->orbit.T) longest = &pt;
  REQUIRE(longest->orbit.T > 8.0);

  double T_fix = longest->orbit.T;
  PoOptions lopts;
  lopts.cont.initial_step = 0.02;
  lopts.cont.max_step = 0.1;
  lopts.cont.max_points = 8;
  lopts.floquet = false;
  lopts.adapt_every = 0;
  PoBranch locus = high_period_locus(sys, longest->orbit, T_fix, 0, 1, lopts);
  REQUIRE(locus.points.size() >= 4);
  double b0 = locus.points.front().orbit.p(1);
  double b1 = locus.points.back().orbit.p(1);
  CHECK(std::abs(b1 - b0) > 1e-4);  // genuinely moves in the second parameter
  for (const PoBranchPoint& pt : locus.points) {
    CHECK(pt.orbit.T == T_fix);
    auto x_ref = std::make_shared<MeshFunction>(pt.orbit.profile);
    Vec r = po_residual(sys, pt.orbit.profile, pt.orbit.T, pt.orbit.p,
                        pt.orbit.profile);
    // de and bc rows solved; the phase row is anchored to the moving x_ref
    CHECK(r.head(r.size() - 1).lpNorm<Eigen::Infinity>() < 1e-6);
  }
}
