#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <memory>
#include <optional>

#include "ddec/equilibrium.hpp"
#include "ddec/models.hpp"
#include "ddec/pobif.hpp"

using namespace ddec;

namespace {

// shared two-delay branch: hopf at kappa1 ~ 3.21 (kappa2 = 3), continued up
// through a torus crossing and several folds of periodic orbits
DdeSystem& two_delay_sys() {
  static DdeSystem sys = make_two_delay();
  return sys;
}

const PoBranch& two_delay_branch() {
  static PoBranch br = [] {
    DdeSystem& sys = two_delay_sys();
    Vec p = sys.p;
    p(2) = 3.0;
    double lo = 3.0, hi = 3.25;
    for (int it = 0; it < 40; ++it) {
      double mid = 0.5 * (lo + hi);
      p(1) = mid;
      EquilibriumPoint ep = analyze_equilibrium(sys, Vec::Zero(1), p);
      double mre = -1e300;
      for (const Eigenpair& pr : ep.spectrum)
        mre = std::max(mre, pr.lambda.real());
      (mre < 0 ? lo : hi) = mid;
    }
    p(1) = hi;
    EquilibriumPoint ep = analyze_equilibrium(sys, Vec::Zero(1), p);
    const Eigenpair* pair = nullptr;
    for (const Eigenpair& pr : ep.spectrum)
      if (pr.lambda.imag() > kOmegaMin &&
          (!pair || std::abs(pr.lambda.real()) < std::abs(pair->lambda.real())))
        pair = &pr;
    auto v_ref = std::make_shared<CVec>();
    Vec y = seed_hopf(sys, 1, 2, Vec::Zero(1), p, *pair, v_ref);
    HopfPoint h = unpack_hopf(y, 1);
    Vec ph = p;
    ph(1) = h.pi_val;
    CollocationMesh mesh = CollocationMesh::uniform(20, 4);
    auto [s1, s2] = branch_off_hopf(sys, 1, h, ph, 0.02, mesh);
    PoOptions o;
    o.cont.initial_step = 0.05;
    o.cont.max_step = 0.2;
    o.cont.max_points = 60;
    return continue_po(sys, 1, s1, s2, o);
  }();
  return br;
}

// de and bc rows of the base orbit extracted from a bif-system point
double base_orbit_defect(const DdeSystem& sys, const PoBifSystem& bs,
                         const Vec& y) {
  PeriodicOrbitVar po = bs.base_orbit(y);
  Vec r = po_residual(sys, po.profile, po.T, po.p, po.profile);
  return r.head(r.size() - 1).lpNorm<Eigen::Infinity>();
}

}  // namespace

TEST_CASE("fold of periodic orbits corrects and continues in two parameters") {
  const PoBranch& br = two_delay_branch();
  DdeSystem& sys = two_delay_sys();
  // tangent-based seeding can fail when the trivial and fold multipliers
  // separate badly; at least one of the detected folds must correct
  std::optional<PoBifSystem> bso;
  std::optional<NewtonResult> nro;
  const PoEvent* used = nullptr;
  for (const PoEvent& ev : br.events) {
    if (ev.name != "fold_po" || !ev.resolved) continue;
    PoBifSystem bs = fold_po_system(sys, 1, 2, ev.point.orbit.profile.mesh);
    Vec y0 = seed_fold_po(bs, ev.point);
    try {
      NewtonResult nr =
          newton_correct(bs.ds, y0, Vec::Unit(bs.ds.dim_y, bs.ipj));
      bso = std::move(bs);
      nro = std::move(nr);
      used = &ev;
      break;
    } catch (const NoConvergenceError&) {
    } catch (const NegativeDelayError&) {
    }
  }
  REQUIRE(used != nullptr);
  PoBifSystem& bs = *bso;
  NewtonResult& nr = *nro;
  CHECK(std::abs(nr.y(bs.ipi) - used->point.orbit.p(1)) < 5e-2);
  CHECK(std::abs(nr.y(bs.ipj) - 3.0) < 1e-12);
  CHECK(base_orbit_defect(sys, bs, nr.y) < 1e-6);

  ContinuationOptions opts;
  opts.initial_step = 0.05;
  opts.max_step = 0.1;
  opts.max_points = 8;
  // one direction may leave the domain where all delays stay positive
  Branch curve;
  for (double dk : {0.05, -0.05}) {
    Vec y1 = nr.y;
    y1(bs.ipj) += dk;
    try {
      NewtonResult nr1 =
          newton_correct(bs.ds, y1, Vec::Unit(bs.ds.dim_y, bs.ipj));
      curve = continue_branch(bs.ds, nr.y, nr1.y, opts);
    } catch (const NoConvergenceError&) {
      continue;
    } catch (const NegativeDelayError&) {
      continue;
    }
    if (curve.points.size() >= 5) break;
  }
  REQUIRE(curve.points.size() >= 5);
  for (const BranchPoint& pt : curve.points)
    CHECK(base_orbit_defect(sys, bs, pt.y) < 1e-6);
  CHECK(std::abs(curve.points.back().y(bs.ipj) -
                 curve.points.front().y(bs.ipj)) > 0.02);
}

TEST_CASE("torus system corrects a rotating eigenfunction seed") {
  const PoBranch& br = two_delay_branch();
  DdeSystem& sys = two_delay_sys();
  // first point past the torus crossing: a complex pair outside the circle
  const PoBranchPoint* pt = nullptr;
  for (const PoBranchPoint& q : br.points) {
    bool out = false;
    for (const Complex& mu : q.multipliers)
      if (std::abs(mu.imag()) > 1e-4 && std::abs(mu) > 1.0 + 1e-3) out = true;
    if (out) {
      pt = &q;
      break;
    }
  }
  REQUIRE(pt != nullptr);

  PoBifSystem bs =
      torus_pd_system(sys, 1, 2, pt->orbit.profile.mesh, TorusMode::Torus);
  Vec y0 = seed_torus_pd(bs, sys, *pt, TorusMode::Torus);
  NewtonResult nr = newton_correct(bs.ds, y0, Vec::Unit(bs.ds.dim_y, bs.ipj));
  CHECK(base_orbit_defect(sys, bs, nr.y) < 1e-6);
  double omega_v = nr.y(bs.iomega);
  CHECK(omega_v > 0.0);
  CHECK(omega_v < 2.0);
  // localized torus point sits between the last stable and first unstable
  // points of the one-parameter branch
  CHECK(nr.y(bs.ipi) > 3.1);
  CHECK(nr.y(bs.ipi) < 4.8);

  // short torus curve and the resonance scan over it
  ContinuationOptions opts;
  opts.initial_step = 0.05;
  opts.max_step = 0.15;
  opts.max_points = 10;
  Vec y1 = nr.y;
  y1(bs.ipj) += 0.05;
  NewtonResult nr1 = newton_correct(bs.ds, y1, Vec::Unit(bs.ds.dim_y, bs.ipj));
  Branch curve = continue_branch(bs.ds, nr.y, nr1.y, opts);
  REQUIRE(curve.points.size() >= 5);
  std::vector<ResonancePoint> rp = resonance_points(bs, curve, 8, opts);
  for (const ResonancePoint& r : rp) {
    if (!r.resolved) continue;
    CHECK(std::abs(r.location.y(bs.iomega) - 2.0 * r.p / r.q) < 1e-6);
  }
}

TEST_CASE("bifurcation system jacobians match finite differences") {
  const PoBranch& br = two_delay_branch();
  DdeSystem& sys = two_delay_sys();
  const PoBranchPoint& pt = br.points[4];
  const CollocationMesh& mesh = pt.orbit.profile.mesh;

  auto check = [&](PoBifSystem& bs, Vec y) {
    // generic nearby point, not a solution
    for (int i = 0; i < y.size(); ++i)
      y(i) += 1e-3 * std::sin(3.7 * i + 0.4);
    int rows = static_cast<int>(bs.ds.residual(y).size());
    Mat Ja = bs.ds.jac(y);
    Mat Jf = fd_jacobian(bs.ds.residual, y, rows);
    CHECK((Ja - Jf).lpNorm<Eigen::Infinity>() /
              (1.0 + Ja.lpNorm<Eigen::Infinity>()) <
          2e-4);
  };

  {
    PoBifSystem bs = fold_po_system(sys, 1, 2, mesh);
    check(bs, seed_fold_po(bs, pt));
  }
  {
    PoBifSystem bs = torus_pd_system(sys, 1, 2, mesh, TorusMode::Torus);
    check(bs, seed_torus_pd(bs, sys, pt, TorusMode::Torus));
  }
  {
    PoBifSystem bs = torus_pd_system(sys, 1, 2, mesh, TorusMode::PeriodDoubling);
    Vec y(bs.ds.dim_y);
    y.head(mesh.num_nodes()) = pt.orbit.profile.coeffs;
    y(bs.iT) = pt.orbit.T;
    y(bs.ipi) = pt.orbit.p(1);
    y(bs.ipj) = pt.orbit.p(2);
    *bs.x_ref = pt.orbit.profile;
    *bs.p_base = pt.orbit.p;
    MeshFunction u = sample(mesh, 1, [](double s) {
      Vec v(1);
      v(0) = std::sin(M_PI * s);
      return v;
    });
    u.coeffs /= std::sqrt(mass_inner_product(u, u));
    *bs.xv_ref_re = u;
    y.segment(bs.iv, mesh.num_nodes()) = u.coeffs;
    check(bs, y);
  }
}

TEST_CASE("pitchfork system embeds the fold with the symmetry constraint") {
  DdeSystem sys = make_pendulum();
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
  Vec yh = seed_hopf(sys, 0, 1, Vec::Zero(2), p, *pair, v_ref);
  HopfPoint h = unpack_hopf(yh, 2);
  Vec ph = p;
  ph(0) = h.pi_val;
  CollocationMesh mesh = CollocationMesh::uniform(12, 4);
  auto [a, b] = branch_off_hopf(sys, 0, h, ph, 0.05, mesh);

  PoBranchPoint pt;
  pt.orbit = b;
  PoBifSystem bs = pitchfork_po_system(sys, 0, 1, mesh);
  Vec y = seed_pitchfork_po(bs, pt);
  CHECK(y.size() == bs.ds.dim_y);
  // the antisymmetric orbit already satisfies the mean-value constraint
  CHECK(std::abs(integral_component(b.profile, 0)) < 1e-8);

  int rows = static_cast<int>(bs.ds.residual(y).size());
  Vec yp = y;
  for (int i = 0; i < yp.size(); ++i) yp(i) += 1e-3 * std::cos(2.1 * i);
  Mat Ja = bs.ds.jac(yp);
  Mat Jf = fd_jacobian(bs.ds.residual, yp, rows);
  CHECK((Ja - Jf).lpNorm<Eigen::Infinity>() /
            (1.0 + Ja.lpNorm<Eigen::Infinity>()) <
        2e-4);
}
