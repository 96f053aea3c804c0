#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "ddec/model.hpp"
#include "ddec/models.hpp"

using namespace ddec;

namespace {

std::mt19937 rng(12345);

Vec random_vec(int n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

}  // namespace

TEST_CASE("pendulum rhs at the origin vanishes") {
  DdeSystem sys = make_pendulum();
  std::vector<Vec> xs = {Vec::Zero(2), Vec::Zero(2)};
  CHECK(eval_rhs(sys, xs, sys.p).norm() == 0.0);
}

TEST_CASE("pendulum rhs direct substitution") {
  DdeSystem sys = make_pendulum();
  Vec x0(2), x1(2);
  x0 << 0.0, 1.0;
  x1 << 0.0, 0.0;
  Vec f = eval_rhs(sys, {x0, x1}, sys.p);
  CHECK(f(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(f(1) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("enso rhs direct substitution") {
  DdeSystem sys = make_enso();
  Vec p = sys.p;
  p(0) = 1.0;  // b
  p(1) = 3.0;  // c
  Vec x0(3), x1(3), x2(3);
  x0 << 0.0, 1.0, 0.0;
  x1.setZero();
  x2 << 0.0, 0.5, -0.5;
  Vec f = eval_rhs(sys, {x0, x1, x2}, p);
  CHECK(f(0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(f(1) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(f(2) == doctest::Approx(2.0 * M_PI).epsilon(1e-14));
}

TEST_CASE("pendulum delay read from parameter") {
  DdeSystem sys = make_pendulum();
  Vec taus = eval_delays(sys, {Vec::Zero(2)}, sys.p);
  CHECK(taus.size() == 1);
  CHECK(taus(0) == doctest::Approx(std::sqrt(2.0) / 4.0).epsilon(1e-15));
}

TEST_CASE("enso state-dependent delays at zero state") {
  DdeSystem sys = make_enso(0.11, 0.04);
  std::vector<Vec> xs = {Vec::Zero(3), Vec::Zero(3)};
  Vec taus = eval_delays(sys, xs, sys.p);
  CHECK(taus(0) == doctest::Approx(1.2).epsilon(1e-15));
  CHECK(taus(1) == doctest::Approx(1.2).epsilon(1e-15));
}

TEST_CASE("enso second delay substitution") {
  DdeSystem sys = make_enso(0.11, 0.0);
  Vec p = sys.p;
  p(3) = 0.9;
  Vec x0(3), x1(3);
  x0 << 1.0, 0.0, 0.0;
  x1 << 7.0, 0.0, 0.0;  // inert with eta_e = 0
  Vec taus = eval_delays(sys, {x0, x1}, p);
  CHECK(taus(1) == doctest::Approx(1.01).epsilon(1e-14));
}

TEST_CASE("negative evaluated delay raises") {
  DdeSystem sys = make_two_delay();
  Vec x0(1);
  x0 << -2.0;  // tau1 = 1.3 + 1*(-2) < 0
  CHECK_THROWS_AS(eval_delays(sys, {x0, x0}, sys.p), NegativeDelayError);
}

TEST_CASE("pendulum derivative blocks at the origin") {
  DdeSystem sys = make_pendulum();
  Vec p(3);
  p << 2.0, 1.5, 0.3;
  std::vector<Vec> xs = {Vec::Zero(2), Vec::Zero(2)};
  DirectionalDerivatives dd = eval_derivatives(sys, xs, p);
  Mat A0(2, 2), A1(2, 2);
  A0 << 0, 1, 1, 0;
  A1 << 0, 0, -p(0), -p(1);
  CHECK((dd.A[0] - A0).norm() < 1e-12);
  CHECK((dd.A[1] - A1).norm() < 1e-12);
}

TEST_CASE("two-delay linear derivative blocks") {
  DdeSystem sys = make_two_delay();
  std::vector<Vec> xs = {random_vec(1, 0.1), random_vec(1, 0.1),
                         random_vec(1, 0.1)};
  DirectionalDerivatives dd = eval_derivatives(sys, xs, sys.p);
  CHECK(dd.A[0](0, 0) == doctest::Approx(-4.75).epsilon(1e-12));
  CHECK(dd.A[1](0, 0) == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(dd.A[2](0, 0) == doctest::Approx(-3.0).epsilon(1e-12));
}

TEST_CASE("analytic derivatives match finite differences") {
  for (const std::string& name : model_names()) {
    DdeSystem sys = model_registry(name);
    DdeSystem plain = sys;  // finite-difference-only copy
    plain.dfdx = nullptr;
    plain.dfdp = nullptr;
    for (DelaySpec& ds : plain.delays) {
      ds.dx = nullptr;
      ds.dp = nullptr;
    }
    for (int rep = 0; rep < 3; ++rep) {
      std::vector<Vec> xs;
      for (int j = 0; j <= sys.d; ++j) xs.push_back(random_vec(sys.n, 0.2));
      DirectionalDerivatives a = eval_derivatives(sys, xs, sys.p);
      DirectionalDerivatives b = eval_derivatives(plain, xs, sys.p);
      for (int j = 0; j <= sys.d; ++j) {
        double scale = 1.0 + a.A[j].norm();
        CHECK((a.A[j] - b.A[j]).norm() / scale < 1e-5);
      }
      CHECK((a.dfdp - b.dfdp).norm() / (1.0 + a.dfdp.norm()) < 1e-5);
      CHECK((a.dtau_dp - b.dtau_dp).norm() / (1.0 + a.dtau_dp.norm()) < 1e-5);
      for (int j = 0; j < sys.d; ++j)
        for (int l = 0; l <= j; ++l)
          CHECK((a.dtau_dx[j][l] - b.dtau_dx[j][l]).norm() < 1e-5);
    }
  }
}

TEST_CASE("registered symmetry commutes with the rhs") {
  DdeSystem sys = make_pendulum();
  REQUIRE(sys.symmetry.has_value());
  const Mat& R = *sys.symmetry;
  CHECK((R * R - Mat::Identity(2, 2)).norm() == 0.0);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<Vec> xs = {random_vec(2), random_vec(2)};
    std::vector<Vec> rxs = {R * xs[0], R * xs[1]};
    Vec lhs = R * eval_rhs(sys, xs, sys.p);
    Vec rhs = eval_rhs(sys, rxs, sys.p);
    CHECK((lhs - rhs).norm() < 1e-14 * (1.0 + lhs.norm()));
  }
}

TEST_CASE("delay nesting never reads beyond its prefix") {
  // sentinel NaN in the entries a delay must not touch
  DdeSystem sys = make_enso(0.11, 0.04);
  Vec x0 = random_vec(3);
  Vec nan_vec = Vec::Constant(3, std::nan(""));
  // tau_1 reads nothing beyond p; tau_2 reads x^0 and x^1
  std::vector<Vec> xs1 = {nan_vec};
  Vec t1 = eval_delays_unchecked(sys, {x0, nan_vec}, sys.p);
  CHECK(std::isfinite(t1(0)));
  DdeSystem td = make_two_delay();
  Vec u0(1);
  u0 << 0.05;
  Vec taus = eval_delays(td, {u0, Vec::Constant(1, std::nan(""))}, td.p);
  CHECK(std::isfinite(taus(0)));
  CHECK(std::isfinite(taus(1)));
}

TEST_CASE("dimension mismatch raises") {
  DdeSystem sys = make_pendulum();
  CHECK_THROWS_AS(eval_rhs(sys, {Vec::Zero(2)}, sys.p), DimensionError);
}
