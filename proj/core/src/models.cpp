#include "ddec/models.hpp"

#include <cmath>
#include <stdexcept>

namespace ddec {

DdeSystem make_pendulum() {
  DdeSystem s;
  s.name = "pendulum";
  s.n = 2;
  s.d = 1;
  s.mass = Mat::Identity(2, 2);
  s.p = Vec(3);
  s.p << 2.0, 1.5, std::sqrt(2.0) / 4.0;
  s.param_names = {"a", "b", "tau"};
  s.rhs = [](const std::vector<Vec>& xs, const Vec& p) {
    Vec f(2);
    f(0) = xs[0](1);
    f(1) = std::sin(xs[0](0)) -
           std::cos(xs[0](0)) * (p(0) * xs[1](0) + p(1) * xs[1](1));
    return f;
  };
  DelaySpec ds;
  ds.kind = DelaySpec::Kind::FromParameter;
  ds.param_index = 2;
  s.delays = {ds};
  s.symmetry = -Mat::Identity(2, 2);
  s.dfdx = [](const std::vector<Vec>& xs, const Vec& p, int j) {
    Mat A = Mat::Zero(2, 2);
    double x1 = xs[0](0);
    double fb = p(0) * xs[1](0) + p(1) * xs[1](1);
    if (j == 0) {
      A(0, 1) = 1.0;
      A(1, 0) = std::cos(x1) + std::sin(x1) * fb;
    } else {
      A(1, 0) = -std::cos(x1) * p(0);
      A(1, 1) = -std::cos(x1) * p(1);
    }
    return A;
  };
  s.dfdp = [](const std::vector<Vec>& xs, const Vec&, int i) {
    Vec g = Vec::Zero(2);
    if (i == 0) g(1) = -std::cos(xs[0](0)) * xs[1](0);
    if (i == 1) g(1) = -std::cos(xs[0](0)) * xs[1](1);
    return g;
  };
  return s;
}

DdeSystem make_enso(double eta_c, double eta_e) {
  DdeSystem s;
  s.name = (eta_c == 0.0 && eta_e == 0.0) ? "enso" : "enso_sd";
  s.n = 3;
  s.d = 2;
  s.mass = Mat::Identity(3, 3);
  s.p = Vec(6);
  s.p << 1.0, 0.0, 11.0, 1.2, eta_c, eta_e;
  s.param_names = {"b", "c", "kappa", "taubar", "eta_c", "eta_e"};
  s.rhs = [](const std::vector<Vec>& xs, const Vec& p) {
    Vec f(3);
    double r2 = xs[0](1) * xs[0](1) + xs[0](2) * xs[0](2);
    f(0) = -p(0) * std::tanh(p(2) * xs[2](0)) + p(1) * xs[0](1);
    f(1) = xs[0](1) - 2.0 * M_PI * xs[0](2) - xs[0](1) * r2;
    f(2) = xs[0](2) + 2.0 * M_PI * xs[0](1) - xs[0](2) * r2;
    return f;
  };
  DelaySpec d1;
  d1.kind = DelaySpec::Kind::FromParameter;
  d1.param_index = 3;
  DelaySpec d2;
  d2.kind = DelaySpec::Kind::StateDependent;
  d2.fn = [](const std::vector<Vec>& xs, const Vec& p) {
    return p(3) + p(4) * xs[0](0) + p(5) * xs[1](0);
  };
  d2.dx = [](const std::vector<Vec>&, const Vec& p, int l) {
    Eigen::RowVectorXd g = Eigen::RowVectorXd::Zero(3);
    g(0) = (l == 0) ? p(4) : p(5);
    return g;
  };
  d2.dp = [](const std::vector<Vec>& xs, const Vec&, int i) {
    if (i == 3) return 1.0;
    if (i == 4) return xs[0](0);
    if (i == 5) return xs[1](0);
    return 0.0;
  };
  s.delays = {d1, d2};
  s.dfdx = [](const std::vector<Vec>& xs, const Vec& p, int j) {
    Mat A = Mat::Zero(3, 3);
    if (j == 0) {
      double y = xs[0](1), z = xs[0](2);
      A(0, 1) = p(1);
      A(1, 1) = 1.0 - 3.0 * y * y - z * z;
      A(1, 2) = -2.0 * M_PI - 2.0 * y * z;
      A(2, 1) = 2.0 * M_PI - 2.0 * y * z;
      A(2, 2) = 1.0 - y * y - 3.0 * z * z;
    } else if (j == 2) {
      double c = std::cosh(p(2) * xs[2](0));
      A(0, 0) = -p(0) * p(2) / (c * c);
    }
    return A;
  };
  s.dfdp = [](const std::vector<Vec>& xs, const Vec& p, int i) {
    Vec g = Vec::Zero(3);
    if (i == 0) g(0) = -std::tanh(p(2) * xs[2](0));
    if (i == 1) g(0) = xs[0](1);
    if (i == 2) {
      double c = std::cosh(p(2) * xs[2](0));
      g(0) = -p(0) * xs[2](0) / (c * c);
    }
    return g;
  };
  return s;
}

DdeSystem make_two_delay() {
  DdeSystem s;
  s.name = "two_delay";
  s.n = 1;
  s.d = 2;
  s.mass = Mat::Identity(1, 1);
  s.p = Vec(7);
  s.p << 4.75, 2.0, 3.0, 1.3, 6.0, 1.0, 1.0;
  s.param_names = {"gamma", "kappa1", "kappa2", "a1", "a2", "c1", "c2"};
  s.rhs = [](const std::vector<Vec>& xs, const Vec& p) {
    Vec f(1);
    f(0) = -p(0) * xs[0](0) - p(1) * xs[1](0) - p(2) * xs[2](0);
    return f;
  };
  for (int j = 0; j < 2; ++j) {
    DelaySpec ds;
    ds.kind = DelaySpec::Kind::StateDependent;
    ds.fn = [j](const std::vector<Vec>& xs, const Vec& p) {
      return p(3 + j) + p(5 + j) * xs[0](0);
    };
    ds.dx = [j](const std::vector<Vec>&, const Vec& p, int l) {
      Eigen::RowVectorXd g = Eigen::RowVectorXd::Zero(1);
      if (l == 0) g(0) = p(5 + j);
      return g;
    };
    ds.dp = [j](const std::vector<Vec>& xs, const Vec&, int i) {
      if (i == 3 + j) return 1.0;
      if (i == 5 + j) return xs[0](0);
      return 0.0;
    };
    s.delays.push_back(ds);
  }
  s.dfdx = [](const std::vector<Vec>&, const Vec& p, int j) {
    Mat A(1, 1);
    A(0, 0) = -p(j);
    return A;
  };
  s.dfdp = [](const std::vector<Vec>& xs, const Vec&, int i) {
    Vec g = Vec::Zero(1);
    if (i <= 2) g(0) = -xs[i](0);
    return g;
  };
  return s;
}

Vec ellipsoid_to_params(const EllipsoidChart& ch, double phi, double psi) {
  double alpha = std::sin(phi * M_PI / 2.0);
  double beta = std::cos(phi * M_PI / 2.0) * std::cos(2.0 * M_PI * psi);
  double gamma = std::cos(phi * M_PI / 2.0) * std::sin(2.0 * M_PI * psi);
  double r = ch.r;
  Vec out(3);
  double a = ch.a_star + std::pow(r, 6) * alpha;
  double b = ch.b_star + r * r * (ch.tau_star / 3.0) * beta;
  double tau = b + std::pow(r, 4) * (ch.tau_star / 3.0) * gamma;
  out << a, b, tau;
  return out;
}

DdeSystem make_pendulum_on_ellipsoid() {
  DdeSystem base = make_pendulum();
  DdeSystem s;
  s.name = "pendulum_ellipsoid";
  s.n = 2;
  s.d = 1;
  s.mass = Mat::Identity(2, 2);
  s.p = Vec(3);
  s.p << 0.5, 0.0, 0.5;
  s.param_names = {"phi", "psi", "r"};
  auto abtau = [](const Vec& p) {
    EllipsoidChart ch;
    ch.r = p(2);
    return ellipsoid_to_params(ch, p(0), p(1));
  };
  s.rhs = [base, abtau](const std::vector<Vec>& xs, const Vec& p) {
    return base.rhs(xs, abtau(p));
  };
  DelaySpec ds;
  ds.kind = DelaySpec::Kind::StateDependent;  // reads only p, not the state
  ds.fn = [abtau](const std::vector<Vec>&, const Vec& p) {
    return abtau(p)(2);
  };
  ds.dx = [](const std::vector<Vec>&, const Vec&, int) {
    return Eigen::RowVectorXd::Zero(2);
  };
  s.delays = {ds};
  s.symmetry = -Mat::Identity(2, 2);
  s.dfdx = [base, abtau](const std::vector<Vec>& xs, const Vec& p, int j) {
    return base.dfdx(xs, abtau(p), j);
  };
  return s;
}

DdeSystem model_registry(const std::string& name) {
  if (name == "pendulum") return make_pendulum();
  if (name == "enso") return make_enso();
  if (name == "enso_sd") return make_enso(0.11, 0.04);
  if (name == "two_delay") return make_two_delay();
  if (name == "pendulum_ellipsoid") return make_pendulum_on_ellipsoid();
  throw std::invalid_argument("unknown model: " + name);
}

std::vector<std::string> model_names() {
  return {"pendulum", "enso", "enso_sd", "two_delay", "pendulum_ellipsoid"};
}

}  // namespace ddec
