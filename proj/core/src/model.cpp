#include "ddec/model.hpp"

#include <algorithm>

namespace ddec {

int DdeSystem::param_index(const std::string& pname) const {
  auto it = std::find(param_names.begin(), param_names.end(), pname);
  if (it == param_names.end())
    throw DimensionError("unknown parameter name: " + pname);
  return static_cast<int>(it - param_names.begin());
}

static void check_xs(const DdeSystem& sys, const std::vector<Vec>& xs,
                     int expected) {
  if (static_cast<int>(xs.size()) < expected)
    throw DimensionError("expected " + std::to_string(expected) +
                         " state vectors, got " + std::to_string(xs.size()));
  for (int j = 0; j < expected; ++j)
    if (xs[j].size() != sys.n)
      throw DimensionError("state vector " + std::to_string(j) +
                           " has wrong dimension");
}

Vec eval_rhs(const DdeSystem& sys, const std::vector<Vec>& xs, const Vec& p) {
  if (static_cast<int>(xs.size()) != sys.d + 1)
    throw DimensionError("eval_rhs: expected d+1 state vectors");
  check_xs(sys, xs, sys.d + 1);
  return sys.rhs(xs, p);
}

static double eval_one_delay(const DdeSystem& sys, int j,
                             const std::vector<Vec>& xs_partial, const Vec& p) {
  const DelaySpec& ds = sys.delays[j];
  if (ds.kind == DelaySpec::Kind::FromParameter) return p(ds.param_index);
  // Restrict to the permitted nesting prefix x^0..x^{j-1}.
  std::vector<Vec> prefix(xs_partial.begin(), xs_partial.begin() + j + 1);
  prefix.resize(j + 1);
  // delay j may read x^0..x^{j-1}; prefix has j+1 entries only when j=0 has
  // one (x^0). Delay index j corresponds to tau_{j+1} in 1-based terms.
  return ds.fn(prefix, p);
}

Vec eval_delays_unchecked(const DdeSystem& sys,
                          const std::vector<Vec>& xs_partial, const Vec& p) {
  Vec taus(sys.d);
  for (int j = 0; j < sys.d; ++j) {
    check_xs(sys, xs_partial, j + 1);
    taus(j) = eval_one_delay(sys, j, xs_partial, p);
  }
  return taus;
}

Vec eval_delays(const DdeSystem& sys, const std::vector<Vec>& xs_partial,
                const Vec& p) {
  Vec taus = eval_delays_unchecked(sys, xs_partial, p);
  for (int j = 0; j < sys.d; ++j)
    if (taus(j) < 0.0) throw NegativeDelayError(j + 1, taus(j));
  return taus;
}

DirectionalDerivatives eval_derivatives(const DdeSystem& sys,
                                        const std::vector<Vec>& xs,
                                        const Vec& p) {
  check_xs(sys, xs, sys.d + 1);
  DirectionalDerivatives out;
  out.A.resize(sys.d + 1);
  const int np = static_cast<int>(p.size());

  for (int j = 0; j <= sys.d; ++j) {
    if (sys.dfdx) {
      out.A[j] = sys.dfdx(xs, p, j);
    } else {
      Mat A(sys.n, sys.n);
      std::vector<Vec> w = xs;
      for (int c = 0; c < sys.n; ++c) {
        double h = fd_step(xs[j](c));
        w[j](c) = xs[j](c) + h;
        Vec fp = sys.rhs(w, p);
        w[j](c) = xs[j](c) - h;
        Vec fm = sys.rhs(w, p);
        w[j](c) = xs[j](c);
        A.col(c) = (fp - fm) / (2 * h);
      }
      out.A[j] = A;
    }
  }

  out.dfdp.resize(sys.n, np);
  for (int i = 0; i < np; ++i) {
    if (sys.dfdp) {
      out.dfdp.col(i) = sys.dfdp(xs, p, i);
    } else {
      Vec q = p;
      double h = fd_step(p(i));
      q(i) = p(i) + h;
      Vec fp = sys.rhs(xs, q);
      q(i) = p(i) - h;
      Vec fm = sys.rhs(xs, q);
      out.dfdp.col(i) = (fp - fm) / (2 * h);
    }
  }

  out.dtau_dx.resize(sys.d);
  out.dtau_dp = Mat::Zero(sys.d, np);
  for (int j = 0; j < sys.d; ++j) {
    const DelaySpec& ds = sys.delays[j];
    out.dtau_dx[j].resize(j + 1);
    if (ds.kind == DelaySpec::Kind::FromParameter) {
      for (int l = 0; l <= j; ++l)
        out.dtau_dx[j][l] = Eigen::RowVectorXd::Zero(sys.n);
      out.dtau_dp(j, ds.param_index) = 1.0;
      continue;
    }
    std::vector<Vec> prefix(xs.begin(), xs.begin() + j + 1);
    for (int l = 0; l <= j; ++l) {
      if (ds.dx) {
        out.dtau_dx[j][l] = ds.dx(prefix, p, l);
      } else {
        Eigen::RowVectorXd row(sys.n);
        std::vector<Vec> w = prefix;
        for (int c = 0; c < sys.n; ++c) {
          double h = fd_step(prefix[l](c));
          w[l](c) = prefix[l](c) + h;
          double tp = ds.fn(w, p);
          w[l](c) = prefix[l](c) - h;
          double tm = ds.fn(w, p);
          w[l](c) = prefix[l](c);
          row(c) = (tp - tm) / (2 * h);
        }
        out.dtau_dx[j][l] = row;
      }
    }
    for (int i = 0; i < np; ++i) {
      if (ds.dp) {
        out.dtau_dp(j, i) = ds.dp(prefix, p, i);
      } else {
        Vec q = p;
        double h = fd_step(p(i));
        q(i) = p(i) + h;
        double tp = ds.fn(prefix, q);
        q(i) = p(i) - h;
        double tm = ds.fn(prefix, q);
        out.dtau_dp(j, i) = (tp - tm) / (2 * h);
      }
    }
  }
  return out;
}

}  // namespace ddec
