#include "ddec/equilibrium.hpp"

#include <algorithm>
#include <cmath>

namespace ddec {

CMat CharMatrix::eval(Complex lambda) const {
  const int n = static_cast<int>(x_eq.size());
  CMat D = lambda * mass.cast<Complex>();
  D -= A[0].cast<Complex>();
  for (size_t i = 1; i < A.size(); ++i)
    D -= std::exp(-lambda * taus(i - 1)) * A[i].cast<Complex>();
  (void)n;
  return D;
}

CMat CharMatrix::eval_deriv(Complex lambda) const {
  CMat D = mass.cast<Complex>();
  for (size_t i = 1; i < A.size(); ++i)
    D += taus(i - 1) * std::exp(-lambda * taus(i - 1)) * A[i].cast<Complex>();
  return D;
}

CharMatrix char_matrix(const DdeSystem& sys, const Vec& x_eq, const Vec& p) {
  CharMatrix cm;
  cm.x_eq = x_eq;
  cm.p = p;
  cm.mass = sys.mass;
  std::vector<Vec> xs(sys.d + 1, x_eq);
  cm.taus = eval_delays(sys, xs, p);  // nesting resolved at the constant state
  DirectionalDerivatives dd = eval_derivatives(sys, xs, p);
  cm.A = dd.A;
  return cm;
}

bool refine_eigenpair(const CharMatrix& cm, Complex& lambda, CVec& v,
                      double tol, int max_iter) {
  const int n = static_cast<int>(v.size());
  CVec v_ref = v;
  Complex lam = lambda;
  CVec vv = v;
  for (int it = 0; it < max_iter; ++it) {
    CMat D = cm.eval(lam);
    CVec r(n + 1);
    r.head(n) = D * vv;
    r(n) = v_ref.transpose() * vv;
    r(n) -= 1.0;
    if (r.head(n).norm() <= tol && std::abs(r(n)) <= tol) {
      lambda = lam;
      v = vv / vv.norm();
      return true;
    }
    CMat J = CMat::Zero(n + 1, n + 1);
    J.topLeftCorner(n, n) = D;
    J.topRightCorner(n, 1) = cm.eval_deriv(lam) * vv;
    J.block(n, 0, 1, n) = v_ref.transpose();
    CVec dz = J.partialPivLu().solve(-r);
    if (!dz.allFinite()) return false;
    vv += dz.head(n);
    lam += dz(n);
  }
  return false;
}

// Chebyshev differentiation matrix on extreme points mapped to [a, 0].
static void cheb_diff(int m, double a, Vec& nodes, Mat& D) {
  nodes.resize(m + 1);
  Mat Dc(m + 1, m + 1);
  Vec xc(m + 1), c(m + 1);
  for (int j = 0; j <= m; ++j) {
    xc(j) = std::cos(M_PI * j / m);
    c(j) = (j == 0 || j == m) ? 2.0 : 1.0;
  }
  for (int i = 0; i <= m; ++i)
    for (int j = 0; j <= m; ++j) {
      if (i == j) continue;
      double sign = ((i + j) % 2) ? -1.0 : 1.0;
      Dc(i, j) = (c(i) / c(j)) * sign / (xc(i) - xc(j));
    }
  for (int i = 0; i <= m; ++i) {
    double s = 0.0;
    for (int j = 0; j <= m; ++j)
      if (j != i) s += Dc(i, j);
    Dc(i, i) = -s;
  }
  // map x in [-1,1] -> theta in [a, 0]: theta = a*(1-x)/2, dtheta = -a/2 dx
  for (int j = 0; j <= m; ++j) nodes(j) = a * (1.0 - xc(j)) / 2.0;
  D = Dc * (-2.0 / a);
}

// Barycentric interpolation row at point theta for Chebyshev extreme nodes.
static Eigen::RowVectorXd cheb_interp_row(const Vec& nodes, double theta) {
  const int m = static_cast<int>(nodes.size()) - 1;
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(m + 1);
  for (int j = 0; j <= m; ++j)
    if (theta == nodes(j)) {
      row(j) = 1.0;
      return row;
    }
  double denom = 0.0;
  for (int j = 0; j <= m; ++j) {
    double wj = ((j % 2) ? -1.0 : 1.0) * ((j == 0 || j == m) ? 0.5 : 1.0);
    double term = wj / (theta - nodes(j));
    row(j) = term;
    denom += term;
  }
  row /= denom;
  return row;
}

static std::vector<Eigenpair> pseudospectral_eigs(const CharMatrix& cm, int m,
                                                  int k) {
  const int n = static_cast<int>(cm.x_eq.size());
  const int d = static_cast<int>(cm.A.size()) - 1;
  double tau_max = 0.0;
  for (int i = 0; i < d; ++i) tau_max = std::max(tau_max, cm.taus(i));

  Mat G;
  std::vector<Eigenpair> out;
  if (tau_max <= 0.0) {
    // pure ODE: eigenvalues of the summed coefficient matrix
    Mat A0 = Mat::Zero(n, n);
    for (const Mat& A : cm.A) A0 += A;
    G = A0;
    Eigen::EigenSolver<Mat> es(G);
    for (int i = 0; i < n; ++i) {
      Eigenpair ep;
      ep.lambda = es.eigenvalues()(i);
      ep.v = es.eigenvectors().col(i);
      out.push_back(ep);
    }
  } else {
    Vec nodes;
    Mat D;
    cheb_diff(m, -tau_max, nodes, D);
    // nodes(0) = 0 (x=1 -> theta=0), nodes(m) = -tau_max
    const int N = (m + 1) * n;
    G = Mat::Zero(N, N);
    for (int j = 0; j <= m; ++j) {
      if (nodes(j) == 0.0) {
        // boundary row: x'(0) = sum_i A_i x(-tau_i)
        for (int i = 0; i <= d; ++i) {
          double tau_i = (i == 0) ? 0.0 : cm.taus(i - 1);
          Eigen::RowVectorXd row = cheb_interp_row(nodes, -tau_i);
          for (int l = 0; l <= m; ++l)
            G.block(j * n, l * n, n, n) += row(l) * cm.A[i];
        }
      } else {
        for (int l = 0; l <= m; ++l)
          G.block(j * n, l * n, n, n) +=
              D(j, l) * Mat::Identity(n, n);
      }
    }
    Eigen::EigenSolver<Mat> es(G);
    for (int i = 0; i < N; ++i) {
      Eigenpair ep;
      ep.lambda = es.eigenvalues()(i);
      // head block at theta = 0 is node 0
      ep.v = es.eigenvectors().col(i).segment(0, n);
      out.push_back(ep);
    }
  }
  std::sort(out.begin(), out.end(), [](const Eigenpair& a, const Eigenpair& b) {
    if (a.lambda.real() != b.lambda.real())
      return a.lambda.real() > b.lambda.real();
    return a.lambda.imag() > b.lambda.imag();
  });
  if (static_cast<int>(out.size()) > k) out.resize(k);
  return out;
}

std::vector<Eigenpair> rightmost_eigenvalues(const CharMatrix& cm,
                                             const EigOptions& opts) {
  const int n = static_cast<int>(cm.x_eq.size());
  std::vector<Eigenpair> prev, cur;
  for (int m = opts.m_init; m <= opts.m_cap; m *= 2) {
    cur = pseudospectral_eigs(cm, m, opts.count);
    for (Eigenpair& ep : cur) {
      double vn = ep.v.norm();
      if (vn > 1e-12) ep.v /= vn;
      Complex lam = ep.lambda;
      CVec v = ep.v;
      if (refine_eigenpair(cm, lam, v, opts.tol)) {
        ep.lambda = lam;
        ep.v = v;
        ep.refined = true;
      } else {
        ep.refined = false;
      }
    }
    std::sort(cur.begin(), cur.end(),
              [](const Eigenpair& a, const Eigenpair& b) {
                if (a.lambda.real() != b.lambda.real())
                  return a.lambda.real() > b.lambda.real();
                return a.lambda.imag() > b.lambda.imag();
              });
    // deduplicate refined eigenvalues that collapsed onto each other
    std::vector<Eigenpair> uniq;
    for (const Eigenpair& ep : cur) {
      bool dup = false;
      for (const Eigenpair& u : uniq)
        if (std::abs(ep.lambda - u.lambda) < 1e-10 * (1.0 + std::abs(u.lambda)))
          dup = true;
      if (!dup) uniq.push_back(ep);
    }
    cur = uniq;
    if (cm.taus.size() == 0 || n == 0) return cur;

    bool converged = !prev.empty() && prev.size() >= cur.size();
    if (!prev.empty()) {
      size_t cmp = std::min(prev.size(), cur.size());
      for (size_t i = 0; i < cmp; ++i)
        if (std::abs(prev[i].lambda - cur[i].lambda) > opts.tol) {
          converged = false;
          break;
        }
    } else {
      converged = false;
    }
    if (converged) return cur;
    prev = cur;
    double tau_max = cm.taus.size() ? cm.taus.maxCoeff() : 0.0;
    if (tau_max <= 0.0) return cur;  // ODE case is exact
  }
  return cur;  // refinement cap reached; Newton-refined values still returned
}

int count_unstable(const std::vector<Eigenpair>& spec, double margin) {
  int c = 0;
  for (const Eigenpair& ep : spec)
    if (ep.lambda.real() > margin) ++c;
  return c;
}

DefiningSystem eq_defining_system(const DdeSystem& sys, int free_param_index) {
  DefiningSystem ds;
  const int n = sys.n;
  ds.dim_y = n + 1;
  ds.param_components = {n};
  ds.param_labels = {sys.param_names.empty()
                         ? std::to_string(free_param_index)
                         : sys.param_names[free_param_index]};
  Vec p0 = sys.p;
  ds.residual = [&sys, p0, free_param_index, n](const Vec& y) {
    Vec p = p0;
    p(free_param_index) = y(n);
    std::vector<Vec> xs(sys.d + 1, y.head(n));
    return sys.rhs(xs, p);
  };
  ds.jacobian = [&sys, p0, free_param_index, n](const Vec& y) {
    Vec p = p0;
    p(free_param_index) = y(n);
    std::vector<Vec> xs(sys.d + 1, y.head(n));
    DirectionalDerivatives dd = eval_derivatives(sys, xs, p);
    Mat J = Mat::Zero(n, n + 1);
    for (const Mat& A : dd.A) J.leftCols(n) += A;
    J.col(n) = dd.dfdp.col(free_param_index);
    return J;
  };
  return ds;
}

EquilibriumPoint analyze_equilibrium(const DdeSystem& sys, const Vec& x_eq,
                                     const Vec& p, const EigOptions& opts) {
  EquilibriumPoint ep;
  ep.x_eq = x_eq;
  ep.p = p;
  ep.spectrum = rightmost_eigenvalues(char_matrix(sys, x_eq, p), opts);
  ep.unstable_count = count_unstable(ep.spectrum);
  return ep;
}

std::pair<Vec, Vec> branch_off_at_zero_eigenvalue(const DdeSystem& sys,
                                                  int free_param_index,
                                                  const Vec& y_event,
                                                  double eps) {
  const int n = sys.n;
  Vec p = sys.p;
  p(free_param_index) = y_event(n);
  CharMatrix cm = char_matrix(sys, y_event.head(n), p);
  // null vector of Delta(0)
  Eigen::JacobiSVD<Mat> svd(cm.eval(0.0).real(),
                            Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vec v = svd.matrixV().col(n - 1);

  DefiningSystem ds = eq_defining_system(sys, free_param_index);
  ContinuationOptions opts;
  Vec tangent = Vec::Zero(n + 1);
  tangent.head(n) = v;
  tangent /= tangent.norm();

  for (double sign : {1.0, -1.0}) {
    try {
      Vec y1 = y_event, y2 = y_event;
      y1.head(n) += sign * eps * v;
      y2.head(n) += sign * 2.0 * eps * v;
      Vec c1 = newton_correct(ds, y1, tangent, opts).y;
      Vec c2 = newton_correct(ds, y2, tangent, opts).y;
      if ((c2 - c1).norm() > 1e-12) return {c1, c2};
    } catch (const std::runtime_error&) {
    }
  }
  throw NoConvergenceError("branch_off: corrector failed for both signs");
}

}  // namespace ddec
