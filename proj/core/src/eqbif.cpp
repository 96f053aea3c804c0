#include "ddec/eqbif.hpp"

#include <cmath>

namespace ddec {

static Vec with_params(const Vec& p0, int pi, int pj, double a, double b) {
  Vec p = p0;
  p(pi) = a;
  p(pj) = b;
  return p;
}

DefiningSystem fold_defining_system(const DdeSystem& sys, int pi, int pj) {
  const int n = sys.n;
  DefiningSystem ds;
  ds.dim_y = 2 * n + 2;
  ds.param_components = {2 * n, 2 * n + 1};
  ds.param_labels = {sys.param_names[pi], sys.param_names[pj]};
  Vec p0 = sys.p;
  ds.residual = [&sys, p0, pi, pj, n](const Vec& y) {
    Vec x = y.head(n), v = y.segment(n, n);
    Vec p = with_params(p0, pi, pj, y(2 * n), y(2 * n + 1));
    std::vector<Vec> xs(sys.d + 1, x);
    CharMatrix cm = char_matrix(sys, x, p);
    Vec r(2 * n + 1);
    r.head(n) = sys.rhs(xs, p);
    r.segment(n, n) = cm.eval(0.0).real() * v;
    r(2 * n) = v.dot(v) - 1.0;
    return r;
  };
  return ds;
}

Vec pack_fold(const Vec& x, const Vec& v, double pi_val, double pj_val) {
  Vec y(2 * x.size() + 2);
  y << x, v, pi_val, pj_val;
  return y;
}

DefiningSystem hopf_defining_system(const DdeSystem& sys, int pi, int pj,
                                    std::shared_ptr<CVec> v_ref) {
  const int n = sys.n;
  DefiningSystem ds;
  ds.dim_y = 3 * n + 3;
  ds.param_components = {3 * n + 1, 3 * n + 2};
  ds.param_labels = {sys.param_names[pi], sys.param_names[pj]};
  Vec p0 = sys.p;
  ds.residual = [&sys, p0, pi, pj, n, v_ref](const Vec& y) {
    Vec x = y.head(n);
    CVec v = y.segment(n, n).cast<Complex>() +
             Complex(0, 1) * y.segment(2 * n, n).cast<Complex>();
    double omega = y(3 * n);
    Vec p = with_params(p0, pi, pj, y(3 * n + 1), y(3 * n + 2));
    std::vector<Vec> xs(sys.d + 1, x);
    CharMatrix cm = char_matrix(sys, x, p);
    CVec Dv = cm.eval(Complex(0.0, omega)) * v;
    Complex norm = v_ref->transpose() * v;
    Vec r(3 * n + 2);
    r.head(n) = sys.rhs(xs, p);
    r.segment(n, n) = Dv.real();
    r.segment(2 * n, n) = Dv.imag();
    r(3 * n) = norm.real() - 1.0;
    r(3 * n + 1) = norm.imag();
    return r;
  };
  return ds;
}

Vec pack_hopf(const Vec& x, const CVec& v, double omega, double pi_val,
              double pj_val) {
  Vec y(3 * x.size() + 3);
  y << x, v.real(), v.imag(), omega, pi_val, pj_val;
  return y;
}

HopfPoint unpack_hopf(const Vec& y, int n) {
  HopfPoint h;
  h.x = y.head(n);
  h.v = y.segment(n, n).cast<Complex>() +
        Complex(0, 1) * y.segment(2 * n, n).cast<Complex>();
  h.omega = y(3 * n);
  h.pi_val = y(3 * n + 1);
  h.pj_val = y(3 * n + 2);
  return h;
}

// Orthonormal basis of the antisymmetric subspace {x : Rx = -x}.
static Mat antisym_basis(const Mat& R) {
  const int n = static_cast<int>(R.rows());
  Mat P = 0.5 * (Mat::Identity(n, n) - R);  // projector onto the subspace
  Eigen::FullPivLU<Mat> lu(P);
  Mat img = lu.image(P);
  Eigen::HouseholderQR<Mat> qr(img);
  Mat Q = qr.householderQ() * Mat::Identity(n, img.cols());
  return Q;
}

DefiningSystem pitchfork_defining_system(const DdeSystem& sys, int pi, int pj) {
  if (!sys.symmetry)
    throw DimensionError("pitchfork system requires a registered symmetry");
  const int n = sys.n;
  Mat B = antisym_basis(*sys.symmetry);
  const int k = static_cast<int>(B.cols());
  DefiningSystem ds;
  ds.dim_y = 2 * n + 2 + k;
  ds.param_components = {2 * n, 2 * n + 1};
  ds.param_labels = {sys.param_names[pi], sys.param_names[pj]};
  Vec p0 = sys.p;
  ds.residual = [&sys, p0, pi, pj, n, k, B](const Vec& y) {
    Vec x = y.head(n), v = y.segment(n, n);
    Vec p = with_params(p0, pi, pj, y(2 * n), y(2 * n + 1));
    Vec g = y.tail(k);
    std::vector<Vec> xs(sys.d + 1, x);
    CharMatrix cm = char_matrix(sys, x, p);
    Vec r(2 * n + 1 + k);
    r.head(n) = sys.rhs(xs, p) + B * g;
    r.segment(n, n) = cm.eval(0.0).real() * v;
    r(2 * n) = v.dot(v) - 1.0;
    r.tail(k) = B.transpose() * x;
    return r;
  };
  return ds;
}

Vec pack_pitchfork(const DdeSystem& sys, const Vec& x, const Vec& v,
                   double pi_val, double pj_val) {
  Mat B = antisym_basis(*sys.symmetry);
  Vec y(2 * sys.n + 2 + B.cols());
  y << x, v, pi_val, pj_val, Vec::Zero(B.cols());
  return y;
}

Vec seed_hopf(const DdeSystem& sys, int pi, int pj, const Vec& x, const Vec& p,
              const Eigenpair& pair, std::shared_ptr<CVec> v_ref) {
  double omega = std::abs(pair.lambda.imag());
  CVec v = pair.v;
  if (pair.lambda.imag() < 0) v = v.conjugate();
  *v_ref = v.conjugate() / v.squaredNorm();  // v_ref^T v = 1 at the seed
  Vec y = pack_hopf(x, v, omega, p(pi), p(pj));
  DefiningSystem ds = hopf_defining_system(sys, pi, pj, v_ref);
  Vec tangent = Vec::Zero(ds.dim_y);
  tangent(3 * sys.n + 1) = 1.0;
  NewtonResult nr = newton_correct(ds, y, tangent);
  *v_ref = unpack_hopf(nr.y, sys.n).v;  // frozen for the rest of the run
  double vn2 = v_ref->squaredNorm();
  *v_ref = v_ref->conjugate() / vn2;
  return newton_correct(ds, nr.y, tangent).y;
}

void detect_codim2(const DdeSystem& sys, const DefiningSystem& ds,
                   Branch& branch, EqCurveKind kind, int pi, int pj,
                   const ContinuationOptions& opts_in) {
  const int n = sys.n;
  Vec p0 = sys.p;
  auto spectrum_at = [&](const BranchPoint& pt) {
    Vec x = pt.y.head(n);
    int off = (kind == EqCurveKind::Hopf) ? 3 * n + 1 : 2 * n;
    Vec p = with_params(p0, pi, pj, pt.y(off), pt.y(off + 1));
    return rightmost_eigenvalues(char_matrix(sys, x, p));
  };

  std::vector<std::pair<std::string, TestFunction>> tests;
  if (kind == EqCurveKind::Hopf) {
    tests.emplace_back("hopf_hopf", [&, n](const BranchPoint& pt) {
      double omega = pt.y(3 * n);
      double best = -1.0;
      for (const Eigenpair& ep : spectrum_at(pt)) {
        double im = ep.lambda.imag();
        if (im < kOmegaMin) continue;
        if (std::abs(im - omega) < 0.05 * (1.0 + omega)) continue;
        best = std::max(best, ep.lambda.real());
      }
      return (best == -1.0) ? -1.0 : best;
    });
    tests.emplace_back("zero_hopf", [&, n](const BranchPoint& pt) {
      Vec x = pt.y.head(n);
      Vec p = with_params(p0, pi, pj, pt.y(3 * n + 1), pt.y(3 * n + 2));
      CharMatrix cm = char_matrix(sys, x, p);
      return cm.eval(0.0).real().determinant();
    });
    tests.emplace_back("double_zero", [n](const BranchPoint& pt) {
      return pt.y(3 * n) - kOmegaMin;
    });
  } else {
    tests.emplace_back("fold_hopf", [&](const BranchPoint& pt) {
      double best = -1.0;
      for (const Eigenpair& ep : spectrum_at(pt))
        if (ep.lambda.imag() >= kOmegaMin)
          best = std::max(best, ep.lambda.real());
      return (best == -1.0) ? -1.0 : best;
    });
  }
  detect_events(ds, branch, tests, opts_in);
}

}  // namespace ddec
