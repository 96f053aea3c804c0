#include "ddec/floquet.hpp"

#include <algorithm>
#include <cmath>

namespace ddec {

OrbitLinearization linearize_along_orbit(const DdeSystem& sys,
                                         const PeriodicOrbitVar& orbit,
                                         double s) {
  OrbitLinearization out;
  std::vector<Vec> xs;
  po_delays_at(sys, orbit.profile, orbit.T, orbit.p, s, out.taus, out.args,
               &xs);
  DirectionalDerivatives dd = eval_derivatives(sys, xs, orbit.p);
  out.A.resize(sys.d + 1);
  for (int j = 0; j <= sys.d; ++j) out.A[j] = orbit.T * dd.A[j];
  out.dtau_dx = dd.dtau_dx;
  out.xp.resize(sys.d);
  for (int j = 0; j < sys.d; ++j)
    out.xp[j] = orbit.profile.eval_wrapped(out.args(j), 1);
  return out;
}

namespace {

// Interpolation stencil on the extended (tiled) mesh; mirrors the per-piece
// Lagrange basis of the orbit mesh.
struct ExtStencil {
  int first_node;
  Vec w;
};

ExtStencil ext_stencil(const Vec& bnd, const Vec& nodes, int degree, double s,
                       int order) {
  const int NE = static_cast<int>(bnd.size()) - 1;
  const double* beg = bnd.data();
  int e = static_cast<int>(std::lower_bound(beg, beg + NE + 1, s) - beg);
  e = std::clamp(e - 1, 0, NE - 1);
  ExtStencil st;
  st.first_node = e * degree;
  st.w = Vec::Zero(degree + 1);
  Vec t(degree + 1);
  for (int i = 0; i <= degree; ++i) t(i) = nodes(e * degree + i);
  if (order == 0) {
    for (int i = 0; i <= degree; ++i)
      if (s == t(i)) {
        st.w(i) = 1.0;
        return st;
      }
    for (int i = 0; i <= degree; ++i) {
      double num = 1.0;
      for (int j = 0; j <= degree; ++j)
        if (j != i) num *= (s - t(j)) / (t(i) - t(j));
      st.w(i) = num;
    }
  } else {
    for (int i = 0; i <= degree; ++i) {
      double sum = 0.0;
      for (int m = 0; m <= degree; ++m) {
        if (m == i) continue;
        double prod = 1.0 / (t(i) - t(m));
        for (int j = 0; j <= degree; ++j)
          if (j != i && j != m) prod *= (s - t(j)) / (t(i) - t(j));
        sum += prod;
      }
      st.w(i) = sum;
    }
  }
  return st;
}

}  // namespace

int FloquetSpectrum::unstable_count(double tol) const {
  int c = 0;
  for (const FloquetMode& m : multipliers)
    if (std::abs(m.mu) > 1.0 + tol) ++c;
  return c;
}

CVec FloquetSpectrum::eval(const FloquetMode& mode, double s, int order) const {
  ExtStencil st = ext_stencil(ext_boundaries, ext_nodes, degree, s, order);
  CVec out = CVec::Zero(n);
  for (int i = 0; i <= degree; ++i)
    out += st.w(i) * mode.coeffs.segment((st.first_node + i) * n, n);
  return out;
}

FloquetSpectrum floquet_multipliers(const DdeSystem& sys,
                                    const PeriodicOrbitVar& orbit, int count,
                                    const FloquetOptions& opts) {
  const CollocationMesh& mesh = orbit.profile.mesh;
  const int n = sys.n, kap = mesh.degree, NT = mesh.NT;
  const int ncol = kap * NT;

  // linearize at all collocation nodes first; tau_max decides the extension
  std::vector<OrbitLinearization> lin(ncol);
  double tau_max = 0.0;
  for (int c = 0; c < ncol; ++c) {
    lin[c] = linearize_along_orbit(sys, orbit, mesh.colloc_nodes(c));
    for (int j = 0; j < sys.d; ++j) tau_max = std::max(tau_max, lin[c].taus(j));
  }
  int n_tau = opts.n_tau_override >= 0
                  ? opts.n_tau_override
                  : static_cast<int>(std::ceil(tau_max / orbit.T * NT - 1e-12));
  if (tau_max > 0.0 && n_tau == 0) n_tau = 1;

  // extension boundaries: orbit subinterval widths repeated 1-periodically
  const int NE = n_tau + NT;
  Vec bnd(NE + 1);
  for (int i = 0; i <= NT; ++i) bnd(n_tau + i) = mesh.boundaries(i);
  for (int i = 1; i <= n_tau; ++i) {
    int src = NT - 1 - ((i - 1) % NT);
    bnd(n_tau - i) =
        bnd(n_tau - i + 1) - (mesh.boundaries(src + 1) - mesh.boundaries(src));
  }
  Vec nodes(kap * NE + 1);
  for (int e = 0; e < NE; ++e) {
    double h = bnd(e + 1) - bnd(e);
    for (int i = 0; i < kap; ++i) nodes(e * kap + i) = bnd(e) + h * i / kap;
  }
  nodes(kap * NE) = bnd(NE);

  const int N1 = n * (kap * n_tau + 1);
  const int N2 = n * kap * NT;
  const int Nall = N1 + N2;

  // DE rows: M x'(s) = sum_j A_j(s) delta^j, no wrapping.  delta^j carries
  // the state-dependent argument shift back onto the earlier arguments.
  Mat ADE = Mat::Zero(N2, Nall);
  auto dense_row = [&](double s, int order) {
    Mat E = Mat::Zero(n, Nall);
    ExtStencil st = ext_stencil(bnd, nodes, kap, s, order);
    for (int i = 0; i <= kap; ++i)
      for (int c2 = 0; c2 < n; ++c2)
        E(c2, (st.first_node + i) * n + c2) = st.w(i);
    return E;
  };
  for (int c = 0; c < ncol; ++c) {
    double s = mesh.colloc_nodes(c);
    const OrbitLinearization& L = lin[c];
    std::vector<Mat> D(sys.d + 1);
    D[0] = dense_row(s, 0);
    for (int j = 0; j < sys.d; ++j) {
      Eigen::RowVectorXd shift = Eigen::RowVectorXd::Zero(Nall);
      for (int l = 0; l <= j; ++l) shift += L.dtau_dx[j][l] * D[l];
      D[j + 1] = dense_row(std::max(L.args(j), bnd(0)), 0) -
                 (L.xp[j] / orbit.T) * shift;
    }
    Mat row = sys.mass * dense_row(s, 1);
    for (int j = 0; j <= sys.d; ++j) row -= L.A[j] * D[j];
    ADE.block(c * n, 0, n, Nall) = row;
  }

  FloquetSpectrum out;
  out.ext_boundaries = bnd;
  out.ext_nodes = nodes;
  out.degree = kap;
  out.n = n;
  out.n_tau = n_tau;

  std::vector<std::pair<Complex, CVec>> eigs;  // (mu, full nodal vector)

  // monodromy reduction: solve the DE rows for the nodes in (0,1], then the
  // shift identity x(g_i + 1) = mu x(g_i) becomes a standard eigenproblem
  bool reduced_ok = false;
  if (!opts.force_generalized) {
    Mat A1 = ADE.leftCols(N1), A2 = ADE.rightCols(N2);
    Eigen::PartialPivLU<Mat> lu(A2);
    Mat Xint = lu.solve(-A1);  // N2 x N1, x2 = Xint x1
    double resid = (A2 * Xint + A1).norm() / (1.0 + A1.norm());
    if (Xint.allFinite() && resid < 1e-8) {
      Mat H(N1, N1);
      for (int i = 0; i < kap * n_tau + 1; ++i) {
        int shifted = i + kap * NT;  // node with g_shifted = g_i + 1
        for (int c = 0; c < n; ++c) {
          int r = i * n + c;
          if (shifted <= kap * n_tau) {  // shifted node still in the left part
            H.row(r).setZero();
            H(r, shifted * n + c) = 1.0;
          } else {
            H.row(r) = Xint.row(shifted * n + c - N1);
          }
        }
      }
      Eigen::EigenSolver<Mat> es(H);
      for (int i = 0; i < N1; ++i) {
        CVec x1 = es.eigenvectors().col(i);
        CVec full(Nall);
        full.head(N1) = x1;
        full.tail(N2) = Xint.cast<Complex>() * x1;
        eigs.emplace_back(es.eigenvalues()(i), full);
      }
      reduced_ok = true;
    }
  }
  if (!reduced_ok) {
    // generalized problem: top rows ADE (B zero), bottom shift rows
    Mat A = Mat::Zero(Nall, Nall), B = Mat::Zero(Nall, Nall);
    A.topRows(N2) = ADE;
    for (int i = 0; i < kap * n_tau + 1; ++i) {
      int shifted = i + kap * NT;
      for (int c = 0; c < n; ++c) {
        A(N2 + i * n + c, shifted * n + c) = 1.0;
        B(N2 + i * n + c, i * n + c) = 1.0;
      }
    }
    Eigen::GeneralizedEigenSolver<Mat> ges(A, B);
    for (int i = 0; i < Nall; ++i) {
      Complex beta = ges.betas()(i);
      if (std::abs(beta) < 1e-12) continue;  // infinite eigenvalue
      eigs.emplace_back(ges.alphas()(i) / beta,
                        ges.eigenvectors().col(i).eval());
    }
    out.used_generalized = true;
  }

  std::sort(eigs.begin(), eigs.end(), [](const auto& a, const auto& b) {
    return std::abs(a.first) > std::abs(b.first);
  });
  if (static_cast<int>(eigs.size()) > count) eigs.resize(count);

  const int head_node = kap * n_tau;  // node at s = 0
  for (auto& [mu, v] : eigs) {
    FloquetMode m;
    m.mu = mu;
    m.coeffs = v;
    double mx = 0.0;
    for (int i = 0; i < Nall; ++i) mx = std::max(mx, std::abs(m.coeffs(i)));
    if (mx > 0.0) m.coeffs /= mx;
    for (int c = 0; c < n; ++c) {
      Complex h = m.coeffs(head_node * n + c);
      if (std::abs(h) > 1e-8) {
        m.coeffs *= std::conj(h) / std::abs(h);
        break;
      }
    }
    out.multipliers.push_back(std::move(m));
  }
  return out;
}

}  // namespace ddec
