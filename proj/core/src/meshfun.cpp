#include "ddec/meshfun.hpp"

#include <algorithm>
#include <cmath>

namespace ddec {

void gauss_legendre(int npts, Vec& nodes, Vec& weights) {
  // Newton iteration on Legendre roots, nodes mapped to [0,1].
  nodes.resize(npts);
  weights.resize(npts);
  for (int i = 0; i < npts; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (npts + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      if (npts == 1) { p1 = x; }
      for (int k = 2; k <= npts; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double pn = (npts == 1) ? x : p1;
      double pn1 = (npts == 1) ? 1.0 : p0;
      dp = npts * (x * pn - pn1) / (x * x - 1.0);
      double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes(npts - 1 - i) = 0.5 * (x + 1.0);
    weights(npts - 1 - i) = 1.0 / ((1.0 - x * x) * dp * dp);
  }
}

CollocationMesh CollocationMesh::uniform(int NT, int degree) {
  Vec b(NT + 1);
  for (int i = 0; i <= NT; ++i) b(i) = static_cast<double>(i) / NT;
  b(NT) = 1.0;
  return from_boundaries(b, degree);
}

CollocationMesh CollocationMesh::from_boundaries(const Vec& b, int degree) {
  CollocationMesh m;
  m.NT = static_cast<int>(b.size()) - 1;
  m.degree = degree;
  m.boundaries = b;
  for (int e = 0; e < m.NT; ++e)
    if (!(b(e + 1) > b(e)))
      throw DimensionError("mesh boundaries not strictly increasing");

  m.rep_nodes.resize(degree * m.NT + 1);
  for (int e = 0; e < m.NT; ++e) {
    double h = b(e + 1) - b(e);
    for (int i = 0; i < degree; ++i)
      m.rep_nodes(e * degree + i) = b(e) + h * i / degree;
  }
  m.rep_nodes(degree * m.NT) = b(m.NT);

  Vec gn, gw;
  gauss_legendre(degree, gn, gw);
  m.colloc_nodes.resize(degree * m.NT);
  for (int e = 0; e < m.NT; ++e) {
    double h = b(e + 1) - b(e);
    for (int i = 0; i < degree; ++i)
      m.colloc_nodes(e * degree + i) = b(e) + h * gn(i);
  }
  return m;
}

int CollocationMesh::find_interval(double s) const {
  if (s < 0.0 || s > 1.0) throw DimensionError("mesh evaluation outside [0,1]");
  // left piece at interior boundaries except at s=0
  const double* beg = boundaries.data();
  int idx = static_cast<int>(std::lower_bound(beg, beg + NT + 1, s) - beg);
  return std::clamp(idx - 1, 0, NT - 1);
}

InterpStencil interp_stencil(const CollocationMesh& mesh, double s, int order) {
  const int k = mesh.degree;
  int e = mesh.find_interval(s);
  InterpStencil st;
  st.first_node = e * k;
  st.w = Vec::Zero(k + 1);

  // Local nodes of subinterval e.
  Vec t(k + 1);
  for (int i = 0; i <= k; ++i) t(i) = mesh.rep_nodes(e * k + i);
  // snap to the right endpoint node index for the final subinterval
  if (e == mesh.NT - 1) t(k) = mesh.boundaries(mesh.NT);

  if (order == 0) {
    for (int i = 0; i <= k; ++i) {
      if (s == t(i)) {  // nodal evaluation is exact
        st.w(i) = 1.0;
        return st;
      }
    }
    for (int i = 0; i <= k; ++i) {
      double num = 1.0;
      for (int j = 0; j <= k; ++j)
        if (j != i) num *= (s - t(j)) / (t(i) - t(j));
      st.w(i) = num;
    }
  } else if (order == 1) {
    for (int i = 0; i <= k; ++i) {
      double sum = 0.0;
      for (int m = 0; m <= k; ++m) {
        if (m == i) continue;
        double prod = 1.0 / (t(i) - t(m));
        for (int j = 0; j <= k; ++j)
          if (j != i && j != m) prod *= (s - t(j)) / (t(i) - t(j));
        sum += prod;
      }
      st.w(i) = sum;
    }
  } else {
    throw DimensionError("interp order must be 0 or 1");
  }
  return st;
}

Mat interp_matrix(const CollocationMesh& mesh, int n, double s, int order) {
  InterpStencil st = interp_stencil(mesh, s, order);
  Mat E = Mat::Zero(n, n * mesh.num_nodes());
  for (int i = 0; i <= mesh.degree; ++i)
    for (int c = 0; c < n; ++c)
      E(c, (st.first_node + i) * n + c) = st.w(i);
  return E;
}

Vec MeshFunction::eval(double s, int order) const {
  InterpStencil st = interp_stencil(mesh, s, order);
  Vec out = Vec::Zero(n);
  for (int i = 0; i <= mesh.degree; ++i)
    out += st.w(i) * coeffs.segment((st.first_node + i) * n, n);
  return out;
}

MeshFunction sample(const CollocationMesh& mesh, int n,
                    const std::function<Vec(double)>& f) {
  MeshFunction x(mesh, n);
  for (int i = 0; i < mesh.num_nodes(); ++i)
    x.set_node(i, f(mesh.rep_nodes(i)));
  return x;
}

// Quadrature loop shared by the inner products; npts Gauss points per
// subinterval.
template <class F>
static double quad_over_mesh(const CollocationMesh& mesh, int npts, F&& fn) {
  Vec gn, gw;
  gauss_legendre(npts, gn, gw);
  double total = 0.0;
  for (int e = 0; e < mesh.NT; ++e) {
    double a = mesh.boundaries(e), h = mesh.boundaries(e + 1) - a;
    for (int q = 0; q < npts; ++q) total += h * gw(q) * fn(a + h * gn(q));
  }
  return total;
}

double phase_inner_product(const MeshFunction& x_ref, const MeshFunction& x) {
  if (!(x_ref.mesh == x.mesh) || x_ref.n != x.n)
    throw DimensionError("phase_inner_product: mesh mismatch");
  // integrand has degree 2k-1: k Gauss points are exact
  return quad_over_mesh(x.mesh, x.mesh.degree, [&](double s) {
    return x_ref.eval(s, 1).dot(x.eval(s));
  });
}

double mass_inner_product(const MeshFunction& x, const MeshFunction& y) {
  if (!(x.mesh == y.mesh) || x.n != y.n)
    throw DimensionError("mass_inner_product: mesh mismatch");
  // degree 2k: k+1 Gauss points are exact
  return quad_over_mesh(x.mesh, x.mesh.degree + 1,
                        [&](double s) { return x.eval(s).dot(y.eval(s)); });
}

double integral_component(const MeshFunction& x, int component) {
  return quad_over_mesh(x.mesh, x.mesh.degree + 1,
                        [&](double s) { return x.eval(s)(component); });
}

CollocationMesh adapt_mesh(const MeshFunction& x) {
  const CollocationMesh& mesh = x.mesh;
  const int k = mesh.degree, NT = mesh.NT, n = x.n;

  // kappa-th derivative is piecewise constant: kappa! times the leading
  // divided difference over each subinterval's nodes.
  Mat dk(NT, n);
  for (int e = 0; e < NT; ++e) {
    for (int c = 0; c < n; ++c) {
      Vec dd(k + 1), tt(k + 1);
      for (int i = 0; i <= k; ++i) {
        dd(i) = x.coeffs((e * k + i) * n + c);
        tt(i) = mesh.rep_nodes(std::min(e * k + i, mesh.num_nodes() - 1));
      }
      if (e == NT - 1) tt(k) = mesh.boundaries(NT);
      for (int lev = 1; lev <= k; ++lev)
        for (int i = 0; i <= k - lev; ++i)
          dd(i) = (dd(i + 1) - dd(i)) / (tt(i + lev) - tt(i));
      double fact = 1.0;
      for (int i = 2; i <= k; ++i) fact *= i;
      dk(e, c) = dd(0) * fact;
    }
  }

  // (kappa+1)-th derivative estimated from jumps of the kappa-th between
  // neighboring subintervals; error density rho = |.|^(1/(kappa+1)).
  Vec rho(NT);
  double scale = 0.0;
  for (int e = 0; e < NT; ++e) {
    double est = 0.0;
    double he = mesh.boundaries(e + 1) - mesh.boundaries(e);
    if (e > 0) {
      double hm = mesh.boundaries(e) - mesh.boundaries(e - 1);
      est = std::max(est, (dk.row(e) - dk.row(e - 1)).norm() / (0.5 * (he + hm)));
    }
    if (e < NT - 1) {
      double hp = mesh.boundaries(e + 2) - mesh.boundaries(e + 1);
      est = std::max(est, (dk.row(e + 1) - dk.row(e)).norm() / (0.5 * (he + hp)));
    }
    rho(e) = std::pow(est, 1.0 / (k + 1));
    scale = std::max(scale, rho(e));
  }
  if (scale <= 1e-12) return CollocationMesh::uniform(NT, k);

  // floor keeps cells from collapsing where the profile is locally polynomial
  for (int e = 0; e < NT; ++e) rho(e) = std::max(rho(e), 1e-3 * scale);

  // cumulative integral of rho, then invert at equal increments
  Vec cum(NT + 1);
  cum(0) = 0.0;
  for (int e = 0; e < NT; ++e)
    cum(e + 1) = cum(e) + rho(e) * (mesh.boundaries(e + 1) - mesh.boundaries(e));
  Vec nb(NT + 1);
  nb(0) = 0.0;
  nb(NT) = 1.0;
  int e = 0;
  for (int i = 1; i < NT; ++i) {
    double target = cum(NT) * i / NT;
    while (cum(e + 1) < target) ++e;
    double frac = (target - cum(e)) / (cum(e + 1) - cum(e));
    nb(i) = mesh.boundaries(e) + frac * (mesh.boundaries(e + 1) - mesh.boundaries(e));
  }
  return CollocationMesh::from_boundaries(nb, k);
}

MeshFunction transfer(const MeshFunction& x, const CollocationMesh& target) {
  MeshFunction out(target, x.n);
  for (int i = 0; i < target.num_nodes(); ++i)
    out.set_node(i, x.eval(std::clamp(target.rep_nodes(i), 0.0, 1.0)));
  return out;
}

}  // namespace ddec
