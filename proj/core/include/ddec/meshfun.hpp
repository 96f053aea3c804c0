#pragma once

#include <cmath>
#include <functional>

#include "ddec/types.hpp"

namespace ddec {

// s - floor(s), in [0,1).
inline double wrap(double s) { return s - std::floor(s); }

// Gauss-Legendre nodes/weights on [0,1].
void gauss_legendre(int npts, Vec& nodes, Vec& weights);

// Piecewise-polynomial mesh on [0,1]: NT subintervals, degree kappa pieces.
// Representation points are the subinterval endpoints plus kappa-1 interior
// equidistant points; collocation nodes are kappa Gauss-Legendre points per
// subinterval.
struct CollocationMesh {
  int NT = 0;
  int degree = 0;       // kappa
  Vec boundaries;       // NT+1, strictly increasing, 0 and 1 at the ends
  Vec rep_nodes;        // kappa*NT+1
  Vec colloc_nodes;     // kappa*NT

  static CollocationMesh uniform(int NT, int degree);
  static CollocationMesh from_boundaries(const Vec& b, int degree);

  int num_nodes() const { return degree * NT + 1; }
  // Subinterval owning s; the left piece at interior boundaries, except s=0.
  int find_interval(double s) const;

  bool operator==(const CollocationMesh& o) const {
    return NT == o.NT && degree == o.degree && boundaries == o.boundaries;
  }
};

// Local interpolation stencil: kappa+1 weights against the nodes of one
// subinterval, starting at global node index `first_node`.
struct InterpStencil {
  int first_node;
  Vec w;  // length degree+1
};

InterpStencil interp_stencil(const CollocationMesh& mesh, double s, int order);

// Full n x (n*(kappa*NT+1)) matrix E^(order)(s); order 0 interpolates,
// order 1 differentiates. Coefficient layout: node-major, component-minor.
Mat interp_matrix(const CollocationMesh& mesh, int n, double s, int order);

struct MeshFunction {
  CollocationMesh mesh;
  int n = 0;
  Vec coeffs;  // length n*(kappa*NT+1), node-major

  MeshFunction() = default;
  MeshFunction(CollocationMesh m, int dim)
      : mesh(std::move(m)), n(dim), coeffs(Vec::Zero(n * mesh.num_nodes())) {}

  Vec value_at_node(int node) const { return coeffs.segment(node * n, n); }
  void set_node(int node, const Vec& v) { coeffs.segment(node * n, n) = v; }

  Vec eval(double s, int order = 0) const;
  Vec eval_wrapped(double s, int order = 0) const { return eval(wrap(s), order); }
};

// Sample a callable at the representation nodes.
MeshFunction sample(const CollocationMesh& mesh, int n,
                    const std::function<Vec(double)>& f);

// Exact integral of x_ref'(s)^T x(s) over [0,1] for both on the same mesh.
double phase_inner_product(const MeshFunction& x_ref, const MeshFunction& x);

// Exact integral of x(s)^T y(s) over [0,1].
double mass_inner_product(const MeshFunction& x, const MeshFunction& y);

// Integral of one component of x over [0,1].
double integral_component(const MeshFunction& x, int component);

// AUTO-style error equidistribution: new boundaries equidistribute the local
// estimate of |x^(kappa+1)|^(1/(kappa+1)); NT and degree unchanged.
CollocationMesh adapt_mesh(const MeshFunction& x);

// Interpolate a mesh function onto a different mesh of the same degree family.
MeshFunction transfer(const MeshFunction& x, const CollocationMesh& target);

}  // namespace ddec
