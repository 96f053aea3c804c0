#pragma once

#include "ddec/continuation.hpp"
#include "ddec/model.hpp"

namespace ddec {

// Characteristic matrix Delta(lambda) = lambda*M - sum_i A_i exp(-lambda tau_i)
// at a fixed base point. tau_0 = 0 is included with matrix A[0].
struct CharMatrix {
  Vec x_eq;
  Vec p;
  Vec taus;            // tau_1..tau_d evaluated at the equilibrium
  std::vector<Mat> A;  // A_0..A_d
  Mat mass;

  CMat eval(Complex lambda) const;
  CMat eval_deriv(Complex lambda) const;  // d/dlambda
};

struct Eigenpair {
  Complex lambda;
  CVec v;       // |v| = 1, |Delta(lambda) v| <= tol
  bool refined = true;
};

struct EquilibriumPoint {
  Vec x_eq;
  Vec p;
  std::vector<Eigenpair> spectrum;
  int unstable_count = 0;
};

CharMatrix char_matrix(const DdeSystem& sys, const Vec& x_eq, const Vec& p);

struct EigOptions {
  int count = 12;
  double tol = 1e-8;
  int m_init = 16;
  int m_cap = 256;
};

// k rightmost eigenvalues via Chebyshev pseudospectral discretization of the
// generator, each Newton-refined on the bordered system; the discretization
// order doubles until the rightmost values are stable to tol.
std::vector<Eigenpair> rightmost_eigenvalues(const CharMatrix& cm,
                                             const EigOptions& opts = {});

int count_unstable(const std::vector<Eigenpair>& spec, double margin = 0.0);

// Refine a single (lambda, v) guess on [Delta(lambda)v; v_ref^T v - 1] = 0.
bool refine_eigenpair(const CharMatrix& cm, Complex& lambda, CVec& v,
                      double tol, int max_iter = 30);

// y = (x_eq, p_i); residual f(x,...,x,p) with analytic Jacobian.
DefiningSystem eq_defining_system(const DdeSystem& sys, int free_param_index);

inline Vec pack_eq(const Vec& x, double pi) {
  Vec y(x.size() + 1);
  y << x, pi;
  return y;
}

EquilibriumPoint analyze_equilibrium(const DdeSystem& sys, const Vec& x_eq,
                                     const Vec& p, const EigOptions& opts = {});

// Seed a secondary equilibrium branch from a localized zero-eigenvalue event.
// Returns two corrected nearby points of the eq defining system.
std::pair<Vec, Vec> branch_off_at_zero_eigenvalue(const DdeSystem& sys,
                                                  int free_param_index,
                                                  const Vec& y_event,
                                                  double eps = 1e-3);

}  // namespace ddec
