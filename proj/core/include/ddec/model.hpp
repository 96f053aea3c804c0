#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ddec/types.hpp"

namespace ddec {

// Right-hand side f(x^0,...,x^d, p). xs holds d+1 vectors of length n.
using RhsFn = std::function<Vec(const std::vector<Vec>& xs, const Vec& p)>;

// Delay function tau_j(x^0,...,x^{j-1}, p); receives exactly j state vectors.
using DelayFn = std::function<double(const std::vector<Vec>& xs, const Vec& p)>;

// Analytic df/dx^j (n x n) and df/dp_i (n-vector), optional.
using RhsJacFn =
    std::function<Mat(const std::vector<Vec>& xs, const Vec& p, int j)>;
using RhsParamDerivFn =
    std::function<Vec(const std::vector<Vec>& xs, const Vec& p, int i)>;
// Analytic dtau_j/dx^l (row vector of length n) and dtau_j/dp_i, optional.
using DelayJacFn = std::function<Eigen::RowVectorXd(const std::vector<Vec>& xs,
                                                    const Vec& p, int l)>;
using DelayParamDerivFn =
    std::function<double(const std::vector<Vec>& xs, const Vec& p, int i)>;

struct DelaySpec {
  enum class Kind { FromParameter, StateDependent };
  Kind kind = Kind::FromParameter;
  int param_index = -1;   // FromParameter: index into p
  DelayFn fn;             // StateDependent: tau_j(x^0..x^{j-1}, p)
  DelayJacFn dx;          // optional analytic derivative
  DelayParamDerivFn dp;   // optional analytic derivative
};

// A DDE model: immutable after construction, safe to share across workers.
struct DdeSystem {
  std::string name;
  int n = 0;  // physical dimension
  int d = 0;  // number of nonzero delays (tau_0 = 0 implicit)
  Mat mass;   // n x n, identity by default
  Vec p;      // default parameter values
  std::vector<std::string> param_names;
  RhsFn rhs;
  std::vector<DelaySpec> delays;  // size d
  std::optional<Mat> symmetry;    // linear involution R on physical space
  RhsJacFn dfdx;                  // optional analytic Jacobians
  RhsParamDerivFn dfdp;

  int param_index(const std::string& pname) const;
};

struct DirectionalDerivatives {
  std::vector<Mat> A;                   // A_j = df/dx^j, j = 0..d
  Mat dfdp;                             // n x n_p
  std::vector<std::vector<Eigen::RowVectorXd>> dtau_dx;  // [j][l], l < j
  Mat dtau_dp;                          // d x n_p
};

Vec eval_rhs(const DdeSystem& sys, const std::vector<Vec>& xs, const Vec& p);

// Delays in nesting order; entry j of the result reads only xs_partial[0..j-1].
// Throws NegativeDelayError if any tau_j < 0.
Vec eval_delays(const DdeSystem& sys, const std::vector<Vec>& xs_partial,
                const Vec& p);

// Same but does not throw on negative values (callers that want to report the
// violation with context, e.g. the collocation node, check themselves).
Vec eval_delays_unchecked(const DdeSystem& sys,
                          const std::vector<Vec>& xs_partial, const Vec& p);

DirectionalDerivatives eval_derivatives(const DdeSystem& sys,
                                        const std::vector<Vec>& xs,
                                        const Vec& p);

// Central finite difference step for argument magnitude v.
inline double fd_step(double v) { return 1e-6 * std::max(1.0, std::abs(v)); }

}  // namespace ddec
