#pragma once

#include <map>
#include <memory>
#include <optional>

#include "ddec/continuation.hpp"
#include "ddec/eqbif.hpp"
#include "ddec/meshfun.hpp"
#include "ddec/model.hpp"

namespace ddec {

// A periodic orbit rescaled to [0,1]: profile x(s), period T, parameters p.
struct PeriodicOrbitVar {
  MeshFunction profile;
  double T = 0.0;
  Vec p;
};

// Collocation residual of the periodic BVP: one n-row per collocation node
// M x'(s_c) - T f(x(s_c), x(wrap(s_c - tau_1/T)), ..., p), then n periodicity
// rows x(0) - x(1), then the integral phase row against x_ref. State-dependent
// delays are resolved by direct recursion through the wrapped profile.
// Length n(kappa NT + 1) + 1.
Vec po_residual(const DdeSystem& sys, const MeshFunction& profile, double T,
                const Vec& p, const MeshFunction& x_ref);

struct PoJacobian {
  Mat Jc;  // rows x n(kappa NT+1), derivative in the profile coefficients
  Vec JT;  // derivative in the period
  Mat Jp;  // rows x n_p
};
PoJacobian po_jacobian(const DdeSystem& sys, const MeshFunction& profile,
                       double T, const Vec& p, const MeshFunction& x_ref);

// Quadrature row w with w^T coeffs = integral of x_ref'(s)^T x(s) ds.
Vec phase_row(const MeshFunction& x_ref);

// One-parameter defining system, y = (coeffs, T, p_free); with T_fix set the
// period is frozen and y = (coeffs, p_free...) over free_params (then two
// parameters are expected). x_ref and the base parameter vector are shared so
// the continuation driver can update them between steps.
DefiningSystem po_defining_system(const DdeSystem& sys,
                                  std::shared_ptr<MeshFunction> x_ref,
                                  std::shared_ptr<Vec> p_base,
                                  const std::vector<int>& free_params,
                                  std::optional<double> T_fix = {});

Vec pack_po(const MeshFunction& profile, std::optional<double> T,
            const std::vector<double>& pvals);

// Harmonic predictor x_H + eps Re(v_H e^{2 pi i s}) with T = 2 pi / omega,
// corrected at eps and 1.05 eps with the bifurcation parameter freed.
std::pair<PeriodicOrbitVar, PeriodicOrbitVar> branch_off_hopf(
    const DdeSystem& sys, int free_param, const HopfPoint& hopf,
    const Vec& p_at_hopf, double eps, const CollocationMesh& mesh);

struct PoBranchPoint {
  PeriodicOrbitVar orbit;
  double pval = 0.0;       // free-parameter value (first free parameter)
  Vec tangent;             // in the y-layout of the point's mesh
  int newton_iters = 0;
  std::vector<Complex> multipliers;
  int unstable_count = 0;
  std::vector<std::string> event_flags;
};

struct PoEvent {
  std::string name;
  PoBranchPoint point;
  int after_index = 0;
  bool resolved = true;
};

struct PoBranch {
  std::vector<PoBranchPoint> points;
  std::vector<PoEvent> events;
  std::string termination;
};

struct PoOptions {
  ContinuationOptions cont;
  int adapt_every = 5;        // mesh re-adaptation cadence, 0 disables
  bool floquet = true;
  int floquet_count = 8;
  double T_min = 1e-3;
  std::pair<double, double> param_bounds{-1e300, 1e300};
  bool detect_po_events = true;
};

// Pseudo-arclength continuation of periodic orbits in one parameter with
// Floquet summaries and fold / period-doubling / torus event detection.
PoBranch continue_po(const DdeSystem& sys, int free_param,
                     const PeriodicOrbitVar& seed1,
                     const PeriodicOrbitVar& seed2, const PoOptions& opts);

// Two-parameter continuation with the period frozen at T_fix; approximates a
// connecting-orbit locus when T_fix is large.
PoBranch high_period_locus(const DdeSystem& sys, const PeriodicOrbitVar& seed,
                           double T_fix, int pi, int pj, const PoOptions& opts);

// Delays and wrapped base arguments of the orbit at mesh position s,
// resolved recursively: taus(j-1) = tau_j, args(j-1) = s - tau_j/T unwrapped.
void po_delays_at(const DdeSystem& sys, const MeshFunction& profile, double T,
                  const Vec& p, double s, Vec& taus, Vec& args,
                  std::vector<Vec>* xs_out = nullptr);

}  // namespace ddec
