#pragma once

#include "ddec/periodic.hpp"

namespace ddec {

// Linearization data at mesh position s of a periodic orbit.  A perturbation
// v of the orbit enters the j-th delayed argument through the recursion
//   delta^0 = v(s),
//   delta^{j+1} = v(arg_j) - (x'(arg_j)/T) sum_{l<=j} dtau_j/dx^l delta^l,
// so a state-dependent argument shift couples back to v at the earlier
// arguments, not at arg_j itself.
struct OrbitLinearization {
  std::vector<Mat> A;   // T df/dx^j, j = 0..d
  Vec taus;             // tau_1..tau_d at s
  Vec args;             // s - tau_j/T, unwrapped
  std::vector<std::vector<Eigen::RowVectorXd>> dtau_dx;  // [j][l], l <= j
  std::vector<Vec> xp;  // x'(arg_j), j = 0..d-1
};

OrbitLinearization linearize_along_orbit(const DdeSystem& sys,
                                         const PeriodicOrbitVar& orbit,
                                         double s);

struct FloquetMode {
  Complex mu;
  CVec coeffs;  // nodal values on the extended mesh, unit max norm
};

// Multipliers and eigenfunctions on the extended mesh [-tau_max/T, 1], the
// orbit mesh tiled 1-periodically leftward over N_tau extra subintervals.
struct FloquetSpectrum {
  std::vector<FloquetMode> multipliers;  // sorted by descending |mu|
  Vec ext_boundaries;
  Vec ext_nodes;
  int degree = 0;
  int n = 0;
  int n_tau = 0;
  bool used_generalized = false;

  int unstable_count(double tol = 1e-3) const;
  CVec eval(const FloquetMode& mode, double s, int order = 0) const;
};

struct FloquetOptions {
  int count = 8;
  int n_tau_override = -1;    // default ceil((tau_max/T) NT)
  bool force_generalized = false;
};

FloquetSpectrum floquet_multipliers(const DdeSystem& sys,
                                    const PeriodicOrbitVar& orbit,
                                    int count = 8,
                                    const FloquetOptions& opts = {});

}  // namespace ddec
