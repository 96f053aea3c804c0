#pragma once

#include "ddec/floquet.hpp"
#include "ddec/periodic.hpp"

namespace ddec {

// A two-parameter defining system for a periodic-orbit bifurcation, plus the
// bookkeeping needed to seed it and read results back. Shared anchors
// (x_ref, eigenfunction references, base parameters) may be updated by the
// continuation driver between runs.
struct PoBifSystem {
  DefiningSystem ds;
  int nc = 0;                       // base profile coefficient count
  int n = 0;
  int iT = -1, ipi = -1, ipj = -1;  // y-component indices
  int iv = -1;                      // start of the variational block
  int iomega = -1;                  // torus rotation component, -1 if absent
  int pi = -1, pj = -1;             // model parameter indices
  std::shared_ptr<MeshFunction> x_ref;
  std::shared_ptr<MeshFunction> xv_ref_re, xv_ref_im;
  std::shared_ptr<Vec> p_base;

  PeriodicOrbitVar base_orbit(const Vec& y) const;
};

// Fold of periodic orbits: base system with two free parameters plus its
// variational problem in (x_v, T_v) and the normalization
// integral(x_v^T x_v) + T_v^2 = 1. y = (coeffs, T, p_i, p_j, v_coeffs, T_v).
PoBifSystem fold_po_system(const DdeSystem& sys, int pi, int pj,
                           const CollocationMesh& mesh);
Vec seed_fold_po(const PoBifSystem& bs, const PoBranchPoint& fold_point);

enum class TorusMode { Torus, PeriodDoubling };

// Torus / period-doubling system. Torus: complex 1-periodic eigenfunction
// x_v with rotation omega_v, y = (coeffs, T, p_i, p_j, vRe, vIm, omega_v).
// Period doubling: real antiperiodic eigenfunction u with sign-flipping
// wrapped evaluation, y = (coeffs, T, p_i, p_j, u).
PoBifSystem torus_pd_system(const DdeSystem& sys, int pi, int pj,
                            const CollocationMesh& mesh, TorusMode mode);
Vec seed_torus_pd(const PoBifSystem& bs, const DdeSystem& sys,
                  const PoBranchPoint& point, TorusMode mode);

// Symmetry-constrained pitchfork of periodic orbits: the fold system with
// the constraint integral((x_po)_1) = 0 and one balancing dummy unknown in
// the collocation rows.
PoBifSystem pitchfork_po_system(const DdeSystem& sys, int pi, int pj,
                                const CollocationMesh& mesh);
Vec seed_pitchfork_po(const PoBifSystem& bs, const PoBranchPoint& point);

struct ResonancePoint {
  int p = 0, q = 0;
  BranchPoint location;
  bool resolved = true;
};

// p:q resonances crossed by omega_v along a torus branch (rotation number
// omega_v/2), localized on the defining system for q <= q_max.
std::vector<ResonancePoint> resonance_points(const PoBifSystem& bs,
                                             Branch& branch, int q_max,
                                             const ContinuationOptions& opts);

}  // namespace ddec
