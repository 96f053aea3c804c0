#pragma once

#include <memory>

#include "ddec/equilibrium.hpp"

namespace ddec {

// Fold of equilibria, y = (x, v, p_i, p_j) in R^{2n+2}:
// residual (f; Delta(0)v; v^T v - 1) with Delta relinearized at (x, p).
DefiningSystem fold_defining_system(const DdeSystem& sys, int pi, int pj);
Vec pack_fold(const Vec& x, const Vec& v, double pi_val, double pj_val);

// Hopf, y = (x, Re v, Im v, omega, p_i, p_j) in R^{3n+3}:
// residual (f; Re and Im of Delta(i omega)v; v_ref^T v - 1 as two real rows).
// v_ref is shared so the caller can freeze it per continuation run.
DefiningSystem hopf_defining_system(const DdeSystem& sys, int pi, int pj,
                                    std::shared_ptr<CVec> v_ref);
Vec pack_hopf(const Vec& x, const CVec& v, double omega, double pi_val,
              double pj_val);
struct HopfPoint {
  Vec x;
  CVec v;
  double omega;
  double pi_val, pj_val;
};
HopfPoint unpack_hopf(const Vec& y, int n);

// Symmetry-constrained pitchfork: the fold system augmented with the
// constraint that x stays in the symmetric subspace of the involution R,
// balanced by dummy unknowns entering the f rows. y = (x, v, p_i, p_j, g).
DefiningSystem pitchfork_defining_system(const DdeSystem& sys, int pi, int pj);
Vec pack_pitchfork(const DdeSystem& sys, const Vec& x, const Vec& v,
                   double pi_val, double pj_val);

// Build a corrected Hopf seed from an equilibrium point and an imaginary-pair
// eigenvalue; freezes v_ref to the converged eigenvector.
Vec seed_hopf(const DdeSystem& sys, int pi, int pj, const Vec& x, const Vec& p,
              const Eigenpair& pair, std::shared_ptr<CVec> v_ref);

enum class EqCurveKind { Fold, Hopf };

// Scan a fold/Hopf curve for codimension-two events: a second imaginary pair
// crossing (hopf_hopf), a real eigenvalue crossing zero (zero_hopf), and
// omega reaching zero on a Hopf curve (double_zero). Events are localized on
// the defining system and appended to branch.events.
void detect_codim2(const DdeSystem& sys, const DefiningSystem& ds,
                   Branch& branch, EqCurveKind kind, int pi, int pj,
                   const ContinuationOptions& opts = {});

inline constexpr double kOmegaMin = 1e-4;

}  // namespace ddec
