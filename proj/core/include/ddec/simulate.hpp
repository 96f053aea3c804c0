#pragma once

#include <functional>

#include "ddec/floquet.hpp"
#include "ddec/model.hpp"

namespace ddec {

// Dense fixed-step record: cubic Hermite between stored steps, the supplied
// history callable for t <= 0.
struct HistoryTrajectory {
  int n = 0;
  double h = 0.0;
  double t_end = 0.0;
  std::function<Vec(double)> initial;  // on [-tau_max_est, 0]
  std::vector<Vec> x, f;               // values and slopes at t_k = k h

  Vec eval(double t) const;
  Vec eval_deriv(double t) const;
};

// Classical fixed-step RK4 with delayed arguments from the dense record;
// requires every delay >= h (throws DelayBelowStepError otherwise) and
// aborts with NegativeDelayError when a delay evaluates negative.
HistoryTrajectory integrate(const DdeSystem& sys,
                            const std::function<Vec(double)>& initial_history,
                            double t_end, double h);
HistoryTrajectory integrate(const DdeSystem& sys,
                            const std::function<Vec(double)>& initial_history,
                            double t_end, double h, const Vec& p);

// Maximal Lyapunov exponent: a tangent segment evolved by the linearization
// along the trajectory (with state-dependent delay chain terms), renormalized
// in the segment max norm every renorm_every steps.
double lyapunov_max(const DdeSystem& sys, const Vec& p, double t_transient,
                    double t_avg, double h, int renorm_every = 50,
                    const std::function<Vec(double)>& initial_history = {});

struct Section {
  int component = 0;
  double level = 0.0;
  int direction = -1;  // -1 downward, +1 upward, 0 both
};

struct Crossing {
  double t;
  Vec state;
  std::vector<Vec> delayed;  // x(t - tau_j) at the crossing, j = 1..d
};

struct PoincareTrace {
  Section section;
  std::vector<Crossing> crossings;
};

PoincareTrace poincare_trace(const DdeSystem& sys,
                             const HistoryTrajectory& traj,
                             const Section& section, const Vec& p);

// Unstable manifold of a saddle orbit with one real multiplier outside the
// unit circle: histories x_po(theta) +- eps x_ev(theta), grown by integration.
struct ManifoldResult {
  HistoryTrajectory plus_traj, minus_traj;
  PoincareTrace plus_trace, minus_trace;
};

ManifoldResult unstable_manifold_po(const DdeSystem& sys,
                                    const PeriodicOrbitVar& orbit,
                                    const FloquetSpectrum& floquet, double eps,
                                    double t_grow, const Section& section);

enum class SweepMode { Max, Lyapunov };
enum class SweepDirection { Up, Down };

struct SweepOptions {
  double t_transient = 200.0;
  double t_window = 100.0;
  double h = 0.05;
  int renorm_every = 50;
  std::function<void(int, int)> progress;  // (row, col)
};

// Per cell: max of x_1 over the post-transient window, or lambda_max.
// Within a row (fixed p_b) the sweep inherits the previous cell's final
// history segment; invalid cells (negative delay) are NaN.
Mat sweep_map(const DdeSystem& sys, int pa, const Vec& pa_values, int pb,
              const Vec& pb_values, SweepMode mode, SweepDirection direction,
              const SweepOptions& opts);

}  // namespace ddec
