#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ddec/types.hpp"

namespace ddec {

// G: R^{N+1} -> R^N with one-dimensional solution curves.
struct DefiningSystem {
  int dim_y = 0;  // N+1
  std::function<Vec(const Vec&)> residual;
  std::function<Mat(const Vec&)> jacobian;  // optional; finite differences else
  std::vector<int> param_components;        // free-parameter entries of y
  std::vector<std::string> param_labels;

  Mat jac(const Vec& y) const;  // N x (N+1)
};

struct BranchPoint {
  Vec y;
  Vec tangent;  // unit in the scaled norm
  int newton_iters = 0;
  double residual_norm = 0.0;
  int unstable_count = -1;
  Vec extra;  // caller-filled stability summary (module-specific layout)
  std::vector<std::string> event_flags;
};

struct BranchEvent {
  std::string name;
  BranchPoint point;
  int after_index = 0;  // localized between points[after_index] and +1
  bool resolved = true;
};

struct Branch {
  std::vector<BranchPoint> points;
  std::vector<BranchEvent> events;
  bool closed = false;
  std::string termination;
};

using TestFunction = std::function<double(const BranchPoint&)>;

struct ContinuationOptions {
  double tol_res = 1e-9;
  double tol_step = 1e-8;
  int max_newton = 10;
  double initial_step = 0.01;
  double min_step = 1e-7;
  double max_step = 0.5;
  double grow_factor = 1.3;
  int max_points = 1000;
  // bounds on individual y components (usually the free parameters)
  std::map<int, std::pair<double, double>> bounds;
  // filled per accepted point (stability etc.); a NegativeDelayError thrown
  // here terminates the branch with a marker
  std::function<void(const DefiningSystem&, BranchPoint&)> postprocess;
  std::vector<std::pair<std::string, TestFunction>> tests;
  double event_tol = 1e-8;
  bool detect_closure = true;
  std::function<void(int, const BranchPoint&)> progress;  // optional logging
};

// Scaled norm: free-parameter components weight 1, state components 1/sqrt(N).
Vec continuation_weights(const DefiningSystem& sys);

double scaled_norm(const Vec& v, const Vec& w);
double scaled_dot(const Vec& a, const Vec& b, const Vec& w);

struct NewtonResult {
  Vec y;
  int iterations = 0;
  double residual_norm = 0.0;
};

// Solve [G(y); tangent^T (y - y_pred)] = 0 by Newton from y_pred.
NewtonResult newton_correct(const DefiningSystem& sys, const Vec& y_pred,
                            const Vec& tangent,
                            const ContinuationOptions& opts = {});

// Pseudo-arclength continuation from two nearby converged points.
Branch continue_branch(const DefiningSystem& sys, const Vec& y_first,
                       const Vec& y_second, const ContinuationOptions& opts);

// Scan test-function sign changes along a computed branch and localize each
// event point by secant iteration; appends to branch.events.
void detect_events(const DefiningSystem& sys, Branch& branch,
                   const std::vector<std::pair<std::string, TestFunction>>& tests,
                   const ContinuationOptions& opts);

// Convenience: finite-difference Jacobian of an arbitrary map.
Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& y,
                int out_dim);

}  // namespace ddec
