#include "ddec/continuation.hpp"

#include <algorithm>
#include <cmath>

namespace ddec {

Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& y,
                int out_dim) {
  Mat J(out_dim, y.size());
  Vec w = y;
  for (int i = 0; i < y.size(); ++i) {
    double h = 1e-7 * std::max(1.0, std::abs(y(i)));
    w(i) = y(i) + h;
    Vec fp = f(w);
    w(i) = y(i) - h;
    Vec fm = f(w);
    w(i) = y(i);
    J.col(i) = (fp - fm) / (2 * h);
  }
  return J;
}

Mat DefiningSystem::jac(const Vec& y) const {
  if (jacobian) return jacobian(y);
  return fd_jacobian(residual, y, dim_y - 1);
}

Vec continuation_weights(const DefiningSystem& sys) {
  const int N = sys.dim_y - 1;
  Vec w = Vec::Constant(sys.dim_y, 1.0 / std::sqrt(std::max(1, N)));
  for (int c : sys.param_components) w(c) = 1.0;
  return w;
}

double scaled_norm(const Vec& v, const Vec& w) {
  return (v.array() * w.array()).matrix().norm();
}

double scaled_dot(const Vec& a, const Vec& b, const Vec& w) {
  return (a.array() * w.array() * b.array() * w.array()).sum();
}

NewtonResult newton_correct(const DefiningSystem& sys, const Vec& y_pred,
                            const Vec& tangent,
                            const ContinuationOptions& opts) {
  const int N = sys.dim_y - 1;
  Vec y = y_pred;
  NewtonResult res;
  for (int it = 1; it <= opts.max_newton; ++it) {
    Vec r = sys.residual(y);
    Mat J = sys.jac(y);
    Mat B(N + 1, N + 1);
    B.topRows(N) = J;
    B.row(N) = tangent.transpose();
    Vec rhs(N + 1);
    rhs.head(N) = -r;
    rhs(N) = -tangent.dot(y - y_pred);
    Eigen::PartialPivLU<Mat> lu(B);
    Vec dy = lu.solve(rhs);
    if (!dy.allFinite())
      throw SingularJacobianError("singular bordered Jacobian");
    // crude singularity guard: solution residual check
    if ((B * dy - rhs).norm() > 1e-4 * (1.0 + rhs.norm()) + 1e-8)
      throw SingularJacobianError("ill-conditioned bordered Jacobian");
    y += dy;
    res.iterations = it;
    double rn = sys.residual(y).norm();
    res.residual_norm = rn;
    if (rn <= 1e-2 * opts.tol_res ||
        (rn <= opts.tol_res && dy.norm() <= opts.tol_step)) {
      res.y = y;
      return res;
    }
  }
  throw NoConvergenceError("Newton corrector did not converge",
                           res.residual_norm);
}

static BranchPoint make_point(const DefiningSystem& sys, const Vec& y,
                              const Vec& tangent, const NewtonResult& nr,
                              const ContinuationOptions& opts) {
  BranchPoint pt;
  pt.y = y;
  pt.tangent = tangent;
  pt.newton_iters = nr.iterations;
  pt.residual_norm = nr.residual_norm;
  if (opts.postprocess) opts.postprocess(sys, pt);
  return pt;
}

Branch continue_branch(const DefiningSystem& sys, const Vec& y_first,
                       const Vec& y_second, const ContinuationOptions& opts) {
  Branch br;
  const Vec w = continuation_weights(sys);

  Vec t0 = y_second - y_first;
  double t0n = scaled_norm(t0, w);
  if (t0n <= 0) throw DimensionError("continue_branch: identical seed points");
  t0 /= t0n;

  NewtonResult nr0;
  nr0.y = y_first;
  nr0.residual_norm = sys.residual(y_first).norm();
  if (nr0.residual_norm > opts.tol_res)
    nr0 = newton_correct(sys, y_first, t0, opts);
  br.points.push_back(make_point(sys, nr0.y, t0, nr0, opts));

  NewtonResult nr1;
  nr1.y = y_second;
  nr1.residual_norm = sys.residual(y_second).norm();
  if (nr1.residual_norm > opts.tol_res)
    nr1 = newton_correct(sys, y_second, t0, opts);
  Vec t1 = nr1.y - nr0.y;
  t1 /= scaled_norm(t1, w);
  br.points.push_back(make_point(sys, nr1.y, t1, nr1, opts));

  double h = opts.initial_step;
  while (static_cast<int>(br.points.size()) < opts.max_points) {
    const BranchPoint& last = br.points.back();
    Vec tangent = last.tangent;

    bool accepted = false;
    NewtonResult nr;
    while (!accepted) {
      Vec y_pred = last.y;
      // predictor step of length h in the scaled norm
      for (int i = 0; i < y_pred.size(); ++i)
        y_pred(i) += h * tangent(i);
      try {
        nr = newton_correct(sys, y_pred, tangent, opts);
        accepted = true;
      } catch (const NoConvergenceError&) {
        h *= 0.5;
        if (h < opts.min_step) {
          br.termination = "min_step";
          return br;
        }
      } catch (const SingularJacobianError&) {
        h *= 0.5;
        if (h < opts.min_step) {
          br.termination = "singular";
          return br;
        }
      } catch (const NegativeDelayError&) {
        h *= 0.5;
        if (h < opts.min_step) {
          br.termination = "negative_delay";
          return br;
        }
      }
    }

    Vec tnew = nr.y - last.y;
    double tn = scaled_norm(tnew, w);
    if (tn <= 0) {
      br.termination = "stalled";
      return br;
    }
    tnew /= tn;
    if (scaled_dot(tnew, tangent, w) < 0) tnew = -tnew;

    BranchPoint pt;
    try {
      pt = make_point(sys, nr.y, tnew, nr, opts);
    } catch (const NegativeDelayError&) {
      br.termination = "negative_delay";
      return br;
    }

    // parameter bounds
    bool out_of_bounds = false;
    for (const auto& [comp, bb] : opts.bounds)
      if (pt.y(comp) < bb.first || pt.y(comp) > bb.second) out_of_bounds = true;
    br.points.push_back(pt);
    if (opts.progress)
      opts.progress(static_cast<int>(br.points.size()) - 1, pt);
    if (out_of_bounds) {
      br.points.back().event_flags.push_back("boundary");
      br.termination = "bounds";
      break;
    }

    // closure: back within one step of the start after leaving it
    if (opts.detect_closure && br.points.size() > 5) {
      Vec gap = pt.y - br.points.front().y;
      if (scaled_norm(gap, w) < h &&
          scaled_dot(pt.tangent, br.points.front().tangent, w) > 0) {
        br.closed = true;
        br.termination = "closed";
        break;
      }
    }

    if (nr.iterations <= 3) h = std::min(h * opts.grow_factor, opts.max_step);
  }
  if (br.termination.empty()) br.termination = "max_points";

  if (!opts.tests.empty()) detect_events(sys, br, opts.tests, opts);
  return br;
}

void detect_events(const DefiningSystem& sys, Branch& branch,
                   const std::vector<std::pair<std::string, TestFunction>>& tests,
                   const ContinuationOptions& opts) {
  if (branch.points.size() < 2) return;
  for (const auto& [name, test] : tests) {
    std::vector<double> vals(branch.points.size());
    for (size_t i = 0; i < branch.points.size(); ++i)
      vals[i] = test(branch.points[i]);
    for (size_t i = 0; i + 1 < branch.points.size(); ++i) {
      if (!std::isfinite(vals[i]) || !std::isfinite(vals[i + 1])) continue;
      if (vals[i] == 0.0 || vals[i] * vals[i + 1] > 0.0) continue;

      // secant iteration on the interpolation parameter theta in [0,1]
      const BranchPoint& a = branch.points[i];
      const BranchPoint& b = branch.points[i + 1];
      double th0 = 0.0, th1 = 1.0, f0 = vals[i], f1 = vals[i + 1];
      BranchEvent ev;
      ev.name = name;
      ev.after_index = static_cast<int>(i);
      ev.resolved = false;

      auto eval_at = [&](double th) -> std::pair<BranchPoint, double> {
        Vec y_pred = (1.0 - th) * a.y + th * b.y;
        NewtonResult nr = newton_correct(sys, y_pred, b.tangent, opts);
        BranchPoint pt;
        pt.y = nr.y;
        pt.tangent = b.tangent;
        pt.newton_iters = nr.iterations;
        pt.residual_norm = nr.residual_norm;
        if (opts.postprocess) opts.postprocess(sys, pt);
        return {pt, test(pt)};
      };

      try {
        for (int it = 0; it < 40; ++it) {
          double th = th1 - f1 * (th1 - th0) / (f1 - f0);
          if (!std::isfinite(th)) break;
          th = std::clamp(th, -0.5, 1.5);
          auto [pt, fv] = eval_at(th);
          if (std::abs(fv) <= opts.event_tol) {
            ev.point = pt;
            ev.point.event_flags.push_back(name);
            ev.resolved = true;
            break;
          }
          if (f0 * fv <= 0.0) {
            th1 = th;
            f1 = fv;
          } else {
            th0 = th;
            f0 = fv;
          }
        }
      } catch (const std::runtime_error&) {
        ev.resolved = false;
      }
      branch.events.push_back(ev);
    }
  }
}

}  // namespace ddec
