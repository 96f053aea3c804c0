#include "ddec/simulate.hpp"

#include <algorithm>
#include <cmath>

namespace ddec {

Vec HistoryTrajectory::eval(double t) const {
  if (t <= 0.0) return initial(t);
  int k = static_cast<int>(std::floor(t / h));
  k = std::clamp(k, 0, static_cast<int>(x.size()) - 2);
  double th = (t - k * h) / h;
  double th2 = th * th, th3 = th2 * th;
  return (2 * th3 - 3 * th2 + 1) * x[k] + (th3 - 2 * th2 + th) * h * f[k] +
         (-2 * th3 + 3 * th2) * x[k + 1] + (th3 - th2) * h * f[k + 1];
}

Vec HistoryTrajectory::eval_deriv(double t) const {
  if (t <= 0.0) {
    double d = 1e-6;
    return (initial(t + d) - initial(t - d)) / (2 * d);
  }
  int k = static_cast<int>(std::floor(t / h));
  k = std::clamp(k, 0, static_cast<int>(x.size()) - 2);
  double th = (t - k * h) / h;
  double th2 = th * th;
  return ((6 * th2 - 6 * th) * x[k] / h + (3 * th2 - 4 * th + 1) * f[k] +
          (-6 * th2 + 6 * th) * x[k + 1] / h + (3 * th2 - 2 * th) * f[k + 1]);
}

// Delayed states at time t with the current (stage) state x0; checks the
// explicit method-of-steps conditions.
static std::vector<Vec> delayed_states(const DdeSystem& sys, const Vec& p,
                                       const HistoryTrajectory& rec, double t,
                                       const Vec& x0, double h,
                                       Vec* taus_out = nullptr) {
  std::vector<Vec> xs(sys.d + 1);
  xs[0] = x0;
  Vec taus(sys.d);
  for (int j = 0; j < sys.d; ++j) {
    const DelaySpec& ds = sys.delays[j];
    double tau;
    if (ds.kind == DelaySpec::Kind::FromParameter) {
      tau = p(ds.param_index);
    } else {
      std::vector<Vec> prefix(xs.begin(), xs.begin() + j + 1);
      tau = ds.fn(prefix, p);
    }
    if (tau < 0.0) throw NegativeDelayError(j + 1, tau, t);
    if (tau < h) throw DelayBelowStepError(t, tau, h);
    taus(j) = tau;
    xs[j + 1] = rec.eval(t - tau);
  }
  if (taus_out) *taus_out = taus;
  return xs;
}

HistoryTrajectory integrate(const DdeSystem& sys,
                            const std::function<Vec(double)>& initial_history,
                            double t_end, double h, const Vec& p) {
  HistoryTrajectory rec;
  rec.n = sys.n;
  rec.h = h;
  rec.initial = initial_history;
  auto rhs_at = [&](double t, const Vec& xst) {
    std::vector<Vec> xs = delayed_states(sys, p, rec, t, xst, h);
    return sys.rhs(xs, p);
  };
  int steps = static_cast<int>(std::round(t_end / h));
  rec.x.reserve(steps + 1);
  rec.f.reserve(steps + 1);
  Vec x0 = initial_history(0.0);
  rec.x.push_back(x0);
  rec.f.push_back(rhs_at(0.0, x0));
  for (int k = 0; k < steps; ++k) {
    double t = k * h;
    const Vec& xk = rec.x.back();
    Vec k1 = rec.f.back();
    Vec k2 = rhs_at(t + h / 2, xk + (h / 2) * k1);
    Vec k3 = rhs_at(t + h / 2, xk + (h / 2) * k2);
    Vec k4 = rhs_at(t + h, xk + h * k3);
    Vec xn = xk + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
    rec.x.push_back(xn);
    rec.f.push_back(rhs_at(t + h, xn));
    rec.t_end = t + h;
  }
  return rec;
}

HistoryTrajectory integrate(const DdeSystem& sys,
                            const std::function<Vec(double)>& initial_history,
                            double t_end, double h) {
  return integrate(sys, initial_history, t_end, h, sys.p);
}

// Variational right-hand side along a stored base trajectory: chain terms per
// the state-dependent linearization, delta x^j = v(t-tau_j) - x'(t-tau_j) dtau.
static Vec tangent_rhs(const DdeSystem& sys, const Vec& p,
                       const HistoryTrajectory& base,
                       const HistoryTrajectory& vrec, double t, const Vec& v0,
                       double h) {
  Vec taus;
  std::vector<Vec> xs = delayed_states(sys, p, base, t, base.eval(t), h, &taus);
  DirectionalDerivatives dd = eval_derivatives(sys, xs, p);
  std::vector<Vec> dx(sys.d + 1);
  dx[0] = v0;
  Vec out = dd.A[0] * v0;
  for (int j = 0; j < sys.d; ++j) {
    double dtau = 0.0;
    for (int l = 0; l <= j; ++l) dtau += dd.dtau_dx[j][l].dot(dx[l]);
    dx[j + 1] = vrec.eval(t - taus(j)) - base.eval_deriv(t - taus(j)) * dtau;
    out += dd.A[j + 1] * dx[j + 1];
  }
  return out;
}

double lyapunov_max(const DdeSystem& sys, const Vec& p, double t_transient,
                    double t_avg, double h, int renorm_every,
                    const std::function<Vec(double)>& initial_history) {
  const int n = sys.n;
  std::function<Vec(double)> hist = initial_history;
  if (!hist) hist = [n](double) { return Vec::Constant(n, 0.1); };
  HistoryTrajectory base = integrate(sys, hist, t_transient + t_avg, h, p);

  HistoryTrajectory vrec;
  vrec.n = n;
  vrec.h = h;
  vrec.initial = [n](double) { return Vec::Constant(n, 1.0 / std::sqrt(n)); };
  vrec.x.push_back(vrec.initial(0.0));
  vrec.f.push_back(Vec::Zero(n));
  vrec.f[0] = tangent_rhs(sys, p, base, vrec, 0.0, vrec.x[0], h);

  double tau_max_seen = h;
  double log_sum = 0.0, t_accum = 0.0;
  int steps = static_cast<int>(std::round((t_transient + t_avg) / h));
  double last_renorm_t = 0.0;
  for (int k = 0; k < steps; ++k) {
    double t = k * h;
    const Vec& vk = vrec.x.back();
    Vec k1 = vrec.f.back();
    Vec k2 = tangent_rhs(sys, p, base, vrec, t + h / 2, vk + (h / 2) * k1, h);
    Vec k3 = tangent_rhs(sys, p, base, vrec, t + h / 2, vk + (h / 2) * k2, h);
    Vec k4 = tangent_rhs(sys, p, base, vrec, t + h, vk + h * k3, h);
    Vec vn = vk + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
    vrec.x.push_back(vn);
    vrec.f.push_back(tangent_rhs(sys, p, base, vrec, t + h, vn, h));
    vrec.t_end = t + h;

    Vec taus;
    delayed_states(sys, p, base, t + h, base.eval(t + h), h, &taus);
    if (taus.size() > 0) tau_max_seen = std::max(tau_max_seen, taus.maxCoeff());

    if ((k + 1) % renorm_every == 0 || k == steps - 1) {
      // sup norm over the trailing history window
      int lo = std::max(0, static_cast<int>((t + h - tau_max_seen) / h));
      double norm = 0.0;
      for (size_t i = lo; i < vrec.x.size(); ++i)
        norm = std::max(norm, vrec.x[i].lpNorm<Eigen::Infinity>());
      if (norm <= 0.0) return -1e300;
      for (Vec& v : vrec.x) v /= norm;
      for (Vec& v : vrec.f) v /= norm;
      if (t + h > t_transient) {
        log_sum += std::log(norm);
        t_accum += (t + h) - std::max(last_renorm_t, t_transient);
      }
      last_renorm_t = t + h;
    }
  }
  return log_sum / std::max(t_accum, 1e-12);
}

PoincareTrace poincare_trace(const DdeSystem& sys,
                             const HistoryTrajectory& traj,
                             const Section& section, const Vec& p) {
  PoincareTrace out;
  out.section = section;
  auto g = [&](double t) {
    return traj.eval(t)(section.component) - section.level;
  };
  const int steps = static_cast<int>(traj.x.size()) - 1;
  for (int k = 1; k <= steps; ++k) {
    double t0 = (k - 1) * traj.h, t1 = k * traj.h;
    double g0 = g(t0), g1 = g(t1);
    bool down = g0 > 0.0 && g1 <= 0.0;
    bool up = g0 < 0.0 && g1 >= 0.0;
    if (!((section.direction <= 0 && down) ||
          (section.direction >= 0 && up)))
      continue;
    // bisection to the dense-output tolerance
    double a = t0, b = t1, ga = g0;
    for (int it = 0; it < 80 && (b - a) > 1e-15; ++it) {
      double m = 0.5 * (a + b), gm = g(m);
      if (std::abs(gm) <= 1e-12) {
        a = b = m;
        break;
      }
      if ((ga > 0) == (gm > 0)) {
        a = m;
        ga = gm;
      } else {
        b = m;
      }
    }
    double tc = 0.5 * (a + b);
    Crossing cr;
    cr.t = tc;
    cr.state = traj.eval(tc);
    Vec taus;
    try {
      delayed_states(sys, p, traj, tc, cr.state, 0.0, &taus);
    } catch (const NegativeDelayError&) {
      continue;
    }
    for (int j = 0; j < sys.d; ++j)
      cr.delayed.push_back(traj.eval(tc - taus(j)));
    out.crossings.push_back(cr);
  }
  return out;
}

ManifoldResult unstable_manifold_po(const DdeSystem& sys,
                                    const PeriodicOrbitVar& orbit,
                                    const FloquetSpectrum& floquet, double eps,
                                    double t_grow, const Section& section) {
  int n_unst = 0;
  const FloquetMode* unstable = nullptr;
  for (const FloquetMode& m : floquet.multipliers) {
    if (std::abs(m.mu) > 1.0 + 1e-3) {
      ++n_unst;
      unstable = &m;
    }
  }
  if (n_unst != 1 || std::abs(unstable->mu.imag()) > 1e-6)
    throw DimensionError(
        "unstable manifold requires exactly one real multiplier outside the "
        "unit circle");

  double T = orbit.T;
  double left = floquet.ext_boundaries(0);
  auto history = [&](double sign) {
    return [&, sign](double theta) -> Vec {
      double s = std::max(theta / T, left);
      return orbit.profile.eval_wrapped(s) +
             sign * eps * floquet.eval(*unstable, s).real();
    };
  };
  // step below the smallest delay along the orbit
  double tau_min = 1e300;
  const CollocationMesh& mesh = orbit.profile.mesh;
  for (int c = 0; c < mesh.degree * mesh.NT; ++c) {
    Vec taus, args;
    po_delays_at(sys, orbit.profile, T, orbit.p, mesh.colloc_nodes(c), taus,
                 args);
    if (taus.size() > 0) tau_min = std::min(tau_min, taus.minCoeff());
  }
  double h = std::min(0.01, tau_min / 4.0);

  ManifoldResult out;
  out.plus_traj = integrate(sys, history(+1.0), t_grow, h, orbit.p);
  out.minus_traj = integrate(sys, history(-1.0), t_grow, h, orbit.p);
  out.plus_trace = poincare_trace(sys, out.plus_traj, section, orbit.p);
  out.minus_trace = poincare_trace(sys, out.minus_traj, section, orbit.p);
  return out;
}

Mat sweep_map(const DdeSystem& sys, int pa, const Vec& pa_values, int pb,
              const Vec& pb_values, SweepMode mode, SweepDirection direction,
              const SweepOptions& opts) {
  const int n = sys.n;
  Mat out(pb_values.size(), pa_values.size());
  out.setConstant(std::numeric_limits<double>::quiet_NaN());
  for (int r = 0; r < pb_values.size(); ++r) {
    std::function<Vec(double)> hist = [n](double) {
      return Vec::Constant(n, 0.1);
    };
    for (int ci = 0; ci < pa_values.size(); ++ci) {
      int c = (direction == SweepDirection::Up)
                  ? ci
                  : static_cast<int>(pa_values.size()) - 1 - ci;
      Vec p = sys.p;
      p(pa) = pa_values(c);
      p(pb) = pb_values(r);
      if (opts.progress) opts.progress(r, c);
      try {
        if (mode == SweepMode::Max) {
          HistoryTrajectory traj = integrate(
              sys, hist, opts.t_transient + opts.t_window, opts.h, p);
          double mx = -1e300;
          int lo = static_cast<int>(opts.t_transient / opts.h);
          for (size_t k = lo; k < traj.x.size(); ++k)
            mx = std::max(mx, traj.x[k](0));
          out(r, c) = mx;
          // inherit the trailing history segment
          double te = traj.t_end;
          auto traj_ptr = std::make_shared<HistoryTrajectory>(std::move(traj));
          hist = [traj_ptr, te](double theta) {
            return traj_ptr->eval(te + theta);
          };
        } else {
          out(r, c) = lyapunov_max(sys, p, opts.t_transient, opts.t_window,
                                   opts.h, opts.renorm_every, hist);
        }
      } catch (const std::runtime_error&) {
        hist = [n](double) { return Vec::Constant(n, 0.1); };
      }
    }
  }
  return out;
}

}  // namespace ddec
