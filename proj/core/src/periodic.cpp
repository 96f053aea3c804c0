#include "ddec/periodic.hpp"

#include <algorithm>
#include <cmath>

#include "ddec/floquet.hpp"

namespace ddec {

void po_delays_at(const DdeSystem& sys, const MeshFunction& profile, double T,
                  const Vec& p, double s, Vec& taus, Vec& args,
                  std::vector<Vec>* xs_out) {
  std::vector<Vec> xs(sys.d + 1);
  xs[0] = profile.eval_wrapped(s);
  taus.resize(sys.d);
  args.resize(sys.d);
  for (int j = 0; j < sys.d; ++j) {
    const DelaySpec& ds = sys.delays[j];
    double tau;
    if (ds.kind == DelaySpec::Kind::FromParameter) {
      tau = p(ds.param_index);
    } else {
      std::vector<Vec> prefix(xs.begin(), xs.begin() + j + 1);
      tau = ds.fn(prefix, p);
    }
    if (tau < 0.0) throw NegativeDelayError(j + 1, tau, s);
    taus(j) = tau;
    args(j) = s - tau / T;
    xs[j + 1] = profile.eval_wrapped(args(j));
  }
  if (xs_out) *xs_out = xs;
}

Vec phase_row(const MeshFunction& x_ref) {
  const CollocationMesh& mesh = x_ref.mesh;
  const int n = x_ref.n;
  Vec row = Vec::Zero(n * mesh.num_nodes());
  Vec gn, gw;
  gauss_legendre(mesh.degree, gn, gw);
  for (int e = 0; e < mesh.NT; ++e) {
    double a = mesh.boundaries(e), h = mesh.boundaries(e + 1) - a;
    for (int q = 0; q < mesh.degree; ++q) {
      double s = a + h * gn(q);
      Vec dref = x_ref.eval(s, 1);
      InterpStencil st = interp_stencil(mesh, s, 0);
      for (int i = 0; i <= mesh.degree; ++i)
        for (int c = 0; c < n; ++c)
          row((st.first_node + i) * n + c) += h * gw(q) * dref(c) * st.w(i);
    }
  }
  return row;
}

Vec po_residual(const DdeSystem& sys, const MeshFunction& profile, double T,
                const Vec& p, const MeshFunction& x_ref) {
  const CollocationMesh& mesh = profile.mesh;
  const int n = sys.n;
  const int nn = mesh.num_nodes();
  const int ncol = mesh.degree * mesh.NT;
  Vec r(n * (ncol + 1) + 1);
  Vec taus, args;
  std::vector<Vec> xs;
  for (int c = 0; c < ncol; ++c) {
    double s = mesh.colloc_nodes(c);
    po_delays_at(sys, profile, T, p, s, taus, args, &xs);
    r.segment(c * n, n) =
        sys.mass * profile.eval(s, 1) - T * sys.rhs(xs, p);
  }
  r.segment(ncol * n, n) =
      profile.value_at_node(0) - profile.value_at_node(nn - 1);
  r(n * (ncol + 1)) = phase_row(x_ref).dot(profile.coeffs);
  return r;
}

PoJacobian po_jacobian(const DdeSystem& sys, const MeshFunction& profile,
                       double T, const Vec& p, const MeshFunction& x_ref) {
  const CollocationMesh& mesh = profile.mesh;
  const int n = sys.n;
  const int nn = mesh.num_nodes();
  const int N = n * nn;
  const int ncol = mesh.degree * mesh.NT;
  const int rows = n * (ncol + 1) + 1;
  const int np = static_cast<int>(p.size());
  PoJacobian J;
  J.Jc = Mat::Zero(rows, N);
  J.JT = Vec::Zero(rows);
  J.Jp = Mat::Zero(rows, np);

  auto dense_interp = [&](double s, int order) {
    Mat E = Mat::Zero(n, N);
    InterpStencil st = interp_stencil(mesh, wrap(s), order);
    for (int i = 0; i <= mesh.degree; ++i)
      for (int c = 0; c < n; ++c)
        E(c, (st.first_node + i) * n + c) = st.w(i);
    return E;
  };

  Vec taus, args;
  std::vector<Vec> xs;
  for (int cidx = 0; cidx < ncol; ++cidx) {
    double s = mesh.colloc_nodes(cidx);
    po_delays_at(sys, profile, T, p, s, taus, args, &xs);
    DirectionalDerivatives dd = eval_derivatives(sys, xs, p);

    // dx^j/d(coeffs, T, p) with the recursive delay chain
    std::vector<Mat> dx_dc(sys.d + 1);
    std::vector<Vec> dx_dT(sys.d + 1);
    std::vector<Mat> dx_dp(sys.d + 1);
    dx_dc[0] = dense_interp(s, 0);
    dx_dT[0] = Vec::Zero(n);
    dx_dp[0] = Mat::Zero(n, np);
    for (int j = 0; j < sys.d; ++j) {
      Eigen::RowVectorXd dtau_dc = Eigen::RowVectorXd::Zero(N);
      double dtau_dT = 0.0;
      Eigen::RowVectorXd dtau_dp = dd.dtau_dp.row(j);
      for (int l = 0; l <= j; ++l) {
        dtau_dc += dd.dtau_dx[j][l] * dx_dc[l];
        dtau_dT += dd.dtau_dx[j][l] * dx_dT[l];
        dtau_dp += dd.dtau_dx[j][l] * dx_dp[l];
      }
      Vec xp = profile.eval_wrapped(args(j), 1);
      dx_dc[j + 1] = dense_interp(args(j), 0) - (xp / T) * dtau_dc;
      dx_dT[j + 1] = xp * (taus(j) / (T * T) - dtau_dT / T);
      dx_dp[j + 1] = -(xp / T) * dtau_dp;
    }

    Mat rowJc = sys.mass * dense_interp(s, 1);
    Vec rowJT = -sys.rhs(xs, p);
    Mat rowJp = -T * dd.dfdp;
    for (int j = 0; j <= sys.d; ++j) {
      rowJc -= T * dd.A[j] * dx_dc[j];
      rowJT -= T * dd.A[j] * dx_dT[j];
      rowJp -= T * dd.A[j] * dx_dp[j];
    }
    J.Jc.block(cidx * n, 0, n, N) = rowJc;
    J.JT.segment(cidx * n, n) = rowJT;
    J.Jp.block(cidx * n, 0, n, np) = rowJp;
  }

  for (int c = 0; c < n; ++c) {
    J.Jc(ncol * n + c, c) = 1.0;
    J.Jc(ncol * n + c, (nn - 1) * n + c) = -1.0;
  }
  J.Jc.row(rows - 1) = phase_row(x_ref).transpose();
  return J;
}

Vec pack_po(const MeshFunction& profile, std::optional<double> T,
            const std::vector<double>& pvals) {
  int extra = (T ? 1 : 0) + static_cast<int>(pvals.size());
  Vec y(profile.coeffs.size() + extra);
  y.head(profile.coeffs.size()) = profile.coeffs;
  int k = static_cast<int>(profile.coeffs.size());
  if (T) y(k++) = *T;
  for (double v : pvals) y(k++) = v;
  return y;
}

DefiningSystem po_defining_system(const DdeSystem& sys,
                                  std::shared_ptr<MeshFunction> x_ref,
                                  std::shared_ptr<Vec> p_base,
                                  const std::vector<int>& free_params,
                                  std::optional<double> T_fix) {
  DefiningSystem ds;
  const int n = sys.n;
  auto unpack = [x_ref, p_base, free_params, T_fix, n](const Vec& y,
                                                       MeshFunction& prof,
                                                       double& T, Vec& p) {
    const int nc = static_cast<int>(x_ref->coeffs.size());
    prof = MeshFunction(x_ref->mesh, n);
    prof.coeffs = y.head(nc);
    int k = nc;
    T = T_fix ? *T_fix : y(k++);
    p = *p_base;
    for (int fp : free_params) p(fp) = y(k++);
  };
  // dim: coeffs + (T) + free params; layout fixed once x_ref is set
  const int nc = static_cast<int>(x_ref->coeffs.size());
  ds.dim_y = nc + (T_fix ? 0 : 1) + static_cast<int>(free_params.size());
  for (int k = nc; k < ds.dim_y; ++k) ds.param_components.push_back(k);
  if (!T_fix) ds.param_labels.push_back("T");
  for (int fp : free_params) ds.param_labels.push_back(sys.param_names[fp]);
  ds.residual = [&sys, x_ref, unpack](const Vec& y) {
    MeshFunction prof;
    double T;
    Vec p;
    unpack(y, prof, T, p);
    return po_residual(sys, prof, T, p, *x_ref);
  };
  ds.jacobian = [&sys, x_ref, p_base, free_params, T_fix, unpack](const Vec& y) {
    MeshFunction prof;
    double T;
    Vec p;
    unpack(y, prof, T, p);
    PoJacobian pj = po_jacobian(sys, prof, T, p, *x_ref);
    const int rows = static_cast<int>(pj.Jc.rows());
    const int nc = static_cast<int>(pj.Jc.cols());
    Mat J(rows, nc + (T_fix ? 0 : 1) + free_params.size());
    J.leftCols(nc) = pj.Jc;
    int k = nc;
    if (!T_fix) J.col(k++) = pj.JT;
    for (int fp : free_params) J.col(k++) = pj.Jp.col(fp);
    return J;
  };
  return ds;
}

std::pair<PeriodicOrbitVar, PeriodicOrbitVar> branch_off_hopf(
    const DdeSystem& sys, int free_param, const HopfPoint& hopf,
    const Vec& p_at_hopf, double eps, const CollocationMesh& mesh) {
  const int n = sys.n;
  double T = 2.0 * M_PI / hopf.omega;
  auto harmonic = [&](double amp) {
    return sample(mesh, n, [&](double s) -> Vec {
      Complex ph = std::exp(Complex(0.0, 2.0 * M_PI * s));
      return hopf.x + amp * (hopf.v * ph).real();
    });
  };
  auto x_ref = std::make_shared<MeshFunction>(harmonic(eps));
  auto p_base = std::make_shared<Vec>(p_at_hopf);
  DefiningSystem ds = po_defining_system(sys, x_ref, p_base, {free_param});
  MeshFunction dir = sample(mesh, n, [&](double s) -> Vec {
    Complex ph = std::exp(Complex(0.0, 2.0 * M_PI * s));
    return (hopf.v * ph).real();
  });
  Vec tangent = Vec::Zero(ds.dim_y);
  tangent.head(dir.coeffs.size()) = dir.coeffs;
  tangent /= tangent.norm();

  ContinuationOptions copts;
  copts.max_newton = 20;
  auto correct = [&](double amp) {
    Vec y = pack_po(harmonic(amp), T, {p_at_hopf(free_param)});
    NewtonResult nr = newton_correct(ds, y, tangent, copts);
    PeriodicOrbitVar po;
    po.profile = MeshFunction(mesh, n);
    po.profile.coeffs = nr.y.head(dir.coeffs.size());
    po.T = nr.y(dir.coeffs.size());
    po.p = p_at_hopf;
    po.p(free_param) = nr.y(dir.coeffs.size() + 1);
    return po;
  };
  PeriodicOrbitVar a = correct(eps);
  *x_ref = a.profile;
  PeriodicOrbitVar b = correct(1.05 * eps);
  return {a, b};
}

// Floquet summary and PO event test values for one accepted point.
static void fill_stability(const DdeSystem& sys, PoBranchPoint& pt,
                           const PoOptions& opts) {
  if (!opts.floquet) return;
  FloquetSpectrum fs =
      floquet_multipliers(sys, pt.orbit, opts.floquet_count);
  pt.multipliers.clear();
  for (const auto& m : fs.multipliers) pt.multipliers.push_back(m.mu);
  pt.unstable_count = fs.unstable_count();
}

static double pd_test(const PoBranchPoint& pt) {
  double best = -1.0;
  for (const Complex& mu : pt.multipliers)
    if (std::abs(mu.imag()) < 1e-6 && mu.real() < 0.0)
      best = std::max(best, std::abs(mu) - 1.0);
  return best;
}

static double torus_test(const PoBranchPoint& pt) {
  double best = -1.0;
  for (const Complex& mu : pt.multipliers)
    if (std::abs(mu.imag()) > 1e-4) best = std::max(best, std::abs(mu) - 1.0);
  return best;
}

struct PoDriverState {
  std::shared_ptr<MeshFunction> x_ref;
  std::shared_ptr<Vec> p_base;
  DefiningSystem ds;
  Vec weights;
};

static PoBranchPoint make_po_point(const DdeSystem& sys, const Vec& y,
                                   const Vec& tangent, int iters,
                                   const PoDriverState& st,
                                   const std::vector<int>& free_params,
                                   std::optional<double> T_fix,
                                   const PoOptions& opts) {
  PoBranchPoint pt;
  const int nc = static_cast<int>(st.x_ref->coeffs.size());
  pt.orbit.profile = MeshFunction(st.x_ref->mesh, st.x_ref->n);
  pt.orbit.profile.coeffs = y.head(nc);
  int k = nc;
  pt.orbit.T = T_fix ? *T_fix : y(k++);
  pt.orbit.p = *st.p_base;
  for (int fp : free_params) pt.orbit.p(fp) = y(k++);
  pt.pval = pt.orbit.p(free_params[0]);
  pt.tangent = tangent;
  pt.newton_iters = iters;
  fill_stability(sys, pt, opts);
  return pt;
}

static PoBranch continue_po_driver(const DdeSystem& sys,
                                   const std::vector<int>& free_params,
                                   std::optional<double> T_fix,
                                   const PeriodicOrbitVar& seed1,
                                   const PeriodicOrbitVar& seed2,
                                   const PoOptions& opts) {
  PoBranch br;
  PoDriverState st;
  st.x_ref = std::make_shared<MeshFunction>(seed2.profile);
  st.p_base = std::make_shared<Vec>(seed2.p);
  st.ds = po_defining_system(sys, st.x_ref, st.p_base, free_params, T_fix);
  st.weights = continuation_weights(st.ds);
  const int nc = static_cast<int>(seed1.profile.coeffs.size());

  auto pack = [&](const PeriodicOrbitVar& po) {
    std::vector<double> pv;
    for (int fp : free_params) pv.push_back(po.p(fp));
    return pack_po(po.profile,
                   T_fix ? std::optional<double>{} : std::optional<double>{po.T},
                   pv);
  };

  Vec y1 = pack(seed1), y2 = pack(seed2);
  Vec t0 = y2 - y1;
  t0 /= scaled_norm(t0, st.weights);
  NewtonResult nr1 = newton_correct(st.ds, y1, t0, opts.cont);
  NewtonResult nr2 = newton_correct(st.ds, y2, t0, opts.cont);
  Vec t1 = nr2.y - nr1.y;
  t1 /= scaled_norm(t1, st.weights);
  br.points.push_back(make_po_point(sys, nr1.y, t0, nr1.iterations, st,
                                    free_params, T_fix, opts));
  br.points.push_back(make_po_point(sys, nr2.y, t1, nr2.iterations, st,
                                    free_params, T_fix, opts));

  Vec y_prev = nr1.y, y_last = nr2.y;
  double h = opts.cont.initial_step;
  int since_adapt = 0;
  while (static_cast<int>(br.points.size()) < opts.cont.max_points) {
    Vec tangent = br.points.back().tangent;
    NewtonResult nr;
    bool accepted = false;
    while (!accepted) {
      Vec y_pred = y_last + h * tangent;
      try {
        nr = newton_correct(st.ds, y_pred, tangent, opts.cont);
        accepted = true;
      } catch (const NegativeDelayError&) {
        h *= 0.5;
        if (h < opts.cont.min_step) {
          br.termination = "negative_delay";
          return br;
        }
      } catch (const std::runtime_error&) {
        h *= 0.5;
        if (h < opts.cont.min_step) {
          br.termination = "min_step";
          return br;
        }
      }
    }
    Vec tnew = nr.y - y_last;
    double tn = scaled_norm(tnew, st.weights);
    if (tn <= 0.0) {
      br.termination = "stalled";
      return br;
    }
    tnew /= tn;
    if (scaled_dot(tnew, tangent, st.weights) < 0.0) tnew = -tnew;

    PoBranchPoint pt;
    try {
      pt = make_po_point(sys, nr.y, tnew, nr.iterations, st, free_params,
                         T_fix, opts);
    } catch (const NegativeDelayError&) {
      br.termination = "negative_delay";
      return br;
    }
    br.points.push_back(pt);
    if (opts.cont.progress)
      opts.cont.progress(static_cast<int>(br.points.size()) - 1,
                         BranchPoint{});

    if (pt.pval < opts.param_bounds.first ||
        pt.pval > opts.param_bounds.second) {
      br.points.back().event_flags.push_back("boundary");
      br.termination = "bounds";
      break;
    }
    if (!T_fix && pt.orbit.T < opts.T_min) {
      br.termination = "period_min";
      break;
    }
    y_prev = y_last;
    y_last = nr.y;
    *st.x_ref = pt.orbit.profile;  // moving phase reference

    if (nr.iterations <= 3)
      h = std::min(h * opts.cont.grow_factor, opts.cont.max_step);

    if (opts.adapt_every > 0 && ++since_adapt >= opts.adapt_every) {
      since_adapt = 0;
      CollocationMesh nm = adapt_mesh(pt.orbit.profile);
      MeshFunction tl = transfer(pt.orbit.profile, nm);
      *st.x_ref = tl;
      Vec yl = y_last, yp = y_prev;
      yl.head(nc) = tl.coeffs;
      MeshFunction prev_prof(pt.orbit.profile.mesh, sys.n);
      prev_prof.coeffs = y_prev.head(nc);
      yp.head(nc) = transfer(prev_prof, nm).coeffs;
      try {
        Vec ts = yl - yp;
        ts /= scaled_norm(ts, st.weights);
        NewtonResult rl = newton_correct(st.ds, yl, ts, opts.cont);
        y_last = rl.y;
        y_prev = yp;
        br.points.back() = make_po_point(sys, rl.y, ts, rl.iterations, st,
                                         free_params, T_fix, opts);
      } catch (const std::runtime_error&) {
        *st.x_ref = pt.orbit.profile;  // keep the old mesh on failure
      }
    }
  }
  if (br.termination.empty()) br.termination = "max_points";
  return br;
}

// Secant localization of a multiplier test between two consecutive points.
static void localize_po_events(const DdeSystem& sys,
                               const std::vector<int>& free_params,
                               std::optional<double> T_fix, PoBranch& br,
                               const PoOptions& opts) {
  struct Test {
    std::string name;
    double (*fn)(const PoBranchPoint&);
  };
  std::vector<Test> tests = {{"period_doubling", &pd_test},
                             {"torus", &torus_test}};
  const int np_pts = static_cast<int>(br.points.size());
  for (const Test& test : tests) {
    std::vector<double> vals(np_pts);
    for (int i = 0; i < np_pts; ++i) vals[i] = test.fn(br.points[i]);
    for (int i = 0; i + 1 < np_pts; ++i) {
      if (vals[i] == -1.0 || vals[i + 1] == -1.0) continue;
      if (vals[i] == 0.0 || vals[i] * vals[i + 1] > 0.0) continue;
      if (!(br.points[i].orbit.profile.mesh ==
            br.points[i + 1].orbit.profile.mesh))
        continue;
      PoEvent ev;
      ev.name = test.name;
      ev.after_index = i;
      ev.resolved = false;
      PoDriverState st;
      st.x_ref =
          std::make_shared<MeshFunction>(br.points[i + 1].orbit.profile);
      st.p_base = std::make_shared<Vec>(br.points[i + 1].orbit.p);
      st.ds = po_defining_system(sys, st.x_ref, st.p_base, free_params, T_fix);
      auto pack2 = [&](const PoBranchPoint& pt) {
        std::vector<double> pv;
        for (int fp : free_params) pv.push_back(pt.orbit.p(fp));
        return pack_po(pt.orbit.profile,
                       T_fix ? std::optional<double>{}
                             : std::optional<double>{pt.orbit.T},
                       pv);
      };
      Vec ya = pack2(br.points[i]), yb = pack2(br.points[i + 1]);
      Vec tangent = br.points[i + 1].tangent;
      double th0 = 0.0, th1 = 1.0, f0 = vals[i], f1 = vals[i + 1];
      try {
        for (int it = 0; it < 30; ++it) {
          double th = th1 - f1 * (th1 - th0) / (f1 - f0);
          if (!std::isfinite(th)) break;
          th = std::clamp(th, -0.25, 1.25);
          Vec yp = (1.0 - th) * ya + th * yb;
          NewtonResult nr = newton_correct(st.ds, yp, tangent, opts.cont);
          PoBranchPoint cand = make_po_point(sys, nr.y, tangent, nr.iterations,
                                             st, free_params, T_fix, opts);
          double fv = test.fn(cand);
          if (std::abs(fv) <= 1e-8) {
            cand.event_flags.push_back(test.name);
            ev.point = cand;
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
      }
      br.events.push_back(ev);
    }
  }

  // geometric folds: sign change of the free-parameter tangent component
  for (int i = 0; i + 1 < np_pts; ++i) {
    const PoBranchPoint& a = br.points[i];
    const PoBranchPoint& b = br.points[i + 1];
    int pc = static_cast<int>(a.orbit.profile.coeffs.size()) +
             (T_fix ? 0 : 1);
    if (a.tangent.size() <= pc || b.tangent.size() <= pc) continue;
    double ta = a.tangent(pc), tb = b.tangent(pc);
    if (ta == 0.0 || ta * tb > 0.0) continue;
    PoEvent ev;
    ev.name = "fold_po";
    ev.after_index = i;
    ev.resolved = true;
    ev.point = (std::abs(ta) < std::abs(tb)) ? a : b;
    ev.point.event_flags.push_back("fold_po");
    br.events.push_back(ev);
  }
}

PoBranch continue_po(const DdeSystem& sys, int free_param,
                     const PeriodicOrbitVar& seed1,
                     const PeriodicOrbitVar& seed2, const PoOptions& opts) {
  PoBranch br =
      continue_po_driver(sys, {free_param}, {}, seed1, seed2, opts);
  if (opts.detect_po_events && opts.floquet)
    localize_po_events(sys, {free_param}, {}, br, opts);
  return br;
}

PoBranch high_period_locus(const DdeSystem& sys, const PeriodicOrbitVar& seed,
                           double T_fix, int pi, int pj,
                           const PoOptions& opts) {
  // correct the seed at the frozen period, then displace along p_i
  auto x_ref = std::make_shared<MeshFunction>(seed.profile);
  auto p_base = std::make_shared<Vec>(seed.p);
  std::vector<int> fps = {pi, pj};
  DefiningSystem ds = po_defining_system(sys, x_ref, p_base, fps, T_fix);
  Vec y0 = pack_po(seed.profile, {}, {seed.p(pi), seed.p(pj)});
  Vec tangent = Vec::Zero(ds.dim_y);
  tangent(ds.dim_y - 2) = 1.0;
  ContinuationOptions copts = opts.cont;
  copts.max_newton = 20;
  NewtonResult nr0 = newton_correct(ds, y0, tangent, copts);

  PeriodicOrbitVar s1 = seed;
  s1.profile.coeffs = nr0.y.head(seed.profile.coeffs.size());
  s1.T = T_fix;
  s1.p(pi) = nr0.y(ds.dim_y - 2);
  s1.p(pj) = nr0.y(ds.dim_y - 1);

  Vec y1 = nr0.y;
  y1(ds.dim_y - 2) += 1e-4;
  *x_ref = s1.profile;
  NewtonResult nr1 = newton_correct(ds, y1, tangent, copts);
  PeriodicOrbitVar s2 = s1;
  s2.profile.coeffs = nr1.y.head(seed.profile.coeffs.size());
  s2.p(pi) = nr1.y(ds.dim_y - 2);
  s2.p(pj) = nr1.y(ds.dim_y - 1);

  PoOptions o2 = opts;
  o2.floquet = false;
  o2.detect_po_events = false;
  return continue_po_driver(sys, fps, T_fix, s1, s2, o2);
}

}  // namespace ddec
