#include "ddec/scenario.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ddec/eqbif.hpp"
#include "ddec/equilibrium.hpp"
#include "ddec/floquet.hpp"
#include "ddec/io.hpp"
#include "ddec/models.hpp"
#include "ddec/pobif.hpp"
#include "ddec/simulate.hpp"
#include "json.hpp"

namespace ddec {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double jget(const json& j, const std::string& key, double dflt) {
  return j.contains(key) ? j.at(key).get<double>() : dflt;
}
int jgeti(const json& j, const std::string& key, int dflt) {
  return j.contains(key) ? j.at(key).get<int>() : dflt;
}
std::string jgets(const json& j, const std::string& key,
                  const std::string& dflt = "") {
  return j.contains(key) ? j.at(key).get<std::string>() : dflt;
}

Vec jvec(const json& a) {
  Vec v(a.size());
  for (size_t i = 0; i < a.size(); ++i) v(i) = a[i].get<double>();
  return v;
}

DdeSystem resolve_model(const json& cfg) {
  std::string name = jgets(cfg, "model");
  if (name.empty()) throw ConfigError("no model specified");
  DdeSystem sys;
  try {
    sys = model_registry(name);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (cfg.contains("parameters")) {
    for (auto& [k, v] : cfg.at("parameters").items()) {
      int i;
      try {
        i = sys.param_index(k);
      } catch (const std::exception&) {
        throw ConfigError("unknown parameter " + k);
      }
      sys.p(i) = v.get<double>();
    }
  }
  return sys;
}

int param_of(const DdeSystem& sys, const std::string& pname) {
  // param_index may itself throw; either way this is a configuration error
  try {
    int i = sys.param_index(pname);
    if (i >= 0) return i;
  } catch (const std::exception&) {
  }
  throw ConfigError("unknown parameter " + pname);
}

std::function<Vec(double)> history_from(const json& cfg, int n) {
  Vec h0 = cfg.contains("history") ? jvec(cfg.at("history"))
                                   : Vec::Constant(n, 0.1);
  if (h0.size() != n) throw ConfigError("history length mismatch");
  return [h0](double) { return h0; };
}

Section section_from(const json& cfg) {
  if (!cfg.contains("section")) throw ConfigError("section required");
  const json& s = cfg.at("section");
  Section sec;
  sec.component = jgeti(s, "component", 1) - 1;
  sec.level = jget(s, "level", 0.0);
  sec.direction = jgeti(s, "direction", -1);
  return sec;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ContinuationOptions cont_from(const json& cfg) {
  ContinuationOptions co;
  co.initial_step = jget(cfg, "step", 0.01);
  co.max_step = jget(cfg, "max_step", 0.5);
  co.min_step = jget(cfg, "min_step", 1e-7);
  co.max_points = jgeti(cfg, "max_points", 200);
  return co;
}

// --- equilibrium continuation in one parameter with stability and events ---

struct EqRun {
  DefiningSystem ds;
  Branch branch;
  int ip = -1;
};

EqRun run_eq(const DdeSystem& sys, const json& cfg) {
  EqRun er;
  er.ip = param_of(sys, jgets(cfg, "free"));
  er.ds = eq_defining_system(sys, er.ip);
  const int n = sys.n;
  Vec x0 = cfg.contains("x0") ? jvec(cfg.at("x0")) : Vec::Zero(n);
  if (x0.size() != n) throw ConfigError("x0 length mismatch");

  ContinuationOptions co = cont_from(cfg);
  if (cfg.contains("bounds")) {
    Vec b = jvec(cfg.at("bounds"));
    co.bounds[n] = {b(0), b(1)};
  }
  int eig_count = jgeti(cfg, "eig_count", 8);
  int ip = er.ip;
  co.postprocess = [&sys, ip, eig_count](const DefiningSystem&,
                                         BranchPoint& pt) {
    Vec p = sys.p;
    p(ip) = pt.y(sys.n);
    EigOptions eo;
    eo.count = eig_count;
    EquilibriumPoint ep = analyze_equilibrium(sys, pt.y.head(sys.n), p, eo);
    pt.unstable_count = ep.unstable_count;
    Vec extra(2 * ep.spectrum.size());
    for (size_t i = 0; i < ep.spectrum.size(); ++i) {
      extra(2 * i) = ep.spectrum[i].lambda.real();
      extra(2 * i + 1) = ep.spectrum[i].lambda.imag();
    }
    pt.extra = extra;
  };
  co.tests = {
      {"fold",
       [&sys, ip](const BranchPoint& pt) {
         Vec p = sys.p;
         p(ip) = pt.y(sys.n);
         CharMatrix cm = char_matrix(sys, pt.y.head(sys.n), p);
         return cm.eval(0.0).real().determinant();
       }},
      {"hopf",
       [](const BranchPoint& pt) {
         double best = -1.0;
         bool found = false;
         for (int i = 0; 2 * i + 1 < pt.extra.size(); ++i) {
           if (std::abs(pt.extra(2 * i + 1)) < kOmegaMin) continue;
           if (!found || pt.extra(2 * i) > best) best = pt.extra(2 * i);
           found = true;
         }
         return found ? best : -1.0;
       }},
  };

  Vec y0 = pack_eq(x0, sys.p(ip));
  Vec e_last = Vec::Unit(n + 1, n);
  NewtonResult r0 = newton_correct(er.ds, y0, e_last, co);
  Vec y1 = r0.y;
  y1(n) += co.initial_step;
  NewtonResult r1 = newton_correct(er.ds, y1, e_last, co);
  er.branch = continue_branch(er.ds, r0.y, r1.y, co);

  // a zero eigenvalue inside the fixed-point subspace of the involution is a
  // symmetry-breaking pitchfork, not a fold
  if (sys.symmetry) {
    for (BranchEvent& ev : er.branch.events) {
      if (ev.name != "fold" || !ev.resolved) continue;
      Vec x = ev.point.y.head(n);
      if (((*sys.symmetry) * x - x).lpNorm<Eigen::Infinity>() < 1e-6) {
        ev.name = "pitchfork";
        for (std::string& f : ev.point.event_flags)
          if (f == "fold") f = "pitchfork";
      }
    }
  }
  return er;
}

std::string events_csv(const Branch& br, const DefiningSystem& ds) {
  std::ostringstream out;
  out << "event";
  for (const std::string& l : ds.param_labels) out << "," << l;
  out << ",resolved\n";
  for (const BranchEvent& ev : br.events) {
    out << ev.name;
    bool have_y = ev.point.y.size() > 0;
    for (int c : ds.param_components)
      out << "," << (have_y ? fmt17(ev.point.y(c)) : std::string("nan"));
    out << "," << (ev.resolved ? 1 : 0) << "\n";
  }
  return out.str();
}

json events_manifest(const Branch& br, const DefiningSystem& ds) {
  json evs = json::array();
  for (const BranchEvent& ev : br.events) {
    json e;
    e["name"] = ev.name;
    e["resolved"] = ev.resolved;
    json ps = json::object();
    if (ev.point.y.size() > 0)
      for (size_t k = 0; k < ds.param_components.size(); ++k)
        ps[ds.param_labels[k]] = ev.point.y(ds.param_components[k]);
    e["parameters"] = std::move(ps);
    evs.push_back(std::move(e));
  }
  return evs;
}

// --- periodic-orbit helpers ---

CollocationMesh mesh_from(const json& cfg) {
  int NT = 20, degree = 4;
  if (cfg.contains("mesh")) {
    NT = jgeti(cfg.at("mesh"), "NT", 20);
    degree = jgeti(cfg.at("mesh"), "degree", 4);
  }
  return CollocationMesh::uniform(NT, degree);
}

PoOptions po_opts_from(const json& cfg) {
  PoOptions po;
  po.cont = cont_from(cfg);
  po.adapt_every = jgeti(cfg, "adapt_every", 5);
  po.floquet_count = jgeti(cfg, "floquet_count", 8);
  if (cfg.contains("bounds")) {
    Vec b = jvec(cfg.at("bounds"));
    po.param_bounds = {b(0), b(1)};
  }
  return po;
}

HopfPoint hopf_from_event(const DdeSystem& sys, int ip, const Vec& y_ev) {
  Vec x = y_ev.head(sys.n);
  Vec p = sys.p;
  p(ip) = y_ev(sys.n);
  EquilibriumPoint ep = analyze_equilibrium(sys, x, p);
  const Eigenpair* best = nullptr;
  for (const Eigenpair& pr : ep.spectrum) {
    if (pr.lambda.imag() < kOmegaMin) continue;
    if (!best || std::abs(pr.lambda.real()) < std::abs(best->lambda.real()))
      best = &pr;
  }
  if (!best) throw NoConvergenceError("no imaginary pair at the Hopf event", 0);
  HopfPoint hp;
  hp.x = x;
  hp.v = best->v;
  hp.omega = best->lambda.imag();
  hp.pi_val = y_ev(sys.n);
  hp.pj_val = 0.0;
  return hp;
}

std::pair<PeriodicOrbitVar, PeriodicOrbitVar> po_seeds(const DdeSystem& sys,
                                                       const json& cfg,
                                                       int ip) {
  if (cfg.contains("from_orbit")) {
    PeriodicOrbitVar orbit =
        orbit_from_json(read_file(jgets(cfg, "from_orbit")), sys.n);
    auto x_ref = std::make_shared<MeshFunction>(orbit.profile);
    auto p_base = std::make_shared<Vec>(orbit.p);
    DefiningSystem ds = po_defining_system(sys, x_ref, p_base, {ip});
    Vec y0 = pack_po(orbit.profile, orbit.T, {orbit.p(ip)});
    Vec tg = Vec::Unit(ds.dim_y, ds.dim_y - 1);
    NewtonResult r0 = newton_correct(ds, y0, tg);
    Vec y1 = r0.y;
    y1(ds.dim_y - 1) += jget(cfg, "seed_step", 1e-3);
    *x_ref = orbit.profile;  // anchor unchanged for the second correction
    NewtonResult r1 = newton_correct(ds, y1, tg);
    auto unpack = [&](const Vec& y) {
      PeriodicOrbitVar o = orbit;
      o.profile.coeffs = y.head(orbit.profile.coeffs.size());
      o.T = y(orbit.profile.coeffs.size());
      o.p(ip) = y(ds.dim_y - 1);
      return o;
    };
    return {unpack(r0.y), unpack(r1.y)};
  }
  // branch off the first Hopf point found along the free parameter
  EqRun er = run_eq(sys, cfg);
  for (const BranchEvent& ev : er.branch.events) {
    if (ev.name != "hopf" || !ev.resolved) continue;
    HopfPoint hp = hopf_from_event(sys, ip, ev.point.y);
    Vec p = sys.p;
    p(ip) = hp.pi_val;
    return branch_off_hopf(sys, ip, hp, p, jget(cfg, "hopf_eps", 1e-2),
                           mesh_from(cfg));
  }
  throw NoConvergenceError("no Hopf point found along the branch", 0);
}

std::string po_events_csv(const PoBranch& br) {
  std::ostringstream out;
  out << "event,p,T,resolved\n";
  for (const PoEvent& ev : br.events)
    out << ev.name << "," << fmt17(ev.point.pval) << ","
        << fmt17(ev.point.orbit.T) << "," << (ev.resolved ? 1 : 0) << "\n";
  return out.str();
}

json po_events_manifest(const PoBranch& br) {
  json evs = json::array();
  for (const PoEvent& ev : br.events) {
    json e;
    e["name"] = ev.name;
    e["p"] = ev.point.pval;
    e["T"] = ev.point.orbit.T;
    e["resolved"] = ev.resolved;
    evs.push_back(std::move(e));
  }
  return evs;
}

std::string bif_curve_csv(const Branch& br, const std::vector<std::string>& labels,
                          int ci, int cj, int comega, int cT) {
  std::ostringstream out;
  out << labels[0] << "," << labels[1] << ",omega,";
  out << (cT >= 0 ? "T" : "unstable") << ",event\n";
  for (const BranchPoint& pt : br.points) {
    out << fmt17(pt.y(ci)) << "," << fmt17(pt.y(cj)) << ","
        << fmt17(comega >= 0 ? pt.y(comega) : 0.0) << ",";
    if (cT >= 0)
      out << fmt17(pt.y(cT));
    else
      out << pt.unstable_count;
    std::string flags;
    for (size_t i = 0; i < pt.event_flags.size(); ++i)
      flags += (i ? ";" : "") + pt.event_flags[i];
    out << "," << flags << "\n";
  }
  return out.str();
}

// two-point start for a codimension-two curve: correct the seed with p_j
// pinned, then once more a step away in p_j
Branch start_two_param(const DefiningSystem& ds, const Vec& y_seed, int cj,
                       const ContinuationOptions& co) {
  Vec tg = Vec::Unit(ds.dim_y, cj);
  NewtonResult r0 = newton_correct(ds, y_seed, tg, co);
  Vec y1 = r0.y;
  y1(cj) += co.initial_step;
  NewtonResult r1 = newton_correct(ds, y1, tg, co);
  return continue_branch(ds, r0.y, r1.y, co);
}

// --- tasks ---

void task_simulate(const DdeSystem& sys, const json& cfg, const fs::path& out,
                   json& manifest) {
  double t_end = jget(cfg, "t_end", 100.0), h = jget(cfg, "h", 0.05);
  HistoryTrajectory traj =
      integrate(sys, history_from(cfg, sys.n), t_end, h, sys.p);
  write_text_file((out / "trajectory.csv").string(), trajectory_csv(traj));
  manifest["outputs"].push_back("trajectory.csv");
}

void task_poincare(const DdeSystem& sys, const json& cfg, const fs::path& out,
                   json& manifest) {
  double t_end = jget(cfg, "t_end", 100.0), h = jget(cfg, "h", 0.05);
  HistoryTrajectory traj =
      integrate(sys, history_from(cfg, sys.n), t_end, h, sys.p);
  PoincareTrace tr = poincare_trace(sys, traj, section_from(cfg), sys.p);
  write_text_file((out / "trajectory.csv").string(), trajectory_csv(traj));
  write_text_file((out / "poincare.csv").string(), poincare_csv(tr));
  manifest["outputs"] = {"trajectory.csv", "poincare.csv"};
  manifest["crossings"] = tr.crossings.size();
}

void task_stability(const DdeSystem& sys, const json& cfg, const fs::path& out,
                    json& manifest) {
  Vec x = cfg.contains("x") ? jvec(cfg.at("x")) : Vec::Zero(sys.n);
  EigOptions eo;
  eo.count = jgeti(cfg, "eig_count", 12);
  EquilibriumPoint ep = analyze_equilibrium(sys, x, sys.p, eo);
  std::vector<Complex> ls;
  for (const Eigenpair& pr : ep.spectrum) ls.push_back(pr.lambda);
  write_text_file((out / "spectrum.csv").string(), spectrum_csv(ls));
  manifest["outputs"].push_back("spectrum.csv");
  manifest["unstable"] = ep.unstable_count;
}

void task_continue_eq(const DdeSystem& sys, const json& cfg,
                      const fs::path& out, json& manifest) {
  EqRun er = run_eq(sys, cfg);
  write_text_file((out / "branch.csv").string(),
                  branch_csv(er.branch, er.ds.param_labels,
                             er.ds.param_components, sys.n));
  write_text_file((out / "branch.json").string(), branch_json(er.branch));
  write_text_file((out / "events.csv").string(), events_csv(er.branch, er.ds));
  manifest["outputs"] = {"branch.csv", "branch.json", "events.csv"};
  manifest["events"] = events_manifest(er.branch, er.ds);
  manifest["termination"] = er.branch.termination;
}

void task_continue_po(const DdeSystem& sys, const json& cfg,
                      const fs::path& out, json& manifest) {
  int ip = param_of(sys, jgets(cfg, "free"));
  auto [s1, s2] = po_seeds(sys, cfg, ip);
  PoBranch br = continue_po(sys, ip, s1, s2, po_opts_from(cfg));
  std::string plabel = sys.param_names[ip];
  write_text_file((out / "po_branch.csv").string(), po_branch_csv(br, plabel));
  write_text_file((out / "po_events.csv").string(), po_events_csv(br));
  if (!br.points.empty())
    write_text_file((out / "orbit_final.json").string(),
                    orbit_json(br.points.back().orbit));
  for (size_t i = 0; i < br.events.size(); ++i)
    write_text_file(
        (out / ("orbit_" + br.events[i].name + "_" + std::to_string(i) +
                ".json"))
            .string(),
        orbit_json(br.events[i].point.orbit));
  manifest["outputs"] = {"po_branch.csv", "po_events.csv", "orbit_final.json"};
  manifest["events"] = po_events_manifest(br);
  manifest["termination"] = br.termination;
}

void task_continue_bif(const DdeSystem& sys, const json& cfg,
                       const fs::path& out, json& manifest) {
  std::string type = jgets(cfg, "type");
  int pi = param_of(sys, jgets(cfg, "free_i"));
  int pj = param_of(sys, jgets(cfg, "free_j"));
  ContinuationOptions co = cont_from(cfg);
  if (cfg.contains("bounds_i")) {
    Vec b = jvec(cfg.at("bounds_i"));
    // applied after the defining system fixes component indices, see below
    co.bounds[-1] = {b(0), b(1)};
  }
  const int n = sys.n;
  std::vector<std::string> labels = {sys.param_names[pi], sys.param_names[pj]};

  auto set_bounds = [&](int ci, int cj) {
    auto it = co.bounds.find(-1);
    if (it != co.bounds.end()) {
      co.bounds[ci] = it->second;
      co.bounds.erase(-1);
    }
    if (cfg.contains("bounds_j")) {
      Vec b = jvec(cfg.at("bounds_j"));
      co.bounds[cj] = {b(0), b(1)};
    }
  };

  if (type == "fold" || type == "hopf" || type == "pitchfork") {
    json locate = cfg.at("locate");
    locate["free"] = jgets(cfg, "free_i");
    EqRun er = run_eq(sys, locate);
    std::string want = (type == "hopf") ? "hopf" : type;
    const BranchEvent* found = nullptr;
    for (const BranchEvent& ev : er.branch.events)
      if (ev.resolved && (ev.name == want || (type == "fold" && ev.name == "pitchfork")))
        found = &ev;
    if (!found) throw NoConvergenceError("no " + want + " event located", 0);
    Vec x = found->point.y.head(n);
    Vec p = sys.p;
    p(pi) = found->point.y(n);

    Branch br;
    DefiningSystem ds;
    int comega = -1;
    if (type == "hopf") {
      auto v_ref = std::make_shared<CVec>();
      ds = hopf_defining_system(sys, pi, pj, v_ref);
      HopfPoint hp = hopf_from_event(sys, pi, found->point.y);
      Eigenpair pr;
      pr.lambda = Complex(0.0, hp.omega);
      pr.v = hp.v;
      Vec y0 = seed_hopf(sys, pi, pj, x, p, pr, v_ref);
      set_bounds(3 * n + 1, 3 * n + 2);
      br = start_two_param(ds, y0, 3 * n + 2, co);
      comega = 3 * n;
      detect_codim2(sys, ds, br, EqCurveKind::Hopf, pi, pj, co);
    } else {
      CharMatrix cm = char_matrix(sys, x, p);
      Eigen::JacobiSVD<Mat> svd(cm.eval(0.0).real(), Eigen::ComputeFullV);
      Vec v = svd.matrixV().col(n - 1);
      if (type == "fold") {
        ds = fold_defining_system(sys, pi, pj);
        Vec y0 = pack_fold(x, v, p(pi), p(pj));
        set_bounds(2 * n, 2 * n + 1);
        br = start_two_param(ds, y0, 2 * n + 1, co);
        detect_codim2(sys, ds, br, EqCurveKind::Fold, pi, pj, co);
      } else {
        ds = pitchfork_defining_system(sys, pi, pj);
        Vec y0 = pack_pitchfork(sys, x, v, p(pi), p(pj));
        set_bounds(2 * n, 2 * n + 1);
        br = start_two_param(ds, y0, 2 * n + 1, co);
      }
    }
    write_text_file((out / "curve.csv").string(),
                    bif_curve_csv(br, labels, ds.param_components[0],
                                  ds.param_components[1], comega, -1));
    write_text_file((out / "curve.json").string(), branch_json(br));
    write_text_file((out / "events.csv").string(), events_csv(br, ds));
    manifest["events"] = events_manifest(br, ds);
    manifest["termination"] = br.termination;
  } else if (type == "fold-po" || type == "torus" || type == "pd") {
    json locate = cfg.at("locate");
    locate["free"] = jgets(cfg, "free_i");
    auto [s1, s2] = po_seeds(sys, locate, pi);
    PoBranch pob = continue_po(sys, pi, s1, s2, po_opts_from(locate));
    std::string want = type == "fold-po" ? "fold_po"
                       : type == "pd"    ? "period_doubling"
                                         : "torus";
    const PoEvent* found = nullptr;
    for (const PoEvent& ev : pob.events)
      if (ev.resolved && ev.name == want) found = &ev;
    if (!found) throw NoConvergenceError("no " + want + " event located", 0);

    const CollocationMesh& mesh = found->point.orbit.profile.mesh;
    PoBifSystem bs;
    Vec y0;
    if (type == "fold-po") {
      bs = fold_po_system(sys, pi, pj, mesh);
      y0 = seed_fold_po(bs, found->point);
    } else {
      TorusMode mode =
          type == "torus" ? TorusMode::Torus : TorusMode::PeriodDoubling;
      bs = torus_pd_system(sys, pi, pj, mesh, mode);
      y0 = seed_torus_pd(bs, sys, found->point, mode);
    }
    set_bounds(bs.ipi, bs.ipj);
    Branch br = start_two_param(bs.ds, y0, bs.ipj, co);
    if (type == "torus" && cfg.contains("resonances"))
      resonance_points(bs, br, jgeti(cfg, "resonances", 7), co);
    write_text_file((out / "curve.csv").string(),
                    bif_curve_csv(br, labels, bs.ipi, bs.ipj, bs.iomega,
                                  bs.iT));
    write_text_file((out / "curve.json").string(), branch_json(br));
    manifest["events"] = events_manifest(br, bs.ds);
    manifest["termination"] = br.termination;
  } else {
    throw ConfigError("unknown bifurcation type " + type);
  }
  manifest["outputs"] = {"curve.csv", "curve.json"};
}

void task_sweep(const DdeSystem& sys, const json& cfg, const fs::path& out,
                json& manifest) {
  int pa = param_of(sys, jgets(cfg, "pa"));
  int pb = param_of(sys, jgets(cfg, "pb"));
  Vec ra = jvec(cfg.at("pa_range")), rb = jvec(cfg.at("pb_range"));
  int na = jgeti(cfg, "pa_count", 101), nb = jgeti(cfg, "pb_count", 101);
  Vec pav = Vec::LinSpaced(na, ra(0), ra(1));
  Vec pbv = Vec::LinSpaced(nb, rb(0), rb(1));
  std::string mode_s = jgets(cfg, "mode", "max");
  std::string dir_s = jgets(cfg, "direction", "up");
  SweepOptions so;
  so.t_transient = jget(cfg, "t_transient", 200.0);
  so.t_window = jget(cfg, "t_window", 100.0);
  so.h = jget(cfg, "h", 0.05);
  Mat grid = sweep_map(
      sys, pa, pav, pb, pbv,
      mode_s == "lyapunov" ? SweepMode::Lyapunov : SweepMode::Max,
      dir_s == "down" ? SweepDirection::Down : SweepDirection::Up, so);
  write_text_file((out / "sweep.csv").string(), grid_csv(grid));
  json hdr;
  hdr["pa"] = sys.param_names[pa];
  hdr["pb"] = sys.param_names[pb];
  hdr["pa_values"] = std::vector<double>(pav.data(), pav.data() + na);
  hdr["pb_values"] = std::vector<double>(pbv.data(), pbv.data() + nb);
  hdr["mode"] = mode_s;
  hdr["direction"] = dir_s;
  hdr["invalid"] = "NaN";
  write_text_file((out / "sweep.json").string(), hdr.dump(2) + "\n");
  manifest["outputs"] = {"sweep.csv", "sweep.json"};
}

void task_manifold(const DdeSystem& sys, const json& cfg, const fs::path& out,
                   json& manifest) {
  PeriodicOrbitVar orbit =
      orbit_from_json(read_file(jgets(cfg, "from_orbit")), sys.n);
  FloquetSpectrum fs = floquet_multipliers(sys, orbit,
                                           jgeti(cfg, "floquet_count", 8));
  ManifoldResult mr =
      unstable_manifold_po(sys, orbit, fs, jget(cfg, "eps", 1e-4),
                           jget(cfg, "t_grow", 200.0), section_from(cfg));
  write_text_file((out / "manifold_plus.csv").string(),
                  poincare_csv(mr.plus_trace));
  write_text_file((out / "manifold_minus.csv").string(),
                  poincare_csv(mr.minus_trace));
  manifest["outputs"] = {"manifold_plus.csv", "manifold_minus.csv"};
  manifest["crossings_plus"] = mr.plus_trace.crossings.size();
  manifest["crossings_minus"] = mr.minus_trace.crossings.size();
}

}  // namespace

int run_scenario_text(const std::string& json_text,
                      const ScenarioOverrides& ov) {
  auto t_start = std::chrono::steady_clock::now();
  json cfg;
  json manifest;
  manifest["outputs"] = json::array();
  manifest["events"] = json::array();

  auto finish = [&](const fs::path& out, int code) {
    manifest["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      t_start)
            .count();
    manifest["exit_code"] = code;
    std::error_code ec;
    fs::create_directories(out, ec);
    if (!ec) {
      std::ofstream mf(out / "manifest.json", std::ios::binary);
      mf << manifest.dump(2) << "\n";
    }
    return code;
  };

  fs::path out = ".";
  try {
    cfg = json::parse(json_text);
  } catch (const json::exception& e) {
    std::cerr << "scenario parse error: " << e.what() << "\n";
    return finish(out, 1);
  }
  try {
    if (ov.model) cfg["model"] = *ov.model;
    if (ov.task) cfg["task"] = *ov.task;
    if (ov.out) cfg["out"] = *ov.out;
    for (const auto& [k, v] : ov.sets) cfg["parameters"][k] = v;
    int threads = ov.threads;
    if (threads <= 0)
      if (const char* env = std::getenv("DDEC_THREADS")) threads = std::atoi(env);
    manifest["threads"] = threads > 0 ? threads : 1;
    manifest["inputs"] = cfg;
    manifest["versions"] = {{"ddec", "0.1.0"},
                            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                          std::to_string(EIGEN_MAJOR_VERSION) +
                                          "." +
                                          std::to_string(EIGEN_MINOR_VERSION)}};

    out = jgets(cfg, "out", ".");
    fs::create_directories(out);
    DdeSystem sys = resolve_model(cfg);
    std::string task = jgets(cfg, "task");
    if (task == "simulate")
      task_simulate(sys, cfg, out, manifest);
    else if (task == "poincare")
      task_poincare(sys, cfg, out, manifest);
    else if (task == "stability")
      task_stability(sys, cfg, out, manifest);
    else if (task == "continue-eq")
      task_continue_eq(sys, cfg, out, manifest);
    else if (task == "continue-po")
      task_continue_po(sys, cfg, out, manifest);
    else if (task == "continue-bif")
      task_continue_bif(sys, cfg, out, manifest);
    else if (task == "sweep")
      task_sweep(sys, cfg, out, manifest);
    else if (task == "manifold")
      task_manifold(sys, cfg, out, manifest);
    else
      throw ConfigError("unknown task " + task);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    manifest["failure"] = e.what();
    return finish(out, 1);
  } catch (const json::exception& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    manifest["failure"] = e.what();
    return finish(out, 1);
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    manifest["failure"] = e.what();
    return finish(out, 2);
  }
  return finish(out, 0);
}

int run_scenario(const std::string& path, const ScenarioOverrides& ov) {
  std::string text = "{}";
  if (!path.empty()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      std::cerr << "cannot read scenario file " << path << "\n";
      return 1;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  return run_scenario_text(text, ov);
}

}  // namespace ddec
