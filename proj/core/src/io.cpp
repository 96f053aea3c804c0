#include "ddec/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace ddec {

using nlohmann::json;

std::string fmt17(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v,
                           std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);  // LF line endings everywhere
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << content;
}

static std::string join_flags(const std::vector<std::string>& flags) {
  std::string s;
  for (size_t i = 0; i < flags.size(); ++i)
    s += (i ? ";" : "") + flags[i];
  return s;
}

std::string branch_csv(const Branch& branch,
                       const std::vector<std::string>& param_labels,
                       const std::vector<int>& param_components, int n_state) {
  std::ostringstream out;
  for (const std::string& l : param_labels) out << l << ",";
  out << "norm,unstable,event\n";
  for (const BranchPoint& pt : branch.points) {
    for (int c : param_components) out << fmt17(pt.y(c)) << ",";
    double nrm = n_state > 0
                     ? pt.y.head(n_state).norm() / std::sqrt(double(n_state))
                     : pt.y.norm();
    out << fmt17(nrm) << "," << pt.unstable_count << ","
        << join_flags(pt.event_flags) << "\n";
  }
  return out.str();
}

std::string po_branch_csv(const PoBranch& branch, const std::string& plabel) {
  std::ostringstream out;
  out << plabel << ",norm,period,unstable,mu1_re,mu1_im,event\n";
  for (const PoBranchPoint& pt : branch.points) {
    const MeshFunction& prof = pt.orbit.profile;
    double nrm = std::sqrt(std::max(0.0, mass_inner_product(prof, prof)));
    Complex mu1 = 0.0;
    for (const Complex& mu : pt.multipliers)
      if (std::abs(mu - 1.0) > 0.1 && std::abs(mu) > std::abs(mu1)) mu1 = mu;
    out << fmt17(pt.pval) << "," << fmt17(nrm) << "," << fmt17(pt.orbit.T)
        << "," << pt.unstable_count << "," << fmt17(mu1.real()) << ","
        << fmt17(mu1.imag()) << "," << join_flags(pt.event_flags) << "\n";
  }
  return out.str();
}

std::string spectrum_csv(const std::vector<Complex>& eigs) {
  std::ostringstream out;
  out << "re,im\n";
  for (const Complex& l : eigs)
    out << fmt17(l.real()) << "," << fmt17(l.imag()) << "\n";
  return out.str();
}

std::string trajectory_csv(const HistoryTrajectory& traj) {
  std::ostringstream out;
  out << "t";
  for (int c = 0; c < traj.n; ++c) out << ",x" << c + 1;
  out << "\n";
  for (size_t k = 0; k < traj.x.size(); ++k) {
    out << fmt17(k * traj.h);
    for (int c = 0; c < traj.n; ++c) out << "," << fmt17(traj.x[k](c));
    out << "\n";
  }
  return out.str();
}

std::string poincare_csv(const PoincareTrace& trace) {
  std::ostringstream out;
  int n = trace.crossings.empty() ? 0 : trace.crossings[0].state.size();
  int d = trace.crossings.empty() ? 0
                                  : static_cast<int>(trace.crossings[0].delayed.size());
  out << "t";
  for (int c = 0; c < n; ++c) out << ",x" << c + 1;
  for (int j = 0; j < d; ++j)
    for (int c = 0; c < n; ++c) out << ",xd" << j + 1 << "_" << c + 1;
  out << "\n";
  for (const Crossing& cr : trace.crossings) {
    out << fmt17(cr.t);
    for (int c = 0; c < n; ++c) out << "," << fmt17(cr.state(c));
    for (const Vec& xd : cr.delayed)
      for (int c = 0; c < n; ++c) out << "," << fmt17(xd(c));
    out << "\n";
  }
  return out.str();
}

std::string grid_csv(const Mat& grid) {
  std::ostringstream out;
  for (int r = 0; r < grid.rows(); ++r) {
    for (int c = 0; c < grid.cols(); ++c)
      out << (c ? "," : "") << fmt17(grid(r, c));
    out << "\n";
  }
  return out.str();
}

static json vec_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

static Vec vec_from(const json& a) {
  Vec v(a.size());
  for (size_t i = 0; i < a.size(); ++i) v(i) = a[i].get<double>();
  return v;
}

std::string orbit_json(const PeriodicOrbitVar& orbit) {
  json j;
  j["degree"] = orbit.profile.mesh.degree;
  j["boundaries"] = vec_json(orbit.profile.mesh.boundaries);
  j["coeffs"] = vec_json(orbit.profile.coeffs);
  j["T"] = orbit.T;
  j["p"] = vec_json(orbit.p);
  return j.dump(2) + "\n";
}

PeriodicOrbitVar orbit_from_json(const std::string& text, int n) {
  json j = json::parse(text);
  CollocationMesh mesh = CollocationMesh::from_boundaries(
      vec_from(j["boundaries"]), j["degree"].get<int>());
  PeriodicOrbitVar orbit;
  orbit.profile = MeshFunction(mesh, n);
  orbit.profile.coeffs = vec_from(j["coeffs"]);
  orbit.T = j["T"].get<double>();
  orbit.p = vec_from(j["p"]);
  return orbit;
}

std::string branch_json(const Branch& branch) {
  json j;
  j["termination"] = branch.termination;
  j["closed"] = branch.closed;
  json pts = json::array();
  for (const BranchPoint& pt : branch.points) {
    json e;
    e["y"] = vec_json(pt.y);
    e["tangent"] = vec_json(pt.tangent);
    e["unstable"] = pt.unstable_count;
    e["events"] = pt.event_flags;
    pts.push_back(std::move(e));
  }
  j["points"] = std::move(pts);
  json evs = json::array();
  for (const BranchEvent& ev : branch.events) {
    json e;
    e["name"] = ev.name;
    e["y"] = vec_json(ev.point.y);
    e["after_index"] = ev.after_index;
    e["resolved"] = ev.resolved;
    evs.push_back(std::move(e));
  }
  j["events"] = std::move(evs);
  return j.dump(2) + "\n";
}

}  // namespace ddec
