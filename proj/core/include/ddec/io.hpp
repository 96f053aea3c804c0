#pragma once

#include <string>
#include <vector>

#include "ddec/equilibrium.hpp"
#include "ddec/periodic.hpp"
#include "ddec/simulate.hpp"

namespace ddec {

// 17 significant digits, dot decimal separator; round-trips doubles exactly.
std::string fmt17(double v);

void write_text_file(const std::string& path, const std::string& content);

// One row per branch point: free parameters, scaled solution norm, period
// when present, unstable count, event flag.
std::string branch_csv(const Branch& branch,
                       const std::vector<std::string>& param_labels,
                       const std::vector<int>& param_components, int n_state);
std::string po_branch_csv(const PoBranch& branch, const std::string& plabel);

// (Re lambda, Im lambda) rows.
std::string spectrum_csv(const std::vector<Complex>& eigs);

std::string trajectory_csv(const HistoryTrajectory& traj);
std::string poincare_csv(const PoincareTrace& trace);

// Plain value grid, one row per p_b value.
std::string grid_csv(const Mat& grid);

// JSON text for structured objects (meshes, orbit profiles, full branches).
std::string orbit_json(const PeriodicOrbitVar& orbit);
PeriodicOrbitVar orbit_from_json(const std::string& text, int n);
std::string branch_json(const Branch& branch);

}  // namespace ddec
