#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ddec {

// Command-line overrides applied on top of a scenario file; any field that is
// set wins over the file value.
struct ScenarioOverrides {
  std::optional<std::string> model, task, out;
  std::vector<std::pair<std::string, double>> sets;
  int threads = 0;
};

// Runs one scenario and writes its outputs plus a manifest.json under the
// output directory. Exit status 0 on success, 1 on configuration errors,
// 2 on numerical failure (the manifest records the failure point).
int run_scenario(const std::string& path, const ScenarioOverrides& ov = {});
int run_scenario_text(const std::string& json_text,
                      const ScenarioOverrides& ov = {});

}  // namespace ddec
