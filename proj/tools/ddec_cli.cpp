#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ddec/models.hpp"
#include "ddec/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"delay-equation continuation toolkit"};

  std::string scenario_file, model, task, out;
  std::vector<std::string> sets;
  int threads = 0;
  bool list_models = false;

  app.add_option("--scenario", scenario_file, "scenario JSON file");
  app.add_option("--model", model, "model name (overrides the file)");
  app.add_option("--task", task, "task name (overrides the file)");
  app.add_option("--out", out, "output directory (overrides the file)");
  app.add_option("--set", sets, "parameter override name=value")
      ->take_all();
  app.add_option("--threads", threads, "worker cap (DDEC_THREADS mirrors it)");
  app.add_flag("--list-models", list_models, "print model names and exit");

  CLI11_PARSE(app, argc, argv);

  if (list_models) {
    for (const std::string& m : ddec::model_names()) std::cout << m << "\n";
    return 0;
  }

  ddec::ScenarioOverrides ov;
  if (!model.empty()) ov.model = model;
  if (!task.empty()) ov.task = task;
  if (!out.empty()) ov.out = out;
  ov.threads = threads;
  for (const std::string& s : sets) {
    auto eq = s.find('=');
    if (eq == std::string::npos) {
      std::cerr << "--set expects name=value, got " << s << "\n";
      return 1;
    }
    try {
      ov.sets.emplace_back(s.substr(0, eq), std::stod(s.substr(eq + 1)));
    } catch (const std::exception&) {
      std::cerr << "bad numeric value in --set " << s << "\n";
      return 1;
    }
  }

  if (scenario_file.empty() && !ov.task) {
    std::cerr << "nothing to do: give --scenario or --task\n";
    return 1;
  }
  return ddec::run_scenario(scenario_file, ov);
}
