#include <CLI11.hpp>

#include <clocale>
#include <iostream>

#include "floqsens/experiments.hpp"

int main(int argc, char** argv) {
  std::setlocale(LC_NUMERIC, "C");
  CLI::App app{"floqsens - two-tone Floquet sensing pipelines"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int threads = 0;

  CLI::App* run = app.add_subcommand("run", "run a declarative experiment config");
  run->add_option("--config", config_path, "JSON run configuration")->required();
  run->add_option("--out", out_dir, "output directory (overrides config)");
  run->add_option("--threads", threads, "worker threads (0 = hardware)");

  std::string query;
  CLI::App* list = app.add_subcommand("list-models", "print the model gallery");
  list->add_option("name", query, "show a single model");

  CLI11_PARSE(app, argc, argv);

  if (list->parsed()) {
    auto catalog = floqsens::floquet::model_catalog();
    if (!query.empty()) {
      for (const auto& info : catalog)
        if (info.name == query) {
          std::cout << info.name << "  -  " << info.anchor << "\n    parameters:";
          for (const auto& p : info.parameters) std::cout << " " << p;
          std::cout << "\n";
          return 0;
        }
      std::cerr << "unknown model '" << query << "'; available:";
      for (const auto& info : catalog) std::cerr << " " << info.name;
      std::cerr << "\n";
      return floqsens::cli::kExitConfig;
    }
    for (const auto& info : catalog) {
      std::cout << info.name << "  -  " << info.anchor << "\n    parameters:";
      for (const auto& p : info.parameters) std::cout << " " << p;
      std::cout << "\n";
    }
    return 0;
  }

  floqsens::cli::RunConfig cfg;
  try {
    cfg = floqsens::cli::load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return floqsens::cli::kExitConfig;
  }
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (threads > 0) cfg.threads = threads;

  floqsens::cli::RunOutcome out = floqsens::cli::run_experiment(cfg);
  if (out.exit_code != 0) {
    std::cerr << "error: " << out.message << "\n";
    return out.exit_code;
  }
  for (const auto& a : out.artifacts) std::cout << a << "\n";
  return 0;
}
