#include <CLI11.hpp>
#include <exception>
#include <iostream>
#include <string>

#include "cca/config.hpp"
#include "cca/experiment.hpp"
#include "cca/metrics.hpp"
#include "cca/selftest.hpp"

int main(int argc, char** argv) {
  CLI::App app{"cca: concurrent credit assignment experiments"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "run a seeded experiment from a config file");
  run_cmd->add_option("config", config_path, "path to key=value config file")->required();

  std::string report_dir;
  bool emit_svg = false;
  auto* report_cmd = app.add_subcommand("report", "summarize a run output directory");
  report_cmd->add_option("dir", report_dir, "directory holding seed_*.csv files")
      ->required();
  report_cmd->add_flag("--svg", emit_svg, "also emit SVG charts of the aggregate curves");

  auto* selftest_cmd = app.add_subcommand("selftest", "run the built-in oracle checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      const cca::ExperimentConfig cfg = cca::parse_config(config_path);
      const auto files = cca::run_experiment(cfg);
      for (const auto& f : files) std::cout << "wrote " << f << "\n";
    } else if (*report_cmd) {
      const cca::RunSummary s = cca::summarize_directory(report_dir);
      std::cout << "seeds: " << s.num_seeds << "\n";
      std::cout << "last-10% episode return: " << cca::format_double(s.last_fraction_return_mean)
                << " +/- " << cca::format_double(s.last_fraction_return_std) << "\n";
      std::cout << "final cumulative reward: " << cca::format_double(s.final_cumulative_mean)
                << " +/- " << cca::format_double(s.final_cumulative_std) << "\n";
      if (emit_svg) {
        for (const auto& f : cca::write_report_svgs(report_dir)) {
          std::cout << "wrote " << f << "\n";
        }
      }
    } else if (*selftest_cmd) {
      const cca::SelftestResult r = cca::run_selftest(std::cout);
      std::cout << r.passed << " passed, " << r.failed << " failed\n";
      return r.failed == 0 ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
