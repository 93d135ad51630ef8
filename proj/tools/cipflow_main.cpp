#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cipflow/errors.hpp"
#include "cipflow/experiment.hpp"

namespace fs = std::filesystem;
using namespace cipflow;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitBlowUp = 3;

struct Options {
  std::string config;
  std::string out;
  std::vector<int> levels;
};

std::ofstream open_output(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path.string());
  return f;
}

fs::path output_dir(const Options& opt, const RunConfig& cfg) {
  const fs::path dir = opt.out.empty() ? cfg.output_directory : fs::path(opt.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

std::vector<int> levels_of(const Options& opt, const RunConfig& cfg) {
  for (int n : opt.levels)
    if (n < 1) throw ConfigError("mesh levels must be positive");
  return opt.levels.empty() ? cfg.effective_levels() : opt.levels;
}

int cmd_run(const Options& opt) {
  const RunConfig cfg = parse_config(opt.config);
  const auto levels = levels_of(opt, cfg);
  if (!opt.levels.empty() && levels.size() != 1) throw ConfigError("run takes a single level");
  const fs::path dir = output_dir(opt, cfg);
  const int n = levels.front();

  auto csv = open_output(dir / "diagnostics.csv");
  const RunReport report = run_single(cfg, n, &csv);
  if (report.abort_message) {
    std::cerr << "cipflow: " << *report.abort_message << '\n';
    return kExitBlowUp;
  }
  auto dump = open_output(dir / "state.txt");
  write_state_dump(dump, *report.solver, report.final_state);
  std::cout << "n = " << n << ", " << report.steps << " steps of tau = " << report.tau << "; wrote "
            << (dir / "diagnostics.csv").string() << " and " << (dir / "state.txt").string() << '\n';
  return kExitOk;
}

int cmd_sweep(const Options& opt) {
  const RunConfig cfg = parse_config(opt.config);
  const auto levels = levels_of(opt, cfg);
  const fs::path dir = output_dir(opt, cfg);
  const SweepResult result = run_convergence_sweep(cfg, levels, [](const SweepRow& r) {
    std::cout << "n = " << r.n << ": err_u_l2 = " << r.err_u_l2 << ", err_p_l2 = " << r.err_p_l2
              << ", err_u_h1 = " << r.err_u_h1 << std::endl;
  });
  auto csv = open_output(dir / "sweep.csv");
  write_sweep_csv(csv, result);
  std::cout << "fitted rates: u " << result.fit_u_l2 << ", p " << result.fit_p_l2 << ", grad u " << result.fit_u_h1
            << "; wrote " << (dir / "sweep.csv").string() << '\n';
  return kExitOk;
}

int cmd_dump_mesh(const Options& opt) {
  const RunConfig cfg = parse_config(opt.config);
  const auto bench = cfg.make_bench();
  const fs::path dir = output_dir(opt, cfg);
  for (int n : levels_of(opt, cfg)) {
    const fs::path path = dir / ("mesh_" + std::to_string(n) + ".txt");
    auto f = open_output(path);
    write_mesh(f, *case_mesh(*bench, n));
    std::cout << "wrote " << path.string() << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CIP-stabilized finite element solver for incompressible flow benchmarks"};
  app.require_subcommand(1);
  Options opt;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory (overrides [output] directory)");
    sub->add_option("--levels", opt.levels, "mesh sizes n of the n-by-n grids");
  };
  CLI::App* run = app.add_subcommand("run", "single run: diagnostics.csv and state.txt");
  CLI::App* sweep = app.add_subcommand("sweep", "convergence sweep: sweep.csv with rates");
  CLI::App* dump = app.add_subcommand("dump-mesh", "write the mesh of each level");
  for (CLI::App* sub : {run, sweep, dump}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run->parsed()) return cmd_run(opt);
    if (sweep->parsed()) return cmd_sweep(opt);
    return cmd_dump_mesh(opt);
  } catch (const ConfigError& e) {
    std::cerr << "cipflow: " << e.what() << '\n';
    return kExitConfig;
  } catch (const BlowUpError& e) {
    std::cerr << "cipflow: " << e.what() << '\n';
    return kExitBlowUp;
  } catch (const std::exception& e) {
    std::cerr << "cipflow: " << e.what() << '\n';
    return kExitFailure;
  }
}
