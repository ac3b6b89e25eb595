// superburst command line: run <config>, preset <name>, inspect <manifest>.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "superburst/presets.hpp"

namespace fs = std::filesystem;
using namespace superburst;

namespace {

constexpr int kConfigError = 2;
constexpr int kSolverFailure = 3;
constexpr int kCheckFailure = 4;

fs::path output_root(const std::string& flag, const std::string& fallback) {
  if (const char* env = std::getenv("SUPERBURST_OUT"); env && *env) return env;
  return flag.empty() ? fs::path(fallback) : fs::path(flag);
}

int run_config(const std::string& path, const std::string& out_flag, unsigned threads) {
  ExperimentConfig config;
  try {
    config = load_config(path);
    validate_config(config);
  } catch (const ConfigError& e) {
    std::cerr << path << ": " << e.what() << '\n';
    return kConfigError;
  }
  if (config.kind == ExperimentKind::Preset) {
    std::cerr << path << ": kind = preset; use `superburst preset " << config.preset << "`\n";
    return kConfigError;
  }
  const fs::path dir = output_root(out_flag, ".") / config.output.directory;
  const auto start = std::chrono::steady_clock::now();
  RunOutcome outcome;
  int code = 0;
  try {
    outcome = run_experiment(config, dir, threads);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    outcome.partial = true;
    outcome.message = e.what();
    std::cerr << "solver failure: " << e.what() << '\n';
    code = kSolverFailure;
  }
  if (outcome.partial && code == 0) {
    std::cerr << "partial output: " << outcome.message << '\n';
    code = kSolverFailure;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(dir, config, outcome, wall);
  std::cout << (dir / "manifest.json").string() << '\n';
  return code;
}

int run_preset_cmd(const std::string& name, const std::string& out_flag, unsigned threads, std::uint64_t seed,
                   bool check) {
  PresetResult result;
  const fs::path root = output_root(out_flag, "out");
  try {
    result = run_preset(name, root, threads, seed);
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolverFailure;
  }
  std::cout << (root / name / "manifest.json").string() << '\n';
  if (result.partial) {
    std::cerr << "preset finished with partial runs\n";
    return kSolverFailure;
  }
  if (!check) return 0;
  const auto checks = check_preset(name, result);
  if (checks.empty()) std::cout << "no checks defined for " << name << '\n';
  bool ok = true;
  for (const auto& c : checks) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.label << ": " << c.detail << '\n';
    ok = ok && c.pass;
  }
  return ok ? 0 : kCheckFailure;
}

int inspect(const std::string& path) {
  std::ifstream is(path);
  if (!is) {
    std::cerr << "cannot open " << path << '\n';
    return kConfigError;
  }
  nlohmann::json m;
  try {
    is >> m;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << path << ": " << e.what() << '\n';
    return kConfigError;
  }
  auto field = [&](const char* k) { return m.contains(k) ? m[k].dump() : std::string("-"); };
  std::cout << "tool:      " << field("tool") << '\n'
            << "version:   " << field("version") << '\n';
  if (m.contains("preset")) {
    std::cout << "preset:    " << field("preset") << "  seed " << field("seed") << '\n';
    for (const auto& r : m["runs"]) {
      std::cout << "  " << r.value("id", "?") << "  " << r.value("kind", "?") << "  "
                << r.value("config_hash", "?") << (r.value("partial", false) ? "  PARTIAL" : "") << '\n';
    }
  } else {
    std::cout << "name:      " << field("name") << '\n'
              << "kind:      " << field("kind") << '\n'
              << "hash:      " << field("config_hash") << '\n'
              << "files:     " << field("files") << '\n';
    if (m.contains("message")) std::cout << "message:   " << field("message") << '\n';
  }
  std::cout << "wall time: " << field("wall_time_s") << " s\n"
            << "partial:   " << field("partial") << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collective emission of atomic arrays: criteria, cumulant and exact solvers"};
  app.set_version_flag("--version", std::string(code_version()));
  app.require_subcommand(1);

  std::string config_path, out_dir, preset_name, manifest_path;
  unsigned threads = 1;
  std::uint64_t seed = 1;
  bool check = false;

  auto* run = app.add_subcommand("run", "Run one experiment config");
  run->add_option("config", config_path, "INI config file")->required();
  run->add_option("--out", out_dir, "Output root (config output.directory is relative to it)");
  run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* preset = app.add_subcommand("preset", "Run a figure preset bundle");
  preset->add_option("name", preset_name, "fig2, fig3, fig5, fig6, fig7, fig9, fig10 or fig11")->required();
  preset->add_option("--out", out_dir, "Output root (default: out)");
  preset->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  preset->add_option("--seed", seed, "Master seed for trajectory ensembles");
  preset->add_flag("--check", check, "Compare against the published numbers (exit 4 on mismatch)");

  auto* insp = app.add_subcommand("inspect", "Print a manifest");
  insp->add_option("manifest", manifest_path, "manifest.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }
  if (*run) return run_config(config_path, out_dir, threads);
  if (*preset) return run_preset_cmd(preset_name, out_dir, threads, seed, check);
  return inspect(manifest_path);
}
