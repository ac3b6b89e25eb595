#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "superburst/presets.hpp"

using namespace superburst;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("superburst_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

ExperimentConfig small(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  c.name = to_string(kind);
  c.array = {3, 3, 0.0, 0.2};
  c.integration = {3.0, 1e-8, 1e-10, 61, 0.0};
  c.sweep = {200.0, 800.0, 50.0};
  c.point = {PointModel::Lambda, 12, {0.6, 0.4}};
  c.scaling = {"point", {4, 8, 16, 32}, 8.0};
  return c;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(SUPERBURST_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("each kind writes its files and a manifest") {
  const fs::path root = scratch("kinds");
  for (auto kind : {ExperimentKind::CriteriaSweep, ExperimentKind::PointModel, ExperimentKind::Cumulant,
                    ExperimentKind::Scaling}) {
    const auto c = small(kind);
    const fs::path dir = root / c.name;
    const auto out = run_experiment(c, dir);
    write_manifest(dir, c, out, 0.5);
    CHECK_FALSE(out.partial);
    for (const auto& f : out.files) CHECK(fs::exists(dir / f));
    const json m = json::parse(slurp(dir / "manifest.json"));
    CHECK(m["kind"] == to_string(kind));
    CHECK(m["config_hash"] == config_hash(c));
    CHECK(m["version"] == code_version());
    CHECK(m["partial"] == false);
    CHECK(m["wall_time_s"] == 0.5);
    CHECK(parse_config(m["config"].get<std::string>()) == c);
  }
  const json sweep = json::parse(slurp(root / "criteria-sweep" / "summary.json"));
  CHECK(sweep.contains("crossings_nm"));
  CHECK(sweep.contains("burst_intervals_nm"));
  const json point = json::parse(slurp(root / "point-model" / "summary.json"));
  CHECK(point["channels"]["g"]["initial"] == doctest::Approx(12 * 0.6));
  CHECK(point["channels"]["g"]["photons"].get<double>() + point["channels"]["h"]["photons"].get<double>() ==
        doctest::Approx(12.0).epsilon(1e-3));
  const json scaling = json::parse(slurp(root / "scaling" / "summary.json"));
  CHECK(scaling["rows"].size() == 4);
  CHECK(scaling["peak_fits"].contains("g"));
  fs::remove_all(root);
}

TEST_CASE("exact benchmark compares the cumulant peak with the master equation") {
  auto c = small(ExperimentKind::ExactBenchmark);
  c.atoms.two_level = true;
  c.array = {2, 2, 0.0, 0.2};
  c.trajectories = {40, 5, "modes", true};
  const fs::path dir = scratch("exact");
  const auto out = run_experiment(c, dir);
  CHECK(fs::exists(dir / "cumulant.csv"));
  CHECK(fs::exists(dir / "master_equation.csv"));
  CHECK(fs::exists(dir / "mcwf.csv"));
  CHECK(out.summary.contains("cumulant_overestimate"));
  c.atoms.two_level = false;  // three-channel D1 scheme
  CHECK_THROWS_AS(run_experiment(c, dir), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("outputs are byte-identical across thread counts") {
  const fs::path root = scratch("threads");
  for (auto kind : {ExperimentKind::CriteriaSweep, ExperimentKind::Scaling, ExperimentKind::ExactBenchmark}) {
    auto c = small(kind);
    if (kind == ExperimentKind::ExactBenchmark) {
      c.atoms.two_level = true;
      c.array = {2, 2, 0.0, 0.15};
      c.trajectories = {48, 9, "modes", false};
    }
    const auto one = run_experiment(c, root / "one", 1);
    const auto many = run_experiment(c, root / "many", 3);
    for (const auto& f : one.files) {
      INFO(to_string(kind), " ", f);
      CHECK(slurp(root / "one" / f) == slurp(root / "many" / f));
    }
  }
  fs::remove_all(root);
}

TEST_CASE("preset bundles") {
  CHECK_THROWS_AS(preset_bundle("fig99"), std::invalid_argument);
  for (const auto& name : preset_names()) CHECK_FALSE(preset_bundle(name).empty());

  for (const auto& run : preset_bundle("fig7")) {
    CHECK(run.config.array.spacing_nm == 244.0);
    CHECK(run.config.scaling.sizes.front() == 5);
    CHECK(run.config.scaling.sizes.back() == 12);
  }
  for (const auto& run : preset_bundle("fig6")) {
    if (run.config.kind == ExperimentKind::Scaling) CHECK(run.config.array.spacing_lambda == 0.2);
  }
  const auto fig9 = preset_bundle("fig9", 77);
  std::vector<std::string> ids;
  for (const auto& run : fig9) {
    ids.push_back(run.id);
    CHECK(run.config.trajectories.seed == 77);
    CHECK(run.config.output.directory == "fig9/" + run.id);
    CHECK(run.config.atoms.two_level);
    CHECK(run.config.trajectories.master_equation == (run.config.array.n_x * run.config.array.n_y <= 10));
  }
  CHECK(ids == std::vector<std::string>{"3x3_d0.1", "3x3_d0.2", "4x4_d0.1", "4x4_d0.2"});
  const auto fig2 = preset_bundle("fig2");
  CHECK(fig2.front().config.point.rates[0] + fig2.front().config.point.rates[1] == doctest::Approx(1.0));
}

TEST_CASE("command line exit codes") {
  const fs::path root = scratch("cli");
  fs::create_directories(root);
  const fs::path good = root / "good.ini";
  {
    auto c = small(ExperimentKind::PointModel);
    c.output.directory = "pm";
    std::ofstream(good) << serialize_config(c);
  }
  std::ofstream(root / "bad.ini") << "[array]\nn_x = many\n";
  std::ofstream(root / "preset.ini") << "[experiment]\nkind = preset\npreset = fig2\n";
  CHECK(cli("run " + good.string() + " --out " + root.string()) == 0);
  CHECK(fs::exists(root / "pm" / "manifest.json"));
  CHECK(fs::exists(root / "pm" / "record.csv"));
  CHECK(cli("inspect " + (root / "pm" / "manifest.json").string()) == 0);
  CHECK(cli("run " + (root / "bad.ini").string()) == 2);
  CHECK(cli("run " + (root / "preset.ini").string()) == 2);
  CHECK(cli("run " + (root / "missing.ini").string()) == 2);
  CHECK(cli("preset nosuch --out " + root.string()) == 2);
  CHECK(cli("inspect " + (root / "nothing.json").string()) == 2);
  CHECK(cli("frobnicate") == 2);

  // SUPERBURST_OUT overrides --out.
  const fs::path env_root = root / "env";
  CHECK(cli("run " + good.string() + " --out " + (root / "ignored").string()) == 0);
  setenv("SUPERBURST_OUT", env_root.c_str(), 1);
  CHECK(cli("run " + good.string() + " --out " + (root / "ignored2").string()) == 0);
  unsetenv("SUPERBURST_OUT");
  CHECK(fs::exists(env_root / "pm" / "manifest.json"));
  CHECK_FALSE(fs::exists(root / "ignored2"));

  // A solver failure leaves a partial manifest and exits with 3.
  {
    auto c = small(ExperimentKind::Cumulant);
    c.array = {4, 4, 0.0, 0.2};
    c.integration = {5.0, 1e-200, 1e-200, 11, 0.0};  // unreachable accuracy
    c.output.directory = "fail";
    std::ofstream(root / "fail.ini") << serialize_config(c);
  }
  const int code = cli("run " + (root / "fail.ini").string() + " --out " + root.string());
  CHECK(code == 3);
  const json m = json::parse(slurp(root / "fail" / "manifest.json"));
  CHECK(m["partial"] == true);
  fs::remove_all(root);
}

}
