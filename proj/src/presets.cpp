#include "superburst/presets.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "superburst/parallel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace superburst {

namespace {

std::vector<int> point_sizes() {
  std::vector<int> n;
  for (int k = 4; k <= 20; k += 2) n.push_back(k);
  for (int k = 30; k <= 100; k += 10) n.push_back(k);
  return n;
}

std::vector<int> side_range(int from, int to) {
  std::vector<int> n;
  for (int k = from; k <= to; ++k) n.push_back(k);
  return n;
}

ExperimentConfig base(ExperimentKind kind, const std::string& name) {
  ExperimentConfig c;
  c.kind = kind;
  c.name = name;
  return c;
}

ExperimentConfig lambda_scaling(const std::string& name, double eg, double eh) {
  ExperimentConfig c = base(ExperimentKind::Scaling, name);
  c.point = {PointModel::Lambda, 40, {eg, eh}};
  c.scaling = {"point", point_sizes(), 20.0};
  // Shares need the whole emission, so the tail is followed to e^-12.
  c.integration = {12.0, 1e-9, 1e-12, 12001, 0.0};
  return c;
}

ExperimentConfig species_atoms(ExperimentConfig c, Species s, InitialState st) {
  c.atoms.species = s;
  c.atoms.initial_state = st;
  return c;
}

std::string species_tag(Species s) { return s == Species::Yb174 ? "yb" : "sr"; }

std::vector<PresetRun> fig2() {
  std::vector<PresetRun> runs;
  const std::vector<std::pair<std::string, std::pair<double, double>>> ratios = {
      {"ratio_2_1", {2.0 / 3.0, 1.0 / 3.0}}, {"ratio_1.5_1", {0.6, 0.4}}, {"ratio_1_1", {0.5, 0.5}}};
  for (const auto& [tag, r] : ratios) {
    runs.push_back({tag + "_scaling", lambda_scaling(tag + "_scaling", r.first, r.second)});
    ExperimentConfig burst = base(ExperimentKind::PointModel, tag + "_n40");
    burst.point = {PointModel::Lambda, 40, {r.first, r.second}};
    burst.integration = {1.0, 1e-9, 1e-12, 1001, 0.0};
    runs.push_back({tag + "_n40", burst});
  }
  return runs;
}

std::vector<PresetRun> fig3() {
  std::vector<PresetRun> runs;
  const std::vector<std::pair<std::string, double>> ratios = {{"fg_0.5", 0.5}, {"fg_1", 1.0}, {"fg_2", 2.0}};
  for (const auto& [tag, r] : ratios) {
    ExperimentConfig s = base(ExperimentKind::Scaling, tag + "_scaling");
    s.point = {PointModel::Ladder, 40, {1.0, r}};
    s.scaling = {"point", point_sizes(), 20.0};
    s.integration = {20.0, 1e-9, 1e-12, 20001, 0.0};
    runs.push_back({tag + "_scaling", s});
    ExperimentConfig burst = base(ExperimentKind::PointModel, tag + "_n40");
    burst.point = {PointModel::Ladder, 40, {1.0, r}};
    burst.integration = {2.0, 1e-9, 1e-12, 2001, 0.0};
    runs.push_back({tag + "_n40", burst});
  }
  return runs;
}

std::vector<PresetRun> fig5() {
  std::vector<PresetRun> runs;
  const std::vector<std::pair<Species, std::vector<double>>> species = {
      {Species::Yb174, {500.0, 1000.0, 1400.0}}, {Species::Sr88, {800.0, 1200.0, 1300.0}}};
  for (const auto& [sp, distances] : species) {
    const std::string tag = species_tag(sp);
    ExperimentConfig sweep = species_atoms(base(ExperimentKind::CriteriaSweep, tag + "_sweep"), sp,
                                           InitialState::D1_m0);
    sweep.array = {12, 12, 0.0, 0.2};
    sweep.detector = {true, 90.0, 0.0, "f"};
    sweep.sweep = {100.0, 3000.0, 10.0};
    runs.push_back({tag + "_sweep", sweep});
    for (double d : distances) {
      const std::string id = tag + "_d" + std::to_string(static_cast<int>(d));
      ExperimentConfig c = species_atoms(base(ExperimentKind::Cumulant, id), sp, InitialState::D1_m0);
      c.array = {12, 12, d, 0.0};
      c.detector = {true, 90.0, 0.0, "f"};
      c.integration = {4.0, 1e-8, 1e-10, 801, 0.0};
      runs.push_back({id, c});
    }
  }
  return runs;
}

std::vector<PresetRun> fig6() {
  std::vector<PresetRun> runs;
  const std::vector<std::pair<Species, InitialState>> cases = {{Species::Yb174, InitialState::D1_m0},
                                                               {Species::Sr88, InitialState::D3_m0}};
  for (const auto& [sp, st] : cases) {
    const std::string id = species_tag(sp) + "_share";
    ExperimentConfig c = species_atoms(base(ExperimentKind::Scaling, id), sp, st);
    c.array = {12, 12, 0.0, 0.2};
    c.detector.enabled = false;
    c.scaling = {"array", side_range(1, 12), 25.0};
    c.integration = {30.0, 1e-8, 1e-10, 3001, 0.0};
    runs.push_back({id, c});
  }
  ExperimentConfig var = species_atoms(base(ExperimentKind::CriteriaSweep, "sr_variance"), Species::Sr88,
                                       InitialState::D3_m0);
  var.array = {12, 12, 0.0, 0.2};
  var.detector = {false, 90.0, 0.0, "f"};
  var.sweep = {100.0, 3000.0, 10.0};
  runs.push_back({"sr_variance", var});
  return runs;
}

std::vector<PresetRun> fig7() {
  std::vector<PresetRun> runs;
  for (Species sp : {Species::Yb174, Species::Sr88}) {
    for (InitialState st : {InitialState::D3_m0, InitialState::D3_m3}) {
      const std::string id = species_tag(sp) + "_" + to_string(st);
      ExperimentConfig c = species_atoms(base(ExperimentKind::Scaling, id), sp, st);
      c.array = {12, 12, 244.0, 0.0};
      c.detector.enabled = false;
      c.scaling = {"array", side_range(5, 12), 25.0};
      c.integration = {6.0, 1e-8, 1e-10, 3001, 0.05};
      runs.push_back({id, c});
    }
  }
  return runs;
}

std::vector<PresetRun> fig9(std::uint64_t seed) {
  std::vector<PresetRun> runs;
  const std::vector<std::tuple<int, double, std::size_t>> cases = {
      {3, 0.1, 1000}, {3, 0.2, 1000}, {4, 0.1, 1000}, {4, 0.2, 1000}};
  for (const auto& [side, d, count] : cases) {
    std::ostringstream id;
    id << side << "x" << side << "_d" << d;
    ExperimentConfig c = base(ExperimentKind::ExactBenchmark, id.str());
    c.atoms.two_level = true;
    c.atoms.dipole = "z";
    c.array = {side, side, 0.0, d};
    c.detector = {true, 90.0, 0.0, ""};
    c.integration = {4.0, 1e-8, 1e-10, 801, 0.0};
    c.trajectories = {count, seed, "modes", side * side <= 10};
    runs.push_back({id.str(), c});
  }
  return runs;
}

std::vector<PresetRun> fig10() {
  std::vector<PresetRun> runs;
  for (Species sp : {Species::Yb174, Species::Sr88}) {
    // Absolute spacings: in units of lambda the single-channel species would coincide.
    for (int d : {150, 244, 400, 600}) {
      const std::string id = species_tag(sp) + "_d" + std::to_string(d);
      ExperimentConfig c = species_atoms(base(ExperimentKind::Scaling, id), sp, InitialState::D3_m3);
      c.array = {10, 10, static_cast<double>(d), 0.0};
      c.detector.enabled = false;
      c.scaling = {"array", side_range(2, 10), 1.0};
      c.integration = {6.0, 1e-8, 1e-10, 3001, 0.05};
      runs.push_back({id, c});
    }
  }
  return runs;
}

std::vector<PresetRun> fig11() {
  struct Placement {
    std::string tag;
    bool enabled;
    double theta, phi;
  };
  const std::vector<Placement> placements = {
      {"all", false, 90.0, 0.0}, {"x", true, 90.0, 0.0}, {"diagonal", true, 90.0, 45.0}, {"tilted", true, 45.0, 0.0}};
  std::vector<PresetRun> runs;
  for (const auto& p : placements) {
    for (const std::string ch : {"f", "g"}) {
      const std::string id = p.tag + "_" + ch;
      ExperimentConfig c = species_atoms(base(ExperimentKind::CriteriaSweep, id), Species::Yb174,
                                         InitialState::D1_m0);
      c.array = {12, 12, 0.0, 0.2};
      c.detector = {p.enabled, p.theta, p.phi, ch};
      c.sweep = {100.0, 3000.0, 10.0};
      runs.push_back({id, c});
    }
  }
  return runs;
}

const json& summary_of(const PresetResult& r, const std::string& id) {
  for (std::size_t i = 0; i < r.runs.size(); ++i) {
    if (r.runs[i].id == id) return r.outcomes.at(i).summary;
  }
  throw std::invalid_argument("preset result has no run '" + id + "'");
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

PresetCheck within(const std::string& label, double value, double target, double tol) {
  return {label, std::abs(value - target) <= tol,
          "got " + fmt(value) + ", want " + fmt(target) + " +- " + fmt(tol)};
}

PresetCheck within_rel(const std::string& label, double value, double target, double rel) {
  return within(label, value, target, rel * std::abs(target));
}

double number(const json& j) { return j.is_number() ? j.get<double>() : std::nan(""); }

double fit_exponent(const json& s, const std::string& series) {
  const json& f = s.at("peak_fits").at(series);
  return f.contains("exponent") ? number(f["exponent"]) : std::nan("");
}

/// First burst interval must start at the sweep's lower end; its end is the boundary.
double first_boundary(const json& s) {
  const json& iv = s.at("burst_intervals_nm");
  if (iv.empty()) return std::nan("");
  return number(iv[0][1]);
}

bool island_contains(const json& s, double d) {
  for (const auto& iv : s.at("burst_intervals_nm")) {
    if (number(iv[0]) > 200.0 && number(iv[0]) <= d && d <= number(iv[1])) return true;
  }
  return false;
}

std::vector<PresetCheck> check_fig2(const PresetResult& r) {
  std::vector<PresetCheck> out;
  const json& a = summary_of(r, "ratio_2_1_scaling");
  const json& b = summary_of(r, "ratio_1.5_1_scaling");
  const json& c = summary_of(r, "ratio_1_1_scaling");
  out.push_back(within("2:1 bright exponent", fit_exponent(a, "g"), 2.01, 0.05));
  out.push_back(within("2:1 weak exponent", fit_exponent(a, "h"), 1.56, 0.05));
  out.push_back(within("1.5:1 bright exponent", fit_exponent(b, "g"), 2.00, 0.05));
  out.push_back(within("1.5:1 weak exponent", fit_exponent(b, "h"), 1.72, 0.05));
  out.push_back(within("1:1 exponent g", fit_exponent(c, "g"), 1.92, 0.05));
  out.push_back(within("1:1 exponent h", fit_exponent(c, "h"), 1.92, 0.05));
  auto share = [](const json& s, const char* k) {
    const json& f = s.at("share_fit");
    return f.contains(k) ? number(f[k]) : std::nan("");
  };
  out.push_back(within_rel("2:1 share A", share(a, "A"), 0.541, 0.15));
  out.push_back(within_rel("2:1 share B", share(a, "B"), 0.31, 0.15));
  out.push_back(within_rel("1.5:1 share A", share(b, "A"), 0.513, 0.15));
  out.push_back(within_rel("1.5:1 share B", share(b, "B"), 0.16, 0.15));
  return out;
}

std::vector<PresetCheck> check_fig3(const PresetResult& r) {
  std::vector<PresetCheck> out;
  for (const std::string tag : {"fg_0.5", "fg_1", "fg_2"}) {
    out.push_back(within(tag + " first-burst exponent", fit_exponent(summary_of(r, tag + "_scaling"), "f"), 2.0, 0.05));
    const json& ch = summary_of(r, tag + "_n40").at("channels");
    const bool two = ch.at("f").at("burst").get<bool>() && ch.at("g").at("burst").get<bool>() &&
                     number(ch["g"]["t_peak"]) > number(ch["f"]["t_peak"]);
    out.push_back({tag + " two bursts at N=40", two,
                   "t_peak f=" + fmt(number(ch["f"]["t_peak"])) + ", g=" + fmt(number(ch["g"]["t_peak"]))});
  }
  return out;
}

std::vector<PresetCheck> check_fig5(const PresetResult& r) {
  std::vector<PresetCheck> out;
  const json& yb = summary_of(r, "yb_sweep");
  const json& sr = summary_of(r, "sr_sweep");
  out.push_back(within("Yb boundary (nm)", first_boundary(yb), 600.0, 20.0));
  out.push_back({"Yb island at 700 nm", island_contains(yb, 700.0), yb["burst_intervals_nm"].dump()});
  out.push_back({"Yb island at 1400 nm", island_contains(yb, 1400.0), yb["burst_intervals_nm"].dump()});
  out.push_back(within("Sr boundary (nm)", first_boundary(sr), 1000.0, 20.0));
  out.push_back({"Sr island at 1300 nm", island_contains(sr, 1300.0), sr["burst_intervals_nm"].dump()});
  out.push_back({"Sr island at 2600 nm", island_contains(sr, 2600.0), sr["burst_intervals_nm"].dump()});
  return out;
}

std::vector<PresetCheck> check_fig6(const PresetResult& r) {
  std::vector<PresetCheck> out;
  const json& sr = summary_of(r, "sr_share");
  const json& yb = summary_of(r, "yb_share");
  out.push_back(within("Sr single-atom pi share", number(sr["rows"][0]["share"]["f"]), 0.600, 0.002));
  const double big = number(sr["rows"].back()["share"]["f"]);
  out.push_back({"Sr 12x12 pi share >= 0.68", big >= 0.68, "got " + fmt(big)});
  auto fit = [](const json& s, const char* k) {
    const json& f = s.at("share_fit");
    return f.contains(k) ? number(f[k]) : std::nan("");
  };
  out.push_back(within_rel("Sr share A", fit(sr, "A"), 0.481, 0.15));
  out.push_back(within_rel("Sr share B", fit(sr, "B"), 0.091, 0.15));
  out.push_back(within_rel("Yb share A", fit(yb, "A"), 0.400, 0.15));
  out.push_back(within_rel("Yb share B", fit(yb, "B"), 0.093, 0.15));
  return out;
}

std::vector<PresetCheck> check_fig7(const PresetResult& r) {
  std::vector<PresetCheck> out;
  out.push_back(within("Yb D3_m3 exponent", fit_exponent(summary_of(r, "yb_D3_m3"), "g"), 1.38, 0.08));
  out.push_back(within("Sr D3_m3 exponent", fit_exponent(summary_of(r, "sr_D3_m3"), "g"), 1.47, 0.08));
  out.push_back(within("Yb D3_m0 exponent", fit_exponent(summary_of(r, "yb_D3_m0"), "f"), 1.29, 0.08));
  out.push_back(within("Sr D3_m0 exponent", fit_exponent(summary_of(r, "sr_D3_m0"), "f"), 1.37, 0.08));
  return out;
}

std::vector<PresetCheck> check_fig9(const PresetResult& r) {
  std::vector<PresetCheck> out;
  auto over = [&](const std::string& id) { return number(summary_of(r, id).value("cumulant_overestimate", json())); };
  out.push_back(within("3x3 d=0.1 overestimate", over("3x3_d0.1"), 0.09, 0.02));
  const double o2 = over("3x3_d0.2");
  out.push_back({"3x3 d=0.2 overestimate <= 3%", o2 <= 0.03, "got " + fmt(o2)});
  out.push_back(within("4x4 d=0.1 overestimate", over("4x4_d0.1"), 0.12, 0.04));
  return out;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"fig2", "fig3", "fig5", "fig6", "fig7", "fig9", "fig10", "fig11"};
}

std::vector<PresetRun> preset_bundle(const std::string& name, std::uint64_t seed) {
  std::vector<PresetRun> runs;
  if (name == "fig2") runs = fig2();
  else if (name == "fig3") runs = fig3();
  else if (name == "fig5") runs = fig5();
  else if (name == "fig6") runs = fig6();
  else if (name == "fig7") runs = fig7();
  else if (name == "fig9") runs = fig9(seed);
  else if (name == "fig10") runs = fig10();
  else if (name == "fig11") runs = fig11();
  else throw std::invalid_argument("unknown preset '" + name + "'");
  for (auto& run : runs) {
    run.config.output.directory = name + "/" + run.id;
    run.config.trajectories.seed = seed;
    validate_config(run.config);
  }
  return runs;
}

PresetResult run_preset(const std::string& name, const fs::path& root, unsigned threads, std::uint64_t seed) {
  PresetResult result;
  result.runs = preset_bundle(name, seed);
  const std::size_t n = result.runs.size();
  result.outcomes.resize(n);
  std::vector<double> wall(n, 0.0);
  // Runs fan out over the pool; leftover workers go to each run's own ensemble.
  const unsigned inner = std::max(1u, threads / static_cast<unsigned>(std::max<std::size_t>(n, 1)));
  parallel_for(n, threads, [&](std::size_t i) {
    const auto& run = result.runs[i];
    const fs::path dir = root / run.config.output.directory;
    const auto start = std::chrono::steady_clock::now();
    result.outcomes[i] = run_experiment(run.config, dir, inner);
    wall[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(dir, run.config, result.outcomes[i], wall[i]);
  });
  json bundle;
  bundle["tool"] = "superburst";
  bundle["version"] = code_version();
  bundle["preset"] = name;
  bundle["seed"] = seed;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& o = result.outcomes[i];
    result.partial = result.partial || o.partial;
    total += wall[i];
    bundle["runs"].push_back({{"id", result.runs[i].id},
                              {"kind", to_string(result.runs[i].config.kind)},
                              {"config_hash", config_hash(result.runs[i].config)},
                              {"manifest", result.runs[i].id + "/manifest.json"},
                              {"partial", o.partial}});
  }
  bundle["partial"] = result.partial;
  bundle["wall_time_s"] = total;
  std::ofstream os(root / name / "manifest.json");
  os << bundle.dump(2) << '\n';
  if (!os) throw std::runtime_error("cannot write preset manifest");
  return result;
}

std::vector<PresetCheck> check_preset(const std::string& name, const PresetResult& result) {
  if (name == "fig2") return check_fig2(result);
  if (name == "fig3") return check_fig3(result);
  if (name == "fig5") return check_fig5(result);
  if (name == "fig6") return check_fig6(result);
  if (name == "fig7") return check_fig7(result);
  if (name == "fig9") return check_fig9(result);
  return {};
}

}  // namespace superburst
