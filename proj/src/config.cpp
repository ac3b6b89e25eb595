#include "superburst/config.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace superburst {

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::CriteriaSweep: return "criteria-sweep";
    case ExperimentKind::PointModel: return "point-model";
    case ExperimentKind::Cumulant: return "cumulant";
    case ExperimentKind::ExactBenchmark: return "exact-benchmark";
    case ExperimentKind::Scaling: return "scaling";
    case ExperimentKind::Preset: return "preset";
  }
  throw std::invalid_argument("unknown experiment kind");
}

ExperimentKind parse_experiment_kind(const std::string& text) {
  for (auto k : {ExperimentKind::CriteriaSweep, ExperimentKind::PointModel, ExperimentKind::Cumulant,
                 ExperimentKind::ExactBenchmark, ExperimentKind::Scaling, ExperimentKind::Preset}) {
    if (to_string(k) == text) return k;
  }
  throw std::invalid_argument("unknown experiment kind '" + text + "'");
}

ConfigError::ConfigError(int line, std::string field, const std::string& message)
    : std::runtime_error(line > 0 ? "config line " + std::to_string(line) + " (" + field + "): " + message
                                  : "config (" + field + "): " + message),
      line_(line),
      field_(std::move(field)) {}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

double to_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw std::invalid_argument("expected a number, got '" + s + "'");
  return v;
}

template <typename Int>
Int to_integer(const std::string& s) {
  Int v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw std::invalid_argument("expected an integer, got '" + s + "'");
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw std::invalid_argument("expected true/false, got '" + s + "'");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// One binding per "section.key": a parser into the config and a printer from it.
struct Field {
  std::function<void(ExperimentConfig&, const std::string&)> parse;
  std::function<std::string(const ExperimentConfig&)> print;
};

using FieldTable = std::vector<std::pair<std::string, Field>>;

template <typename T>
Field number_field(T ExperimentConfig::*section, double T::*member) {
  return {[=](ExperimentConfig& c, const std::string& v) { (c.*section).*member = to_double(v); },
          [=](const ExperimentConfig& c) { return format_double((c.*section).*member); }};
}

template <typename T, typename Int>
Field int_field(T ExperimentConfig::*section, Int T::*member) {
  return {[=](ExperimentConfig& c, const std::string& v) { (c.*section).*member = to_integer<Int>(v); },
          [=](const ExperimentConfig& c) { return std::to_string((c.*section).*member); }};
}

template <typename T>
Field bool_field(T ExperimentConfig::*section, bool T::*member) {
  return {[=](ExperimentConfig& c, const std::string& v) { (c.*section).*member = to_bool(v); },
          [=](const ExperimentConfig& c) { return std::string((c.*section).*member ? "true" : "false"); }};
}

template <typename T>
Field string_field(T ExperimentConfig::*section, std::string T::*member) {
  return {[=](ExperimentConfig& c, const std::string& v) { (c.*section).*member = v; },
          [=](const ExperimentConfig& c) { return (c.*section).*member; }};
}

const FieldTable& fields() {
  static const FieldTable table = [] {
    FieldTable t;
    t.emplace_back("experiment.kind",
                   Field{[](ExperimentConfig& c, const std::string& v) { c.kind = parse_experiment_kind(v); },
                         [](const ExperimentConfig& c) { return to_string(c.kind); }});
    t.emplace_back("experiment.name", Field{[](ExperimentConfig& c, const std::string& v) { c.name = v; },
                                            [](const ExperimentConfig& c) { return c.name; }});
    t.emplace_back("experiment.preset", Field{[](ExperimentConfig& c, const std::string& v) { c.preset = v; },
                                              [](const ExperimentConfig& c) { return c.preset; }});

    using A = AtomsConfig;
    t.emplace_back("atoms.species",
                   Field{[](ExperimentConfig& c, const std::string& v) { c.atoms.species = parse_species(v); },
                         [](const ExperimentConfig& c) { return to_string(c.atoms.species); }});
    t.emplace_back("atoms.initial_state",
                   Field{[](ExperimentConfig& c, const std::string& v) { c.atoms.initial_state = parse_initial_state(v); },
                         [](const ExperimentConfig& c) { return to_string(c.atoms.initial_state); }});
    t.emplace_back("atoms.include_weak_line", bool_field(&ExperimentConfig::atoms, &A::include_weak_line));
    t.emplace_back("atoms.two_level", bool_field(&ExperimentConfig::atoms, &A::two_level));
    t.emplace_back("atoms.dipole", string_field(&ExperimentConfig::atoms, &A::dipole));
    t.emplace_back("atoms.wavelength_nm", number_field(&ExperimentConfig::atoms, &A::wavelength_nm));

    t.emplace_back("point.model",
                   Field{[](ExperimentConfig& c, const std::string& v) { c.point.model = parse_point_model(v); },
                         [](const ExperimentConfig& c) { return to_string(c.point.model); }});
    t.emplace_back("point.atoms", int_field(&ExperimentConfig::point, &PointConfig::atoms));
    t.emplace_back("point.rates", Field{[](ExperimentConfig& c, const std::string& v) {
                                          c.point.rates.clear();
                                          for (const auto& s : split_list(v)) c.point.rates.push_back(to_double(s));
                                        },
                                        [](const ExperimentConfig& c) {
                                          std::string s;
                                          for (std::size_t i = 0; i < c.point.rates.size(); ++i)
                                            s += (i ? ", " : "") + format_double(c.point.rates[i]);
                                          return s;
                                        }});

    t.emplace_back("array.n_x", int_field(&ExperimentConfig::array, &ArrayConfig::n_x));
    t.emplace_back("array.n_y", int_field(&ExperimentConfig::array, &ArrayConfig::n_y));
    t.emplace_back("array.spacing_nm", number_field(&ExperimentConfig::array, &ArrayConfig::spacing_nm));
    t.emplace_back("array.spacing_lambda", number_field(&ExperimentConfig::array, &ArrayConfig::spacing_lambda));

    t.emplace_back("detector.enabled", bool_field(&ExperimentConfig::detector, &DetectorConfig::enabled));
    t.emplace_back("detector.theta_deg", number_field(&ExperimentConfig::detector, &DetectorConfig::theta_deg));
    t.emplace_back("detector.phi_deg", number_field(&ExperimentConfig::detector, &DetectorConfig::phi_deg));
    t.emplace_back("detector.channel", string_field(&ExperimentConfig::detector, &DetectorConfig::channel));

    using I = IntegrationConfig;
    t.emplace_back("integration.t_max", number_field(&ExperimentConfig::integration, &I::t_max));
    t.emplace_back("integration.rel_tol", number_field(&ExperimentConfig::integration, &I::rel_tol));
    t.emplace_back("integration.abs_tol", number_field(&ExperimentConfig::integration, &I::abs_tol));
    t.emplace_back("integration.samples", int_field(&ExperimentConfig::integration, &I::samples));
    t.emplace_back("integration.stop_after_peak", number_field(&ExperimentConfig::integration, &I::stop_after_peak));

    t.emplace_back("sweep.min_nm", number_field(&ExperimentConfig::sweep, &SweepConfig::min_nm));
    t.emplace_back("sweep.max_nm", number_field(&ExperimentConfig::sweep, &SweepConfig::max_nm));
    t.emplace_back("sweep.step_nm", number_field(&ExperimentConfig::sweep, &SweepConfig::step_nm));

    using T = TrajectoriesConfig;
    t.emplace_back("trajectories.count", int_field(&ExperimentConfig::trajectories, &T::count));
    t.emplace_back("trajectories.seed", int_field(&ExperimentConfig::trajectories, &T::seed));
    t.emplace_back("trajectories.basis", string_field(&ExperimentConfig::trajectories, &T::basis));
    t.emplace_back("trajectories.master_equation", bool_field(&ExperimentConfig::trajectories, &T::master_equation));

    t.emplace_back("scaling.target", string_field(&ExperimentConfig::scaling, &ScalingConfig::target));
    t.emplace_back("scaling.sizes", Field{[](ExperimentConfig& c, const std::string& v) {
                                            c.scaling.sizes.clear();
                                            for (const auto& s : split_list(v)) c.scaling.sizes.push_back(to_integer<int>(s));
                                          },
                                          [](const ExperimentConfig& c) {
                                            std::string s;
                                            for (std::size_t i = 0; i < c.scaling.sizes.size(); ++i)
                                              s += (i ? ", " : "") + std::to_string(c.scaling.sizes[i]);
                                            return s;
                                          }});
    t.emplace_back("scaling.n_min", number_field(&ExperimentConfig::scaling, &ScalingConfig::n_min));

    t.emplace_back("output.directory", string_field(&ExperimentConfig::output, &OutputConfig::directory));
    return t;
  }();
  return table;
}

const Field* find_field(const std::string& key) {
  for (const auto& [name, field] : fields()) {
    if (name == key) return &field;
  }
  return nullptr;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig config;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  std::map<std::string, int> seen;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(line_no, line, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      bool known = false;
      for (const auto& [name, field] : fields()) known = known || name.rfind(section + ".", 0) == 0;
      if (!known) throw ConfigError(line_no, section, "unknown section");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(line_no, line, "expected 'key = value'");
    if (section.empty()) throw ConfigError(line_no, line, "key outside of a section");
    const std::string key = section + "." + trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const Field* field = find_field(key);
    if (!field) throw ConfigError(line_no, key, "unknown field");
    if (seen.count(key)) throw ConfigError(line_no, key, "duplicate field (first on line " + std::to_string(seen[key]) + ")");
    seen[key] = line_no;
    try {
      field->parse(config, value);
    } catch (const std::exception& e) {
      throw ConfigError(line_no, key, e.what());
    }
  }
  validate_config(config);
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, path, "cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& config) {
  std::ostringstream os;
  std::string section;
  for (const auto& [name, field] : fields()) {
    const auto dot = name.find('.');
    const std::string sec = name.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) os << '\n';
      os << '[' << sec << "]\n";
      section = sec;
    }
    os << name.substr(dot + 1) << " = " << field.print(config) << '\n';
  }
  return os.str();
}

void validate_config(const ExperimentConfig& c) {
  auto require = [](bool ok, const char* field, const char* message) {
    if (!ok) throw ConfigError(0, field, message);
  };
  if (c.kind == ExperimentKind::Preset) {
    require(!c.preset.empty(), "experiment.preset", "required for kind = preset");
    return;
  }
  require(!c.name.empty(), "experiment.name", "must not be empty");
  require(c.atoms.wavelength_nm > 0.0, "atoms.wavelength_nm", "must be positive");
  require(c.atoms.dipole == "x" || c.atoms.dipole == "y" || c.atoms.dipole == "z" || c.atoms.dipole == "sigma+" ||
              c.atoms.dipole == "sigma-",
          "atoms.dipole", "must be x, y, z, sigma+ or sigma-");
  require(c.point.atoms >= 1, "point.atoms", "must be >= 1");
  for (double r : c.point.rates) require(r >= 0.0, "point.rates", "rates must be >= 0");
  require(c.array.n_x >= 1 && c.array.n_y >= 1, "array.n_x", "array dimensions must be >= 1");
  require((c.array.spacing_nm > 0.0) != (c.array.spacing_lambda > 0.0), "array.spacing_nm",
          "exactly one of spacing_nm and spacing_lambda must be positive");
  require(c.integration.t_max > 0.0, "integration.t_max", "must be positive");
  require(c.integration.rel_tol > 0.0 && c.integration.abs_tol > 0.0, "integration.rel_tol", "tolerances must be positive");
  require(c.integration.samples >= 2, "integration.samples", "must be >= 2");
  require(c.integration.stop_after_peak >= 0.0 && c.integration.stop_after_peak < 1.0, "integration.stop_after_peak",
          "must be in [0, 1)");
  require(c.sweep.min_nm > 0.0 && c.sweep.max_nm >= c.sweep.min_nm, "sweep.min_nm", "need 0 < min_nm <= max_nm");
  require(c.sweep.step_nm > 0.0, "sweep.step_nm", "must be positive");
  require(c.trajectories.basis == "modes" || c.trajectories.basis == "cholesky", "trajectories.basis",
          "must be modes or cholesky");
  require(c.scaling.target == "point" || c.scaling.target == "array", "scaling.target", "must be point or array");
  for (int s : c.scaling.sizes) require(s >= 1, "scaling.sizes", "sizes must be >= 1");
  require(!c.output.directory.empty(), "output.directory", "must not be empty");
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : serialize_config(config)) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace superburst
