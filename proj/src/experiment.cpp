#include "superburst/experiment.hpp"

#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <stdexcept>

#include "superburst/analysis.hpp"
#include "superburst/criteria.hpp"
#include "superburst/cumulant.hpp"
#include "superburst/dicke_point.hpp"
#include "superburst/exact.hpp"
#include "superburst/interactions.hpp"
#include "superburst/parallel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace superburst {

const char* code_version() { return SUPERBURST_VERSION; }

LevelScheme scheme_for(const AtomsConfig& atoms) {
  if (atoms.two_level) {
    Vector3c d;
    if (atoms.dipole == "x") d = Vector3c::UnitX();
    else if (atoms.dipole == "y") d = Vector3c::UnitY();
    else if (atoms.dipole == "z") d = Vector3c::UnitZ();
    else if (atoms.dipole == "sigma+") d = spherical_unit(+1);
    else if (atoms.dipole == "sigma-") d = spherical_unit(-1);
    else throw ConfigError(0, "atoms.dipole", "unknown dipole '" + atoms.dipole + "'");
    return two_level_scheme(atoms.wavelength_nm, d);
  }
  LevelSchemeOptions opts;
  opts.include_weak_line = atoms.include_weak_line;
  return build_level_scheme(atoms.species, atoms.initial_state, opts);
}

std::size_t resolve_channel(const LevelScheme& scheme, const std::string& key) {
  if (key.empty()) return scheme.dominant_channel();
  for (std::size_t a = 0; a < scheme.channels.size(); ++a) {
    if (scheme.channels[a].key == key) return a;
  }
  throw ConfigError(0, "detector.channel", "scheme has no channel '" + key + "'");
}

double resolved_spacing(const ArrayConfig& array, const LevelScheme& scheme) {
  return array.spacing_nm > 0.0 ? array.spacing_nm : array.spacing_lambda * scheme.reference_wavelength_nm();
}

VectorX time_grid(const IntegrationConfig& integration) {
  return VectorX::LinSpaced(integration.samples, 0.0, integration.t_max);
}

Detector detector_for(const DetectorConfig& detector) {
  return detector_direction(detector.theta_deg * kPi / 180.0, detector.phi_deg * kPi / 180.0);
}

json record_summary(const EmissionRecord& record) {
  json out;
  auto series = [&](const VectorX& y, double photons) {
    const Peak p = find_peak(record.t, y);
    return json{{"peak", p.value}, {"t_peak", p.t}, {"burst", p.burst}, {"initial", y.size() ? y(0) : 0.0},
                {"photons", photons}};
  };
  const VectorX photons = record.photons();
  const double total_photons = photons.sum();
  for (std::size_t a = 0; a < record.channels.size(); ++a) {
    const auto k = static_cast<Eigen::Index>(a);
    json s = series(record.rates.col(k), photons(k));
    s["share"] = total_photons > 0.0 ? photons(k) / total_photons : 0.0;
    out["channels"][record.channels[a]] = s;
  }
  out["total"] = series(record.total(), total_photons);
  for (std::size_t i = 0; i < record.directional.size(); ++i) {
    const VectorX y = record.directional_rates.col(static_cast<Eigen::Index>(i));
    out["directional"][record.directional[i]] = series(y, trapezoid(record.t, y));
  }
  out["samples"] = record.samples();
  out["t_end"] = record.samples() ? record.t(record.samples() - 1) : 0.0;
  out["partial"] = record.partial;
  if (record.partial) out["failure"] = record.failure;
  out["positivity_violation"] = record.positivity_violation;
  return out;
}

namespace {

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  body(os);
  if (!os) throw std::runtime_error("write failed for " + path.string());
}

void write_record(const fs::path& dir, const std::string& name, const EmissionRecord& rec, RunOutcome& out) {
  write_file(dir / name, [&](std::ostream& os) { write_record_csv(os, rec); });
  out.files.push_back(name);
  if (rec.partial) {
    out.partial = true;
    out.message = rec.failure;
  }
}

std::vector<DirectionalProbe> probes_for(const ExperimentConfig& c, const LevelScheme& scheme) {
  if (!c.detector.enabled) return {};
  DirectionalProbe p;
  p.channel = resolve_channel(scheme, c.detector.channel);
  p.detector = detector_for(c.detector);
  return {p};
}

CumulantOptions cumulant_options(const ExperimentConfig& c, const LevelScheme& scheme) {
  CumulantOptions o;
  o.tolerances.rel_tol = c.integration.rel_tol;
  o.tolerances.abs_tol = c.integration.abs_tol;
  o.probes = probes_for(c, scheme);
  o.stop_after_peak_fraction = c.integration.stop_after_peak;
  return o;
}

RunOutcome run_sweep(const ExperimentConfig& c, const fs::path& dir, unsigned threads) {
  const LevelScheme scheme = scheme_for(c.atoms);
  SweepRequest req;
  req.n_x = c.array.n_x;
  req.n_y = c.array.n_y;
  req.d_min_nm = c.sweep.min_nm;
  req.d_max_nm = c.sweep.max_nm;
  req.step_nm = c.sweep.step_nm;
  req.channel = resolve_channel(scheme, c.detector.channel);
  if (c.detector.enabled) req.detector = detector_for(c.detector);
  req.threads = threads;
  const SweepCurve curve = criterion_sweep(scheme, req);
  RunOutcome out;
  write_file(dir / "sweep.csv", [&](std::ostream& os) { write_sweep_csv(os, curve); });
  out.files.push_back("sweep.csv");
  json intervals = json::array();
  for (const auto& [b, e] : curve.burst_intervals()) intervals.push_back({b, e});
  out.summary = {{"channel", scheme.channels[req.channel].key},
                 {"criterion", c.detector.enabled ? "directional" : "variance"},
                 {"crossings_nm", curve.crossings()},
                 {"burst_intervals_nm", intervals},
                 {"wavelength_nm", scheme.channels[req.channel].wavelength_nm()}};
  return out;
}

RunOutcome run_point(const ExperimentConfig& c, const fs::path& dir) {
  PointModelSpec spec{c.point.model, c.point.atoms, c.point.rates};
  PointRunOptions opts;
  opts.tolerances.rel_tol = c.integration.rel_tol;
  opts.tolerances.abs_tol = c.integration.abs_tol;
  opts.stop_after_peak_fraction = c.integration.stop_after_peak;
  const EmissionRecord rec = evolve_point(spec, time_grid(c.integration), opts);
  RunOutcome out;
  write_record(dir, "record.csv", rec, out);
  out.summary = record_summary(rec);
  out.summary["model"] = to_string(c.point.model);
  out.summary["atoms"] = c.point.atoms;
  return out;
}

RunOutcome run_cumulant(const ExperimentConfig& c, const fs::path& dir) {
  const LevelScheme scheme = scheme_for(c.atoms);
  const double d = resolved_spacing(c.array, scheme);
  const auto geometry = square_lattice(c.array.n_x, c.array.n_y, d);
  const auto couplings = coupling_matrices(geometry, scheme);
  const EmissionRecord rec = evolve_cumulant(couplings, geometry, time_grid(c.integration), cumulant_options(c, scheme));
  RunOutcome out;
  write_record(dir, "record.csv", rec, out);
  out.summary = record_summary(rec);
  out.summary["spacing_nm"] = d;
  out.summary["atoms"] = geometry.size();
  out.summary["min_zeeman_field_gauss"] = min_zeeman_field(geometry.size(), scheme.total_rate);
  return out;
}

RunOutcome run_exact(const ExperimentConfig& c, const fs::path& dir, unsigned threads) {
  const LevelScheme scheme = scheme_for(c.atoms);
  if (scheme.channels.size() != 1)
    throw ConfigError(0, "atoms", "exact-benchmark needs a single-channel scheme (two_level or D3_m3)");
  const double d = resolved_spacing(c.array, scheme);
  const auto geometry = square_lattice(c.array.n_x, c.array.n_y, d);
  const auto couplings = coupling_matrices(geometry, scheme);
  const VectorX grid = time_grid(c.integration);
  const auto probes = probes_for(c, scheme);
  const std::string key = probes.empty() ? "total" : "dir_" + scheme.channels[0].key;

  RunOutcome out;
  const EmissionRecord cum = evolve_cumulant(couplings, geometry, grid, cumulant_options(c, scheme));
  write_record(dir, "cumulant.csv", cum, out);
  out.summary["cumulant"] = record_summary(cum);
  const double cum_peak = find_peak(cum, key).value;
  double exact_peak = std::nan("");

  if (c.trajectories.master_equation && geometry.size() <= 10) {
    ExactOptions opts;
    opts.probes = probes;
    const EmissionRecord me = master_equation_evolve(couplings, geometry, grid, opts);
    write_record(dir, "master_equation.csv", me, out);
    out.summary["master_equation"] = record_summary(me);
    exact_peak = find_peak(me, key).value;
  }
  if (c.trajectories.count > 0) {
    McwfOptions opts;
    opts.tolerances.rel_tol = c.integration.rel_tol;
    opts.tolerances.abs_tol = c.integration.abs_tol;
    opts.probes = probes;
    opts.trajectories = c.trajectories.count;
    opts.seed = c.trajectories.seed;
    opts.threads = threads;
    opts.basis = c.trajectories.basis == "cholesky" ? JumpBasis::Cholesky : JumpBasis::Modes;
    const McwfResult mc = mcwf_ensemble(couplings, geometry, grid, opts);
    write_record(dir, "mcwf.csv", mc.record, out);
    json s = record_summary(mc.record);
    s["trajectories"] = c.trajectories.count;
    s["seed"] = c.trajectories.seed;
    s["clamped_modes"] = mc.clamped_modes;
    s["restarts"] = mc.restarts;
    out.summary["mcwf"] = s;
    if (std::isnan(exact_peak)) exact_peak = find_peak(mc.record, key).value;
  }
  out.summary["observable"] = key;
  out.summary["spacing_nm"] = d;
  if (!std::isnan(exact_peak)) out.summary["cumulant_overestimate"] = cum_peak / exact_peak - 1.0;
  return out;
}

RunOutcome run_scaling(const ExperimentConfig& c, const fs::path& dir, unsigned threads) {
  const bool point = c.scaling.target == "point";
  const auto& sizes = c.scaling.sizes;
  if (sizes.empty()) throw ConfigError(0, "scaling.sizes", "must not be empty");
  const VectorX grid = time_grid(c.integration);
  std::vector<EmissionRecord> records(sizes.size());
  std::vector<int> atoms(sizes.size());
  LevelScheme scheme;
  double d = 0.0;
  if (!point) {
    scheme = scheme_for(c.atoms);
    d = resolved_spacing(c.array, scheme);
  }
  // Worker pool over sizes; each record lands in its own slot.
  parallel_for(sizes.size(), threads, [&](std::size_t i) {
    if (point) {
      PointModelSpec spec{c.point.model, sizes[i], c.point.rates};
      PointRunOptions opts;
      opts.tolerances.rel_tol = c.integration.rel_tol;
      opts.tolerances.abs_tol = c.integration.abs_tol;
      opts.stop_after_peak_fraction = c.integration.stop_after_peak;
      records[i] = evolve_point(spec, grid, opts);
      atoms[i] = sizes[i];
    } else {
      const auto geometry = square_lattice(sizes[i], sizes[i], d);
      const auto couplings = coupling_matrices(geometry, scheme);
      records[i] = evolve_cumulant(couplings, geometry, grid, cumulant_options(c, scheme));
      atoms[i] = geometry.size();
    }
  });

  RunOutcome out;
  const auto& keys = records.front().channels;
  std::vector<std::string> series = {"total"};
  for (const auto& k : keys) series.push_back(k);
  for (const auto& k : records.front().directional) series.push_back("dir_" + k);
  write_file(dir / "scaling.csv", [&](std::ostream& os) {
    os << "N";
    for (const auto& s : series) os << ",peak_" << s << ",t_peak_" << s << ",burst_" << s;
    for (const auto& k : keys) os << ",share_" << k;
    os << ",t_end\n" << std::setprecision(17);
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      os << atoms[i];
      for (const auto& s : series) {
        const Peak p = find_peak(records[i], s);
        os << ',' << p.value << ',' << p.t << ',' << (p.burst ? 1 : 0);
      }
      const VectorX photons = records[i].photons();
      for (Eigen::Index a = 0; a < photons.size(); ++a) os << ',' << photons(a) / photons.sum();
      os << ',' << records[i].t(records[i].samples() - 1) << '\n';
    }
  });
  out.files.push_back("scaling.csv");

  json rows = json::array();
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    json row{{"N", atoms[i]}};
    for (const auto& s : series) {
      const Peak p = find_peak(records[i], s);
      row["peak"][s] = p.value;
      row["t_peak"][s] = p.t;
      row["burst"][s] = p.burst;
    }
    const VectorX shares = photon_shares(records[i]);
    for (std::size_t a = 0; a < keys.size(); ++a) row["share"][keys[a]] = shares(static_cast<Eigen::Index>(a));
    rows.push_back(row);
  }
  out.summary["rows"] = rows;

  json fits;
  for (const auto& s : series) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      const Peak p = find_peak(records[i], s);
      if (p.burst) pts.emplace_back(atoms[i], p.value);
    }
    try {
      const FitResult f = fit_power_law(pts, c.scaling.n_min);
      fits[s] = {{"exponent", f.exponent}, {"prefactor", f.prefactor}, {"residual", f.residual}, {"n", f.n_values}};
    } catch (const std::invalid_argument& e) {
      fits[s] = {{"error", e.what()}};
    }
  }
  out.summary["peak_fits"] = fits;
  // Shares are only meaningful when every run covered the whole emission.
  if (c.integration.stop_after_peak == 0.0) {
    const std::size_t main = point ? 0 : scheme.dominant_channel();
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < sizes.size(); ++i)
      pts.emplace_back(atoms[i], photon_shares(records[i])(static_cast<Eigen::Index>(main)));
    try {
      const FitResult f = fit_share(pts, c.scaling.n_min);
      out.summary["share_fit"] = {{"channel", keys[main]}, {"A", f.A}, {"B", f.B}, {"residual", f.residual}, {"n", f.n_values}};
    } catch (const std::invalid_argument& e) {
      out.summary["share_fit"] = {{"error", e.what()}};
    }
  }
  out.summary["atoms"] = atoms;
  if (!point) out.summary["spacing_nm"] = d;
  for (const auto& r : records) {
    if (r.partial) {
      out.partial = true;
      out.message = r.failure;
    }
  }
  return out;
}

}  // namespace

RunOutcome run_experiment(const ExperimentConfig& config, const fs::path& directory, unsigned threads) {
  validate_config(config);
  fs::create_directories(directory);
  RunOutcome out;
  switch (config.kind) {
    case ExperimentKind::CriteriaSweep: out = run_sweep(config, directory, threads); break;
    case ExperimentKind::PointModel: out = run_point(config, directory); break;
    case ExperimentKind::Cumulant: out = run_cumulant(config, directory); break;
    case ExperimentKind::ExactBenchmark: out = run_exact(config, directory, threads); break;
    case ExperimentKind::Scaling: out = run_scaling(config, directory, threads); break;
    case ExperimentKind::Preset:
      throw ConfigError(0, "experiment.kind", "presets are expanded by the caller");
  }
  out.summary["name"] = config.name;
  out.summary["kind"] = to_string(config.kind);
  write_file(directory / "summary.json", [&](std::ostream& os) { os << out.summary.dump(2) << '\n'; });
  out.files.push_back("summary.json");
  return out;
}

void write_manifest(const fs::path& directory, const ExperimentConfig& config, const RunOutcome& outcome,
                    double wall_seconds) {
  fs::create_directories(directory);
  json m;
  m["tool"] = "superburst";
  m["version"] = code_version();
  m["name"] = config.name;
  m["kind"] = to_string(config.kind);
  m["config_hash"] = config_hash(config);
  m["config"] = serialize_config(config);
  m["files"] = outcome.files;
  m["partial"] = outcome.partial;
  if (!outcome.message.empty()) m["message"] = outcome.message;
  m["wall_time_s"] = wall_seconds;
  write_file(directory / "manifest.json", [&](std::ostream& os) { os << m.dump(2) << '\n'; });
}

}  // namespace superburst
