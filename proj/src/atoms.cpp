#include "superburst/atoms.hpp"

#include <cmath>
#include <cstdlib>
#include <numeric>
#include <stdexcept>

namespace superburst {

std::string to_string(Species s) {
  switch (s) {
    case Species::Yb174: return "Yb174";
    case Species::Sr88: return "Sr88";
  }
  throw std::invalid_argument("unknown species");
}

std::string to_string(InitialState s) {
  switch (s) {
    case InitialState::D1_m0: return "D1_m0";
    case InitialState::D3_m0: return "D3_m0";
    case InitialState::D3_m3: return "D3_m3";
  }
  throw std::invalid_argument("unknown initial state");
}

Species parse_species(std::string_view text) {
  if (text == "Yb174" || text == "Yb" || text == "174Yb") return Species::Yb174;
  if (text == "Sr88" || text == "Sr" || text == "88Sr") return Species::Sr88;
  throw std::invalid_argument("unknown species '" + std::string(text) + "'");
}

InitialState parse_initial_state(std::string_view text) {
  if (text == "D1_m0") return InitialState::D1_m0;
  if (text == "D3_m0") return InitialState::D3_m0;
  if (text == "D3_m3") return InitialState::D3_m3;
  throw std::invalid_argument("unknown initial state '" + std::string(text) + "'");
}

std::vector<Transition> species_transitions(Species species) {
  switch (species) {
    case Species::Yb174:
      return {
          {"3P1", "1S0", 556.0, 1.0e6},  {"3D1", "3P0", 1389.0, 2.0e6},
          {"3D1", "3P1", 1540.0, 1.0e6}, {"3D1", "3P2", 2090.0, 0.03e6},
          {"3D2", "3P1", 1480.0, 2.0e6}, {"3D2", "3P2", 1980.0, 0.3e6},
          {"3D3", "3P2", 1800.0, 2.0e6},
      };
    case Species::Sr88:
      return {
          {"3P1", "1S0", 689.0, 0.47e5},  {"3D1", "3P0", 2600.0, 2.8e5},
          {"3D1", "3P1", 2740.0, 1.8e5},  {"3D1", "3P2", 3070.0, 0.088e5},
          {"3D2", "3P1", 2690.0, 3.3e5},  {"3D2", "3P2", 3010.0, 0.79e5},
          {"3D3", "3P2", 2920.0, 5.9e5},
      };
  }
  throw std::invalid_argument("unknown species");
}

Transition find_transition(Species species, std::string_view upper, std::string_view lower) {
  for (const auto& t : species_transitions(species)) {
    if (t.upper_term == upper && t.lower_term == lower) return t;
  }
  throw std::invalid_argument("no transition " + std::string(upper) + "->" +
                              std::string(lower) + " for " + to_string(species));
}

namespace {

Rational reduced(std::int64_t num, std::int64_t den) {
  if (num == 0) return {0, 1};
  const std::int64_t g = std::gcd(num, den);
  return {num / g, den / g};
}

}  // namespace

Rational relative_line_strength(int J, int m, int q, int J_prime) {
  if (J < 0 || std::abs(m) > J) throw std::invalid_argument("relative_line_strength: |m| > J");
  if (q < -1 || q > 1) throw std::invalid_argument("relative_line_strength: q must be -1, 0 or +1");
  if (J_prime != J - 1 && J_prime != J)
    throw std::invalid_argument("relative_line_strength: J' must be J-1 or J");
  if (J == 0 && J_prime == 0)
    throw std::invalid_argument("relative_line_strength: J = 0 -> J' = 0 is not a dipole line");
  const int m_lower = m - q;
  if (std::abs(m_lower) > J_prime)
    throw std::invalid_argument("relative_line_strength: |m - q| > J'");

  // Closed-form rank-1 Clebsch-Gordan table <j1 m-q; 1 q | j m>^2 with j1 = J', j = J.
  const std::int64_t j1 = J_prime;
  const std::int64_t mm = m;
  if (J == J_prime + 1) {
    switch (q) {
      case 1: return reduced((j1 + mm) * (j1 + mm + 1), (2 * j1 + 1) * (2 * j1 + 2));
      case 0: return reduced((j1 - mm + 1) * (j1 + mm + 1), (2 * j1 + 1) * (j1 + 1));
      default: return reduced((j1 - mm) * (j1 - mm + 1), (2 * j1 + 1) * (2 * j1 + 2));
    }
  }
  // J == J'
  switch (q) {
    case 1: return reduced((j1 + mm) * (j1 - mm + 1), 2 * j1 * (j1 + 1));
    case 0: return reduced(mm * mm, j1 * (j1 + 1));
    default: return reduced((j1 - mm) * (j1 + mm + 1), 2 * j1 * (j1 + 1));
  }
}

Vector3c spherical_unit(int q) {
  const double s = 1.0 / std::sqrt(2.0);
  switch (q) {
    case 0: return Vector3c::UnitZ();
    case 1: return Vector3c(complex(-s, 0.0), complex(0.0, -s), complex(0.0, 0.0));
    case -1: return Vector3c(complex(s, 0.0), complex(0.0, -s), complex(0.0, 0.0));
    default: throw std::invalid_argument("spherical_unit: q must be -1, 0 or +1");
  }
}

std::size_t LevelScheme::dominant_channel() const {
  if (channels.empty()) throw std::logic_error("level scheme has no channels");
  std::size_t best = 0;
  for (std::size_t a = 1; a < channels.size(); ++a) {
    if (channels[a].rate > channels[best].rate) best = a;
  }
  return best;
}

namespace {

int term_j(const std::string& term) { return term.back() - '0'; }

DecayChannel resolved_channel(const Transition& line, int m_upper, int q, std::string key) {
  const int J = term_j(line.upper_term);
  const int Jp = term_j(line.lower_term);
  DecayChannel ch;
  const int m_lower = m_upper - q;
  ch.label = line.lower_term + " m=" + (m_lower > 0 ? "+" : "") + std::to_string(m_lower);
  ch.key = std::move(key);
  ch.photon_q = q;
  ch.rate = line.line_rate * relative_line_strength(J, m_upper, q, Jp).value();
  ch.wavenumber = 2.0 * kPi / line.wavelength_nm;
  ch.polarization = spherical_unit(q);
  return ch;
}

}  // namespace

LevelScheme build_level_scheme(Species species, InitialState initial_state,
                               const LevelSchemeOptions& options) {
  LevelScheme scheme;
  scheme.species = species;
  scheme.initial_state = initial_state;
  switch (initial_state) {
    case InitialState::D1_m0: {
      // 3D1 -> 3P1 (m=0 -> m=0) is forbidden; 3D1 -> 3P2 is dropped unless requested.
      const auto p0 = find_transition(species, "3D1", "3P0");
      const auto p1 = find_transition(species, "3D1", "3P1");
      scheme.channels.push_back(resolved_channel(p0, 0, 0, "f"));
      scheme.channels.push_back(resolved_channel(p1, 0, +1, "g"));
      scheme.channels.push_back(resolved_channel(p1, 0, -1, "h"));
      if (options.include_weak_line) {
        const auto p2 = find_transition(species, "3D1", "3P2");
        DecayChannel loss;
        loss.label = "3P2 (all m)";
        loss.key = "loss";
        loss.rate = p2.line_rate;
        loss.wavenumber = 2.0 * kPi / p2.wavelength_nm;
        loss.correlated = false;
        scheme.channels.push_back(loss);
      }
      break;
    }
    case InitialState::D3_m0: {
      if (options.include_weak_line)
        throw std::invalid_argument("include_weak_line applies to D1_m0 only");
      const auto p2 = find_transition(species, "3D3", "3P2");
      scheme.channels.push_back(resolved_channel(p2, 0, 0, "f"));
      scheme.channels.push_back(resolved_channel(p2, 0, +1, "g"));
      scheme.channels.push_back(resolved_channel(p2, 0, -1, "h"));
      break;
    }
    case InitialState::D3_m3: {
      if (options.include_weak_line)
        throw std::invalid_argument("include_weak_line applies to D1_m0 only");
      const auto p2 = find_transition(species, "3D3", "3P2");
      DecayChannel ch = resolved_channel(p2, 3, +1, "g");
      // Field rotated so the circular dipole stays perpendicular to an in-plane detector.
      const double s = 1.0 / std::sqrt(2.0);
      ch.polarization = Vector3c(complex(0.0, 0.0), complex(s, 0.0), complex(0.0, s));
      scheme.channels.push_back(ch);
      break;
    }
    default:
      throw std::invalid_argument("unsupported initial state");
  }
  scheme.total_rate = 0.0;
  for (const auto& ch : scheme.channels) scheme.total_rate += ch.rate;
  return scheme;
}

LevelScheme two_level_scheme(double wavelength_nm, const Vector3c& polarization, double rate) {
  if (!(wavelength_nm > 0.0) || !(rate > 0.0))
    throw std::invalid_argument("two_level_scheme: wavelength and rate must be positive");
  if (std::abs(polarization.squaredNorm() - 1.0) > 1e-12)
    throw std::invalid_argument("two_level_scheme: polarization must be a unit vector");
  LevelScheme scheme;
  DecayChannel ch;
  ch.label = "g";
  ch.key = "g";
  ch.rate = rate;
  ch.wavenumber = 2.0 * kPi / wavelength_nm;
  ch.polarization = polarization;
  scheme.channels.push_back(ch);
  scheme.total_rate = rate;
  return scheme;
}

double min_zeeman_field(int atom_count, double total_rate) {
  if (atom_count < 1) throw std::invalid_argument("min_zeeman_field: N must be >= 1");
  constexpr double hbar = 1.054571817e-34;      // J s
  constexpr double bohr_magneton = 9.2740100783e-24;  // J / T
  constexpr double gauss_per_tesla = 1.0e4;
  return atom_count * hbar * total_rate / bohr_magneton * gauss_per_tesla;
}

}  // namespace superburst
