#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "superburst/linalg.hpp"

namespace superburst {

enum class Species { Yb174, Sr88 };

/// Initial Zeeman state of the prepared 3D_J manifold.
enum class InitialState { D1_m0, D3_m0, D3_m3 };

std::string to_string(Species s);
std::string to_string(InitialState s);
Species parse_species(std::string_view text);
InitialState parse_initial_state(std::string_view text);

/// One fine-structure line of the species data tables.
struct Transition {
  std::string upper_term;  // e.g. "3D1"
  std::string lower_term;  // e.g. "3P0"
  double wavelength_nm;
  double line_rate;        // s^-1
};

/// One Zeeman-resolved decay channel |e> -> |g_a>.
struct DecayChannel {
  std::string label;       // ground state, e.g. "3P1 m=-1"
  std::string key;         // short column key: f, g, h, ...
  int photon_q = 0;        // emitted photon helicity index, m_upper - m_lower
  double rate = 0.0;       // s^-1
  double wavenumber = 0.0; // nm^-1
  Vector3c polarization = Vector3c::UnitZ();
  /// False for loss channels whose emission carries no spatial correlation.
  bool correlated = true;

  double wavelength_nm() const { return 2.0 * kPi / wavenumber; }
};

struct LevelScheme {
  Species species = Species::Yb174;
  InitialState initial_state = InitialState::D1_m0;
  std::vector<DecayChannel> channels;
  double total_rate = 0.0;  // s^-1, sum of channel rates

  std::size_t dominant_channel() const;
  /// Wavelength of the dominant channel, the reference lambda_0 for spacings.
  double reference_wavelength_nm() const { return channels.at(dominant_channel()).wavelength_nm(); }
};

/// The seven table rows for a species, in table order.
std::vector<Transition> species_transitions(Species species);

/// Lookup by terms, e.g. find_transition(Species::Yb174, "3D1", "3P0").
Transition find_transition(Species species, std::string_view upper, std::string_view lower);

/// Exact nonnegative rational number.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

/// Squared Clebsch-Gordan weight |<J' m-q; 1 q | J m>|^2 of the decay |J m> -> |J' m-q>
/// with emitted photon index q. For fixed (J, m, J') the weights over q sum to 1.
Rational relative_line_strength(int J, int m, int q, int J_prime);

struct LevelSchemeOptions {
  /// Adds the weak 3D1 -> 3P2 line as a spatially uncorrelated loss channel (D1_m0 only).
  bool include_weak_line = false;
};

LevelScheme build_level_scheme(Species species, InitialState initial_state,
                               const LevelSchemeOptions& options = {});

/// Generic two-level scheme: one channel (key "g") with the given dipole. The
/// species/initial_state fields are placeholders.
LevelScheme two_level_scheme(double wavelength_nm, const Vector3c& polarization, double rate = 1.0e6);

/// Field N*hbar*Gamma0/mu_B (gauss) above which Zeeman-split channels are independent.
double min_zeeman_field(int atom_count, double total_rate);

/// Spherical polarization unit vectors: q = 0 -> z, q = +-1 -> -+(x +- i y)/sqrt(2).
Vector3c spherical_unit(int q);

}  // namespace superburst
