#pragma once

#include <string>
#include <utility>
#include <vector>

#include "bicscat/bloch_basis.hpp"
#include "bicscat/continuum.hpp"
#include "bicscat/potential.hpp"
#include "bicscat/scattering.hpp"

namespace bicscat {

/// Uniform grid of `count` points from `from` to `to` inclusive.
struct Grid {
  double from = 0.0;
  double to = 1.0;
  int count = 2;

  std::vector<double> values() const;
  void validate(const std::string& name) const;
};

bool operator==(const Grid&, const Grid&);

/// Serializable choice of reaction-matrix states.
///   all      every retained state
///   below    eigenvalues below `ceiling`
///   lowest   the `count` lowest states
///   nearest  the state nearest each of `energies`
struct FilterSpec {
  std::string kind = "all";
  double ceiling = 0.0;
  int count = 0;
  std::vector<double> energies;

  StateFilter resolve(const ChannelEigenBasis& basis) const;
  void validate() const;
};

bool operator==(const FilterSpec&, const FilterSpec&);

struct PotentialTask {
  Grid x{-5.0, 5.0, 201};
  Grid z{-3.0, 3.0, 121};
};

struct BandsTask {
  int k_points = 101;
  int nu_min = -3;
  int nu_max = 3;
};

struct EigensTask {
  std::vector<double> momenta{0.0};
  std::vector<double> half_widths{2.5, 2.75, 3.0, 3.25, 3.5, 3.75,
                                  4.0, 4.25, 4.5, 4.75, 5.0};  // L sweep for the classification
  std::vector<std::pair<double, double>> windows{{0.0, 4.934802200544679},
                                                 {4.934802200544679, 19.739208802178716}};
  double ceiling = 45.0;             // largest eigenvalue written to eigenvalues.csv
  bool classify = true;
  double slope_threshold = 0.1;
  double core_weight_threshold = 0.5;
  // Wavefunctions of the states nearest these energies; "localized" exports
  // every localized state found by the classification.
  std::vector<double> wavefunction_energies;
  bool localized_wavefunctions = false;
  Grid x{-1.0, 1.0, 41};
  Grid z{-3.0, 3.0, 121};
};

struct SmatrixTask {
  std::vector<double> momenta{0.0};
  std::vector<double> betas;  // empty = the lattice asymmetry
  Grid energies{0.01, 19.73, 1000};
  int mode_cutoff = 2;
  FilterSpec filter;
};

struct BicScanTask {
  std::vector<double> momenta{1.0471975511965976, 1.2566370614359172};  // pi/3, 2pi/5
  double energy_min = -20.0;
  int grid_points = 2000;
  FilterSpec filter;
  Grid line{0.05, 1.5, 0};   // count 0 disables the K sweep
  bool enrichment_check = true;
};

struct PolesTask {
  double momentum = 0.0;
  std::vector<double> betas{0.0, 0.01};
  double re_lo = 1e-3;
  double re_hi = 4.934;
  double im_lo = -0.5;
  double im_hi = 0.0;
  double eta = 1e-3;
  int mode_cutoff = 1;
  AmplitudeSelector amplitude;
  FilterSpec filter;
  std::vector<double> track_betas;  // empty disables tracking
  double track_im_floor = -0.05;    // poles below this at the first track beta are not followed
};

struct ValidateTask {
  bool finite_difference = true;
  double fd_spacing = 0.05;
};

struct RunConfig {
  LatticeConfig lattice;
  RegionConfig region;
  int threads = 1;
  PotentialTask potential;
  BandsTask bands;
  EigensTask eigens;
  SmatrixTask smatrix;
  BicScanTask bic_scan;
  PolesTask poles;
  ValidateTask validate_task;

  void validate() const;
};

bool operator==(const RunConfig&, const RunConfig&);

// JSON text of the full configuration, keys in a fixed order.
std::string to_json(const RunConfig& cfg);
// Missing keys keep their defaults; unknown keys throw InvalidConfig.
RunConfig config_from_json(const std::string& text);
RunConfig load_config(const std::string& path);

std::vector<std::string> preset_names();
/// Bundled configuration and subcommand for a figure, e.g. "paper-fig7".
std::pair<std::string, RunConfig> preset(const std::string& name);

}  // namespace bicscat
