#pragma once

#include <string>
#include <vector>

#include "bicscat/bloch_basis.hpp"
#include "bicscat/common.hpp"
#include "bicscat/potential.hpp"

namespace bicscat {

/// z-only square well V(z) = -V0 on |z| <= L.
struct SquareWellConfig {
  double depth = 1.0;       // V0
  double half_width = 3.0;  // L
  int series_terms = 40;    // n_max

  void validate() const;
};

struct SquareWellR {
  cplx bb;
  cplx bt;
};

// R_BB = cot(2 L k0) / k0, R_BT = csc(2 L k0) / k0 with k0 = sqrt(2 (E + V0)).
// Throws PoleProximityError when 2 L k0 is within 1e-12 of a multiple of pi.
SquareWellR square_well_exact(double E, const SquareWellConfig& cfg);

/// Partial sums of the eigen-expansion with y = 2 L k0 / pi:
///
///   R_BB = 2L / (pi^2 y^2) + (4L / pi^2) sum_{n=1}^{n_max} 1 / (y^2 - n^2)
///
/// and the same with (-1)^n for R_BT. With `accelerate` the n > n_max
/// remainder is added in closed form.
SquareWellR square_well_series(double E, const SquareWellConfig& cfg, bool accelerate = false);

/// The same quantities computed by the general machinery: the well is
/// diagonalized in the Neumann basis, the reaction matrix is formed on the
/// nu = 0 mode, and the truncated tail is completed analytically.
SquareWellR square_well_pipeline(double E, const SquareWellConfig& cfg);

struct FdOptions {
  double spacing = 0.05;     // target grid spacing h in both directions
  double half_width = 3.0;   // L
  double target = 0.0;       // eigenvalues nearest this energy are returned
  int count = 8;
  double tolerance = 1e-10;  // relative change of the Ritz values between sweeps
  int max_iterations = 500;
  long max_points = 1000000;
};

/// Eigenvalues of the 5-point finite-difference Hamiltonian on one unit cell
/// (Bloch phase e^{2iKa} across x = +-a) with zero-slope walls at z = +-L on
/// a cell-centred grid, nearest `target`, in ascending order. Shift-invert
/// subspace iteration with a sparse LU factorization.
std::vector<double> fd_eigen_oracle(const LatticeConfig& cfg, const BlochChannel& channel,
                                    const FdOptions& options);

// (4 E(h/2) - E(h)) / 3 for each pair of levels.
std::vector<double> richardson(const std::vector<double>& coarse, const std::vector<double>& fine);

struct ValidationCheck {
  std::string name;
  double measured;
  double tolerance;
  bool passed;
};

struct ValidationOptions {
  bool finite_difference = true;  // the FD oracle takes several seconds
  double fd_spacing = 0.05;
  int threads = 1;
};

/// Square-well, free-particle and finite-difference checks of the default
/// lattice at the Gamma point.
std::vector<ValidationCheck> run_validation(const LatticeConfig& cfg, const RegionConfig& region,
                                            const ValidationOptions& options = {});

}  // namespace bicscat
