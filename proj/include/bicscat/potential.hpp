#pragma once

#include <cmath>

#include "bicscat/common.hpp"

namespace bicscat {

struct RegionConfig;
struct BlochChannel;

/// Parameters of the two-line theta-function lattice potential (atomic units).
///
/// The primary line of Gaussian wells sits at (x = 2na, z = 0). The secondary
/// line, weighted by `asymmetry`, is displaced to irrational offsets
/// (a*sqrt(1/17), -a*sqrt(1/13)) so that any nonzero weight breaks the
/// reflection symmetries of the unit cell.
struct LatticeConfig {
  double well_depth = 30.0;   // U
  double theta_width = 0.4;   // epsilon
  double gauss_width = 0.4;   // sigma
  double half_cell = 1.0;     // a; the unit cell is 2a wide
  double asymmetry = 0.0;     // beta
  int theta_truncation = 0;   // terms n >= 1 kept in the theta series, 0 = automatic

  double offset_x() const { return half_cell * std::sqrt(1.0 / 17.0); }
  double offset_z() const { return half_cell * std::sqrt(1.0 / 13.0); }
  double nome() const;
  // Effective number of theta terms; automatic value drops terms below 1e-16.
  int truncation() const;
  // -(U/2) * a / (sqrt(2 pi) sigma)
  double amplitude() const;

  void validate() const;
};

bool operator==(const LatticeConfig&, const LatticeConfig&);

// Smallest number of terms n >= 1 such that q^{(terms+1)^2} < cutoff.
int theta_terms_for(double q, double cutoff = 1e-16);

/// Jacobi theta_3(u, q) = 1 + 2 sum_{n>=1} q^{n^2} cos(2 n u), summed to
/// `terms` terms. Throws DomainError for q outside [0, 1).
double theta3(double u, double q, int terms);
double theta3(double u, double q);

double potential_value(const LatticeConfig& cfg, double x, double z);

/// Integrals of a Gaussian z-profile exp(-(z - c)^2 / 2 sigma^2) against
/// products of Neumann cosines xi_n1 xi_n2 on [-L, L].
///
/// Products of cosines reduce to single cosines of order |n1 - n2| and n1 + n2,
/// so only 2 n_max + 1 adaptive Gauss-Kronrod integrals are needed.
class TransverseOverlaps {
 public:
  TransverseOverlaps(double sigma, double center, double half_width, int n_max,
                     double tolerance = 1e-13);

  double operator()(int n1, int n2) const { return matrix_(n1, n2); }
  const RMatrix& matrix() const { return matrix_; }
  // Largest error estimate reported by the quadrature.
  double error_estimate() const { return error_; }

 private:
  RMatrix matrix_;
  double error_ = 0.0;
};

/// Potential block of the reaction-region Hamiltonian in the plane-wave x
/// Neumann-cosine basis. The x-integrals are analytic: theta_3 has Fourier
/// coefficient q^{d^2} at wavenumber d*pi/a.
class ChannelPotential {
 public:
  ChannelPotential(const LatticeConfig& cfg, const RegionConfig& region);

  // <nu1, n1 | V | nu2, n2>, valid for n1, n2 <= transverse cutoff.
  cplx element(int nu1, int n1, int nu2, int n2) const;
  // Dense block over nu in [-M, M], n in [0, n_max], index (nu + M)(n_max + 1) + n.
  CMatrix dense() const;
  bool is_real() const { return lattice_.asymmetry == 0.0; }

 private:
  double x_coefficient(int d) const;

  LatticeConfig lattice_;
  int fourier_cutoff_;
  int transverse_cutoff_;
  TransverseOverlaps primary_;
  TransverseOverlaps secondary_;
};

cplx channel_matrix_element(const LatticeConfig& cfg, const RegionConfig& region,
                            const BlochChannel& channel, int nu1, int n1, int nu2, int n2);

}  // namespace bicscat
