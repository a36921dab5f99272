#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bicscat/common.hpp"
#include "bicscat/reaction_region.hpp"
#include "bicscat/scattering.hpp"

namespace bicscat {

/// 2x2 bound-state matrix on the nu = 0 mode below its threshold, where the
/// outside solution decays as e^{-q0 |z|}:
///
///   [ 1 - q0 R^BB_00    -q0 R^BT_00 ]
///   [  -q0 R^TB_00    1 - q0 R^TT_00 ]
///
/// with R built with the 1 / (E - lambda_j) sign of the reaction matrix.
struct BoundStateMatrix {
  double energy = 0.0;
  double decay_rate = 0.0;  // q0
  Eigen::Matrix2cd matrix;
  cplx det;
};

BoundStateMatrix bound_state_matrix(const ChannelEigenBasis& basis, double E,
                                    const StateFilter& filter = {});

// Real part of det H_bd. Throws DomainError unless E < K^2 / 2.
double det_hbd(const ChannelEigenBasis& basis, double E, const StateFilter& filter = {});

struct BicRoot {
  double energy;
  double residual;  // |det H_bd| at the refined root
};

struct BicScan {
  std::vector<BicRoot> roots;
  std::vector<std::string> advisories;
  std::vector<double> grid;    // sampled energies
  std::vector<double> values;  // det H_bd on the grid (NaN inside pole gaps)
};

struct BicScanOptions {
  StateFilter filter;
  double tolerance = 1e-10;  // bisection width
  double pole_gap = 1e-9;    // half width of the excluded interval around each lambda_j
  int refine_factor = 4;     // resolution of the post-refinement check
};

/// Sign-change scan of det H_bd on a uniform grid, with the range split at
/// every retained eigenvalue so that no bracket straddles a pole, followed by
/// bisection. A finer rescan reports brackets that hid more than one root.
BicScan scan_bics(const ChannelEigenBasis& basis, double E_lo, double E_hi, int grid_points,
                  const BicScanOptions& options = {});

struct BicLinePoint {
  double momentum;
  double energy;
};

/// Positive-energy roots below the nu = 0 threshold for each Bloch momentum.
std::vector<BicLinePoint> bic_line(const LatticeConfig& cfg, const RegionConfig& region,
                                   const std::vector<double>& momenta, int grid_points,
                                   const BicScanOptions& options = {}, int threads = 1);

/// Amplitude whose poles are sought: S-matrix entry from mode `in_nu` to
/// `out_nu`, reflected (bottom to bottom) or transmitted (bottom to top).
struct AmplitudeSelector {
  int out_nu = 0;
  int in_nu = 0;
  bool transmitted = false;
};

struct PoleSearchOptions {
  double re_lo = 0.0;
  double re_hi = 0.0;
  double im_lo = -0.5;
  double im_hi = 0.0;
  double eta = 1e-3;           // the contour runs at Im E = im_hi + eta
  int mode_cutoff = 1;
  // Open/closed status of each mode is fixed at this real energy; NaN means
  // the middle of [re_lo, re_hi].
  double reference_energy = std::numeric_limits<double>::quiet_NaN();
  StateFilter filter;
  AmplitudeSelector amplitude;
  int max_depth = 10;
  double newton_tolerance = 1e-10;
  double residue_tolerance = 1e-6;  // relative to |Im E|
  double min_depth_width = 1e-4;
};

/// det(1 + iK(E)) times prod_j (E - lambda_j) over the eigenvalues near the
/// search window, evaluated as a bordered determinant so that it is analytic
/// on the continued sheet of the mode wavenumbers.
class ResonanceFunction {
 public:
  ResonanceFunction(const ChannelEigenBasis& basis, const PoleSearchOptions& options);

  cplx operator()(cplx E) const;
  ModeSet modes(cplx E) const;
  // The selected S-matrix amplitude at complex E.
  cplx amplitude(cplx E) const;

 private:
  const ChannelEigenBasis* basis_;
  PoleSearchOptions options_;
  double reference_;
  std::vector<int> states_;
  std::vector<int> near_;
  std::vector<int> far_;
};

struct Pole {
  cplx energy;
  cplx residue;
  double residual = 0.0;  // |g| relative to the scale of g around the pole
};

struct PoleSearch {
  std::vector<Pole> poles;
  std::vector<cplx> rejected;  // zeros on the real axis or with negligible residue
  std::vector<std::string> diagnostics;
  int winding = 0;             // zero count of the resonance function in the region
};

PoleSearch find_poles(const ChannelEigenBasis& basis, const PoleSearchOptions& options);

// Newton iteration on the resonance function from `guess`; nullopt on failure.
std::optional<cplx> refine_pole(const ResonanceFunction& g, cplx guess, double tolerance,
                                int max_iterations = 60);

cplx pole_residue(const ResonanceFunction& g, cplx pole, double radius, int points = 64);

struct PoleTrackPoint {
  double beta;
  cplx energy;
};

struct PoleTrack {
  std::vector<PoleTrackPoint> points;
  std::vector<std::string> diagnostics;
  bool complete = true;
};

/// Follows poles through increasing asymmetry values, sharing one eigen-solve
/// per value. `starts` are guesses for the poles at betas.front(). Each step
/// is predicted by secant extrapolation and corrected by Newton; failed steps
/// are halved. A track stops with a diagnostic when its pole is lost or
/// reaches the real axis.
std::vector<PoleTrack> track_poles(const LatticeConfig& cfg, const RegionConfig& region,
                                   const BlochChannel& channel, const std::vector<double>& betas,
                                   const std::vector<cplx>& starts,
                                   const PoleSearchOptions& options, int max_halvings = 4);

PoleTrack track_pole(const LatticeConfig& cfg, const RegionConfig& region,
                     const BlochChannel& channel, const std::vector<double>& betas, cplx start,
                     const PoleSearchOptions& options, int max_halvings = 4);

struct LifetimeFit {
  double prefactor = 0.0;  // c in -Im E = c beta^p
  double exponent = 0.0;   // p
  double rms_residual = 0.0;
  int used_points = 0;
  bool partial = false;
};

LifetimeFit lifetime_scaling(const std::vector<PoleTrackPoint>& points, bool partial = false);

// Derived lifetimes: Gamma = 1 / (-Im E) and tau = 1 / (2 (-Im E)).
double lifetime_gamma(cplx pole);
double lifetime_tau(cplx pole);

}  // namespace bicscat
