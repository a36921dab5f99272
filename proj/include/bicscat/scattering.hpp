#pragma once

#include <string>
#include <vector>

#include "bicscat/bloch_basis.hpp"
#include "bicscat/common.hpp"
#include "bicscat/reaction_region.hpp"

namespace bicscat {

/// Which reaction-region states enter the eigen-sum of the reaction matrix.
struct StateFilter {
  enum class Kind { all, listed, below };
  Kind kind = Kind::all;
  std::vector<int> states;  // for Kind::listed
  double ceiling = 0.0;     // for Kind::below

  static StateFilter all() { return {}; }
  static StateFilter listed(std::vector<int> states) { return {Kind::listed, std::move(states), 0.0}; }
  static StateFilter below(double ceiling) { return {Kind::below, {}, ceiling}; }

  std::vector<int> select(const ChannelEigenBasis& basis) const;
};

struct ReactionOptions {
  StateFilter filter;
  // Adds the n > n_max Neumann states of a constant potential `tail_shift`
  // analytically (diagonal in nu). Exact for a z-only square well.
  bool tail_completion = false;
  double tail_shift = 0.0;
  double pole_tolerance = 1e-12;
};

/// Reaction-matrix blocks on the modes of a ModeSet, each m x m with m = modes.size().
struct ReactionBlocks {
  CMatrix bb, bt, tb, tt;

  int modes() const { return int(bb.rows()); }
  // 2m x 2m matrix ordered (B modes, T modes).
  CMatrix full() const;
};

ReactionBlocks reaction_matrix(const ChannelEigenBasis& basis, cplx E, const ModeSet& modes,
                               const ReactionOptions& options = {});

struct ScatteringBlocks {
  cplx energy;
  ModeSet modes;
  ReactionBlocks reaction;
  CMatrix k_matrix;             // sqrt(k) R sqrt(k)
  CMatrix s_full;               // 2m x 2m, ordered (B modes, T modes)
  CMatrix s_prop;               // propagating rows and columns of s_full
  std::vector<int> prop_index;  // positions of s_prop rows in s_full
  double rcond = 0.0;           // reciprocal condition estimate of 1 + iK
};

/// S = -P (1 + iK)^{-1} (1 - iK) P with P = diag(e^{-ikL}) on propagating
/// modes and diag(e^{-qL}) on evanescent modes. Throws SingularMatrixError
/// when 1 + iK is numerically singular.
ScatteringBlocks s_matrix(const ReactionBlocks& reaction, const ModeSet& modes,
                          double half_width, double min_rcond = 1e-14);

// Mode set, reaction matrix and S-matrix at a real energy.
ScatteringBlocks scatter(const ChannelEigenBasis& basis, double E, int mode_cutoff,
                         const ReactionOptions& options = {});

// max |S^dagger S - I|
double unitarity_defect(const CMatrix& s);

enum class Side { bottom, top };

struct Amplitude {
  std::string label;  // e.g. R_m0, T_00
  int out_nu;
  int in_nu;
  bool transmitted;
  cplx value;
};

// "m" for nu = -1, "0", "p" for nu = +1, "m2"/"p2" for |nu| = 2, ...
std::string mode_label(int nu);

/// Reflection and transmission amplitudes among propagating modes for waves
/// incident from `from`. R_ab is the amplitude into mode a from mode b.
std::vector<Amplitude> reflection_coefficients(const ScatteringBlocks& blocks, Side from);

// Moves grid points that fall within `gap` of an eigenvalue to eigenvalue +- gap.
std::vector<double> avoid_eigenvalues(std::vector<double> grid, const RVector& eigenvalues,
                                      double gap = 1e-6);

}  // namespace bicscat
