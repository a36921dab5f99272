#include "bicscat/scattering.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>

#include "bicscat/special.hpp"

namespace bicscat {

std::vector<int> StateFilter::select(const ChannelEigenBasis& basis) const {
  std::vector<int> out;
  switch (kind) {
    case Kind::all:
      for (int j = 0; j < basis.size(); ++j) out.push_back(j);
      break;
    case Kind::listed:
      for (int j : states) {
        if (j < 0 || j >= basis.size()) throw InvalidConfig("state filter index out of range");
        out.push_back(j);
      }
      break;
    case Kind::below:
      for (int j = 0; j < basis.size(); ++j) {
        if (basis.eigenvalues(j) < ceiling) out.push_back(j);
      }
      break;
  }
  return out;
}

CMatrix ReactionBlocks::full() const {
  const int m = modes();
  CMatrix out(2 * m, 2 * m);
  out << bb, bt, tb, tt;
  return out;
}

ReactionBlocks reaction_matrix(const ChannelEigenBasis& basis, cplx E, const ModeSet& modes,
                               const ReactionOptions& options) {
  const int M = basis.region.fourier_cutoff;
  const int m = modes.size();
  for (const auto& mode : modes.modes) {
    if (std::abs(mode.nu) > M) throw InvalidConfig("mode outside the basis Fourier cutoff");
  }
  const std::vector<int> states = options.filter.select(basis);
  const int J = int(states.size());

  CMatrix pb(J, m), pt(J, m);
  CVector inv(J);
  for (int r = 0; r < J; ++r) {
    const int j = states[r];
    const double lambda = basis.eigenvalues(j);
    if (std::abs(E - lambda) < options.pole_tolerance) {
      throw PoleProximityError("energy coincides with reaction-region eigenvalue", lambda);
    }
    inv(r) = 0.5 / (E - lambda);
    for (int c = 0; c < m; ++c) {
      pb(r, c) = basis.surface_bottom(j, modes.modes[c].nu + M);
      pt(r, c) = basis.surface_top(j, modes.modes[c].nu + M);
    }
  }
  const CMatrix wb = inv.asDiagonal() * pb.conjugate();
  const CMatrix wt = inv.asDiagonal() * pt.conjugate();
  ReactionBlocks R;
  R.bb = pb.transpose() * wb;
  R.bt = pb.transpose() * wt;
  R.tb = pt.transpose() * wb;
  R.tt = pt.transpose() * wt;

  if (options.tail_completion) {
    const double L = basis.region.half_width;
    const long first = basis.region.transverse_cutoff + 1;
    const double scale = 4.0 * L / (kPi * kPi);
    for (int c = 0; c < m; ++c) {
      const double kappa = transverse_momentum(basis.channel, modes.modes[c].nu, basis.half_cell);
      const cplx y = std::sqrt((E - 0.5 * kappa * kappa - options.tail_shift) * 8.0 * L * L /
                               (kPi * kPi));
      const cplx same = scale * inverse_square_tail(y, first);
      const cplx cross = scale * alternating_inverse_square_tail(y, first);
      R.bb(c, c) += same;
      R.tt(c, c) += same;
      R.bt(c, c) += cross;
      R.tb(c, c) += cross;
    }
  }
  return R;
}

ScatteringBlocks s_matrix(const ReactionBlocks& reaction, const ModeSet& modes,
                          double half_width, double min_rcond) {
  const int m = modes.size();
  if (reaction.modes() != m) throw InvalidConfig("reaction blocks do not match the mode set");
  CVector root_k(2 * m), phase(2 * m);
  for (int c = 0; c < m; ++c) {
    const auto& mode = modes.modes[c];
    const cplx rk = std::sqrt(mode.k);
    const cplx ph = mode.propagating ? std::exp(-kI * mode.k * half_width)
                                     : std::exp(kI * mode.k * half_width);
    root_k(c) = root_k(c + m) = rk;
    phase(c) = phase(c + m) = ph;
  }

  ScatteringBlocks out;
  out.energy = modes.energy;
  out.modes = modes;
  out.reaction = reaction;
  out.k_matrix = root_k.asDiagonal() * reaction.full() * root_k.asDiagonal();

  const CMatrix I = CMatrix::Identity(2 * m, 2 * m);
  Eigen::PartialPivLU<CMatrix> lu(I + kI * out.k_matrix);
  out.rcond = lu.rcond();
  if (!(out.rcond >= min_rcond)) {
    throw SingularMatrixError("1 + iK is singular to working precision", out.rcond);
  }
  out.s_full = -(phase.asDiagonal() * lu.solve(I - kI * out.k_matrix) * phase.asDiagonal());

  for (int c = 0; c < m; ++c) {
    if (modes.modes[c].propagating) out.prop_index.push_back(c);
  }
  const int p = int(out.prop_index.size());
  for (int i = 0; i < p; ++i) out.prop_index.push_back(out.prop_index[i] + m);
  out.s_prop.resize(2 * p, 2 * p);
  for (int r = 0; r < 2 * p; ++r) {
    for (int c = 0; c < 2 * p; ++c) out.s_prop(r, c) = out.s_full(out.prop_index[r], out.prop_index[c]);
  }
  return out;
}

ScatteringBlocks scatter(const ChannelEigenBasis& basis, double E, int mode_cutoff,
                         const ReactionOptions& options) {
  const ModeSet modes = enumerate_modes(E, basis.channel, mode_cutoff, basis.half_cell);
  return s_matrix(reaction_matrix(basis, E, modes, options), modes, basis.region.half_width);
}

double unitarity_defect(const CMatrix& s) {
  if (s.size() == 0) return 0.0;
  return (s.adjoint() * s - CMatrix::Identity(s.cols(), s.cols())).cwiseAbs().maxCoeff();
}

std::string mode_label(int nu) {
  if (nu == 0) return "0";
  const std::string base = nu < 0 ? "m" : "p";
  const int a = std::abs(nu);
  return a == 1 ? base : base + std::to_string(a);
}

std::vector<Amplitude> reflection_coefficients(const ScatteringBlocks& blocks, Side from) {
  const int m = blocks.modes.size();
  const int in_offset = from == Side::bottom ? 0 : m;
  const int reflect_offset = in_offset;
  const int transmit_offset = m - in_offset;
  std::vector<Amplitude> out;
  for (int b = 0; b < m; ++b) {
    if (!blocks.modes.modes[b].propagating) continue;
    for (int a = 0; a < m; ++a) {
      if (!blocks.modes.modes[a].propagating) continue;
      const int nu_a = blocks.modes.modes[a].nu;
      const int nu_b = blocks.modes.modes[b].nu;
      const std::string suffix = mode_label(nu_a) + mode_label(nu_b);
      out.push_back({"R_" + suffix, nu_a, nu_b, false,
                     blocks.s_full(reflect_offset + a, in_offset + b)});
      out.push_back({"T_" + suffix, nu_a, nu_b, true,
                     blocks.s_full(transmit_offset + a, in_offset + b)});
    }
  }
  return out;
}

std::vector<double> avoid_eigenvalues(std::vector<double> grid, const RVector& eigenvalues,
                                      double gap) {
  for (double& e : grid) {
    for (Eigen::Index j = 0; j < eigenvalues.size(); ++j) {
      const double d = e - eigenvalues(j);
      if (std::abs(d) < gap) {
        e = eigenvalues(j) + (d < 0.0 ? -gap : gap);
        break;
      }
    }
  }
  return grid;
}

}  // namespace bicscat
