#include "bicscat/continuum.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>

#include "bicscat/parallel.hpp"

namespace bicscat {

namespace {

// |Im E| below which a zero of the resonance function counts as real
constexpr double kBoundLimit = 1e-12;

}  // namespace

BoundStateMatrix bound_state_matrix(const ChannelEigenBasis& basis, double E,
                                    const StateFilter& filter) {
  const double kappa = transverse_momentum(basis.channel, 0, basis.half_cell);
  const double threshold = 0.5 * kappa * kappa;
  if (!(E < threshold)) {
    throw DomainError("bound-state condition needs E below the nu = 0 threshold " +
                      std::to_string(threshold));
  }
  const double q = std::sqrt(kappa * kappa - 2.0 * E);
  ModeSet modes{cplx{E, 0.0}, basis.channel, {{0, cplx{0.0, q}, false}}};
  ReactionOptions ro;
  ro.filter = filter;
  const ReactionBlocks R = reaction_matrix(basis, E, modes, ro);

  BoundStateMatrix out;
  out.energy = E;
  out.decay_rate = q;
  out.matrix << 1.0 - q * R.bb(0, 0), -q * R.bt(0, 0), -q * R.tb(0, 0), 1.0 - q * R.tt(0, 0);
  out.det = out.matrix.determinant();
  return out;
}

double det_hbd(const ChannelEigenBasis& basis, double E, const StateFilter& filter) {
  return bound_state_matrix(basis, E, filter).det.real();
}

namespace {

struct Segment {
  double lo, hi;
};

// Sign-change roots of f on the sample points, refined by bisection.
template <class F>
std::vector<double> bracket_roots(const F& f, const std::vector<double>& xs,
                                  const std::vector<double>& fs, double tolerance) {
  std::vector<double> roots;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    if (fs[i] == 0.0) {
      roots.push_back(xs[i]);
      continue;
    }
    if (std::signbit(fs[i]) == std::signbit(fs[i + 1]) || fs[i + 1] == 0.0) continue;
    double a = xs[i], b = xs[i + 1], fa = fs[i];
    while (b - a > tolerance) {
      const double mid = 0.5 * (a + b);
      const double fm = f(mid);
      if (fm == 0.0) {
        a = b = mid;
        break;
      }
      if (std::signbit(fm) == std::signbit(fa)) {
        a = mid;
        fa = fm;
      } else {
        b = mid;
      }
    }
    roots.push_back(0.5 * (a + b));
  }
  if (!xs.empty() && fs.back() == 0.0) roots.push_back(xs.back());
  return roots;
}

std::vector<double> segment_samples(const Segment& s, const std::vector<double>& grid) {
  std::vector<double> xs{s.lo};
  for (double g : grid) {
    if (g > s.lo && g < s.hi) xs.push_back(g);
  }
  xs.push_back(s.hi);
  return xs;
}

}  // namespace

BicScan scan_bics(const ChannelEigenBasis& basis, double E_lo, double E_hi, int grid_points,
                  const BicScanOptions& options) {
  BicScan scan;
  const double kappa = transverse_momentum(basis.channel, 0, basis.half_cell);
  const double threshold = 0.5 * kappa * kappa;
  const double hi = std::min(E_hi, threshold - 1e-12 * (1.0 + std::abs(threshold)));
  if (!(E_lo < hi)) return scan;
  if (grid_points < 2) throw InvalidConfig("BIC scan needs at least two grid points");

  auto f = [&](double E) { return det_hbd(basis, E, options.filter); };

  std::vector<double> poles;
  for (int j : options.filter.select(basis)) {
    const double l = basis.eigenvalues(j);
    if (l > E_lo - options.pole_gap && l < hi + options.pole_gap) poles.push_back(l);
  }
  std::sort(poles.begin(), poles.end());
  std::vector<Segment> segments;
  double start = E_lo;
  for (double p : poles) {
    if (p - options.pole_gap > start) segments.push_back({start, p - options.pole_gap});
    start = std::max(start, p + options.pole_gap);
  }
  if (start < hi) segments.push_back({start, hi});

  auto uniform = [&](int n) {
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = E_lo + (hi - E_lo) * i / (n - 1);
    return g;
  };
  scan.grid = uniform(grid_points);
  scan.values.resize(grid_points, std::numeric_limits<double>::quiet_NaN());
  for (int i = 0; i < grid_points; ++i) {
    for (const auto& s : segments) {
      if (scan.grid[i] >= s.lo && scan.grid[i] <= s.hi) {
        scan.values[i] = f(scan.grid[i]);
        break;
      }
    }
  }

  const std::vector<double> fine = uniform((grid_points - 1) * options.refine_factor + 1);
  for (const auto& s : segments) {
    std::vector<double> xs = segment_samples(s, scan.grid);
    std::vector<double> fs(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) fs[i] = f(xs[i]);
    std::vector<double> roots = bracket_roots(f, xs, fs, options.tolerance);

    if (options.refine_factor > 1) {
      std::vector<double> xf = segment_samples(s, fine);
      std::vector<double> ff(xf.size());
      for (std::size_t i = 0; i < xf.size(); ++i) ff[i] = f(xf[i]);
      std::vector<double> finer = bracket_roots(f, xf, ff, options.tolerance);
      if (finer.size() > roots.size()) {
        scan.advisories.push_back("grid too coarse on [" + std::to_string(s.lo) + ", " +
                                  std::to_string(s.hi) + "]: " +
                                  std::to_string(finer.size() - roots.size()) +
                                  " root(s) found only after refinement; rescan with more points");
        roots = std::move(finer);
      }
    }
    for (double r : roots) scan.roots.push_back({r, std::abs(f(r))});
  }
  return scan;
}

std::vector<BicLinePoint> bic_line(const LatticeConfig& cfg, const RegionConfig& region,
                                   const std::vector<double>& momenta, int grid_points,
                                   const BicScanOptions& options, int threads) {
  std::vector<std::vector<BicLinePoint>> found(momenta.size());
  parallel_for(int(momenta.size()), threads, [&](int i) {
    const double K = momenta[i];
    const ChannelEigenBasis basis = solve_channel(cfg, region, BlochChannel::from_momentum(K));
    const BicScan scan = scan_bics(basis, 0.0, 0.5 * K * K, grid_points, options);
    for (const auto& r : scan.roots) {
      if (r.energy > 0.0) found[i].push_back({K, r.energy});
    }
  });
  std::vector<BicLinePoint> out;
  for (const auto& f : found) out.insert(out.end(), f.begin(), f.end());
  return out;
}

ResonanceFunction::ResonanceFunction(const ChannelEigenBasis& basis,
                                     const PoleSearchOptions& options)
    : basis_(&basis), options_(options) {
  if (!(options.re_lo < options.re_hi)) throw InvalidConfig("empty pole search window");
  if (!(options.im_lo < options.im_hi + options.eta)) {
    throw InvalidConfig("empty imaginary range for the pole search");
  }
  reference_ = std::isnan(options.reference_energy) ? 0.5 * (options.re_lo + options.re_hi)
                                                    : options.reference_energy;
  states_ = options.filter.select(basis);
  const double pad = 0.05 * (options.re_hi - options.re_lo) + 0.01;
  for (int j : states_) {
    const double l = basis.eigenvalues(j);
    if (l > options.re_lo - pad && l < options.re_hi + pad) {
      near_.push_back(j);
    } else {
      far_.push_back(j);
    }
  }
}

ModeSet ResonanceFunction::modes(cplx E) const {
  return enumerate_modes_continued(E, basis_->channel, options_.mode_cutoff, basis_->half_cell,
                                   reference_);
}

cplx ResonanceFunction::operator()(cplx E) const {
  const ModeSet ms = modes(E);
  const int m = ms.size();
  const int M = basis_->region.fourier_cutoff;
  const int nn = int(near_.size());
  CVector root_k(2 * m);
  for (int c = 0; c < m; ++c) root_k(c) = root_k(c + m) = std::sqrt(ms.modes[c].k);

  auto surface_row = [&](int j) {
    Eigen::RowVectorXcd row(2 * m);
    for (int c = 0; c < m; ++c) {
      row(c) = basis_->surface_bottom(j, ms.modes[c].nu + M);
      row(c + m) = basis_->surface_top(j, ms.modes[c].nu + M);
    }
    return row;
  };

  CMatrix r_far = CMatrix::Zero(2 * m, 2 * m);
  for (int j : far_) {
    const Eigen::RowVectorXcd p = surface_row(j);
    r_far += (0.5 / (E - basis_->eigenvalues(j))) * p.transpose() * p.conjugate();
  }

  CMatrix bordered(2 * m + nn, 2 * m + nn);
  bordered.topLeftCorner(2 * m, 2 * m) =
      CMatrix::Identity(2 * m, 2 * m) + kI * root_k.asDiagonal() * r_far * root_k.asDiagonal();
  bordered.bottomRightCorner(nn, nn).setZero();
  for (int r = 0; r < nn; ++r) {
    const Eigen::RowVectorXcd p = surface_row(near_[r]);
    bordered.block(0, 2 * m + r, 2 * m, 1) = 0.5 * kI * root_k.asDiagonal() * p.transpose();
    bordered.block(2 * m + r, 0, 1, 2 * m) = -(p.conjugate() * root_k.asDiagonal());
    bordered(2 * m + r, 2 * m + r) = E - basis_->eigenvalues(near_[r]);
  }
  return Eigen::PartialPivLU<CMatrix>(bordered).determinant();
}

cplx ResonanceFunction::amplitude(cplx E) const {
  const ModeSet ms = modes(E);
  ReactionOptions ro;
  ro.filter = options_.filter;
  ro.pole_tolerance = 0.0;
  const ScatteringBlocks s =
      s_matrix(reaction_matrix(*basis_, E, ms, ro), ms, basis_->region.half_width, 0.0);
  const int out = ms.position(options_.amplitude.out_nu);
  const int in = ms.position(options_.amplitude.in_nu);
  if (out < 0 || in < 0) throw InvalidConfig("selected amplitude mode outside the mode cutoff");
  return s.s_full(out + (options_.amplitude.transmitted ? ms.size() : 0), in);
}

std::optional<cplx> refine_pole(const ResonanceFunction& g, cplx guess, double tolerance,
                                int max_iterations) {
  cplx E = guess;
  for (int it = 0; it < max_iterations; ++it) {
    const double h = 1e-7 * std::max(1.0, std::abs(E));
    const cplx g0 = g(E);
    if (g0 == 0.0) return E;
    const cplx dg = (g(E + h) - g(E - h)) / (2.0 * h);
    if (dg == 0.0 || !std::isfinite(std::abs(dg))) return std::nullopt;
    const cplx step = g0 / dg;
    if (!std::isfinite(std::abs(step))) return std::nullopt;
    E -= step;
    if (std::abs(step) < tolerance) return E;
  }
  return std::nullopt;
}

cplx pole_residue(const ResonanceFunction& g, cplx pole, double radius, int points) {
  cplx sum = 0.0;
  for (int k = 0; k < points; ++k) {
    const cplx w = std::polar(radius, 2.0 * kPi * (k + 0.5) / points);
    sum += g.amplitude(pole + w) * w;
  }
  return sum / double(points);
}

namespace {

struct Box {
  double re_lo, re_hi, im_lo, im_hi;
  cplx center() const { return {0.5 * (re_lo + re_hi), 0.5 * (im_lo + im_hi)}; }
  bool contains(cplx z, double margin) const {
    return z.real() >= re_lo - margin && z.real() <= re_hi + margin &&
           z.imag() >= im_lo - margin && z.imag() <= im_hi + margin;
  }
};

constexpr double kMaxPhaseStep = kPi / 4.0;

// Phase change of g along the segment a -> b, subdividing until each step is
// below kMaxPhaseStep. Returns nullopt if a zero sits on the segment.
std::optional<double> edge_phase(const ResonanceFunction& g, cplx a, cplx b) {
  const int initial = 32;
  const double min_step = 1e-12 * std::max(1.0, std::abs(b - a));
  struct Piece {
    cplx za, zb;
    cplx ga, gb;
  };
  std::vector<Piece> stack;
  cplx prev_z = a, prev_g = g(a);
  for (int i = 1; i <= initial; ++i) {
    const cplx z = a + (b - a) * (double(i) / initial);
    const cplx gz = g(z);
    stack.push_back({prev_z, z, prev_g, gz});
    prev_z = z;
    prev_g = gz;
  }
  std::reverse(stack.begin(), stack.end());
  double total = 0.0;
  while (!stack.empty()) {
    Piece p = stack.back();
    stack.pop_back();
    if (p.ga == 0.0 || p.gb == 0.0) return std::nullopt;
    const double d = std::arg(p.gb / p.ga);
    if (std::abs(d) <= kMaxPhaseStep) {
      total += d;
      continue;
    }
    if (std::abs(p.zb - p.za) < min_step) return std::nullopt;
    const cplx zm = 0.5 * (p.za + p.zb);
    const cplx gm = g(zm);
    stack.push_back({zm, p.zb, gm, p.gb});
    stack.push_back({p.za, zm, p.ga, gm});
  }
  return total;
}

std::optional<double> winding(const ResonanceFunction& g, const Box& b) {
  const cplx c[4] = {{b.re_lo, b.im_lo}, {b.re_hi, b.im_lo}, {b.re_hi, b.im_hi}, {b.re_lo, b.im_hi}};
  double total = 0.0;
  for (int e = 0; e < 4; ++e) {
    const auto d = edge_phase(g, c[e], c[(e + 1) % 4]);
    if (!d) return std::nullopt;
    total += *d;
  }
  return total / (2.0 * kPi);
}

}  // namespace

PoleSearch find_poles(const ChannelEigenBasis& basis, const PoleSearchOptions& options) {
  const ResonanceFunction g(basis, options);
  PoleSearch result;
  std::vector<cplx> zeros;

  // split points slightly off-centre so that sub-box edges avoid symmetric zeros
  constexpr double kSplit = 0.5 + 0.0123;

  struct Task {
    Box box;
    int depth;
  };
  std::vector<Task> tasks{{{options.re_lo, options.re_hi, options.im_lo, options.im_hi + options.eta}, 0}};
  bool top_level = true;
  while (!tasks.empty()) {
    const Task t = tasks.back();
    tasks.pop_back();
    const Box& b = t.box;
    auto w = winding(g, b);
    if (!w) {
      // a zero on the contour: shrink the box slightly and retry
      if (t.depth < options.max_depth) {
        const double dr = 1e-3 * (b.re_hi - b.re_lo), di = 1e-3 * (b.im_hi - b.im_lo);
        tasks.push_back({{b.re_lo - dr, b.re_hi + 0.7 * dr, b.im_lo - di, b.im_hi + 0.7 * di},
                         t.depth + 1});
      } else {
        result.diagnostics.push_back("zero on the contour of a sub-box; not resolved");
      }
      continue;
    }
    const double wv = *w;
    const int count = int(std::lround(wv));
    if (top_level) {
      result.winding = count;
      top_level = false;
    }
    if (std::abs(wv - count) > 0.05) {
      result.diagnostics.push_back("non-integer winding number " + std::to_string(wv));
    }
    if (count <= 0) continue;

    if (count == 1) {
      const double width = std::max(b.re_hi - b.re_lo, b.im_hi - b.im_lo);
      bool found = false;
      const cplx starts[3] = {b.center(), {0.5 * (b.re_lo + b.re_hi), b.im_hi},
                              {0.5 * (b.re_lo + b.re_hi), b.im_lo}};
      for (const cplx& s : starts) {
        auto z = refine_pole(g, s, options.newton_tolerance);
        if (z && b.contains(*z, 1e-9 * width)) {
          zeros.push_back(*z);
          found = true;
          break;
        }
      }
      if (found) continue;
    }
    const double rw = b.re_hi - b.re_lo, iw = b.im_hi - b.im_lo;
    if (t.depth >= options.max_depth || std::max(rw, iw) < options.min_depth_width) {
      result.diagnostics.push_back(std::to_string(count) + " zero(s) near " +
                                   std::to_string(b.center().real()) + std::to_string(b.center().imag()) +
                                   "i not isolated at maximum subdivision depth");
      continue;
    }
    // split the longer side (relative to the box aspect) in two
    if (rw >= iw) {
      const double s = b.re_lo + kSplit * rw;
      tasks.push_back({{b.re_lo, s, b.im_lo, b.im_hi}, t.depth + 1});
      tasks.push_back({{s, b.re_hi, b.im_lo, b.im_hi}, t.depth + 1});
    } else {
      const double s = b.im_lo + kSplit * iw;
      tasks.push_back({{b.re_lo, b.re_hi, b.im_lo, s}, t.depth + 1});
      tasks.push_back({{b.re_lo, b.re_hi, s, b.im_hi}, t.depth + 1});
    }
  }

  std::sort(zeros.begin(), zeros.end(),
            [](cplx a, cplx b) { return a.real() < b.real(); });
  for (std::size_t i = 0; i < zeros.size(); ++i) {
    const cplx z = zeros[i];
    if (!(z.imag() < -kBoundLimit)) {
      result.rejected.push_back(z);
      continue;
    }
    double gap = 1e-3;
    for (std::size_t k = 0; k < zeros.size(); ++k) {
      if (k != i) gap = std::min(gap, 0.25 * std::abs(zeros[k] - z));
    }
    const double radius = std::min(gap, 0.5 * std::abs(z.imag()));
    const cplx residue = pole_residue(g, z, radius);
    if (std::abs(residue) <= options.residue_tolerance * std::abs(z.imag())) {
      result.rejected.push_back(z);
      continue;
    }
    const double h = std::max(radius, 1e-8);
    const double scale = std::abs(g(z + h));
    result.poles.push_back({z, residue, scale > 0.0 ? std::abs(g(z)) / scale : 0.0});
  }
  return result;
}

std::vector<PoleTrack> track_poles(const LatticeConfig& cfg, const RegionConfig& region,
                                   const BlochChannel& channel, const std::vector<double>& betas,
                                   const std::vector<cplx>& starts,
                                   const PoleSearchOptions& options, int max_halvings) {
  const int count = int(starts.size());
  std::vector<PoleTrack> tracks(count);
  if (betas.empty() || count == 0) return tracks;
  for (std::size_t i = 1; i < betas.size(); ++i) {
    if (!(betas[i] > betas[i - 1])) throw InvalidConfig("asymmetry values must increase");
  }

  // one eigen-solve per asymmetry value, shared by all live poles
  auto refine_all = [&](double beta, const std::vector<cplx>& guesses,
                        const std::vector<bool>& live) {
    LatticeConfig c = cfg;
    c.asymmetry = beta;
    const ChannelEigenBasis basis = solve_channel(c, region, channel);
    const ResonanceFunction g(basis, options);
    std::vector<std::optional<cplx>> out(count);
    for (int p = 0; p < count; ++p) {
      if (live[p]) out[p] = refine_pole(g, guesses[p], options.newton_tolerance);
    }
    return out;
  };

  std::vector<bool> live(count, true);
  // (beta, E) history per pole for the secant predictor, including inserted steps
  std::vector<std::vector<PoleTrackPoint>> history(count);
  auto first = refine_all(betas.front(), starts, live);
  for (int p = 0; p < count; ++p) {
    if (!first[p] || !(first[p]->imag() < -kBoundLimit)) {
      live[p] = false;
      tracks[p].complete = false;
      tracks[p].diagnostics.push_back("no resonance pole found at beta=" +
                                      std::to_string(betas.front()));
      continue;
    }
    history[p].push_back({betas.front(), *first[p]});
    tracks[p].points.push_back(history[p].back());
  }

  auto predict = [&](int p, double beta) {
    const auto& h = history[p];
    if (h.size() < 2) return h.back().energy;
    const auto& p0 = h[h.size() - 2];
    const auto& p1 = h.back();
    return p1.energy + (p1.energy - p0.energy) * ((beta - p1.beta) / (p1.beta - p0.beta));
  };
  // Without a secant the step size is unknown, so the first move may cover a
  // tenth of the window; the width may not grow by more than a factor of 50.
  auto accept = [&](int p, cplx z, cplx predicted) {
    const cplx last = history[p].back().energy;
    const double first_step =
        history[p].size() < 2 ? 0.1 * (options.re_hi - options.re_lo) : 0.0;
    const double allowed = std::max(
        {0.5 * std::abs(predicted - last), 2.0 * std::abs(last.imag()), first_step, 1e-6});
    return std::abs(z - predicted) <= allowed &&
           std::abs(z.imag()) <= std::max(50.0 * std::abs(last.imag()), 1e-6);
  };

  double current = betas.front();
  for (std::size_t i = 1; i < betas.size(); ++i) {
    const double target = betas[i];
    while (current < target && std::count(live.begin(), live.end(), true) > 0) {
      double step = target - current;
      bool advanced = false;
      for (int halvings = 0; halvings <= max_halvings && !advanced; ++halvings, step *= 0.5) {
        const double beta = current + step;
        std::vector<cplx> predicted(count);
        for (int p = 0; p < count; ++p) {
          if (live[p]) predicted[p] = predict(p, beta);
        }
        auto z = refine_all(beta, predicted, live);
        bool all_ok = true;
        for (int p = 0; p < count; ++p) {
          if (live[p] && !(z[p] && accept(p, *z[p], predicted[p]))) all_ok = false;
        }
        if (!all_ok && halvings < max_halvings) continue;
        for (int p = 0; p < count; ++p) {
          if (!live[p]) continue;
          if (!(z[p] && accept(p, *z[p], predicted[p]))) {
            live[p] = false;
            tracks[p].complete = false;
            tracks[p].diagnostics.push_back("pole tracking lost between beta=" +
                                            std::to_string(history[p].back().beta) +
                                            " and beta=" + std::to_string(beta));
          } else if (!(z[p]->imag() < -kBoundLimit)) {
            live[p] = false;
            tracks[p].complete = false;
            tracks[p].diagnostics.push_back(
                "pole reached the real axis at beta=" + std::to_string(beta) + ", E=" +
                std::to_string(z[p]->real()) + " (bound state below threshold)");
          } else {
            history[p].push_back({beta, *z[p]});
          }
        }
        current = beta;
        advanced = true;
      }
    }
    for (int p = 0; p < count; ++p) {
      if (live[p]) tracks[p].points.push_back(history[p].back());
    }
  }
  return tracks;
}

PoleTrack track_pole(const LatticeConfig& cfg, const RegionConfig& region,
                     const BlochChannel& channel, const std::vector<double>& betas, cplx start,
                     const PoleSearchOptions& options, int max_halvings) {
  return track_poles(cfg, region, channel, betas, {start}, options, max_halvings).front();
}

LifetimeFit lifetime_scaling(const std::vector<PoleTrackPoint>& points, bool partial) {
  std::vector<double> x, y;
  for (const auto& p : points) {
    if (p.beta > 0.0 && p.energy.imag() < -kBoundLimit) {
      x.push_back(std::log(p.beta));
      y.push_back(std::log(-p.energy.imag()));
    }
  }
  if (x.size() < 4) throw InvalidConfig("lifetime fit needs at least four poles");
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (*hi - *lo < std::log(10.0) - 1e-12) {
    throw InvalidConfig("lifetime fit needs asymmetry values spanning a decade");
  }
  const double n = double(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  LifetimeFit fit;
  fit.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double intercept = (sy - fit.exponent * sx) / n;
  fit.prefactor = std::exp(intercept);
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (intercept + fit.exponent * x[i]);
    ss += r * r;
  }
  fit.rms_residual = std::sqrt(ss / n);
  fit.used_points = int(x.size());
  fit.partial = partial;
  return fit;
}

double lifetime_gamma(cplx pole) { return 1.0 / (-pole.imag()); }

double lifetime_tau(cplx pole) { return 1.0 / (-2.0 * pole.imag()); }

}  // namespace bicscat
