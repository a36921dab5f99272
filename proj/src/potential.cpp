#include "bicscat/potential.hpp"

#include <algorithm>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bicscat/bloch_basis.hpp"

namespace bicscat {

double LatticeConfig::nome() const {
  return std::exp(-theta_width * theta_width * kPi * kPi / (2.0 * half_cell * half_cell));
}

int LatticeConfig::truncation() const {
  return theta_truncation > 0 ? theta_truncation : theta_terms_for(nome());
}

double LatticeConfig::amplitude() const {
  return -0.5 * well_depth * half_cell / (std::sqrt(2.0 * kPi) * gauss_width);
}

void LatticeConfig::validate() const {
  if (!(well_depth >= 0.0)) throw InvalidConfig("well_depth must be non-negative");
  if (!(theta_width > 0.0)) throw InvalidConfig("theta_width must be positive");
  if (!(gauss_width > 0.0)) throw InvalidConfig("gauss_width must be positive");
  if (!(half_cell > 0.0)) throw InvalidConfig("half_cell must be positive");
  if (!std::isfinite(asymmetry)) throw InvalidConfig("asymmetry must be finite");
  if (theta_truncation < 0) throw InvalidConfig("theta_truncation must be >= 0");
  const double q = nome();
  if (theta_truncation > 0) {
    const double dropped = std::pow(q, double(theta_truncation + 1) * (theta_truncation + 1));
    if (dropped >= 1e-14) {
      throw InvalidConfig("theta_truncation too small: dropped term " + std::to_string(dropped));
    }
  }
}

bool operator==(const LatticeConfig& a, const LatticeConfig& b) {
  return a.well_depth == b.well_depth && a.theta_width == b.theta_width &&
         a.gauss_width == b.gauss_width && a.half_cell == b.half_cell &&
         a.asymmetry == b.asymmetry && a.theta_truncation == b.theta_truncation;
}

int theta_terms_for(double q, double cutoff) {
  if (q < 0.0 || q >= 1.0) throw DomainError("theta nome must lie in [0, 1)");
  if (q == 0.0) return 1;
  const double log_q = std::log(q);
  int terms = 1;
  while (double(terms + 1) * (terms + 1) * log_q >= std::log(cutoff)) ++terms;
  return terms;
}

double theta3(double u, double q, int terms) {
  if (!(q >= 0.0 && q < 1.0)) throw DomainError("theta nome must lie in [0, 1)");
  double sum = 0.0;
  for (int n = terms; n >= 1; --n) {
    sum += std::pow(q, double(n) * n) * std::cos(2.0 * n * u);
  }
  return 1.0 + 2.0 * sum;
}

double theta3(double u, double q) { return theta3(u, q, theta_terms_for(q)); }

double potential_value(const LatticeConfig& cfg, double x, double z) {
  const double a = cfg.half_cell;
  const double q = cfg.nome();
  const int terms = cfg.truncation();
  const double s2 = 2.0 * cfg.gauss_width * cfg.gauss_width;
  double v = theta3(kPi * x / (2.0 * a), q, terms) * std::exp(-z * z / s2);
  if (cfg.asymmetry != 0.0) {
    const double dz = z + cfg.offset_z();
    v += cfg.asymmetry * theta3(kPi * (x - cfg.offset_x()) / (2.0 * a), q, terms) *
         std::exp(-dz * dz / s2);
  }
  return cfg.amplitude() * v;
}

TransverseOverlaps::TransverseOverlaps(double sigma, double center, double half_width,
                                       int n_max, double tolerance)
    : matrix_(n_max + 1, n_max + 1) {
  using boost::math::quadrature::gauss_kronrod;
  const double L = half_width;
  const double s2 = 2.0 * sigma * sigma;

  // Break points every sigma/2 across the Gaussian core; the tails are one panel each.
  std::vector<double> cuts{-L};
  const double core_lo = std::max(-L, center - 12.0 * sigma);
  const double core_hi = std::min(L, center + 12.0 * sigma);
  if (core_lo < core_hi) {
    const int panels = std::max(1, int(std::ceil((core_hi - core_lo) / (0.5 * sigma))));
    for (int i = 0; i <= panels; ++i) cuts.push_back(core_lo + (core_hi - core_lo) * i / panels);
  }
  cuts.push_back(L);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  // cosine moments I_m = int G(z) cos(m pi (z + L) / 2L) dz, m = 0..2 n_max
  std::vector<double> moments(2 * n_max + 1);
  for (int m = 0; m <= 2 * n_max; ++m) {
    const double w = m * kPi / (2.0 * L);
    auto f = [&](double z) { return std::exp(-(z - center) * (z - center) / s2) * std::cos(w * (z + L)); };
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      double err = 0.0;
      total += gauss_kronrod<double, 31>::integrate(f, cuts[i], cuts[i + 1], 12, tolerance, &err);
      error_ = std::max(error_, err);
    }
    moments[m] = total;
  }

  const double inv_L = 1.0 / L;
  for (int i = 0; i <= n_max; ++i) {
    for (int j = 0; j <= n_max; ++j) {
      double v;
      if (i == 0 && j == 0) {
        v = moments[0] / (2.0 * L);
      } else if (i == 0 || j == 0) {
        v = moments[std::max(i, j)] * std::sqrt(0.5) * inv_L;
      } else {
        v = 0.5 * (moments[std::abs(i - j)] + moments[i + j]) * inv_L;
      }
      matrix_(i, j) = v;
    }
  }
}

ChannelPotential::ChannelPotential(const LatticeConfig& cfg, const RegionConfig& region)
    : lattice_(cfg),
      fourier_cutoff_(region.fourier_cutoff),
      transverse_cutoff_(region.transverse_cutoff),
      primary_(cfg.gauss_width, 0.0, region.half_width, region.transverse_cutoff),
      secondary_(cfg.gauss_width, -cfg.offset_z(), region.half_width,
                 cfg.asymmetry != 0.0 ? region.transverse_cutoff : 0) {}

double ChannelPotential::x_coefficient(int d) const {
  const int ad = std::abs(d);
  if (ad > lattice_.truncation()) return 0.0;
  return std::pow(lattice_.nome(), double(ad) * ad);
}

cplx ChannelPotential::element(int nu1, int n1, int nu2, int n2) const {
  const int d = nu1 - nu2;
  const double xc = x_coefficient(d);
  cplx v = lattice_.amplitude() * xc * primary_(n1, n2);
  if (lattice_.asymmetry != 0.0) {
    const double phase = -d * kPi * lattice_.offset_x() / lattice_.half_cell;
    v += lattice_.asymmetry * lattice_.amplitude() * xc * secondary_(n1, n2) *
         std::polar(1.0, phase);
  }
  return v;
}

CMatrix ChannelPotential::dense() const {
  const int modes = 2 * fourier_cutoff_ + 1;
  const int nz = transverse_cutoff_ + 1;
  CMatrix out(modes * nz, modes * nz);
  for (int a = 0; a < modes; ++a) {
    for (int b = 0; b < modes; ++b) {
      const int d = a - b;
      const double xc = x_coefficient(d);
      const cplx phase = std::polar(1.0, -d * kPi * lattice_.offset_x() / lattice_.half_cell);
      for (int i = 0; i < nz; ++i) {
        for (int j = 0; j < nz; ++j) {
          cplx v = lattice_.amplitude() * xc * primary_(i, j);
          if (lattice_.asymmetry != 0.0) {
            v += lattice_.asymmetry * lattice_.amplitude() * xc * secondary_(i, j) * phase;
          }
          out(a * nz + i, b * nz + j) = v;
        }
      }
    }
  }
  return out;
}

cplx channel_matrix_element(const LatticeConfig& cfg, const RegionConfig& region,
                            const BlochChannel&, int nu1, int n1, int nu2, int n2) {
  if (n1 < 0 || n2 < 0) throw InvalidConfig("transverse indices must be non-negative");
  RegionConfig local = region;
  local.transverse_cutoff = std::max({region.transverse_cutoff, n1, n2});
  return ChannelPotential(cfg, local).element(nu1, n1, nu2, n2);
}

}  // namespace bicscat
