#include "bicscat/commands.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "bicscat/csv.hpp"
#include "bicscat/parallel.hpp"
#include "bicscat/reaction_region.hpp"
#include "bicscat/validation.hpp"
#include "json.hpp"

#ifndef BICSCAT_VERSION
#define BICSCAT_VERSION "0.0.0"
#endif

namespace bicscat {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

/// Collects everything the manifest needs while a command runs.
class Run {
 public:
  Run(std::string command, const RunConfig& cfg, const std::string& out_dir)
      : command_(std::move(command)), cfg_(cfg), dir_(out_dir),
        start_(std::chrono::steady_clock::now()) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) {
      throw InvalidConfig("cannot create output directory " + out_dir);
    }
  }

  std::string file(const std::string& name) {
    const std::string path = (dir_ / name).string();
    result.outputs.push_back(path);
    return path;
  }

  void time(const std::string& step) {
    const auto now = std::chrono::steady_clock::now();
    timings_[step] = std::chrono::duration<double>(now - last_).count();
    last_ = now;
  }

  void note(const std::string& line) { result.diagnostics.push_back(line); }
  void say(const std::string& line) { result.summary.push_back(line); }

  json results = json::object();
  CommandResult result;

  CommandResult finish() {
    const std::string config_text = to_json(cfg_);
    json m;
    m["command"] = command_;
    m["version"] = BICSCAT_VERSION;
    m["libraries"] = {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                    std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                    std::to_string(EIGEN_MINOR_VERSION)},
                      {"boost", BOOST_LIB_VERSION},
                      {"compiler", __VERSION__}};
    m["config_hash"] = fnv1a_hex(config_text);
    m["config"] = json::parse(config_text);
    json outputs = json::array();
    for (const auto& o : result.outputs) outputs.push_back(fs::path(o).filename().string());
    m["outputs"] = outputs;
    m["results"] = results;
    m["diagnostics"] = result.diagnostics;
    json t = json::object();
    for (const auto& [k, v] : timings_) t[k] = v;
    t["total"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    m["timings_seconds"] = t;
    m["status"] = result.ok ? "ok" : "failed";
    const std::string path = file(command_ + ".manifest.json");
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InvalidConfig("cannot write " + path);
    out << m.dump(2) << '\n';
    return result;
  }

 private:
  std::string command_;
  const RunConfig& cfg_;
  fs::path dir_;
  std::chrono::steady_clock::time_point start_;
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
  std::map<std::string, double> timings_;
};

LatticeConfig with_asymmetry(const LatticeConfig& cfg, double beta) {
  LatticeConfig c = cfg;
  c.asymmetry = beta;
  return c;
}

void potential_command(const RunConfig& cfg, Run& run) {
  CsvWriter csv(run.file("potential.csv"), {"x", "z", "V"});
  double lowest = std::numeric_limits<double>::infinity();
  for (double x : cfg.potential.x.values()) {
    for (double z : cfg.potential.z.values()) {
      const double v = potential_value(cfg.lattice, x, z);
      lowest = std::min(lowest, v);
      csv.row({x, z, v});
    }
  }
  run.results["minimum"] = lowest;
  run.say("potential minimum on the grid: " + fmt("%.6f", lowest));
  run.time("potential");
}

void bic_line_output(const RunConfig& cfg, Run& run) {
  if (cfg.bic_scan.line.count <= 0) return;
  BicScanOptions bo;
  std::vector<BicLinePoint> line;
  const std::vector<double> momenta = cfg.bic_scan.line.values();
  if (cfg.bic_scan.filter.kind == "all") {
    line = bic_line(cfg.lattice, cfg.region, momenta, cfg.bic_scan.grid_points, bo, cfg.threads);
  } else {
    for (double K : momenta) {
      const ChannelEigenBasis basis =
          solve_channel(cfg.lattice, cfg.region, BlochChannel::from_momentum(K));
      bo.filter = cfg.bic_scan.filter.resolve(basis);
      for (const auto& r : scan_bics(basis, 0.0, 0.5 * K * K, cfg.bic_scan.grid_points, bo).roots) {
        if (r.energy > 0.0) line.push_back({K, r.energy});
      }
    }
  }
  CsvWriter csv(run.file("bic_line.csv"), {"K", "E"});
  for (const auto& p : line) csv.row({p.momentum, p.energy});
  run.results["bic_line_points"] = long(line.size());
  run.say("BIC line: " + std::to_string(line.size()) + " points");
  run.time("bic_line");
}

void bands_command(const RunConfig& cfg, Run& run) {
  CsvWriter csv(run.file("bands.csv"), {"K", "nu", "E"});
  for (const auto& p : band_structure(cfg.bands.k_points, cfg.bands.nu_min, cfg.bands.nu_max,
                                      cfg.lattice.half_cell)) {
    csv.row({p.momentum, long(p.nu), p.energy});
  }
  run.time("bands");
  bic_line_output(cfg, run);
}

void eigens_command(const RunConfig& cfg, Run& run) {
  const auto& task = cfg.eigens;
  CsvWriter spectra(run.file("eigenvalues.csv"), {"K", "L", "j", "E"});
  std::unique_ptr<CsvWriter> tags;
  if (task.classify) {
    tags = std::make_unique<CsvWriter>(
        run.file("classification.csv"),
        std::vector<std::string>{"K", "window_lo", "window_hi", "j", "E", "localized", "parity",
                                 "drift", "core_weight"});
  }
  std::unique_ptr<CsvWriter> waves;
  if (task.localized_wavefunctions || !task.wavefunction_energies.empty()) {
    waves = std::make_unique<CsvWriter>(
        run.file("wavefunctions.csv"),
        std::vector<std::string>{"K", "state_E", "x", "z", "abs", "re", "im"});
  }
  json per_channel = json::array();
  for (double K : task.momenta) {
    const BlochChannel channel = BlochChannel::from_momentum(K);
    std::vector<double> Ls = task.half_widths;
    if (Ls.empty()) Ls = {cfg.region.half_width};
    std::vector<double> wave_energies = task.wavefunction_energies;
    json channel_json{{"K", K}};

    if (task.classify) {
      if (task.windows.empty()) throw InvalidConfig("eigens.windows is empty");
      double lo = task.windows.front().first, hi = task.windows.front().second;
      for (const auto& w : task.windows) {
        lo = std::min(lo, w.first);
        hi = std::max(hi, w.second);
      }
      ClassifyOptions co;
      co.slope_threshold = task.slope_threshold;
      co.core_weight_threshold = task.core_weight_threshold;
      co.threads = cfg.threads;
      const ClassifyResult cls = classify_states(cfg.lattice, cfg.region, channel, Ls, lo, hi, co);
      for (std::size_t s = 0; s < cls.half_widths.size(); ++s) {
        for (Eigen::Index j = 0; j < cls.spectra[s].size(); ++j) {
          if (cls.spectra[s](j) <= task.ceiling) {
            spectra.row({K, cls.half_widths[s], long(j), cls.spectra[s](j)});
          }
        }
      }
      json windows = json::array();
      for (const auto& [wlo, whi] : task.windows) {
        json localized = json::array();
        for (const StateTag& t : cls.tags) {
          if (t.energy < wlo || t.energy >= whi) continue;
          tags->row({K, wlo, whi, long(t.j), t.energy, long(t.localized), to_string(t.parity),
                     t.drift, t.core_weight});
          if (!t.localized) continue;
          localized.push_back({{"E", t.energy}, {"parity", to_string(t.parity)}});
          if (task.localized_wavefunctions) wave_energies.push_back(t.energy);
          run.say("K=" + fmt("%.6f", K) + " localized " + fmt("%.6f", t.energy) + " " +
                  to_string(t.parity));
        }
        windows.push_back({{"lo", wlo}, {"hi", whi}, {"localized", localized}});
      }
      channel_json["reference_L"] = cls.half_widths[cls.reference];
      channel_json["windows"] = windows;
      for (const auto& d : cls.diagnostics) run.note(d);
    } else {
      for (double L : Ls) {
        RegionConfig r = cfg.region;
        r.half_width = L;
        const ChannelEigenBasis b = solve_channel(cfg.lattice, r, channel);
        for (int j = 0; j < b.size(); ++j) {
          if (b.eigenvalues(j) <= task.ceiling) spectra.row({K, L, long(j), b.eigenvalues(j)});
        }
      }
    }
    run.time("spectra K=" + fmt("%.6f", K));

    if (waves && !wave_energies.empty()) {
      const ChannelEigenBasis b = solve_channel(cfg.lattice, cfg.region, channel);
      for (double e : wave_energies) {
        Eigen::Index j = 0;
        (b.eigenvalues.array() - e).abs().minCoeff(&j);
        for (double x : task.x.values()) {
          for (double z : task.z.values()) {
            if (std::abs(z) > cfg.region.half_width) continue;
            const cplx psi = b.wavefunction(int(j), x, z);
            waves->row({K, b.eigenvalues(j), x, z, std::abs(psi), psi.real(), psi.imag()});
          }
        }
      }
      run.time("wavefunctions K=" + fmt("%.6f", K));
    }
    per_channel.push_back(channel_json);
  }
  run.results["channels"] = per_channel;
}

void smatrix_command(const RunConfig& cfg, Run& run) {
  const auto& task = cfg.smatrix;
  CsvWriter amps(run.file("smatrix.csv"), {"beta", "K", "E", "amplitude", "abs", "re", "im"});
  CsvWriter unit(run.file("unitarity.csv"), {"beta", "K", "E", "open_modes", "defect"});
  std::vector<double> betas = task.betas;
  if (betas.empty()) betas = {cfg.lattice.asymmetry};
  double worst = 0.0;
  long failures = 0;
  for (double beta : betas) {
    for (double K : task.momenta) {
      const ChannelEigenBasis basis =
          solve_channel(with_asymmetry(cfg.lattice, beta), cfg.region, BlochChannel::from_momentum(K));
      ReactionOptions ro;
      ro.filter = task.filter.resolve(basis);
      const std::vector<double> grid =
          avoid_eigenvalues(task.energies.values(), basis.eigenvalues, 1e-6);
      std::vector<std::optional<ScatteringBlocks>> blocks(grid.size());
      std::vector<std::string> errors(grid.size());
      parallel_for(int(grid.size()), cfg.threads, [&](int i) {
        try {
          blocks[i] = scatter(basis, grid[i], task.mode_cutoff, ro);
        } catch (const NumericalError& e) {
          errors[i] = e.what();
        }
      });
      for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!blocks[i]) {
          ++failures;
          run.note("beta=" + fmt("%g", beta) + " K=" + fmt("%.6f", K) + " E=" +
                   fmt("%.10f", grid[i]) + ": " + errors[i]);
          continue;
        }
        const ScatteringBlocks& sb = *blocks[i];
        for (const Amplitude& a : reflection_coefficients(sb, Side::bottom)) {
          amps.row({beta, K, grid[i], a.label, std::abs(a.value), a.value.real(), a.value.imag()});
        }
        const double d = unitarity_defect(sb.s_prop);
        worst = std::max(worst, d);
        unit.row({beta, K, grid[i], long(sb.modes.propagating_count()), d});
      }
      run.time("smatrix beta=" + fmt("%g", beta) + " K=" + fmt("%.6f", K));
    }
  }
  run.results["max_unitarity_defect"] = worst;
  run.results["failed_energies"] = failures;
  run.say("max unitarity defect " + fmt("%.3e", worst));
  if (failures > 0) run.result.ok = false;
}

void bic_scan_command(const RunConfig& cfg, Run& run) {
  const auto& task = cfg.bic_scan;
  CsvWriter det(run.file("det_hbd.csv"), {"K", "E", "det"});
  CsvWriter roots(run.file("bic_roots.csv"),
                  {"K", "E", "residual", "threshold", "E_enriched", "shift"});
  json found = json::array();
  for (double K : task.momenta) {
    const BlochChannel channel = BlochChannel::from_momentum(K);
    const ChannelEigenBasis basis = solve_channel(cfg.lattice, cfg.region, channel);
    BicScanOptions bo;
    bo.filter = task.filter.resolve(basis);
    const double threshold = 0.5 * K * K;
    const BicScan scan = scan_bics(basis, task.energy_min, threshold, task.grid_points, bo);
    for (std::size_t i = 0; i < scan.grid.size(); ++i) det.row({K, scan.grid[i], scan.values[i]});
    for (const auto& a : scan.advisories) run.note("K=" + fmt("%.6f", K) + ": " + a);

    std::vector<BicRoot> enriched;
    if (task.enrichment_check) {
      RegionConfig r = cfg.region;
      r.fourier_cutoff += 2;
      r.transverse_cutoff += 10;
      const ChannelEigenBasis richer = solve_channel(cfg.lattice, r, channel);
      BicScanOptions ro = bo;
      ro.filter = task.filter.resolve(richer);
      enriched = scan_bics(richer, task.energy_min, threshold, task.grid_points, ro).roots;
    }
    for (const BicRoot& root : scan.roots) {
      double partner = std::numeric_limits<double>::quiet_NaN();
      for (const BicRoot& e : enriched) {
        if (std::isnan(partner) || std::abs(e.energy - root.energy) < std::abs(partner - root.energy)) {
          partner = e.energy;
        }
      }
      roots.row({K, root.energy, root.residual, threshold, partner, partner - root.energy});
      if (root.energy > 0.0) {
        found.push_back({{"K", K}, {"E", root.energy}, {"E_enriched", partner}});
        run.say("K=" + fmt("%.6f", K) + " BIC at E=" + fmt("%.6f", root.energy) +
                " (threshold " + fmt("%.6f", threshold) + ")");
      }
    }
    run.time("scan K=" + fmt("%.6f", K));
  }
  run.results["positive_roots"] = found;
  bic_line_output(cfg, run);
}

PoleSearchOptions pole_options(const PolesTask& task) {
  PoleSearchOptions o;
  o.re_lo = task.re_lo;
  o.re_hi = task.re_hi;
  o.im_lo = task.im_lo;
  o.im_hi = task.im_hi;
  o.eta = task.eta;
  o.mode_cutoff = task.mode_cutoff;
  o.amplitude = task.amplitude;
  return o;
}

void poles_command(const RunConfig& cfg, Run& run) {
  const auto& task = cfg.poles;
  const BlochChannel channel = BlochChannel::from_momentum(task.momentum);
  CsvWriter table(run.file("poles.csv"),
                  {"beta", "re", "im", "residue_abs", "gamma", "tau", "winding"});
  json searches = json::array();
  for (double beta : task.betas) {
    const ChannelEigenBasis basis =
        solve_channel(with_asymmetry(cfg.lattice, beta), cfg.region, channel);
    PoleSearchOptions o = pole_options(task);
    o.filter = task.filter.resolve(basis);
    const PoleSearch s = find_poles(basis, o);
    json poles = json::array();
    for (const Pole& p : s.poles) {
      table.row({beta, p.energy.real(), p.energy.imag(), std::abs(p.residue),
                 lifetime_gamma(p.energy), lifetime_tau(p.energy), long(s.winding)});
      poles.push_back(complex_json(p.energy));
    }
    for (const auto& d : s.diagnostics) run.note("beta=" + fmt("%g", beta) + ": " + d);
    searches.push_back({{"beta", beta}, {"winding", s.winding}, {"poles", poles},
                        {"real_zeros", json::array()}});
    for (cplx z : s.rejected) searches.back()["real_zeros"].push_back(complex_json(z));
    run.say("beta=" + fmt("%g", beta) + ": " + std::to_string(s.poles.size()) + " pole(s)");
    run.time("poles beta=" + fmt("%g", beta));
  }
  run.results["searches"] = searches;

  if (task.track_betas.empty()) return;
  const double b0 = task.track_betas.front();
  const ChannelEigenBasis basis = solve_channel(with_asymmetry(cfg.lattice, b0), cfg.region, channel);
  PoleSearchOptions o = pole_options(task);
  o.filter = task.filter.resolve(basis);
  std::vector<cplx> starts;
  for (const Pole& p : find_poles(basis, o).poles) {
    if (p.energy.imag() > task.track_im_floor) starts.push_back(p.energy);
  }
  if (starts.empty()) {
    run.note("no pole above Im E = " + fmt("%g", task.track_im_floor) + " at beta=" + fmt("%g", b0));
    run.result.ok = false;
    return;
  }
  const std::vector<PoleTrack> tracks =
      track_poles(cfg.lattice, cfg.region, channel, task.track_betas, starts, o);
  CsvWriter csv(run.file("pole_tracks.csv"),
                {"pole", "beta", "re", "im", "scaled_width", "gamma", "tau"});
  json fits = json::array();
  for (std::size_t p = 0; p < tracks.size(); ++p) {
    for (const auto& pt : tracks[p].points) {
      csv.row({long(p), pt.beta, pt.energy.real(), pt.energy.imag(),
               -pt.energy.imag() / (pt.beta * pt.beta), lifetime_gamma(pt.energy),
               lifetime_tau(pt.energy)});
    }
    for (const auto& d : tracks[p].diagnostics) run.note("pole " + std::to_string(p) + ": " + d);
    json f{{"start", complex_json(starts[p])}, {"complete", tracks[p].complete}};
    try {
      const LifetimeFit fit = lifetime_scaling(tracks[p].points, !tracks[p].complete);
      f["prefactor"] = fit.prefactor;
      f["exponent"] = fit.exponent;
      f["rms_residual"] = fit.rms_residual;
      f["used_points"] = fit.used_points;
      run.say("pole " + std::to_string(p) + " near " + fmt("%.4f", starts[p].real()) +
              ": -Im E = " + fmt("%.4f", fit.prefactor) + " beta^" + fmt("%.4f", fit.exponent) +
              (tracks[p].complete ? "" : " (partial track)"));
    } catch (const InvalidConfig& e) {
      f["fit_error"] = e.what();
      run.note("pole " + std::to_string(p) + ": " + e.what());
    }
    fits.push_back(f);
  }
  run.results["tracks"] = fits;
  run.time("tracking");
}

void validate_command(const RunConfig& cfg, Run& run) {
  ValidationOptions vo;
  vo.finite_difference = cfg.validate_task.finite_difference;
  vo.fd_spacing = cfg.validate_task.fd_spacing;
  vo.threads = cfg.threads;
  const std::vector<ValidationCheck> checks = run_validation(cfg.lattice, cfg.region, vo);
  CsvWriter csv(run.file("validation.csv"), {"check", "measured", "tolerance", "passed"});
  json table = json::array();
  for (const auto& c : checks) {
    csv.row({"\"" + c.name + "\"", c.measured, c.tolerance, long(c.passed)});
    table.push_back({{"check", c.name}, {"measured", c.measured}, {"tolerance", c.tolerance},
                     {"passed", c.passed}});
    char line[160];
    std::snprintf(line, sizeof line, "%-4s %-48s %.3e (tol %.0e)", c.passed ? "ok" : "FAIL",
                  c.name.c_str(), c.measured, c.tolerance);
    run.say(line);
    if (!c.passed) run.result.ok = false;
  }
  run.results["checks"] = table;
  run.time("validation");
}

}  // namespace

std::vector<std::string> command_names() {
  return {"potential", "bands", "eigens", "smatrix", "bic-scan", "poles", "validate"};
}

CommandResult run_command(const std::string& command, const RunConfig& cfg,
                          const std::string& out_dir) {
  cfg.validate();
  Run run(command, cfg, out_dir);
  if (command == "potential") {
    potential_command(cfg, run);
  } else if (command == "bands") {
    bands_command(cfg, run);
  } else if (command == "eigens") {
    eigens_command(cfg, run);
  } else if (command == "smatrix") {
    smatrix_command(cfg, run);
  } else if (command == "bic-scan") {
    bic_scan_command(cfg, run);
  } else if (command == "poles") {
    poles_command(cfg, run);
  } else if (command == "validate") {
    validate_command(cfg, run);
  } else {
    throw InvalidConfig("unknown command '" + command + "'");
  }
  return run.finish();
}

}  // namespace bicscat
