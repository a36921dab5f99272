#include "bicscat/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace bicscat {

using json = nlohmann::ordered_json;

std::vector<double> Grid::values() const {
  std::vector<double> out(std::max(count, 0));
  for (int i = 0; i < count; ++i) {
    out[i] = count == 1 ? from : from + (to - from) * double(i) / double(count - 1);
  }
  return out;
}

void Grid::validate(const std::string& name) const {
  if (!std::isfinite(from) || !std::isfinite(to)) throw InvalidConfig(name + ": grid ends must be finite");
  if (count < 1) throw InvalidConfig(name + ": grid needs at least one point");
  if (count > 1 && !(to > from)) throw InvalidConfig(name + ": grid must increase");
}

bool operator==(const Grid& a, const Grid& b) {
  return a.from == b.from && a.to == b.to && a.count == b.count;
}

StateFilter FilterSpec::resolve(const ChannelEigenBasis& basis) const {
  if (kind == "all") return StateFilter::all();
  if (kind == "below") return StateFilter::below(ceiling);
  std::vector<int> states;
  if (kind == "lowest") {
    for (int j = 0; j < std::min(count, basis.size()); ++j) states.push_back(j);
  } else {
    for (double e : energies) {
      Eigen::Index j = 0;
      (basis.eigenvalues.array() - e).abs().minCoeff(&j);
      if (std::find(states.begin(), states.end(), int(j)) == states.end()) states.push_back(int(j));
    }
    std::sort(states.begin(), states.end());
  }
  return StateFilter::listed(states);
}

void FilterSpec::validate() const {
  if (kind == "all" || kind == "below") return;
  if (kind == "lowest") {
    if (count < 1) throw InvalidConfig("state_filter lowest needs count >= 1");
    return;
  }
  if (kind == "nearest") {
    if (energies.empty()) throw InvalidConfig("state_filter nearest needs energies");
    return;
  }
  throw InvalidConfig("unknown state_filter kind '" + kind + "'");
}

bool operator==(const FilterSpec& a, const FilterSpec& b) {
  return a.kind == b.kind && a.ceiling == b.ceiling && a.count == b.count &&
         a.energies == b.energies;
}

namespace {

void require_finite(double v, const std::string& name) {
  if (!std::isfinite(v)) throw InvalidConfig(name + " must be finite");
}

void require_increasing(const std::vector<double>& v, const std::string& name) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) throw InvalidConfig(name + " must be strictly increasing");
  }
}

}  // namespace

void RunConfig::validate() const {
  lattice.validate();
  region.validate();
  if (threads < 1) throw InvalidConfig("threads must be at least 1");

  potential.x.validate("potential.x");
  potential.z.validate("potential.z");

  if (bands.k_points < 2) throw InvalidConfig("bands.k_points must be at least 2");
  if (bands.nu_min > bands.nu_max) throw InvalidConfig("bands.nu_min exceeds bands.nu_max");

  if (eigens.momenta.empty()) throw InvalidConfig("eigens.momenta is empty");
  for (double L : eigens.half_widths) {
    if (!(L > 0.0)) throw InvalidConfig("eigens.half_widths must be positive");
  }
  require_increasing(eigens.half_widths, "eigens.half_widths");
  for (const auto& [lo, hi] : eigens.windows) {
    if (!(hi > lo)) throw InvalidConfig("eigens.windows must have lo < hi");
  }
  eigens.x.validate("eigens.x");
  eigens.z.validate("eigens.z");

  if (smatrix.momenta.empty()) throw InvalidConfig("smatrix.momenta is empty");
  for (double b : smatrix.betas) require_finite(b, "smatrix.betas");
  smatrix.energies.validate("smatrix.energies");
  if (!(smatrix.energies.from > 0.0)) throw InvalidConfig("smatrix energies must be positive");
  if (smatrix.mode_cutoff < 0 || smatrix.mode_cutoff > region.fourier_cutoff) {
    throw InvalidConfig("smatrix.mode_cutoff must lie in [0, fourier_cutoff]");
  }
  smatrix.filter.validate();

  require_finite(bic_scan.energy_min, "bic_scan.energy_min");
  if (bic_scan.grid_points < 2) throw InvalidConfig("bic_scan.grid_points must be at least 2");
  if (bic_scan.line.count > 0) bic_scan.line.validate("bic_scan.line");
  bic_scan.filter.validate();

  if (!(poles.re_hi > poles.re_lo)) throw InvalidConfig("poles: re_hi must exceed re_lo");
  if (!(poles.im_hi > poles.im_lo)) throw InvalidConfig("poles: im_hi must exceed im_lo");
  if (!(poles.eta > 0.0)) throw InvalidConfig("poles.eta must be positive");
  if (poles.mode_cutoff < 0 || poles.mode_cutoff > region.fourier_cutoff) {
    throw InvalidConfig("poles.mode_cutoff must lie in [0, fourier_cutoff]");
  }
  if (std::abs(poles.amplitude.out_nu) > poles.mode_cutoff ||
      std::abs(poles.amplitude.in_nu) > poles.mode_cutoff) {
    throw InvalidConfig("poles.amplitude modes must lie within the mode cutoff");
  }
  poles.filter.validate();
  require_increasing(poles.track_betas, "poles.track_betas");

  if (!(validate_task.fd_spacing > 0.0)) throw InvalidConfig("validate.fd_spacing must be positive");
}

bool operator==(const RunConfig& a, const RunConfig& b) { return to_json(a) == to_json(b); }

namespace {

json grid_json(const Grid& g) { return {{"from", g.from}, {"to", g.to}, {"count", g.count}}; }

json filter_json(const FilterSpec& f) {
  json j{{"kind", f.kind}};
  if (f.kind == "below") j["ceiling"] = f.ceiling;
  if (f.kind == "lowest") j["count"] = f.count;
  if (f.kind == "nearest") j["energies"] = f.energies;
  return j;
}

// Strict reader: every key of `j` must be consumed by a get() call before done().
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw InvalidConfig(path_ + " must be an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw InvalidConfig(path_ + "." + key + ": " + e.what());
    }
  }

  void grid(const char* key, Grid& g) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    Section s(j_.at(key), path_ + "." + key);
    s.get("from", g.from);
    s.get("to", g.to);
    s.get("count", g.count);
    s.done();
  }

  void filter(const char* key, FilterSpec& f) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    if (v.is_string()) {
      f = FilterSpec{};
      f.kind = v.get<std::string>();
      return;
    }
    Section s(v, path_ + "." + key);
    s.get("kind", f.kind);
    s.get("ceiling", f.ceiling);
    s.get("count", f.count);
    s.get("energies", f.energies);
    s.done();
  }

  bool has(const char* key) const { return j_.contains(key); }

  Section sub(const char* key) {
    seen_.insert(key);
    static const json empty = json::object();
    return Section(j_.contains(key) ? j_.at(key) : empty, path_ + "." + key);
  }

  void done() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) throw InvalidConfig("unknown key " + path_ + "." + item.key());
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace

std::string to_json(const RunConfig& c) {
  json j;
  j["lattice"] = {{"well_depth", c.lattice.well_depth},
                  {"theta_width", c.lattice.theta_width},
                  {"gauss_width", c.lattice.gauss_width},
                  {"half_cell", c.lattice.half_cell},
                  {"asymmetry", c.lattice.asymmetry},
                  {"theta_truncation", c.lattice.theta_truncation}};
  j["region"] = {{"half_width", c.region.half_width},
                 {"cell_count", c.region.cell_count},
                 {"fourier_cutoff", c.region.fourier_cutoff},
                 {"transverse_cutoff", c.region.transverse_cutoff}};
  j["threads"] = c.threads;
  j["potential"] = {{"x", grid_json(c.potential.x)}, {"z", grid_json(c.potential.z)}};
  j["bands"] = {{"k_points", c.bands.k_points},
                {"nu_min", c.bands.nu_min},
                {"nu_max", c.bands.nu_max}};
  json windows = json::array();
  for (const auto& [lo, hi] : c.eigens.windows) windows.push_back({lo, hi});
  j["eigens"] = {{"momenta", c.eigens.momenta},
                 {"half_widths", c.eigens.half_widths},
                 {"windows", windows},
                 {"ceiling", c.eigens.ceiling},
                 {"classify", c.eigens.classify},
                 {"slope_threshold", c.eigens.slope_threshold},
                 {"core_weight_threshold", c.eigens.core_weight_threshold},
                 {"wavefunction_energies", c.eigens.wavefunction_energies},
                 {"localized_wavefunctions", c.eigens.localized_wavefunctions},
                 {"x", grid_json(c.eigens.x)},
                 {"z", grid_json(c.eigens.z)}};
  j["smatrix"] = {{"momenta", c.smatrix.momenta},
                  {"betas", c.smatrix.betas},
                  {"energies", grid_json(c.smatrix.energies)},
                  {"mode_cutoff", c.smatrix.mode_cutoff},
                  {"state_filter", filter_json(c.smatrix.filter)}};
  j["bic_scan"] = {{"momenta", c.bic_scan.momenta},
                   {"energy_min", c.bic_scan.energy_min},
                   {"grid_points", c.bic_scan.grid_points},
                   {"state_filter", filter_json(c.bic_scan.filter)},
                   {"line", grid_json(c.bic_scan.line)},
                   {"enrichment_check", c.bic_scan.enrichment_check}};
  j["poles"] = {{"momentum", c.poles.momentum},
                {"betas", c.poles.betas},
                {"re_lo", c.poles.re_lo},
                {"re_hi", c.poles.re_hi},
                {"im_lo", c.poles.im_lo},
                {"im_hi", c.poles.im_hi},
                {"eta", c.poles.eta},
                {"mode_cutoff", c.poles.mode_cutoff},
                {"amplitude",
                 {{"out_nu", c.poles.amplitude.out_nu},
                  {"in_nu", c.poles.amplitude.in_nu},
                  {"transmitted", c.poles.amplitude.transmitted}}},
                {"state_filter", filter_json(c.poles.filter)},
                {"track_betas", c.poles.track_betas},
                {"track_im_floor", c.poles.track_im_floor}};
  j["validate"] = {{"finite_difference", c.validate_task.finite_difference},
                   {"fd_spacing", c.validate_task.fd_spacing}};
  return j.dump(2) + "\n";
}

RunConfig config_from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidConfig(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  Section top(root, "config");
  {
    Section s = top.sub("lattice");
    s.get("well_depth", c.lattice.well_depth);
    s.get("theta_width", c.lattice.theta_width);
    s.get("gauss_width", c.lattice.gauss_width);
    s.get("half_cell", c.lattice.half_cell);
    s.get("asymmetry", c.lattice.asymmetry);
    s.get("theta_truncation", c.lattice.theta_truncation);
    s.done();
  }
  {
    Section s = top.sub("region");
    s.get("half_width", c.region.half_width);
    s.get("cell_count", c.region.cell_count);
    s.get("fourier_cutoff", c.region.fourier_cutoff);
    s.get("transverse_cutoff", c.region.transverse_cutoff);
    s.done();
  }
  top.get("threads", c.threads);
  {
    Section s = top.sub("potential");
    s.grid("x", c.potential.x);
    s.grid("z", c.potential.z);
    s.done();
  }
  {
    Section s = top.sub("bands");
    s.get("k_points", c.bands.k_points);
    s.get("nu_min", c.bands.nu_min);
    s.get("nu_max", c.bands.nu_max);
    s.done();
  }
  {
    Section s = top.sub("eigens");
    s.get("momenta", c.eigens.momenta);
    s.get("half_widths", c.eigens.half_widths);
    if (s.has("windows")) {
      std::vector<std::vector<double>> windows;
      s.get("windows", windows);
      c.eigens.windows.clear();
      for (const auto& w : windows) {
        if (w.size() != 2) throw InvalidConfig("eigens.windows entries must be [lo, hi]");
        c.eigens.windows.emplace_back(w[0], w[1]);
      }
    }
    s.get("ceiling", c.eigens.ceiling);
    s.get("classify", c.eigens.classify);
    s.get("slope_threshold", c.eigens.slope_threshold);
    s.get("core_weight_threshold", c.eigens.core_weight_threshold);
    s.get("wavefunction_energies", c.eigens.wavefunction_energies);
    s.get("localized_wavefunctions", c.eigens.localized_wavefunctions);
    s.grid("x", c.eigens.x);
    s.grid("z", c.eigens.z);
    s.done();
  }
  {
    Section s = top.sub("smatrix");
    s.get("momenta", c.smatrix.momenta);
    s.get("betas", c.smatrix.betas);
    s.grid("energies", c.smatrix.energies);
    s.get("mode_cutoff", c.smatrix.mode_cutoff);
    s.filter("state_filter", c.smatrix.filter);
    s.done();
  }
  {
    Section s = top.sub("bic_scan");
    s.get("momenta", c.bic_scan.momenta);
    s.get("energy_min", c.bic_scan.energy_min);
    s.get("grid_points", c.bic_scan.grid_points);
    s.filter("state_filter", c.bic_scan.filter);
    s.grid("line", c.bic_scan.line);
    s.get("enrichment_check", c.bic_scan.enrichment_check);
    s.done();
  }
  {
    Section s = top.sub("poles");
    s.get("momentum", c.poles.momentum);
    s.get("betas", c.poles.betas);
    s.get("re_lo", c.poles.re_lo);
    s.get("re_hi", c.poles.re_hi);
    s.get("im_lo", c.poles.im_lo);
    s.get("im_hi", c.poles.im_hi);
    s.get("eta", c.poles.eta);
    s.get("mode_cutoff", c.poles.mode_cutoff);
    {
      Section a = s.sub("amplitude");
      a.get("out_nu", c.poles.amplitude.out_nu);
      a.get("in_nu", c.poles.amplitude.in_nu);
      a.get("transmitted", c.poles.amplitude.transmitted);
      a.done();
    }
    s.filter("state_filter", c.poles.filter);
    s.get("track_betas", c.poles.track_betas);
    s.get("track_im_floor", c.poles.track_im_floor);
    s.done();
  }
  {
    Section s = top.sub("validate");
    s.get("finite_difference", c.validate_task.finite_difference);
    s.get("fd_spacing", c.validate_task.fd_spacing);
    s.done();
  }
  top.done();
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot read config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return config_from_json(text.str());
}

namespace {

constexpr double kFirstThreshold = kPi * kPi / 2.0;

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (int i = 1; i <= 12; ++i) out.push_back("paper-fig" + std::to_string(i));
  return out;
}

std::pair<std::string, RunConfig> preset(const std::string& name) {
  RunConfig c;
  const std::pair<double, double> first{0.0, kFirstThreshold};
  const std::pair<double, double> second{kFirstThreshold, 4.0 * kFirstThreshold};
  const std::vector<double> quartet{9.9707, 10.1369, 16.6538, 16.7215};

  if (name == "paper-fig1") return {"potential", c};
  if (name == "paper-fig2") {
    c.bic_scan.momenta.clear();
    c.bic_scan.line = Grid{0.05, 1.5, 30};
    c.bic_scan.energy_min = 0.0;
    return {"bands", c};
  }
  if (name == "paper-fig3") {
    c.eigens.windows = {first};
    c.eigens.ceiling = kFirstThreshold;
    return {"eigens", c};
  }
  if (name == "paper-fig4" || name == "paper-fig5") {
    c.region.half_width = name == "paper-fig4" ? 3.0 : 5.0;
    if (name == "paper-fig5") c.region.transverse_cutoff = 67;
    c.eigens.windows = {first};
    c.eigens.ceiling = kFirstThreshold;
    c.eigens.localized_wavefunctions = true;
    c.eigens.wavefunction_energies = name == "paper-fig4" ? std::vector<double>{2.30026}
                                                          : std::vector<double>{2.797};
    c.eigens.z = Grid{-c.region.half_width, c.region.half_width, 121};
    return {"eigens", c};
  }
  if (name == "paper-fig6" || name == "paper-fig7") {
    c.bic_scan.momenta = name == "paper-fig6" ? std::vector<double>{kPi / 3.0}
                                              : std::vector<double>{kPi / 3.0, 2.0 * kPi / 5.0};
    return {"bic-scan", c};
  }
  if (name == "paper-fig8") {
    c.poles.betas = {0.0, 0.01};
    c.poles.im_lo = -0.05;
    return {"poles", c};
  }
  if (name == "paper-fig9") {
    c.poles.betas = {};
    c.poles.track_betas = {0.005, 0.0075, 0.01, 0.015, 0.02, 0.03, 0.04, 0.06, 0.08};
    return {"poles", c};
  }
  if (name == "paper-fig10") {
    c.eigens.windows = {second};
    c.eigens.ceiling = 4.0 * kFirstThreshold;
    c.eigens.localized_wavefunctions = true;
    return {"eigens", c};
  }
  if (name == "paper-fig11" || name == "paper-fig12") {
    const bool reflection = name == "paper-fig11";
    c.smatrix.energies = Grid{kFirstThreshold + 1e-3, 4.0 * kFirstThreshold - 1e-3, 1000};
    c.smatrix.mode_cutoff = 2;
    c.smatrix.betas = {0.0, 0.04};
    c.smatrix.filter.kind = "nearest";
    c.smatrix.filter.energies = quartet;
    c.poles.filter = c.smatrix.filter;
    c.poles.betas = {0.0, 0.04};
    c.poles.re_lo = kFirstThreshold + 1e-3;
    c.poles.re_hi = 4.0 * kFirstThreshold - 1e-3;
    c.poles.mode_cutoff = 2;
    c.poles.amplitude = AmplitudeSelector{-1, -1, false};
    c.poles.im_lo = -1.0;
    return {reflection ? "smatrix" : "poles", c};
  }
  throw InvalidConfig("unknown preset '" + name + "'");
}

}  // namespace bicscat
