// Copyright 2026 The mopa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mopa/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "mopa/errors.hpp"

namespace mopa {

using nlohmann::json;

std::vector<double> LossSpec::transmission(const FrequencyGrid& grid) const {
  std::vector<double> out(grid.size(), 1.0 - flat);
  if (table.empty()) return out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double lam = grid.wavelength_nm(i);
    double loss = table.front().second;
    if (lam >= table.back().first) {
      loss = table.back().second;
    } else if (lam > table.front().first) {
      for (std::size_t k = 1; k < table.size(); ++k) {
        if (lam <= table[k].first) {
          const auto& [x0, y0] = table[k - 1];
          const auto& [x1, y1] = table[k];
          loss = y0 + (y1 - y0) * (lam - x0) / (x1 - x0);
          break;
        }
      }
    }
    out[i] = 1.0 - loss;
  }
  return out;
}

FrequencyGrid ExperimentConfig::grid() const {
  return make_grid(center_wavelength_nm, span_nm, n_points);
}

CrystalParams ExperimentConfig::crystal() const {
  CrystalParams c;
  c.length_mm = crystal_length_mm;
  const double degenerate = 2.0 * pump.center_wavelength_nm;
  if (phase_matching.model == "gaussian") {
    c.phase_matching = phase_matching.parameter
                           ? GaussianPhaseMatching{*phase_matching.parameter}
                           : gaussian_phase_matching_for_fwhm(degenerate, *phase_matching.spectrum_fwhm_nm);
  } else {
    c.phase_matching = phase_matching.parameter
                           ? QuadraticMismatch{*phase_matching.parameter}
                           : quadratic_mismatch_for_fwhm(degenerate, *phase_matching.spectrum_fwhm_nm,
                                                         crystal_length_mm);
  }
  return c;
}

std::vector<double> ExperimentConfig::pump_phases() const {
  std::vector<double> out(phase_samples);
  for (std::size_t k = 0; k < phase_samples; ++k) {
    out[k] = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(phase_samples);
  }
  return out;
}

namespace {

// Walks one JSON object, remembering which keys were read so that
// leftovers can be reported as unknown fields.
class Reader {
 public:
  Reader(const json& j, std::string pointer) : j_(j), ptr_(std::move(pointer)) {
    if (!j_.is_object()) throw ConfigError(ptr_.empty() ? "/" : ptr_, "expected an object");
  }

  std::string path(const std::string& key) const { return ptr_ + "/" + key; }
  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  void mark(const std::string& key) { seen_.insert(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, double def) {
    seen_.insert(key);
    if (!j_.contains(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(path(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(path(key), "must be finite");
    return d;
  }

  std::uint64_t integer(const std::string& key, std::uint64_t def) {
    seen_.insert(key);
    if (!j_.contains(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      throw ConfigError(path(key), "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  std::string string(const std::string& key, const std::string& def) {
    seen_.insert(key);
    if (!j_.contains(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(path(key), "expected a string");
    return v.get<std::string>();
  }

  bool boolean(const std::string& key, bool def) {
    seen_.insert(key);
    if (!j_.contains(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError(path(key), "expected true or false");
    return v.get<bool>();
  }

  std::optional<Reader> child(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) return std::nullopt;
    return Reader(j_.at(key), path(key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(path(it.key()), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string ptr_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field, what);
}

}  // namespace

void validate(const ExperimentConfig& c) {
  require(c.center_wavelength_nm > 0.0, "/grid/center_wavelength_nm", "must be positive");
  require(c.span_nm > 0.0, "/grid/span_nm", "must be positive");
  require(c.span_nm / 2.0 < c.center_wavelength_nm, "/grid/span_nm", "window reaches zero wavelength");
  require(c.n_points >= 2 && c.n_points <= 4096, "/grid/n_points", "must lie in [2, 4096]");
  require(c.pump.center_wavelength_nm > 0.0, "/pump/center_wavelength_nm", "must be positive");
  require(c.pump.pulse_duration_fwhm_ps > 0.0, "/pump/pulse_duration_fwhm_ps", "must be positive");
  require(c.crystal_length_mm > 0.0, "/crystal/length_mm", "must be positive");
  const auto& pm = c.phase_matching;
  require(pm.model == "gaussian" || pm.model == "quadratic", "/crystal/phase_matching/model",
          "must be \"gaussian\" or \"quadratic\"");
  require(pm.spectrum_fwhm_nm.has_value() != pm.parameter.has_value(), "/crystal/phase_matching",
          "set exactly one of spectrum_fwhm_nm and the model parameter");
  if (pm.spectrum_fwhm_nm) {
    require(*pm.spectrum_fwhm_nm > 0.0 && *pm.spectrum_fwhm_nm < 2.0 * c.pump.center_wavelength_nm,
            "/crystal/phase_matching/spectrum_fwhm_nm", "out of range");
  }
  if (pm.parameter) {
    require(*pm.parameter > 0.0, "/crystal/phase_matching", "model parameter must be positive");
  }
  require(c.squeezer_gain > 0.0 && c.squeezer_gain <= 10.0, "/gains/squeezer", "must lie in (0, 10]");
  require(c.amplifier_gain > 0.0 && c.amplifier_gain <= 10.0, "/gains/amplifier", "must lie in (0, 10]");
  require(c.squeezer_gain_spread >= 0.0 && c.squeezer_gain_spread < c.squeezer_gain,
          "/gains/squeezer_spread", "must lie in [0, squeezer gain)");
  require(c.amplifier_gain_spread >= 0.0 && c.amplifier_gain_spread < c.amplifier_gain,
          "/gains/amplifier_spread", "must lie in [0, amplifier gain)");
  require(c.pre_loss.flat >= 0.0 && c.pre_loss.flat < 1.0, "/losses/pre_amplifier", "must lie in [0, 1)");
  for (std::size_t k = 0; k < c.pre_loss.table.size(); ++k) {
    const auto& [lam, loss] = c.pre_loss.table[k];
    const std::string f = fmt::format("/losses/pre_amplifier/{}", k);
    require(loss >= 0.0 && loss < 1.0, f, "loss must lie in [0, 1)");
    require(k == 0 || lam > c.pre_loss.table[k - 1].first, f, "wavelengths must increase");
  }
  require(c.post_loss >= 0.0 && c.post_loss < 1.0, "/losses/post_amplifier", "must lie in [0, 1)");
  if (c.filter_nm) {
    require(c.filter_nm->second >= c.filter_nm->first, "/filter_nm", "upper edge below lower edge");
    const double lo = c.center_wavelength_nm - c.span_nm / 2.0;
    const double hi = c.center_wavelength_nm + c.span_nm / 2.0;
    const double step = c.span_nm / static_cast<double>(c.n_points - 1);
    require(c.filter_nm->first >= lo - 0.5 * step && c.filter_nm->second <= hi + 0.5 * step,
            "/filter_nm", "window extends beyond the grid");
  }
  require(c.phase_samples >= 8, "/pump_phase_samples", "need at least 8 samples");
  require(c.n_steps >= 4, "/propagation/n_steps", "need at least 4 steps");
  require(c.frames >= 2, "/measurement/frames", "need at least 2 frames");
  require(c.camera.quantum_efficiency > 0.0 && c.camera.quantum_efficiency <= 1.0,
          "/measurement/camera/quantum_efficiency", "must lie in (0, 1]");
  require(c.camera.read_noise_rms >= 0.0, "/measurement/camera/read_noise_rms", "must be non-negative");
  require(c.camera.dark_level >= 0.0, "/measurement/camera/dark_level", "must be non-negative");
  const auto& a = c.analysis;
  require(a.cumulative_weight > 0.0 && a.cumulative_weight <= 1.0, "/analysis/cumulative_weight",
          "must lie in (0, 1]");
  require(a.max_modes >= 1, "/analysis/max_modes", "must be positive");
  require(a.report_modes >= 1, "/analysis/report_modes", "must be positive");
  require(a.coverage_threshold > 0.0 && a.coverage_threshold <= 1.0, "/analysis/coverage_threshold",
          "must lie in (0, 1]");
  require(a.noise_floor >= 0.0 && a.noise_floor < 1.0, "/analysis/noise_floor", "must lie in [0, 1)");
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  Reader root(j, "");
  c.name = root.string("name", c.name);
  if (auto g = root.child("grid")) {
    c.center_wavelength_nm = g->number("center_wavelength_nm", c.center_wavelength_nm);
    c.span_nm = g->number("span_nm", c.span_nm);
    c.n_points = g->integer("n_points", c.n_points);
    g->finish();
  }
  if (auto p = root.child("pump")) {
    c.pump.center_wavelength_nm = p->number("center_wavelength_nm", c.pump.center_wavelength_nm);
    c.pump.pulse_duration_fwhm_ps = p->number("pulse_duration_fwhm_ps", c.pump.pulse_duration_fwhm_ps);
    const std::string shape = p->string("shape", "gaussian");
    require(shape == "gaussian", p->path("shape"), "only \"gaussian\" is supported");
    p->finish();
  }
  if (auto cr = root.child("crystal")) {
    c.crystal_length_mm = cr->number("length_mm", c.crystal_length_mm);
    if (auto pm = cr->child("phase_matching")) {
      c.phase_matching.model = pm->string("model", c.phase_matching.model);
      const char* key = c.phase_matching.model == "quadratic" ? "curvature_s2_per_m" : "width_rad_per_s";
      if (pm->has(key)) {
        c.phase_matching.parameter = pm->number(key, 0.0);
        c.phase_matching.spectrum_fwhm_nm.reset();
      }
      if (pm->has("spectrum_fwhm_nm")) {
        c.phase_matching.spectrum_fwhm_nm = pm->number("spectrum_fwhm_nm", 0.0);
      }
      pm->finish();
    }
    cr->finish();
  }
  if (auto g = root.child("gains")) {
    c.squeezer_gain = g->number("squeezer", c.squeezer_gain);
    c.amplifier_gain = g->number("amplifier", c.amplifier_gain);
    c.squeezer_gain_spread = g->number("squeezer_spread", c.squeezer_gain_spread);
    c.amplifier_gain_spread = g->number("amplifier_spread", c.amplifier_gain_spread);
    g->finish();
  }
  if (auto l = root.child("losses")) {
    if (l->has("pre_amplifier")) {
      const json& pre = l->raw("pre_amplifier");
      const std::string f = l->path("pre_amplifier");
      if (pre.is_number()) {
        c.pre_loss = {pre.get<double>(), {}};
      } else if (pre.is_array()) {
        c.pre_loss = {0.0, {}};
        for (std::size_t k = 0; k < pre.size(); ++k) {
          const json& row = pre[k];
          if (!row.is_array() || row.size() != 2 || !row[0].is_number() || !row[1].is_number()) {
            throw ConfigError(fmt::format("{}/{}", f, k), "expected [wavelength_nm, loss]");
          }
          c.pre_loss.table.emplace_back(row[0].get<double>(), row[1].get<double>());
        }
        require(!c.pre_loss.table.empty(), f, "table is empty");
      } else {
        throw ConfigError(f, "expected a number or a [wavelength_nm, loss] table");
      }
    }
    c.post_loss = l->number("post_amplifier", c.post_loss);
    l->finish();
  }
  if (root.has("filter_nm")) {
    const json& f = root.raw("filter_nm");
    if (!f.is_array() || f.size() != 2 || !f[0].is_number() || !f[1].is_number()) {
      throw ConfigError("/filter_nm", "expected [lo_nm, hi_nm] or null");
    }
    c.filter_nm = std::make_pair(f[0].get<double>(), f[1].get<double>());
  } else {
    root.mark("filter_nm");
  }
  c.phase_samples = root.integer("pump_phase_samples", c.phase_samples);
  if (auto p = root.child("propagation")) {
    c.n_steps = static_cast<int>(p->integer("n_steps", static_cast<std::uint64_t>(c.n_steps)));
    p->finish();
  }
  if (auto m = root.child("measurement")) {
    const std::string mode = m->string("mode", "monte-carlo");
    require(mode == "analytic" || mode == "monte-carlo", m->path("mode"),
            "must be \"analytic\" or \"monte-carlo\"");
    c.mode = mode == "analytic" ? MeasurementMode::analytic : MeasurementMode::monte_carlo;
    c.frames = m->integer("frames", c.frames);
    c.seed = m->integer("seed", c.seed);
    if (auto cam = m->child("camera")) {
      c.camera.quantum_efficiency = cam->number("quantum_efficiency", c.camera.quantum_efficiency);
      c.camera.read_noise_rms = cam->number("read_noise_rms", c.camera.read_noise_rms);
      c.camera.dark_level = cam->number("dark_level", c.camera.dark_level);
      c.camera.clamp_negative = cam->boolean("clamp_negative", c.camera.clamp_negative);
      cam->finish();
    }
    m->finish();
  }
  if (auto a = root.child("analysis")) {
    c.analysis.cumulative_weight = a->number("cumulative_weight", c.analysis.cumulative_weight);
    c.analysis.max_modes = a->integer("max_modes", c.analysis.max_modes);
    c.analysis.report_modes = a->integer("report_modes", c.analysis.report_modes);
    c.analysis.coverage_threshold = a->number("coverage_threshold", c.analysis.coverage_threshold);
    c.analysis.noise_floor = a->number("noise_floor", c.analysis.noise_floor);
    a->finish();
  }
  root.finish();
  validate(c);
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["grid"] = {{"center_wavelength_nm", c.center_wavelength_nm},
               {"span_nm", c.span_nm},
               {"n_points", c.n_points}};
  j["pump"] = {{"center_wavelength_nm", c.pump.center_wavelength_nm},
               {"pulse_duration_fwhm_ps", c.pump.pulse_duration_fwhm_ps},
               {"shape", "gaussian"}};
  json pm = {{"model", c.phase_matching.model}};
  if (c.phase_matching.spectrum_fwhm_nm) pm["spectrum_fwhm_nm"] = *c.phase_matching.spectrum_fwhm_nm;
  if (c.phase_matching.parameter) {
    pm[c.phase_matching.model == "quadratic" ? "curvature_s2_per_m" : "width_rad_per_s"] =
        *c.phase_matching.parameter;
  }
  j["crystal"] = {{"length_mm", c.crystal_length_mm}, {"phase_matching", pm}};
  j["gains"] = {{"squeezer", c.squeezer_gain},
                {"amplifier", c.amplifier_gain},
                {"squeezer_spread", c.squeezer_gain_spread},
                {"amplifier_spread", c.amplifier_gain_spread}};
  json pre;
  if (c.pre_loss.table.empty()) {
    pre = c.pre_loss.flat;
  } else {
    pre = json::array();
    for (const auto& [lam, loss] : c.pre_loss.table) pre.push_back({lam, loss});
  }
  j["losses"] = {{"pre_amplifier", pre}, {"post_amplifier", c.post_loss}};
  j["filter_nm"] = c.filter_nm ? json{c.filter_nm->first, c.filter_nm->second} : json(nullptr);
  j["pump_phase_samples"] = c.phase_samples;
  j["propagation"] = {{"n_steps", c.n_steps}};
  j["measurement"] = {
      {"mode", c.mode == MeasurementMode::analytic ? "analytic" : "monte-carlo"},
      {"frames", c.frames},
      {"seed", c.seed},
      {"camera",
       {{"quantum_efficiency", c.camera.quantum_efficiency},
        {"read_noise_rms", c.camera.read_noise_rms},
        {"dark_level", c.camera.dark_level},
        {"clamp_negative", c.camera.clamp_negative}}}};
  j["analysis"] = {{"cumulative_weight", c.analysis.cumulative_weight},
                   {"max_modes", c.analysis.max_modes},
                   {"report_modes", c.analysis.report_modes},
                   {"coverage_threshold", c.analysis.coverage_threshold},
                   {"noise_floor", c.analysis.noise_floor}};
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("/", std::string("malformed JSON: ") + e.what());
  }
  return config_from_json(j);
}

ExperimentConfig load_preset(const std::string& name) {
  std::vector<std::filesystem::path> dirs;
  if (const char* env = std::getenv("MOPA_PRESET_DIR")) dirs.emplace_back(env);
#ifdef MOPA_PRESET_DIR
  dirs.emplace_back(MOPA_PRESET_DIR);
#endif
  for (const auto& d : dirs) {
    const auto p = d / (name + ".json");
    if (std::filesystem::exists(p)) return load_config(p);
  }
  if (name == "reference") return ExperimentConfig{};
  throw ConfigError("--preset", "unknown preset '" + name + "'");
}

std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

std::string config_hash(const ExperimentConfig& config) {
  return fnv1a64_hex(config_to_json(config).dump());
}

}  // namespace mopa
