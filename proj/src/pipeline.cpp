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

#include "mopa/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "mopa/archive.hpp"
#include "mopa/errors.hpp"

namespace mopa {

using nlohmann::json;
namespace fs = std::filesystem;

Device build_device(const ExperimentConfig& config, double gain) {
  const KernelModel base(config.grid(), config.pump, config.crystal());
  CalibrationOptions opts;
  opts.propagation.n_steps = config.n_steps;
  Device d;
  d.gain = gain;
  d.coupling_strength = calibrate_gain(gain, base, opts);
  d.transfer = compute_transfer(base.with_coupling_strength(d.coupling_strength), opts.propagation);
  d.all_modes = schmidt_modes(d.transfer, config.n_points);
  d.modes = truncate(d.all_modes, config.analysis.cumulative_weight, config.analysis.max_modes);
  d.schmidt_number = d.all_modes.size() > 0 ? schmidt_number(d.all_modes) : 0.0;
  return d;
}

Model assemble_model(const ExperimentConfig& config, Device squeezer, Device amplifier) {
  Model m;
  m.config = config;
  m.config_hash = config_hash(config);
  m.grid = config.grid();
  m.squeezer = std::move(squeezer);
  m.amplifier = std::move(amplifier);
  m.report_modes = truncate(m.squeezer.all_modes, 1.0, config.analysis.report_modes);

  m.chain.squeezer = m.squeezer.transfer;
  m.chain.amplifier = m.amplifier.transfer;
  m.chain.pre_transmission = config.pre_loss.transmission(m.grid);
  m.chain.post_transmission = 1.0 - config.post_loss;
  m.chain.filter_nm = config.filter_nm;

  m.overlap = overlap_matrix(m.report_modes, m.amplifier.modes);
  m.trace = psa_trace(m.chain, config.pump_phases());
  m.fringes = find_fringes(m.trace);

  const SecondMoments moments = m.chain.squeezed().moments();
  for (Index l = 0; l < m.report_modes.modes.cols(); ++l) {
    const ModeQuadrature q = mode_quadrature(moments, m.report_modes.modes.col(l));
    TheoryMode t;
    t.mode = static_cast<int>(l) + 1;
    t.squeezing_db = to_db(q.min_variance);
    t.antisqueezing_db = to_db(q.max_variance);
    t.squeezing_angle = q.squeezing_angle;
    t.squeezing_low_db = t.squeezing_high_db = t.squeezing_db;
    t.antisqueezing_low_db = t.antisqueezing_high_db = t.antisqueezing_db;
    m.theory.push_back(t);
  }
  return m;
}

Model build_model(const ExperimentConfig& config) {
  validate(config);
  return assemble_model(config, build_device(config, config.squeezer_gain),
                        build_device(config, config.amplifier_gain));
}

namespace {

std::uint64_t branch_seed(std::uint64_t seed, int k) {
  return seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(k + 1));
}

Branch make_branch(const std::string& name, double phase, GaussianState output) {
  Branch b;
  b.name = name;
  b.pump_phase = phase;
  b.state = signal_marginal(output);
  return b;
}

void measure_analytic(Branch& b) {
  b.covariance = intensity_covariance_analytic(b.state, ShotTerm::included);
}

void decompose(Branch& b) {
  try {
    b.decomposition = coherent_modes(b.covariance);
  } catch (const NumericalError& e) {
    b.decomposition_error = e.what();
  } catch (const InputError& e) {
    b.decomposition_error = e.what();
  }
  try {
    b.widths = covariance_widths(b.covariance);
  } catch (const InputError&) {
    b.widths.reset();
  }
}

RVector branch_intensity(const Branch& b) {
  return modal_intensities(*b.decomposition, b.covariance.mean);
}

// Pairs decompositions with amplifier modes and reconstructs every
// squeezer mode listed in the model.
SqueezingReport reconstruct_branches(const Model& m, Branch& vac, Branch& dark, Branch& bright) {
  const Index n_amp = m.amplifier.modes.modes.cols();
  SqueezingReport report;

  auto exclude_all = [&](const std::string& reason) {
    for (Index l = 0; l < m.overlap.g.rows(); ++l) {
      report.excluded.push_back({static_cast<int>(l) + 1, reason});
    }
  };

  if (!vac.decomposition) {
    exclude_all("amplified-vacuum decomposition failed: " + vac.decomposition_error.value_or("no data"));
    return report;
  }
  vac.match = match_modes(vac.decomposition->modes, m.amplifier.modes.modes);
  vac.amplifier_intensity = assign_intensities(branch_intensity(vac), vac.match, n_amp);

  auto via_vacuum = [&](Branch& b) -> bool {
    if (!b.decomposition) return false;
    const std::vector<int> to_vac =
        match_modes(b.decomposition->modes, vac.decomposition->modes.cast<cplx>());
    b.match.assign(to_vac.size(), -1);
    for (std::size_t k = 0; k < to_vac.size(); ++k) {
      if (to_vac[k] >= 0) b.match[k] = vac.match[static_cast<std::size_t>(to_vac[k])];
    }
    b.amplifier_intensity = assign_intensities(branch_intensity(b), b.match, n_amp);
    return true;
  };
  const bool have_dark = via_vacuum(dark);
  const bool have_bright = via_vacuum(bright);
  if (!have_dark || !have_bright) {
    const Branch& bad = have_dark ? bright : dark;
    exclude_all(bad.name + " decomposition unavailable: " + bad.decomposition_error.value_or("no data"));
    return report;
  }

  double peak = 0.0;
  for (double v : vac.amplifier_intensity) {
    if (v > peak) peak = v;
  }
  const double floor_rel = std::max(m.config.analysis.noise_floor, vac.decomposition->noise_floor);
  const GainCalibration cal = gain_calibration(vac.amplifier_intensity, floor_rel * peak);
  report = reconstruct_squeezing(dark.amplifier_intensity, bright.amplifier_intensity, m.overlap, cal,
                                 m.config.analysis.coverage_threshold);
  for (auto& mode : report.modes) {
    mode.squeezing_axis = reconstructed_squeezing_axis(m.overlap, m.amplifier.modes, mode.mode - 1,
                                                       dark.pump_phase);
  }
  return report;
}

Branch half_branch(const Branch& full, bool second) {
  Branch b;
  b.name = full.name;
  b.pump_phase = full.pump_phase;
  const Index f = full.frames->frames.rows();
  const Index h = f / 2;
  FrameStack s;
  s.grid = full.frames->grid;
  s.frames = second ? full.frames->frames.bottomRows(f - h) : full.frames->frames.topRows(h);
  b.covariance = estimate_covariance(s);
  decompose(b);
  return b;
}

// Per-mode statistical uncertainty from sampled frames: the largest
// deviation of a half-stack reconstruction from the full one, floored by
// the single-mode estimate 10/ln10 * sqrt(2/F). With A, B the half
// estimates and the full one near (A + B) / 2, |A - full| estimates the
// full-sample error directly.
void attach_statistical_uncertainty(const Model& m, const Branch& vac, const Branch& dark,
                                    const Branch& bright, SqueezingReport& report) {
  const std::size_t frames = dark.covariance.frames;
  if (frames == 0) return;
  const double floor = 10.0 / std::log(10.0) * std::sqrt(2.0 / static_cast<double>(frames));
  std::map<int, double> spread;
  std::map<int, int> seen;
  bool halves = vac.frames && dark.frames && bright.frames && frames >= 8 &&
                vac.frames->count() >= 8 && bright.frames->count() >= 8;
  if (halves) {
    for (bool second : {false, true}) {
      Branch v = half_branch(vac, second), d = half_branch(dark, second), b = half_branch(bright, second);
      const SqueezingReport r = reconstruct_branches(m, v, d, b);
      for (const auto& md : r.modes) {
        for (const auto& full : report.modes) {
          if (full.mode != md.mode) continue;
          const double dev = std::max(std::abs(md.squeezing_db - full.squeezing_db),
                                      std::abs(md.antisqueezing_db - full.antisqueezing_db));
          spread[md.mode] = std::max(spread[md.mode], dev);
          ++seen[md.mode];
        }
      }
    }
  }
  for (auto& mode : report.modes) {
    double stat = floor;
    if (halves) {
      if (seen[mode.mode] == 2) {
        stat = std::max(floor, spread[mode.mode]);
      } else {
        mode.flags.push_back("not reconstructed on half of the frames");
      }
    }
    mode.statistical_uncertainty_db = stat;
    if (stat > 0.5) mode.flags.push_back("large statistical uncertainty");
  }
}

Run run_branches(Model model, const FrameStack* vac_frames, const FrameStack* dark_frames,
                 const FrameStack* bright_frames, bool sample) {
  Run run;
  run.model = std::move(model);
  const Model& m = run.model;
  const double dark_phase = m.fringes.dark_phase;
  const double bright_phase = m.fringes.bright_phase;

  run.vacuum = make_branch("vacuum", 0.0, m.chain.vacuum_output());
  run.dark = make_branch("dark", dark_phase, m.chain.output(dark_phase));
  run.bright = make_branch("bright", bright_phase, m.chain.output(bright_phase));

  Branch* branches[3] = {&run.vacuum, &run.dark, &run.bright};
  const FrameStack* given[3] = {vac_frames, dark_frames, bright_frames};
  for (int k = 0; k < 3; ++k) {
    Branch& b = *branches[k];
    if (given[k]) {
      b.frames = *given[k];
    } else if (sample) {
      b.frames = sample_frames(b.state, m.config.frames, branch_seed(m.config.seed, k), m.config.camera,
                               m.config.threads);
    }
    if (b.frames) {
      b.covariance = estimate_covariance(*b.frames);
    } else if (!vac_frames) {
      measure_analytic(b);
    } else {
      b.decomposition_error = "no frames recorded for this branch";
      continue;
    }
    decompose(b);
  }
  for (const auto& w : m.fringes.warnings) run.warnings.push_back(w);
  if (m.overlap.warning) run.warnings.push_back(*m.overlap.warning);
  run.report = reconstruct_branches(m, run.vacuum, run.dark, run.bright);
  attach_statistical_uncertainty(m, run.vacuum, run.dark, run.bright, run.report);
  return run;
}

SqueezingReport analytic_report(Model model) {
  return run_branches(std::move(model), nullptr, nullptr, nullptr, false).report;
}

// Gain-spread band: shifts each value by the envelope of the analytic
// response to G_sq +- spread and G +- spread.
void apply_gain_band(Run& run, const Device* nominal_sq, const Device* nominal_amp) {
  const ExperimentConfig& cfg = run.model.config;
  ExperimentConfig analytic = cfg;
  analytic.mode = MeasurementMode::analytic;
  const SqueezingReport base = cfg.mode == MeasurementMode::analytic
                                   ? run.report
                                   : analytic_report(assemble_model(analytic, *nominal_sq, *nominal_amp));
  std::vector<SqueezingReport> variants;
  std::vector<std::vector<TheoryMode>> theories;
  for (double sign : {-1.0, 1.0}) {
    const double gsq = cfg.squeezer_gain + sign * cfg.squeezer_gain_spread;
    if (cfg.squeezer_gain_spread > 0.0) {
      Model mv = assemble_model(analytic, build_device(analytic, gsq), *nominal_amp);
      theories.push_back(mv.theory);
      variants.push_back(analytic_report(std::move(mv)));
    }
    const double gamp = cfg.amplifier_gain + sign * cfg.amplifier_gain_spread;
    if (cfg.amplifier_gain_spread > 0.0) {
      variants.push_back(analytic_report(assemble_model(analytic, *nominal_sq, build_device(analytic, gamp))));
    }
  }
  std::map<int, const ModeSqueezing*> base_by_mode;
  for (const auto& m : base.modes) base_by_mode[m.mode] = &m;
  for (auto& mode : run.report.modes) {
    auto it = base_by_mode.find(mode.mode);
    if (it == base_by_mode.end()) continue;
    for (const auto& v : variants) {
      for (const auto& vm : v.modes) {
        if (vm.mode != mode.mode) continue;
        const double ds = vm.squeezing_db - it->second->squeezing_db;
        const double da = vm.antisqueezing_db - it->second->antisqueezing_db;
        mode.squeezing_low_db = std::min(mode.squeezing_low_db, mode.squeezing_db + ds);
        mode.squeezing_high_db = std::max(mode.squeezing_high_db, mode.squeezing_db + ds);
        mode.antisqueezing_low_db = std::min(mode.antisqueezing_low_db, mode.antisqueezing_db + da);
        mode.antisqueezing_high_db = std::max(mode.antisqueezing_high_db, mode.antisqueezing_db + da);
      }
    }
  }
  for (auto& t : run.model.theory) {
    for (const auto& th : theories) {
      for (const auto& tv : th) {
        if (tv.mode != t.mode) continue;
        t.squeezing_low_db = std::min(t.squeezing_low_db, tv.squeezing_db);
        t.squeezing_high_db = std::max(t.squeezing_high_db, tv.squeezing_db);
        t.antisqueezing_low_db = std::min(t.antisqueezing_low_db, tv.antisqueezing_db);
        t.antisqueezing_high_db = std::max(t.antisqueezing_high_db, tv.antisqueezing_db);
      }
    }
  }
}

}  // namespace

Run simulate(const ExperimentConfig& config) { return simulate(build_model(config)); }

Run simulate(Model model, bool gain_band) {
  const Device sq = model.squeezer;
  const Device amp = model.amplifier;
  const bool sample = model.config.mode == MeasurementMode::monte_carlo;
  Run run = run_branches(std::move(model), nullptr, nullptr, nullptr, sample);
  if (gain_band) apply_gain_band(run, &sq, &amp);
  return run;
}

Run analyze(const ExperimentConfig& config, const FrameStack& vacuum,
            const std::optional<FrameStack>& dark, const std::optional<FrameStack>& bright) {
  Model model = build_model(config);
  if (!(vacuum.grid == model.grid)) throw InputError("analyze: frames do not match the configured grid");
  const Device sq = model.squeezer;
  const Device amp = model.amplifier;
  Run run = run_branches(std::move(model), &vacuum, dark ? &*dark : nullptr,
                         bright ? &*bright : nullptr, false);
  if (dark && bright) apply_gain_band(run, &sq, &amp);
  return run;
}

namespace {

json widths_json(const Branch& b) {
  if (!b.widths) return nullptr;
  return {{"unconditional_nm", b.widths->unconditional_nm},
          {"conditional_pm", b.widths->conditional_pm},
          {"peak_bin", b.widths->peak_bin},
          {"multi_peak", b.widths->multi_peak}};
}

json decomposition_json(const Branch& b) {
  json j;
  j["frames"] = b.covariance.frames;
  if (!b.decomposition) {
    j["error"] = b.decomposition_error.value_or("not computed");
    return j;
  }
  const auto& d = *b.decomposition;
  j["residual"] = d.residual;
  j["negative_fraction"] = d.negative_fraction;
  j["noise_floor"] = d.noise_floor;
  j["schmidt_number"] = schmidt_number(std::span<const double>(d.weights.data(), d.weights.size()));
  std::vector<double> top(d.weights.data(), d.weights.data() + std::min<Index>(10, d.weights.size()));
  j["leading_weights"] = top;
  return j;
}

json device_json(const Device& d) {
  return {{"gain", d.gain},
          {"coupling_strength", d.coupling_strength},
          {"schmidt_number", d.schmidt_number},
          {"modes_kept", d.modes.size()},
          {"discarded_weight", d.modes.discarded_weight}};
}

}  // namespace

json report_to_json(const Run& run) {
  const Model& m = run.model;
  const ExperimentConfig& c = m.config;
  json j;
  j["config_hash"] = m.config_hash;
  j["name"] = c.name;
  j["measurement_mode"] = c.mode == MeasurementMode::analytic ? "analytic" : "monte-carlo";
  j["frames"] = run.dark.covariance.frames;
  j["gains"] = {{"squeezer", c.squeezer_gain},
                {"amplifier", c.amplifier_gain},
                {"squeezer_spread", c.squeezer_gain_spread},
                {"amplifier_spread", c.amplifier_gain_spread}};
  j["devices"] = {{"squeezer", device_json(m.squeezer)}, {"amplifier", device_json(m.amplifier)}};
  j["fringes"] = {{"bright_phase_rad", m.fringes.bright_phase},
                  {"dark_phase_rad", m.fringes.dark_phase},
                  {"fit_offset", m.fringes.fit.offset},
                  {"fit_amplitude", m.fringes.fit.amplitude},
                  {"fit_phase_rad", m.fringes.fit.phase},
                  {"fit_residual_rms", m.fringes.fit.residual_rms},
                  {"warnings", m.fringes.warnings}};
  j["overlap"] = {{"rows", m.overlap.g.rows()},
                  {"columns", m.overlap.g.cols()},
                  {"global_phase_rad", m.overlap.global_phase},
                  {"imaginary_residue", m.overlap.imaginary_residue}};
  j["decomposition"] = {{"vacuum", decomposition_json(run.vacuum)},
                        {"dark", decomposition_json(run.dark)},
                        {"bright", decomposition_json(run.bright)}};
  j["widths"] = {{"vacuum", widths_json(run.vacuum)},
                 {"dark", widths_json(run.dark)},
                 {"bright", widths_json(run.bright)}};
  json modes = json::array();
  for (const auto& md : run.report.modes) {
    modes.push_back({{"mode", md.mode},
                     {"squeezing_db", md.squeezing_db},
                     {"antisqueezing_db", md.antisqueezing_db},
                     {"squeezing_band_db", {md.squeezing_low_db, md.squeezing_high_db}},
                     {"antisqueezing_band_db", {md.antisqueezing_low_db, md.antisqueezing_high_db}},
                     {"statistical_uncertainty_db", md.statistical_uncertainty_db},
                     {"coverage", md.coverage},
                     {"truncation_bound", md.truncation_bound},
                     {"squeezing_axis_rad", md.squeezing_axis ? json(*md.squeezing_axis) : json(nullptr)},
                     {"flags", md.flags}});
  }
  j["modes"] = modes;
  json excluded = json::array();
  for (const auto& e : run.report.excluded) excluded.push_back({{"mode", e.mode}, {"reason", e.reason}});
  j["excluded"] = excluded;
  json theory = json::array();
  for (const auto& t : m.theory) {
    theory.push_back({{"mode", t.mode},
                      {"squeezing_db", t.squeezing_db},
                      {"antisqueezing_db", t.antisqueezing_db},
                      {"squeezing_band_db", {t.squeezing_low_db, t.squeezing_high_db}},
                      {"antisqueezing_band_db", {t.antisqueezing_low_db, t.antisqueezing_high_db}},
                      {"squeezing_angle_rad", t.squeezing_angle}});
  }
  j["theory"] = theory;
  std::vector<std::string> warnings = run.warnings;
  for (const auto& w : run.report.warnings) {
    if (std::find(warnings.begin(), warnings.end(), w) == warnings.end()) warnings.push_back(w);
  }
  j["warnings"] = warnings;
  return j;
}

namespace {

json wavelength_axis(const FrequencyGrid& g) { return g.wavelengths_nm(); }

CsvTable report_csv(const Run& run) {
  CsvTable t;
  t.metadata = {{"config_hash", run.model.config_hash}, {"units", "dB relative to vacuum"}};
  t.columns = {"mode", "squeezing_db", "squeezing_low_db", "squeezing_high_db", "antisqueezing_db",
               "antisqueezing_low_db", "antisqueezing_high_db", "statistical_uncertainty_db",
               "coverage", "truncation_bound", "squeezing_axis_rad"};
  for (const auto& m : run.report.modes) {
    t.add_row({static_cast<double>(m.mode), m.squeezing_db, m.squeezing_low_db, m.squeezing_high_db,
               m.antisqueezing_db, m.antisqueezing_low_db, m.antisqueezing_high_db,
               m.statistical_uncertainty_db, m.coverage, m.truncation_bound,
               m.squeezing_axis.value_or(std::nan(""))});
  }
  return t;
}

RMatrix column(const RVector& v) { return v; }

}  // namespace

void write_run(const Run& run, const fs::path& dir, bool include_frames) {
  const Model& m = run.model;
  const std::string& h = m.config_hash;
  fs::create_directories(dir);
  std::vector<std::string> files;
  auto add = [&](const std::string& name) { files.push_back(name); };

  write_json(dir / "config.json", config_to_json(m.config));
  add("config.json");
  write_json(dir / "report.json", report_to_json(run));
  add("report.json");
  write_csv(dir / "report.csv", report_csv(run));
  add("report.csv");

  const json lam = wavelength_axis(m.grid);
  const Index n = m.grid.isize();
  RMatrix spectra(n, 3);
  spectra.col(0) = run.vacuum.covariance.mean.size() == n ? run.vacuum.covariance.mean : RVector::Zero(n);
  spectra.col(1) = run.bright.covariance.mean.size() == n ? run.bright.covariance.mean : RVector::Zero(n);
  spectra.col(2) = run.dark.covariance.mean.size() == n ? run.dark.covariance.mean : RVector::Zero(n);
  write_array(dir, "spectra", spectra,
              {{"wavelength_nm", "branch"},
               "photons per bin",
               "mean spectra: amplified vacuum, bright fringe, dark fringe",
               {{"wavelength_nm", lam}, {"branch", {"vacuum", "bright", "dark"}}}},
              h);
  add("spectra");

  RMatrix trace(static_cast<Index>(m.trace.phases.size()), 3);
  for (std::size_t k = 0; k < m.trace.phases.size(); ++k) {
    const Index r = static_cast<Index>(k);
    trace(r, 0) = m.trace.phases[k];
    trace(r, 1) = m.trace.normalized[k];
    trace(r, 2) = m.trace.photons[k];
  }
  write_array(dir, "psa_trace", trace,
              {{"sample", "field"}, "mixed", "pump phase (rad), normalised intensity, photons",
               {{"field", {"pump_phase_rad", "normalized", "photons"}}}},
              h);
  add("psa_trace");

  for (const Branch* b : {&run.vacuum, &run.dark, &run.bright}) {
    if (b->covariance.matrix.size() == 0) continue;
    write_array(dir, "covariance_" + b->name, b->covariance.matrix,
                {{"wavelength_nm", "wavelength_nm"}, "photons^2", "intensity covariance",
                 {{"wavelength_nm", lam}}},
                h);
    add("covariance_" + b->name);
    if (b->decomposition) {
      write_array(dir, "weights_" + b->name, column(b->decomposition->weights),
                  {{"mode", "value"}, "fraction", "coherent-mode weights", json::object()}, h);
      add("weights_" + b->name);
      write_array(dir, "modes_" + b->name, b->decomposition->modes,
                  {{"wavelength_nm", "mode"}, "amplitude", "coherent modes", {{"wavelength_nm", lam}}}, h);
      add("modes_" + b->name);
    }
    if (include_frames && b->frames) {
      write_array(dir, "frames_" + b->name, b->frames->frames,
                  {{"frame", "wavelength_nm"}, "photons per bin", "dark-subtracted camera frames",
                   {{"wavelength_nm", lam}}},
                  h);
      add("frames_" + b->name);
    }
  }

  write_array(dir, "overlap", m.overlap.g,
              {{"squeezer_mode", "amplifier_mode"}, "amplitude", "real overlap g_ln", json::object()}, h);
  add("overlap");
  write_array(dir, "squeezer_modes", m.report_modes.modes,
              {{"wavelength_nm", "mode"}, "amplitude", "squeezer output modes", {{"wavelength_nm", lam}}}, h);
  add("squeezer_modes");
  write_array(dir, "amplifier_modes", m.amplifier.modes.modes,
              {{"wavelength_nm", "mode"}, "amplitude", "amplifier output modes", {{"wavelength_nm", lam}}}, h);
  add("amplifier_modes");
  for (const auto& [label, dev] : {std::pair{"squeezer", &m.squeezer}, std::pair{"amplifier", &m.amplifier}}) {
    const std::string base = std::string("transfer_") + label;
    write_array(dir, base + "_U", dev->transfer.U,
                {{"wavelength_nm", "wavelength_nm"}, "1", "Bogoliubov U", {{"wavelength_nm", lam}}}, h);
    write_array(dir, base + "_V", dev->transfer.V,
                {{"wavelength_nm", "wavelength_nm"}, "1", "Bogoliubov V", {{"wavelength_nm", lam}}}, h);
    add(base + "_U");
    add(base + "_V");
  }

  json manifest;
  manifest["config_hash"] = h;
  manifest["tool"] = "mopa";
  manifest["format_version"] = 1;
  manifest["measurement_mode"] = m.config.mode == MeasurementMode::analytic ? "analytic" : "monte-carlo";
  manifest["entries"] = files;
  write_json(dir / "manifest.json", manifest);
}

std::optional<FrameStack> read_frames(const fs::path& dir, const std::string& name, const FrequencyGrid& grid,
                                      const std::string& config_hash, bool allow_mismatch, bool required) {
  const std::string key = "frames_" + name;
  if (!array_exists(dir, key)) {
    if (required) throw IoError("missing frame stack " + (dir / (key + ".bin")).string());
    return std::nullopt;
  }
  FrameStack s;
  s.grid = grid;
  s.frames = read_real_array(dir, key, allow_mismatch ? std::nullopt : std::optional(config_hash));
  if (s.frames.cols() != grid.isize()) {
    throw IoError(key + ": frame width does not match the configured grid");
  }
  return s;
}

std::vector<std::string> figure_names() { return {"spectra", "psa_trace", "covariance", "mode_weights", "overlap", "squeezing"}; }

namespace {

std::vector<double> to_vector(const json& j) { return j.get<std::vector<double>>(); }

}  // namespace

fs::path export_figure(const fs::path& run_dir, const std::string& figure, const fs::path& out_dir) {
  const auto names = figure_names();
  if (std::find(names.begin(), names.end(), figure) == names.end()) {
    throw InputError("unknown figure '" + figure + "'");
  }
  const json report = read_json(run_dir / "report.json");
  const std::string h = report.at("config_hash").get<std::string>();
  CsvTable t;
  t.metadata = {{"config_hash", h}, {"figure", figure}};
  const fs::path out = out_dir / (figure + ".csv");

  if (figure == "spectra") {
    json side;
    const RMatrix s = read_real_array(run_dir, "spectra", h, &side);
    const auto lam = to_vector(side.at("coordinates").at("wavelength_nm"));
    t.metadata.emplace_back("units", "photons per bin");
    t.columns = {"wavelength_nm", "amplified_vacuum", "bright_fringe", "dark_fringe"};
    for (Index i = 0; i < s.rows(); ++i) t.add_row({lam[static_cast<std::size_t>(i)], s(i, 0), s(i, 1), s(i, 2)});
  } else if (figure == "psa_trace") {
    const RMatrix tr = read_real_array(run_dir, "psa_trace", h);
    const auto& f = report.at("fringes");
    SinusoidFit fit{f.at("fit_offset").get<double>(), f.at("fit_amplitude").get<double>(),
                    f.at("fit_phase_rad").get<double>(), 0.0};
    t.metadata.emplace_back("bright_phase_rad", format_double(f.at("bright_phase_rad").get<double>()));
    t.metadata.emplace_back("dark_phase_rad", format_double(f.at("dark_phase_rad").get<double>()));
    t.columns = {"pump_phase_rad", "normalized_intensity", "sinusoid_fit"};
    for (Index i = 0; i < tr.rows(); ++i) t.add_row({tr(i, 0), tr(i, 1), fit(tr(i, 0))});
  } else if (figure == "covariance") {
    json side;
    const RMatrix c = read_real_array(run_dir, "covariance_bright", h, &side);
    const auto lam = to_vector(side.at("coordinates").at("wavelength_nm"));
    t.metadata.emplace_back("branch", "bright");
    t.metadata.emplace_back("units", "photons^2");
    t.columns = {"wavelength_nm"};
    for (double l : lam) t.columns.push_back(format_double(l));
    for (Index i = 0; i < c.rows(); ++i) {
      std::vector<double> row{lam[static_cast<std::size_t>(i)]};
      for (Index j = 0; j < c.cols(); ++j) row.push_back(c(i, j));
      t.add_row(row);
    }
    // Cross sections for all branches go next to the matrix.
    CsvTable sec;
    sec.metadata = {{"config_hash", h}, {"figure", "covariance_sections"}};
    sec.columns = {"branch", "section", "coordinate_nm", "covariance"};
    for (const std::string b : {"vacuum", "bright", "dark"}) {
      if (!array_exists(run_dir, "covariance_" + b)) continue;
      const RMatrix cb = read_real_array(run_dir, "covariance_" + b, h);
      const Index n = cb.rows();
      Index p = 0;
      cb.diagonal().maxCoeff(&p);
      for (Index i = 0; i < n; ++i) {
        sec.rows.push_back({b, "diagonal", format_double(lam[static_cast<std::size_t>(i)]),
                            format_double(cb(i, i))});
      }
      const Index reach = std::min(p, n - 1 - p);
      for (Index k = -reach; k <= reach; ++k) {
        const double x = lam[static_cast<std::size_t>(p + k)] - lam[static_cast<std::size_t>(p - k)];
        sec.rows.push_back({b, "antidiagonal", format_double(x), format_double(cb(p + k, p - k))});
      }
    }
    write_csv(out_dir / "covariance_sections.csv", sec);
  } else if (figure == "mode_weights") {
    t.columns = {"mode", "vacuum_weight", "bright_weight", "dark_weight"};
    RVector w[3];
    Index len = 0;
    const std::string b[3] = {"vacuum", "bright", "dark"};
    for (int k = 0; k < 3; ++k) {
      if (array_exists(run_dir, "weights_" + b[k])) w[k] = read_real_array(run_dir, "weights_" + b[k], h).col(0);
      len = std::max(len, w[k].size());
    }
    len = std::min<Index>(len, 100);
    for (Index i = 0; i < len; ++i) {
      std::vector<double> row{static_cast<double>(i + 1)};
      for (int k = 0; k < 3; ++k) row.push_back(i < w[k].size() ? w[k](i) : 0.0);
      t.add_row(row);
    }
  } else if (figure == "overlap") {
    const RMatrix g = read_real_array(run_dir, "overlap", h);
    t.metadata.emplace_back("rows", "squeezer mode l");
    t.metadata.emplace_back("columns", "amplifier mode n");
    t.metadata.emplace_back("value", "|g_ln|^2");
    t.columns = {"l\\n"};
    for (Index n = 0; n < g.cols(); ++n) t.columns.push_back(std::to_string(n + 1));
    for (Index l = 0; l < g.rows(); ++l) {
      std::vector<double> row{static_cast<double>(l + 1)};
      for (Index n = 0; n < g.cols(); ++n) row.push_back(g(l, n) * g(l, n));
      t.add_row(row);
    }
  } else {
    t.metadata.emplace_back("units", "dB relative to vacuum");
    t.columns = {"mode", "squeezing_db", "squeezing_low_db", "squeezing_high_db", "antisqueezing_db",
                 "antisqueezing_low_db", "antisqueezing_high_db", "theory_squeezing_db",
                 "theory_squeezing_low_db", "theory_squeezing_high_db", "theory_antisqueezing_db",
                 "theory_antisqueezing_low_db", "theory_antisqueezing_high_db"};
    std::map<int, json> theory;
    for (const auto& th : report.at("theory")) theory[th.at("mode").get<int>()] = th;
    const double nan = std::nan("");
    for (const auto& md : report.at("modes")) {
      const int l = md.at("mode").get<int>();
      std::vector<double> row{static_cast<double>(l),
                              md.at("squeezing_db").get<double>(),
                              md.at("squeezing_band_db").at(0).get<double>(),
                              md.at("squeezing_band_db").at(1).get<double>(),
                              md.at("antisqueezing_db").get<double>(),
                              md.at("antisqueezing_band_db").at(0).get<double>(),
                              md.at("antisqueezing_band_db").at(1).get<double>()};
      if (theory.count(l)) {
        const json& th = theory[l];
        row.insert(row.end(), {th.at("squeezing_db").get<double>(), th.at("squeezing_band_db").at(0).get<double>(),
                               th.at("squeezing_band_db").at(1).get<double>(),
                               th.at("antisqueezing_db").get<double>(),
                               th.at("antisqueezing_band_db").at(0).get<double>(),
                               th.at("antisqueezing_band_db").at(1).get<double>()});
      } else {
        row.insert(row.end(), 6, nan);
      }
      t.add_row(row);
    }
    json side;
    const CMatrix modes = read_complex_array(run_dir, "squeezer_modes", h, &side);
    const auto lam = to_vector(side.at("coordinates").at("wavelength_nm"));
    CsvTable prof;
    prof.metadata = {{"config_hash", h}, {"figure", "squeezing_profiles"}, {"units", "|u_n|^2"}};
    prof.columns = {"wavelength_nm"};
    std::vector<Index> picks;
    for (Index l : {1, 10, 20, 30, 40}) {
      if (l <= modes.cols()) {
        picks.push_back(l - 1);
        prof.columns.push_back("mode_" + std::to_string(l));
      }
    }
    for (Index i = 0; i < modes.rows(); ++i) {
      std::vector<double> row{lam[static_cast<std::size_t>(i)]};
      for (Index k : picks) row.push_back(std::norm(modes(i, k)));
      prof.add_row(row);
    }
    write_csv(out_dir / "squeezing_profiles.csv", prof);
  }
  write_csv(out, t);
  return out;
}

}  // namespace mopa
