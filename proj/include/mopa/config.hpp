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

#ifndef MOPA_CONFIG_HPP
#define MOPA_CONFIG_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mopa/measurement.hpp"
#include "mopa/pdc_kernel.hpp"

namespace mopa {

enum class MeasurementMode { analytic, monte_carlo };

struct PhaseMatchingSpec {
  std::string model = "gaussian";  // "gaussian" or "quadratic"
  // Exactly one of these is set.
  std::optional<double> spectrum_fwhm_nm = 37.0;
  std::optional<double> parameter;  // width in rad/s or curvature in s^2/m
};

// Loss as a fraction of intensity, either flat or tabulated against
// wavelength (linear interpolation, clamped at the ends).
struct LossSpec {
  double flat = 0.0;
  std::vector<std::pair<double, double>> table;

  std::vector<double> transmission(const FrequencyGrid& grid) const;
};

struct AnalysisSpec {
  double cumulative_weight = 0.999;
  std::size_t max_modes = 256;
  std::size_t report_modes = 100;
  double coverage_threshold = 0.95;
  double noise_floor = 1e-9;  // relative to the strongest vacuum mode
};

struct ExperimentConfig {
  std::string name = "reference";
  double center_wavelength_nm = 709.34;
  double span_nm = 8.0;
  std::size_t n_points = 256;
  PumpProfile pump;
  double crystal_length_mm = 3.0;
  PhaseMatchingSpec phase_matching;
  double squeezer_gain = 1.1;
  double amplifier_gain = 4.5;
  double squeezer_gain_spread = 0.1;
  double amplifier_gain_spread = 0.2;
  LossSpec pre_loss{0.12, {}};
  double post_loss = 0.0;
  std::optional<std::pair<double, double>> filter_nm;
  std::size_t phase_samples = 72;
  int n_steps = 200;
  MeasurementMode mode = MeasurementMode::monte_carlo;
  std::size_t frames = 10000;
  std::uint64_t seed = 20240611;
  CameraModel camera;
  AnalysisSpec analysis;

  // Execution settings; they do not change results and are not archived.
  unsigned threads = 1;
  std::filesystem::path output_dir;

  FrequencyGrid grid() const;
  CrystalParams crystal() const;
  std::vector<double> pump_phases() const;
};

// Both throw ConfigError naming the offending field as a JSON pointer.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);
void validate(const ExperimentConfig& config);

ExperimentConfig load_config(const std::filesystem::path& path);
// Looks in $MOPA_PRESET_DIR, then in the source tree's presets directory.
ExperimentConfig load_preset(const std::string& name);

// FNV-1a 64 of the canonical JSON dump, as 16 hex digits.
std::string fnv1a64_hex(const std::string& bytes);
std::string config_hash(const ExperimentConfig& config);

}  // namespace mopa

#endif  // MOPA_CONFIG_HPP
