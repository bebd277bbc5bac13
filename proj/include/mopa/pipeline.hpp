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

#ifndef MOPA_PIPELINE_HPP
#define MOPA_PIPELINE_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mopa/bogoliubov.hpp"
#include "mopa/config.hpp"
#include "mopa/detection_chain.hpp"
#include "mopa/measurement.hpp"
#include "mopa/mode_analysis.hpp"
#include "mopa/reconstruction.hpp"

namespace mopa {

struct Device {
  double gain = 0.0;
  double coupling_strength = 0.0;
  TransferMatrices transfer;
  ModeBasis all_modes;  // every non-zero mode
  ModeBasis modes;      // truncated by cumulative weight
  double schmidt_number = 0.0;
};

// Calibrates the device to the requested gain and decomposes it.
Device build_device(const ExperimentConfig& config, double gain);

struct TheoryMode {
  int mode = 0;
  double squeezing_db = 0.0;
  double antisqueezing_db = 0.0;
  double squeezing_angle = 0.0;
  double squeezing_low_db = 0.0;
  double squeezing_high_db = 0.0;
  double antisqueezing_low_db = 0.0;
  double antisqueezing_high_db = 0.0;
};

// Everything that follows from the configuration alone.
struct Model {
  ExperimentConfig config;
  std::string config_hash;
  FrequencyGrid grid;
  Device squeezer;
  Device amplifier;
  ModeBasis report_modes;  // squeezer modes listed in the report
  DetectionChain chain;
  OverlapMatrix overlap;
  PsaTrace trace;
  Fringes fringes;
  std::vector<TheoryMode> theory;  // squeezer modes right before the amplifier
};

Model build_model(const ExperimentConfig& config);
Model assemble_model(const ExperimentConfig& config, Device squeezer, Device amplifier);

// One measured configuration: amplified vacuum, dark or bright fringe.
struct Branch {
  std::string name;
  double pump_phase = 0.0;
  GaussianState state;  // amplifier output restricted to the measured arm
  SpectralCovariance covariance;
  std::optional<CoherentModes> decomposition;
  std::optional<std::string> decomposition_error;
  std::optional<FrameStack> frames;
  std::optional<CovarianceWidths> widths;
  std::vector<int> match;  // decomposition mode -> amplifier mode
  RVector amplifier_intensity;
};

struct Run {
  Model model;
  Branch vacuum;
  Branch dark;
  Branch bright;
  SqueezingReport report;
  std::vector<std::string> warnings;
};

// Full simulation in the configured measurement mode.
Run simulate(const ExperimentConfig& config);
// Same on a prebuilt model; gain_band = false skips the gain-spread band,
// which rebuilds four devices.
Run simulate(Model model, bool gain_band = true);
// Reconstruction from recorded frames; dark and bright are optional.
Run analyze(const ExperimentConfig& config, const FrameStack& vacuum,
            const std::optional<FrameStack>& dark, const std::optional<FrameStack>& bright);

// Archive layout shared by simulate, analyze and plot-data.
void write_run(const Run& run, const std::filesystem::path& dir, bool include_frames);
nlohmann::json report_to_json(const Run& run);

// Frame stacks stored by write_run. Throws IoError on a hash mismatch
// unless allow_mismatch is set.
std::optional<FrameStack> read_frames(const std::filesystem::path& dir, const std::string& name,
                                      const FrequencyGrid& grid, const std::string& config_hash,
                                      bool allow_mismatch, bool required);

// plot-data: converts an archive into a figure-ready CSV.
std::vector<std::string> figure_names();
std::filesystem::path export_figure(const std::filesystem::path& run_dir, const std::string& figure,
                                    const std::filesystem::path& out_dir);

}  // namespace mopa

#endif  // MOPA_PIPELINE_HPP
