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

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "mopa/archive.hpp"
#include "mopa/config.hpp"
#include "mopa/errors.hpp"
#include "mopa/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

struct Common {
  std::string preset;
  std::string config;
  std::string out;
  unsigned threads = 1;
};

mopa::ExperimentConfig resolve_config(const Common& c) {
  if (!c.preset.empty() && !c.config.empty()) {
    throw mopa::ConfigError("--config", "give either --preset or --config, not both");
  }
  if (!c.config.empty()) return mopa::load_config(c.config);
  return mopa::load_preset(c.preset.empty() ? "reference" : c.preset);
}

fs::path output_dir(const Common& c, const mopa::ExperimentConfig& cfg, const char* suffix) {
  if (!c.out.empty()) return c.out;
  const char* root = std::getenv("MOPA_OUTPUT_ROOT");
  return fs::path(root ? root : "runs") / fmt::format("{}-{}{}", cfg.name, mopa::config_hash(cfg), suffix);
}

void print_summary(const mopa::Run& run, const fs::path& dir) {
  const auto& r = run.report;
  std::cout << fmt::format("config hash   {}\n", run.model.config_hash);
  std::cout << fmt::format("squeezer      r1={:.4f} K={:.1f}\n", run.model.squeezer.gain,
                           run.model.squeezer.schmidt_number);
  std::cout << fmt::format("amplifier     r1={:.4f} K={:.1f}\n", run.model.amplifier.gain,
                           run.model.amplifier.schmidt_number);
  std::cout << fmt::format("fringes       bright {:.4f} rad, dark {:.4f} rad\n", run.model.fringes.bright_phase,
                           run.model.fringes.dark_phase);
  std::cout << fmt::format("modes         {} reconstructed, {} excluded\n", r.modes.size(), r.excluded.size());
  for (std::size_t k = 0; k < r.modes.size() && k < 5; ++k) {
    std::cout << fmt::format("  mode {:3d}    {:+.2f} dB / {:+.2f} dB\n", r.modes[k].mode, r.modes[k].squeezing_db,
                             r.modes[k].antisqueezing_db);
  }
  for (const auto& w : run.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "output        " << dir.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Broadband squeezing simulation and mode-resolved reconstruction"};
  app.require_subcommand(1);

  Common sim;
  std::optional<std::size_t> frames, grid_points;
  std::optional<std::uint64_t> seed;
  bool analytic = false, lossless = false;
  auto* c_sim = app.add_subcommand("simulate", "Run the squeezer/amplifier chain and reconstruct");
  c_sim->add_option("--preset", sim.preset, "Named preset (default reference)");
  c_sim->add_option("--config", sim.config, "Experiment config JSON");
  c_sim->add_flag("--analytic", analytic, "Use exact covariances instead of sampled frames");
  c_sim->add_option("--frames", frames, "Frames per branch");
  c_sim->add_option("--seed", seed, "Random seed");
  c_sim->add_option("--grid-points", grid_points, "Number of frequency bins");
  c_sim->add_flag("--lossless", lossless, "Remove all loss");
  c_sim->add_option("--out", sim.out, "Output directory (default $MOPA_OUTPUT_ROOT/<name>-<hash>)");
  c_sim->add_option("--threads", sim.threads, "Sampling threads")->check(CLI::PositiveNumber);

  Common ana;
  std::string frames_dir;
  bool allow_mismatch = false;
  auto* c_ana = app.add_subcommand("analyze", "Reconstruct squeezing from recorded frames");
  c_ana->add_option("--preset", ana.preset, "Named preset");
  c_ana->add_option("--config", ana.config, "Experiment config JSON");
  c_ana->add_option("--frames-dir", frames_dir, "Directory holding frames_*.bin and sidecars")->required();
  c_ana->add_option("--out", ana.out, "Output directory");
  c_ana->add_flag("--allow-hash-mismatch", allow_mismatch, "Accept frames recorded under another config");

  std::string run_dir, figure = "all", plot_out;
  auto* c_plot = app.add_subcommand("plot-data", "Export figure-ready CSV from a run directory");
  c_plot->add_option("--run", run_dir, "Run directory written by simulate or analyze")->required();
  c_plot->add_option("--figure", figure, "spectra, psa_trace, covariance, mode_weights, overlap, squeezing or all");
  c_plot->add_option("--out", plot_out, "Output directory (default <run>/figures)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*c_sim) {
      mopa::ExperimentConfig cfg = resolve_config(sim);
      if (analytic) cfg.mode = mopa::MeasurementMode::analytic;
      if (frames) cfg.frames = *frames;
      if (seed) cfg.seed = *seed;
      if (grid_points) cfg.n_points = *grid_points;
      if (lossless) {
        cfg.pre_loss = {};
        cfg.post_loss = 0.0;
      }
      cfg.threads = sim.threads;
      mopa::validate(cfg);
      const fs::path dir = output_dir(sim, cfg, "");
      const mopa::Run run = mopa::simulate(cfg);
      mopa::write_run(run, dir, cfg.mode == mopa::MeasurementMode::monte_carlo);
      print_summary(run, dir);
    } else if (*c_ana) {
      mopa::ExperimentConfig cfg = resolve_config(ana);
      const std::string hash = mopa::config_hash(cfg);
      const auto grid = cfg.grid();
      const auto vac = mopa::read_frames(frames_dir, "vacuum", grid, hash, allow_mismatch, true);
      const auto dark = mopa::read_frames(frames_dir, "dark", grid, hash, allow_mismatch, false);
      const auto bright = mopa::read_frames(frames_dir, "bright", grid, hash, allow_mismatch, false);
      const fs::path dir = output_dir(ana, cfg, "-analysis");
      const mopa::Run run = mopa::analyze(cfg, *vac, dark, bright);
      mopa::write_run(run, dir, false);
      print_summary(run, dir);
    } else if (*c_plot) {
      const fs::path out = plot_out.empty() ? fs::path(run_dir) / "figures" : fs::path(plot_out);
      if (figure == "all") {
        for (const auto& f : mopa::figure_names()) std::cout << mopa::export_figure(run_dir, f, out).string() << "\n";
      } else {
        std::cout << mopa::export_figure(run_dir, figure, out).string() << "\n";
      }
    }
  } catch (const mopa::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed archive: " << e.what() << "\n";
    return 4;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
