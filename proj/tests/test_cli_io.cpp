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
#include <fstream>
#include <random>

#include <gtest/gtest.h>
#include "json.hpp"

#include "mopa/archive.hpp"
#include "mopa/config.hpp"
#include "mopa/errors.hpp"
#include "mopa/pipeline.hpp"

namespace mopa {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mopa_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.name = "small";
  c.n_points = 48;
  c.analysis.report_modes = 8;
  c.phase_samples = 36;
  c.frames = 3000;
  c.squeezer_gain_spread = 0.0;
  c.amplifier_gain_spread = 0.0;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MOPA_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Config, JsonRoundTrip) {
  ExperimentConfig c;
  c.pre_loss = {0.0, {{705.0, 0.1}, {713.0, 0.2}}};
  c.filter_nm = std::make_pair(706.0, 712.0);
  c.camera.read_noise_rms = 2.5;
  const json j = config_to_json(c);
  EXPECT_EQ(config_to_json(config_from_json(j)), j);
  EXPECT_EQ(config_hash(config_from_json(j)), config_hash(c));
}

TEST(Config, PresetFileMatchesDefaults) {
  EXPECT_EQ(config_to_json(load_preset("reference")), config_to_json(ExperimentConfig{}));
  EXPECT_THROW(load_preset("no-such-preset"), ConfigError);
}

TEST(Config, HashCoversPhysicsButNotExecution) {
  ExperimentConfig a;
  const std::string h = config_hash(a);
  EXPECT_EQ(h.size(), 16u);
  ExperimentConfig b = a;
  b.threads = 8;
  b.output_dir = "/tmp/elsewhere";
  EXPECT_EQ(config_hash(b), h);
  b.seed += 1;
  EXPECT_NE(config_hash(b), h);
  EXPECT_EQ(fnv1a64_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a64_hex("a"), "af63dc4c8601ec8c");
}

TEST(Config, UnknownFieldNamesPointer) {
  json j = config_to_json(ExperimentConfig{});
  j["pump"]["colour"] = "green";
  try {
    config_from_json(j);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "/pump/colour");
    EXPECT_EQ(e.exit_code(), 2);
  }
}

TEST(Config, ValueErrorsNameField) {
  json j = config_to_json(ExperimentConfig{});
  j["grid"]["n_points"] = 1;
  try {
    config_from_json(j);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "/grid/n_points");
  }
  j = config_to_json(ExperimentConfig{});
  j["gains"]["squeezer"] = "high";
  EXPECT_THROW(config_from_json(j), ConfigError);
  j = config_to_json(ExperimentConfig{});
  j["measurement"]["mode"] = "quantum";
  EXPECT_THROW(config_from_json(j), ConfigError);
  j = config_to_json(ExperimentConfig{});
  j["filter_nm"] = {712.0, 706.0};
  EXPECT_THROW(config_from_json(j), ConfigError);
}

TEST(Config, TabulatedLossInterpolates) {
  LossSpec l{0.0, {{705.0, 0.0}, {713.0, 0.8}}};
  const FrequencyGrid g = make_grid(709.0, 8.0, 3);
  const std::vector<double> t = l.transmission(g);
  EXPECT_NEAR(t[0], 1.0, 1e-12);
  EXPECT_NEAR(t[1], 1.0 - 0.8 * (g.wavelength_nm(1) - 705.0) / 8.0, 1e-12);
  EXPECT_NEAR(t[2], 0.2, 1e-12);
}

TEST(Archive, RealAndComplexRoundTrip) {
  const fs::path d = scratch("archive");
  RMatrix r(2, 3);
  r << 1.0, -2.5, 3.0, 1e-300, 4.0, 0.1;
  CMatrix c(2, 2);
  c << cplx(1, 2), cplx(3, -4), cplx(0, 0), cplx(-1, 0.5);
  ArrayMeta meta{{"row", "column"}, "photons", "test array", json::object()};
  write_array(d, "real", r, meta, "0123456789abcdef");
  write_array(d, "cplx", c, meta, "0123456789abcdef");
  json side;
  EXPECT_EQ(read_real_array(d, "real", std::string("0123456789abcdef"), &side), r);
  EXPECT_EQ(read_complex_array(d, "cplx"), c);
  EXPECT_EQ(side["shape"], json({2, 3}));
  EXPECT_EQ(side["dtype"], "float64");
  EXPECT_EQ(side["byte_order"], "little");
  EXPECT_EQ(fs::file_size(d / "real.bin"), 6u * 8u);
  EXPECT_EQ(fs::file_size(d / "cplx.bin"), 4u * 16u);
  EXPECT_TRUE(array_exists(d, "real"));
  EXPECT_FALSE(array_exists(d, "missing"));
  fs::remove_all(d);
}

TEST(Archive, DetectsCorruptionAndHashMismatch) {
  const fs::path d = scratch("corrupt");
  RMatrix r = RMatrix::Ones(4, 4);
  write_array(d, "a", r, {}, "1111111111111111");
  EXPECT_THROW(read_real_array(d, "a", std::string("2222222222222222")), IoError);
  {
    std::fstream f(d / "a.bin", std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(5);
    f.put('\x7f');
  }
  EXPECT_THROW(read_real_array(d, "a"), IoError);
  fs::resize_file(d / "a.bin", 10);
  EXPECT_THROW(read_real_array(d, "a"), IoError);
  EXPECT_THROW(read_real_array(d, "absent"), IoError);
  fs::remove_all(d);
}

TEST(Archive, CsvWithMetadata) {
  const fs::path d = scratch("csv");
  CsvTable t;
  t.metadata = {{"config_hash", "abc"}, {"units", "dB"}};
  t.columns = {"x", "y"};
  t.add_row({1.0, 0.1});
  t.add_row({2.0, -3.5});
  write_csv(d / "t.csv", t);
  EXPECT_EQ(slurp(d / "t.csv"), "# config_hash=abc\n# units=dB\nx,y\n1,0.1\n2,-3.5\n");
  EXPECT_EQ(std::stod(format_double(0.1 + 0.2)), 0.1 + 0.2);
  fs::remove_all(d);
}

TEST(Pipeline, AnalyticRunIsPhysical) {
  ExperimentConfig c = small_config();
  c.mode = MeasurementMode::analytic;
  const mopa::Run run = simulate(c);
  EXPECT_NEAR(run.model.squeezer.gain, 1.1, 1e-4);
  EXPECT_NEAR(run.model.amplifier.gain, 4.5, 1e-4);
  ASSERT_FALSE(run.report.modes.empty());
  const auto& m1 = run.report.modes.front();
  EXPECT_EQ(m1.mode, 1);
  EXPECT_LT(m1.squeezing_db, 0.0);
  EXPECT_GT(m1.antisqueezing_db, 0.0);
  EXPECT_NEAR(m1.squeezing_db, run.model.theory.front().squeezing_db, 0.2);
  EXPECT_EQ(m1.statistical_uncertainty_db, 0.0);
  EXPECT_TRUE(m1.squeezing_axis.has_value());
}

TEST(Pipeline, AnalyzeReproducesSimulate) {
  const ExperimentConfig c = small_config();
  const mopa::Run run = simulate(c);
  const fs::path d = scratch("analyze");
  write_run(run, d, true);
  const std::string h = config_hash(c);
  const auto vac = read_frames(d, "vacuum", c.grid(), h, false, true);
  const auto dark = read_frames(d, "dark", c.grid(), h, false, false);
  const auto bright = read_frames(d, "bright", c.grid(), h, false, false);
  const mopa::Run again = analyze(c, *vac, dark, bright);
  ASSERT_EQ(again.report.modes.size(), run.report.modes.size());
  for (std::size_t k = 0; k < run.report.modes.size(); ++k) {
    EXPECT_EQ(again.report.modes[k].squeezing_db, run.report.modes[k].squeezing_db);
    EXPECT_EQ(again.report.modes[k].antisqueezing_db, run.report.modes[k].antisqueezing_db);
  }
  ExperimentConfig other = c;
  other.seed += 1;
  EXPECT_THROW(read_frames(d, "vacuum", c.grid(), config_hash(other), false, true), IoError);
  EXPECT_NO_THROW(read_frames(d, "vacuum", c.grid(), config_hash(other), true, true));
  EXPECT_FALSE(read_frames(d, "nothing", c.grid(), h, false, false).has_value());
  fs::remove_all(d);
}

TEST(Pipeline, AnalyzeWithoutFringeFramesExcludesModes) {
  const ExperimentConfig c = small_config();
  const mopa::Run run = simulate(c);
  const mopa::Run partial = analyze(c, *run.vacuum.frames, std::nullopt, std::nullopt);
  EXPECT_TRUE(partial.report.modes.empty());
  EXPECT_FALSE(partial.report.excluded.empty());
}

TEST(Pipeline, TwoFramesDoNotCrash) {
  ExperimentConfig c = small_config();
  c.frames = 2;
  const mopa::Run run = simulate(c);
  for (const auto& m : run.report.modes) EXPECT_GT(m.statistical_uncertainty_db, 0.5);
}

TEST(Pipeline, PlotDataWritesEveryFigure) {
  ExperimentConfig c = small_config();
  c.mode = MeasurementMode::analytic;
  const fs::path d = scratch("plot");
  write_run(simulate(c), d, false);
  for (const auto& f : figure_names()) {
    const fs::path p = export_figure(d, f, d / "figures");
    ASSERT_TRUE(fs::exists(p)) << f;
    const std::string text = slurp(p);
    EXPECT_NE(text.find("# config_hash=" + config_hash(c)), std::string::npos) << f;
  }
  EXPECT_THROW(export_figure(d, "fig9", d / "figures"), InputError);
  fs::remove_all(d);
}

TEST(Cli, ExitCodes) {
  const fs::path d = scratch("cli");
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli("simulate --frobnicate"), 2);
  EXPECT_EQ(run_cli("simulate --preset no-such-preset"), 2);
  std::ofstream(d / "bad.json") << R"({"grid": {"n_points": 256, "bins": 3}})";
  EXPECT_EQ(run_cli("simulate --config " + (d / "bad.json").string()), 2);
  std::ofstream(d / "broken.json") << "{ not json";
  EXPECT_EQ(run_cli("simulate --config " + (d / "broken.json").string()), 2);
  EXPECT_EQ(run_cli("simulate --config " + (d / "absent.json").string()), 4);
  EXPECT_EQ(run_cli("analyze --frames-dir " + (d / "empty").string()), 4);
  EXPECT_EQ(run_cli("plot-data --run " + (d / "empty").string()), 4);
  fs::remove_all(d);
}

TEST(Cli, SimulateAnalyzeAndPlot) {
  const fs::path d = scratch("cli_run");
  ExperimentConfig c = small_config();
  write_json(d / "cfg.json", config_to_json(c));
  const fs::path run = d / "run";
  ASSERT_EQ(run_cli("simulate --config " + (d / "cfg.json").string() + " --out " + run.string()), 0);
  EXPECT_TRUE(fs::exists(run / "report.json"));
  EXPECT_TRUE(fs::exists(run / "frames_dark.bin"));
  EXPECT_EQ(read_json(run / "config.json"), config_to_json(c));
  EXPECT_EQ(run_cli("analyze --config " + (run / "config.json").string() + " --frames-dir " + run.string() +
                    " --out " + (d / "ana").string()),
            0);
  const json a = read_json(d / "ana" / "report.json");
  const json b = read_json(run / "report.json");
  EXPECT_EQ(a["modes"], b["modes"]);
  EXPECT_EQ(run_cli("analyze --preset reference --frames-dir " + run.string() + " --out " + (d / "x").string()), 4);
  EXPECT_EQ(run_cli("plot-data --run " + run.string() + " --figure squeezing"), 0);
  EXPECT_TRUE(fs::exists(run / "figures" / "squeezing.csv"));
  fs::remove_all(d);
}

}  // namespace
}  // namespace mopa
