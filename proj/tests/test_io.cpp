// Copyright 2026 The se3form Authors
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

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <gtest/gtest.h>

#include "se3form/catalog.hpp"
#include "se3form/io.hpp"

namespace se3form {
namespace {

namespace fs = std::filesystem;

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("se3form_io_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count(const std::string& text, const std::string& pattern) {
  const std::regex re(pattern);
  return static_cast<std::size_t>(std::distance(std::sregex_iterator(text.begin(), text.end(), re),
                                                std::sregex_iterator()));
}

Trajectory two_agent_trajectory() {
  const FrameworkState s{{Vec3(0, 0, 0), Vec3(1, 0, 0)}, {Mat3::Identity(), Mat3::Identity()}};
  const FormationGraph g{2, {{0, 1}}, {}};
  const TargetFormation t{{Vec3(0, 1, 0)}, {}};
  SimConfig cfg;
  cfg.max_steps = 1;
  cfg.record_every = 5;
  return simulate(s, g, t, ControlConfig{}, cfg);
}

TEST_F(TempDir, CsvRowsPerAgentPerSample) {
  Trajectory traj = two_agent_trajectory();
  traj.samples.resize(1);
  write_trajectory(traj, path("one.csv"));
  const std::string text = slurp(path("one.csv"));
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
  EXPECT_EQ(text.substr(0, text.find('\n')), kTrajectoryCsvHeader);
}

TEST_F(TempDir, CsvReadBackIsExact) {
  const Trajectory traj = two_agent_trajectory();
  ASSERT_EQ(traj.samples.size(), 2u);
  write_trajectory(traj, path("t.csv"));
  const auto rows = read_trajectory(path("t.csv"));
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Sample& s = traj.samples[r / 2];
    const int i = static_cast<int>(r % 2);
    EXPECT_EQ(rows[r].agent, i);
    EXPECT_EQ(rows[r].t, s.t);
    EXPECT_EQ(rows[r].p, s.state.positions[i]);
    EXPECT_EQ(rows[r].R, s.state.rotations[i]);
    EXPECT_EQ(rows[r].v, s.inputs[i].v);
    EXPECT_EQ(rows[r].w, s.inputs[i].w);
    EXPECT_EQ(rows[r].phi, s.phi);
    EXPECT_EQ(rows[r].centroid, s.centroid);
    EXPECT_EQ(rows[r].scale, s.scale);
  }
}

TEST_F(TempDir, CsvRejectsMalformedFiles) {
  std::ofstream(path("bad.csv")) << "t,agent\n1,2\n";
  EXPECT_THROW(read_trajectory(path("bad.csv")), Error);
  std::ofstream(path("short.csv")) << kTrajectoryCsvHeader << "\n0,0,1,2\n";
  EXPECT_THROW(read_trajectory(path("short.csv")), Error);
  EXPECT_THROW(read_trajectory(path("missing.csv")), Error);
}

TEST_F(TempDir, ConvergedCubeRecomputedFromFile) {
  const Scenario sc = builtin_scenario("cube8-bearing");
  const Trajectory traj = simulate(sc.initial, sc.graph, sc.target, sc.control, sc.sim);
  ASSERT_EQ(traj.termination, Termination::Converged);
  write_trajectory(traj, path("cube.csv"));
  const auto rows = read_trajectory(path("cube.csv"));
  ASSERT_GE(rows.size(), 8u);
  FrameworkState last;
  for (std::size_t r = rows.size() - 8; r < rows.size(); ++r) {
    last.positions.push_back(rows[r].p);
    last.rotations.push_back(rows[r].R);
  }
  EXPECT_LT((bearing_rigidity_function(last, sc.graph) - sc.target.bearing_function()).norm(), 1e-3);
}

TEST_F(TempDir, PlotStructure) {
  const Scenario sc = builtin_scenario("cube8-bearing");
  SimConfig cfg = sc.sim;
  cfg.max_steps = 50;
  const Trajectory traj = simulate(sc.initial, sc.graph, sc.target, sc.control, cfg);
  for (const char* proj : {"xy", "xz", "yz", "iso"}) {
    PlotOptions opts;
    opts.projection = *parse_projection(proj);
    opts.target_overlay = sc.generator->target_positions;
    emit_plot(traj, path("cube.svg"), opts);
    const std::string svg = slurp(path("cube.svg"));
    EXPECT_EQ(count(svg, "<polyline class=\"trajectory\""), 8u);
    EXPECT_EQ(count(svg, "<circle class=\"start\""), 8u);
    EXPECT_EQ(count(svg, "<rect class=\"end\""), 8u);
    EXPECT_EQ(count(svg, "<circle class=\"target\""), 8u);
    EXPECT_EQ(svg.rfind("</svg>\n"), svg.size() - 7);
  }
  EXPECT_FALSE(parse_projection("polar").has_value());
}

TEST_F(TempDir, StaticTrajectoryPlot) {
  Trajectory traj = two_agent_trajectory();
  traj.samples.resize(1);
  traj.samples.push_back(traj.samples.front());
  emit_plot(traj, path("static.svg"));
  const std::string svg = slurp(path("static.svg"));
  EXPECT_EQ(count(svg, "class=\"start\""), 2u);
  EXPECT_EQ(count(svg, "class=\"end\""), 2u);
  EXPECT_EQ(count(svg, "class=\"target\""), 0u);
  // Each polyline repeats a single point.
  const std::regex line("points=\"([^ \"]+) ([^ \"]+)\"");
  std::size_t zero_length = 0;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), line); it != std::sregex_iterator(); ++it) {
    zero_length += (*it)[1] == (*it)[2] ? 1 : 0;
  }
  EXPECT_EQ(zero_length, 2u);
}

TEST_F(TempDir, EmptyTrajectoryIsAnError) {
  EXPECT_THROW(emit_plot(Trajectory{}, path("empty.svg")), Error);
  EXPECT_FALSE(fs::exists(path("empty.svg")));
}

}  // namespace
}  // namespace se3form
