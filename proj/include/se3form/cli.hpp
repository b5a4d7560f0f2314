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

// Command-line front end. run_cli is callable in-process so the tests can
// drive it; tools/se3form.cpp is a thin main() around it.

#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <future>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "se3form/catalog.hpp"
#include "se3form/control.hpp"
#include "se3form/error.hpp"
#include "se3form/io.hpp"
#include "se3form/rigidity.hpp"
#include "se3form/scenario.hpp"
#include "se3form/simulation.hpp"

namespace se3form {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitNumerical = 2 };

namespace cli {

inline std::string sci(double x, int digits = 3) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*e", digits, x);
  return buf;
}

inline int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::NumericalFailure:
    case ErrorCode::CoincidentAgents:
    case ErrorCode::Degenerate:
      return kExitNumerical;
    default:
      return kExitUsage;
  }
}

struct JobResult {
  std::string report;
  int status = kExitOk;
};

inline JobResult simulate_one(const Scenario& s, const std::filesystem::path& out_dir,
                              Projection projection) {
  JobResult r;
  std::ostringstream os;
  const Trajectory traj = simulate(s.initial, s.graph, s.target, s.control, s.sim);
  const auto csv = out_dir / (s.name + ".csv");
  const auto svg = out_dir / (s.name + ".svg");
  write_trajectory(traj, csv.string());
  PlotOptions plot;
  plot.projection = projection;
  if (s.graph.m_d() > 0 && s.generator) plot.target_overlay = s.generator->target_positions;
  emit_plot(traj, svg.string(), plot);

  const StepMetrics& last = traj.metrics.back();
  os << s.name << ": " << to_string(traj.termination) << " after " << last.step << " steps (t = "
     << last.t << ")\n"
     << "  final phi " << sci(last.phi) << ", |b - b*| " << sci(last.bearing_residual)
     << ", |d - d*| " << sci(last.distance_residual) << '\n';
  if (traj.metrics.size() >= 2) {
    const InvariantReport inv = invariant_report(traj);
    os << "  centroid drift " << sci(inv.centroid_drift) << ", scale drift " << sci(inv.scale_drift)
       << " (s0 = " << inv.initial_scale << "), final ds/dt " << sci(inv.final_scale_rate)
       << ", max |R^T R - I| " << sci(inv.max_orthonormality_defect) << '\n';
  }
  if (!traj.message.empty()) os << "  " << traj.message << '\n';
  os << "  wrote " << csv.string() << " and " << svg.string() << '\n';
  r.report = os.str();
  if (traj.termination == Termination::NumericalFailure) r.status = kExitNumerical;
  return r;
}

inline Eigen::MatrixXd law_matrix(const Scenario& s, const FrameworkState& state) {
  return s.control.law == ControlLaw::BearingOnly ? bearing_rigidity_matrix(state, s.graph)
                                                  : mixed_rigidity_matrix(state, s.graph).assembled;
}

}  // namespace cli

/// Entry point. `args` excludes the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Formation control on SE(3) with bearing and distance constraints", "se3form"};
  app.require_subcommand(1);

  auto* list_cmd = app.add_subcommand("list", "List the built-in scenarios");

  auto* show_cmd = app.add_subcommand("show", "Print a scenario in fully expanded JSON");
  std::string show_target;
  show_cmd->add_option("scenario", show_target, "Built-in name or scenario file")->required();

  auto* sim_cmd = app.add_subcommand("simulate", "Run scenarios; write <name>.csv and <name>.svg");
  std::vector<std::string> sim_targets;
  std::string out_dir = ".";
  std::string projection_name = "iso";
  bool all = false;
  sim_cmd->add_option("scenario", sim_targets, "Built-in names or scenario files");
  sim_cmd->add_option("--out", out_dir, "Output directory");
  sim_cmd->add_option("--projection", projection_name, "Plot projection: xy, xz, yz or iso");
  sim_cmd->add_flag("--all", all, "Run every built-in scenario as parallel jobs");

  auto* analyze_cmd = app.add_subcommand("analyze", "Rank and null space of the rigidity matrix");
  std::string analyze_target;
  double null_tol = kDefaultNullTolerance;
  std::string at = "initial";
  analyze_cmd->add_option("scenario", analyze_target, "Built-in name or scenario file")->required();
  analyze_cmd->add_option("--tol", null_tol, "Relative singular-value threshold");
  analyze_cmd->add_option("--at", at, "Configuration: initial or target");

  auto* grad_cmd = app.add_subcommand("gradcheck", "Compare analytic derivatives with finite differences");
  std::string grad_target;
  double h = 1e-6;
  grad_cmd->set_help_flag("--help", "Print this help message and exit");
  grad_cmd->add_option("scenario", grad_target, "Built-in name or scenario file")->required();
  grad_cmd->add_option("--h", h, "Finite-difference step");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*list_cmd) {
      for (const std::string& name : builtin_names()) {
        const Scenario s = builtin_scenario(name);
        out << name << "  n=" << s.graph.n << " bearing=" << s.graph.m_b()
            << " distance=" << s.graph.m_d()
            << " law=" << (s.control.law == ControlLaw::BearingOnly ? "bearing_only" : "mixed") << '\n';
      }
      return kExitOk;
    }

    if (*show_cmd) {
      out << scenario_to_json(resolve_scenario(show_target)).dump(2) << '\n';
      return kExitOk;
    }

    if (*sim_cmd) {
      const auto projection = parse_projection(projection_name);
      if (!projection) {
        err << "error: unknown projection '" << projection_name << "'\n";
        return kExitUsage;
      }
      if (all) {
        for (const std::string& name : builtin_names()) sim_targets.push_back(name);
      }
      if (sim_targets.empty()) {
        err << "error: simulate needs a scenario or --all\n\n" << sim_cmd->help();
        return kExitUsage;
      }
      std::filesystem::create_directories(out_dir);
      std::vector<Scenario> scenarios;
      for (const std::string& t : sim_targets) scenarios.push_back(resolve_scenario(t));

      std::vector<std::future<cli::JobResult>> jobs;
      for (const Scenario& s : scenarios) {
        jobs.push_back(std::async(all ? std::launch::async : std::launch::deferred,
                                  [&s, &out_dir, p = *projection] {
                                    return cli::simulate_one(s, out_dir, p);
                                  }));
      }
      int status = kExitOk;
      for (auto& job : jobs) {
        const cli::JobResult r = job.get();
        out << r.report;
        status = std::max(status, r.status);
      }
      if (status == kExitNumerical) err << "error: numerical failure during simulation\n";
      return status;
    }

    if (*analyze_cmd) {
      const Scenario s = resolve_scenario(analyze_target);
      FrameworkState state;
      if (at == "initial") {
        state = s.initial;
      } else if (at == "target") {
        if (!s.generator) {
          err << "error: --at target needs a scenario with generator target positions\n";
          return kExitUsage;
        }
        state = FrameworkState::at_positions(s.generator->target_positions);
      } else {
        err << "error: --at must be 'initial' or 'target'\n";
        return kExitUsage;
      }
      const Eigen::MatrixXd M = cli::law_matrix(s, state);
      const MotionSpace ns = infinitesimal_motion_space(M, null_tol);
      out << "scenario: " << s.name << " (" << at << " configuration)\n"
          << "matrix: " << M.rows() << " x " << M.cols()
          << (s.control.law == ControlLaw::BearingOnly ? " bearing" : " mixed") << " rigidity matrix\n"
          << "rank: " << ns.rank << '\n'
          << "null-space dimension: " << ns.dimension() << '\n'
          << "singular values:";
      for (Eigen::Index i = 0; i < ns.singular_values.size(); ++i) out << ' ' << cli::sci(ns.singular_values(i), 2);
      out << "\nnull-space basis:\n";
      for (int c = 0; c < ns.dimension(); ++c) {
        out << "  v" << c + 1 << ":";
        for (Eigen::Index r = 0; r < ns.basis.rows(); ++r) {
          const double x = ns.basis(r, c);
          if (std::abs(x) < 1e-9) continue;
          char buf[48];
          std::snprintf(buf, sizeof buf, " %s=%+.6f", coordinate_label(static_cast<int>(r), s.graph.n).c_str(), x);
          out << buf;
        }
        out << '\n';
      }
      return kExitOk;
    }

    if (*grad_cmd) {
      const Scenario s = resolve_scenario(grad_target);
      const FrameworkState& x = s.initial;
      const auto which = s.control.law == ControlLaw::BearingOnly ? RigidityFunction::Bearing
                                                                  : RigidityFunction::Mixed;
      const double matrix_err =
          max_relative_error(cli::law_matrix(s, x), finite_difference_jacobian(x, s.graph, h, which));
      const Eigen::VectorXd oracle = gradient_oracle(x, s.graph, s.target, s.control.law, h);
      const double grad_err = max_relative_error(potential_gradient(x, s.graph, s.target, s.control.law), oracle);
      ControlConfig full = s.control;
      full.mode = ControlMode::FullGradient;
      full.normalized = false;
      const Eigen::VectorXd rate = configuration_rate(x, compute_control(x, s.graph, s.target, full));
      const double control_err = max_relative_error(rate, -full.gain * oracle);
      const double worst = std::max({matrix_err, grad_err, control_err});
      out << "scenario: " << s.name << " (h = " << h << ")\n"
          << "rigidity matrix vs finite differences: max relative error " << cli::sci(matrix_err) << '\n'
          << "potential gradient vs finite differences: max relative error " << cli::sci(grad_err) << '\n'
          << "full-gradient control vs -k * oracle: max relative error " << cli::sci(control_err) << '\n'
          << "max error " << cli::sci(worst) << (worst < 1e-5 ? " (ok)" : " (exceeds 1e-5)") << '\n';
      return worst < 1e-5 ? kExitOk : kExitNumerical;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return cli::exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace se3form
