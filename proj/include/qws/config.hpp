// SPDX-License-Identifier: Apache-2.0
#pragma once

// Experiment configuration: line-oriented "key = value" with [section]
// headers. '#' and ';' start comments. Keys before the first header are
// global (version, task). Unknown sections and keys are rejected.
//
//   version = 1
//   task = levinson
//   [channel]     q, l
//   [potential]   r0, family (none|square_well|exponential|gaussian|tabulated),
//                 depth, range, table
//   [kernel.N]    profile (gaussian_bump|polynomial_bump), center, width, a, b, lo, hi
//   [coupling]    c_I_J (1-based, symmetric; missing entries are 0)
//   [scan]        k_min, k_max, k_count, k_spacing (linear|log), k_values,
//                 E_min, E_max, E_count, E_values, dE, mu, mu_steps, E_floor, scan_points
//   [special]     function, nu, x, r0
//   [solve]       solution (regular|jost), k, E
//   [audit]       pair (phi|jost)
//   [grid]        n_inner, n_outer, r_max, r_min
//   [tolerances]  rtol, tol_eta, bound_tol, mu_resolution, grazing_tol, min_mu_step, wronskian
//   [output]      path, format (csv|json), metadata, staircase

#include "qws/model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qws {

  enum class Task { EvalSpecial, Solve, PhaseShift, WronskianAudit, BoundStates, Levinson, SturmCheck };

  const char* to_string(Task t) noexcept;
  std::optional<Task> task_from_string(const std::string& s);

  enum class OutputFormat { Csv, Json };

  struct Diagnostic {
    int line = 0;          // 0 when not tied to a line
    std::string key;       // "section.key" or ""
    std::string message;
  };

  std::string to_string(const Diagnostic& d);

  struct KernelTermConfig {
    KernelProfile::Kind kind = KernelProfile::Kind::PolynomialBump;
    double center = 0.0, width = 0.0;
    double a = 2.0, b = 2.0;
    double lo = 0.0, hi = 0.0;
  };

  struct ExperimentConfig {
    int version = 1;
    Task task = Task::EvalSpecial;
    std::string source_dir = ".";   // relative table paths resolve against this

    double q = 3.0, l = 0.0;

    double r0 = 1.0;
    LocalPotential::Family family = LocalPotential::Family::None;
    double depth = 0.0, range = 1.0;
    std::string table;
    std::vector<KernelTermConfig> kernels;
    std::vector<double> coupling;   // rank x rank, row-major

    std::vector<double> k_values;   // expanded scan grids
    std::vector<double> E_values;
    double dE = 1e-4;
    double mu = 1.0;
    std::size_t mu_steps = 200;
    double E_floor = 0.0;
    std::size_t scan_points = 400;

    std::string special_function;
    double nu = 0.0;
    std::vector<double> x_values;
    double special_r0 = 1.0;

    bool solve_jost = false;
    std::optional<double> solve_k, solve_E;

    bool audit_jost = false;

    std::size_t n_inner = 2000, n_outer = 400;
    double r_max = 0.0;             // 0: task default
    double r_min = 0.0;             // 0: task default

    double rtol = 1e-12;
    double tol_eta = 1e-2;
    double bound_tol = 1e-12;
    double mu_resolution = 1e-5;
    double grazing_tol = 1e-10;
    double min_mu_step = 1e-4;
    double wronskian_tol = 1e-8;

    std::string output_path;        // empty: stdout
    OutputFormat format = OutputFormat::Json;
    bool metadata = true;
    std::string staircase_path;

    double lambda() const { return l + 0.5 * (q - 2.0); }
    ChannelParams channel() const { return ChannelParams::make(q, l); }
    // Throws on invalid parameters (validate() reports them first).
    PotentialModel potential() const;
  };

  struct ParseResult {
    ExperimentConfig config;
    std::vector<Diagnostic> diagnostics;
    bool ok() const { return diagnostics.empty(); }
  };

  // Parses and validates in one pass; every problem found is reported.
  ParseResult parse_config(const std::string& text, const std::string& source_dir = ".");
  ParseResult load_config(const std::string& path);

  // Semantic checks on an already typed config (also run by parse_config).
  std::vector<Diagnostic> validate(const ExperimentConfig& config);

}
