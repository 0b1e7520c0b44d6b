// SPDX-License-Identifier: Apache-2.0
#include "qws/runner.hpp"
#include "qws/error.hpp"
#include "qws/spectral.hpp"
#include "qws/specfun.hpp"
#include "parallel.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <ctime>
#include <numbers>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace qws {

  namespace {

    using json = nlohmann::ordered_json;

    constexpr const char* program_version = "1.0.0";

    std::string num(double v)
    {
      if (std::isnan(v))
        return "nan";
      if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      return buf;
    }

    // Non-finite values have no JSON number form; they go out as strings.
    json jnum(double v)
    {
      if (!std::isfinite(v))
        return num(v);
      return v;
    }

    std::string utc_now()
    {
      std::time_t t = std::time(nullptr);
      std::tm tm{};
      gmtime_r(&t, &tm);
      char buf[32];
      std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
      return buf;
    }

    struct Sink {
      const ExperimentConfig& cfg;
      const RunOptions& opt;

      json metadata() const
      {
        json m;
        m["program"] = "qws";
        m["version"] = program_version;
        m["task"] = to_string(cfg.task);
        m["generated_utc"] = utc_now();
        m["threads"] = opt.threads;
        return m;
      }

      std::string finish(json j) const
      {
        if (cfg.metadata)
          j["metadata"] = metadata();
        return j.dump(2) + "\n";
      }

      std::string csv(const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) const
      {
        std::string out;
        if (cfg.metadata)
          out += "# qws " + std::string(program_version) + " task=" + to_string(cfg.task)
                 + " generated_utc=" + utc_now() + " threads=" + std::to_string(opt.threads) + "\n";
        auto line = [&](const std::vector<std::string>& cells) {
          for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i)
              out += ',';
            out += cells[i];
          }
          out += '\n';
        };
        line(header);
        for (const auto& r : rows)
          line(r);
        return out;
      }
    };

    json channel_json(const ExperimentConfig& c)
    {
      json j;
      j["q"] = jnum(c.q);
      j["l"] = jnum(c.l);
      j["lambda"] = jnum(c.lambda());
      return j;
    }

    IntegratorOptions integrator(const ExperimentConfig& c)
    {
      IntegratorOptions o;
      o.rtol = c.rtol;
      return o;
    }

    RadialGrid task_grid(const ExperimentConfig& c, const PotentialModel& model, double r_max_default,
                         double r_min_default)
    {
      const double r_max = c.r_max > 0.0 ? c.r_max : r_max_default;
      const double r_min = c.r_min > 0.0 ? c.r_min : r_min_default;
      const auto bp = model.breakpoints();
      return RadialGrid::make(c.r0, r_max, c.n_inner, c.n_outer, bp, r_min);
    }

    // psi(x): reflection below 1/2, upward recurrence, then the asymptotic series.
    double digamma(double x)
    {
      if (x < 0.5)
        return digamma(1.0 - x) - std::numbers::pi / std::tan(std::numbers::pi * x);
      double acc = 0.0;
      while (x < 15.0) {
        acc -= 1.0 / x;
        x += 1.0;
      }
      const double z = 1.0 / (x * x);
      return acc + std::log(x) - 0.5 / x
             - z * (1.0 / 12 - z * (1.0 / 120 - z * (1.0 / 252 - z * (1.0 / 240 - z * (1.0 / 132)))));
    }

    void eval_special(const ExperimentConfig& c, const Sink& sink, RunResult& res)
    {
      const std::string& f = c.special_function;
      struct Rec {
        double value, derivative, est_error;
      };
      std::vector<Rec> recs;
      for (double x : c.x_values) {
        if (f == "gamma") {
          const double g = specfun::gamma(x);
          recs.push_back({g, g * digamma(x), 1e-14});
        } else if (f == "bessel_j" || f == "bessel_y") {
          auto e = f == "bessel_j" ? specfun::bessel_j(c.nu, x) : specfun::bessel_y(c.nu, x);
          recs.push_back({e.value, e.derivative, e.est_error});
        } else if (f == "bessel_i" || f == "bessel_k") {
          auto m = specfun::bessel_i_k(c.nu, x);
          if (f == "bessel_i")
            recs.push_back({m.i(x), m.ip(x), m.est_error});
          else
            recs.push_back({m.k(x), m.kp(x), m.est_error});
        } else {
          const double v = specfun::log_derivative_exterior(c.nu, x, c.special_r0);
          recs.push_back({v, std::nan(""), 1e-13});
        }
      }
      if (c.format == OutputFormat::Csv) {
        std::vector<std::vector<std::string>> rows;
        for (std::size_t i = 0; i < recs.size(); ++i)
          rows.push_back({f, num(c.nu), num(c.x_values[i]), num(recs[i].value), num(recs[i].derivative),
                          num(recs[i].est_error)});
        res.primary = sink.csv({"function", "nu", "x", "value", "derivative", "est_error"}, rows);
        return;
      }
      auto record = [&](std::size_t i) {
        json r;
        r["x"] = jnum(c.x_values[i]);
        r["value"] = jnum(recs[i].value);
        r["derivative"] = jnum(recs[i].derivative);
        r["est_error"] = jnum(recs[i].est_error);
        return r;
      };
      json j;
      j["function"] = f;
      if (f != "gamma")
        j["nu"] = jnum(c.nu);
      if (recs.size() == 1) {
        const json r = record(0);
        for (auto it = r.begin(); it != r.end(); ++it)
          j[it.key()] = it.value();
      } else {
        j["records"] = json::array();
        for (std::size_t i = 0; i < recs.size(); ++i)
          j["records"].push_back(record(i));
      }
      res.primary = sink.finish(std::move(j));
    }

    void solve(const ExperimentConfig& c, const Sink& sink, RunResult& res)
    {
      const auto model = c.potential();
      const auto grid = task_grid(c, model, 3.0 * c.r0, 0.0);
      const cplx k2 = c.solve_k ? cplx(*c.solve_k * *c.solve_k) : cplx(*c.solve_E);
      const auto eq = effective_equation(c.channel(), model, k2, c.mu);
      RadialSolution sol;
      if (c.solve_jost)
        sol = integrate_jost(eq, grid, *c.solve_k, integrator(c));
      else
        sol = solve_nonlocal(eq, grid, integrator(c));
      const auto& r = sol.grid.nodes();
      if (c.format == OutputFormat::Csv) {
        std::vector<std::vector<std::string>> rows;
        for (std::size_t i = 0; i < r.size(); ++i)
          rows.push_back({num(r[i]), num(sol.y[i].real()), num(sol.y[i].imag()), num(sol.dy[i].real()),
                          num(sol.dy[i].imag())});
        res.primary = sink.csv({"r", "re_y", "im_y", "re_dy", "im_dy"}, rows);
        return;
      }
      json j;
      j["channel"] = channel_json(c);
      j["solution"] = c.solve_jost ? "jost" : "regular";
      j["k2"] = jnum(k2.real());
      j["mu"] = jnum(c.mu);
      j["start_truncation"] = jnum(sol.start_truncation);
      json cols = {{"r", json::array()}, {"re_y", json::array()}, {"im_y", json::array()},
                   {"re_dy", json::array()}, {"im_dy", json::array()}};
      for (std::size_t i = 0; i < r.size(); ++i) {
        cols["r"].push_back(jnum(r[i]));
        cols["re_y"].push_back(jnum(sol.y[i].real()));
        cols["im_y"].push_back(jnum(sol.y[i].imag()));
        cols["re_dy"].push_back(jnum(sol.dy[i].real()));
        cols["im_dy"].push_back(jnum(sol.dy[i].imag()));
      }
      j["values"] = std::move(cols);
      res.primary = sink.finish(std::move(j));
    }

    void phase_shift_task(const ExperimentConfig& c, const Sink& sink, RunResult& res, unsigned threads)
    {
      PhaseShiftOptions po;
      po.mu_steps = c.mu_steps;
      po.min_mu_step = c.min_mu_step;
      po.integrator = integrator(c);
      const auto curve = phase_shift_curve(c.channel(), c.potential(), c.k_values, c.mu, po, threads);
      if (c.format == OutputFormat::Csv) {
        std::vector<std::vector<std::string>> rows;
        for (const auto& p : curve.samples)
          rows.push_back({num(p.k), num(p.mu), num(p.eta_raw), num(p.eta), num(p.A), num(p.tan_eta_matching),
                          num(p.tan_eta_low_k), num(p.method_gap), std::to_string(p.jumps.size())});
        res.primary = sink.csv({"k", "mu", "eta_raw", "eta_unwrapped", "A", "tan_eta_matching", "tan_eta_low_k",
                                "method_gap", "jumps"},
                               rows);
        return;
      }
      json j;
      j["channel"] = channel_json(c);
      j["mu"] = jnum(c.mu);
      j["samples"] = json::array();
      for (const auto& p : curve.samples) {
        json s;
        s["k"] = jnum(p.k);
        s["eta_raw"] = jnum(p.eta_raw);
        s["eta_unwrapped"] = jnum(p.eta);
        s["A"] = jnum(p.A);
        s["tan_eta_matching"] = jnum(p.tan_eta_matching);
        s["tan_eta_fit"] = jnum(p.tan_eta_fit);
        s["tan_eta_low_k"] = jnum(p.tan_eta_low_k);
        s["method_gap"] = jnum(p.method_gap);
        s["jumps"] = json::array();
        for (const auto& e : p.jumps)
          s["jumps"].push_back({{"mu_lo", jnum(e.mu_lo)}, {"mu_hi", jnum(e.mu_hi)}, {"direction", e.direction}});
        j["samples"].push_back(std::move(s));
      }
      res.primary = sink.finish(std::move(j));
    }

    void wronskian_task(const ExperimentConfig& c, const Sink& sink, RunResult& res, unsigned threads)
    {
      const auto model = c.potential();
      const auto ch = c.channel();
      const double lambda = c.lambda();
      // Jost pairs lose relative precision like r^{2 lambda} near the origin,
      // so their audit grid starts at 0.1 r0.
      const auto grid = task_grid(c, model, 2.0 * c.r0, c.audit_jost ? 0.1 * c.r0 : 0.0);
      std::vector<WronskianReport> reps(c.k_values.size());
      detail::parallel_for(reps.size(), threads, [&](std::size_t i) {
        const double k = c.k_values[i];
        const auto eq = effective_equation(ch, model, cplx(k * k), c.mu);
        if (c.audit_jost) {
          reps[i] = wronskian(integrate_jost(eq, grid, k, integrator(c)), integrate_jost(eq, grid, -k, integrator(c)));
        } else {
          IntegratorOptions refl = integrator(c);
          refl.allow_reflected_branch = true;
          reps[i] = wronskian(integrate_regular(eq, grid, integrator(c)),
                              integrate_regular(eq.with_lambda(-lambda), grid, refl));
        }
      });
      bool all = true;
      std::vector<std::vector<std::string>> rows;
      json list = json::array();
      for (std::size_t i = 0; i < reps.size(); ++i) {
        const auto& w = reps[i];
        const bool pass = w.passes(c.wronskian_tol);
        all = all && pass;
        const double rel = w.max_deviation / std::abs(w.expected);
        rows.push_back({num(c.k_values[i]), to_string(w.pair), num(w.expected.real()), num(w.expected.imag()),
                        num(w.max_deviation), num(rel), num(w.stddev), pass ? "true" : "false"});
        json r;
        r["k"] = jnum(c.k_values[i]);
        r["pair"] = to_string(w.pair);
        r["expected"] = {jnum(w.expected.real()), jnum(w.expected.imag())};
        r["max_deviation"] = jnum(w.max_deviation);
        r["relative_deviation"] = jnum(rel);
        r["stddev"] = jnum(w.stddev);
        r["grid_points"] = w.r.size();
        r["pass"] = pass;
        list.push_back(std::move(r));
      }
      if (c.format == OutputFormat::Csv) {
        res.primary = sink.csv({"k", "pair", "expected_re", "expected_im", "max_deviation", "relative_deviation",
                                "stddev", "pass"},
                               rows);
      } else {
        json j;
        j["channel"] = channel_json(c);
        j["tolerance"] = jnum(c.wronskian_tol);
        j["pass"] = all;
        j["reports"] = std::move(list);
        res.primary = sink.finish(std::move(j));
      }
      if (!all) {
        res.exit_code = exit_verification_failed;
        res.category = "fail";
        res.message = "Wronskian deviation above tolerance";
      }
    }

    BoundStateOptions bound_options(const ExperimentConfig& c)
    {
      BoundStateOptions b;
      b.E_floor = c.E_floor;
      b.scan_points = c.scan_points;
      b.tol = c.bound_tol;
      b.integrator = integrator(c);
      return b;
    }

    void bound_states_task(const ExperimentConfig& c, const Sink& sink, RunResult& res)
    {
      const auto s = find_bound_states(c.channel(), c.potential(), c.mu, bound_options(c));
      if (c.format == OutputFormat::Csv) {
        std::vector<std::vector<std::string>> rows;
        for (std::size_t i = 0; i < s.levels.size(); ++i) {
          const auto& b = s.levels[i];
          rows.push_back({std::to_string(i), num(b.E), num(b.kappa), std::to_string(b.interior_nodes),
                          num(b.matching_residual)});
        }
        res.primary = sink.csv({"index", "E", "kappa", "nodes", "matching_residual"}, rows);
      } else {
        json j;
        j["channel"] = channel_json(c);
        j["mu"] = jnum(c.mu);
        j["E_floor"] = jnum(s.E_floor);
        j["E_ceiling"] = jnum(s.E_ceiling);
        j["count"] = s.levels.size();
        if (s.sturm_count >= 0)
          j["node_count"] = s.sturm_count;
        j["levels"] = json::array();
        for (const auto& b : s.levels)
          j["levels"].push_back({{"E", jnum(b.E)},
                                 {"kappa", jnum(b.kappa)},
                                 {"nodes", b.interior_nodes},
                                 {"matching_residual", jnum(b.matching_residual)}});
        j["warnings"] = s.warnings;
        res.primary = sink.finish(std::move(j));
      }
      for (const auto& w : s.warnings)
        std::cerr << "warning: " << w << "\n";
    }

    void levinson_task(const ExperimentConfig& c, const Sink& sink, RunResult& res)
    {
      LevinsonOptions lo;
      lo.tol_eta = c.tol_eta;
      lo.mu = c.mu;
      lo.mu_steps = c.mu_steps;
      lo.phase.min_mu_step = c.min_mu_step;
      lo.phase.integrator = integrator(c);
      lo.bound = bound_options(c);
      lo.continuation.mu_resolution = c.mu_resolution;
      lo.continuation.grazing_tol = c.grazing_tol;
      lo.continuation.integrator = integrator(c);
      const auto rep = levinson_verify(c.channel(), c.potential(), lo);
      const bool pass = rep.status == LevinsonStatus::Pass;

      if (c.format == OutputFormat::Csv) {
        res.primary = sink.csv({"lambda", "k1", "k2", "eta_k1", "eta_k2", "eta0", "n", "n_continuation", "pass", "status"},
                               {{num(c.lambda()), num(rep.k1), num(rep.k2), num(rep.eta_k1), num(rep.eta_k2),
                                 num(rep.eta0), std::to_string(rep.n_direct), std::to_string(rep.n_continuation),
                                 pass ? "true" : "false", to_string(rep.status)}});
      } else {
        json j;
        j["channel"] = channel_json(c);
        j["mu"] = jnum(c.mu);
        j["eta0"] = jnum(rep.eta0);
        j["n"] = rep.n_direct;
        j["n_continuation"] = rep.n_continuation;
        j["pass"] = pass;
        j["status"] = to_string(rep.status);
        j["message"] = rep.message;
        j["tol_eta"] = jnum(c.tol_eta);
        j["k1"] = jnum(rep.k1);
        j["k2"] = jnum(rep.k2);
        j["eta_k1"] = jnum(rep.eta_k1);
        j["eta_k2"] = jnum(rep.eta_k2);
        j["levels"] = json::array();
        for (const auto& b : rep.bound_states.levels)
          j["levels"].push_back(jnum(b.E));
        j["crossings"] = json::array();
        for (const auto& e : rep.continuation.events)
          j["crossings"].push_back(
            {{"mu", jnum(e.mu)}, {"direction", e.direction == CrossingDirection::Down ? "down" : "up"}});
        j["n_down"] = rep.continuation.n_down;
        j["n_up"] = rep.continuation.n_up;
        res.primary = sink.finish(std::move(j));
      }

      const auto& cr = rep.continuation;
      if (!cr.mu_grid.empty()) {
        std::vector<std::vector<std::string>> rows;
        for (std::size_t i = 0; i < cr.mu_grid.size(); ++i)
          rows.push_back({num(cr.mu_grid[i]), num(cr.A[i]), num(cr.A[i] - cr.threshold_value), num(cr.staircase[i])});
        res.staircase = sink.csv({"mu", "A", "A_minus_threshold", "staircase"}, rows);
      }

      if (rep.status == LevinsonStatus::Inconclusive) {
        res.exit_code = exit_inconclusive;
        res.category = "inconclusive";
        res.message = rep.message;
      } else if (!pass) {
        res.exit_code = exit_verification_failed;
        res.category = "fail";
        res.message = rep.message;
      }
    }

    void sturm_task(const ExperimentConfig& c, const Sink& sink, RunResult& res, unsigned threads)
    {
      const auto model = c.potential();
      const auto ch = c.channel();
      std::vector<SturmCheck> out(c.E_values.size());
      detail::parallel_for(out.size(), threads, [&](std::size_t i) {
        out[i] = sturm_liouville_check(ch, model, c.mu, c.E_values[i], c.dE, integrator(c));
      });
      std::vector<std::vector<std::string>> rows;
      json list = json::array();
      for (const auto& s : out) {
        rows.push_back({num(s.E), num(s.dE), num(s.slope_interior), num(s.slope_exterior),
                        num(s.slope_interior_integral), num(s.slope_exterior_integral), s.signs_ok() ? "true" : "false"});
        list.push_back({{"E", jnum(s.E)},
                        {"dE", jnum(s.dE)},
                        {"slope_interior", jnum(s.slope_interior)},
                        {"slope_exterior", jnum(s.slope_exterior)},
                        {"slope_interior_integral", jnum(s.slope_interior_integral)},
                        {"slope_exterior_integral", jnum(s.slope_exterior_integral)},
                        {"signs_ok", s.signs_ok()}});
      }
      if (c.format == OutputFormat::Csv) {
        res.primary = sink.csv({"E", "dE", "slope_interior", "slope_exterior", "slope_interior_integral",
                                "slope_exterior_integral", "signs_ok"},
                               rows);
      } else {
        json j;
        j["channel"] = channel_json(c);
        j["mu"] = jnum(c.mu);
        j["checks"] = std::move(list);
        res.primary = sink.finish(std::move(j));
      }
    }

    void write_file(const std::string& path, const std::string& text)
    {
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      if (!out)
        fail(ErrorCategory::Io, "cannot open output file '" + path + "'");
      out << text;
      if (!out)
        fail(ErrorCategory::Io, "failed writing output file '" + path + "'");
    }

    std::string json_escape(const std::string& s) { return json(s).dump(); }

  }

  RunResult execute(const ExperimentConfig& config, const RunOptions& opt)
  {
    RunResult res;
    const unsigned threads = std::max(1u, opt.threads);
    const auto diags = validate(config);
    if (!diags.empty()) {
      res.exit_code = exit_config;
      res.category = to_string(ErrorCategory::Config);
      res.message = to_string(diags.front());
      for (std::size_t i = 1; i < diags.size(); ++i)
        res.message += "; " + to_string(diags[i]);
      return res;
    }
    const Sink sink{config, opt};
    try {
      switch (config.task) {
      case Task::EvalSpecial: eval_special(config, sink, res); break;
      case Task::Solve: solve(config, sink, res); break;
      case Task::PhaseShift: phase_shift_task(config, sink, res, threads); break;
      case Task::WronskianAudit: wronskian_task(config, sink, res, threads); break;
      case Task::BoundStates: bound_states_task(config, sink, res); break;
      case Task::Levinson: levinson_task(config, sink, res); break;
      case Task::SturmCheck: sturm_task(config, sink, res, threads); break;
      }
    } catch (const Error& e) {
      res = RunResult{};
      res.exit_code = e.category() == ErrorCategory::Config ? exit_config : exit_numeric;
      res.category = to_string(e.category());
      res.message = e.what();
    } catch (const std::exception& e) {
      res = RunResult{};
      res.exit_code = exit_numeric;
      res.category = "internal";
      res.message = e.what();
    }
    return res;
  }

  RunResult run(const ExperimentConfig& config, const RunOptions& opt)
  {
    RunResult res = execute(config, opt);
    if (res.primary.empty() && res.staircase.empty())
      return res;
    try {
      if (config.output_path.empty())
        std::cout << res.primary << std::flush;
      else
        write_file(config.output_path, res.primary);
      std::string stair = config.staircase_path;
      if (stair.empty() && !config.output_path.empty()) {
        std::filesystem::path p(config.output_path);
        p.replace_extension();
        stair = p.string() + "_staircase.csv";
      }
      if (!res.staircase.empty() && !stair.empty())
        write_file(stair, res.staircase);
    } catch (const Error& e) {
      res.exit_code = exit_numeric;
      res.category = to_string(e.category());
      res.message = e.what();
    }
    return res;
  }

  std::string status_trailer(const RunResult& r)
  {
    return "QWS-STATUS {\"exit\":" + std::to_string(r.exit_code) + ",\"category\":" + json_escape(r.category)
           + ",\"message\":" + json_escape(r.message) + "}";
  }

}
