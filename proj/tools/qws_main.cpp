// qws command line front end. Everything goes through the C API.
#include "qws/qws.h"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

  constexpr int exit_config = 2;

  struct Common {
    std::string config;
    std::string out;
    std::string format;
    int threads = 0;
    bool no_metadata = false;
  };

  void add_common(CLI::App* sub, Common& c, bool config_required)
  {
    auto* opt = sub->add_option("--config", c.config, "experiment configuration file");
    if (config_required)
      opt->required();
    sub->add_option("--out", c.out, "output file, - for stdout (default: [output] path, else stdout)");
    sub->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--threads", c.threads, "worker threads (default: $QWS_THREADS or 1)")->check(CLI::PositiveNumber);
    sub->add_flag("--no-metadata", c.no_metadata, "omit the time-stamped metadata block");
  }

  unsigned thread_count(const Common& c)
  {
    if (c.threads > 0)
      return static_cast<unsigned>(c.threads);
    if (const char* env = std::getenv("QWS_THREADS")) {
      char* end = nullptr;
      const long v = std::strtol(env, &end, 10);
      if (end != env && *end == '\0' && v > 0)
        return static_cast<unsigned>(v);
      std::cerr << "warning: ignoring QWS_THREADS='" << env << "'\n";
    }
    return 1;
  }

  int config_failure(const std::string& msg)
  {
    std::cerr << "error: " << msg << "\n";
    std::cerr << "QWS-STATUS {\"exit\":2,\"category\":\"config\",\"message\":\"";
    for (char ch : msg) {
      if (ch == '"' || ch == '\\')
        std::cerr << '\\';
      std::cerr << ch;
    }
    std::cerr << "\"}\n";
    return exit_config;
  }

  // Loads (or wraps) the config, reports diagnostics; nullptr on failure.
  qws_config* open_config(const std::string& path, const std::string& inline_text)
  {
    qws_config* cfg = nullptr;
    const qws_status s = inline_text.empty() ? qws_config_load(path.c_str(), &cfg)
                                             : qws_config_parse(inline_text.c_str(), ".", &cfg);
    if (s != QWS_OK) {
      std::cerr << "error: " << qws_last_error() << "\n";
      return nullptr;
    }
    const size_t n = qws_config_diagnostic_count(cfg);
    for (size_t i = 0; i < n; ++i)
      std::cerr << (path.empty() ? "<args>" : path) << ": " << qws_config_diagnostic(cfg, i) << "\n";
    return cfg;
  }

  int run_task(const std::string& task, const Common& c, const std::string& inline_text = {})
  {
    qws_config* cfg = open_config(c.config, inline_text);
    if (!cfg)
      return config_failure("cannot load configuration");
    if (qws_config_diagnostic_count(cfg) > 0) {
      const std::string first = qws_config_diagnostic(cfg, 0);
      qws_config_destroy(cfg);
      return config_failure(first);
    }
    if (!task.empty() && task != qws_config_task(cfg)) {
      const std::string msg = "config task '" + std::string(qws_config_task(cfg)) + "' does not match subcommand '"
                              + task + "'";
      qws_config_destroy(cfg);
      return config_failure(msg);
    }
    if (qws_config_set_output(cfg, c.out.empty() ? nullptr : c.out == "-" ? "" : c.out.c_str(),
                              c.format.empty() ? nullptr : c.format.c_str(), c.no_metadata ? 0 : -1)
        != QWS_OK) {
      const std::string msg = qws_last_error();
      qws_config_destroy(cfg);
      return config_failure(msg);
    }
    const int code = qws_config_run(cfg, thread_count(c));
    if (code != 0)
      std::cerr << "error: " << qws_last_error() << "\n";
    std::cerr << qws_last_run_trailer() << "\n";
    qws_config_destroy(cfg);
    return code;
  }

  std::string special_text(const std::vector<std::string>& args)
  {
    // gamma X [X...] | bessel_j NU X [X...] | ...
    std::ostringstream ss;
    ss << "version = 1\ntask = eval-special\n[special]\nfunction = " << args[0] << "\n";
    std::size_t first_x = 1;
    if (args[0] != "gamma") {
      if (args.size() < 3)
        throw CLI::ValidationError("eval-special", args[0] + " needs NU and at least one X");
      ss << "nu = " << args[1] << "\n";
      first_x = 2;
    }
    if (args.size() <= first_x)
      throw CLI::ValidationError("eval-special", "missing X");
    ss << "x = ";
    for (std::size_t i = first_x; i < args.size(); ++i)
      ss << (i > first_x ? ", " : "") << args[i];
    ss << "\n";
    return ss.str();
  }

}

int main(int argc, char** argv)
{
  CLI::App app{"q-dimensional central-potential scattering: phase shifts, bound states, Levinson checks"};
  app.set_version_flag("--version", std::string(qws_version()));
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, std::string>> tasks = {
    {"solve", "dump a regular or Jost solution (r, Re y, Im y, Re y', Im y')"},
    {"phase-shift", "phase shifts over a k grid, continued in the coupling from 0"},
    {"wronskian-audit", "Wronskian constancy of the phi or Jost pair"},
    {"bound-states", "bound-state energies below threshold"},
    {"levinson", "check eta(0) = n pi with two independent bound-state counts"},
    {"sturm-check", "energy slopes of the interior and exterior log-derivatives"},
  };

  std::vector<Common> commons(tasks.size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    auto* sub = app.add_subcommand(tasks[i].first, tasks[i].second);
    add_common(sub, commons[i], true);
    subs.push_back(sub);
  }

  Common special;
  std::vector<std::string> special_args;
  auto* es = app.add_subcommand("eval-special", "Gamma, Bessel J/Y/I/K and the exterior log-derivative");
  add_common(es, special, false);
  es->add_option("args", special_args, "FUNCTION [NU] X [X...] (when no --config is given)");

  Common run_opts;
  auto* run = app.add_subcommand("run", "run whatever task the config names");
  add_common(run, run_opts, true);

  std::string validate_path;
  auto* val = app.add_subcommand("validate", "report every problem in a config");
  val->add_option("--config", validate_path, "experiment configuration file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_config;
  }

  try {
    for (std::size_t i = 0; i < subs.size(); ++i)
      if (subs[i]->parsed())
        return run_task(tasks[i].first, commons[i]);
    if (es->parsed()) {
      if (special.config.empty() == special_args.empty())
        return config_failure("eval-special takes either --config or FUNCTION [NU] X...");
      return run_task("eval-special", special, special_args.empty() ? std::string() : special_text(special_args));
    }
    if (run->parsed())
      return run_task("", run_opts);
    if (val->parsed()) {
      qws_config* cfg = open_config(validate_path, {});
      if (!cfg)
        return exit_config;
      const size_t n = qws_config_diagnostic_count(cfg);
      const std::string first = n ? qws_config_diagnostic(cfg, 0) : std::string();
      qws_config_destroy(cfg);
      if (n > 0)
        return config_failure(std::to_string(n) + " problem(s), first: " + first);
      std::cout << validate_path << ": ok\n";
      return 0;
    }
  } catch (const CLI::ValidationError& e) {
    return config_failure(e.what());
  }
  return exit_config;
}
