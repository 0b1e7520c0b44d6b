// SPDX-License-Identifier: Apache-2.0
#include "qws/config.hpp"
#include "qws/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace qws {

  namespace {

    struct Entry {
      std::string value;
      int line = 0;
    };

    using Section = std::map<std::string, Entry>;

    const std::map<std::string, std::set<std::string>>& allowed_keys()
    {
      static const std::map<std::string, std::set<std::string>> keys = {
        {"", {"version", "task"}},
        {"channel", {"q", "l"}},
        {"potential", {"r0", "family", "depth", "range", "table"}},
        {"kernel", {"profile", "center", "width", "a", "b", "lo", "hi"}},
        {"scan", {"k_min", "k_max", "k_count", "k_spacing", "k_values", "E_min", "E_max", "E_count",
                  "E_values", "dE", "mu", "mu_steps", "E_floor", "scan_points"}},
        {"special", {"function", "nu", "x", "r0"}},
        {"solve", {"solution", "k", "E"}},
        {"audit", {"pair"}},
        {"grid", {"n_inner", "n_outer", "r_max", "r_min"}},
        {"tolerances", {"rtol", "tol_eta", "bound_tol", "mu_resolution", "grazing_tol", "min_mu_step",
                        "wronskian"}},
        {"output", {"path", "format", "metadata", "staircase"}},
      };
      return keys;
    }

    std::string trim(const std::string& s)
    {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos)
        return {};
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    }

    bool parse_double(const std::string& s, double& out)
    {
      const std::string t = trim(s);
      if (t.empty())
        return false;
      const char* first = t.data();
      if (*first == '+')
        ++first;
      auto [p, ec] = std::from_chars(first, t.data() + t.size(), out);
      return ec == std::errc() && p == t.data() + t.size() && std::isfinite(out);
    }

    bool parse_size(const std::string& s, std::size_t& out)
    {
      const std::string t = trim(s);
      auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
      return !t.empty() && ec == std::errc() && p == t.data() + t.size();
    }

    // "c_I_J" -> (I-1, J-1)
    bool parse_coupling_key(const std::string& key, std::size_t& i, std::size_t& j)
    {
      if (key.size() < 5 || key.compare(0, 2, "c_") != 0)
        return false;
      const auto us = key.find('_', 2);
      if (us == std::string::npos)
        return false;
      if (!parse_size(key.substr(2, us - 2), i) || !parse_size(key.substr(us + 1), j) || i == 0 || j == 0)
        return false;
      --i;
      --j;
      return true;
    }

    class Reader {
    public:
      std::vector<Diagnostic> diags;
      std::map<std::string, Section> sections;   // "" holds the global keys
      std::map<std::string, int> section_line;

      void error(int line, const std::string& key, const std::string& msg)
      {
        diags.push_back({line, key, msg});
      }

      void lex(const std::string& text)
      {
        std::istringstream in(text);
        std::string raw;
        std::string current;
        sections[""];
        int lineno = 0;
        while (std::getline(in, raw)) {
          ++lineno;
          std::string line = trim(raw);
          if (line.empty() || line[0] == '#' || line[0] == ';')
            continue;
          const auto hash = line.find(" #");
          if (hash != std::string::npos)
            line = trim(line.substr(0, hash));
          if (line.front() == '[') {
            if (line.back() != ']') {
              error(lineno, "", "malformed section header '" + line + "'");
              continue;
            }
            current = trim(line.substr(1, line.size() - 2));
            if (!known_section(current)) {
              error(lineno, current, "unknown section [" + current + "]");
            } else if (section_line.count(current)) {
              error(lineno, current, "duplicate section [" + current + "]");
            }
            section_line.emplace(current, lineno);
            sections[current];
            continue;
          }
          const auto eq = line.find('=');
          if (eq == std::string::npos) {
            error(lineno, "", "expected 'key = value', got '" + line + "'");
            continue;
          }
          const std::string key = trim(line.substr(0, eq));
          const std::string value = trim(line.substr(eq + 1));
          const std::string full = current.empty() ? key : current + "." + key;
          if (key.empty()) {
            error(lineno, "", "empty key");
            continue;
          }
          if (!known_key(current, key)) {
            error(lineno, full, "unknown key '" + full + "'");
            continue;
          }
          auto& sec = sections[current];
          if (sec.count(key)) {
            error(lineno, full, "duplicate key '" + full + "'");
            continue;
          }
          sec[key] = {value, lineno};
        }
      }

      static bool kernel_section(const std::string& name, std::size_t* index = nullptr)
      {
        if (name.compare(0, 7, "kernel.") != 0)
          return false;
        std::size_t n = 0;
        if (!parse_size(name.substr(7), n) || n == 0)
          return false;
        if (index)
          *index = n;
        return true;
      }

      static bool known_section(const std::string& name)
      {
        return name == "coupling" || kernel_section(name)
               || (!name.empty() && allowed_keys().count(name));
      }

      static bool known_key(const std::string& section, const std::string& key)
      {
        if (section == "coupling") {
          std::size_t i, j;
          return parse_coupling_key(key, i, j);
        }
        const std::string s = kernel_section(section) ? "kernel" : section;
        auto it = allowed_keys().find(s);
        return it != allowed_keys().end() && it->second.count(key);
      }

      const Entry* find(const std::string& section, const std::string& key) const
      {
        auto s = sections.find(section);
        if (s == sections.end())
          return nullptr;
        auto k = s->second.find(key);
        return k == s->second.end() ? nullptr : &k->second;
      }

      static std::string full(const std::string& section, const std::string& key)
      {
        return section.empty() ? key : section + "." + key;
      }

      bool get(const std::string& section, const std::string& key, double& out)
      {
        const Entry* e = find(section, key);
        if (!e)
          return false;
        if (!parse_double(e->value, out)) {
          error(e->line, full(section, key), "'" + full(section, key) + "' must be a finite number, got '" + e->value + "'");
          return false;
        }
        return true;
      }

      bool get(const std::string& section, const std::string& key, std::size_t& out)
      {
        const Entry* e = find(section, key);
        if (!e)
          return false;
        if (!parse_size(e->value, out)) {
          error(e->line, full(section, key), "'" + full(section, key) + "' must be a nonnegative integer, got '" + e->value + "'");
          return false;
        }
        return true;
      }

      bool get(const std::string& section, const std::string& key, std::string& out)
      {
        const Entry* e = find(section, key);
        if (!e)
          return false;
        out = e->value;
        return true;
      }

      bool get(const std::string& section, const std::string& key, bool& out)
      {
        const Entry* e = find(section, key);
        if (!e)
          return false;
        if (e->value == "true" || e->value == "yes" || e->value == "1")
          out = true;
        else if (e->value == "false" || e->value == "no" || e->value == "0")
          out = false;
        else {
          error(e->line, full(section, key), "'" + full(section, key) + "' must be true or false");
          return false;
        }
        return true;
      }

      bool get(const std::string& section, const std::string& key, std::vector<double>& out)
      {
        const Entry* e = find(section, key);
        if (!e)
          return false;
        out.clear();
        std::stringstream ss(e->value);
        std::string item;
        while (std::getline(ss, item, ',')) {
          double v;
          if (!parse_double(item, v)) {
            error(e->line, full(section, key), "'" + full(section, key) + "' must be a comma-separated list of numbers");
            out.clear();
            return false;
          }
          out.push_back(v);
        }
        if (out.empty()) {
          error(e->line, full(section, key), "'" + full(section, key) + "' is an empty list");
          return false;
        }
        return true;
      }

      int line_of(const std::string& section, const std::string& key) const
      {
        const Entry* e = find(section, key);
        return e ? e->line : 0;
      }
    };

    // Expands either an explicit list or a (min, max, count, spacing) range.
    void read_grid(Reader& rd, const std::string& prefix, std::vector<double>& out)
    {
      std::vector<double> list;
      const bool has_list = rd.get("scan", prefix + "_values", list);
      double lo = 0.0, hi = 0.0;
      std::size_t n = 0;
      const bool has_lo = rd.get("scan", prefix + "_min", lo);
      const bool has_hi = rd.get("scan", prefix + "_max", hi);
      const bool has_n = rd.get("scan", prefix + "_count", n);
      std::string spacing = "linear";
      const bool has_spacing = prefix == "k" && rd.get("scan", "k_spacing", spacing);
      const bool has_range = has_lo || has_hi || has_n || has_spacing;
      const std::string key = "scan." + prefix;
      if (has_list && has_range) {
        rd.error(rd.line_of("scan", prefix + "_values"), key,
                 "give either " + prefix + "_values or " + prefix + "_min/_max/_count, not both");
        return;
      }
      if (has_list) {
        if (!std::is_sorted(list.begin(), list.end()) || std::adjacent_find(list.begin(), list.end()) != list.end()) {
          rd.error(rd.line_of("scan", prefix + "_values"), key, prefix + "_values must be strictly increasing");
          return;
        }
        out = list;
        return;
      }
      if (!has_range)
        return;
      if (!(has_lo && has_hi && has_n)) {
        rd.error(0, key, prefix + " grid needs " + prefix + "_min, " + prefix + "_max and " + prefix + "_count");
        return;
      }
      bool ok = true;
      if (!(lo < hi)) {
        rd.error(rd.line_of("scan", prefix + "_min"), key, prefix + " grid needs " + prefix + "_min < " + prefix + "_max");
        ok = false;
      }
      if (n < 2) {
        rd.error(rd.line_of("scan", prefix + "_count"), key, prefix + " grid needs " + prefix + "_count >= 2");
        ok = false;
      }
      if (spacing != "linear" && spacing != "log") {
        rd.error(rd.line_of("scan", "k_spacing"), "scan.k_spacing", "k_spacing must be linear or log");
        ok = false;
      }
      if (spacing == "log" && !(lo > 0.0)) {
        rd.error(rd.line_of("scan", "k_min"), key, "log k grid needs k_min > 0");
        ok = false;
      }
      if (!ok)
        return;
      out.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(n - 1);
        out[i] = spacing == "log" ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t;
      }
      out.front() = lo;
      out.back() = hi;
    }

    bool is_bessel(const std::string& f)
    {
      return f == "bessel_j" || f == "bessel_y" || f == "bessel_i" || f == "bessel_k"
             || f == "log_derivative_exterior";
    }

  }

  const char* to_string(Task t) noexcept
  {
    switch (t) {
    case Task::EvalSpecial: return "eval-special";
    case Task::Solve: return "solve";
    case Task::PhaseShift: return "phase-shift";
    case Task::WronskianAudit: return "wronskian-audit";
    case Task::BoundStates: return "bound-states";
    case Task::Levinson: return "levinson";
    case Task::SturmCheck: return "sturm-check";
    }
    return "?";
  }

  std::optional<Task> task_from_string(const std::string& s)
  {
    for (Task t : {Task::EvalSpecial, Task::Solve, Task::PhaseShift, Task::WronskianAudit,
                   Task::BoundStates, Task::Levinson, Task::SturmCheck})
      if (s == to_string(t))
        return t;
    return std::nullopt;
  }

  std::string to_string(const Diagnostic& d)
  {
    std::string s;
    if (d.line > 0)
      s = "line " + std::to_string(d.line) + ": ";
    return s + d.message;
  }

  PotentialModel ExperimentConfig::potential() const
  {
    LocalPotential local = LocalPotential::none();
    switch (family) {
    case LocalPotential::Family::None: break;
    case LocalPotential::Family::SquareWell: local = LocalPotential::square_well(depth); break;
    case LocalPotential::Family::Exponential: local = LocalPotential::exponential(depth, range); break;
    case LocalPotential::Family::Gaussian: local = LocalPotential::gaussian(depth, range); break;
    case LocalPotential::Family::Tabulated: {
      std::filesystem::path p(table);
      if (p.is_relative())
        p = std::filesystem::path(source_dir) / p;
      local = LocalPotential::from_csv(p.string());
      break;
    }
    }
    PotentialModel model(r0, local);
    if (kernels.empty())
      return model;
    std::vector<KernelProfile> profiles;
    for (const auto& k : kernels)
      profiles.push_back(k.kind == KernelProfile::Kind::GaussianBump
                           ? KernelProfile::gaussian_bump(k.center, k.width, k.lo, k.hi)
                           : KernelProfile::polynomial_bump(k.a, k.b, k.lo, k.hi));
    return model.with_kernel_matrix(std::move(profiles), coupling);
  }

  std::vector<Diagnostic> validate(const ExperimentConfig& c)
  {
    std::vector<Diagnostic> d;
    auto bad = [&](const std::string& key, const std::string& msg) { d.push_back({0, key, msg}); };

    if (c.version != 1)
      bad("version", "unsupported config version " + std::to_string(c.version) + " (expected 1)");

    if (c.task == Task::EvalSpecial) {
      const std::string& f = c.special_function;
      if (f != "gamma" && !is_bessel(f))
        bad("special.function", "special.function must be one of gamma, bessel_j, bessel_y, bessel_i, bessel_k, "
                                 "log_derivative_exterior");
      if (c.x_values.empty())
        bad("special.x", "eval-special needs special.x");
      if (is_bessel(f) && !(c.nu >= 0.0))
        bad("special.nu", "order nu must be >= 0");
      if (f == "log_derivative_exterior" && !(c.special_r0 > 0.0))
        bad("special.r0", "special.r0 must be positive");
      return d;
    }

    const double lambda = c.lambda();
    const bool needs_positive_lambda = c.task == Task::PhaseShift || c.task == Task::BoundStates
                                       || c.task == Task::Levinson || c.task == Task::SturmCheck
                                       || !c.kernels.empty();
    if (c.q < 2.0)
      bad("channel.q", "q must be >= 2");
    if (c.l < 0.0 || c.l != std::floor(c.l))
      bad("channel.l", "l must be a nonnegative integer");
    if (needs_positive_lambda && lambda == 0.0)
      bad("channel", "λ=0 unsupported (half-bound regime)");
    else if (needs_positive_lambda && lambda < 0.0)
      bad("channel", "λ must be positive");

    if (!(c.r0 > 0.0))
      bad("potential.r0", "cutoff radius r0 must be positive");
    switch (c.family) {
    case LocalPotential::Family::Exponential:
    case LocalPotential::Family::Gaussian:
      if (!(c.range > 0.0))
        bad("potential.range", "potential range must be positive");
      break;
    case LocalPotential::Family::Tabulated:
      if (c.table.empty()) {
        bad("potential.table", "tabulated potential needs potential.table");
      } else {
        try {
          std::filesystem::path p(c.table);
          if (p.is_relative())
            p = std::filesystem::path(c.source_dir) / p;
          LocalPotential::from_csv(p.string());
        } catch (const Error& e) {
          bad("potential.table", e.what());
        }
      }
      break;
    default: break;
    }

    const std::size_t n = c.kernels.size();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& k = c.kernels[i];
      const std::string key = "kernel." + std::to_string(i + 1);
      if (!(k.lo >= 0.0 && k.lo < k.hi))
        bad(key, key + " needs 0 <= lo < hi");
      if (c.r0 > 0.0 && k.hi > c.r0)
        bad(key, key + " support [" + std::to_string(k.lo) + ", " + std::to_string(k.hi)
                   + "] exceeds r0: kernels must vanish for r >= r0 (compact support)");
      if (k.kind == KernelProfile::Kind::GaussianBump && !(k.width > 0.0))
        bad(key, key + " gaussian_bump needs width > 0");
      if (k.kind == KernelProfile::Kind::PolynomialBump && !(k.a >= 0.0 && k.b >= 0.0))
        bad(key, key + " polynomial_bump needs a, b >= 0");
    }
    if (c.coupling.size() != n * n) {
      bad("coupling", "coupling matrix does not match the number of kernel terms");
    } else {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          if (c.coupling[i * n + j] != c.coupling[j * n + i])
            bad("coupling", "coupling must be symmetric: c_" + std::to_string(i + 1) + "_" + std::to_string(j + 1)
                              + " != c_" + std::to_string(j + 1) + "_" + std::to_string(i + 1));
      if (n > 0 && std::all_of(c.coupling.begin(), c.coupling.end(), [](double v) { return v == 0.0; }))
        bad("coupling", "kernel terms given but every coupling entry is 0");
    }

    auto positive = [&](double v, const std::string& key) {
      if (!(v > 0.0))
        bad(key, key + " must be positive");
    };
    positive(c.rtol, "tolerances.rtol");
    positive(c.tol_eta, "tolerances.tol_eta");
    positive(c.bound_tol, "tolerances.bound_tol");
    positive(c.mu_resolution, "tolerances.mu_resolution");
    positive(c.grazing_tol, "tolerances.grazing_tol");
    positive(c.min_mu_step, "tolerances.min_mu_step");
    positive(c.wronskian_tol, "tolerances.wronskian");
    if (c.n_inner < 4 || c.n_outer < 1)
      bad("grid", "grid needs n_inner >= 4 and n_outer >= 1");
    if (c.r_max != 0.0 && !(c.r_max > c.r0))
      bad("grid.r_max", "grid.r_max must exceed r0");
    if (c.r_min != 0.0 && !(c.r_min > 0.0 && c.r_min < c.r0))
      bad("grid.r_min", "grid.r_min must lie in (0, r0)");
    if (c.mu_steps < 2)
      bad("scan.mu_steps", "scan.mu_steps must be >= 2");
    if (c.scan_points < 2)
      bad("scan.scan_points", "scan.scan_points must be >= 2");
    if (c.E_floor > 0.0)
      bad("scan.E_floor", "scan.E_floor must be negative (or 0 for the default)");

    auto need_k = [&](const char* what) {
      if (c.k_values.empty())
        bad("scan.k", std::string(what) + " needs a k grid (k_values or k_min/k_max/k_count)");
      for (double k : c.k_values)
        if (!(k > 0.0)) {
          bad("scan.k", "k grid values must be positive");
          break;
        }
    };

    switch (c.task) {
    case Task::Solve:
      if (c.solve_k.has_value() == c.solve_E.has_value())
        bad("solve", "solve needs exactly one of solve.k and solve.E");
      if (c.solve_jost) {
        if (!c.solve_k || *c.solve_k == 0.0)
          bad("solve.k", "jost solution needs solve.k != 0");
        if (n > 0)
          bad("solve.solution", "jost solution is only available for local potentials");
      }
      if (!c.solve_jost && !(lambda > 0.0))
        bad("channel", "regular solution needs λ > 0");
      break;
    case Task::PhaseShift:
      need_k("phase-shift");
      break;
    case Task::WronskianAudit:
      need_k("wronskian-audit");
      if (n > 0)
        bad("audit", "wronskian audit is defined for local potentials");
      if (!c.audit_jost && !(lambda > 0.0 && lambda < 0.5))
        bad("audit.pair", "phi pair audit needs 0 < λ < 1/2 so that phi(-λ) is distinct");
      if (c.audit_jost && !(lambda >= 0.0))
        bad("channel", "jost pair audit needs λ >= 0");
      break;
    case Task::SturmCheck:
      if (c.E_values.empty())
        bad("scan.E", "sturm-check needs an E grid (E_values or E_min/E_max/E_count)");
      if (!(c.dE > 0.0))
        bad("scan.dE", "scan.dE must be positive");
      for (double E : c.E_values)
        if (!(E + c.dE < 0.0)) {
          bad("scan.E", "sturm-check energies must satisfy E + dE < 0");
          break;
        }
      break;
    default: break;
    }
    return d;
  }

  ParseResult parse_config(const std::string& text, const std::string& source_dir)
  {
    ParseResult res;
    Reader rd;
    rd.lex(text);
    ExperimentConfig& c = res.config;
    c.source_dir = source_dir;

    std::string s;
    if (!rd.get("", "version", s)) {
      rd.error(0, "version", "missing mandatory key 'version'");
    } else {
      double v = 0.0;
      if (!parse_double(s, v) || v != std::floor(v))
        rd.error(rd.line_of("", "version"), "version", "version must be an integer");
      else
        c.version = static_cast<int>(v);
    }
    if (!rd.get("", "task", s)) {
      rd.error(0, "task", "missing mandatory key 'task' (exactly one task per config)");
    } else if (auto t = task_from_string(s)) {
      c.task = *t;
    } else {
      rd.error(rd.line_of("", "task"), "task", "unknown task '" + s + "'");
    }

    const bool physical = c.task != Task::EvalSpecial;
    if (physical && !rd.sections.count("channel"))
      rd.error(0, "channel", "missing section [channel]");
    if (physical && !rd.sections.count("potential"))
      rd.error(0, "potential", "missing section [potential]");
    if (rd.sections.count("channel")) {
      if (!rd.get("channel", "q", c.q) && !rd.find("channel", "q"))
        rd.error(rd.section_line["channel"], "channel.q", "missing key 'channel.q'");
      if (!rd.get("channel", "l", c.l) && !rd.find("channel", "l"))
        rd.error(rd.section_line["channel"], "channel.l", "missing key 'channel.l'");
    }

    if (rd.sections.count("potential")) {
      if (!rd.get("potential", "r0", c.r0) && !rd.find("potential", "r0"))
        rd.error(rd.section_line["potential"], "potential.r0", "missing key 'potential.r0'");
      std::string fam = "none";
      rd.get("potential", "family", fam);
      static const std::map<std::string, LocalPotential::Family> families = {
        {"none", LocalPotential::Family::None},
        {"square_well", LocalPotential::Family::SquareWell},
        {"exponential", LocalPotential::Family::Exponential},
        {"gaussian", LocalPotential::Family::Gaussian},
        {"tabulated", LocalPotential::Family::Tabulated},
      };
      if (auto it = families.find(fam); it != families.end())
        c.family = it->second;
      else
        rd.error(rd.line_of("potential", "family"), "potential.family", "unknown potential family '" + fam + "'");
      const bool has_depth = rd.get("potential", "depth", c.depth);
      rd.get("potential", "range", c.range);
      rd.get("potential", "table", c.table);
      const bool shaped = c.family == LocalPotential::Family::SquareWell || c.family == LocalPotential::Family::Exponential
                          || c.family == LocalPotential::Family::Gaussian;
      if (shaped && !has_depth && !rd.find("potential", "depth"))
        rd.error(rd.section_line["potential"], "potential.depth", "potential family '" + fam + "' needs depth");
      if ((c.family == LocalPotential::Family::Exponential || c.family == LocalPotential::Family::Gaussian)
          && !rd.find("potential", "range"))
        rd.error(rd.section_line["potential"], "potential.range", "potential family '" + fam + "' needs range");
    }

    // kernel.1 .. kernel.n must be contiguous
    std::size_t rank = 0;
    for (const auto& [name, sec] : rd.sections) {
      std::size_t idx = 0;
      if (Reader::kernel_section(name, &idx))
        rank = std::max(rank, idx);
    }
    for (std::size_t i = 1; i <= rank; ++i) {
      const std::string name = "kernel." + std::to_string(i);
      if (!rd.sections.count(name)) {
        rd.error(0, name, "kernel sections must be numbered 1.." + std::to_string(rank) + "; [" + name + "] is missing");
        continue;
      }
      KernelTermConfig k;
      std::string profile;
      if (!rd.get(name, "profile", profile)) {
        rd.error(rd.section_line[name], name + ".profile", "missing key '" + name + ".profile'");
      } else if (profile == "gaussian_bump") {
        k.kind = KernelProfile::Kind::GaussianBump;
        if (!rd.get(name, "center", k.center) && !rd.find(name, "center"))
          rd.error(rd.section_line[name], name + ".center", "gaussian_bump needs center");
        if (!rd.get(name, "width", k.width) && !rd.find(name, "width"))
          rd.error(rd.section_line[name], name + ".width", "gaussian_bump needs width");
      } else if (profile == "polynomial_bump") {
        k.kind = KernelProfile::Kind::PolynomialBump;
        rd.get(name, "a", k.a);
        rd.get(name, "b", k.b);
      } else {
        rd.error(rd.line_of(name, "profile"), name + ".profile", "unknown kernel profile '" + profile + "'");
      }
      if (!rd.get(name, "lo", k.lo) && !rd.find(name, "lo"))
        rd.error(rd.section_line[name], name + ".lo", "missing key '" + name + ".lo'");
      if (!rd.get(name, "hi", k.hi) && !rd.find(name, "hi"))
        rd.error(rd.section_line[name], name + ".hi", "missing key '" + name + ".hi'");
      c.kernels.push_back(k);
    }
    c.coupling.assign(rank * rank, 0.0);
    if (auto it = rd.sections.find("coupling"); it != rd.sections.end()) {
      if (rank == 0)
        rd.error(rd.section_line["coupling"], "coupling", "[coupling] given without kernel sections");
      for (const auto& [key, e] : it->second) {
        std::size_t i = 0, j = 0;
        parse_coupling_key(key, i, j);
        double v = 0.0;
        if (!parse_double(e.value, v)) {
          rd.error(e.line, "coupling." + key, "'coupling." + key + "' must be a finite number");
          continue;
        }
        if (i >= rank || j >= rank) {
          if (rank > 0)
            rd.error(e.line, "coupling." + key, "coupling index out of range 1.." + std::to_string(rank));
          continue;
        }
        c.coupling[i * rank + j] = v;
      }
    }

    read_grid(rd, "k", c.k_values);
    read_grid(rd, "E", c.E_values);
    rd.get("scan", "dE", c.dE);
    rd.get("scan", "mu", c.mu);
    rd.get("scan", "mu_steps", c.mu_steps);
    rd.get("scan", "E_floor", c.E_floor);
    rd.get("scan", "scan_points", c.scan_points);

    rd.get("special", "function", c.special_function);
    rd.get("special", "nu", c.nu);
    rd.get("special", "x", c.x_values);
    rd.get("special", "r0", c.special_r0);
    if (c.task == Task::EvalSpecial && is_bessel(c.special_function) && !rd.find("special", "nu"))
      rd.error(0, "special.nu", "special.function '" + c.special_function + "' needs nu");

    if (rd.get("solve", "solution", s)) {
      if (s == "jost")
        c.solve_jost = true;
      else if (s != "regular")
        rd.error(rd.line_of("solve", "solution"), "solve.solution", "solve.solution must be regular or jost");
    }
    double v = 0.0;
    if (rd.get("solve", "k", v))
      c.solve_k = v;
    if (rd.get("solve", "E", v))
      c.solve_E = v;

    if (rd.get("audit", "pair", s)) {
      if (s == "jost")
        c.audit_jost = true;
      else if (s != "phi")
        rd.error(rd.line_of("audit", "pair"), "audit.pair", "audit.pair must be phi or jost");
    }

    rd.get("grid", "n_inner", c.n_inner);
    rd.get("grid", "n_outer", c.n_outer);
    rd.get("grid", "r_max", c.r_max);
    rd.get("grid", "r_min", c.r_min);

    rd.get("tolerances", "rtol", c.rtol);
    rd.get("tolerances", "tol_eta", c.tol_eta);
    rd.get("tolerances", "bound_tol", c.bound_tol);
    rd.get("tolerances", "mu_resolution", c.mu_resolution);
    rd.get("tolerances", "grazing_tol", c.grazing_tol);
    rd.get("tolerances", "min_mu_step", c.min_mu_step);
    rd.get("tolerances", "wronskian", c.wronskian_tol);

    rd.get("output", "path", c.output_path);
    if (rd.get("output", "format", s)) {
      if (s == "csv")
        c.format = OutputFormat::Csv;
      else if (s == "json")
        c.format = OutputFormat::Json;
      else
        rd.error(rd.line_of("output", "format"), "output.format", "output.format must be csv or json");
    }
    rd.get("output", "metadata", c.metadata);
    rd.get("output", "staircase", c.staircase_path);

    res.diagnostics = std::move(rd.diags);
    // Semantic checks only make sense once the syntax is clean enough to have
    // a task; they still run alongside syntax errors so everything is reported.
    if (rd.find("", "task")) {
      auto more = validate(c);
      for (auto& m : more) {
        const bool dup = std::any_of(res.diagnostics.begin(), res.diagnostics.end(),
                                     [&](const Diagnostic& x) { return x.key == m.key && x.message == m.message; });
        if (!dup)
          res.diagnostics.push_back(std::move(m));
      }
    }
    return res;
  }

  ParseResult load_config(const std::string& path)
  {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      ParseResult r;
      r.diagnostics.push_back({0, "", "cannot read config file '" + path + "'"});
      return r;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    auto dir = std::filesystem::path(path).parent_path().string();
    return parse_config(ss.str(), dir.empty() ? "." : dir);
  }

}
