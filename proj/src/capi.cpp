// SPDX-License-Identifier: Apache-2.0
#include "qws/qws.h"

#include "qws/config.hpp"
#include "qws/error.hpp"
#include "qws/runner.hpp"
#include "qws/specfun.hpp"
#include "qws/spectral.hpp"

#include <cstring>
#include <string>
#include <vector>

struct qws_model {
  qws::PotentialModel local;
  std::vector<qws::KernelProfile> profiles;
  std::vector<double> coupling;
  qws::PotentialModel model;   // local + kernel, rebuilt on change
};

struct qws_config {
  qws::ParseResult parsed;
  std::vector<std::string> messages;
};

namespace {

  thread_local std::string last_error;
  thread_local std::string last_trailer;

  qws_status code(qws::ErrorCategory c)
  {
    using qws::ErrorCategory;
    switch (c) {
    case ErrorCategory::InvalidArgument: return QWS_ERR_INVALID_ARGUMENT;
    case ErrorCategory::Range: return QWS_ERR_RANGE;
    case ErrorCategory::Numeric: return QWS_ERR_NUMERIC;
    case ErrorCategory::DegenerateCoupling: return QWS_ERR_DEGENERATE_COUPLING;
    case ErrorCategory::NodeAtCutoff: return QWS_ERR_NODE_AT_CUTOFF;
    case ErrorCategory::NearThreshold: return QWS_ERR_NEAR_THRESHOLD;
    case ErrorCategory::AmbiguousCrossing: return QWS_ERR_AMBIGUOUS_CROSSING;
    case ErrorCategory::Config: return QWS_ERR_CONFIG;
    case ErrorCategory::Io: return QWS_ERR_IO;
    }
    return QWS_ERR_INTERNAL;
  }

  template <class F>
  qws_status guarded(F&& f)
  {
    try {
      f();
      last_error.clear();
      return QWS_OK;
    } catch (const qws::Error& e) {
      last_error = e.what();
      return code(e.category());
    } catch (const std::exception& e) {
      last_error = e.what();
      return QWS_ERR_INTERNAL;
    } catch (...) {
      last_error = "unknown failure";
      return QWS_ERR_INTERNAL;
    }
  }

  qws_status null_arg(const char* what)
  {
    last_error = std::string("null argument: ") + what;
    return QWS_ERR_INVALID_ARGUMENT;
  }

  void rebuild(qws_model* m)
  {
    m->model = m->profiles.empty() ? m->local : m->local.with_kernel_matrix(m->profiles, m->coupling);
  }

}

extern "C" {

const char* qws_version(void) { return "1.0.0"; }

const char* qws_status_name(qws_status s)
{
  switch (s) {
  case QWS_OK: return "ok";
  case QWS_ERR_INVALID_ARGUMENT: return "InvalidArgument";
  case QWS_ERR_RANGE: return "Range";
  case QWS_ERR_NUMERIC: return "Numeric";
  case QWS_ERR_DEGENERATE_COUPLING: return "DegenerateCoupling";
  case QWS_ERR_NODE_AT_CUTOFF: return "NodeAtCutoff";
  case QWS_ERR_NEAR_THRESHOLD: return "NearThreshold";
  case QWS_ERR_AMBIGUOUS_CROSSING: return "AmbiguousCrossing";
  case QWS_ERR_CONFIG: return "Config";
  case QWS_ERR_IO: return "Io";
  case QWS_ERR_INTERNAL: return "Internal";
  }
  return "unknown";
}

const char* qws_last_error(void) { return last_error.c_str(); }

qws_status qws_gamma(double x, double* value)
{
  if (!value)
    return null_arg("value");
  return guarded([&] { *value = qws::specfun::gamma(x); });
}

qws_status qws_bessel(char kind, double nu, double x, double* value, double* derivative, double* est_error)
{
  return guarded([&] {
    double v = 0, d = 0, e = 0;
    if (kind == 'j' || kind == 'y') {
      auto r = kind == 'j' ? qws::specfun::bessel_j(nu, x) : qws::specfun::bessel_y(nu, x);
      v = r.value;
      d = r.derivative;
      e = r.est_error;
    } else if (kind == 'i' || kind == 'k') {
      auto m = qws::specfun::bessel_i_k(nu, x);
      v = kind == 'i' ? m.i(x) : m.k(x);
      d = kind == 'i' ? m.ip(x) : m.kp(x);
      e = m.est_error;
    } else {
      qws::fail(qws::ErrorCategory::InvalidArgument, std::string("unknown Bessel kind '") + kind + "'");
    }
    if (value)
      *value = v;
    if (derivative)
      *derivative = d;
    if (est_error)
      *est_error = e;
  });
}

qws_status qws_log_derivative_exterior(double lambda, double kappa, double r0, double* value)
{
  if (!value)
    return null_arg("value");
  return guarded([&] { *value = qws::specfun::log_derivative_exterior(lambda, kappa, r0); });
}

qws_status qws_model_create(double r0, const char* family, double depth, double range, qws_model** out)
{
  if (!out)
    return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    const std::string f = family ? family : "none";
    qws::LocalPotential local = qws::LocalPotential::none();
    if (f == "square_well")
      local = qws::LocalPotential::square_well(depth);
    else if (f == "exponential")
      local = qws::LocalPotential::exponential(depth, range);
    else if (f == "gaussian")
      local = qws::LocalPotential::gaussian(depth, range);
    else if (f != "none")
      qws::fail(qws::ErrorCategory::InvalidArgument, "unknown potential family '" + f + "'");
    auto* m = new qws_model{qws::PotentialModel(r0, local), {}, {}, {}};
    rebuild(m);
    *out = m;
  });
}

qws_status qws_model_add_kernel(qws_model* m, const char* profile, double p1, double p2, double lo, double hi)
{
  if (!m)
    return null_arg("model");
  return guarded([&] {
    const std::string p = profile ? profile : "";
    qws::KernelProfile k;
    if (p == "gaussian_bump")
      k = qws::KernelProfile::gaussian_bump(p1, p2, lo, hi);
    else if (p == "polynomial_bump")
      k = qws::KernelProfile::polynomial_bump(p1, p2, lo, hi);
    else
      qws::fail(qws::ErrorCategory::InvalidArgument, "unknown kernel profile '" + p + "'");
    if (hi > m->local.r0())
      qws::fail(qws::ErrorCategory::InvalidArgument, "kernel support exceeds r0");
    const std::size_t n = m->profiles.size();
    std::vector<double> c((n + 1) * (n + 1), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        c[i * (n + 1) + j] = m->coupling[i * n + j];
    m->profiles.push_back(k);
    m->coupling = std::move(c);
    // zero coupling for the new term until set: keep the model local-equivalent
    try {
      rebuild(m);
    } catch (...) {
      m->profiles.pop_back();
      m->coupling.resize(n * n);
      throw;
    }
  });
}

qws_status qws_model_set_coupling(qws_model* m, const double* coupling, size_t rank)
{
  if (!m)
    return null_arg("model");
  if (!coupling && rank)
    return null_arg("coupling");
  return guarded([&] {
    if (rank != m->profiles.size())
      qws::fail(qws::ErrorCategory::InvalidArgument, "coupling rank does not match the number of kernel terms");
    std::vector<double> c(coupling, coupling + rank * rank);
    auto old = m->coupling;
    m->coupling = c;
    try {
      rebuild(m);
    } catch (...) {
      m->coupling = old;
      throw;
    }
  });
}

qws_status qws_model_from_config(const qws_config* c, qws_model** out)
{
  if (!c || !out)
    return null_arg("config/out");
  *out = nullptr;
  return guarded([&] {
    if (!c->parsed.ok())
      qws::fail(qws::ErrorCategory::Config, "config has diagnostics: " + c->messages.front());
    const auto& cfg = c->parsed.config;
    auto local_cfg = cfg;
    local_cfg.kernels.clear();
    local_cfg.coupling.clear();
    auto* m = new qws_model{local_cfg.potential(), {}, cfg.coupling, cfg.potential()};
    m->profiles = m->model.profiles();
    *out = m;
  });
}

void qws_model_destroy(qws_model* m) { delete m; }

qws_status qws_phase_shift(const qws_model* m, double q, double l, double k, double mu, double* eta, double* eta_raw)
{
  if (!m)
    return null_arg("model");
  return guarded([&] {
    auto r = qws::phase_shift(qws::ChannelParams::make(q, l), m->model, k, mu);
    if (eta)
      *eta = r.point.eta;
    if (eta_raw)
      *eta_raw = r.point.eta_raw;
  });
}

qws_status qws_bound_states(const qws_model* m, double q, double l, double mu, double* energies, size_t capacity,
                            size_t* count)
{
  if (!m)
    return null_arg("model");
  if (!energies && capacity)
    return null_arg("energies");
  return guarded([&] {
    auto s = qws::find_bound_states(qws::ChannelParams::make(q, l), m->model, mu);
    for (std::size_t i = 0; i < s.levels.size() && i < capacity; ++i)
      energies[i] = s.levels[i].E;
    if (count)
      *count = s.levels.size();
  });
}

qws_status qws_levinson(const qws_model* m, double q, double l, double mu, double tol_eta, qws_levinson_result* out)
{
  if (!m || !out)
    return null_arg("model/out");
  return guarded([&] {
    qws::LevinsonOptions opt;
    opt.mu = mu;
    opt.tol_eta = tol_eta;
    auto r = qws::levinson_verify(qws::ChannelParams::make(q, l), m->model, opt);
    out->eta0 = r.eta0;
    out->n_direct = r.n_direct;
    out->n_continuation = r.n_continuation;
    out->status = r.status == qws::LevinsonStatus::Pass   ? QWS_LEVINSON_PASS
                  : r.status == qws::LevinsonStatus::Fail ? QWS_LEVINSON_FAIL
                                                          : QWS_LEVINSON_INCONCLUSIVE;
    if (r.status != qws::LevinsonStatus::Pass)
      last_error = r.message;
  });
}

static void fill_messages(qws_config* c)
{
  c->messages.clear();
  for (const auto& d : c->parsed.diagnostics)
    c->messages.push_back(qws::to_string(d));
}

qws_status qws_config_load(const char* path, qws_config** out)
{
  if (!path || !out)
    return null_arg("path/out");
  *out = nullptr;
  return guarded([&] {
    auto* c = new qws_config{qws::load_config(path), {}};
    fill_messages(c);
    *out = c;
  });
}

qws_status qws_config_parse(const char* text, const char* source_dir, qws_config** out)
{
  if (!text || !out)
    return null_arg("text/out");
  *out = nullptr;
  return guarded([&] {
    auto* c = new qws_config{qws::parse_config(text, source_dir ? source_dir : "."), {}};
    fill_messages(c);
    *out = c;
  });
}

void qws_config_destroy(qws_config* c) { delete c; }

size_t qws_config_diagnostic_count(const qws_config* c) { return c ? c->messages.size() : 0; }

const char* qws_config_diagnostic(const qws_config* c, size_t i)
{
  if (!c || i >= c->messages.size())
    return nullptr;
  return c->messages[i].c_str();
}

const char* qws_config_task(const qws_config* c)
{
  return c ? qws::to_string(c->parsed.config.task) : nullptr;
}

qws_status qws_config_set_output(qws_config* c, const char* path, const char* format, int metadata)
{
  if (!c)
    return null_arg("config");
  return guarded([&] {
    auto& cfg = c->parsed.config;
    if (format) {
      const std::string f = format;
      if (f == "csv")
        cfg.format = qws::OutputFormat::Csv;
      else if (f == "json")
        cfg.format = qws::OutputFormat::Json;
      else
        qws::fail(qws::ErrorCategory::Config, "output format must be csv or json");
    }
    if (path)
      cfg.output_path = path;
    if (metadata >= 0)
      cfg.metadata = metadata != 0;
  });
}

int qws_config_run(const qws_config* c, unsigned threads)
{
  qws::RunResult r;
  if (!c) {
    r.exit_code = qws::exit_config;
    r.category = "config";
    r.message = "null config";
  } else if (!c->parsed.ok()) {
    r.exit_code = qws::exit_config;
    r.category = "config";
    r.message = c->messages.front();
    for (std::size_t i = 1; i < c->messages.size(); ++i)
      r.message += "; " + c->messages[i];
  } else {
    qws::RunOptions opt;
    opt.threads = threads;
    r = qws::run(c->parsed.config, opt);
  }
  last_trailer = qws::status_trailer(r);
  last_error = r.exit_code == 0 ? std::string() : r.message;
  return r.exit_code;
}

const char* qws_last_run_trailer(void) { return last_trailer.c_str(); }

}
