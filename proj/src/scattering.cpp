// SPDX-License-Identifier: Apache-2.0
#include "qws/scattering.hpp"
#include "parallel.hpp"
#include "qws/error.hpp"
#include "qws/specfun.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <numbers>
#include <thread>

namespace qws {

  namespace {

    constexpr double pi = std::numbers::pi;
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();

    double wrap_pi(double x)   // into (-pi, pi]
    {
      double r = std::remainder(x, 2.0 * pi);
      if (r <= -pi)
        r += 2.0 * pi;
      return r;
    }

    double arctan_branch(double theta)   // into (-pi/2, pi/2]
    {
      double r = std::remainder(theta, pi);
      if (r <= -0.5 * pi)
        r += pi;
      return r;
    }

    // Riccati-Bessel type free solutions sqrt(pi k r / 2) J(kr), N(kr) and
    // their r-derivatives.
    struct FreePair {
      double j, dj, n, dn;
    };

    FreePair free_pair(double lambda, double k, double r)
    {
      const double x = k * r;
      const auto J = specfun::bessel_j(lambda, x);
      const auto N = specfun::bessel_y(lambda, x);
      const double s = std::sqrt(0.5 * pi * x);
      FreePair p;
      p.j = s * J.value;
      p.n = s * N.value;
      p.dj = p.j / (2.0 * r) + s * k * J.derivative;
      p.dn = p.n / (2.0 * r) + s * k * N.derivative;
      return p;
    }

    struct Snapshot {
      double theta = 0.0;     // atan2(W[y, j], W[y, n])
      double y0 = 0.0, dy0 = 0.0;
      double y1 = 0.0, y2 = 0.0;   // at the exterior fit nodes
      double N = 0.0;         // y' - rho y at r0
    };

    bool same_equation(const RadialSolution& a, const RadialSolution& b)
    {
      const cplx ca = centrifugal_coefficient(a.channel.lambda);
      const cplx cb = centrifugal_coefficient(b.channel.lambda);
      const double tol = 1e-14;
      return std::abs(ca - cb) <= tol * std::max(1.0, std::abs(ca))
             && std::abs(a.k2 - b.k2) <= tol * std::max(1.0, std::abs(a.k2)) && a.mu == b.mu;
    }

  }

  const char* to_string(WronskianPair p) noexcept
  {
    switch (p) {
      case WronskianPair::PhiPair: return "phi-phi-minus";
      case WronskianPair::JostPair: return "f-f-minus-k";
      case WronskianPair::Self: return "self";
      case WronskianPair::Generic: return "generic";
    }
    return "?";
  }

  bool WronskianReport::passes(double rel_tol) const
  {
    const double scale = std::abs(expected) > 0.0 ? std::abs(expected) : 1.0;
    return max_deviation <= rel_tol * scale;
  }

  WronskianReport wronskian(const RadialSolution& y1, const RadialSolution& y2)
  {
    if (!y1.grid.same_as(y2.grid))
      fail(ErrorCategory::InvalidArgument, "wronskian: solutions live on different grids");
    if (!same_equation(y1, y2))
      fail(ErrorCategory::InvalidArgument, "wronskian: solutions of different equations");

    WronskianReport rep;
    const std::size_t n = y1.grid.size();
    rep.r = y1.grid.nodes();
    rep.values.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      rep.values[i] = y1.y[i] * y2.dy[i] - y2.y[i] * y1.dy[i];

    const cplx l1 = y1.channel.lambda, l2 = y2.channel.lambda;
    if (y1.normalization == y2.normalization && l1 == l2 && y1.k == y2.k && y1.y == y2.y) {
      rep.pair = WronskianPair::Self;
      rep.expected = 0.0;
    } else if (y1.normalization == Normalization::OriginRegular
               && y2.normalization == Normalization::OriginRegular && l2 == -l1 && l1 != cplx(0.0)) {
      rep.pair = WronskianPair::PhiPair;
      rep.expected = -2.0 * l1;
    } else if (y1.normalization == Normalization::Jost && y2.normalization == Normalization::Jost
               && y2.k == -y1.k && l1 == l2) {
      rep.pair = WronskianPair::JostPair;
      rep.expected = 2.0 * cplx(0.0, 1.0) * y1.k;
    } else {
      rep.pair = WronskianPair::Generic;
      rep.expected = rep.values[y1.grid.r0_index()];
    }
    cplx mean = 0.0;
    for (const auto& w : rep.values) {
      rep.max_deviation = std::max(rep.max_deviation, std::abs(w - rep.expected));
      mean += w;
    }
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (const auto& w : rep.values)
      var += std::norm(w - mean);
    rep.stddev = std::sqrt(var / static_cast<double>(n));
    return rep;
  }

  double hermiticity_residual(HermiticityKind kind, cplx lambda, cplx k,
                              const PotentialModel& potential, double mu,
                              const RadialGrid& grid, const IntegratorOptions& opt)
  {
    if (potential.has_kernel())
      fail(ErrorCategory::InvalidArgument, "hermiticity audit is defined for local potentials");
    const auto ch = ChannelParams::make(cplx(2.0), lambda);
    const auto chc = ChannelParams::make(cplx(2.0), std::conj(lambda));
    RadialSolution a, b;
    if (kind == HermiticityKind::Phi) {
      a = integrate_regular(effective_equation(ch, potential, k * k, mu), grid, opt);
      const cplx kc = std::conj(k);
      b = integrate_regular(effective_equation(chc, potential, kc * kc, mu), grid, opt);
    } else {
      a = integrate_jost(effective_equation(ch, potential, k * k, mu), grid, k, opt);
      const cplx km = -std::conj(k);
      b = integrate_jost(effective_equation(chc, potential, km * km, mu), grid, km, opt);
    }
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      diff = std::max(diff, std::abs(std::conj(a.y[i]) - b.y[i]));
      scale = std::max(scale, std::abs(a.y[i]));
    }
    return scale > 0.0 ? diff / scale : diff;
  }

  LogDerivative log_derivative_interior(const EffectiveEquation& eq, const IntegratorOptions& opt)
  {
    const auto br = eq.potential().breakpoints();
    const auto grid = RadialGrid::make(eq.r0(), eq.r0(), 64, 0, br);
    const auto sol = solve_nonlocal(eq, grid, opt, KernelNormalization::Adjugate);
    double ymax = 0.0;
    for (std::size_t i = 0; i <= grid.r0_index(); ++i)
      ymax = std::max(ymax, std::abs(sol.y[i]));
    const cplx y0 = sol.y_at_r0(), d0 = sol.dy_at_r0();
    if (!(std::abs(y0) >= 1e-12 * ymax))
      fail(ErrorCategory::NodeAtCutoff,
           "y(r0) vanishes: log-derivative undefined at this energy; perturb E");
    LogDerivative ld;
    ld.A = (d0 / y0).real();
    ld.E = eq.k2().real();
    ld.mu = eq.mu();
    ld.channel = eq.channel();
    ld.y_r0 = y0.real();
    ld.dy_r0 = d0.real();
    return ld;
  }

  double rho_threshold(double lambda, double r0) { return (0.5 - lambda) / r0; }
  double rho_tilde_threshold(double lambda, double r0) { return (lambda + 0.5) / r0; }

  double threshold_energy(const PotentialModel& potential)
  {
    return -1e-10 * std::max(1.0, potential.local_sup_norm() + potential.kernel_sup_norm());
  }

  RadialGrid phase_grid(const PotentialModel& potential)
  {
    const double r0 = potential.r0();
    std::vector<double> nodes{RadialGrid::default_r_min(r0)};
    for (double b : potential.breakpoints())
      if (b > nodes.back())
        nodes.push_back(b);
    nodes.push_back(1.25 * r0);
    nodes.push_back(1.5 * r0);
    return RadialGrid(std::move(nodes), r0);
  }

  double low_k_phase_asymptotic(const ChannelParams& channel, const LogDerivative& A0,
                                double k, double r0)
  {
    const double lambda = channel.real_lambda();
    if (!(lambda > 0.0))
      fail(ErrorCategory::InvalidArgument, "low-k formula requires lambda > 0");
    if (!(k > 0.0) || !(k * r0 < 0.1))
      fail(ErrorCategory::InvalidArgument, "low-k formula requires 0 < k r0 < 0.1");
    const double rho = rho_threshold(lambda, r0), rho_t = rho_tilde_threshold(lambda, r0);
    const double den = A0.A - rho;
    if (std::abs(den) < 1e-10)
      fail(ErrorCategory::NearThreshold,
           "A(0) sits on the threshold value rho: leading low-k terms cancel");
    const double g = specfun::gamma(lambda);
    const double pref = -pi * std::pow(k * r0, 2.0 * lambda) / (std::pow(2.0, 2.0 * lambda) * lambda * g * g);
    return pref * (A0.A - rho_t) / den;
  }

  PhaseShiftResult phase_shift(const ChannelParams& channel, const PotentialModel& potential,
                               double k, double mu, const PhaseShiftOptions& opt)
  {
    if (!(k > 0.0))
      fail(ErrorCategory::InvalidArgument, "phase shift requires k > 0");
    const double lambda = channel.real_lambda();
    if (!(lambda > 0.0))
      fail(ErrorCategory::InvalidArgument, "phase shift requires lambda > 0");
    if (!(mu >= 0.0))
      fail(ErrorCategory::InvalidArgument, "phase shift requires mu >= 0");
    if (opt.mu_steps < 1)
      fail(ErrorCategory::InvalidArgument, "phase shift needs at least one mu step");

    const auto grid = phase_grid(potential);
    const std::size_t i0 = grid.r0_index();
    const double r0 = potential.r0();
    const double r1 = grid.nodes()[i0 + 1], r2 = grid.nodes()[i0 + 2];
    const FreePair f0 = free_pair(lambda, k, r0);
    const FreePair f1 = free_pair(lambda, k, r1);
    const FreePair f2 = free_pair(lambda, k, r2);
    const double rho = rho_threshold(lambda, r0);

    auto snap = [&](double m) {
      const auto eq = effective_equation(channel, potential, cplx(k * k), m);
      const auto sol = solve_nonlocal(eq, grid, opt.integrator, KernelNormalization::Adjugate);
      Snapshot s;
      s.y0 = sol.y[i0].real();
      s.dy0 = sol.dy[i0].real();
      s.y1 = sol.y[i0 + 1].real();
      s.y2 = sol.y[i0 + 2].real();
      const double wj = s.y0 * f0.dj - f0.j * s.dy0;
      const double wn = s.y0 * f0.dn - f0.n * s.dy0;
      s.theta = std::atan2(wj, wn);
      s.N = s.dy0 - rho * s.y0;
      return s;
    };

    PhaseShiftResult res;
    PhaseShiftPoint& pt = res.point;
    pt.k = k;
    pt.mu = mu;

    Snapshot start = snap(0.0);
    double eta = 0.0;   // eta(k, 0) = 0 by convention
    res.path.push_back({0.0, 0.0});
    Snapshot last = start;

    const double hard_floor_rel = 1e-13;
    std::function<void(double, double, const Snapshot&, const Snapshot&, bool)> advance;
    advance = [&](double a, double b, const Snapshot& sa, const Snapshot& sb, bool fine) {
      const double d = wrap_pi(sb.theta - sa.theta);
      if (std::abs(d) <= 0.5 * pi) {
        eta += d;
        res.path.push_back({b, eta});
        return;
      }
      const double floor = fine ? hard_floor_rel * std::max(1.0, std::abs(b)) : opt.min_mu_step;
      if (b - a > floor) {
        const double m = 0.5 * (a + b);
        const Snapshot sm = snap(m);
        advance(a, m, sa, sm, fine);
        advance(m, b, sm, sb, fine);
        return;
      }
      if (sa.N * sb.N < 0.0) {
        // Threshold-type jump: A crosses rho within [a, b]. Downward crossing
        // turns a scattering state into a bound state and raises eta by pi.
        const int dir = (sa.N / sa.y0 > 0.0) ? 1 : -1;
        const double step = dir > 0 ? (d > 0.0 ? d : d + 2.0 * pi) : (d < 0.0 ? d : d - 2.0 * pi);
        eta += step;
        pt.jumps.push_back({a, b, dir});
        res.path.push_back({b, eta});
        return;
      }
      if (!fine) {
        advance(a, b, sa, sb, true);
        return;
      }
      fail(ErrorCategory::Numeric, "phase continuation: unresolved jump of the phase near mu = "
                                     + std::to_string(a));
    };

    if (mu > 0.0) {
      const double h = mu / static_cast<double>(opt.mu_steps);
      for (std::size_t i = 1; i <= opt.mu_steps; ++i) {
        const double b = i == opt.mu_steps ? mu : h * static_cast<double>(i);
        const double a = res.path.back().mu;
        const Snapshot sb = snap(b);
        advance(a, b, last, sb, false);
        last = sb;
      }
    }
    pt.eta = mu > 0.0 ? eta : 0.0;
    pt.eta_raw = arctan_branch(last.theta);

    // Matching formula from A (or from y/y' when y(r0) is tiny).
    const double aj = f0.dj / f0.j, an = f0.dn / f0.n;
    double tan_match;
    if (std::abs(last.y0) * r0 >= std::abs(last.dy0) * 1e-8) {
      pt.A = last.dy0 / last.y0;
      tan_match = (f0.j / f0.n) * (pt.A - aj) / (pt.A - an);
    } else {
      pt.A = std::abs(last.y0) > 0.0 ? last.dy0 / last.y0 : nan;
      const double B = last.y0 / last.dy0;
      tan_match = (f0.j / f0.n) * (1.0 - aj * B) / (1.0 - an * B);
    }
    pt.tan_eta_matching = tan_match;

    // Exterior fit y = a j + b n at two nodes; tan eta = -b/a.
    const double det = f1.j * f2.n - f2.j * f1.n;
    const double ca = (last.y1 * f2.n - last.y2 * f1.n) / det;
    const double cb = (f1.j * last.y2 - f2.j * last.y1) / det;
    pt.tan_eta_fit = -cb / ca;
    const double ang_fit = std::atan2(-cb, ca);
    pt.method_gap = std::abs(std::remainder(std::atan(tan_match) - ang_fit, pi));

    pt.tan_eta_low_k = nan;
    if (k * r0 < 0.1) {
      try {
        const auto eq0 = effective_equation(channel, potential, cplx(threshold_energy(potential)), mu);
        pt.tan_eta_low_k = low_k_phase_asymptotic(channel, log_derivative_interior(eq0, opt.integrator), k, r0);
      } catch (const Error& e) {
        if (e.category() != ErrorCategory::NearThreshold && e.category() != ErrorCategory::NodeAtCutoff)
          throw;
      }
    }
    return res;
  }

  PhaseShiftCurve phase_shift_curve(const ChannelParams& channel, const PotentialModel& potential,
                                    const std::vector<double>& ks, double mu,
                                    const PhaseShiftOptions& opt, unsigned threads)
  {
    PhaseShiftCurve curve;
    curve.channel = channel;
    curve.mu = mu;
    curve.samples.resize(ks.size());
    detail::parallel_for(ks.size(), threads, [&](std::size_t i) {
      curve.samples[i] = phase_shift(channel, potential, ks[i], mu, opt).point;
    });
    return curve;
  }

}
