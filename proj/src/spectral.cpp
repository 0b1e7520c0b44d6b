// SPDX-License-Identifier: Apache-2.0
#include "qws/spectral.hpp"
#include "qws/error.hpp"
#include "qws/specfun.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace qws {

  namespace {

    constexpr double pi = std::numbers::pi;
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();

    double checked_lambda(const ChannelParams& channel)
    {
      const double lambda = channel.real_lambda();
      if (!(lambda > 0.0))
        fail(ErrorCategory::InvalidArgument,
             "lambda = 0 is the half-bound regime and is not supported; need lambda > 0");
      return lambda;
    }

    struct Shot {
      double y0 = 0.0, dy0 = 0.0, ymax = 0.0;
      bool node() const { return !(std::abs(y0) >= 1e-12 * ymax); }
    };

    RadialGrid matching_grid(const PotentialModel& potential, std::size_t cells = 64)
    {
      const auto br = potential.breakpoints();
      return RadialGrid::make(potential.r0(), potential.r0(), cells, 0, br);
    }

    RadialSolution interior_solution(const ChannelParams& channel, const PotentialModel& potential,
                                     double E, double mu, const RadialGrid& grid,
                                     const IntegratorOptions& opt)
    {
      const auto eq = effective_equation(channel, potential, cplx(E), mu);
      return solve_nonlocal(eq, grid, opt, KernelNormalization::Adjugate);
    }

    Shot shoot(const ChannelParams& channel, const PotentialModel& potential, double E, double mu,
               const RadialGrid& grid, const IntegratorOptions& opt)
    {
      const auto sol = interior_solution(channel, potential, E, mu, grid, opt);
      Shot s;
      s.y0 = sol.y_at_r0().real();
      s.dy0 = sol.dy_at_r0().real();
      for (std::size_t i = 0; i <= grid.r0_index(); ++i)
        s.ymax = std::max(s.ymax, std::abs(sol.y[i]));
      return s;
    }

    double exterior_log_derivative(double lambda, double E, double r0)
    {
      return specfun::log_derivative_exterior(lambda, std::sqrt(std::max(-E, 0.0)), r0);
    }

    // \int_{r0}^inf r K(kappa r)^2 dr / (r0 K(kappa r0)^2) by 10-point
    // Gauss-Legendre panels growing geometrically out to 50 decay lengths.
    double exterior_norm_ratio(double lambda, double kappa, double r0)
    {
      static constexpr std::array<double, 5> x = {0.1488743389816312, 0.4333953941292472,
                                                  0.6794095682990244, 0.8650633666889845,
                                                  0.9739065285171717};
      static constexpr std::array<double, 5> w = {0.2955242247147529, 0.2692667193099963,
                                                  0.2190863625159820, 0.1494513491505806,
                                                  0.0666713443001436};
      const double k0 = specfun::bessel_i_k(lambda, kappa * r0).k_scaled;
      auto f = [&](double r) {
        const double kr = specfun::bessel_i_k(lambda, kappa * r).k_scaled / k0;
        return r / r0 * kr * kr * std::exp(-2.0 * kappa * (r - r0));
      };
      const double end = r0 + 50.0 / kappa;
      double a = r0, sum = 0.0;
      while (a < end) {
        const double b = std::min(end, a + std::min(0.25 * a, 0.5 / kappa));
        const double c = 0.5 * (a + b), h = 0.5 * (b - a);
        for (std::size_t i = 0; i < x.size(); ++i)
          sum += h * w[i] * (f(c - h * x[i]) + f(c + h * x[i]));
        a = b;
      }
      return sum;
    }

    double interior_norm(const RadialSolution& sol)
    {
      const auto& g = sol.grid;
      std::vector<cplx> f(g.size()), df(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) {
        f[i] = sol.y[i] * sol.y[i];
        df[i] = 2.0 * sol.y[i] * sol.dy[i];
      }
      return g.integrate_to_r0(f, df, 2.0 * sol.channel.lambda + 1.0).real();
    }

    int interior_zeros(const RadialSolution& sol)
    {
      int n = 0;
      const std::size_t i0 = sol.grid.r0_index();
      for (std::size_t i = 1; i < i0; ++i)
        if (sol.y[i].real() * sol.y[i - 1].real() < 0.0
            || (sol.y[i].real() == 0.0 && sol.y[i - 1].real() * sol.y[i + 1].real() < 0.0))
          ++n;
      return n;
    }

    // Sturm oscillation count at E: zeros of the regular solution on (0, inf).
    int oscillation_count(const ChannelParams& channel, const PotentialModel& potential,
                          double E, double mu, const RadialGrid& dense, const IntegratorOptions& opt)
    {
      const double lambda = channel.real_lambda();
      const auto sol = interior_solution(channel, potential, E, mu, dense, opt);
      const double y0 = sol.y_at_r0().real(), dy0 = sol.dy_at_r0().real();
      const double G = dy0 - exterior_log_derivative(lambda, E, potential.r0()) * y0;
      const bool exterior_zero = (y0 > 0.0) != (G > 0.0);
      return interior_zeros(sol) + (exterior_zero ? 1 : 0);
    }

  }

  double matching_mismatch(const ChannelParams& channel, const PotentialModel& potential,
                           double E, double mu, const IntegratorOptions& opt)
  {
    const double lambda = checked_lambda(channel);
    if (!(E <= 0.0))
      fail(ErrorCategory::InvalidArgument, "matching mismatch is defined for E <= 0");
    const auto grid = matching_grid(potential);
    const Shot s = shoot(channel, potential, E, mu, grid, opt);
    if (s.node())
      fail(ErrorCategory::NodeAtCutoff, "y(r0) vanishes: interior log-derivative undefined; perturb E");
    return s.dy0 / s.y0 - exterior_log_derivative(lambda, E, potential.r0());
  }

  BoundStateSearch find_bound_states(const ChannelParams& channel, const PotentialModel& potential,
                                     double mu, const BoundStateOptions& opt)
  {
    const double lambda = checked_lambda(channel);
    const double r0 = potential.r0();
    BoundStateSearch out;
    out.E_ceiling = threshold_energy(potential);
    out.E_floor = opt.E_floor < 0.0
                    ? opt.E_floor
                    : -(1.5 * potential.local_sup_norm() + potential.kernel_sup_norm());
    if (!(out.E_floor < out.E_ceiling))
      out.E_floor = std::min(-1.0, 10.0 * out.E_ceiling);
    if (opt.scan_points < 2)
      fail(ErrorCategory::InvalidArgument, "bound-state scan needs at least two points");

    const auto grid = matching_grid(potential);
    auto G = [&](double E) {
      const Shot s = shoot(channel, potential, E, mu, grid, opt.integrator);
      return s.dy0 - exterior_log_derivative(lambda, E, r0) * s.y0;
    };

    const bool local = !potential.has_kernel() || mu == 0.0;
    const auto dense = RadialGrid::for_potential(potential, r0, 2000, 0);
    if (local)
      out.sturm_count = oscillation_count(channel, potential, out.E_ceiling, mu, dense, opt.integrator)
                        - oscillation_count(channel, potential, out.E_floor, mu, dense, opt.integrator);

    std::vector<std::pair<double, double>> brackets;
    std::size_t points = opt.scan_points;
    for (int attempt = 0;; ++attempt) {
      brackets.clear();
      const double lo = std::log(-out.E_floor), hi = std::log(-out.E_ceiling);
      double Ea = out.E_floor, Ga = G(Ea);
      for (std::size_t i = 1; i < points; ++i) {
        const double Eb = i + 1 == points ? out.E_ceiling
                                          : -std::exp(lo + (hi - lo) * static_cast<double>(i)
                                                             / static_cast<double>(points - 1));
        const double Gb = G(Eb);
        if (Ga == 0.0 || Ga * Gb < 0.0)
          brackets.emplace_back(Ea, Eb);
        Ea = Eb;
        Ga = Gb;
      }
      out.scan_points_used = points;
      if (out.sturm_count < 0 || static_cast<int>(brackets.size()) == out.sturm_count)
        break;
      if (attempt >= opt.max_refinements) {
        out.warnings.push_back("energy scan found " + std::to_string(brackets.size())
                               + " levels but the oscillation count is "
                               + std::to_string(out.sturm_count) + "; scan may be too coarse");
        break;
      }
      points = 2 * points;
    }

    for (auto [a, b] : brackets) {
      double Ga = G(a);
      for (int it = 0; it < 300 && (b - a) > opt.tol * std::max(std::abs(b), -out.E_ceiling); ++it) {
        const double m = 0.5 * (a + b);
        const double Gm = G(m);
        if (Gm == 0.0) {
          a = b = m;
          break;
        }
        if (Ga * Gm < 0.0)
          b = m;
        else {
          a = m;
          Ga = Gm;
        }
      }
      BoundState bs;
      bs.E = 0.5 * (a + b);
      bs.kappa = std::sqrt(-bs.E);
      bs.mu = mu;
      bs.channel = channel;
      auto sol = interior_solution(channel, potential, bs.E, mu, dense, opt.integrator);
      const double y0 = sol.y_at_r0().real();
      const double total = interior_norm(sol) + y0 * y0 * exterior_norm_ratio(lambda, bs.kappa, r0);
      const double scale = (y0 < 0.0 ? -1.0 : 1.0) / std::sqrt(total);
      for (auto& v : sol.y) v *= scale;
      for (auto& v : sol.dy) v *= scale;
      sol.normalization = Normalization::MatchedPhysical;
      bs.matching_residual = (sol.dy_at_r0() / sol.y_at_r0()).real()
                             - exterior_log_derivative(lambda, bs.E, r0);
      bs.interior_nodes = interior_zeros(sol);
      bs.solution = std::move(sol);
      out.levels.push_back(std::move(bs));
    }
    return out;
  }

  SturmCheck sturm_liouville_check(const ChannelParams& channel, const PotentialModel& potential,
                                   double mu, double E, double dE, const IntegratorOptions& opt)
  {
    const double lambda = checked_lambda(channel);
    const double r0 = potential.r0();
    if (!(dE > 0.0) || !(E + dE < 0.0))
      fail(ErrorCategory::InvalidArgument, "sturm check needs dE > 0 and E + dE < 0");
    const auto grid = RadialGrid::for_potential(potential, r0, 400, 0);
    const auto lo = interior_solution(channel, potential, E - dE, mu, grid, opt);
    const auto mid = interior_solution(channel, potential, E, mu, grid, opt);
    const auto hi = interior_solution(channel, potential, E + dE, mu, grid, opt);
    auto crossed = [](const RadialSolution& a, const RadialSolution& b) {
      // A node through r0 flips y but not y'; an overall sign flip of the
      // normalization flips both.
      const bool fy = a.y_at_r0().real() * b.y_at_r0().real() <= 0.0;
      const bool fd = a.dy_at_r0().real() * b.dy_at_r0().real() < 0.0;
      return fy && !fd;
    };
    if (crossed(lo, mid) || crossed(mid, hi))
      fail(ErrorCategory::InvalidArgument,
           "node crosses r0 inside [E - dE, E + dE]: finite differences straddle two branches");
    auto A = [](const RadialSolution& s) { return (s.dy_at_r0() / s.y_at_r0()).real(); };

    SturmCheck c;
    c.E = E;
    c.dE = dE;
    c.slope_interior = (A(hi) - A(lo)) / (2.0 * dE);
    c.slope_exterior = (exterior_log_derivative(lambda, E + dE, r0)
                        - exterior_log_derivative(lambda, E - dE, r0)) / (2.0 * dE);
    const double y0 = mid.y_at_r0().real();
    c.slope_interior_integral = -interior_norm(mid) / (y0 * y0);
    c.slope_exterior_integral = exterior_norm_ratio(lambda, std::sqrt(-E), r0);
    return c;
  }

  std::vector<double> default_mu_grid(std::size_t steps, double mu_max)
  {
    std::vector<double> g(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i)
      g[i] = i == steps ? mu_max : mu_max * static_cast<double>(i) / static_cast<double>(steps);
    return g;
  }

  ContinuationReport continuation_count(const ChannelParams& channel, const PotentialModel& potential,
                                        const std::vector<double>& mu_grid,
                                        const ContinuationOptions& opt)
  {
    const double lambda = checked_lambda(channel);
    if (mu_grid.empty() || mu_grid.front() != 0.0)
      fail(ErrorCategory::InvalidArgument, "continuation grid must start at mu = 0");
    for (std::size_t i = 1; i < mu_grid.size(); ++i)
      if (!(mu_grid[i] > mu_grid[i - 1]))
        fail(ErrorCategory::InvalidArgument, "continuation grid must be strictly increasing");

    const double r0 = potential.r0();
    ContinuationReport rep;
    rep.channel = channel;
    rep.E_threshold = threshold_energy(potential);
    rep.rho = rho_threshold(lambda, r0);
    rep.threshold_value = exterior_log_derivative(lambda, rep.E_threshold, r0);
    rep.mu_grid = mu_grid;
    const auto grid = matching_grid(potential);

    struct Point {
      double N = 0.0, D = 0.0, y0 = 0.0;
      bool node = false;
    };
    auto eval = [&](double mu) {
      const Shot s = shoot(channel, potential, rep.E_threshold, mu, grid, opt.integrator);
      Point p;
      p.y0 = s.y0;
      p.N = s.dy0 - rep.threshold_value * s.y0;
      p.node = s.node();
      p.D = p.node ? nan : p.N / s.y0;
      return p;
    };

    std::vector<Point> pts;
    pts.reserve(mu_grid.size());
    for (double mu : mu_grid)
      pts.push_back(eval(mu));

    std::vector<bool> near_crossing(mu_grid.size(), false);
    double steps_so_far = 0.0;
    rep.staircase.push_back(0.0);
    for (std::size_t i = 1; i < mu_grid.size(); ++i) {
      if (pts[i - 1].N * pts[i].N < 0.0) {
        double a = mu_grid[i - 1], b = mu_grid[i];
        Point pa = pts[i - 1];
        while (b - a > opt.mu_resolution) {
          const double m = 0.5 * (a + b);
          const Point pm = eval(m);
          if (pa.N * pm.N < 0.0)
            b = m;
          else {
            a = m;
            pa = pm;
          }
        }
        // A decreasing through the threshold: A - thr > 0 on the left.
        const auto dir = pa.D > 0.0 ? CrossingDirection::Down : CrossingDirection::Up;
        rep.events.push_back({0.5 * (a + b), dir});
        if (dir == CrossingDirection::Down) {
          ++rep.n_down;
          steps_so_far += pi;
        } else {
          ++rep.n_up;
          steps_so_far -= pi;
        }
        near_crossing[i - 1] = near_crossing[i] = true;
      }
      rep.staircase.push_back(steps_so_far);
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      rep.A.push_back(pts[i].node ? nan : pts[i].D + rep.threshold_value);
      if (!near_crossing[i] && !pts[i].node && std::abs(pts[i].D) < opt.grazing_tol)
        fail(ErrorCategory::AmbiguousCrossing,
             "A(0, mu) touches the threshold without crossing at mu = " + std::to_string(mu_grid[i]));
    }
    rep.n = rep.n_down - rep.n_up;
    if (rep.n < 0)
      fail(ErrorCategory::AmbiguousCrossing, "continuation produced a negative bound-state count");
    return rep;
  }

  const char* to_string(LevinsonStatus s) noexcept
  {
    switch (s) {
      case LevinsonStatus::Pass: return "pass";
      case LevinsonStatus::Fail: return "fail";
      case LevinsonStatus::Inconclusive: return "inconclusive";
    }
    return "?";
  }

  LevinsonReport levinson_verify(const ChannelParams& channel, const PotentialModel& potential,
                                 const LevinsonOptions& opt)
  {
    const double lambda = checked_lambda(channel);
    LevinsonReport rep;
    rep.channel = channel;
    rep.k1 = 1e-4 / potential.r0();
    rep.k2 = 2.0 * rep.k1;
    try {
      PhaseShiftOptions po = opt.phase;
      po.mu_steps = opt.mu_steps;
      const auto p1 = phase_shift(channel, potential, rep.k1, opt.mu, po);
      const auto p2 = phase_shift(channel, potential, rep.k2, opt.mu, po);
      rep.eta_k1 = p1.point.eta;
      rep.eta_k2 = p2.point.eta;
      rep.phase_path = p1.path;
      // eta(k) = eta0 + c k^{2 lambda}: eliminate the leading term.
      const double f = std::pow(2.0, 2.0 * lambda);
      rep.eta0 = (f * rep.eta_k1 - rep.eta_k2) / (f - 1.0);

      rep.bound_states = find_bound_states(channel, potential, opt.mu, opt.bound);
      rep.n_direct = static_cast<int>(rep.bound_states.levels.size());
      rep.continuation = continuation_count(channel, potential, default_mu_grid(opt.mu_steps, opt.mu),
                                            opt.continuation);
      rep.n_continuation = rep.continuation.n;
    } catch (const Error& e) {
      switch (e.category()) {
        case ErrorCategory::AmbiguousCrossing:
        case ErrorCategory::NearThreshold:
        case ErrorCategory::DegenerateCoupling:
        case ErrorCategory::NodeAtCutoff:
        case ErrorCategory::Numeric:
          rep.status = LevinsonStatus::Inconclusive;
          rep.message = std::string(to_string(e.category())) + ": " + e.what();
          return rep;
        default:
          throw;
      }
    }
    const double gap = std::abs(rep.eta0 - rep.n_direct * pi);
    const bool counts_agree = rep.n_direct == rep.n_continuation;
    rep.status = gap <= opt.tol_eta && counts_agree ? LevinsonStatus::Pass : LevinsonStatus::Fail;
    char buf[160];
    std::snprintf(buf, sizeof buf, "|eta0 - n pi| = %.3g (tol %.3g); n_direct = %d, n_continuation = %d",
                  gap, opt.tol_eta, rep.n_direct, rep.n_continuation);
    rep.message = buf;
    return rep;
  }

}
