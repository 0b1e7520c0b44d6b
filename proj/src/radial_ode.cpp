// SPDX-License-Identifier: Apache-2.0
#include "qws/radial_ode.hpp"
#include "qws/error.hpp"
#include "dopri5.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace qws {

  namespace {

    constexpr cplx I{0.0, 1.0};

    //////////////////////////////////////////////////////////////////////////
    // Small dense complex linear algebra for the kernel system.

    using Matrix = std::vector<cplx>;   // row-major n x n

    cplx determinant(Matrix a, std::size_t n)
    {
      cplx det = 1.0;
      for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
          if (std::abs(a[r * n + c]) > std::abs(a[piv * n + c]))
            piv = r;
        if (a[piv * n + c] == cplx(0.0))
          return 0.0;
        if (piv != c) {
          for (std::size_t k = 0; k < n; ++k)
            std::swap(a[c * n + k], a[piv * n + k]);
          det = -det;
        }
        det *= a[c * n + c];
        for (std::size_t r = c + 1; r < n; ++r) {
          const cplx f = a[r * n + c] / a[c * n + c];
          for (std::size_t k = c; k < n; ++k)
            a[r * n + k] -= f * a[c * n + k];
        }
      }
      return det;
    }

    Matrix adjugate(const Matrix& a, std::size_t n)
    {
      Matrix adj(n * n);
      if (n == 1) {
        adj[0] = 1.0;
        return adj;
      }
      Matrix minor((n - 1) * (n - 1));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          // cofactor of a_ji goes to adj_ij
          std::size_t m = 0;
          for (std::size_t r = 0; r < n; ++r) {
            if (r == j)
              continue;
            for (std::size_t c = 0; c < n; ++c)
              if (c != i)
                minor[m++] = a[r * n + c];
          }
          const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
          adj[i * n + j] = sign * determinant(minor, n - 1);
        }
      return adj;
    }

    //////////////////////////////////////////////////////////////////////////
    // Real-axis propagation of several coupled solution blocks.
    //
    // State layout: for each solution s: [y_s, y'_s, acc_{s,0..n-1}] where
    // acc_{s,i}(r) = \int_0^r g_i w y_s. source[s] = -1 for a homogeneous block,
    // otherwise the kernel term feeding the particular solution.

    struct BlockSystem {
      const EffectiveEquation* eq = nullptr;
      std::vector<int> source;
      std::size_t rank = 0;          // accumulators per block
      // Outward regular integration carries v = r^{-s} y, s = lambda + 1/2,
      // which is smooth at the origin: v'' + (2s/r) v' + (k^2 - mu V) v = r^{-s} src.
      // Without it the step size has to resolve the r^s power law down to r_min.
      bool factored = false;
      cplx s = 0.0;
      std::size_t stride() const { return 2 + rank; }
    };

    cplx rpow(double r, cplx p)
    {
      return p.imag() == 0.0 ? cplx(std::pow(r, p.real())) : std::exp(p * std::log(r));
    }

    void factored_rhs(const BlockSystem& sys, double r, double r_pot,
                      std::span<const cplx> u, std::span<cplx> du)
    {
      const EffectiveEquation& eq = *sys.eq;
      const cplx w0 = eq.k2() - eq.mu() * eq.potential().V(r_pot);
      const cplx drift = 2.0 * sys.s / r;
      const std::size_t st = sys.stride();
      std::array<double, 16> gw_small;
      std::vector<double> gw_big;
      double* gw = gw_small.data();
      cplx rs = 1.0;
      if (sys.rank > 0) {
        if (sys.rank > gw_small.size()) {
          gw_big.resize(sys.rank);
          gw = gw_big.data();
        }
        const double w = eq.kernel_weight(r);
        for (std::size_t i = 0; i < sys.rank; ++i)
          gw[i] = eq.potential().g(i, r_pot) * w;
        rs = rpow(r, sys.s);
      }
      for (std::size_t b = 0; b < sys.source.size(); ++b) {
        const std::size_t o = b * st;
        du[o] = u[o + 1];
        du[o + 1] = -drift * u[o + 1] - w0 * u[o];
        if (sys.source[b] >= 0)
          du[o + 1] += gw[sys.source[b]] / rs;
        for (std::size_t i = 0; i < sys.rank; ++i)
          du[o + 2 + i] = gw[i] * rs * u[o];
      }
    }

    // (y, y') <-> (v, v') for every block; accumulators are untouched.
    void to_factored(const BlockSystem& sys, double r, std::span<cplx> x)
    {
      const cplx rms = rpow(r, -sys.s);
      for (std::size_t o = 0; o < x.size(); o += sys.stride()) {
        const cplx y = x[o], dy = x[o + 1];
        x[o] = y * rms;
        x[o + 1] = (dy - sys.s * y / r) * rms;
      }
    }

    void from_factored(const BlockSystem& sys, double r, std::span<cplx> x)
    {
      const cplx rs = rpow(r, sys.s);
      for (std::size_t o = 0; o < x.size(); o += sys.stride()) {
        const cplx v = x[o], dv = x[o + 1];
        x[o] = v * rs;
        x[o + 1] = (dv + sys.s * v / r) * rs;
      }
    }

    void block_rhs(const BlockSystem& sys, double r, double r_pot,
                   std::span<const cplx> u, std::span<cplx> du)
    {
      const EffectiveEquation& eq = *sys.eq;
      if (sys.factored) {
        factored_rhs(sys, r, r_pot, u, du);
        return;
      }
      const cplx Q = eq.k2() - eq.centrifugal() / (r * r) - eq.mu() * eq.potential().V(r_pot);
      const std::size_t st = sys.stride();
      std::array<double, 16> gw_small{};
      std::vector<double> gw_big;
      double* gw = gw_small.data();
      if (sys.rank > gw_small.size()) {
        gw_big.resize(sys.rank);
        gw = gw_big.data();
      }
      if (sys.rank > 0) {
        const double w = eq.kernel_weight(r);
        for (std::size_t i = 0; i < sys.rank; ++i)
          gw[i] = eq.potential().g(i, r_pot) * w;
      }
      for (std::size_t s = 0; s < sys.source.size(); ++s) {
        const std::size_t o = s * st;
        du[o] = u[o + 1];
        du[o + 1] = -Q * u[o];
        if (sys.source[s] >= 0)
          du[o + 1] += gw[sys.source[s]];
        for (std::size_t i = 0; i < sys.rank; ++i)
          du[o + 2 + i] = gw[i] * u[o];
      }
    }

    // Propagates along the grid from node index `from` to `to` (either
    // direction), stopping at every node. Segments between breakpoint nodes
    // are integrated separately with the potential evaluated strictly inside
    // the segment. record(node_index, state).
    template <class Record>
    void propagate(const BlockSystem& sys, const RadialGrid& grid,
                   const std::vector<double>& breaks, std::size_t from, std::size_t to,
                   std::vector<cplx>& u, const IntegratorOptions& opt, Record&& record)
    {
      const auto& nodes = grid.nodes();
      record(from, std::span<const cplx>(u));
      if (from == to)
        return;
      std::vector<cplx> out;
      if (sys.factored)
        to_factored(sys, nodes[from], u);
      const int dir = to > from ? 1 : -1;
      std::size_t seg_start = from;
      double dt_hint = 0.0;
      while (seg_start != to) {
        // Segment ends at the next breakpoint node or at `to`.
        std::size_t seg_end = seg_start;
        do {
          seg_end = static_cast<std::size_t>(static_cast<long>(seg_end) + dir);
        } while (seg_end != to && !std::binary_search(breaks.begin(), breaks.end(), nodes[seg_end]));

        const double a = nodes[seg_start], b = nodes[seg_end];
        const double lo = std::min(a, b), hi = std::max(a, b);
        const double delta = 1e-13 * hi;
        std::vector<double> stops;
        for (std::size_t i = seg_start; i != seg_end;) {
          i = static_cast<std::size_t>(static_cast<long>(i) + dir);
          stops.push_back((nodes[i] - a) / (b - a));
        }
        stops.back() = 1.0;

        auto rhs = [&](cplx rc, std::span<const cplx> x, std::span<cplx> dx) {
          const double r = rc.real();
          const double r_pot = std::clamp(r, lo + delta, hi - delta);
          block_rhs(sys, r, r_pot, x, dx);
        };
        detail::StepControl ctl;
        ctl.rtol = opt.rtol;
        ctl.length_scale = grid.r0();
        ctl.max_steps = opt.max_steps;
        // Start near the origin with a step small against r itself.
        const double first = dt_hint > 0.0 ? dt_hint / (hi - lo) : 0.01 * std::min(a, b) / (hi - lo);
        ctl.initial_dt = std::clamp(first, 1e-12, 1.0);
        const std::size_t base = seg_start;
        detail::dopri5_path(rhs, cplx(a), cplx(b), u, stops, ctl,
                            [&](std::size_t k, cplx, std::span<const cplx> x) {
                              const std::size_t node = static_cast<std::size_t>(
                                static_cast<long>(base) + dir * static_cast<long>(k + 1));
                              if (!sys.factored) {
                                record(node, x);
                                return;
                              }
                              out.assign(x.begin(), x.end());
                              from_factored(sys, nodes[node], out);
                              record(node, std::span<const cplx>(out));
                            });
        dt_hint = std::min(hi - lo, 0.05 * grid.r0());
        seg_start = seg_end;
      }
      if (sys.factored)
        from_factored(sys, nodes[to], u);
    }

    std::vector<double> breakpoint_nodes(const EffectiveEquation& eq, const RadialGrid& grid)
    {
      std::vector<double> b;
      for (double x : eq.potential().breakpoints())
        if (x >= grid.r_min() && x <= grid.r_max())
          b.push_back(x);
      return b;
    }

    void check_grid(const EffectiveEquation& eq, const RadialGrid& grid)
    {
      if (grid.size() < 2)
        fail(ErrorCategory::InvalidArgument, "radial grid needs at least two nodes");
      if (std::abs(grid.r0() - eq.r0()) > 1e-14 * eq.r0())
        fail(ErrorCategory::InvalidArgument, "grid cutoff differs from potential cutoff r0");
      for (double b : eq.potential().breakpoints())
        if (b >= grid.r_min() && b <= grid.r_max()
            && !std::binary_search(grid.nodes().begin(), grid.nodes().end(), b))
          fail(ErrorCategory::InvalidArgument, "potential breakpoint is not a grid node");
    }

    struct FrobeniusStart {
      cplx y, dy, truncation;
    };

    // y = r^s (1 + a1 r + a2 r^2), s = lambda + 1/2, for V ~ v_{-1}/r + v_0.
    FrobeniusStart frobenius(const EffectiveEquation& eq, double r)
    {
      const cplx lambda = eq.lambda();
      const cplx s = lambda + 0.5;
      const double mu = eq.mu();
      const cplx vm1 = mu * eq.potential().local().coeff_inverse_r();
      const cplx w0 = eq.k2() - mu * eq.potential().local().coeff_constant();
      const cplx a1 = vm1 / (1.0 + 2.0 * lambda);
      const cplx a2 = (vm1 * a1 - w0) / (2.0 * (2.0 + 2.0 * lambda));
      const cplx rs = std::pow(cplx(r), s);
      FrobeniusStart f;
      f.y = rs * (1.0 + a1 * r + a2 * r * r);
      f.dy = rs / r * (s + (s + 1.0) * a1 * r + (s + 2.0) * a2 * r * r);
      f.truncation = std::abs(a2) * r * r;
      return f;
    }

    // Asymptotic series of the free outgoing solution, f = e^{-ikr} S(r).
    void outgoing_series(cplx lambda, cplx k, cplx r, cplx& S, cplx& dS)
    {
      const cplx z = k * r;
      const cplx four_l2 = 4.0 * lambda * lambda;
      cplx a = 1.0;            // a_m(lambda)
      cplx mi_pow = 1.0;       // (-i)^m
      cplx zpow = 1.0;         // z^m
      S = 1.0;
      dS = 0.0;
      double prev = HUGE_VAL;
      for (int m = 0; m < 400; ++m) {
        const double odd = 2.0 * m + 1.0;
        a *= (four_l2 - odd * odd) / (8.0 * (m + 1.0));
        mi_pow *= -I;
        zpow *= z;
        const cplx term = mi_pow * a / zpow;
        const double mag = std::abs(term);
        if (mag > prev)
          break;
        S += term;
        dS += -static_cast<double>(m + 1) * term / r;
        prev = mag;
        if (mag <= 1e-18 * std::abs(S))
          break;
      }
    }

  }

  ////////////////////////////////////////////////////////////////////////////
  // RadialGrid

  RadialGrid::RadialGrid(std::vector<double> nodes, double r0)
    : m_nodes(std::move(nodes)), m_r0(r0)
  {
    if (m_nodes.size() < 2)
      fail(ErrorCategory::InvalidArgument, "radial grid needs at least two nodes");
    if (!(m_nodes.front() > 0.0))
      fail(ErrorCategory::InvalidArgument, "radial grid must be strictly positive");
    for (std::size_t i = 1; i < m_nodes.size(); ++i)
      if (!(m_nodes[i] > m_nodes[i - 1]))
        fail(ErrorCategory::InvalidArgument, "radial grid nodes must be strictly increasing");
    auto it = std::lower_bound(m_nodes.begin(), m_nodes.end(), r0);
    if (it == m_nodes.end() || *it != r0)
      fail(ErrorCategory::InvalidArgument, "r0 must be a grid node");
    m_r0_index = static_cast<std::size_t>(it - m_nodes.begin());
  }

  RadialGrid RadialGrid::make(double r0, double r_max, std::size_t n_inner, std::size_t n_outer,
                              std::span<const double> breakpoints, double r_min)
  {
    if (!(r0 > 0.0) || !(r_max >= r0) || n_inner < 1)
      fail(ErrorCategory::InvalidArgument, "grid needs r0 > 0, r_max >= r0, n_inner >= 1");
    if (r_min <= 0.0)
      r_min = default_r_min(r0);
    if (!(r_min < r0))
      fail(ErrorCategory::InvalidArgument, "grid needs r_min < r0");
    const double h = r0 / static_cast<double>(n_inner);
    std::vector<double> nodes;
    for (double r = r_min; r < h * (1.0 - 1e-9); r *= 2.0)
      nodes.push_back(r);
    for (std::size_t i = 1; i <= n_inner; ++i) {
      const double r = i == n_inner ? r0 : h * static_cast<double>(i);
      if (r > r_min)
        nodes.push_back(r);
    }
    if (r_max > r0 && n_outer > 0) {
      const double ho = (r_max - r0) / static_cast<double>(n_outer);
      for (std::size_t i = 1; i <= n_outer; ++i)
        nodes.push_back(i == n_outer ? r_max : r0 + ho * static_cast<double>(i));
    }
    for (double b : breakpoints) {
      if (b <= r_min || b > r_max)
        continue;
      // Replace a node that nearly coincides with the breakpoint.
      auto it = std::lower_bound(nodes.begin(), nodes.end(), b);
      const double tol = 1e-3 * h;
      if (it != nodes.end() && std::abs(*it - b) < tol && *it != r0)
        *it = b;
      else if (it != nodes.begin() && std::abs(*(it - 1) - b) < tol && *(it - 1) != r0 && *(it - 1) != r_min)
        *(it - 1) = b;
      else
        nodes.insert(it, b);
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    return RadialGrid(std::move(nodes), r0);
  }

  RadialGrid RadialGrid::shooting(const PotentialModel& potential, double r_min)
  {
    const double r0 = potential.r0();
    if (r_min <= 0.0)
      r_min = default_r_min(r0);
    std::vector<double> nodes{r_min};
    for (double b : potential.breakpoints())
      if (b > r_min)
        nodes.push_back(b);
    return RadialGrid(std::move(nodes), r0);
  }

  RadialGrid RadialGrid::for_potential(const PotentialModel& potential, double r_max,
                                       std::size_t n_inner, std::size_t n_outer)
  {
    const auto b = potential.breakpoints();
    return make(potential.r0(), std::max(r_max, potential.r0()), n_inner, n_outer, b);
  }

  cplx RadialGrid::integrate_nodes(std::span<const cplx> f, std::span<const cplx> df,
                                   std::size_t from, std::size_t to) const
  {
    if (f.size() != m_nodes.size() || df.size() != m_nodes.size())
      fail(ErrorCategory::InvalidArgument, "integrand size differs from grid size");
    cplx s = 0.0;
    for (std::size_t i = from; i < to; ++i) {
      const double h = m_nodes[i + 1] - m_nodes[i];
      s += 0.5 * h * (f[i] + f[i + 1]) + h * h / 12.0 * (df[i] - df[i + 1]);
    }
    return s;
  }

  cplx RadialGrid::integrate_to_r0(std::span<const cplx> f, std::span<const cplx> df,
                                   cplx tail_exponent) const
  {
    const cplx tail = f[0] * m_nodes[0] / (tail_exponent + 1.0);
    return tail + integrate_nodes(f, df, 0, m_r0_index);
  }

  ////////////////////////////////////////////////////////////////////////////
  // Solvers

  RadialSolution integrate_regular(const EffectiveEquation& eq, const RadialGrid& grid,
                                   const IntegratorOptions& opt)
  {
    check_grid(eq, grid);
    const double re_lambda = eq.lambda().real();
    if (!(re_lambda > 0.0)) {
      if (!opt.allow_reflected_branch || !(re_lambda > -0.5) || re_lambda == 0.0)
        fail(ErrorCategory::InvalidArgument,
             "regular solution requires Re(lambda) > 0 (reflected branch: -1/2 < Re(lambda) < 0 in test mode)");
    }
    BlockSystem sys;
    sys.eq = &eq;
    sys.source = {-1};
    sys.factored = eq.centrifugal() != cplx(0.0);
    sys.s = eq.lambda() + 0.5;
    const FrobeniusStart st = frobenius(eq, grid.r_min());
    std::vector<cplx> u{st.y, st.dy};

    RadialSolution sol;
    sol.grid = grid;
    sol.y.resize(grid.size());
    sol.dy.resize(grid.size());
    sol.normalization = Normalization::OriginRegular;
    sol.channel = eq.channel();
    sol.k2 = eq.k2();
    sol.k = std::sqrt(eq.k2());
    sol.mu = eq.mu();
    sol.start_truncation = std::abs(st.truncation);
    const auto breaks = breakpoint_nodes(eq, grid);
    propagate(sys, grid, breaks, 0, grid.size() - 1, u, opt,
              [&](std::size_t i, std::span<const cplx> x) {
                sol.y[i] = x[0];
                sol.dy[i] = x[1];
              });
    return sol;
  }

  RadialSolution integrate_jost(const EffectiveEquation& eq, const RadialGrid& grid,
                                cplx k, const IntegratorOptions& opt)
  {
    check_grid(eq, grid);
    if (k == cplx(0.0))
      fail(ErrorCategory::InvalidArgument, "Jost solution is degenerate at k = 0");
    if (eq.has_kernel_source())
      fail(ErrorCategory::InvalidArgument, "Jost solution is implemented for local potentials only");
    if (std::abs(k * k - eq.k2()) > 1e-12 * std::max(1.0, std::abs(k * k)))
      fail(ErrorCategory::InvalidArgument, "Jost wavenumber inconsistent with the equation's k^2");

    const double R = grid.r_max();
    const double ak = std::abs(k);
    const double reach = std::max(40.0, 2.0 * std::norm(eq.lambda()) + 20.0) / ak;
    const cplx dir = -I * ak / k;          // Im(k dir) = -|k|: f grows toward R
    const cplx far = R + dir * reach;

    cplx S, dS;
    outgoing_series(eq.lambda(), k, far, S, dS);
    // Integrate f e^{ik far}; the factor e^{-ik far} is restored at the end.
    std::vector<cplx> u{S, -I * k * S + dS};
    auto free_rhs = [&](cplx r, std::span<const cplx> x, std::span<cplx> dx) {
      dx[0] = x[1];
      dx[1] = -eq.Q_free(r) * x[0];
    };
    detail::StepControl ctl;
    ctl.rtol = opt.rtol;
    ctl.length_scale = 1.0 / ak;
    ctl.initial_dt = 1e-3;
    ctl.max_steps = opt.max_steps;
    const std::array<double, 1> stop{1.0};
    detail::dopri5_path(free_rhs, far, cplx(R), u, stop, ctl, [](std::size_t, cplx, std::span<const cplx>) {});

    RadialSolution sol;
    sol.grid = grid;
    sol.y.resize(grid.size());
    sol.dy.resize(grid.size());
    sol.normalization = Normalization::Jost;
    sol.channel = eq.channel();
    sol.k2 = eq.k2();
    sol.k = k;
    sol.mu = eq.mu();

    BlockSystem sys;
    sys.eq = &eq;
    sys.source = {-1};
    const auto breaks = breakpoint_nodes(eq, grid);
    propagate(sys, grid, breaks, grid.size() - 1, 0, u, opt,
              [&](std::size_t i, std::span<const cplx> x) {
                sol.y[i] = x[0];
                sol.dy[i] = x[1];
              });
    const cplx factor = std::exp(-I * k * far);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      sol.y[i] *= factor;
      sol.dy[i] *= factor;
    }
    return sol;
  }

  RadialSolution solve_nonlocal(const EffectiveEquation& eq, const RadialGrid& grid,
                                const IntegratorOptions& opt, KernelNormalization norm)
  {
    if (!eq.has_kernel_source())
      return integrate_regular(eq, grid, opt);
    check_grid(eq, grid);
    if (eq.lambda().imag() != 0.0 || !(eq.lambda().real() > 0.0))
      fail(ErrorCategory::InvalidArgument, "non-local solve requires real lambda > 0");
    if (eq.k2().imag() != 0.0)
      fail(ErrorCategory::InvalidArgument, "non-local solve requires real energy");

    const std::size_t n = eq.potential().rank();
    BlockSystem sys;
    sys.eq = &eq;
    sys.rank = n;
    sys.factored = eq.centrifugal() != cplx(0.0);
    sys.s = eq.lambda() + 0.5;
    sys.source.push_back(-1);
    for (std::size_t j = 0; j < n; ++j)
      sys.source.push_back(static_cast<int>(j));
    const std::size_t st = sys.stride();
    const std::size_t nsol = n + 1;

    const double rmin = grid.r_min();
    const FrobeniusStart fs = frobenius(eq, rmin);
    std::vector<cplx> u(nsol * st, cplx(0.0));
    u[0] = fs.y;
    u[1] = fs.dy;
    {
      const double p = eq.kernel_weight_exponent() + eq.lambda().real() + 0.5;
      const double w = eq.kernel_weight(rmin);
      for (std::size_t i = 0; i < n; ++i)
        u[2 + i] = eq.potential().g(i, rmin) * w * fs.y * rmin / (p + 1.0);
    }

    std::vector<std::vector<cplx>> ys(nsol, std::vector<cplx>(grid.size()));
    std::vector<std::vector<cplx>> dys(nsol, std::vector<cplx>(grid.size()));
    std::vector<cplx> moments_at_r0;
    const auto breaks = breakpoint_nodes(eq, grid);
    const std::size_t i0 = grid.r0_index();
    propagate(sys, grid, breaks, 0, grid.size() - 1, u, opt,
              [&](std::size_t node, std::span<const cplx> x) {
                for (std::size_t s = 0; s < nsol; ++s) {
                  ys[s][node] = x[s * st];
                  dys[s][node] = x[s * st + 1];
                }
                if (node == i0)
                  moments_at_r0.assign(x.begin(), x.end());
              });

    // M_ij = c_i[y_j], c_h = c_i[y_h]; B = Id - mu C M.
    Matrix M(n * n), C(n * n), B(n * n);
    std::vector<cplx> ch(n);
    for (std::size_t i = 0; i < n; ++i) {
      ch[i] = moments_at_r0[2 + i];
      for (std::size_t j = 0; j < n; ++j) {
        M[i * n + j] = moments_at_r0[(j + 1) * st + 2 + i];
        C[i * n + j] = eq.potential().coupling(i, j);
      }
    }
    const double mu = eq.mu();
    double bnorm = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        cplx cm = 0.0;
        for (std::size_t k = 0; k < n; ++k)
          cm += C[i * n + k] * M[k * n + j];
        B[i * n + j] = (i == j ? 1.0 : 0.0) - mu * cm;
        bnorm += std::norm(B[i * n + j]);
      }
    bnorm = std::sqrt(bnorm);
    std::vector<cplx> rhs(n);   // mu C c_h
    for (std::size_t i = 0; i < n; ++i) {
      cplx s = 0.0;
      for (std::size_t k = 0; k < n; ++k)
        s += C[i * n + k] * ch[k];
      rhs[i] = mu * s;
    }
    const cplx det = determinant(B, n);
    const Matrix adj = adjugate(B, n);
    std::vector<cplx> b(n);
    for (std::size_t i = 0; i < n; ++i) {
      cplx s = 0.0;
      for (std::size_t k = 0; k < n; ++k)
        s += adj[i * n + k] * rhs[k];
      b[i] = s;
    }
    cplx alpha = det;
    if (norm == KernelNormalization::Origin) {
      if (std::abs(det) < detail::degeneracy_threshold * std::pow(std::max(1.0, bnorm), static_cast<double>(n)))
        fail(ErrorCategory::DegenerateCoupling,
             "det(Id - mu C M) vanishes: kernel resonance at this energy; perturb E");
      for (auto& x : b)
        x /= det;
      alpha = 1.0;
    }

    RadialSolution sol;
    sol.grid = grid;
    sol.y.assign(grid.size(), 0.0);
    sol.dy.assign(grid.size(), 0.0);
    for (std::size_t node = 0; node < grid.size(); ++node) {
      cplx y = alpha * ys[0][node], dy = alpha * dys[0][node];
      for (std::size_t j = 0; j < n; ++j) {
        y += b[j] * ys[j + 1][node];
        dy += b[j] * dys[j + 1][node];
      }
      sol.y[node] = y;
      sol.dy[node] = dy;
    }
    sol.normalization = norm == KernelNormalization::Origin ? Normalization::OriginRegular
                                                            : Normalization::MatchedPhysical;
    sol.channel = eq.channel();
    sol.k2 = eq.k2();
    sol.k = std::sqrt(eq.k2());
    sol.mu = mu;
    sol.start_truncation = std::abs(fs.truncation);
    sol.homogeneous_coefficient = alpha;
    sol.kernel_coefficients = std::move(b);
    return sol;
  }

  std::vector<cplx> kernel_moments(const EffectiveEquation& eq, const RadialSolution& sol)
  {
    // Gauss-Legendre on each cell applied to g w times the cubic Hermite
    // interpolant of y; breakpoints are nodes so g is smooth inside cells.
    static constexpr std::array<double, 4> gx = {-0.8611363115940526, -0.3399810435848563,
                                                 0.3399810435848563, 0.8611363115940526};
    static constexpr std::array<double, 4> gw = {0.3478548451374538, 0.6521451548625461,
                                                 0.6521451548625461, 0.3478548451374538};
    const auto& nodes = sol.grid.nodes();
    const std::size_t n = eq.potential().rank();
    std::vector<cplx> c(n, 0.0);
    for (std::size_t cell = 0; cell < sol.grid.r0_index(); ++cell) {
      const double a = nodes[cell], b = nodes[cell + 1], h = b - a;
      for (std::size_t q = 0; q < gx.size(); ++q) {
        const double t = 0.5 * (gx[q] + 1.0);
        const double r = a + h * t;
        const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
        const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
        const cplx y = h00 * sol.y[cell] + h10 * h * sol.dy[cell]
                       + h01 * sol.y[cell + 1] + h11 * h * sol.dy[cell + 1];
        const double w = eq.kernel_weight(r) * 0.5 * h * gw[q];
        for (std::size_t i = 0; i < n; ++i)
          c[i] += eq.potential().g(i, r) * w * y;
      }
    }
    return c;
  }

  double green_identity_residual(const RadialSolution& y1, const RadialSolution& y2)
  {
    if (!y1.grid.same_as(y2.grid))
      fail(ErrorCategory::InvalidArgument, "green identity: solutions live on different grids");
    if (y1.channel.lambda != y2.channel.lambda || y1.mu != y2.mu)
      fail(ErrorCategory::InvalidArgument, "green identity: solutions differ in lambda or mu");
    const auto& g = y1.grid;
    const std::size_t i0 = g.r0_index();
    const cplx bracket = y1.y[i0] * y2.dy[i0] - y2.y[i0] * y1.dy[i0];
    std::vector<cplx> f(g.size()), df(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      f[i] = y1.y[i] * y2.y[i];
      df[i] = y1.dy[i] * y2.y[i] + y1.y[i] * y2.dy[i];
    }
    const cplx integral = g.integrate_to_r0(f, df, 2.0 * y1.channel.lambda + 1.0);
    const cplx volume = (y2.k2 - y1.k2) * integral;
    const double scale = std::max({std::abs(bracket), std::abs(volume), 1e-300});
    return std::abs(bracket + volume) / scale;
  }

}
