// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "qws/model.hpp"

#include <span>
#include <vector>

namespace qws {

  // Strictly increasing nodes from r_min to r_max; the cutoff r0 and every
  // breakpoint of the potential are nodes. Integrals use the Hermite-corrected
  // trapezoid rule
  //   \int f ~ sum_i w_i f_i + sum_i d_i f'_i,
  // exact for cubics between nodes, plus an analytic power-law tail on [0, r_min].
  class RadialGrid {
  public:
    RadialGrid() = default;
    // nodes must be strictly increasing, positive, and contain r0.
    RadialGrid(std::vector<double> nodes, double r0);

    // Geometric refinement near the origin down to r_min, n_inner uniform
    // cells on [0, r0] and n_outer uniform cells on [r0, r_max]; every
    // breakpoint in (0, r0] becomes a node.
    static RadialGrid make(double r0, double r_max, std::size_t n_inner, std::size_t n_outer,
                           std::span<const double> breakpoints = {}, double r_min = 0.0);
    // Just r_min, the breakpoints and r0: for shooting to the cutoff.
    static RadialGrid shooting(const PotentialModel& potential, double r_min = 0.0);
    static RadialGrid for_potential(const PotentialModel& potential, double r_max,
                                    std::size_t n_inner = 2000, std::size_t n_outer = 400);

    static double default_r_min(double r0) { return 1e-6 * r0; }

    const std::vector<double>& nodes() const noexcept { return m_nodes; }
    std::size_t size() const noexcept { return m_nodes.size(); }
    double r_min() const { return m_nodes.front(); }
    double r_max() const { return m_nodes.back(); }
    double r0() const noexcept { return m_r0; }
    std::size_t r0_index() const noexcept { return m_r0_index; }

    // Integral over [0, r0] (tail_exponent p: f ~ r^p below r_min) or over
    // nodes [from, to].
    cplx integrate_to_r0(std::span<const cplx> f, std::span<const cplx> df,
                         cplx tail_exponent) const;
    cplx integrate_nodes(std::span<const cplx> f, std::span<const cplx> df,
                         std::size_t from, std::size_t to) const;

    bool same_as(const RadialGrid& other) const noexcept { return m_nodes == other.m_nodes; }

  private:
    std::vector<double> m_nodes;
    double m_r0 = 0.0;
    std::size_t m_r0_index = 0;
  };

  enum class Normalization {
    OriginRegular,   // y ~ r^{lambda+1/2} (1 + o(1)) at the origin
    Jost,            // lim e^{ikr} y = 1
    MatchedPhysical, // scaled by the caller (bound states, kernel adjugate form)
  };

  struct RadialSolution {
    RadialGrid grid;
    std::vector<cplx> y;
    std::vector<cplx> dy;
    Normalization normalization = Normalization::OriginRegular;
    ChannelParams channel;
    cplx k2 = 0.0;
    cplx k = 0.0;       // Jost wavenumber (sign matters), else sqrt(k2)
    double mu = 0.0;
    // Relative size of the first dropped Frobenius term at r_min.
    double start_truncation = 0.0;
    // y = alpha y_h + sum_j b_j y_j; alpha = 1 except for the adjugate form,
    // b is empty for local equations.
    cplx homogeneous_coefficient = 1.0;
    std::vector<cplx> kernel_coefficients;

    cplx y_at_r0() const { return y[grid.r0_index()]; }
    cplx dy_at_r0() const { return dy[grid.r0_index()]; }
  };

  struct IntegratorOptions {
    double rtol = 1e-12;
    // Allows -1/2 < Re(lambda) <= 0: the phi(-lambda) branch used by the
    // Wronskian audit.
    bool allow_reflected_branch = false;
    long max_steps = 2'000'000;
  };

  // Origin-regular solution of the local equation (kernel terms ignored).
  RadialSolution integrate_regular(const EffectiveEquation& eq, const RadialGrid& grid,
                                   const IntegratorOptions& opt = {});

  // Jost solution with lim e^{ikr} f = 1 (f ~ e^{-ikr}). Local potentials only.
  // For r >= r0 f is the free outgoing solution
  //   e^{-ikr} sum_m (-i)^m a_m(lambda)/(kr)^m,
  // which is e^{-ikr} exactly for lambda = 1/2. It is obtained by integrating
  // along a complex ray on which f is dominant, then inward along the real axis.
  RadialSolution integrate_jost(const EffectiveEquation& eq, const RadialGrid& grid,
                                cplx k, const IntegratorOptions& opt = {});

  enum class KernelNormalization {
    // y = y_h + sum b_j y_j; degenerate det(Id - mu C M) is an error.
    Origin,
    // y = det(B) y_h + sum (adj(B) mu C c_h)_j y_j, B = Id - mu C M: continuous
    // in E and mu, never degenerate.
    Adjugate,
  };

  // Solves the integro-differential equation with a separable kernel by
  // superposition of the homogeneous regular solution and one particular
  // solution per kernel term. Falls back to integrate_regular without kernel.
  RadialSolution solve_nonlocal(const EffectiveEquation& eq, const RadialGrid& grid,
                                const IntegratorOptions& opt = {},
                                KernelNormalization norm = KernelNormalization::Origin);

  // Kernel moments c_i[y] = \int_0^{r0} g_i(r) r^{(q-1)/2} y(r) dr by grid
  // quadrature.
  std::vector<cplx> kernel_moments(const EffectiveEquation& eq, const RadialSolution& sol);

  // Relative residual of
  //   [y1 y2' - y2 y1']_{r0} + (k2^2 - k1^2) \int_0^{r0} y1 y2 dr = 0,
  // normalized by the larger of the two terms.
  double green_identity_residual(const RadialSolution& y1, const RadialSolution& y2);

  namespace detail {
    // Degeneracy threshold for det(Id - mu C M), relative to the matrix norm.
    inline constexpr double degeneracy_threshold = 1e-12;
  }

}
