// SPDX-License-Identifier: Apache-2.0
#pragma once

// Wronskian and Hermiticity audits, the logarithmic derivative at the cutoff,
// and phase shifts continued in the coupling mu from the free value 0.
//
// Jost convention: f(lambda,k,r) ~ e^{-ikr} as r -> infinity (lim e^{ikr} f = 1).

#include "qws/radial_ode.hpp"

#include <vector>

namespace qws {

  enum class WronskianPair {
    PhiPair,     // phi(lambda) with phi(-lambda): expected -2 lambda
    JostPair,    // f(lambda,k) with f(lambda,-k): expected 2ik
    Self,        // a solution with itself: expected 0
    Generic,     // two solutions of one equation: constancy only
  };

  const char* to_string(WronskianPair p) noexcept;

  struct WronskianReport {
    WronskianPair pair = WronskianPair::Generic;
    std::vector<double> r;
    std::vector<cplx> values;
    cplx expected = 0.0;
    double max_deviation = 0.0;   // max |W(r) - expected|
    double stddev = 0.0;          // spread of W over the grid

    bool passes(double rel_tol) const;
  };

  // W(r) = y1 y2' - y2 y1' on the common grid. The pair is recognized from
  // the normalizations; solutions of different equations are rejected.
  WronskianReport wronskian(const RadialSolution& y1, const RadialSolution& y2);

  enum class HermiticityKind { Phi, Jost };

  // Phi:  max_r |phi(lambda,k,r)^* - phi(lambda^*,k^*,r)|
  // Jost: max_r |f(lambda,k,r)^*   - f(lambda^*,-k^*,r)|
  // relative to max_r |solution|.
  double hermiticity_residual(HermiticityKind kind, cplx lambda, cplx k,
                              const PotentialModel& potential, double mu,
                              const RadialGrid& grid, const IntegratorOptions& opt = {});

  struct LogDerivative {
    double A = 0.0;
    double E = 0.0;
    double mu = 0.0;
    ChannelParams channel;
    double y_r0 = 0.0, dy_r0 = 0.0;   // in the normalization used by the solver
  };

  // A = y'/y at r0 from the interior (local or separable) solution. Throws
  // NodeAtCutoff when |y(r0)| < 1e-12 max |y|.
  LogDerivative log_derivative_interior(const EffectiveEquation& eq,
                                        const IntegratorOptions& opt = {});

  struct PhaseShiftOptions {
    std::size_t mu_steps = 200;
    double min_mu_step = 1e-4;
    IntegratorOptions integrator;
  };

  struct JumpEvent {
    double mu_lo = 0.0, mu_hi = 0.0;
    int direction = 0;   // +1: eta rises by ~pi, -1: falls by ~pi
  };

  struct PhaseShiftPoint {
    double k = 0.0;
    double mu = 0.0;
    double eta_raw = 0.0;        // arctan branch, (-pi/2, pi/2]
    double eta = 0.0;            // continued from eta(k, 0) = 0
    double A = 0.0;              // NaN when y(r0) = 0
    double tan_eta_matching = 0.0;   // tan eta from the cutoff matching formula
    double tan_eta_fit = 0.0;        // two-node exterior fit
    double tan_eta_low_k = 0.0;      // low-k asymptotic; NaN when k r0 >= 0.1
    double method_gap = 0.0;     // |matching angle - fit angle| mod pi
    std::vector<JumpEvent> jumps;
  };

  struct MuSample {
    double mu = 0.0;
    double eta = 0.0;
  };

  struct PhaseShiftResult {
    PhaseShiftPoint point;
    std::vector<MuSample> path;  // continuation path including refinements
  };

  PhaseShiftResult phase_shift(const ChannelParams& channel, const PotentialModel& potential,
                               double k, double mu, const PhaseShiftOptions& opt = {});

  struct PhaseShiftCurve {
    ChannelParams channel;
    double mu = 0.0;
    std::vector<PhaseShiftPoint> samples;
  };

  // Independent k points; evaluated on `threads` workers, ordered as ks.
  PhaseShiftCurve phase_shift_curve(const ChannelParams& channel, const PotentialModel& potential,
                                    const std::vector<double>& ks, double mu,
                                    const PhaseShiftOptions& opt = {}, unsigned threads = 1);

  // Low-k estimate
  //   tan eta ~ -pi (k r0)^{2 lambda} / (2^{2 lambda} lambda Gamma(lambda)^2)
  //             * (A0 - rho~) / (A0 - rho),
  // rho = (1/2 - lambda)/r0, rho~ = (lambda + 1/2)/r0. Requires k r0 < 0.1;
  // throws NearThreshold when |A0 - rho| < 1e-10.
  double low_k_phase_asymptotic(const ChannelParams& channel, const LogDerivative& A0,
                                double k, double r0);

  // Threshold log-derivative values.
  double rho_threshold(double lambda, double r0);        // (1/2 - lambda)/r0
  double rho_tilde_threshold(double lambda, double r0);  // (lambda + 1/2)/r0

  // Representative of E = 0 used for threshold solves: -1e-10 max(1, |V|).
  double threshold_energy(const PotentialModel& potential);

  // Grid with r_min, the breakpoints, r0 and the two exterior fit nodes.
  RadialGrid phase_grid(const PotentialModel& potential);

}
