// SPDX-License-Identifier: Apache-2.0
#pragma once

// Bound states (E < 0), the energy monotonicity of the matching
// log-derivatives, the mu-continuation crossing counter and the check
// eta(0) = n pi.

#include "qws/scattering.hpp"

#include <string>
#include <vector>

namespace qws {

  struct BoundState {
    double E = 0.0;
    double kappa = 0.0;
    double mu = 0.0;
    ChannelParams channel;
    // Normalized so that \int_0^inf y^2 dr = 1 (interior by quadrature,
    // exterior sqrt(r) K_lambda(kappa r) tail by Gauss-Legendre panels).
    RadialSolution solution;
    double matching_residual = 0.0;   // A_int - A_ext at E
    int interior_nodes = 0;
  };

  // A_int(E) - A_ext(E) at r0 for E < 0. Throws NodeAtCutoff when y(r0) = 0.
  double matching_mismatch(const ChannelParams& channel, const PotentialModel& potential,
                           double E, double mu, const IntegratorOptions& opt = {});

  struct BoundStateOptions {
    double E_floor = 0.0;         // 0: -1.5 max|V| - sum |C|
    std::size_t scan_points = 400;
    double tol = 1e-12;           // relative bisection tolerance in E
    int max_refinements = 3;
    IntegratorOptions integrator;
  };

  struct BoundStateSearch {
    std::vector<BoundState> levels;   // increasing E
    double E_floor = 0.0;
    double E_ceiling = 0.0;           // -epsilon_E
    int sturm_count = -1;             // node count at threshold; -1 with kernels
    std::size_t scan_points_used = 0;
    std::vector<std::string> warnings;
  };

  BoundStateSearch find_bound_states(const ChannelParams& channel, const PotentialModel& potential,
                                     double mu, const BoundStateOptions& opt = {});

  struct SturmCheck {
    double E = 0.0, dE = 0.0;
    double slope_interior = 0.0;           // centered difference of A_int
    double slope_exterior = 0.0;           // centered difference of A_ext
    double slope_interior_integral = 0.0;  // -y(r0)^-2 \int_0^r0 y^2
    double slope_exterior_integral = 0.0;  // +y(r0)^-2 \int_r0^inf y^2
    bool signs_ok() const { return slope_interior < 0.0 && slope_exterior > 0.0; }
  };

  // Throws InvalidArgument when y(r0) changes sign inside [E - dE, E + dE].
  SturmCheck sturm_liouville_check(const ChannelParams& channel, const PotentialModel& potential,
                                   double mu, double E, double dE, const IntegratorOptions& opt = {});

  enum class CrossingDirection { Down, Up };

  struct CrossingEvent {
    double mu = 0.0;
    CrossingDirection direction = CrossingDirection::Down;
  };

  struct ContinuationReport {
    ChannelParams channel;
    double E_threshold = 0.0;      // energy representing E = 0
    double rho = 0.0;              // (1/2 - lambda)/r0
    double threshold_value = 0.0;  // exterior log-derivative at E_threshold
    std::vector<double> mu_grid;
    std::vector<double> A;         // A(0, mu); NaN where y(r0) = 0
    std::vector<CrossingEvent> events;
    int n_down = 0, n_up = 0;
    int n = 0;
    std::vector<double> staircase; // pi * (crossings counted so far), per grid point
  };

  struct ContinuationOptions {
    double mu_resolution = 1e-5;
    double grazing_tol = 1e-10;
    IntegratorOptions integrator;
  };

  // mu_grid must start at 0 and increase. Throws AmbiguousCrossing when A
  // touches the threshold without crossing it.
  ContinuationReport continuation_count(const ChannelParams& channel, const PotentialModel& potential,
                                        const std::vector<double>& mu_grid,
                                        const ContinuationOptions& opt = {});

  std::vector<double> default_mu_grid(std::size_t steps = 200, double mu_max = 1.0);

  enum class LevinsonStatus { Pass, Fail, Inconclusive };

  const char* to_string(LevinsonStatus s) noexcept;

  struct LevinsonOptions {
    double tol_eta = 1e-2;
    double mu = 1.0;
    std::size_t mu_steps = 200;
    PhaseShiftOptions phase;
    BoundStateOptions bound;
    ContinuationOptions continuation;
  };

  struct LevinsonReport {
    ChannelParams channel;
    double k1 = 0.0, k2 = 0.0;
    double eta_k1 = 0.0, eta_k2 = 0.0;
    double eta0 = 0.0;                  // extrapolated k -> 0
    int n_direct = 0;
    int n_continuation = 0;
    LevinsonStatus status = LevinsonStatus::Inconclusive;
    std::string message;
    std::vector<MuSample> phase_path;   // eta(k1, mu) along the continuation
    ContinuationReport continuation;
    BoundStateSearch bound_states;
  };

  // Pass iff |eta0 - n_direct pi| <= tol_eta and n_direct = n_continuation.
  // Upstream ambiguous-crossing, near-threshold, degenerate-coupling or
  // unresolved-phase errors give Inconclusive.
  LevinsonReport levinson_verify(const ChannelParams& channel, const PotentialModel& potential,
                                 const LevinsonOptions& opt = {});

}
