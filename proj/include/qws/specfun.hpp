// SPDX-License-Identifier: Apache-2.0
#pragma once

// Real-order Bessel functions and Gamma.
//
// Supported envelope: order nu in [0, 50], argument x in [1e-6, 1e3]
// (x = 0 is accepted where the limit is finite). Results that underflow or
// overflow double precision raise ErrorCategory::Range rather than returning
// zeros or infinities.

namespace qws::specfun {

  inline constexpr double max_order = 50.0;
  inline constexpr double min_argument = 1e-6;
  inline constexpr double max_argument = 1e3;

  enum class Method { ClosedForm, Series, TemmeSeries, SteedContinuedFraction };

  const char* to_string(Method m) noexcept;

  struct Evaluation {
    double value = 0.0;
    double derivative = 0.0;
    Method method = Method::ClosedForm;
    double est_error = 0.0;   // estimated relative error of value
  };

  // Gamma(x), x not in {0, -1, -2, ...}.
  double gamma(double x);

  Evaluation bessel_j(double nu, double x);
  Evaluation bessel_y(double nu, double x);

  // Modified Bessel functions with exponential scaling:
  //   I_nu(x) = i_scaled * e^{x},  K_nu(x) = k_scaled * e^{-x}
  // (derivatives scaled the same way).
  struct Modified {
    double i_scaled = 0.0, ip_scaled = 0.0;
    double k_scaled = 0.0, kp_scaled = 0.0;
    Method method = Method::TemmeSeries;
    double est_error = 0.0;

    // Unscaled values; throw ErrorCategory::Range on overflow/underflow.
    double i(double x) const;
    double ip(double x) const;
    double k(double x) const;
    double kp(double x) const;
  };

  Modified bessel_i_k(double nu, double x);

  // d/dr log[ sqrt(r) K_lambda(kappa r) ] at r0, the exterior logarithmic
  // derivative of the decaying solution for E = -kappa^2. At kappa = 0 this is
  // exactly (1/2 - lambda)/r0.
  double log_derivative_exterior(double lambda, double kappa, double r0);

  // d/dr log[ sqrt(r) I_lambda(kappa r) ] at r0 (free regular solution for
  // E = -kappa^2). At kappa = 0 this is exactly (lambda + 1/2)/r0.
  double log_derivative_free_interior(double lambda, double kappa, double r0);

}
