// SPDX-License-Identifier: Apache-2.0
#pragma once

// Adaptive Dormand-Prince 5(4) integration of a complex first-order system
// along the straight path r(t) = a + (b - a) t, t in [0, 1].

#include "qws/error.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

namespace qws::detail {

  using cplx = std::complex<double>;

  struct StepControl {
    double rtol = 1e-12;
    // Length used to weigh derivatives in the error scale |u| + min(|r|, ell) |u'|.
    double length_scale = 1.0;
    double initial_dt = 1e-3;   // in units of t
    long max_steps = 2'000'000;
  };

  // rhs(r, u, du) writes du/dr. record(stop_index, r, u) is called at each stop
  // t-value (increasing, in (0, 1]).
  template <class Rhs, class Record>
  long dopri5_path(Rhs&& rhs, cplx a, cplx b, std::vector<cplx>& u,
                   std::span<const double> stops, const StepControl& ctl,
                   Record&& record)
  {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                            a75 = -2187.0 / 6784, a76 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    const std::size_t n = u.size();
    const cplx span_r = b - a;
    std::vector<cplx> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), unew(n);

    auto eval = [&](double t, const std::vector<cplx>& x, std::vector<cplx>& out) {
      rhs(a + span_r * t, std::span<const cplx>(x), std::span<cplx>(out));
    };

    double t = 0.0;
    double dt = std::min(ctl.initial_dt, 1.0);
    long steps = 0;
    eval(t, u, k1);
    std::size_t next_stop = 0;

    while (next_stop < stops.size()) {
      const double target = stops[next_stop];
      bool clipped = false;
      double h = dt;
      if (t + h >= target) {
        h = target - t;
        clipped = true;
      }
      if (h <= 0.0) {
        record(next_stop, a + span_r * t, std::span<const cplx>(u));
        ++next_stop;
        continue;
      }
      if (++steps > ctl.max_steps)
        fail(ErrorCategory::Numeric, "radial integrator: step budget exhausted");
      if (h < 1e-15 * std::max(1.0, std::abs(t)))
        fail(ErrorCategory::Numeric, "radial integrator: step size underflow (stiff equation)");

      const cplx hs = h * span_r;
      for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + hs * (a21 * k1[i]);
      eval(t + c2 * h, tmp, k2);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + hs * (a31 * k1[i] + a32 * k2[i]);
      eval(t + c3 * h, tmp, k3);
      for (std::size_t i = 0; i < n; ++i)
        tmp[i] = u[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      eval(t + c4 * h, tmp, k4);
      for (std::size_t i = 0; i < n; ++i)
        tmp[i] = u[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      eval(t + c5 * h, tmp, k5);
      for (std::size_t i = 0; i < n; ++i)
        tmp[i] = u[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
      eval(t + h, tmp, k6);
      for (std::size_t i = 0; i < n; ++i)
        unew[i] = u[i] + hs * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
      eval(t + h, unew, k7);

      const double r_abs = std::abs(a + span_r * (t + h));
      const double ell = std::min(r_abs, ctl.length_scale);
      double err = 0.0;
      bool finite = true;
      for (std::size_t i = 0; i < n; ++i) {
        const cplx e = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        const double mag = std::max(std::abs(u[i]), std::abs(unew[i]))
                           + ell * std::max(std::abs(k1[i]), std::abs(k7[i]));
        const double sc = ctl.rtol * mag + DBL_MIN;
        const double ae = std::abs(e);
        if (!std::isfinite(ae) || !std::isfinite(mag))
          finite = false;
        else
          err = std::max(err, ae / sc);
      }
      if (!finite) {
        dt = 0.25 * h;
        continue;
      }
      if (err <= 1.0) {
        t = clipped ? target : t + h;
        u.swap(unew);
        k1.swap(k7);
        const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        const double proposed = h * fac;
        // A clipped step does not shrink the running step size.
        dt = clipped ? std::max(dt, proposed) : proposed;
        if (clipped) {
          record(next_stop, a + span_r * t, std::span<const cplx>(u));
          ++next_stop;
        }
      } else {
        dt = h * std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
      }
    }
    return steps;
  }

}
