// SPDX-License-Identifier: Apache-2.0
#include "qws/specfun.hpp"
#include "qws/error.hpp"

#include <array>
#include <cfloat>
#include <cmath>
#include <numbers>
#include <string>

// J/Y and I/K follow Temme's method: the continued fraction CF1 gives the
// ratio f = J'_nu/J_nu (I'_nu/I_nu), downward recurrence brings the order to
// |mu| <= 1/2, where J_mu, Y_mu (I_mu, K_mu) come from Temme's series for small
// x or Steed's complex continued fraction CF2 for larger x. The Wronskian then
// fixes the normalization and Y (K) is recurred upward. One algorithm covers all
// real orders, so integer and near-integer orders need no special branch.

namespace qws::specfun {

  namespace {

    constexpr double pi = std::numbers::pi;
    constexpr double eps = 1e-16;
    constexpr double fpmin = DBL_MIN / eps;
    constexpr int max_iterations = 200000;
    constexpr double temme_cutoff = 2.0;

    // Taylor coefficients of 1/Gamma(1+x) = sum_j c[j] x^j.
    constexpr std::array<double, 26> rgamma_coeff = {
      1.0,
      0.5772156649015328606,
      -0.6558780715202538811,
      -0.0420026350340952355,
      0.1665386113822914895,
      -0.0421977345555443367,
      -0.0096219715278769736,
      0.0072189432466630995,
      -0.0011651675918590651,
      -0.0002152416741149510,
      0.0001280502823881162,
      -0.0000201348547807882,
      -0.0000012504934821427,
      0.0000011330272319817,
      -0.0000002056338416978,
      0.0000000061160951045,
      0.0000000050020076445,
      -0.0000000011812745705,
      0.0000000001043426712,
      0.0000000000077822634,
      -0.0000000000036968056,
      0.0000000000005100370,
      -0.0000000000000205833,
      -0.0000000000000053481,
      0.0000000000000012268,
      -0.0000000000000001181,
    };

    double rgamma1p(double x)
    {
      double s = 0.0;
      for (std::size_t j = rgamma_coeff.size(); j-- > 0;)
        s = s * x + rgamma_coeff[j];
      return s;
    }

    // gam1 = (1/G(1-m) - 1/G(1+m)) / (2m), gam2 = (1/G(1-m) + 1/G(1+m)) / 2
    struct TemmeGammas { double gam1, gam2, gampl, gammi; };

    TemmeGammas temme_gammas(double m)
    {
      double odd = 0.0, even = 0.0;
      const double m2 = m * m;
      // odd part: sum_{j odd} c_j m^{j-1}; even part: sum_{j even} c_j m^j
      for (std::size_t j = rgamma_coeff.size(); j-- > 0;) {
        if (j % 2 == 1)
          odd = odd * m2 + rgamma_coeff[j];
        else
          even = even * m2 + rgamma_coeff[j];
      }
      TemmeGammas g;
      g.gam1 = -odd;
      g.gam2 = even;
      g.gampl = g.gam2 - m * g.gam1;
      g.gammi = g.gam2 + m * g.gam1;
      return g;
    }

    void check_envelope(const char* name, double nu, double x, bool allow_zero)
    {
      if (!std::isfinite(nu) || nu < 0.0 || nu > max_order)
        fail(ErrorCategory::Range, std::string(name) + ": order outside [0, 50]");
      if (!std::isfinite(x) || x > max_argument || x < 0.0
          || (x < min_argument && !(allow_zero && x == 0.0)))
        fail(ErrorCategory::Range, std::string(name) + ": argument outside [1e-6, 1e3]");
    }

    void check_finite(const char* name, double v)
    {
      if (!std::isfinite(v))
        fail(ErrorCategory::Range, std::string(name) + ": result overflows double precision");
      if (v != 0.0 && std::abs(v) < DBL_MIN)
        fail(ErrorCategory::Range, std::string(name) + ": result underflows double precision");
    }

    struct JY { double j, jp, y, yp; int iterations; Method method; };

    // Half-integer order with x >= nu: sin/cos forms and upward recurrence,
    // stable for both J and Y there. Avoids the O(x) CF1 error at large x.
    JY bessel_jy_half(double nu, double x)
    {
      const double p = std::sqrt(2.0 / (pi * x));
      const double s = std::sin(x), c = std::cos(x);
      double jm = p * c, j = p * s;    // J_{-1/2}, J_{1/2}
      double ym = p * s, y = -p * c;   // Y_{-1/2}, Y_{1/2}
      int n = 0;
      for (double m = 0.5; m < nu; m += 1.0, ++n) {
        const double jn = 2.0 * m / x * j - jm;
        const double yn = 2.0 * m / x * y - ym;
        jm = j;
        j = jn;
        ym = y;
        y = yn;
      }
      return JY{j, jm - nu / x * j, y, ym - nu / x * y, n, Method::ClosedForm};
    }

    JY bessel_jy(double nu, double x)
    {
      if (nu - std::floor(nu) == 0.5 && x >= nu)
        return bessel_jy_half(nu, x);
      const int nl = (x < temme_cutoff) ? static_cast<int>(nu + 0.5)
                                        : std::max(0, static_cast<int>(nu - x + 1.5));
      const double xmu = nu - nl;
      const double xmu2 = xmu * xmu;
      const double xi = 1.0 / x;
      const double xi2 = 2.0 * xi;
      const double w = xi2 / pi;

      // CF1 for J'_nu / J_nu.
      int isign = 1;
      double h = nu * xi;
      if (h < fpmin)
        h = fpmin;
      double b = xi2 * nu, d = 0.0, c = h;
      int it = 0;
      for (; it < max_iterations; ++it) {
        b += xi2;
        d = b - d;
        if (std::abs(d) < fpmin)
          d = fpmin;
        c = b - 1.0 / c;
        if (std::abs(c) < fpmin)
          c = fpmin;
        d = 1.0 / d;
        const double del = c * d;
        h *= del;
        if (d < 0.0)
          isign = -isign;
        if (std::abs(del - 1.0) <= eps)
          break;
      }
      if (it >= max_iterations)
        fail(ErrorCategory::Numeric, "bessel J/Y: continued fraction CF1 did not converge");
      int total = it;

      double rjl = isign * fpmin;
      double rjpl = h * rjl;
      const double rjl1 = rjl, rjp1 = rjpl;
      double fact = nu * xi;
      for (int l = nl - 1; l >= 0; --l) {
        const double t = fact * rjl + rjpl;
        fact -= xi;
        rjpl = fact * t - rjl;
        rjl = t;
      }
      if (rjl == 0.0)
        rjl = eps;
      const double f = rjpl / rjl;

      double rjmu, rymu, rymup, ry1;
      Method method;
      if (x < temme_cutoff) {
        method = Method::TemmeSeries;
        const double x2 = 0.5 * x;
        const double pimu = pi * xmu;
        const double fct = std::abs(pimu) < eps ? 1.0 : pimu / std::sin(pimu);
        double dd = -std::log(x2);
        double e = xmu * dd;
        const double fact2 = std::abs(e) < eps ? 1.0 : std::sinh(e) / e;
        const TemmeGammas g = temme_gammas(xmu);
        double ff = 2.0 / pi * fct * (g.gam1 * std::cosh(e) + g.gam2 * fact2 * dd);
        e = std::exp(e);
        double p = e / (g.gampl * pi);
        double q = 1.0 / (e * pi * g.gammi);
        const double pimu2 = 0.5 * pimu;
        const double fact3 = std::abs(pimu2) < eps ? 1.0 : std::sin(pimu2) / pimu2;
        const double r = pi * pimu2 * fact3 * fact3;
        double cc = 1.0;
        dd = -x2 * x2;
        double sum = ff + r * q;
        double sum1 = p;
        int i = 1;
        for (; i < max_iterations; ++i) {
          ff = (i * ff + p + q) / (i * static_cast<double>(i) - xmu2);
          cc *= dd / i;
          p /= (i - xmu);
          q /= (i + xmu);
          const double del = cc * (ff + r * q);
          sum += del;
          const double del1 = cc * p - i * del;
          sum1 += del1;
          if (std::abs(del) < (1.0 + std::abs(sum)) * eps)
            break;
        }
        if (i >= max_iterations)
          fail(ErrorCategory::Numeric, "bessel J/Y: Temme series did not converge");
        total += i;
        rymu = -sum;
        ry1 = -sum1 * xi2;
        rymup = xmu * xi * rymu - ry1;
        rjmu = w / (rymup - f * rymu);
      } else {
        method = Method::SteedContinuedFraction;
        double a = 0.25 - xmu2;
        double p = -0.5 * xi, q = 1.0;
        const double br = 2.0 * x;
        double bi = 2.0;
        double fct = a * xi / (p * p + q * q);
        double cr = br + q * fct, ci = bi + p * fct;
        double den = br * br + bi * bi;
        double dr = br / den, di = -bi / den;
        double dlr = cr * dr - ci * di, dli = cr * di + ci * dr;
        double temp = p * dlr - q * dli;
        q = p * dli + q * dlr;
        p = temp;
        int i = 1;
        for (; i < max_iterations; ++i) {
          a += 2 * i;
          bi += 2.0;
          dr = a * dr + br;
          di = a * di + bi;
          if (std::abs(dr) + std::abs(di) < fpmin)
            dr = fpmin;
          fct = a / (cr * cr + ci * ci);
          cr = br + cr * fct;
          ci = bi - ci * fct;
          if (std::abs(cr) + std::abs(ci) < fpmin)
            cr = fpmin;
          den = dr * dr + di * di;
          dr /= den;
          di /= -den;
          dlr = cr * dr - ci * di;
          dli = cr * di + ci * dr;
          temp = p * dlr - q * dli;
          q = p * dli + q * dlr;
          p = temp;
          if (std::abs(dlr - 1.0) + std::abs(dli) <= eps)
            break;
        }
        if (i >= max_iterations)
          fail(ErrorCategory::Numeric, "bessel J/Y: continued fraction CF2 did not converge");
        total += i;
        const double gam = (p - f) / q;
        rjmu = std::sqrt(w / ((p - f) * gam + q));
        rjmu = std::copysign(rjmu, rjl);
        rymu = rjmu * gam;
        rymup = rymu * (p + q / gam);
        ry1 = xmu * xi * rymu - rymup;
      }

      const double scale = rjmu / rjl;
      JY out;
      out.j = rjl1 * scale;
      out.jp = rjp1 * scale;
      for (int i = 1; i <= nl; ++i) {
        const double t = (xmu + i) * xi2 * ry1 - rymu;
        rymu = ry1;
        ry1 = t;
      }
      out.y = rymu;
      out.yp = nu * xi * rymu - ry1;
      out.iterations = total + nl;
      out.method = method;
      return out;
    }

    struct IK { double i, ip, k, kp; int iterations; Method method; };

    // Scaled: i*e^{x}, k*e^{-x} are the true values.
    IK bessel_ik_scaled(double nu, double x)
    {
      const int nl = static_cast<int>(nu + 0.5);
      const double xmu = nu - nl;
      const double xmu2 = xmu * xmu;
      const double xi = 1.0 / x;
      const double xi2 = 2.0 * xi;

      double h = nu * xi;
      if (h < fpmin)
        h = fpmin;
      double b = xi2 * nu, d = 0.0, c = h;
      int it = 0;
      for (; it < max_iterations; ++it) {
        b += xi2;
        d = 1.0 / (b + d);
        c = b + 1.0 / c;
        const double del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < eps)
          break;
      }
      if (it >= max_iterations)
        fail(ErrorCategory::Numeric, "bessel I/K: continued fraction CF1 did not converge");
      int total = it;

      double ril = fpmin;
      double ripl = h * ril;
      const double ril1 = ril, rip1 = ripl;
      double fact = nu * xi;
      for (int l = nl - 1; l >= 0; --l) {
        const double t = fact * ril + ripl;
        fact -= xi;
        ripl = fact * t + ril;
        ril = t;
      }
      const double f = ripl / ril;

      double rkmu, rk1;
      Method method;
      if (x < temme_cutoff) {
        method = Method::TemmeSeries;
        const double x2 = 0.5 * x;
        const double pimu = pi * xmu;
        const double fct = std::abs(pimu) < eps ? 1.0 : pimu / std::sin(pimu);
        const double dd = -std::log(x2);
        double e = xmu * dd;
        const double fact2 = std::abs(e) < eps ? 1.0 : std::sinh(e) / e;
        const TemmeGammas g = temme_gammas(xmu);
        double ff = fct * (g.gam1 * std::cosh(e) + g.gam2 * fact2 * dd);
        double sum = ff;
        e = std::exp(e);
        double p = 0.5 * e / g.gampl;
        double q = 0.5 / (e * g.gammi);
        double cc = 1.0;
        const double d2 = x2 * x2;
        double sum1 = p;
        int i = 1;
        for (; i < max_iterations; ++i) {
          ff = (i * ff + p + q) / (i * static_cast<double>(i) - xmu2);
          cc *= d2 / i;
          p /= (i - xmu);
          q /= (i + xmu);
          const double del = cc * ff;
          sum += del;
          const double del1 = cc * (p - i * ff);
          sum1 += del1;
          if (std::abs(del) < std::abs(sum) * eps)
            break;
        }
        if (i >= max_iterations)
          fail(ErrorCategory::Numeric, "bessel I/K: Temme series did not converge");
        total += i;
        const double ex = std::exp(x);
        rkmu = sum * ex;
        rk1 = sum1 * xi2 * ex;
      } else {
        method = Method::SteedContinuedFraction;
        double bb = 2.0 * (1.0 + x);
        double dd = 1.0 / bb;
        double hh = dd, delh = dd;
        double q1 = 0.0, q2 = 1.0;
        const double a1 = 0.25 - xmu2;
        double q = a1, cc = a1;
        double a = -a1;
        double s = 1.0 + q * delh;
        int i = 1;
        for (; i < max_iterations; ++i) {
          a -= 2 * i;
          cc = -a * cc / (i + 1.0);
          const double qnew = (q1 - bb * q2) / a;
          q1 = q2;
          q2 = qnew;
          q += cc * qnew;
          bb += 2.0;
          dd = 1.0 / (bb + a * dd);
          delh = (bb * dd - 1.0) * delh;
          hh += delh;
          const double dels = q * delh;
          s += dels;
          if (std::abs(dels / s) < eps)
            break;
        }
        if (i >= max_iterations)
          fail(ErrorCategory::Numeric, "bessel I/K: continued fraction CF2 did not converge");
        total += i;
        hh = a1 * hh;
        rkmu = std::sqrt(pi / (2.0 * x)) / s;
        rk1 = rkmu * (xmu + x + 0.5 - hh) * xi;
      }
      const double rkmup = xmu * xi * rkmu - rk1;
      const double rimu = xi / (f * rkmu - rkmup);
      IK out;
      out.i = (rimu * ril1) / ril;
      out.ip = (rimu * rip1) / ril;
      for (int i = 1; i <= nl; ++i) {
        const double t = (xmu + i) * xi2 * rk1 + rkmu;
        rkmu = rk1;
        rk1 = t;
      }
      out.k = rkmu;
      out.kp = nu * xi * rkmu - rk1;
      out.iterations = total + nl;
      out.method = method;
      return out;
    }

    double error_estimate(int iterations)
    {
      return DBL_EPSILON * (16.0 + 2.0 * std::sqrt(static_cast<double>(iterations)));
    }

  }

  const char* to_string(Method m) noexcept
  {
    switch (m) {
    case Method::ClosedForm: return "closed-form";
    case Method::Series: return "series";
    case Method::TemmeSeries: return "temme-series";
    case Method::SteedContinuedFraction: return "steed-cf";
    }
    return "unknown";
  }

  double gamma(double x)
  {
    if (!std::isfinite(x))
      fail(ErrorCategory::Range, "gamma: non-finite argument");
    if (x <= 0.0 && x == std::floor(x))
      fail(ErrorCategory::Range, "gamma: pole at nonpositive integer");
    if (x < 0.5)
      return pi / (std::sin(pi * x) * gamma(1.0 - x));
    if (x > 171.0)
      fail(ErrorCategory::Range, "gamma: result overflows double precision");
    // Reduce to Gamma(1+t), |t| <= 1/2, then recur upward.
    const double n = std::floor(x + 0.5);
    const double t = x - n;
    double g = 1.0 / rgamma1p(t);          // Gamma(1+t)
    for (double m = 1.0; m < n; m += 1.0)
      g *= (t + m);
    return g;
  }

  Evaluation bessel_j(double nu, double x)
  {
    check_envelope("bessel_j", nu, x, true);
    if (x == 0.0) {
      Evaluation e;
      e.value = nu == 0.0 ? 1.0 : 0.0;
      e.derivative = nu == 1.0 ? 0.5 : (nu == 0.0 || nu > 1.0 ? 0.0 : HUGE_VAL);
      if (!std::isfinite(e.derivative))
        fail(ErrorCategory::Range, "bessel_j: derivative diverges at x = 0 for 0 < nu < 1");
      e.method = Method::Series;
      return e;
    }
    const JY r = bessel_jy(nu, x);
    check_finite("bessel_j", r.j);
    check_finite("bessel_j", r.jp);
    return Evaluation{r.j, r.jp, r.method, error_estimate(r.iterations)};
  }

  Evaluation bessel_y(double nu, double x)
  {
    if (x == 0.0)
      fail(ErrorCategory::Range, "bessel_y: singular at x = 0");
    check_envelope("bessel_y", nu, x, false);
    const JY r = bessel_jy(nu, x);
    check_finite("bessel_y", r.y);
    check_finite("bessel_y", r.yp);
    return Evaluation{r.y, r.yp, r.method, error_estimate(r.iterations)};
  }

  Modified bessel_i_k(double nu, double x)
  {
    if (x == 0.0)
      fail(ErrorCategory::Range, "bessel_i_k: K is singular at x = 0");
    check_envelope("bessel_i_k", nu, x, false);
    const IK r = bessel_ik_scaled(nu, x);
    for (double v : {r.i, r.ip, r.k, r.kp})
      check_finite("bessel_i_k", v);
    Modified m;
    m.i_scaled = r.i;
    m.ip_scaled = r.ip;
    m.k_scaled = r.k;
    m.kp_scaled = r.kp;
    m.method = r.method;
    m.est_error = error_estimate(r.iterations);
    return m;
  }

  namespace {
    double unscale(double v, double logscale, const char* what)
    {
      if (v == 0.0)
        return 0.0;
      const double lg = std::log(std::abs(v)) + logscale;
      if (lg > std::log(DBL_MAX))
        fail(ErrorCategory::Range, std::string(what) + ": overflows double precision");
      if (lg < std::log(DBL_MIN))
        fail(ErrorCategory::Range, std::string(what) + ": underflows double precision");
      return v * std::exp(logscale);
    }
  }

  double Modified::i(double x) const { return unscale(i_scaled, x, "I_nu"); }
  double Modified::ip(double x) const { return unscale(ip_scaled, x, "I'_nu"); }
  double Modified::k(double x) const { return unscale(k_scaled, -x, "K_nu"); }
  double Modified::kp(double x) const { return unscale(kp_scaled, -x, "K'_nu"); }

  double log_derivative_exterior(double lambda, double kappa, double r0)
  {
    if (!(lambda > 0.0) || !(kappa >= 0.0) || !(r0 > 0.0))
      fail(ErrorCategory::InvalidArgument, "log_derivative_exterior needs lambda > 0, kappa >= 0, r0 > 0");
    if (kappa == 0.0)
      return (0.5 - lambda) / r0;
    const double x = kappa * r0;
    if (lambda == 0.5)
      return -kappa;
    if (x > max_argument)
      fail(ErrorCategory::Range, "log_derivative_exterior: kappa*r0 beyond 1e3");
    if (lambda > max_order)
      fail(ErrorCategory::Range, "log_derivative_exterior: order beyond 50");
    // The ratio stays representable below the value envelope.
    const IK m = bessel_ik_scaled(lambda, x);
    if (!std::isfinite(m.kp / m.k))
      fail(ErrorCategory::Range, "log_derivative_exterior: K_lambda overflows");
    return 0.5 / r0 + kappa * m.kp / m.k;
  }

  double log_derivative_free_interior(double lambda, double kappa, double r0)
  {
    if (!(lambda > 0.0) || !(kappa >= 0.0) || !(r0 > 0.0))
      fail(ErrorCategory::InvalidArgument, "log_derivative_free_interior needs lambda > 0, kappa >= 0, r0 > 0");
    if (kappa == 0.0)
      return (lambda + 0.5) / r0;
    const double x = kappa * r0;
    if (x > max_argument)
      fail(ErrorCategory::Range, "log_derivative_free_interior: kappa*r0 beyond 1e3");
    if (lambda > max_order)
      fail(ErrorCategory::Range, "log_derivative_free_interior: order beyond 50");
    const IK m = bessel_ik_scaled(lambda, x);
    if (!std::isfinite(m.ip / m.i) || m.i == 0.0)
      fail(ErrorCategory::Range, "log_derivative_free_interior: I_lambda underflows");
    return 0.5 / r0 + kappa * m.ip / m.i;
  }

}
