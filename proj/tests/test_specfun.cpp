#include "doctest.h"
#include "qws/error.hpp"
#include "qws/specfun.hpp"

#include <cmath>
#include <numbers>
#include <vector>

using namespace qws;
namespace sf = qws::specfun;

namespace {

  constexpr double pi = std::numbers::pi;

  std::vector<double> log_grid(double a, double b, int n)
  {
    std::vector<double> x;
    for (int i = 0; i < n; ++i)
      x.push_back(a * std::pow(b / a, i / double(n - 1)));
    return x;
  }

  // Power series for J_nu, summed until terms stop mattering.
  double j_series(double nu, double x)
  {
    double term = std::pow(x / 2, nu) / std::tgamma(nu + 1);
    double s = term;
    for (int m = 1; m < 200; ++m) {
      term *= -(x * x / 4) / (m * (m + nu));
      s += term;
      if (std::abs(term) < 1e-18 * std::abs(s))
        break;
    }
    return s;
  }

  double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}

TEST_CASE("gamma: closed forms and libstdc++")
{
  CHECK(sf::gamma(0.5) == doctest::Approx(std::sqrt(pi)).epsilon(1e-14));
  CHECK(sf::gamma(5.0) == doctest::Approx(24.0).epsilon(1e-14));
  CHECK(sf::gamma(1.5) == doctest::Approx(std::sqrt(pi) / 2).epsilon(1e-14));
  for (double x = 0.1; x <= 50.0; x += 0.37)
    CHECK(rel(sf::gamma(x), std::tgamma(x)) < 1e-12);
  CHECK(rel(sf::gamma(-1.5), std::tgamma(-1.5)) < 1e-12);
  CHECK_THROWS_AS(sf::gamma(0.0), Error);
  CHECK_THROWS_AS(sf::gamma(-3.0), Error);
}

TEST_CASE("bessel_j: spot values")
{
  CHECK(sf::bessel_j(0.5, pi / 2).value == doctest::Approx(2 / pi).epsilon(1e-13));
  CHECK(sf::bessel_j(0.0, 0.0).value == 1.0);
  CHECK(sf::bessel_j(1.0, 1.0).value == doctest::Approx(j_series(1.0, 1.0)).epsilon(1e-13));
  CHECK(j_series(1.0, 1.0) == doctest::Approx(0.4400505857).epsilon(1e-10));
}

TEST_CASE("bessel_y: spot values")
{
  CHECK(std::abs(sf::bessel_y(0.5, pi / 2).value) < 1e-15);
  CHECK(sf::bessel_y(0.0, 1.0).value == doctest::Approx(0.0882569642).epsilon(1e-10));
  CHECK_THROWS_AS(sf::bessel_y(1.0, 0.0), Error);
}

TEST_CASE("bessel: envelope guard")
{
  CHECK_THROWS_AS(sf::bessel_j(51.0, 1.0), Error);
  CHECK_THROWS_AS(sf::bessel_j(1.0, 2e3), Error);
  CHECK_THROWS_AS(sf::bessel_i_k(-1.0, 1.0), Error);
}

TEST_CASE("bessel: against libstdc++ over the envelope")
{
  const std::vector<double> nus = {0, 0.3, 0.5, 1, 1.5, 2.7, 7.25, 10, 23.5, 50};
  for (double nu : nus)
    for (double x : log_grid(1e-3, 1e3, 37)) {
      CAPTURE(nu);
      CAPTURE(x);
      const double jref = std::cyl_bessel_j(nu, x);
      const auto j = sf::bessel_j(nu, x);
      // Relative to the local oscillation amplitude near zeros.
      const double amp = x > nu ? std::sqrt(2 / (pi * x)) : std::abs(jref);
      if (amp > 1e-290)
        CHECK(std::abs(j.value - jref) <= 1e-10 * amp);
      if (x > 1e-2) {
        const double yref = std::cyl_neumann(nu, x);
        const double ampy = x > nu ? std::sqrt(2 / (pi * x)) : std::abs(yref);
        if (std::isfinite(yref) && ampy < 1e290)
          CHECK(std::abs(sf::bessel_y(nu, x).value - yref) <= 1e-10 * ampy);
      }
      if (x < 600) {
        const double iref = std::cyl_bessel_i(nu, x);
        const double kref = std::cyl_bessel_k(nu, x);
        const auto m = sf::bessel_i_k(nu, x);
        if (iref > 1e-290 && iref < 1e290)
          CHECK(rel(m.i(x), iref) < 1e-10);
        if (kref > 1e-290 && kref < 1e290)
          CHECK(rel(m.k(x), kref) < 1e-10);
      }
    }
}

TEST_CASE("cylinder and modified Wronskians")
{
  for (double nu : {0.0, 0.5, 1.0, 1.5, 2.7, 10.0})
    for (double x : log_grid(1e-3, 1e2, 41)) {
      CAPTURE(nu);
      CAPTURE(x);
      const auto j = sf::bessel_j(nu, x);
      const auto y = sf::bessel_y(nu, x);
      const double w = j.value * y.derivative - j.derivative * y.value;
      CHECK(rel(w, 2 / (pi * x)) < 1e-9);
      const auto m = sf::bessel_i_k(nu, x);
      // Scaled forms: the exponentials cancel in the product.
      const double wm = m.i_scaled * m.kp_scaled - m.ip_scaled * m.k_scaled;
      CHECK(rel(wm, -1 / x) < 1e-9);
    }
}

TEST_CASE("recurrence J_{nu-1} + J_{nu+1} = (2nu/x) J_nu")
{
  for (double nu : {1.0, 1.5, 2.7, 10.0, 20.3})
    for (double x : log_grid(1e-2, 1e2, 31)) {
      const double a = sf::bessel_j(nu - 1, x).value, b = sf::bessel_j(nu + 1, x).value;
      const double c = 2 * nu / x * sf::bessel_j(nu, x).value;
      const double scale = std::max({std::abs(a), std::abs(b), std::abs(c)});
      CHECK(std::abs(a + b - c) <= 1e-9 * scale);
    }
}

TEST_CASE("half-integer closed forms")
{
  for (double x : log_grid(1e-2, 1e2, 25)) {
    const double s = std::sin(x), c = std::cos(x), p = std::sqrt(2 / (pi * x));
    const double j12 = p * s, j32 = p * (s / x - c), j52 = p * ((3 / (x * x) - 1) * s - 3 * c / x);
    const double y12 = -p * c, y32 = -p * (c / x + s);
    const double amp = p;
    CHECK(std::abs(sf::bessel_j(0.5, x).value - j12) <= 1e-12 * amp);
    CHECK(std::abs(sf::bessel_j(1.5, x).value - j32) <= 1e-12 * std::max(amp, std::abs(j32)));
    CHECK(std::abs(sf::bessel_j(2.5, x).value - j52) <= 1e-12 * std::max(amp, std::abs(j52)));
    CHECK(std::abs(sf::bessel_y(0.5, x).value - y12) <= 1e-12 * amp);
    CHECK(std::abs(sf::bessel_y(1.5, x).value - y32) <= 1e-12 * std::max(amp, std::abs(y32)));
    const double k12 = std::sqrt(pi / (2 * x)) * std::exp(-x);
    CHECK(rel(sf::bessel_i_k(0.5, x).k(x), k12) < 1e-12);
    CHECK(rel(sf::bessel_i_k(1.5, x).k(x), k12 * (1 + 1 / x)) < 1e-12);
  }
  CHECK(sf::bessel_i_k(0.5, 1.0).k(1.0) == doctest::Approx(0.4610685044).epsilon(1e-10));
}

TEST_CASE("small-argument laws")
{
  for (double nu : {0.0, 0.5, 1.0, 2.7, 10.0}) {
    const double x = 1e-4;
    CHECK(std::abs(sf::bessel_j(nu, x).value * std::tgamma(nu + 1) * std::pow(2 / x, nu) - 1) < 1e-6);
    CHECK(std::abs(sf::bessel_i_k(nu, x).i(x) * std::tgamma(nu + 1) * std::pow(2 / x, nu) - 1) < 1e-6);
  }
  CHECK(std::abs(sf::bessel_i_k(0.0, 1e-6).i(1e-6) - 1) < 1e-12);
}

TEST_CASE("exterior and interior log derivatives")
{
  CHECK(sf::log_derivative_exterior(1.5, 0.0, 2.0) == -0.5);
  CHECK(sf::log_derivative_free_interior(1.5, 0.0, 2.0) == 1.0);
  for (double kappa : {0.1, 1.0, 7.0})
    CHECK(sf::log_derivative_exterior(0.5, kappa, 1.3) == doctest::Approx(-kappa).epsilon(1e-14));
  CHECK(sf::log_derivative_exterior(2.5, 500.0, 1.0) == doctest::Approx(-500.0).epsilon(1e-2));
  for (double lambda : {0.5, 1.5, 3.5}) {
    CHECK(std::abs(sf::log_derivative_exterior(lambda, 1e-6, 1.0) - (0.5 - lambda)) <= 1e-6);
    CHECK(std::abs(sf::log_derivative_free_interior(lambda, 1e-6, 1.0) - (0.5 + lambda)) <= 1e-6);
  }
}
