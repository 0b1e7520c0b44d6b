#include "doctest.h"
#include "qws/error.hpp"
#include "qws/radial_ode.hpp"

#include <cmath>

using namespace qws;

namespace {

  constexpr cplx I{0.0, 1.0};

  double max_dev_to_r0(const RadialSolution& s, auto&& exact)
  {
    double d = 0.0;
    for (std::size_t i = 0; i < s.grid.size(); ++i)
      d = std::max(d, std::abs(s.y[i] - exact(s.grid.nodes()[i])));
    return d;
  }

}

TEST_CASE("grid: r0 and breakpoints are nodes, quadrature exact for cubics")
{
  const std::vector<double> br = {0.3333, 0.75};
  auto g = RadialGrid::make(1.0, 2.0, 100, 20, br);
  CHECK(g.nodes()[g.r0_index()] == 1.0);
  CHECK(std::binary_search(g.nodes().begin(), g.nodes().end(), 0.3333));
  CHECK(g.r_min() == doctest::Approx(1e-6));
  std::vector<cplx> f, df;
  for (double r : g.nodes()) {
    f.push_back(r * r * r - 2 * r + 1);
    df.push_back(3 * r * r - 2);
  }
  const double a = g.r_min();
  const double exact = 0.25 - 1.0 + 1.0 - (a * a * a * a / 4 - a * a + a);
  CHECK(std::abs(g.integrate_nodes(f, df, 0, g.r0_index()) - exact) < 1e-13);
  // r^2 with the power-law tail below r_min.
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = g.nodes()[i];
    f[i] = r * r;
    df[i] = 2 * r;
  }
  CHECK(std::abs(g.integrate_to_r0(f, df, 2.0) - 1.0 / 3.0) < 1e-14);
  CHECK_THROWS_AS(RadialGrid({0.0, 1.0}, 1.0), Error);
  CHECK_THROWS_AS(RadialGrid({0.5, 0.4, 1.0}, 1.0), Error);
}

TEST_CASE("regular solution: free oracles")
{
  PotentialModel free(1.0);
  auto grid = RadialGrid::make(1.0, 3.0, 200, 100);
  auto s = integrate_regular(effective_equation(ChannelParams::make(3.0, 0.0), free, cplx(1.0), 0.0), grid);
  CHECK(max_dev_to_r0(s, [](double r) { return cplx(std::sin(r)); }) < 1e-10);
  CHECK(s.start_truncation < 1e-11);

  for (double lambda : {0.3, 1.5, 2.7, 6.0}) {
    const double k = 1.7;
    auto ch = ChannelParams::make(2.0 + 2.0 * lambda, 0.0);
    auto sol = integrate_regular(effective_equation(ch, free, cplx(k * k), 1.0), grid);
    const double norm = std::tgamma(lambda + 1) * std::pow(2.0 / k, lambda);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double r = grid.nodes()[i];
      const double ex = norm * std::sqrt(r) * std::cyl_bessel_j(lambda, k * r);
      worst = std::max(worst, std::abs(sol.y[i] - ex) / std::max(std::abs(ex), 1e-300)
                                * (std::abs(ex) > 1e-200 ? 1.0 : 0.0));
    }
    CAPTURE(lambda);
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("regular solution: square well inside is sin(k' r)/k'")
{
  const double V0 = 4.0, k = 0.7, kp = std::sqrt(k * k + V0);
  PotentialModel well(1.0, LocalPotential::square_well(V0));
  auto grid = RadialGrid::for_potential(well, 2.0, 400, 100);
  auto s = integrate_regular(effective_equation(ChannelParams::make(3.0, 0.0), well, cplx(k * k), 1.0), grid);
  double worst = 0.0;
  for (std::size_t i = 0; i <= grid.r0_index(); ++i)
    worst = std::max(worst, std::abs(s.y[i] - std::sin(kp * grid.nodes()[i]) / kp));
  CHECK(worst < 1e-10);
  // Exterior: A sin(kr) + B cos(kr) with matched data.
  const double y0 = std::sin(kp) / kp, d0 = std::cos(kp);
  const double A = y0 * std::sin(k) + d0 * std::cos(k) / k, B = y0 * std::cos(k) - d0 * std::sin(k) / k;
  for (std::size_t i = grid.r0_index(); i < grid.size(); ++i) {
    const double r = grid.nodes()[i];
    CHECK(std::abs(s.y[i] - (A * std::sin(k * r) + B * std::cos(k * r))) < 1e-10);
  }
}

TEST_CASE("regular solution: Re(lambda) <= 0 refused")
{
  PotentialModel free(1.0);
  auto grid = RadialGrid::make(1.0, 1.0, 50, 0);
  auto eq = effective_equation(ChannelParams::make(2.0, 0.0), free, cplx(1.0), 0.0);
  CHECK_THROWS_AS(integrate_regular(eq, grid), Error);
  auto eqm = effective_equation(ChannelParams::make(3.0, 0.0), free, cplx(1.0), 0.0).with_lambda(-0.3);
  CHECK_THROWS_AS(integrate_regular(eqm, grid), Error);
  IntegratorOptions opt;
  opt.allow_reflected_branch = true;
  CHECK_NOTHROW(integrate_regular(eqm, grid, opt));
}

TEST_CASE("Jost solution: free oracles")
{
  PotentialModel free(1.0);
  auto grid = RadialGrid::make(1.0, 4.0, 200, 100);
  for (cplx k : {cplx(1.0), cplx(2.5), cplx(1.0, 0.2), cplx(-1.0, 0.2)}) {
    auto eq = effective_equation(ChannelParams::make(3.0, 0.0), free, k * k, 0.0);
    auto f = integrate_jost(eq, grid, k);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double r = grid.nodes()[i];
      worst = std::max(worst, std::abs(f.y[i] - std::exp(-I * k * r)) / std::abs(std::exp(-I * k * r)));
    }
    CAPTURE(k);
    CHECK(worst < 1e-10);
  }
  // lambda = 3/2: e^{-ikr}(1 - i/(kr)).
  const cplx k = 1.3;
  auto eq = effective_equation(ChannelParams::make(3.0, 1.0), free, k * k, 0.0);
  auto f = integrate_jost(eq, grid, k);
  for (std::size_t i = grid.r0_index(); i < grid.size(); ++i) {
    const double r = grid.nodes()[i];
    CHECK(std::abs(f.y[i] - std::exp(-I * k * r) * (1.0 - I / (k * r))) < 1e-10);
  }
  CHECK_THROWS_AS(integrate_jost(eq, grid, 0.0), Error);
}

TEST_CASE("Jost solution: square well two-region oracle")
{
  const double V0 = 4.0;
  const cplx k = 1.0, kp = std::sqrt(k * k + V0);
  PotentialModel well(1.0, LocalPotential::square_well(V0));
  auto grid = RadialGrid::for_potential(well, 3.0, 400, 100);
  auto f = integrate_jost(effective_equation(ChannelParams::make(3.0, 0.0), well, k * k, 1.0), grid, k);
  // Inside: a sin(k' r) + b cos(k' r) with value and slope of e^{-ikr} at r0 = 1.
  const cplx v = std::exp(-I * k), d = -I * k * v;
  const cplx a = v * std::sin(kp) + d * std::cos(kp) / kp;
  const cplx b = v * std::cos(kp) - d * std::sin(kp) / kp;
  const double r = grid.r_min();
  CHECK(std::abs(f.y[0] - (a * std::sin(kp * r) + b * std::cos(kp * r))) < 1e-10);
  for (std::size_t i = grid.r0_index(); i < grid.size(); ++i)
    CHECK(std::abs(f.y[i] - std::exp(-I * k * grid.nodes()[i])) < 1e-10);
}

TEST_CASE("non-local solve: reduces to local, self-consistent")
{
  auto g = KernelProfile::polynomial_bump(2.0, 2.0, 0.2, 0.8);
  PotentialModel base(1.0, LocalPotential::square_well(1.0));
  auto pk = base.with_kernel({g}, {-8.0});
  auto ch = ChannelParams::make(3.0, 1.0);   // lambda 1.5
  auto grid = RadialGrid::for_potential(pk, 2.0, 400, 50);

  auto zero = base.with_kernel({g}, {0.0});
  auto y0 = solve_nonlocal(effective_equation(ch, zero, cplx(0.8), 1.0), grid);
  auto yl = integrate_regular(effective_equation(ch, base, cplx(0.8), 1.0), grid);
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(std::abs(y0.y[i] - yl.y[i]) <= 1e-12 * std::max(1.0, std::abs(yl.y[i])));

  auto eq = effective_equation(ch, pk, cplx(0.8), 0.9);
  auto y = solve_nonlocal(eq, grid);
  const auto c = kernel_moments(eq, y);
  REQUIRE(y.kernel_coefficients.size() == 1);
  const cplx expect = eq.mu() * pk.coupling(0, 0) * c[0];
  CHECK(std::abs(y.kernel_coefficients[0] - expect) <= 1e-8 * std::abs(expect));

  // Adjugate form is the origin form times det B.
  auto ya = solve_nonlocal(eq, grid, {}, KernelNormalization::Adjugate);
  const cplx alpha = ya.homogeneous_coefficient;
  for (std::size_t i = 0; i < grid.size(); i += 37)
    CHECK(std::abs(ya.y[i] - alpha * y.y[i]) <= 1e-12 * std::max(1.0, std::abs(ya.y[i])));

  auto mu0 = solve_nonlocal(effective_equation(ch, pk, cplx(0.8), 0.0),
                            grid);
  auto free = integrate_regular(effective_equation(ch, PotentialModel(1.0), cplx(0.8), 0.0), grid);
  for (std::size_t i = 0; i < grid.size(); i += 29)
    CHECK(std::abs(mu0.y[i] - free.y[i]) <= 1e-12 * std::max(1.0, std::abs(free.y[i])));
}

TEST_CASE("non-local solve: rank-2 superposition solves the integro-differential equation")
{
  auto g1 = KernelProfile::gaussian_bump(0.35, 0.15, 0.05, 0.7);
  auto g2 = KernelProfile::polynomial_bump(1.0, 3.0, 0.3, 0.95);
  PotentialModel p = PotentialModel(1.0, LocalPotential::gaussian(2.0, 0.5))
                       .with_kernel_matrix({g1, g2}, {-4.0, 1.5, 1.5, -2.0});
  auto ch = ChannelParams::make(4.0, 0.0);
  auto grid = RadialGrid::for_potential(p, 1.5, 800, 50);
  auto eq = effective_equation(ch, p, cplx(2.0), 1.0);
  auto y = solve_nonlocal(eq, grid);
  const auto c = kernel_moments(eq, y);
  for (std::size_t i = 0; i < 2; ++i) {
    cplx expect = 0.0;
    for (std::size_t j = 0; j < 2; ++j)
      expect += p.coupling(i, j) * c[j];
    CHECK(std::abs(y.kernel_coefficients[i] - expect) <= 1e-8 * std::abs(expect));
  }
  // Beyond r0 the free equation holds: second differences at exterior nodes.
  const auto& r = grid.nodes();
  for (std::size_t i = grid.r0_index() + 2; i + 1 < grid.size(); i += 7) {
    const double h = r[i + 1] - r[i];
    const cplx d2 = (y.y[i + 1] - 2.0 * y.y[i] + y.y[i - 1]) / (h * h);
    const cplx res = d2 + (2.0 - 0.75 / (r[i] * r[i])) * y.y[i];
    // O(h^2) differencing error, h = 0.01
    CHECK(std::abs(res) < 1e-4 * std::max(1.0, std::abs(y.y[i])));
  }
}

TEST_CASE("non-local solve: degenerate coupling detected")
{
  // Tune the strength so that det(1 - mu C M) changes sign; at the root the
  // origin form must refuse.
  auto g = KernelProfile::polynomial_bump(2.0, 2.0, 0.1, 0.9);
  auto ch = ChannelParams::make(3.0, 0.0);
  auto detf = [&](double s) {
    auto p = PotentialModel(1.0).with_kernel({g}, {s});
    auto grid = RadialGrid::for_potential(p, 1.0, 200, 0);
    return solve_nonlocal(effective_equation(ch, p, cplx(1.0), 1.0), grid, {}, KernelNormalization::Adjugate)
      .homogeneous_coefficient.real();
  };
  double a = 1.0, b = 1e4;
  REQUIRE(detf(a) * detf(b) < 0.0);
  for (int it = 0; it < 200 && b - a > 1e-13 * b; ++it) {
    const double m = 0.5 * (a + b);
    (detf(m) * detf(a) > 0 ? a : b) = m;
  }
  auto p = PotentialModel(1.0).with_kernel({g}, {0.5 * (a + b)});
  auto grid = RadialGrid::for_potential(p, 1.0, 200, 0);
  CHECK_THROWS_AS(solve_nonlocal(effective_equation(ch, p, cplx(1.0), 1.0), grid), Error);
}

TEST_CASE("Green identity")
{
  auto g1 = KernelProfile::gaussian_bump(0.35, 0.15, 0.05, 0.7);
  auto g2 = KernelProfile::polynomial_bump(1.0, 3.0, 0.3, 0.95);
  auto ch = ChannelParams::make(3.0, 1.0);
  PotentialModel local(1.0, LocalPotential::square_well(3.0));
  auto grid = RadialGrid::for_potential(local, 1.0, 800, 0);
  auto a = integrate_regular(effective_equation(ch, local, cplx(0.5), 1.0), grid);
  auto b = integrate_regular(effective_equation(ch, local, cplx(2.2), 1.0), grid);
  CHECK(green_identity_residual(a, b) < 1e-9);

  auto sym = PotentialModel(1.0).with_kernel_matrix({g1, g2}, {-6.0, 2.0, 2.0, -3.0});
  auto gs = RadialGrid::for_potential(sym, 1.0, 800, 0);
  auto s1 = solve_nonlocal(effective_equation(ch, sym, cplx(0.5), 1.0), gs);
  auto s2 = solve_nonlocal(effective_equation(ch, sym, cplx(2.2), 1.0), gs);
  CHECK(green_identity_residual(s1, s2) < 1e-8);

  // One-sided coupling between separated bumps breaks the identity.
  auto h1 = KernelProfile::gaussian_bump(0.25, 0.1, 0.05, 0.45);
  auto h2 = KernelProfile::polynomial_bump(2.0, 2.0, 0.55, 0.95);
  auto anti = PotentialModel(1.0).with_unsymmetrized_kernel_for_testing({h1, h2}, {0.0, -300.0, 0.0, 0.0});
  auto ga = RadialGrid::for_potential(anti, 1.0, 800, 0);
  auto t1 = solve_nonlocal(effective_equation(ch, anti, cplx(0.5), 1.0), ga);
  auto t2 = solve_nonlocal(effective_equation(ch, anti, cplx(40.0), 1.0), ga);
  CHECK(green_identity_residual(t1, t2) > 1e-2);

  auto other = RadialGrid::for_potential(local, 1.0, 100, 0);
  auto c = integrate_regular(effective_equation(ch, local, cplx(0.5), 1.0), other);
  CHECK_THROWS_AS(green_identity_residual(a, c), Error);
}
