#include "doctest.h"
#include "qws/error.hpp"
#include "qws/scattering.hpp"
#include "qws/specfun.hpp"

#include <cmath>
#include <numbers>

using namespace qws;

namespace {

  constexpr double pi = std::numbers::pi;
  constexpr cplx I{0.0, 1.0};

  // s-wave square well: eta = arctan((k/k') tan(k' r0)) - k r0, mod pi.
  double swell_eta(double V0, double r0, double k)
  {
    const double kp = std::sqrt(k * k + V0);
    return std::atan(k / kp * std::tan(kp * r0)) - k * r0;
  }

  double mod_pi_gap(double a, double b) { return std::abs(std::remainder(a - b, pi)); }

}

TEST_CASE("wronskian: phi pair, Jost pair, self")
{
  PotentialModel free(1.0);
  auto grid = RadialGrid::make(1.0, 2.0, 200, 50);
  IntegratorOptions opt;
  opt.allow_reflected_branch = true;
  const double lambda = 0.35;
  auto eq = effective_equation(ChannelParams::make(2.0, lambda), free, cplx(1.0), 1.0);
  auto p = integrate_regular(eq, grid);
  auto m = integrate_regular(eq.with_lambda(-lambda), grid, opt);
  auto rep = wronskian(p, m);
  CHECK(rep.pair == WronskianPair::PhiPair);
  CHECK(rep.expected == cplx(-0.7));
  CHECK(rep.passes(1e-8));

  PotentialModel well(1.0, LocalPotential::square_well(3.0));
  auto g2 = RadialGrid::make(1.0, 2.0, 200, 50, well.breakpoints(), 0.05);
  auto eqw = effective_equation(ChannelParams::make(3.0, 0.0), well, cplx(1.0), 1.0);
  auto f = integrate_jost(eqw, g2, 1.0);
  auto fm = integrate_jost(eqw, g2, -1.0);
  auto rj = wronskian(f, fm);
  CHECK(rj.pair == WronskianPair::JostPair);
  CHECK(rj.expected == cplx(0.0, 2.0));
  CHECK(rj.passes(1e-8));

  auto self = wronskian(f, f);
  CHECK(self.pair == WronskianPair::Self);
  CHECK(self.max_deviation == 0.0);

  auto other = integrate_jost(effective_equation(ChannelParams::make(3.0, 0.0), well, cplx(4.0), 1.0), g2, 2.0);
  CHECK_THROWS_AS(wronskian(f, other), Error);
}

TEST_CASE("hermiticity residuals")
{
  PotentialModel well(1.0, LocalPotential::square_well(2.0));
  auto grid = RadialGrid::make(1.0, 2.0, 100, 20, well.breakpoints());
  CHECK(hermiticity_residual(HermiticityKind::Phi, cplx(0.5, 0.3), 1.0, well, 1.0, grid) <= 1e-8);
  CHECK(hermiticity_residual(HermiticityKind::Jost, cplx(1.5, -0.5), cplx(1.0, 0.2), well, 1.0, grid) <= 1e-8);
  PotentialModel free(1.0);
  CHECK(hermiticity_residual(HermiticityKind::Phi, cplx(2.5, 0.5), cplx(0.7, -0.1), free, 1.0, grid) <= 1e-10);
}

TEST_CASE("interior log-derivative")
{
  PotentialModel free(1.0);
  auto ch = ChannelParams::make(3.0, 0.0);
  for (double k : {0.3, 1.1, 2.0}) {
    auto A = log_derivative_interior(effective_equation(ch, free, cplx(k * k), 0.0));
    CHECK(A.A == doctest::Approx(k / std::tan(k)).epsilon(1e-10));
  }
  for (double lambda : {0.5, 1.5, 3.5}) {
    auto chl = ChannelParams::make(2.0, lambda);
    auto A = log_derivative_interior(effective_equation(chl, free, cplx(-1e-12), 0.0));
    CHECK(std::abs(A.A - rho_tilde_threshold(lambda, 1.0)) <= 1e-6);
    auto B = log_derivative_interior(effective_equation(chl, free, cplx(-2.0), 0.0));
    CHECK(B.A == doctest::Approx(specfun::log_derivative_free_interior(lambda, std::sqrt(2.0), 1.0)).epsilon(1e-10));
  }
  // y(r0) = sin(k) = 0 at k = pi.
  CHECK_THROWS_AS(log_derivative_interior(effective_equation(ch, free, cplx(pi * pi), 0.0)), Error);
}

TEST_CASE("phase shift: mu = 0 is zero, square well oracle, degeneracy")
{
  PotentialModel well(1.0, LocalPotential::square_well(4.0));
  auto ch = ChannelParams::make(3.0, 0.0);
  for (double k : {0.2, 1.0, 3.0})
    CHECK(phase_shift(ch, well, k, 0.0).point.eta == 0.0);

  auto r = phase_shift(ch, well, 0.5, 1.0);
  CHECK(mod_pi_gap(r.point.eta, swell_eta(4.0, 1.0, 0.5)) < 1e-9);
  CHECK(r.point.method_gap < 1e-8);
  CHECK(std::abs(r.point.tan_eta_matching - std::tan(r.point.eta)) < 1e-8 * std::max(1.0, std::abs(r.point.tan_eta_matching)));

  auto a = phase_shift(ChannelParams::make(5.0, 0.0), well, 0.7, 1.0).point;
  auto b = phase_shift(ChannelParams::make(3.0, 1.0), well, 0.7, 1.0).point;
  CHECK(a.eta == b.eta);
}

TEST_CASE("phase shift: continuation tracks bound states at low k")
{
  // V0 r0^2 = (2 pi)^2: two s-wave bound states, so eta(k -> 0) -> 2 pi.
  PotentialModel well(1.0, LocalPotential::square_well(4 * pi * pi));
  auto ch = ChannelParams::make(3.0, 0.0);
  auto r = phase_shift(ch, well, 1e-3, 1.0);
  CHECK(std::abs(r.point.eta - 2 * pi) < 1e-2);
  CHECK(r.point.jumps.size() <= 2);
  CHECK(mod_pi_gap(r.point.eta, swell_eta(4 * pi * pi, 1.0, 1e-3)) < 1e-9);

  // p-wave well with one bound state.
  PotentialModel p(1.0, LocalPotential::square_well(16.0));
  auto rp = phase_shift(ChannelParams::make(3.0, 1.0), p, 1e-3, 1.0);
  CHECK(std::abs(rp.point.eta - pi) < 1e-2);
}

TEST_CASE("low-k law")
{
  PotentialModel well(1.0, LocalPotential::square_well(1.0));
  auto ch = ChannelParams::make(3.0, 0.0);
  auto A0 = log_derivative_interior(effective_equation(ch, well, cplx(threshold_energy(well)), 1.0));
  const double t = low_k_phase_asymptotic(ch, A0, 1e-3, 1.0);
  const double full = std::tan(phase_shift(ch, well, 1e-3, 1.0).point.eta);
  CHECK(std::abs(t - full) <= 1e-2 * std::abs(full));

  LogDerivative at_rho_t = A0;
  at_rho_t.A = rho_tilde_threshold(0.5, 1.0);
  CHECK(low_k_phase_asymptotic(ch, at_rho_t, 1e-3, 1.0) == 0.0);
  LogDerivative at_rho = A0;
  at_rho.A = rho_threshold(0.5, 1.0);
  CHECK_THROWS_AS(low_k_phase_asymptotic(ch, at_rho, 1e-3, 1.0), Error);
  CHECK_THROWS_AS(low_k_phase_asymptotic(ch, A0, 0.5, 1.0), Error);
}

TEST_CASE("phase shift curve ordering is independent of threads")
{
  PotentialModel well(1.0, LocalPotential::gaussian(3.0, 0.5));
  auto ch = ChannelParams::make(4.0, 1.0);
  std::vector<double> ks;
  for (int i = 1; i <= 9; ++i)
    ks.push_back(0.4 * i);
  PhaseShiftOptions opt;
  opt.mu_steps = 40;
  auto one = phase_shift_curve(ch, well, ks, 1.0, opt, 1);
  auto many = phase_shift_curve(ch, well, ks, 1.0, opt, 4);
  for (std::size_t i = 0; i < ks.size(); ++i) {
    CHECK(one.samples[i].k == ks[i]);
    CHECK(one.samples[i].eta == many.samples[i].eta);
  }
}
