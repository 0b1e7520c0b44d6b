#include "doctest.h"
#include "qws/error.hpp"
#include "qws/model.hpp"

#include <cmath>
#include <vector>

using namespace qws;

TEST_CASE("lambda_of and centrifugal coefficient")
{
  CHECK(lambda_of(3.0, 0.0) == 0.5);
  CHECK(lambda_of(2.0, 0.0) == 0.0);
  CHECK(lambda_of(5.0, 0.0) == lambda_of(3.0, 1.0));
  CHECK(lambda_of(cplx(3, 1), cplx(0, 2)) == cplx(0.5, 2.5));
  CHECK(centrifugal_coefficient(0.5) == 0.0);
  CHECK(centrifugal_coefficient(1.5) == 2.0);
  CHECK(centrifugal_coefficient(cplx(0.3, 0.7)) == centrifugal_coefficient(cplx(-0.3, -0.7)));
  for (int q = 2; q <= 8; ++q)
    for (int l = 0; l <= 5; ++l) {
      const double direct = l * (l + q - 2.0) + (q * q - 4.0 * q + 3.0) / 4.0;
      CHECK(std::abs(centrifugal_coefficient(lambda_of(double(q), double(l))) - direct) <= 1e-13);
    }
}

TEST_CASE("reduce / unreduce")
{
  const std::vector<double> r = {1e-3, 0.1, 0.7, 2.0, 13.0};
  const std::vector<cplx> psi = {cplx(1, 2), 3.0, cplx(-0.5, 0.1), 7.0, cplx(0, 1)};
  auto y1 = reduce_wavefunction(r, psi, 1.0);
  for (std::size_t i = 0; i < r.size(); ++i)
    CHECK(y1[i] == psi[i]);
  auto y3 = reduce_wavefunction(r, psi, 3.0);
  auto y2 = reduce_wavefunction(r, psi, 2.0);
  for (std::size_t i = 0; i < r.size(); ++i) {
    CHECK(std::abs(y3[i] - r[i] * psi[i]) <= 1e-15 * std::abs(y3[i]));
    CHECK(std::abs(y2[i] - std::sqrt(r[i]) * psi[i]) <= 1e-15 * std::abs(y2[i]));
  }
  for (double q : {1.0, 2.0, 3.0, 4.5, 7.0}) {
    auto back = unreduce_wavefunction(r, reduce_wavefunction(r, psi, q), q);
    for (std::size_t i = 0; i < r.size(); ++i)
      CHECK(std::abs(back[i] - psi[i]) <= 1e-14 * std::abs(psi[i]));
  }
  const std::vector<double> bad = {0.0, 1.0};
  const std::vector<cplx> two = {1.0, 1.0};
  CHECK_THROWS_AS(reduce_wavefunction(bad, two, 3.0), Error);
}

TEST_CASE("energy values")
{
  auto e = EnergyValue::from_energy(4.0);
  CHECK(e.k == 2.0);
  auto b = EnergyValue::from_energy(-9.0);
  CHECK(b.k == 3.0);
  CHECK(b.bound_side());
}

TEST_CASE("effective equation coefficients")
{
  PotentialModel free(1.0);
  auto eq = effective_equation(ChannelParams::make(3.0, 0.0), free, cplx(1.0), 1.0);
  for (double r : {0.1, 0.5, 3.0})
    CHECK(eq.Q(r) == cplx(1.0));
  auto eq2 = effective_equation(ChannelParams::make(5.0, 0.0), free, cplx(4.0), 1.0);
  CHECK(eq2.Q(1.0) == cplx(2.0));

  PotentialModel well(1.0, LocalPotential::square_well(4.0));
  auto a = effective_equation(ChannelParams::make(5.0, 0.0), well, cplx(0.3), 0.7);
  auto b = effective_equation(ChannelParams::make(3.0, 1.0), well, cplx(0.3), 0.7);
  for (double r : {0.01, 0.5, 0.999, 1.5})
    CHECK(a.Q(r) == b.Q(r));
  auto neg = a.with_lambda(-a.lambda());
  CHECK(neg.Q(0.3) == a.Q(0.3));

  auto mu0 = effective_equation(ChannelParams::make(3.0, 0.0), well, cplx(1.0), 0.0);
  CHECK(mu0.Q(0.5) == cplx(1.0));
  CHECK_FALSE(mu0.has_kernel_source());
}

TEST_CASE("potential families vanish beyond r0")
{
  const std::vector<LocalPotential> fams = {
    LocalPotential::square_well(3.0), LocalPotential::exponential(2.0, 0.5),
    LocalPotential::gaussian(1.0, 0.4), LocalPotential::tabulated({0.1, 0.5, 1.0}, {-1.0, -2.0, -0.5})};
  for (const auto& f : fams) {
    PotentialModel p(1.0, f);
    for (double r : {1.0, 1.0001, 2.0, 50.0})
      CHECK(p.V(r) == 0.0);
    CHECK(p.V(0.5) < 0.0);
  }
  PotentialModel w(1.0, LocalPotential::square_well(3.0));
  CHECK(w.V(0.3) == -3.0);
}

TEST_CASE("kernel: symmetry, support, half-bound guard")
{
  auto g = KernelProfile::polynomial_bump(2.0, 2.0, 0.2, 0.8);
  CHECK(g(0.5) == doctest::Approx(1.0));
  CHECK(g(0.1) == 0.0);
  CHECK(g(0.9) == 0.0);
  PotentialModel p(1.0);
  auto k = p.with_kernel({g, KernelProfile::gaussian_bump(0.4, 0.2, 0.0, 1.0)}, {-3.0, -1.0});
  CHECK(k.U(0.3, 0.6) == k.U(0.6, 0.3));
  CHECK(k.U(1.2, 0.5) == 0.0);
  CHECK_THROWS_AS(p.with_kernel_matrix({g, g}, {1.0, 2.0, 0.5, 1.0}), Error);
  CHECK_THROWS_AS(p.with_kernel({KernelProfile::gaussian_bump(0.5, 0.2, 0.0, 1.5)}, {1.0}), Error);
  CHECK_THROWS_AS(effective_equation(ChannelParams::make(2.0, 0.0), k, cplx(1.0), 1.0), Error);
  auto eq = effective_equation(ChannelParams::make(4.0, 0.0), k, cplx(1.0), 1.0);
  CHECK(eq.has_kernel_source());
  CHECK(eq.kernel_weight(4.0) == doctest::Approx(8.0));
}
