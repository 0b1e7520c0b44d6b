#include "doctest.h"
#include "qws/error.hpp"
#include "qws/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace qws;

namespace {

  constexpr double pi = std::numbers::pi;

  // s-wave square well levels from K cos(K r0) + kappa sin(K r0) = 0,
  // K^2 + kappa^2 = V0. Plain bisection on a fine kappa scan.
  std::vector<double> swell_levels(double V0, double r0)
  {
    auto f = [&](double kappa) {
      const double K = std::sqrt(V0 - kappa * kappa);
      return K * std::cos(K * r0) + kappa * std::sin(K * r0);
    };
    std::vector<double> E;
    const int n = 20000;
    const double top = std::sqrt(V0);
    for (int i = 0; i < n; ++i) {
      double a = top * (i + 0.5) / n, b = top * (i + 1.5) / n;
      if (b >= top)
        break;
      if ((f(a) > 0) == (f(b) > 0))
        continue;
      for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        ((f(a) > 0) == (f(m) > 0) ? a : b) = m;
      }
      E.push_back(-0.25 * (a + b) * (a + b));
    }
    std::sort(E.begin(), E.end());
    return E;
  }

  PotentialModel kernel_model(double C)
  {
    return PotentialModel(1.0).with_kernel({KernelProfile::polynomial_bump(2, 2, 0, 1)}, {C});
  }

}

TEST_CASE("bound states: square well against the transcendental equation")
{
  const double V0 = 4 * pi * pi;
  PotentialModel well(1.0, LocalPotential::square_well(V0));
  auto ch = ChannelParams::make(3.0, 0.0);
  auto s = find_bound_states(ch, well, 1.0);
  auto ref = swell_levels(V0, 1.0);
  REQUIRE(ref.size() == 2);
  REQUIRE(s.levels.size() == 2);
  CHECK(s.sturm_count == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(std::abs(s.levels[i].E - ref[i]) <= 1e-9 * std::abs(ref[i]));
    CHECK(s.levels[i].interior_nodes == static_cast<int>(i));
    CHECK(s.levels[i].kappa == doctest::Approx(std::sqrt(-ref[i])).epsilon(1e-9));
  }
  CHECK(s.warnings.empty());

  CHECK(find_bound_states(ch, well, 0.0).levels.empty());
  PotentialModel shallow(1.0, LocalPotential::square_well(1.0));
  auto none = find_bound_states(ch, shallow, 1.0);
  CHECK(none.levels.empty());
  CHECK(none.sturm_count == 0);
}

TEST_CASE("bound states: degeneracy across q and l")
{
  PotentialModel well(1.0, LocalPotential::gaussian(30.0, 0.6));
  auto a = find_bound_states(ChannelParams::make(5.0, 0.0), well, 1.0);
  auto b = find_bound_states(ChannelParams::make(3.0, 1.0), well, 1.0);
  REQUIRE(a.levels.size() == b.levels.size());
  for (std::size_t i = 0; i < a.levels.size(); ++i)
    CHECK(a.levels[i].E == b.levels[i].E);
}

TEST_CASE("matching mismatch at threshold tends to 2 lambda / r0 for the free problem")
{
  PotentialModel free(1.0);
  for (double l : {0.0, 1.0, 2.0}) {
    auto ch = ChannelParams::make(3.0, l);
    const double lambda = l + 0.5;
    CHECK(std::abs(matching_mismatch(ch, free, -1e-12, 0.0) - 2 * lambda) <= 1e-5);
  }
  CHECK_THROWS_AS(matching_mismatch(ChannelParams::make(3.0, 0.0), free, 0.5, 0.0), Error);
}

TEST_CASE("sturm check: signs and integral forms")
{
  PotentialModel well(1.0, LocalPotential::square_well(20.0));
  for (double l : {0.0, 1.0, 2.0}) {
    auto c = sturm_liouville_check(ChannelParams::make(3.0, l), well, 1.0, -1.0, 1e-4);
    CHECK(c.signs_ok());
    CHECK(std::abs(c.slope_interior - c.slope_interior_integral) <= 1e-2 * std::abs(c.slope_interior_integral));
    CHECK(std::abs(c.slope_exterior - c.slope_exterior_integral) <= 1e-2 * std::abs(c.slope_exterior_integral));
  }
  CHECK_THROWS_AS(sturm_liouville_check(ChannelParams::make(3.0, 0.0), well, 1.0, -1.0, 2.0), Error);
}

TEST_CASE("continuation counts downward crossings")
{
  PotentialModel well(1.0, LocalPotential::square_well(4 * pi * pi));
  auto ch = ChannelParams::make(3.0, 0.0);
  auto rep = continuation_count(ch, well, default_mu_grid());
  CHECK(rep.n_down == 2);
  CHECK(rep.n_up == 0);
  CHECK(rep.n == 2);
  REQUIRE(rep.events.size() == 2);
  CHECK(rep.events[0].mu < rep.events[1].mu);
  CHECK(rep.staircase.back() == doctest::Approx(2 * pi));
  // crossings at V0 mu r0^2 = (pi/2)^2 and (3pi/2)^2 for the s-wave
  CHECK(rep.events[0].mu == doctest::Approx(0.0625).epsilon(1e-3));
  CHECK(rep.events[1].mu == doctest::Approx(0.5625).epsilon(1e-3));

  CHECK_THROWS_AS(continuation_count(ch, well, {0.1, 0.2}), Error);

  PotentialModel shallow(1.0, LocalPotential::square_well(1.0));
  ContinuationOptions strict;
  strict.grazing_tol = 1e3;
  try {
    continuation_count(ch, shallow, default_mu_grid(), strict);
    FAIL("expected an ambiguous crossing");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::AmbiguousCrossing);
  }
}

TEST_CASE("levinson: local wells")
{
  auto ch = ChannelParams::make(3.0, 0.0);
  auto free = levinson_verify(ch, PotentialModel(1.0));
  CHECK(free.status == LevinsonStatus::Pass);
  CHECK(free.n_direct == 0);
  CHECK(free.eta0 == doctest::Approx(0.0));

  auto two = levinson_verify(ch, PotentialModel(1.0, LocalPotential::square_well(4 * pi * pi)));
  CHECK(two.status == LevinsonStatus::Pass);
  CHECK(two.n_direct == 2);
  CHECK(two.n_continuation == 2);
  CHECK(std::abs(two.eta0 - 2 * pi) <= 1e-2);
}

TEST_CASE("levinson: separable kernel")
{
  auto ch = ChannelParams::make(3.0, 1.0);
  auto rep = levinson_verify(ch, kernel_model(-200.0));
  CHECK(rep.status == LevinsonStatus::Pass);
  CHECK(rep.n_direct == 1);
  CHECK(rep.n_continuation == 1);
  CHECK(rep.bound_states.sturm_count == -1);
  CHECK(std::abs(rep.eta0 - pi) <= 1e-2);
}
