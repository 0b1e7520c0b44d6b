// Exercises the shared library through its C header only.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "qws/qws.h"

#include <cmath>
#include <numbers>
#include <string>

TEST_CASE("special functions")
{
  double v = 0;
  CHECK(qws_gamma(0.5, &v) == QWS_OK);
  CHECK(v == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-15));
  CHECK(qws_gamma(-1.0, &v) == QWS_ERR_RANGE);
  CHECK(std::string(qws_last_error()).size() > 0);
  CHECK(qws_gamma(1.0, nullptr) == QWS_ERR_INVALID_ARGUMENT);

  double d = 0, e = 0;
  CHECK(qws_bessel('j', 0.5, 1.0, &v, &d, &e) == QWS_OK);
  CHECK(v == doctest::Approx(std::sqrt(2 / std::numbers::pi) * std::sin(1.0)).epsilon(1e-14));
  CHECK(qws_bessel('q', 0.5, 1.0, &v, nullptr, nullptr) == QWS_ERR_INVALID_ARGUMENT);
  CHECK(qws_log_derivative_exterior(1.5, 0.0, 2.0, &v) == QWS_OK);
  CHECK(v == doctest::Approx(-0.5));
  CHECK(std::string(qws_status_name(QWS_ERR_AMBIGUOUS_CROSSING)) == "AmbiguousCrossing");
}

TEST_CASE("models, phase shifts and bound states")
{
  qws_model* m = nullptr;
  REQUIRE(qws_model_create(1.0, "square_well", 4 * std::numbers::pi * std::numbers::pi, 0.0, &m) == QWS_OK);
  double eta = 0, raw = 0;
  CHECK(qws_phase_shift(m, 3.0, 0.0, 1e-3, 1.0, &eta, &raw) == QWS_OK);
  CHECK(eta == doctest::Approx(2 * std::numbers::pi).epsilon(1e-3));

  double E[4];
  size_t n = 0;
  CHECK(qws_bound_states(m, 3.0, 0.0, 1.0, E, 4, &n) == QWS_OK);
  CHECK(n == 2);
  CHECK(E[0] < E[1]);
  CHECK(qws_bound_states(m, 3.0, 0.0, 1.0, nullptr, 0, &n) == QWS_OK);
  CHECK(n == 2);

  qws_levinson_result lr{};
  CHECK(qws_levinson(m, 3.0, 0.0, 1.0, 1e-2, &lr) == QWS_OK);
  CHECK(lr.status == QWS_LEVINSON_PASS);
  CHECK(lr.n_direct == 2);
  qws_model_destroy(m);

  CHECK(qws_model_create(-1.0, "none", 0, 0, &m) == QWS_ERR_INVALID_ARGUMENT);
  CHECK(m == nullptr);
  CHECK(qws_model_create(1.0, "volcano", 0, 0, &m) == QWS_ERR_INVALID_ARGUMENT);
}

TEST_CASE("kernels through the C API")
{
  qws_model* m = nullptr;
  REQUIRE(qws_model_create(1.0, "none", 0, 0, &m) == QWS_OK);
  CHECK(qws_model_add_kernel(m, "polynomial_bump", 2, 2, 0.0, 1.5) == QWS_ERR_INVALID_ARGUMENT);
  REQUIRE(qws_model_add_kernel(m, "polynomial_bump", 2, 2, 0.0, 1.0) == QWS_OK);
  const double c = -200.0;
  REQUIRE(qws_model_set_coupling(m, &c, 1) == QWS_OK);
  qws_levinson_result lr{};
  CHECK(qws_levinson(m, 3.0, 1.0, 1.0, 1e-2, &lr) == QWS_OK);
  CHECK(lr.status == QWS_LEVINSON_PASS);
  CHECK(lr.n_direct == 1);
  CHECK(lr.n_continuation == 1);
  const double asym[4] = {-1, 2, 3, -1};
  CHECK(qws_model_set_coupling(m, asym, 2) == QWS_ERR_INVALID_ARGUMENT);
  qws_model_destroy(m);
}

TEST_CASE("configs")
{
  qws_config* c = nullptr;
  REQUIRE(qws_config_parse("version = 1\ntask = eval-special\n[special]\nfunction = gamma\nx = 4\n", nullptr, &c) == QWS_OK);
  CHECK(qws_config_diagnostic_count(c) == 0);
  CHECK(std::string(qws_config_task(c)) == "eval-special");
  CHECK(qws_config_set_output(c, nullptr, "yaml", -1) == QWS_ERR_CONFIG);
  qws_config_destroy(c);

  REQUIRE(qws_config_parse("version = 1\ntask = levinson\nbogus = 3\n", nullptr, &c) == QWS_OK);
  CHECK(qws_config_diagnostic_count(c) >= 2);
  CHECK(qws_config_diagnostic(c, 99) == nullptr);
  CHECK(qws_config_run(c, 1) == 2);
  CHECK(std::string(qws_last_run_trailer()).rfind("QWS-STATUS {\"exit\":2", 0) == 0);
  qws_model* m = nullptr;
  CHECK(qws_model_from_config(c, &m) == QWS_ERR_CONFIG);
  qws_config_destroy(c);

  CHECK(qws_config_load("/nonexistent/qws.ini", &c) == QWS_OK);
  CHECK(qws_config_diagnostic_count(c) == 1);
  qws_config_destroy(c);

  REQUIRE(qws_config_parse("version = 1\ntask = bound-states\n[channel]\nq = 3\nl = 0\n[potential]\nr0 = 1\n"
                           "family = square_well\ndepth = 9\n",
                           nullptr, &c) == QWS_OK);
  REQUIRE(qws_model_from_config(c, &m) == QWS_OK);
  double E[2];
  size_t n = 0;
  CHECK(qws_bound_states(m, 3.0, 0.0, 1.0, E, 2, &n) == QWS_OK);
  CHECK(n == 1);
  qws_model_destroy(m);
  qws_config_destroy(c);
}
