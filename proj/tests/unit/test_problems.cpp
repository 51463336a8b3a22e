#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <sstream>

#include "stiffbvp/problems.hpp"
#include "stiffbvp/trapezoidal_solver.hpp"
#include "test_support.hpp"

using namespace stiffbvp;

namespace {

/// Independent oracle for u2(0): shooting integral of the first integral,
///     1 = int_0^1 du / sqrt(s^2 + 2 (cosh(lambda u) - 1)),
/// solved for s by bisection on log s. Suitable for moderate lambda.
double shooting_u20(double lambda) {
  auto travel = [lambda](double s) {
    auto f = [&](double u) { return 1.0 / std::sqrt(s * s + 4 * std::pow(std::sinh(lambda * u / 2), 2)); };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 15, 1e-14);
  };
  double lo = std::log(1e-12), hi = std::log(10.0);
  for (int i = 0; i < 200; ++i) {
    const double mid = (lo + hi) / 2;
    (travel(std::exp(mid)) > 1 ? lo : hi) = mid;
  }
  return std::exp((lo + hi) / 2);
}

}  // namespace

TEST_CASE("troesch rhs and boundary conditions") {
  const auto spec = troesch(1.0);
  CHECK(spec.system.n == 2);
  CHECK(spec.a == 0.0);
  CHECK(spec.b == 1.0);
  const auto f = eval_rhs(spec.system, {0.5, 0.2}, 0.3);
  CHECK(f[0] == 0.2);
  CHECK(f[1] == doctest::Approx(std::sinh(0.5)).epsilon(1e-15));
  const auto g = eval_bc(spec.bc, {0.0, 7.0}, {1.0, 9.0});
  CHECK(g[0] == 0.0);
  CHECK(g[1] == 0.0);
  CHECK(eval_bc(spec.bc, {0.1, 0.0}, {0.5, 0.0})[1] == doctest::Approx(-0.5));
  CHECK_THROWS_AS(troesch(0.0), ConfigError);
  CHECK_THROWS_AS(troesch(-2.0), ConfigError);
}

TEST_CASE("property: the Troesch force is odd in u1") {
  for (int k = 0; k < 1000; ++k) {
    const double lambda = test::uniform(0.1, 20);
    const auto spec = troesch(lambda);
    const double u1 = test::uniform(-2, 2), u2 = test::uniform(-5, 5), t = test::uniform(0, 1);
    const double plus = eval_rhs(spec.system, {u1, u2}, t)[1];
    const double minus = eval_rhs(spec.system, {-u1, u2}, t)[1];
    CHECK(plus == -minus);
  }
}

TEST_CASE("linear verification problem and its oracle") {
  const auto spec = linear_verification<double>();
  const auto e0 = spec.exact(0.0);
  CHECK(e0[0] == 0.0);
  CHECK(e0[1] == 1.0);
  for (double t : {0.1, 0.5, 0.9}) {
    const auto e = spec.exact(t);
    const auto f = eval_rhs(spec.system, e, t);
    // d/dt (sinh, cosh) = (cosh, sinh)
    CHECK(f[0] == doctest::Approx(std::cosh(t)).epsilon(1e-15));
    CHECK(f[1] == doctest::Approx(std::sinh(t)).epsilon(1e-15));
  }
  const auto g = eval_bc(spec.bc, spec.exact(0.0), spec.exact(1.0));
  CHECK(std::abs(g[0]) <= 1e-16);
  CHECK(std::abs(g[1]) <= 1e-16);
}

TEST_CASE("reference lookup") {
  const auto& table = troesch_reference_table();
  const auto e50 = reference_lookup(table, 50);
  REQUIRE(e50);
  REQUIRE(e50->u2_0);
  CHECK(double(e50->u2_0->value) == doctest::Approx(1.542999878e-21).epsilon(1e-12));
  CHECK(e50->u2_0->source == "published");
  CHECK(e50->u2_1->source == "convergence-estimated");
  CHECK(double(reference_lookup(table, 100)->u2_0->value) == doctest::Approx(2.976060781e-43).epsilon(1e-12));
  CHECK(double(reference_lookup(table, 200)->u2_0->value) == doctest::Approx(1.107117221e-86).epsilon(1e-12));
  CHECK(double(reference_lookup(table, 500)->u2_0->value) == doctest::Approx(5.699661125e-217).epsilon(1e-12));
  CHECK(!reference_lookup(table, 49));
  CHECK(!reference_lookup(table, 50.5));
  for (const auto& [lambda, e] : table) {
    if (e.u2_0) CHECK(e.u2_0->value > 0);
    if (e.u2_1) CHECK(e.u2_1->value > 0);
  }
}

TEST_CASE("closed form agrees with the embedded table") {
  for (const auto& [lambda, e] : troesch_reference_table()) {
    CAPTURE(lambda);
    const auto [s0, s1] = troesch_closed_form(lambda);
    if (e.u2_0) CHECK(double(std::abs(s0 - e.u2_0->value) / e.u2_0->value) <= 1e-9);
    if (e.u2_1) CHECK(double(std::abs(s1 - e.u2_1->value) / e.u2_1->value) <= 1e-9);
  }
}

TEST_CASE("closed form agrees with an independent shooting quadrature") {
  for (double lambda : {0.5, 1.0, 3.0, 5.0, 10.0}) {
    CAPTURE(lambda);
    const double s = shooting_u20(lambda);
    const auto [s0, s1] = troesch_closed_form(lambda);
    CHECK(std::abs(double(s0) - s) / s <= 1e-9);
    CHECK(double(s1) == doctest::Approx(std::sqrt(s * s + 4 * std::pow(std::sinh(lambda / 2), 2))).epsilon(1e-9));
  }
  CHECK_THROWS_AS(troesch_closed_form(0.0L), ConfigError);
}

TEST_CASE("troesch_reference prefers the table and falls back to the closed form") {
  const auto hit = troesch_reference(50);
  CHECK(hit.u2_0->source == "published");
  const auto partial = troesch_reference(300);
  CHECK(partial.u2_0->source == "closed-form");
  CHECK(partial.u2_1->source == "convergence-estimated");
  const auto miss = troesch_reference(7);
  CHECK(miss.u2_0->source == "closed-form");
  CHECK(miss.u2_1->source == "closed-form");
}

TEST_CASE("small lambda approaches the linearization lambda / sinh(lambda)") {
  for (double lambda : {0.1, 0.3, 0.5}) {
    CAPTURE(lambda);
    const auto spec = troesch(lambda);
    const auto sol = newton_solve(spec.with_mesh(spec.initial_mesh(100)), NewtonConfig<double>{});
    const double lin = lambda / std::sinh(lambda);
    CHECK(std::abs(sol.mesh.knots.front().u[1] - lin) / lin <= 1e-2);
  }
}

TEST_CASE("reference CSV export") {
  std::ostringstream out;
  write_reference_csv(out, troesch_reference_table());
  const std::string text = out.str();
  CHECK(text.rfind("lambda,u2_0,u2_1,source\n", 0) == 0);
  std::size_t lines = 0;
  for (char c : text) lines += c == '\n';
  CHECK(lines == troesch_reference_table().size() + 1);
  CHECK(text.find("50,1.542999878e-21,") != std::string::npos);
}
