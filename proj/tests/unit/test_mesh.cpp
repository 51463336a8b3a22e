#include <doctest.h>

#include <cmath>

#include "stiffbvp/mesh.hpp"
#include "stiffbvp/problems.hpp"
#include "test_support.hpp"

using namespace stiffbvp;

namespace {

EndpointValues<double> troesch_ends() { return {2, 0, 0.0, 1.0, {1}}; }

/// u' = (c t, 0): the rhs jump across an interval of step h is c h.
OdeSystem<double> ramp(double c) {
  OdeSystem<double> s;
  s.n = 2;
  s.rhs = [c](const Vector<double>&, const double& t, const ParamMap<double>&) { return Vector<double>{c * t, 0.0}; };
  return s;
}

EvolvingMesh<double> from_abscissae(const std::vector<double>& ts) {
  EvolvingMesh<double> m;
  for (double t : ts) m.knots.push_back({{t, 2 * t}, t});
  m.transforms.assign(ts.size() - 1, Transform::identity());
  return m;
}

bool same_mesh(const EvolvingMesh<double>& a, const EvolvingMesh<double>& b) {
  return a.knots == b.knots && a.transforms == b.transforms;
}

}  // namespace

TEST_CASE("init_linear examples") {
  const auto m = init_linear(0.0, 1.0, 4, troesch_ends());
  REQUIRE(m.size() == 5);
  CHECK(m.intervals() == 4);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(m.knots[i].t == doctest::Approx(0.25 * double(i)));
    CHECK(m.knots[i].u[0] == doctest::Approx(0.25 * double(i)));
    CHECK(m.knots[i].u[1] == 1.0);
  }
  CHECK(m.knots.front().t == 0.0);
  CHECK(m.knots.back().t == 1.0);
  CHECK(m.knots.back().u[0] == 1.0);
  for (const auto& t : m.transforms) CHECK(t.is_identity());

  CHECK(init_linear(0.0, 1.0, 2, troesch_ends()).size() == 3);

  const auto flat = init_linear(0.0, 2.0, 5, EndpointValues<double>{2, 0, 0.7, 0.7, {1}});
  for (const auto& k : flat.knots) {
    CHECK(k.u[0] == doctest::Approx(0.7));
    CHECK(k.u[1] == 0.0);
  }

  CHECK_THROWS_AS(init_linear(0.0, 1.0, 1, troesch_ends()), ConfigError);
  CHECK_THROWS_AS(init_linear(0.0, 1.0, 0, troesch_ends()), ConfigError);
  CHECK_THROWS_AS(init_linear(1.0, 0.0, 4, troesch_ends()), ConfigError);
}

TEST_CASE("natural abscissa follows the swap") {
  const Knot<double> k{{0.3, 5.0}, 0.8};
  CHECK(natural_abscissa(Transform::identity(), k) == 0.8);
  CHECK(natural_abscissa(parse_transform("SP1.FP2"), k) == 0.3);
  CHECK(natural_abscissa(parse_transform("SP2"), k) == 5.0);
  const Knot<double> r{{0.5, 2.0}, 0.9};
  CHECK(natural_step(parse_transform("SP2"), k, r) == doctest::Approx(3.0));
}

TEST_CASE("normalize reorders, merges and keeps the ends") {
  const auto sorted = normalize(from_abscissae({0, 0.6, 0.4, 1}), 0.0);
  REQUIRE(sorted.size() == 4);
  CHECK(sorted.knots[1].t == 0.4);
  CHECK(sorted.knots[2].t == 0.6);
  CHECK(sorted.knots[1].u[1] == 0.8);

  const auto good = from_abscissae({0, 0.25, 0.5, 1});
  CHECK(same_mesh(normalize(good, 1e-4), good));

  auto dup = from_abscissae({0, 0.5, 0.5, 1});
  dup.knots[2].u[1] = 99;
  const auto merged = normalize(dup, 0.0);
  REQUIRE(merged.size() == 3);
  CHECK(merged.knots[1].u[1] == 1.0);

  // steps below the threshold merge; the last knot always survives
  const auto dense = normalize(from_abscissae({0, 0.5, 0.5001, 0.9999, 1}), 1e-3);
  REQUIRE(dense.size() == 3);
  CHECK(dense.knots.back().t == 1.0);
  CHECK(dense.knots[1].t == 0.5);

  CHECK_THROWS_AS(normalize(from_abscissae({0, 0, 1}), 0.0), MeshError);
  CHECK_THROWS_AS(normalize(from_abscissae({0, 1}), 0.0), MeshError);
}

TEST_CASE("normalize measures closeness in each interval's natural variable") {
  // t steps are large but the swapped variable u1 barely moves
  EvolvingMesh<double> m;
  m.knots = {{{0.0, 1.0}, 0.0}, {{0.5, 1.0}, 0.3}, {{0.5 + 1e-9, 1.0}, 0.6}, {{1.0, 1.0}, 1.0}};
  m.transforms = {Transform::identity(), parse_transform("SP1.FP2"), parse_transform("SP1.FP2")};
  const auto out = normalize(m, 1e-6);
  REQUIRE(out.size() == 3);
  CHECK(out.knots[1].t == 0.3);
  CHECK(out.transforms[1] == parse_transform("SP1.FP2"));
}

TEST_CASE("property: normalize output has strictly increasing t and fixed ends") {
  for (int trial = 0; trial < 200; ++trial) {
    const auto count = static_cast<std::size_t>(test::uniform(4, 40));
    std::vector<double> ts{0.0};
    for (std::size_t i = 1; i + 1 < count; ++i) {
      double t = test::uniform(0, 1);
      if (test::uniform(0, 1) < 0.2) t = ts.back();
      ts.push_back(t);
    }
    ts.push_back(1.0);
    const auto mesh = from_abscissae(ts);
    EvolvingMesh<double> out;
    try {
      out = normalize(mesh, 1e-3);
    } catch (const MeshError&) {
      continue;
    }
    CHECK(out.transforms.size() + 1 == out.size());
    CHECK(out.knots.front().t == 0.0);
    CHECK(out.knots.back().t == 1.0);
    for (std::size_t i = 0; i + 1 < out.size(); ++i) CHECK(out.knots[i].t < out.knots[i + 1].t);
  }
}

TEST_CASE("refine leaves a conforming mesh unchanged") {
  const auto mesh = from_abscissae({0, 0.05, 0.1, 0.2});
  const RefinementConfig<double> cfg{1.0, 0.01, 0.1};
  CHECK(same_mesh(refine(mesh, ramp(1.0), cfg), mesh));
}

TEST_CASE("refine bisection trace on a synthetic rhs") {
  const RefinementConfig<double> cfg{1.0, 0.01, 0.1};
  // jump 5M over 4 h_min: 0.04 -> 0.02 (2.5M) -> 0.01 (1.25M)
  const auto out = refine(from_abscissae({0, 0.04}), ramp(125.0), cfg);
  REQUIRE(out.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(out.knots[i].t == doctest::Approx(0.01 * double(i)));
  for (std::size_t i = 0; i < 5; ++i) CHECK(out.knots[i].u[1] == doctest::Approx(0.02 * double(i)));

  // jump 3M: one bisection suffices
  CHECK(refine(from_abscissae({0, 0.04}), ramp(75.0), cfg).size() == 3);

  // a huge jump stops at the h_min floor
  const auto floor = refine(from_abscissae({0, 0.04}), ramp(1e6), cfg);
  CHECK(floor.size() == 5);

  // steps above h_max are split into equal pieces first
  const auto split = refine(from_abscissae({0, 0.35}), ramp(0.0), cfg);
  REQUIRE(split.size() == 5);
  CHECK(split.knots[1].t == doctest::Approx(0.0875));
}

TEST_CASE("refine uses the transformed rhs and steps") {
  const auto spec = troesch(5.0);
  auto mesh = init_linear(0.0, 1.0, 10, spec.initial);
  for (std::size_t i = 7; i < 10; ++i) mesh.transforms[i] = parse_transform("SP1.FP2");
  const RefinementConfig<double> cfg{0.1, 0.001, 0.05};
  const auto out = refine(mesh, spec.system, cfg);
  std::vector<OdeSystem<double>> systems;
  for (std::size_t i = 0; i < out.intervals(); ++i) {
    const auto& tr = out.transforms[i];
    const auto sys = apply(tr, spec.system);
    const auto& l = out.knots[i];
    const auto& r = out.knots[i + 1];
    const double step = natural_step(tr, l, r);
    CHECK(step <= 0.05 * (1 + 1e-12));
    CHECK(step >= 0.001 * (1 - 1e-12));
    const auto sl = map_state(tr, l.u, l.t), sr = map_state(tr, r.u, r.t);
    const auto fl = eval_rhs(sys, sl.q, sl.tau), fr = eval_rhs(sys, sr.q, sr.tau);
    const double jump = std::max(std::abs(fr[0] - fl[0]), std::abs(fr[1] - fl[1]));
    CHECK((jump < 0.2 || step < 0.002));
  }
}

TEST_CASE("property: refine bounds steps and is idempotent") {
  const RefinementConfig<double> cfg{0.1, 0.01, 0.1};
  for (int trial = 0; trial < 50; ++trial) {
    const double lambda = test::uniform(1, 12);
    const auto spec = troesch(lambda);
    const auto m = static_cast<std::size_t>(test::uniform(2, 9));
    auto mesh = init_linear(0.0, 1.0, m, spec.initial);
    for (auto& k : mesh.knots) k.u[1] = test::uniform(0.5, 3.0);
    const auto once = refine(mesh, spec.system, cfg);
    for (std::size_t i = 0; i < once.intervals(); ++i) {
      const double step = natural_step(once.transforms[i], once.knots[i], once.knots[i + 1]);
      CHECK(step <= cfg.h_max * (1 + 1e-12));
      CHECK(step >= cfg.h_min * (1 - 1e-12));
    }
    CHECK(same_mesh(refine(once, spec.system, cfg), once));
    CHECK(once.knots.front() == mesh.knots.front());
    CHECK(once.knots.back() == mesh.knots.back());
  }
}

TEST_CASE("refine rejects bad configs and enforces the knot cap") {
  const auto mesh = from_abscissae({0, 1});
  CHECK_THROWS_AS(refine(mesh, ramp(1.0), RefinementConfig<double>{0.0, 0.01, 0.1}), ConfigError);
  CHECK_THROWS_AS(refine(mesh, ramp(1.0), RefinementConfig<double>{1.0, 0.0, 0.1}), ConfigError);
  CHECK_THROWS_AS(refine(mesh, ramp(1.0), RefinementConfig<double>{1.0, 0.2, 0.1}), ConfigError);
  RefinementConfig<double> capped{1.0, 1e-4, 1e-3};
  capped.max_knots = 100;
  CHECK_THROWS_AS(refine(mesh, ramp(1.0), capped), RefinementError);
}

TEST_CASE("subdivide splits intervals and copies transforms") {
  auto mesh = from_abscissae({0, 0.5, 1});
  mesh.transforms[1] = parse_transform("SP1.FP2");
  const auto out = subdivide(mesh, 3);
  REQUIRE(out.size() == 7);
  CHECK(out.knots[3] == mesh.knots[1]);
  CHECK(out.knots[6] == mesh.knots[2]);
  CHECK(out.knots[1].t == doctest::Approx(0.5 / 3));
  for (std::size_t i = 0; i < 3; ++i) CHECK(out.transforms[i].is_identity());
  for (std::size_t i = 3; i < 6; ++i) CHECK(out.transforms[i] == parse_transform("SP1.FP2"));
  CHECK(same_mesh(subdivide(mesh, 1), mesh));
  CHECK_THROWS_AS(subdivide(mesh, 0), ConfigError);
}
