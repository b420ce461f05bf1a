#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cts/core.hpp"
#include "cts/teachers.hpp"

using namespace cts;

TEST_CASE("parameter space validates its box") {
  CHECK_THROWS_AS(ParameterSpace({1.0}, {0.0}), ContractError);
  CHECK_THROWS_AS(ParameterSpace({0.0, 0.0}, {1.0}), ContractError);
  CHECK_THROWS_AS(ParameterSpace({}, {}), ContractError);

  const ParameterSpace s({0.0, 0.0}, {3.0, 6.0});
  CHECK(s.dims() == 2);
  CHECK(s.contains(Vec{1.0, 5.0}));
  CHECK(s.contains(Vec{3.0, 6.0}));
  CHECK_FALSE(s.contains(Vec{3.1, 0.0}));
  CHECK_FALSE(s.contains(Vec{1.0}));
}

TEST_CASE("normalize maps the box onto the unit cube") {
  const ParameterSpace s({0.0, 0.0}, {3.0, 6.0});

  CHECK(normalize(Vec{0.0, 0.0}, s) == Vec{0.0, 0.0});
  CHECK(normalize(Vec{3.0, 6.0}, s) == Vec{1.0, 1.0});
  CHECK(normalize(Vec{1.5, 3.0}, s) == Vec{0.5, 0.5});
  CHECK_THROWS_AS(normalize(Vec{1.0}, s), ContractError);
}

TEST_CASE("denormalize inverts normalize") {
  const ParameterSpace s({0.0, 0.0}, {3.0, 6.0});

  CHECK(denormalize(Vec{1.0, 1.0}, s) == Vec{3.0, 6.0});
  CHECK(denormalize(Vec{0.5, 0.5}, s) == Vec{1.5, 3.0});
  CHECK_THROWS_AS(denormalize(Vec{1.1, 0.0}, s), ContractError);
  CHECK_THROWS_AS(denormalize(Vec{-0.1, 0.0}, s), ContractError);

  const Vec p{2.7, 0.43};
  const Vec round_trip = denormalize(normalize(p, s), s);
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(std::abs(round_trip[i] - p[i]) < 1e-12);
  }
}

TEST_CASE("normalize collapses zero-extent axes to 0") {
  const ParameterSpace s({2.0}, {2.0});
  CHECK(normalize(Vec{2.0}, s) == Vec{0.0});
}

TEST_CASE("clip_to_space clamps component-wise") {
  const ParameterSpace s({0.0, 0.0}, {3.0, 6.0});

  CHECK(clip_to_space(Vec{-0.2, 7.1}, s) == Vec{0.0, 6.0});
  CHECK(clip_to_space(Vec{1.0, -3.0}, s) == Vec{1.0, 0.0});
  CHECK(clip_to_space(Vec{2.0, 4.0}, s) == Vec{2.0, 4.0});
}

TEST_CASE("history is append-only and keeps episode order") {
  History h(2);
  CHECK(h.size() == 0);
  CHECK_THROWS_AS(h.reward(0), ContractError);

  h.append(Vec{0.1, 0.2}, 5.0);
  h.append(Vec{0.3, 0.4}, -1.5);
  CHECK(h.size() == 2);
  CHECK(h.record(0).param == Vec{0.1, 0.2});
  CHECK(h.record(0).reward == 5.0);
  CHECK(h.record(0).episode == 0);
  CHECK(h.record(1).param == Vec{0.3, 0.4});
  CHECK(h.reward(1) == -1.5);
  CHECK_THROWS_AS(h.append(Vec{0.1}, 0.0), ContractError);
  CHECK_THROWS_AS(h.param(2), ContractError);
}

TEST_CASE("run config freezes m and w_p at 1") {
  RunConfig ok{100, 1, 1.0, 7};
  CHECK_NOTHROW(ok.validate());
  CHECK_THROWS_AS((RunConfig{0, 1, 1.0, 7}.validate()), ContractError);
  CHECK_THROWS_AS((RunConfig{100, 2, 1.0, 7}.validate()), ContractError);
  CHECK_THROWS_AS((RunConfig{100, 1, 0.5, 7}.validate()), ContractError);
}

TEST_CASE("teacher contract enforces propose/observe alternation") {
  RandomTeacher t(ParameterSpace({0.0, 0.0}, {3.0, 6.0}), 1);

  CHECK_THROWS_AS(t.observe(Vec{1.0, 1.0}, 0.0), ContractError);  // nothing proposed
  const Vec p = t.propose();
  CHECK(t.space().contains(p));
  CHECK_THROWS_AS(t.propose(), ContractError);  // result still owed
  t.observe(p, 3.0);
  CHECK(t.history().size() == 1);
  CHECK(t.history().reward(0) == 3.0);
  CHECK_NOTHROW(t.propose());

  CHECK_THROWS_AS(t.observe(Vec{1.0}, 0.0), ContractError);                // wrong dims
  CHECK_THROWS_AS(t.observe(Vec{1.0, 1.0}, std::nan("")), ContractError);  // bad reward
}

TEST_CASE("teacher history records every observation in order") {
  RandomTeacher t(ParameterSpace::unit(3), 42);
  for (int i = 0; i < 50; ++i) {
    const Vec p = t.propose();
    t.observe(p, static_cast<double>(i));
  }
  CHECK(t.history().size() == 50);
  for (std::size_t i = 0; i < 50; ++i) {
    CHECK(t.history().reward(i) == static_cast<double>(i));
  }
}
