#include <doctest.h>

#include <cmath>
#include <random>

#include "aoi/core_model.hpp"
#include "aoi/errors.hpp"
#include "helpers.hpp"

using namespace aoi;
using testutil::component;

TEST_CASE("cost examples") {
  CHECK(cost({22.1, 0, 0}, {1, 0, 0}) == doctest::Approx(22.1));
  CHECK(cost({0, 0, 0}, {0.2, 0.3, 0.5}) == 0.0);
  // 0.5*10 + 0.25*4 + 0.25*2
  CHECK(cost({10, 4, 2}, {0.5, 0.25, 0.25}) == doctest::Approx(6.5));
}

TEST_CASE("cost rejects negative inputs and degenerate weights") {
  CHECK_THROWS_AS(cost({-1, 0, 0}, {1, 0, 0}), ContractViolation);
  CHECK_THROWS_AS(cost({1, 0, 0}, {0, 0, 0}), ContractViolation);
  CHECK_THROWS_AS(cost({1, 0, 0}, {-1, 1, 0}), ContractViolation);
}

TEST_CASE("cost is linear under non-negative scaling") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int i = 0; i < 100; ++i) {
    const OperationalOutcome o{u(rng), u(rng), u(rng)};
    const CostWeights w{u(rng), u(rng), u(rng) + 0.01};
    const double k = u(rng);
    const double scaled = cost({k * o.completion_time, k * o.resource_cost, k * o.risk_score}, w);
    CHECK(scaled == doctest::Approx(k * cost(o, w)).epsilon(1e-12));
  }
}

TEST_CASE("state distance examples") {
  SystemState a{0, {component("x", {0, 0})}};
  SystemState b{0, {component("x", {3, 4})}};
  CHECK(state_distance(a, a) == 0.0);
  CHECK(state_distance(a, b) == doctest::Approx(5.0));
  CHECK(state_distance(b, a) == doctest::Approx(5.0));

  SystemState c{0, {component("p", {0, 0, 0, 0, 0}), component("q", {0, 0, 0, 0, 0})}};
  SystemState d{0, {component("p", {1, 0, 0, 0, 0}), component("q", {1, 0, 0, 0, 0})}};
  CHECK(state_distance(c, d) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("state distance matches components by id") {
  SystemState a{0, {component("p", {1, 0}), component("q", {0, 0})}};
  SystemState b{0, {component("q", {0, 0}), component("p", {1, 0})}};
  CHECK(state_distance(a, b) == 0.0);
}

TEST_CASE("state distance shape errors") {
  SystemState a{0, {component("x", {0, 0})}};
  SystemState b{0, {component("y", {0, 0})}};
  SystemState c{0, {component("x", {0, 0, 0})}};
  SystemState d{0, {component("x", {0, 0}), component("z", {0, 0})}};
  CHECK_THROWS_AS(state_distance(a, b), ShapeError);
  CHECK_THROWS_AS(state_distance(a, c), ShapeError);
  CHECK_THROWS_AS(state_distance(a, d), ShapeError);
}

TEST_CASE("state distance obeys the triangle inequality") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto random_state = [&] {
    SystemState s;
    for (const char* id : {"a", "b", "c"}) {
      std::vector<double> v(5);
      for (auto& x : v) x = u(rng);
      s.components.push_back(component(id, v));
    }
    return s;
  };
  for (int i = 0; i < 500; ++i) {
    const auto x = random_state(), y = random_state(), z = random_state();
    CHECK(state_distance(x, z) <= state_distance(x, y) + state_distance(y, z) + 1e-9);
  }
}

TEST_CASE("system state invariants") {
  SystemState ok{0, {component("a", {0, 0}), component("b", {0, 0})}};
  CHECK_NOTHROW(ok.validate());

  SystemState dup{0, {component("a", {0, 0}), component("a", {0, 0})}};
  CHECK_THROWS_AS(dup.validate(), ContractViolation);

  SystemState ragged{0, {component("a", {0, 0}), component("b", {0})}};
  CHECK_THROWS_AS(ragged.validate(), ShapeError);

  SystemState failed{0, {component("a", {0, 0})}};
  failed.components[0].health = Health::Failed;
  CHECK_THROWS_AS(failed.validate(), ContractViolation);
  failed.components[0].active_faults.push_back({"memory-leak", 0, 10, 0, {0, 0}});
  CHECK_NOTHROW(failed.validate());
}

TEST_CASE("same_ground_truth ignores the clock only") {
  SystemState a{5, {component("a", {0.1, 0.2})}};
  SystemState b = a;
  b.time = 99;
  CHECK(same_ground_truth(a, b));
  b.components[0].state_vector[1] = 0.2000001;
  CHECK_FALSE(same_ground_truth(a, b));
}

TEST_CASE("acyclicity of task graphs") {
  Task a{"a"}, b{"b"}, c{"c"};
  b.depends_on = {"a"};
  c.depends_on = {"b"};
  std::vector<Task> chain{a, b, c};
  CHECK(is_acyclic(chain));
  chain[0].depends_on = {"c"};
  CHECK_FALSE(is_acyclic(chain));
  Task self{"s"};
  self.depends_on = {"s"};
  std::vector<Task> loop{self};
  CHECK_FALSE(is_acyclic(loop));
  // Edges to ids outside the list are ignored.
  Task ext{"e"};
  ext.depends_on = {"elsewhere"};
  std::vector<Task> one{ext};
  CHECK(is_acyclic(one));
}
