#include <catch2/catch_amalgamated.hpp>

#include "martlab/step_function.hpp"

using namespace martlab;

namespace {

Rational pow2(long k) { return k >= 0 ? Rational(mpz_class(1) << k) : Rational(1) / Rational(mpz_class(1) << -k); }

// f_k = 2^-k 1_[k mod h, inf), k = 1..count
std::vector<StepFunction> geometric_family(std::size_t count, long h) {
  std::vector<StepFunction> fs;
  for (long k = 1; k <= static_cast<long>(count); ++k) fs.push_back(StepFunction::indicator(k % h, pow2(-k)));
  return fs;
}

}  // namespace

TEST_CASE("StepFunction evaluation", "[step]") {
  StepFunction f(1, {ratio(1, 2), 2}, {3, -1});
  CHECK(f.value(0) == 1);
  CHECK(f.value(ratio(1, 4)) == 1);
  CHECK(f.value(ratio(1, 2)) == 3);
  CHECK(f.left_limit(ratio(1, 2)) == 1);
  CHECK(f.jump(ratio(1, 2)) == 2);
  CHECK(f.jump(2) == -4);
  CHECK(f.value(100) == -1);
  CHECK(f.left_limit(0) == f.value(0));
  CHECK_FALSE(f.nonnegative());
  CHECK_FALSE(f.increasing());

  StepFunction g = StepFunction::indicator(1, 2) + StepFunction::indicator(0, 1);
  CHECK(g.value(0) == 1);
  CHECK(g.value(1) == 3);
  CHECK(g.increasing());
  CHECK((g - g).value(1) == 0);

  CHECK_THROWS_AS(StepFunction(0, {1, 1}, {1, 2}), ValidationError);
  CHECK_THROWS_AS(StepFunction(0, {0}, {1}), ValidationError);
  CHECK_THROWS_AS(StepFunction(0, {1}, {}), ValidationError);
}

TEST_CASE("step_distances probes breakpoints and midpoints", "[step]") {
  StepFunction f = StepFunction::indicator(1, 1);
  StepFunction g = StepFunction::indicator(2, 1);
  auto d = step_distances(f, g);
  CHECK(d.values == 1);
  CHECK(d.left_limits == 1);
  CHECK(d.jumps == 1);
  CHECK(step_distances(f, f).values == 0);
  // Horizon before the second jump hides it from the value distance.
  CHECK(step_distances(f, g, Rational(1)).values == 1);
  CHECK(step_distances(g, StepFunction(0), ratio(3, 2)).values == 0);
}

TEST_CASE("geometric tail table", "[step]") {
  for (long h : {1L, 3L, 5L}) {
    const std::size_t n_max = 10;
    auto fs = geometric_family(n_max, h);
    auto t = step_sum_table(fs, Rational(h));
    REQUIRE(t.u.size() == n_max + 1);
    for (std::size_t n = 0; n <= n_max; ++n) {
      // u_n = sum_{n<k<=N} 2^-k = 2^-n - 2^-N
      CHECK(t.u[n] == pow2(-static_cast<long>(n)) - pow2(-static_cast<long>(n_max)));
      CHECK(t.tail[n] == t.u[n]);
    }
    // Halving: u_n + 2^-N halves each row.
    for (std::size_t n = 1; n <= n_max; ++n)
      CHECK(2 * (t.u[n] + pow2(-10)) == t.u[n - 1] + pow2(-10));
    CHECK(step_sum_convergence_check(fs, Rational(h)));
  }
}

TEST_CASE("step_sum_convergence_check small cases and errors", "[step]") {
  auto single = step_sum_table({StepFunction::indicator(1, 5)}, 3);
  CHECK(single.u == std::vector<Rational>{5, 0});
  CHECK(step_sum_convergence_check({StepFunction::indicator(1, 5)}, 3));

  std::vector<StepFunction> zeros(4, StepFunction(0));
  for (const auto& u : step_sum_table(zeros, 2).u) CHECK(u == 0);
  CHECK(step_sum_convergence_check(zeros, 2));

  CHECK_THROWS_AS(step_sum_convergence_check({StepFunction(-1)}, 1), PreconditionError);
  CHECK_THROWS_AS(step_sum_convergence_check({StepFunction(1, {1}, {0})}, 1), PreconditionError);
  CHECK_THROWS_AS(step_sum_convergence_check({StepFunction(1)}, -1), PreconditionError);

  // A jump beyond the horizon does not count.
  auto late = step_sum_table({StepFunction::indicator(1, 1), StepFunction::indicator(4, 1)}, 2);
  CHECK(late.u == std::vector<Rational>{1, 0, 0});
}

TEST_CASE("shrinking jumps converge in all three senses", "[step]") {
  StepFunction f(0, {ratio(1, 2), 3}, {1, 2});
  std::vector<StepFunction> fs;
  for (long n = 0; n <= 8; ++n) fs.push_back(f + StepFunction::indicator(1, pow2(-n)));
  auto t = uniform_jump_table(fs, f);
  for (std::size_t n = 0; n < fs.size(); ++n) {
    CHECK(t.rows[n].values == pow2(-static_cast<long>(n)));
    CHECK(t.rows[n].left_limits == pow2(-static_cast<long>(n)));
    CHECK(t.rows[n].jumps == pow2(-static_cast<long>(n)));
  }
  // Distances halve but stay positive: no exact arrival yet.
  CHECK_FALSE(uniform_jump_convergence_check(fs, f));
  fs.push_back(f);
  CHECK(uniform_jump_convergence_check(fs, f));

  std::vector<StepFunction> same(3, f);
  CHECK(uniform_jump_convergence_check(same, f));
  CHECK(uniform_jump_convergence_check({}, f));
}

TEST_CASE("moving jump location fails", "[step]") {
  StepFunction f = StepFunction::indicator(1, 1);
  std::vector<StepFunction> fs;
  for (long n = 1; n <= 8; ++n) fs.push_back(StepFunction::indicator(1 + pow2(-n), 1));
  auto t = uniform_jump_table(fs, f);
  for (const auto& r : t.rows) {
    CHECK(r.values == 1);
    CHECK(r.jumps == 1);
  }
  auto report = uniform_jump_convergence_check(fs, f);
  CHECK_FALSE(report.passed);
  CHECK(report.worst_violation == 1);
  CHECK(report.detail.find("does not reach 0") != std::string::npos);
}

TEST_CASE("finite Fatou", "[step]") {
  auto s = SampleSpace::uniform(4);
  RandomVariable x(s, {1, -1, 1, -1});
  auto sides = fatou_sides({x, -x}, 0);
  CHECK(sides.lhs == 0);
  CHECK(sides.rhs == 1);
  CHECK(tail_sup_fatou_check({x, -x}, 0));

  std::vector<RandomVariable> consts;
  for (int c = 1; c <= 3; ++c) consts.push_back(RandomVariable::constant(s, c));
  auto cs = fatou_sides(consts, 0);
  CHECK(cs.lhs == 3);
  CHECK(cs.rhs == 3);
  CHECK(fatou_sides(consts, 2).lhs == 3);

  auto one = fatou_sides({x}, 0);
  CHECK(one.lhs == one.rhs);
  CHECK_THROWS_AS(fatou_sides({x}, 1), PreconditionError);
}
