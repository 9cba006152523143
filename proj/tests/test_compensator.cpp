#include <catch2/catch_amalgamated.hpp>

#include "martlab/compensator.hpp"
#include "martlab/models.hpp"
#include "oracles.hpp"

using namespace martlab;

namespace {

StoppingTime first_down(const TreeModel& tree) {
  ProcessPath downs = signed_walk(tree, 0, 1);
  return StoppingTime::first_time(downs, [](std::size_t, const Rational& v) { return v > 0; });
}

}  // namespace

TEST_CASE("compensator of deterministic increasing A is A - A_0", "[compensator]") {
  auto tree = binary_tree_space(3, Rational(1, 2));
  auto a = ProcessPath::generate(tree.filtration, [](std::size_t k, std::size_t) {
    return Rational(static_cast<long>(k * k + 2));
  });
  CHECK(discrete_compensator(a) == a - ProcessPath::constant(tree.filtration, 2));
}

TEST_CASE("compensator of the up-step counter is k/2", "[compensator]") {
  auto tree = binary_tree_space(3, Rational(1, 2));
  auto a = up_counter(tree);
  auto b = discrete_compensator(a);
  // Oracle: conditional expectations from label prefixes.
  for (std::size_t w = 0; w < 8; ++w) {
    Rational acc = 0;
    for (std::size_t k = 1; k < a.size(); ++k) {
      std::vector<Rational> inc;
      for (std::size_t v = 0; v < 8; ++v) inc.push_back(a.at(k, v) - a.at(k - 1, v));
      acc += oracle::prefix_average(*tree.space, inc, k - 1)[w];
      CHECK(b.at(k, w) == acc);
      CHECK(acc == ratio(static_cast<long>(k), 2));
    }
  }
}

TEST_CASE("compensator of a martingale vanishes", "[compensator]") {
  auto tree = binary_tree_space(3, Rational(1, 3));
  CHECK(discrete_compensator(random_walk(tree, 3)) == ProcessPath::zero(tree.filtration));
}

TEST_CASE("compensator rejects non-adapted input", "[compensator]") {
  auto tree = binary_tree_space(2, Rational(1, 2));
  auto xi = up_counter(tree).terminal();
  auto peeking = ProcessPath::generate(tree.filtration, [&](std::size_t k, std::size_t w) {
    return k == 0 ? Rational(0) : xi[w];
  });
  CHECK_THROWS_AS(discrete_compensator(peeking), PreconditionError);
}

TEST_CASE("single_jump_process", "[compensator]") {
  auto tree = binary_tree_space(2, Rational(1, 2));
  auto one = RandomVariable::constant(tree.space, 1);
  auto last = single_jump_process(StoppingTime::constant(tree.filtration, 2), one);
  for (std::size_t w = 0; w < 4; ++w) {
    CHECK(last.at(0, w) == 0);
    CHECK(last.at(1, w) == 0);
    CHECK(last.at(2, w) == 1);
  }
  // T = first down-step: uu never, ud at 2, du and dd at 1.
  auto jump = single_jump_process(first_down(tree), one);
  const std::vector<std::vector<long>> expected{{0, 0, 0, 0}, {0, 0, 1, 1}, {0, 1, 1, 1}};
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t w = 0; w < 4; ++w) CHECK(jump.at(k, w) == expected[k][w]);
  CHECK(single_jump_process(first_down(tree), RandomVariable::constant(tree.space, 0)) ==
        ProcessPath::zero(tree.filtration));

  CHECK_THROWS_AS(single_jump_process(StoppingTime::constant(tree.filtration, 0), one), PreconditionError);
  CHECK_THROWS_AS(single_jump_process(first_down(tree), RandomVariable::constant(tree.space, -1)),
                  PreconditionError);
  // xi depends on the second flip but T = 1 on {du, dd}.
  RandomVariable peeking(tree.space, {Rational(0), Rational(0), Rational(1), Rational(2)});
  CHECK_THROWS_AS(single_jump_process(first_down(tree), peeking), PreconditionError);
}

TEST_CASE("compensator of the single jump at the first down-step", "[compensator]") {
  auto tree = binary_tree_space(2, Rational(1, 2));
  auto a = single_jump_process(first_down(tree), RandomVariable::constant(tree.space, 1));
  auto b = discrete_compensator(a);
  // dB_1 = 1/2; dB_2 = 1/2 on {first flip up}, 0 otherwise.
  const std::vector<std::vector<Rational>> expected{
      {0, 0, 0, 0}, {Rational(1, 2), Rational(1, 2), Rational(1, 2), Rational(1, 2)}, {1, 1, Rational(1, 2), Rational(1, 2)}};
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t w = 0; w < 4; ++w) CHECK(b.at(k, w) == expected[k][w]);
}

TEST_CASE("compensator_uniqueness_check", "[compensator]") {
  auto tree = binary_tree_space(3, Rational(1, 2));
  auto a = up_counter(tree);
  auto b = discrete_compensator(a);
  CHECK(compensator_uniqueness_check(a, b, b));

  auto drift = ProcessPath::generate(tree.filtration, [](std::size_t k, std::size_t) {
    return ratio(static_cast<long>(k), 3);
  });
  auto report = compensator_uniqueness_check(a, b, b + drift);
  CHECK_FALSE(report.passed);
  CHECK(report.detail.find("precondition") != std::string::npos);
  CHECK(report.worst_violation == Rational(1, 3));

  auto not_null = b + ProcessPath::constant(tree.filtration, 1);
  CHECK_FALSE(compensator_uniqueness_check(a, b, not_null).passed);
}

TEST_CASE("compensator agrees with an independent linear-system construction", "[compensator][property]") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    Xorshift64 rng(seed);
    auto f = random_filtration(rng, {24, 5});
    auto a = random_adapted(rng, f);
    auto b1 = discrete_compensator(a);
    auto b2 = oracle::compensator_by_linear_solve(a);
    CHECK(b1 == b2);
    CHECK(compensator_uniqueness_check(a, b1, b2));
  }
}

TEST_CASE("compensator algebraic laws", "[compensator][property]") {
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    Xorshift64 rng(seed);
    auto f = random_filtration(rng);
    auto a = random_increasing(rng, f);
    auto a2 = random_adapted(rng, f);
    auto b = discrete_compensator(a);
    // Additivity
    CHECK(discrete_compensator(a + a2) == b + discrete_compensator(a2));
    // Positivity
    CHECK(is_increasing(b));
    // Idempotency
    CHECK(discrete_compensator(b) == b);
    // Commutation with stopping
    auto t = random_stopping_time(rng, f, true);
    CHECK(discrete_compensator(stopped_process(a, t)) == stopped_process(b, t));
    // Jordan split recombines
    auto [up, down] = jordan_decomposition(a2);
    CHECK(is_increasing(up));
    CHECK(is_increasing(down));
    CHECK(up - down == a2 - ProcessPath::constant(f, a2.at(0, 0)));
    CHECK(discrete_compensator(up) - discrete_compensator(down) == discrete_compensator(a2));
  }
}

TEST_CASE("L2 bounds for single jumps", "[compensator][property]") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Xorshift64 rng(seed);
    auto f = random_filtration(rng);
    Rational c = rng.small_rational(1, 8);
    auto jump = random_single_jump(rng, f, c);
    auto b = discrete_compensator(jump.process);
    auto m = jump.process - b;
    CHECK(l2_norm_sq(b.terminal()) <= 2 * c * c);
    CHECK(l2_norm_sq(m.terminal()) <= 12 * c * c);
    // E B_N = E A_N <= c
    CHECK(expectation(b.terminal()) == expectation(jump.process.terminal()));
  }
}

TEST_CASE("predictable bracket of the walk", "[compensator]") {
  auto tree = binary_tree_space(3, Rational(1, 3));
  auto m = random_walk(tree, 3);
  // dM is +2 w.p. 1/3 and -1 w.p. 2/3, so E(dM^2) = 4/3 + 2/3 = 2.
  auto qv = ProcessPath::generate(tree.filtration, [&](std::size_t k, std::size_t w) {
    Rational s = 0;
    for (std::size_t i = 1; i <= k; ++i) {
      Rational d = m.at(i, w) - m.at(i - 1, w);
      s += d * d;
    }
    return s;
  });
  auto bracket = predictable_bracket(qv);
  for (std::size_t k = 0; k < bracket.size(); ++k) CHECK(bracket.at(k, 5) == Rational(2 * static_cast<long>(k)));
}
