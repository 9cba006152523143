#include <catch2/catch_amalgamated.hpp>

#include "martlab/compensator.hpp"
#include "martlab/generators.hpp"
#include "martlab/models.hpp"
#include "oracles.hpp"

using namespace martlab;

TEST_CASE("binary tree spaces", "[models]") {
  auto t1 = binary_tree_space(1, Rational(1, 2));
  CHECK(t1.space->probs() == std::vector<Rational>{Rational(1, 2), Rational(1, 2)});

  auto t2 = binary_tree_space(2, Rational(1, 2));
  CHECK(t2.space->size() == 4);
  for (const auto& p : t2.space->probs()) CHECK(p == ratio(1, 4));
  CHECK(t2.filtration->at(1).blocks() == std::vector<Block>{{0, 1}, {2, 3}});
  CHECK(t2.filtration->at(0).block_count() == 1);
  CHECK(t2.filtration->at(2).block_count() == 4);
  CHECK(t2.space->outcomes() == std::vector<std::string>{"uu", "ud", "du", "dd"});

  auto t3 = binary_tree_space(2, ratio(1, 3));
  CHECK(t3.space->probs() == std::vector<Rational>{ratio(1, 9), ratio(2, 9), ratio(2, 9), ratio(4, 9)});

  CHECK_THROWS_AS(binary_tree_space(0, Rational(1, 2)), ValidationError);
  CHECK_THROWS_AS(binary_tree_space(17, Rational(1, 2)), ValidationError);
  CHECK_THROWS_AS(binary_tree_space(2, 1), ValidationError);
  CHECK_THROWS_AS(binary_tree_space(2, 0), ValidationError);
}

TEST_CASE("random walks", "[models]") {
  auto fair = binary_tree_space(3, Rational(1, 2));
  auto m = random_walk(fair, 1);
  CHECK(m.at(1, 0) == ratio(1, 2));
  CHECK(m.at(1, 7) == ratio(-1, 2));
  CHECK(is_martingale(m));

  auto biased = binary_tree_space(3, ratio(2, 3));
  auto mb = random_walk(biased, 1);
  CHECK(mb.at(1, 0) == ratio(1, 3));
  CHECK(mb.at(1, 7) == ratio(-2, 3));
  CHECK(is_martingale(mb));

  auto zero = random_walk(fair, 0);
  CHECK(zero == ProcessPath::zero(fair.filtration));

  // Cross-check against conditional means by label prefix.
  for (std::size_t k = 1; k <= 3; ++k) {
    auto cond = oracle::prefix_average(*biased.space, mb.row_values(k), k - 1);
    CHECK(cond == mb.row_values(k - 1));
  }
}

TEST_CASE("poisson skeletons", "[models]") {
  auto unit = poisson_skeleton(2, Rational(1, 2), {{1, 1}});
  CHECK(unit.jumps == up_counter(unit.tree));
  for (std::size_t k = 0; k <= 2; ++k) CHECK(unit.compensator.at(k, 0) == ratio(static_cast<long>(k), 2));
  CHECK(discrete_compensator(unit.jumps) == unit.compensator);

  auto none = poisson_skeleton(3, 0, {{1, 1}});
  CHECK(none.jumps == ProcessPath::zero(none.tree.filtration));
  CHECK(none.compensator == ProcessPath::zero(none.tree.filtration));

  auto sure = poisson_skeleton(3, 1, {{2, Rational(1, 2)}, {0, Rational(1, 2)}});
  for (std::size_t k = 0; k <= 3; ++k)
    for (std::size_t w = 0; w < sure.tree.space->size(); ++w) CHECK(sure.compensator.at(k, w) == static_cast<long>(k));
  CHECK(discrete_compensator(sure.jumps) == sure.compensator);
  CHECK(oracle::compensator_by_linear_solve(sure.jumps) == sure.compensator);

  auto mixed = poisson_skeleton(3, ratio(1, 3), {{1, Rational(1, 2)}, {3, Rational(1, 2)}});
  CHECK(discrete_compensator(mixed.jumps) == mixed.compensator);
  CHECK(is_martingale(mixed.jumps - mixed.compensator));

  CHECK_THROWS_AS(poisson_skeleton(2, 2, {{1, 1}}), ValidationError);
  CHECK_THROWS_AS(poisson_skeleton(2, Rational(1, 2), {}), ValidationError);
  CHECK_THROWS_AS(poisson_skeleton(2, Rational(1, 2), {{1, Rational(1, 2)}}), ValidationError);
  CHECK_THROWS_AS(poisson_skeleton(2, Rational(1, 2), {{-1, 1}}), ValidationError);
}

TEST_CASE("xorshift is a fixed stream", "[models]") {
  Xorshift64 a(42), b(42), c(43);
  std::vector<std::uint64_t> sa, sb, sc;
  for (int i = 0; i < 16; ++i) {
    sa.push_back(a.next());
    sb.push_back(b.next());
    sc.push_back(c.next());
  }
  CHECK(sa == sb);
  CHECK(sa != sc);
  Xorshift64 z(0);
  CHECK(z.next() != 0);  // zero seed is remapped
}

TEST_CASE("randomized instances are deterministic and well formed", "[models][property]") {
  auto a = randomized_instance(42), b = randomized_instance(42);
  CHECK(*a.filtration == *b.filtration);
  CHECK(a.martingale == b.martingale);
  CHECK(a.increasing == b.increasing);
  CHECK(a.predictable == b.predictable);
  CHECK(a.adapted == b.adapted);

  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto r = randomized_instance(seed);
    CHECK(r.filtration->space()->size() <= 64);
    CHECK(r.filtration->steps() <= 8);
    CHECK(is_martingale(r.martingale));
    CHECK(is_increasing(r.increasing));
    CHECK(total_variation(r.increasing) == r.increasing - ProcessPath::constant(r.filtration, r.increasing.at(0, 0)));
    CHECK(is_adapted(r.increasing));
    CHECK(is_predictable(r.predictable));
    CHECK(is_adapted(r.adapted));
    for (std::size_t k = 1; k < r.filtration->size(); ++k) CHECK(r.filtration->at(k).refines(r.filtration->at(k - 1)));
  }
  RandomCaps small{4, 2};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto r = randomized_instance(seed, small);
    CHECK(r.filtration->space()->size() <= 4);
    CHECK(r.filtration->steps() <= 2);
  }
  CHECK_THROWS_AS(randomized_instance(1, {65, 2}), ValidationError);
  CHECK_THROWS_AS(randomized_instance(1, {8, 9}), ValidationError);
}

TEST_CASE("random single jumps stay below their bound", "[models][property]") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Xorshift64 rng(seed);
    auto f = random_filtration(rng);
    auto j = random_single_jump(rng, f, 3);
    CHECK(is_adapted(j.process));
    CHECK(is_increasing(j.process));
    for (std::size_t w = 0; w < j.size.size(); ++w) {
      CHECK(j.size[w] >= 0);
      CHECK(j.size[w] <= 3);
    }
  }
}

TEST_CASE("dyadic fixtures", "[models]") {
  for (const char* kind : {"single_jump", "up_counter", "walk", "stopped_walk", "constant"}) {
    auto fx = dyadic_fixture(kind, 4);
    CHECK(fx.filtration->steps() == 16);
    CHECK(fx.filtration->times().back() == 1);
    CHECK(is_adapted(fx.process));
    CHECK(fx.stopping_times.size() == 1);
  }
  CHECK(is_martingale(dyadic_fixture("walk", 3).process));
  CHECK(is_martingale(dyadic_fixture("stopped_walk", 3).process));
  CHECK(is_increasing(dyadic_fixture("single_jump", 3).process));
  CHECK(default_events(6, 3) == std::vector<std::size_t>{16, 32, 48});
  CHECK_THROWS_AS(dyadic_fixture("walk", 1), ValidationError);
  CHECK_THROWS_AS(dyadic_fixture("walk", 11), ValidationError);
  CHECK_THROWS_AS(dyadic_fixture("nope", 3), ValidationError);
}

TEST_CASE("generators declare kinds that hold", "[models]") {
  GeneratorParams p;
  for (const auto& name : generator_names()) {
    auto m = generate_model(name, p);
    CHECK(m.meta["generator"] == name);
    for (const auto& proc : m.processes) {
      INFO(name << " / " << proc.name);
      CHECK(is_adapted(proc.path));
      if (proc.kind == "martingale") CHECK(is_martingale(proc.path));
      if (proc.kind == "increasing") CHECK(is_increasing(proc.path));
      if (proc.kind == "predictable") CHECK(is_predictable(proc.path));
    }
  }
  CHECK_THROWS_AS(generate_model("nope", p), ValidationError);

  auto law = parse_jump_law("1:1/2,3:1/2");
  REQUIRE(law.size() == 2);
  CHECK(law[1].value == 3);
  CHECK(law[1].prob == ratio(1, 2));
  CHECK_THROWS_AS(parse_jump_law("1"), ValidationError);
  CHECK_THROWS_AS(parse_jump_law("x:1"), ValidationError);
}
