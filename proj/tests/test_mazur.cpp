#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "martlab/mazur.hpp"
#include "martlab/models.hpp"
#include "oracles.hpp"

using namespace martlab;

namespace {

SpacePtr space_of(std::size_t n) { return SampleSpace::uniform(n); }

RandomVariable rv(const SpacePtr& s, std::vector<Rational> v) { return RandomVariable(s, std::move(v)); }

std::vector<RandomVariable> random_sequence(Xorshift64& rng, std::size_t len) {
  auto f = random_filtration(rng, {8, 1});
  std::vector<RandomVariable> xs;
  for (std::size_t i = 0; i < len; ++i) {
    std::vector<Rational> v(f->space()->size());
    for (auto& x : v) x = rng.small_rational(-4, 4);
    xs.emplace_back(f->space(), std::move(v));
  }
  // Repeat an element and add a negation sometimes, to get degenerate Gram matrices.
  if (rng.below(2) == 0) xs[len - 1] = xs[len - 3];
  if (rng.below(2) == 0) xs[len - 2] = -xs[0];
  return xs;
}

Rational weight_sum(const ConvexWeights& w) {
  Rational s = 0;
  for (const auto& x : w.exact) s += x;
  return s;
}

}  // namespace

TEST_CASE("tail_min_l2 on a constant sequence", "[mazur]") {
  auto s = space_of(2);
  RandomVariable one = rv(s, {1, 1});
  std::vector<RandomVariable> xs(5, one);
  auto t = tail_min_l2(xs, 0, 3);
  CHECK(t.kkt_certified);
  CHECK(t.exact_value == 1);
  CHECK(weight_sum(t.weights) == 1);
  CHECK(combine(xs, t.weights) == one);
}

TEST_CASE("tail_min_l2 on X and -X gives (1/2, 1/2) and zero", "[mazur]") {
  auto s = space_of(2);
  RandomVariable x = rv(s, {1, -1});
  std::vector<RandomVariable> xs{x, -x};
  auto t = tail_min_l2(xs, 0, 2);
  CHECK(t.kkt_certified);
  CHECK(t.exact_value == 0);
  CHECK(t.weights.exact == std::vector<Rational>{Rational(1, 2), Rational(1, 2)});
}

TEST_CASE("orthonormal window has minimum 1/w at uniform weights", "[mazur]") {
  for (std::size_t w = 1; w <= 6; ++w) {
    auto s = space_of(w);
    std::vector<RandomVariable> xs;
    for (std::size_t i = 0; i < w; ++i) {
      // Indicators of single outcomes: orthogonal with E[X_i^2] = 1/w.
      std::vector<Rational> v(w, Rational(0));
      v[i] = 1;
      xs.emplace_back(s, std::move(v));
    }
    // E[X_i X_j] = delta_ij / w, so the minimum is (1/w) * (1/w).
    auto t = tail_min_l2(xs, 0, w);
    CHECK(t.kkt_certified);
    CHECK(t.exact_value == ratio(1, static_cast<long>(w * w)));
    for (const auto& x : t.weights.exact) CHECK(x == ratio(1, static_cast<long>(w)));
  }
}

TEST_CASE("exact mode agrees with the default solver", "[mazur]") {
  MazurOptions exact;
  exact.exact = true;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    Xorshift64 rng(seed);
    auto xs = random_sequence(rng, 7);
    for (std::size_t w = 1; w <= 5; ++w) {
      auto a = tail_min_l2(xs, 1, w);
      auto b = tail_min_l2(xs, 1, w, exact);
      CHECK(b.kkt_certified);
      CHECK(b.exact_value <= a.exact_value);
      CHECK(std::abs(a.value - b.value) <= 1e-8);
      CHECK(weight_sum(b.weights) == 1);
    }
  }
}

TEST_CASE("tail_min_l2 matches the support-enumeration oracle", "[mazur][property]") {
  for (std::uint64_t seed = 100; seed < 160; ++seed) {
    Xorshift64 rng(seed);
    auto xs = random_sequence(rng, 6);
    for (std::size_t w = 1; w <= 4; ++w)
      for (std::size_t n = 0; n + w <= xs.size(); ++n) {
        auto g = gram_matrix(xs, n, w);
        Rational expected = oracle::simplex_min_by_supports(g);
        auto t = tail_min_l2(xs, n, w);
        CHECK(std::abs(t.value - to_double(expected)) <= 1e-8);
        if (t.kkt_certified) CHECK(t.exact_value == expected);
        // Re-evaluating the returned weights rationally reproduces the value.
        CHECK(l2_norm_sq(combine(xs, t.weights)) == t.exact_value);
        CHECK(weight_sum(t.weights) == 1);
        for (const auto& x : t.weights.exact) CHECK(x >= 0);
      }
  }
}

TEST_CASE("grid search never beats the solver", "[mazur][property]") {
  for (std::uint64_t seed = 7; seed < 27; ++seed) {
    Xorshift64 rng(seed);
    auto xs = random_sequence(rng, 5);
    auto g = gram_matrix(xs, 0, 3);
    Matrix<double> gd(3, std::vector<double>(3));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) gd[i][j] = to_double(g[i][j]);
    auto t = tail_min_l2(xs, 0, 3);
    CHECK(t.value <= oracle::simplex_min_by_grid(gd, 60) + 1e-12);
  }
}

TEST_CASE("mazur_sequence certificate", "[mazur][property]") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    Xorshift64 rng(seed);
    auto xs = random_sequence(rng, 8);
    for (std::size_t w : {1u, 2u, 3u, 4u}) {
      auto [ys, cert] = mazur_sequence(xs, w);
      REQUIRE(ys.size() == xs.size());
      CHECK(cert.ok());
      CHECK(cert.worst_violation(from_double(1e-9)) == 0);
      CHECK(cert.parallelogram_exact);
      for (std::size_t n = 0; n + 1 < cert.alpha_sequence.size(); ++n)
        CHECK(cert.alpha_sequence[n] <= cert.alpha_sequence[n + 1] + 1e-9);
      // Windowed energies dominate the full-tail minimum.
      for (std::size_t n = 0; n < xs.size(); ++n) {
        CHECK(cert.energies[n] >= cert.exact_alpha[n] - from_double(1e-9));
        CHECK(ys[n].start_index == n);
        CHECK(ys[n].size() == std::min(w, xs.size() - n));
        CHECK(l2_norm_sq(combine(xs, ys[n])) == cert.energies[n]);
      }
      CHECK(cert.pairwise_bound_checks.size() == xs.size() * (xs.size() - 1) / 2);
      for (const auto& pb : cert.pairwise_bound_checks) CHECK(pb.holds);
    }
  }
}

TEST_CASE("mazur_sequence exact mode is fully certified", "[mazur]") {
  MazurOptions exact;
  exact.exact = true;
  Xorshift64 rng(5);
  auto xs = random_sequence(rng, 7);
  auto [ys, cert] = mazur_sequence(xs, 3, exact);
  CHECK(cert.exact);
  CHECK(cert.ok());
  for (const auto& pb : cert.pairwise_bound_checks) CHECK(pb.lhs <= pb.rhs);
}

TEST_CASE("mazur preconditions", "[mazur]") {
  auto s = space_of(2);
  std::vector<RandomVariable> xs(4, rv(s, {1, 2}));
  CHECK_THROWS_AS(tail_min_l2(xs, 0, 0), PreconditionError);
  CHECK_THROWS_AS(tail_min_l2(xs, 2, 3), PreconditionError);
  CHECK_THROWS_AS(mazur_sequence(xs, 3), PreconditionError);
  CHECK_NOTHROW(mazur_sequence(xs, 2));

  MazurOptions capped;
  capped.l2_cap = 1;
  CHECK_THROWS_AS(mazur_sequence(xs, 1, capped), PreconditionError);

  MazurOptions exact;
  exact.exact = true;
  std::vector<RandomVariable> long_seq(13, rv(s, {1, 0}));
  CHECK_THROWS_AS(tail_min_l2(long_seq, 0, 13, exact), PreconditionError);

  std::vector<RandomVariable> mixed{rv(s, {1, 0}), rv(space_of(3), {1, 0, 0})};
  CHECK_THROWS(tail_min_l2(mixed, 0, 2));
}
