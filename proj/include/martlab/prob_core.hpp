#pragma once

// Exact finite probability: sample spaces, partitions, filtrations and
// random variables with rational values.

#include <algorithm>
#include <cstddef>
#include <memory>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "martlab/rational.hpp"

namespace martlab {

using Block = std::vector<std::size_t>;

// Finite outcome set with strictly positive probabilities summing to exactly one.
class SampleSpace {
 public:
  SampleSpace(std::vector<std::string> outcomes, std::vector<Rational> probs)
      : outcomes_(std::move(outcomes)), probs_(std::move(probs)) {
    if (outcomes_.empty()) throw ValidationError("space.outcomes", "must be nonempty");
    if (outcomes_.size() != probs_.size())
      throw ValidationError("space.probs", "length " + std::to_string(probs_.size()) +
                                               " differs from outcome count " +
                                               std::to_string(outcomes_.size()));
    std::set<std::string> seen;
    for (const auto& label : outcomes_)
      if (!seen.insert(label).second)
        throw ValidationError("space.outcomes", "duplicate outcome label '" + label + "'");
    Rational total = 0;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
      if (probs_[i] <= 0)
        throw ValidationError("space.probs[" + std::to_string(i) + "]",
                              "probability must be strictly positive, got " + to_string(probs_[i]));
      total += probs_[i];
    }
    if (total != 1)
      throw ValidationError("space.probs", "probabilities sum to " + to_string(total) + ", expected 1");
  }

  static std::shared_ptr<const SampleSpace> uniform(std::size_t n) {
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < n; ++i) labels.push_back("w" + std::to_string(i));
    return std::make_shared<const SampleSpace>(std::move(labels),
                                               std::vector<Rational>(n, ratio(1, static_cast<long>(n))));
  }

  std::size_t size() const noexcept { return outcomes_.size(); }
  const std::vector<std::string>& outcomes() const noexcept { return outcomes_; }
  const std::vector<Rational>& probs() const noexcept { return probs_; }
  const Rational& prob(std::size_t i) const { return probs_.at(i); }

  bool operator==(const SampleSpace& other) const {
    return outcomes_ == other.outcomes_ && probs_ == other.probs_;
  }

 private:
  std::vector<std::string> outcomes_;
  std::vector<Rational> probs_;
};

using SpacePtr = std::shared_ptr<const SampleSpace>;

// Atoms of a finite sigma-algebra. Blocks are kept sorted internally and
// ordered by their smallest element, so equal partitions compare equal.
class Partition {
 public:
  Partition() = default;

  Partition(std::vector<Block> blocks, std::size_t outcome_count) : block_of_(outcome_count) {
    std::vector<bool> covered(outcome_count, false);
    for (auto& b : blocks) {
      if (b.empty()) throw ValidationError("partition", "empty block");
      std::sort(b.begin(), b.end());
      for (std::size_t w : b) {
        if (w >= outcome_count)
          throw ValidationError("partition", "outcome index " + std::to_string(w) + " out of range");
        if (covered[w])
          throw ValidationError("partition", "outcome " + std::to_string(w) + " appears in two blocks");
        covered[w] = true;
      }
    }
    for (std::size_t w = 0; w < outcome_count; ++w)
      if (!covered[w])
        throw ValidationError("partition", "outcome " + std::to_string(w) + " not covered");
    std::sort(blocks.begin(), blocks.end(),
              [](const Block& a, const Block& b) { return a.front() < b.front(); });
    blocks_ = std::move(blocks);
    for (std::size_t i = 0; i < blocks_.size(); ++i)
      for (std::size_t w : blocks_[i]) block_of_[w] = i;
  }

  static Partition trivial(std::size_t n) {
    Block all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return Partition({std::move(all)}, n);
  }

  static Partition discrete(std::size_t n) {
    std::vector<Block> blocks;
    for (std::size_t i = 0; i < n; ++i) blocks.push_back({i});
    return Partition(std::move(blocks), n);
  }

  // Groups outcomes by key; keys only need operator<.
  template <typename Key>
  static Partition from_keys(const std::vector<Key>& keys) {
    std::vector<std::pair<Key, std::size_t>> tagged;
    for (std::size_t i = 0; i < keys.size(); ++i) tagged.emplace_back(keys[i], i);
    std::stable_sort(tagged.begin(), tagged.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<Block> blocks;
    for (std::size_t i = 0; i < tagged.size(); ++i) {
      if (i == 0 || tagged[i - 1].first < tagged[i].first) blocks.emplace_back();
      blocks.back().push_back(tagged[i].second);
    }
    return Partition(std::move(blocks), keys.size());
  }

  std::size_t outcome_count() const noexcept { return block_of_.size(); }
  std::size_t block_count() const noexcept { return blocks_.size(); }
  const std::vector<Block>& blocks() const noexcept { return blocks_; }
  const Block& block(std::size_t i) const { return blocks_.at(i); }
  std::size_t block_of(std::size_t outcome) const { return block_of_.at(outcome); }

  // True iff every block of *this lies inside a block of `coarser`.
  bool refines(const Partition& coarser) const {
    if (coarser.outcome_count() != outcome_count()) return false;
    for (const auto& b : blocks_) {
      std::size_t target = coarser.block_of(b.front());
      for (std::size_t w : b)
        if (coarser.block_of(w) != target) return false;
    }
    return true;
  }

  bool operator==(const Partition& other) const { return blocks_ == other.blocks_; }

 private:
  std::vector<Block> blocks_;
  std::vector<std::size_t> block_of_;
};

// Refining sequence of partitions indexed by strictly increasing times, times[0] = 0.
class Filtration {
 public:
  Filtration(SpacePtr space, std::vector<Rational> times, std::vector<Partition> partitions)
      : space_(std::move(space)), times_(std::move(times)), partitions_(std::move(partitions)) {
    if (!space_) throw ValidationError("filtration", "missing sample space");
    if (times_.empty()) throw ValidationError("filtration.times", "must be nonempty");
    if (times_.size() != partitions_.size())
      throw ValidationError("filtration.partitions",
                            "count " + std::to_string(partitions_.size()) + " differs from time count " +
                                std::to_string(times_.size()));
    if (times_[0] != 0) throw ValidationError("filtration.times[0]", "must be 0");
    for (std::size_t k = 1; k < times_.size(); ++k)
      if (!(times_[k - 1] < times_[k]))
        throw ValidationError("filtration.times[" + std::to_string(k) + "]", "times must be strictly increasing");
    for (std::size_t k = 0; k < partitions_.size(); ++k) {
      if (partitions_[k].outcome_count() != space_->size())
        throw ValidationError("filtration.partitions[" + std::to_string(k) + "]",
                              "partition is over a different outcome count");
      if (k > 0 && !partitions_[k].refines(partitions_[k - 1]))
        throw ValidationError("filtration.partitions[" + std::to_string(k) + "]",
                              "does not refine partition at index " + std::to_string(k - 1));
    }
  }

  const SpacePtr& space() const noexcept { return space_; }
  // Number of time points, N + 1 for a horizon of N steps.
  std::size_t size() const noexcept { return times_.size(); }
  std::size_t steps() const noexcept { return times_.size() - 1; }
  const std::vector<Rational>& times() const noexcept { return times_; }
  const Partition& at(std::size_t k) const { return partitions_.at(k); }
  const std::vector<Partition>& partitions() const noexcept { return partitions_; }

  bool operator==(const Filtration& other) const {
    return (space_ == other.space_ || *space_ == *other.space_) && times_ == other.times_ &&
           partitions_ == other.partitions_;
  }

 private:
  SpacePtr space_;
  std::vector<Rational> times_;
  std::vector<Partition> partitions_;
};

using FiltrationPtr = std::shared_ptr<const Filtration>;

class RandomVariable {
 public:
  RandomVariable(SpacePtr space, std::vector<Rational> values)
      : space_(std::move(space)), values_(std::move(values)) {
    if (!space_) throw ValidationError("random variable", "missing sample space");
    if (values_.size() != space_->size())
      throw ValidationError("random variable", "length " + std::to_string(values_.size()) +
                                                   " differs from outcome count " +
                                                   std::to_string(space_->size()));
  }

  static RandomVariable constant(SpacePtr space, const Rational& c) {
    std::size_t n = space->size();
    return RandomVariable(std::move(space), std::vector<Rational>(n, c));
  }

  const SpacePtr& space() const noexcept { return space_; }
  std::size_t size() const noexcept { return values_.size(); }
  const std::vector<Rational>& values() const noexcept { return values_; }
  const Rational& operator[](std::size_t w) const { return values_[w]; }

  template <typename F>
  RandomVariable map(F&& f) const {
    std::vector<Rational> out;
    out.reserve(values_.size());
    for (const auto& v : values_) out.push_back(f(v));
    return RandomVariable(space_, std::move(out));
  }

  friend RandomVariable operator+(const RandomVariable& a, const RandomVariable& b) {
    return zip(a, b, [](const Rational& x, const Rational& y) { return Rational(x + y); });
  }
  friend RandomVariable operator-(const RandomVariable& a, const RandomVariable& b) {
    return zip(a, b, [](const Rational& x, const Rational& y) { return Rational(x - y); });
  }
  friend RandomVariable operator*(const RandomVariable& a, const RandomVariable& b) {
    return zip(a, b, [](const Rational& x, const Rational& y) { return Rational(x * y); });
  }
  friend RandomVariable operator*(const Rational& c, const RandomVariable& a) {
    return a.map([&](const Rational& x) { return Rational(c * x); });
  }
  RandomVariable operator-() const {
    return map([](const Rational& x) { return Rational(-x); });
  }

  bool operator==(const RandomVariable& other) const { return values_ == other.values_; }

 private:
  template <typename Op>
  static RandomVariable zip(const RandomVariable& a, const RandomVariable& b, Op op) {
    require_same_space(a, b);
    std::vector<Rational> out;
    out.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out.push_back(op(a.values_[i], b.values_[i]));
    return RandomVariable(a.space_, std::move(out));
  }

 public:
  static void require_same_space(const RandomVariable& a, const RandomVariable& b) {
    if (a.space_ != b.space_ && !(*a.space_ == *b.space_))
      throw PreconditionError("random variables live on different sample spaces");
  }

 private:
  SpacePtr space_;
  std::vector<Rational> values_;
};

inline Rational expectation(const RandomVariable& x) {
  const auto& p = x.space()->probs();
  Rational sum = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += p[i] * x[i];
  return sum;
}

inline RandomVariable conditional_expectation(const RandomVariable& x, const Partition& g) {
  if (g.outcome_count() != x.size())
    throw PreconditionError("conditional_expectation: partition is over a different outcome count");
  const auto& p = x.space()->probs();
  std::vector<Rational> out(x.size());
  for (const auto& block : g.blocks()) {
    Rational mass = 0, weighted = 0;
    for (std::size_t w : block) {
      mass += p[w];
      weighted += p[w] * x[w];
    }
    if (mass == 0) throw InternalDefect("conditional_expectation: block of zero probability");
    Rational avg = weighted / mass;
    for (std::size_t w : block) out[w] = avg;
  }
  return RandomVariable(x.space(), std::move(out));
}

// Largest within-block spread max - min; zero iff measurable.
struct MeasurabilityGap {
  Rational spread = 0;
  std::size_t block = 0;
};

inline MeasurabilityGap measurability_gap(std::span<const Rational> values, const Partition& g) {
  if (g.outcome_count() != values.size())
    throw PreconditionError("measurability: partition is over a different outcome count");
  MeasurabilityGap gap;
  for (std::size_t b = 0; b < g.block_count(); ++b) {
    const auto& block = g.block(b);
    Rational lo = values[block.front()], hi = lo;
    for (std::size_t w : block) {
      if (values[w] < lo) lo = values[w];
      if (hi < values[w]) hi = values[w];
    }
    if (gap.spread < hi - lo) gap = {hi - lo, b};
  }
  return gap;
}

inline bool is_measurable(const RandomVariable& x, const Partition& g) {
  return measurability_gap(x.values(), g).spread == 0;
}

inline Rational l2_inner(const RandomVariable& x, const RandomVariable& y) {
  RandomVariable::require_same_space(x, y);
  const auto& p = x.space()->probs();
  Rational sum = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += p[i] * x[i] * y[i];
  return sum;
}

inline Rational l2_norm_sq(const RandomVariable& x) { return l2_inner(x, x); }

}  // namespace martlab
