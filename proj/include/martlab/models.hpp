#pragma once

// Deterministic generators of finite filtered spaces and canonical processes.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "martlab/compensator.hpp"
#include "martlab/processes.hpp"

namespace martlab {

// xorshift64* (Vigna). The seed is first scrambled with one splitmix64 round
// so that small or zero seeds still give a nonzero, well-mixed state:
//   z = seed + 0x9E3779B97F4A7C15
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   state = z ^ (z >> 31)   (replaced by 1 if zero)
// Each draw:  x ^= x >> 12; x ^= x << 25; x ^= x >> 27; return x * 0x2545F4914F6CDD1D.
class Xorshift64 {
 public:
  explicit Xorshift64(std::uint64_t seed) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    state_ = z ^ (z >> 31);
    if (state_ == 0) state_ = 1;
  }

  std::uint64_t next() {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545F4914F6CDD1DULL;
  }

  // Uniform-ish integer in [0, n); n > 0. Uses the high bits.
  std::uint64_t below(std::uint64_t n) { return (next() >> 11) % n; }

  // Integer in [lo, hi].
  long between(long lo, long hi) { return lo + static_cast<long>(below(static_cast<std::uint64_t>(hi - lo + 1))); }

  bool coin() { return (next() >> 63) != 0; }

  // Small rational with numerator in [lo, hi] and denominator in {1, 2, 3, 4}.
  Rational small_rational(long lo, long hi) {
    return ratio(between(lo, hi), between(1, 4));
  }

 private:
  std::uint64_t state_;
};

// Product tree: each of `depth` steps picks one of b branches with fixed
// probabilities. Outcome index encodes branch digits, first step most significant.
struct TreeModel {
  SpacePtr space;
  FiltrationPtr filtration;
  std::size_t depth = 0;
  std::vector<Rational> branch_probs;

  std::size_t branching() const { return branch_probs.size(); }

  // Branch taken at step `step` (revealed at time index step + 1).
  std::size_t branch(std::size_t outcome, std::size_t step) const {
    std::size_t b = branching();
    for (std::size_t s = step + 1; s < depth; ++s) outcome /= b;
    return outcome % b;
  }
};

inline TreeModel product_tree_space(std::size_t depth, std::vector<Rational> branch_probs,
                                    const std::string& symbols = "0123456789abcdefghijklmnopqrstuvwxyz") {
  if (depth < 1 || depth > 16) throw ValidationError("depth", "must lie in [1, 16], got " + std::to_string(depth));
  const std::size_t b = branch_probs.size();
  if (b < 1 || b > symbols.size()) throw ValidationError("branches", "unsupported branch count " + std::to_string(b));
  Rational total = 0;
  for (const auto& p : branch_probs) {
    if (p <= 0) throw ValidationError("branches", "branch probabilities must be strictly positive");
    total += p;
  }
  if (total != 1) throw ValidationError("branches", "branch probabilities sum to " + to_string(total));
  double outcomes_d = 1;
  for (std::size_t i = 0; i < depth; ++i) outcomes_d *= static_cast<double>(b);
  if (outcomes_d > 65536) throw ValidationError("depth", "tree would have more than 65536 outcomes");
  std::size_t n = 1;
  for (std::size_t i = 0; i < depth; ++i) n *= b;

  std::vector<std::string> labels(n);
  std::vector<Rational> probs(n);
  for (std::size_t w = 0; w < n; ++w) {
    std::string label(depth, ' ');
    Rational p = 1;
    std::size_t rest = w;
    for (std::size_t s = depth; s-- > 0;) {
      label[s] = symbols[rest % b];
      p *= branch_probs[rest % b];
      rest /= b;
    }
    labels[w] = std::move(label);
    probs[w] = p;
  }
  auto space = std::make_shared<const SampleSpace>(std::move(labels), std::move(probs));

  std::vector<Rational> times;
  std::vector<Partition> parts;
  std::size_t group = n;
  for (std::size_t k = 0; k <= depth; ++k) {
    times.emplace_back(static_cast<long>(k));
    std::vector<std::size_t> keys(n);
    for (std::size_t w = 0; w < n; ++w) keys[w] = w / group;
    parts.push_back(Partition::from_keys(keys));
    group /= (k < depth ? b : 1);
  }
  auto filtration = std::make_shared<const Filtration>(space, std::move(times), std::move(parts));
  return TreeModel{space, filtration, depth, std::move(branch_probs)};
}

// Coin-flip tree; branch 0 is "up" (label 'u'), branch 1 is "down" ('d').
inline TreeModel binary_tree_space(std::size_t depth, const Rational& p_up) {
  if (!(p_up > 0 && p_up < 1)) throw ValidationError("p_up", "must lie strictly between 0 and 1");
  return product_tree_space(depth, {p_up, Rational(1 - p_up)}, "ud");
}

// M_0 = 0 and dM = up_step on branch 0, down_step otherwise.
inline ProcessPath signed_walk(const TreeModel& tree, const Rational& up_step, const Rational& down_step) {
  return ProcessPath::generate(tree.filtration, [&](std::size_t k, std::size_t w) {
    Rational v = 0;
    for (std::size_t s = 0; s < k; ++s) v += tree.branch(w, s) == 0 ? up_step : down_step;
    return v;
  });
}

// Compensated walk: dM = scale (1 - p) on up, -scale p on down, p the tree's up probability.
inline ProcessPath random_walk(const TreeModel& tree, const Rational& scale) {
  if (tree.branching() != 2) throw ValidationError("random_walk", "requires a binary tree");
  const Rational& p = tree.branch_probs[0];
  return signed_walk(tree, scale * (1 - p), -scale * p);
}

// Number of up-steps (branch 0) by time k.
inline ProcessPath up_counter(const TreeModel& tree) { return signed_walk(tree, 1, 0); }

struct JumpAtom {
  Rational value;
  Rational prob;
};

struct PoissonSkeleton {
  TreeModel tree;
  ProcessPath jumps;
  // B_k = k p_jump E[jump]
  ProcessPath compensator;
};

// Per step a jump occurs with probability p_jump, with size drawn from `law`.
// Branches are the jump atoms (in order) followed by the no-jump branch;
// zero-probability branches are dropped.
inline PoissonSkeleton poisson_skeleton(std::size_t depth, const Rational& p_jump, const std::vector<JumpAtom>& law) {
  if (p_jump < 0 || p_jump > 1) throw ValidationError("p_jump", "must lie in [0, 1]");
  if (law.empty()) throw ValidationError("jump_law", "must be nonempty");
  Rational total = 0, mean = 0;
  for (const auto& atom : law) {
    if (atom.prob < 0) throw ValidationError("jump_law", "negative probability");
    if (atom.value < 0) throw ValidationError("jump_law", "jump sizes must be nonnegative");
    total += atom.prob;
    mean += atom.value * atom.prob;
  }
  if (total != 1) throw ValidationError("jump_law", "probabilities sum to " + to_string(total));

  std::vector<Rational> probs;
  std::vector<Rational> sizes;
  if (p_jump > 0)
    for (const auto& atom : law)
      if (atom.prob > 0) {
        probs.push_back(p_jump * atom.prob);
        sizes.push_back(atom.value);
      }
  if (p_jump < 1) {
    probs.push_back(1 - p_jump);
    sizes.emplace_back(0);
  }
  TreeModel tree = product_tree_space(depth, probs);
  ProcessPath jumps = ProcessPath::generate(tree.filtration, [&](std::size_t k, std::size_t w) {
    Rational v = 0;
    for (std::size_t s = 0; s < k; ++s) v += sizes[tree.branch(w, s)];
    return v;
  });
  Rational rate = p_jump * mean;
  ProcessPath comp = ProcessPath::generate(tree.filtration, [&](std::size_t k, std::size_t) {
    return Rational(rate * static_cast<long>(k));
  });
  return PoissonSkeleton{std::move(tree), std::move(jumps), std::move(comp)};
}

// ---------------------------------------------------------------------------
// Dyadic embedding: a tree revealing its steps at chosen fine grid indices.

// Fine filtration on times j 2^{-level}, j = 0..steps; the coarse step i is
// revealed at fine index events[i].
inline FiltrationPtr embed_filtration(const Filtration& coarse, std::size_t level, std::size_t steps,
                                      std::span<const std::size_t> events) {
  if (events.size() != coarse.steps())
    throw ValidationError("events", "need one event index per coarse step");
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i] < 1 || events[i] > steps) throw ValidationError("events", "event index out of range");
    if (i > 0 && events[i] <= events[i - 1]) throw ValidationError("events", "event indices must increase");
  }
  Rational dt(1);
  dt /= Rational(mpz_class(1) << static_cast<mp_bitcnt_t>(level));
  std::vector<Rational> times;
  std::vector<Partition> parts;
  std::size_t revealed = 0;
  for (std::size_t j = 0; j <= steps; ++j) {
    while (revealed < events.size() && events[revealed] <= j) ++revealed;
    times.push_back(dt * static_cast<long>(j));
    parts.push_back(coarse.at(revealed));
  }
  return std::make_shared<const Filtration>(coarse.space(), std::move(times), std::move(parts));
}

inline ProcessPath embed_process(const ProcessPath& coarse, FiltrationPtr fine, std::span<const std::size_t> events) {
  std::vector<ProcessPath::Row> rows;
  std::size_t revealed = 0;
  for (std::size_t j = 0; j < fine->size(); ++j) {
    while (revealed < events.size() && events[revealed] <= j) ++revealed;
    rows.push_back(coarse.row_values(revealed));
  }
  return ProcessPath(std::move(fine), std::move(rows));
}

inline StoppingTime embed_stopping_time(const StoppingTime& coarse, FiltrationPtr fine,
                                        std::span<const std::size_t> events) {
  std::vector<StoppingTime::Index> idx(coarse.size());
  for (std::size_t w = 0; w < idx.size(); ++w) {
    if (!coarse[w]) continue;
    idx[w] = *coarse[w] == 0 ? 0 : events[*coarse[w] - 1];
  }
  return StoppingTime(std::move(fine), std::move(idx));
}

// Bundled pipeline fixtures: a fair 3-coin tree on the level-`level` grid over
// [0, 1], coins revealed at fine indices j 2^level / 4 (j = 1, 2, 3).
struct DyadicFixture {
  std::string name;
  std::size_t level = 0;
  FiltrationPtr filtration;
  ProcessPath process;
  std::vector<StoppingTime> stopping_times;
};

inline std::vector<std::size_t> default_events(std::size_t level, std::size_t coins) {
  std::size_t steps = std::size_t{1} << level;
  std::vector<std::size_t> events;
  for (std::size_t j = 1; j <= coins; ++j) events.push_back(j * steps / (coins + 1));
  return events;
}

inline DyadicFixture dyadic_fixture(const std::string& kind, std::size_t level) {
  if (level < 2 || level > 10) throw ValidationError("n_max", "fixture level must lie in [2, 10]");
  TreeModel tree = binary_tree_space(3, Rational(1, 2));
  auto events = default_events(level, 3);
  FiltrationPtr fine = embed_filtration(*tree.filtration, level, std::size_t{1} << level, events);
  ProcessPath downs = signed_walk(tree, 0, 1);
  StoppingTime first_down = StoppingTime::first_time(downs, [](std::size_t, const Rational& v) { return v > 0; });

  ProcessPath coarse = [&] {
    if (kind == "single_jump")
      return single_jump_process(first_down, RandomVariable::constant(tree.space, 1));
    if (kind == "up_counter") return up_counter(tree);
    if (kind == "walk") return signed_walk(tree, 1, -1);
    if (kind == "stopped_walk") return stopped_process(signed_walk(tree, 1, -1), first_down);
    if (kind == "constant") return ProcessPath::constant(tree.filtration, 1);
    throw ValidationError("fixture", "unknown fixture '" + kind + "'");
  }();
  DyadicFixture fx{kind, level, fine, embed_process(coarse, fine, events), {}};
  fx.stopping_times.push_back(embed_stopping_time(first_down.capped(3), fine, events));
  return fx;
}

// ---------------------------------------------------------------------------
// Randomized instances for property tests.

struct RandomCaps {
  std::size_t max_outcomes = 64;
  std::size_t max_steps = 8;
};

// Random refining filtration with trivial F_0 and random positive probabilities.
inline FiltrationPtr random_filtration(Xorshift64& rng, const RandomCaps& caps = {}) {
  if (caps.max_outcomes < 2 || caps.max_outcomes > 64 || caps.max_steps < 1 || caps.max_steps > 8)
    throw ValidationError("caps", "caps must satisfy 2 <= outcomes <= 64 and 1 <= steps <= 8");
  const std::size_t n = static_cast<std::size_t>(rng.between(2, static_cast<long>(caps.max_outcomes)));
  const std::size_t steps = static_cast<std::size_t>(rng.between(1, static_cast<long>(caps.max_steps)));
  std::vector<long> weights(n);
  long total = 0;
  for (auto& w : weights) total += (w = rng.between(1, 9));
  std::vector<std::string> labels;
  std::vector<Rational> probs;
  for (std::size_t i = 0; i < n; ++i) {
    labels.push_back("w" + std::to_string(i));
    probs.push_back(ratio(weights[i], total));
  }
  auto space = std::make_shared<const SampleSpace>(std::move(labels), std::move(probs));

  std::vector<std::size_t> key(n, 0);
  std::size_t next_key = 1;
  std::vector<Partition> parts{Partition::from_keys(key)};
  std::vector<Rational> times{Rational(0)};
  for (std::size_t k = 1; k <= steps; ++k) {
    const Partition prev = parts.back();
    for (const auto& block : prev.blocks()) {
      if (block.size() < 2 || rng.below(4) == 0) continue;
      std::size_t pieces = static_cast<std::size_t>(rng.between(2, std::min<long>(3, static_cast<long>(block.size()))));
      std::vector<std::size_t> fresh(pieces);
      for (auto& f : fresh) f = next_key++;
      // First `pieces` outcomes seed each piece so none is empty.
      for (std::size_t i = 0; i < block.size(); ++i)
        key[block[i]] = fresh[i < pieces ? i : rng.below(pieces)];
    }
    parts.push_back(Partition::from_keys(key));
    times.emplace_back(static_cast<long>(k));
  }
  return std::make_shared<const Filtration>(space, std::move(times), std::move(parts));
}

// Values constant on blocks of partitions[k + shift] (shift = 0 adapted, -1 predictable).
inline ProcessPath random_measurable_path(Xorshift64& rng, const FiltrationPtr& f, int shift, long lo, long hi) {
  std::vector<ProcessPath::Row> rows(f->size(), ProcessPath::Row(f->space()->size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const Partition part = (shift < 0 && k == 0) ? Partition::trivial(f->space()->size())
                                                 : f->at(shift < 0 ? k - 1 : k);
    for (const auto& block : part.blocks()) {
      Rational v = rng.small_rational(lo, hi);
      for (std::size_t w : block) rows[k][w] = v;
    }
  }
  return ProcessPath(f, std::move(rows));
}

inline ProcessPath random_adapted(Xorshift64& rng, const FiltrationPtr& f) {
  return random_measurable_path(rng, f, 0, -6, 6);
}

inline ProcessPath random_predictable(Xorshift64& rng, const FiltrationPtr& f) {
  return random_measurable_path(rng, f, -1, -6, 6);
}

// Increasing adapted process null at 0 with increments in [0, 3].
inline ProcessPath random_increasing(Xorshift64& rng, const FiltrationPtr& f) {
  ProcessPath inc = random_measurable_path(rng, f, 0, 0, 3);
  std::vector<ProcessPath::Row> rows(f->size(), ProcessPath::Row(f->space()->size(), Rational(0)));
  for (std::size_t k = 1; k < rows.size(); ++k)
    for (std::size_t w = 0; w < rows[k].size(); ++w) rows[k][w] = rows[k - 1][w] + inc.at(k, w);
  return ProcessPath(f, std::move(rows));
}

// Martingale: random child values, centered within each parent block.
inline ProcessPath random_martingale(Xorshift64& rng, const FiltrationPtr& f, long lo = -6, long hi = 6) {
  const auto& p = f->space()->probs();
  const std::size_t n = f->space()->size();
  std::vector<ProcessPath::Row> rows(f->size(), ProcessPath::Row(n));
  Rational start = rng.small_rational(lo, hi);
  for (std::size_t w = 0; w < n; ++w) rows[0][w] = start;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    std::vector<Rational> raw(n);
    for (const auto& child : f->at(k).blocks()) {
      Rational v = rng.small_rational(lo, hi);
      for (std::size_t w : child) raw[w] = v;
    }
    for (const auto& parent : f->at(k - 1).blocks()) {
      Rational mass = 0, mean = 0;
      for (std::size_t w : parent) {
        mass += p[w];
        mean += p[w] * raw[w];
      }
      mean /= mass;
      for (std::size_t w : parent) rows[k][w] = rows[k - 1][w] + raw[w] - mean;
    }
  }
  return ProcessPath(f, std::move(rows));
}

// Stopping time with T >= 1: each not-yet-stopped atom of F_k stops at k with probability 1/3.
inline StoppingTime random_stopping_time(Xorshift64& rng, const FiltrationPtr& f, bool allow_zero = false) {
  std::vector<StoppingTime::Index> idx(f->space()->size(), StoppingTime::infinity);
  for (std::size_t k = allow_zero ? 0 : 1; k < f->size(); ++k)
    for (const auto& block : f->at(k).blocks()) {
      if (idx[block.front()] || rng.below(3) != 0) continue;
      for (std::size_t w : block) idx[w] = k;
    }
  return StoppingTime(f, std::move(idx));
}

struct SingleJump {
  StoppingTime time;
  RandomVariable size;
  Rational bound;
  ProcessPath process;
};

// A = xi 1{T <= k} with 0 <= xi <= c and xi F_T-measurable.
inline SingleJump random_single_jump(Xorshift64& rng, const FiltrationPtr& f, const Rational& c) {
  StoppingTime t = random_stopping_time(rng, f);
  std::vector<Rational> xi(f->space()->size(), Rational(0));
  for (std::size_t k = 1; k < f->size(); ++k)
    for (const auto& block : f->at(k).blocks()) {
      Rational v = c * ratio(static_cast<long>(rng.below(5)), 4);
      for (std::size_t w : block)
        if (t[w] && *t[w] == k) xi[w] = v;
    }
  RandomVariable size(f->space(), std::move(xi));
  ProcessPath a = single_jump_process(t, size);
  return SingleJump{std::move(t), std::move(size), c, std::move(a)};
}

struct RandomInstance {
  FiltrationPtr filtration;
  ProcessPath increasing;
  ProcessPath martingale;
  ProcessPath predictable;
  ProcessPath adapted;
};

inline RandomInstance randomized_instance(std::uint64_t seed, const RandomCaps& caps = {}) {
  Xorshift64 rng(seed);
  FiltrationPtr f = random_filtration(rng, caps);
  ProcessPath inc = random_increasing(rng, f);
  ProcessPath mart = random_martingale(rng, f);
  ProcessPath pred = random_predictable(rng, f);
  ProcessPath adapted = random_adapted(rng, f);
  return RandomInstance{f, std::move(inc), std::move(mart), std::move(pred), std::move(adapted)};
}

}  // namespace martlab
