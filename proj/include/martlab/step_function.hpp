#pragma once

// Right-continuous step functions on [0, inf) and the three
// checks built on them (uniform convergence of increasing sums, uniform
// convergence of values/left limits/jumps, finite Fatou).

#include <algorithm>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "martlab/prob_core.hpp"
#include "martlab/report.hpp"

namespace martlab {

// initial on [0, b_0), values[i] on [b_i, b_{i+1}), the last value on [b_last, inf).
class StepFunction {
 public:
  StepFunction() = default;
  explicit StepFunction(Rational initial) : initial_(std::move(initial)) {}
  StepFunction(Rational initial, std::vector<Rational> breakpoints, std::vector<Rational> values)
      : initial_(std::move(initial)), breaks_(std::move(breakpoints)), values_(std::move(values)) {
    if (breaks_.size() != values_.size())
      throw ValidationError("values", "need exactly one value per breakpoint");
    for (std::size_t i = 0; i < breaks_.size(); ++i) {
      if (breaks_[i] <= 0) throw ValidationError("breakpoints", "breakpoints must be positive");
      if (i > 0 && breaks_[i] <= breaks_[i - 1])
        throw ValidationError("breakpoints", "breakpoints must be strictly increasing");
    }
  }

  // c 1_{[at, inf)}; at = 0 gives the constant c.
  static StepFunction indicator(const Rational& at, const Rational& c) {
    if (at < 0) throw ValidationError("breakpoints", "negative jump location");
    if (at == 0) return StepFunction(c);
    return StepFunction(0, {at}, {c});
  }

  const Rational& initial() const { return initial_; }
  const std::vector<Rational>& breakpoints() const { return breaks_; }
  const std::vector<Rational>& values() const { return values_; }

  Rational value(const Rational& t) const {
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
    if (it == breaks_.begin()) return initial_;
    return values_[static_cast<std::size_t>(it - breaks_.begin()) - 1];
  }

  // f(t-), with f(0-) := f(0).
  Rational left_limit(const Rational& t) const {
    auto it = std::lower_bound(breaks_.begin(), breaks_.end(), t);
    if (it == breaks_.begin()) return initial_;
    return values_[static_cast<std::size_t>(it - breaks_.begin()) - 1];
  }

  Rational jump(const Rational& t) const { return value(t) - left_limit(t); }

  bool nonnegative() const {
    if (initial_ < 0) return false;
    return std::all_of(values_.begin(), values_.end(), [](const Rational& v) { return v >= 0; });
  }

  bool increasing() const {
    Rational prev = initial_;
    for (const auto& v : values_) {
      if (v < prev) return false;
      prev = v;
    }
    return true;
  }

  friend StepFunction operator+(const StepFunction& f, const StepFunction& g) { return zip(f, g, std::plus<>{}); }
  friend StepFunction operator-(const StepFunction& f, const StepFunction& g) { return zip(f, g, std::minus<>{}); }

  // Union of breakpoints of several functions.
  static std::vector<Rational> merged_breakpoints(const std::vector<const StepFunction*>& fs) {
    std::vector<Rational> all;
    for (const auto* f : fs) all.insert(all.end(), f->breaks_.begin(), f->breaks_.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    return all;
  }

 private:
  template <class Op>
  static StepFunction zip(const StepFunction& f, const StepFunction& g, Op op) {
    std::vector<Rational> b = merged_breakpoints({&f, &g});
    std::vector<Rational> v;
    for (const auto& t : b) v.push_back(op(f.value(t), g.value(t)));
    return StepFunction(op(f.initial_, g.initial_), std::move(b), std::move(v));
  }

  Rational initial_ = 0;
  std::vector<Rational> breaks_;
  std::vector<Rational> values_;
};

// Exact suprema over t in [0, inf) (or [0, horizon] when given) of the
// pointwise difference of values, left limits and jumps. Piecewise constant,
// so it suffices to look at 0, the merged breakpoints, and one point inside
// each gap and past the end.
struct StepDistances {
  Rational values = 0;
  Rational left_limits = 0;
  Rational jumps = 0;
};

inline StepDistances step_distances(const StepFunction& f, const StepFunction& g,
                                    const std::optional<Rational>& horizon = std::nullopt) {
  std::vector<Rational> b = StepFunction::merged_breakpoints({&f, &g});
  if (horizon) b.erase(std::remove_if(b.begin(), b.end(), [&](const Rational& t) { return t > *horizon; }), b.end());
  std::vector<Rational> probes{Rational(0)};
  for (std::size_t i = 0; i < b.size(); ++i) {
    probes.push_back(b[i]);
    Rational prev = i == 0 ? Rational(0) : b[i - 1];
    probes.push_back((prev + b[i]) / 2);
  }
  Rational tail = b.empty() ? Rational(1) : Rational(b.back() + 1);
  if (horizon) {
    probes.push_back(*horizon);
  } else {
    probes.push_back(tail);
  }
  StepDistances d;
  for (const auto& t : probes) {
    d.values = max(d.values, abs(f.value(t) - g.value(t)));
    if (t > 0) d.left_limits = max(d.left_limits, abs(f.left_limit(t) - g.left_limit(t)));
  }
  for (const auto& t : b) d.jumps = max(d.jumps, abs(f.jump(t) - g.jump(t)));
  return d;
}

struct StepSumTable {
  std::vector<Rational> u;     // u[n] for n = 0..N
  std::vector<Rational> tail;  // sum_{k>n} f_k(horizon)
};

// Partial sums S_n = f_1 + ... + f_n (S_0 = 0) of nonnegative increasing step
// functions; u_n = sup_{[0, horizon]} |S_n - S_N|.
inline StepSumTable step_sum_table(const std::vector<StepFunction>& fs, const Rational& horizon) {
  if (horizon < 0) throw PreconditionError("step_sum_convergence_check: negative horizon");
  for (std::size_t k = 0; k < fs.size(); ++k) {
    if (!fs[k].nonnegative())
      throw PreconditionError("step_sum_convergence_check: f_" + std::to_string(k + 1) + " takes negative values");
    if (!fs[k].increasing())
      throw PreconditionError("step_sum_convergence_check: f_" + std::to_string(k + 1) + " is decreasing somewhere");
  }
  const std::size_t n_max = fs.size();
  std::vector<StepFunction> partial{StepFunction(0)};
  for (const auto& f : fs) partial.push_back(partial.back() + f);
  StepSumTable t;
  for (std::size_t n = 0; n <= n_max; ++n) {
    t.u.push_back(step_distances(partial[n], partial[n_max], horizon).values);
    Rational s = 0;
    for (std::size_t k = n; k < n_max; ++k) s += fs[k].value(horizon);
    t.tail.push_back(s);
  }
  return t;
}

inline VerificationReport step_sum_convergence_check(const std::vector<StepFunction>& fs, const Rational& horizon) {
  StepSumTable t = step_sum_table(fs, horizon);
  Rational violation = t.u.back();
  std::string why;
  if (violation != 0) why = "u_N is not zero";
  for (std::size_t n = 0; n < t.u.size(); ++n) {
    if (t.u[n] != t.tail[n]) {
      violation = max(violation, abs(t.u[n] - t.tail[n]));
      if (why.empty()) why = "tail identity fails at n = " + std::to_string(n);
    }
    if (n > 0 && t.u[n] > t.u[n - 1]) {
      violation = max(violation, t.u[n] - t.u[n - 1]);
      if (why.empty()) why = "u_n increases at n = " + std::to_string(n);
    }
  }
  return VerificationReport::from_violation(violation, std::nullopt,
                                            why.empty() ? "u_n nonincreasing, u_N = 0, tail identity exact" : why);
}

struct UniformJumpTable {
  std::vector<StepDistances> rows;  // one per f_n
};

inline UniformJumpTable uniform_jump_table(const std::vector<StepFunction>& fs, const StepFunction& f) {
  UniformJumpTable t;
  for (const auto& fn : fs) t.rows.push_back(step_distances(fn, f));
  return t;
}

// Passes iff the three sup distances are nonincreasing along the list and
// end at 0. Also confirms the pointwise bounds |left-limit gap| <= d and
// |jump gap| <= 2d that make jump convergence follow from uniform convergence.
inline VerificationReport uniform_jump_convergence_check(const std::vector<StepFunction>& fs, const StepFunction& f) {
  if (fs.empty()) return VerificationReport::pass("empty list");
  UniformJumpTable t = uniform_jump_table(fs, f);
  Rational violation = 0;
  std::string why;
  auto note = [&](const Rational& v, std::string msg) {
    if (v <= 0) return;
    violation = max(violation, v);
    if (why.empty()) why = std::move(msg);
  };
  for (std::size_t n = 0; n < t.rows.size(); ++n) {
    const auto& r = t.rows[n];
    note(r.left_limits - r.values, "left-limit distance exceeds value distance at n = " + std::to_string(n));
    note(r.jumps - 2 * r.values, "jump distance exceeds twice the value distance at n = " + std::to_string(n));
    if (n == 0) continue;
    const auto& p = t.rows[n - 1];
    note(r.values - p.values, "value distance increases at n = " + std::to_string(n));
    note(r.left_limits - p.left_limits, "left-limit distance increases at n = " + std::to_string(n));
    note(r.jumps - p.jumps, "jump distance increases at n = " + std::to_string(n));
  }
  const auto& last = t.rows.back();
  note(last.values, "sup |f_n - f| does not reach 0");
  note(last.left_limits, "sup |f_n(-) - f(-)| does not reach 0");
  note(last.jumps, "sup |df_n - df| does not reach 0");
  return VerificationReport::from_violation(violation, std::nullopt, why.empty() ? "all three distances reach 0" : why);
}

struct FatouSides {
  Rational lhs;  // max_{k>=n} E X_k
  Rational rhs;  // E max_{k>=n} X_k
};

inline FatouSides fatou_sides(const std::vector<RandomVariable>& xs, std::size_t n) {
  if (xs.empty() || n >= xs.size()) throw PreconditionError("tail_sup_fatou_check: need n < length");
  for (std::size_t k = n + 1; k < xs.size(); ++k) RandomVariable::require_same_space(xs[n], xs[k]);
  FatouSides s{expectation(xs[n]), 0};
  std::vector<Rational> top = xs[n].values();
  for (std::size_t k = n + 1; k < xs.size(); ++k) {
    s.lhs = max(s.lhs, expectation(xs[k]));
    for (std::size_t w = 0; w < top.size(); ++w) top[w] = max(top[w], xs[k][w]);
  }
  s.rhs = expectation(RandomVariable(xs[n].space(), std::move(top)));
  return s;
}

inline VerificationReport tail_sup_fatou_check(const std::vector<RandomVariable>& xs, std::size_t n) {
  FatouSides s = fatou_sides(xs, n);
  std::string detail = "max E X_k = " + to_string(s.lhs) + ", E max X_k = " + to_string(s.rhs);
  if (s.lhs <= s.rhs) return VerificationReport::pass(detail);
  return VerificationReport::fail(s.lhs - s.rhs, std::nullopt, detail);
}

}  // namespace martlab
