#pragma once

// Processes on a finite filtration: adaptedness, predictability and the
// martingale property checked exactly, plus stopping and optional sampling.

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "martlab/prob_core.hpp"
#include "martlab/report.hpp"

namespace martlab {

// values[k][w] is the value at time index k on outcome w.
class ProcessPath {
 public:
  using Row = std::vector<Rational>;

  ProcessPath(FiltrationPtr filtration, std::vector<Row> values)
      : filtration_(std::move(filtration)), values_(std::move(values)) {
    if (!filtration_) throw ValidationError("process", "missing filtration");
    if (values_.size() != filtration_->size())
      throw ValidationError("process.values", "row count " + std::to_string(values_.size()) +
                                                  " differs from filtration length " +
                                                  std::to_string(filtration_->size()));
    for (std::size_t k = 0; k < values_.size(); ++k)
      if (values_[k].size() != outcome_count())
        throw ValidationError("process.values[" + std::to_string(k) + "]",
                              "row length differs from outcome count");
  }

  static ProcessPath constant(FiltrationPtr f, const Rational& c) {
    std::vector<Row> rows(f->size(), Row(f->space()->size(), c));
    return ProcessPath(std::move(f), std::move(rows));
  }

  static ProcessPath zero(FiltrationPtr f) { return constant(std::move(f), 0); }

  // Builds a path from a generator value(k, w).
  static ProcessPath generate(FiltrationPtr f, const std::function<Rational(std::size_t, std::size_t)>& value) {
    std::vector<Row> rows(f->size(), Row(f->space()->size()));
    for (std::size_t k = 0; k < rows.size(); ++k)
      for (std::size_t w = 0; w < rows[k].size(); ++w) rows[k][w] = value(k, w);
    return ProcessPath(std::move(f), std::move(rows));
  }

  const FiltrationPtr& filtration() const noexcept { return filtration_; }
  const SpacePtr& space() const noexcept { return filtration_->space(); }
  std::size_t size() const noexcept { return values_.size(); }
  std::size_t steps() const noexcept { return values_.size() - 1; }
  std::size_t outcome_count() const noexcept { return filtration_->space()->size(); }

  const std::vector<Row>& values() const noexcept { return values_; }
  const Row& row_values(std::size_t k) const { return values_.at(k); }
  const Rational& at(std::size_t k, std::size_t w) const { return values_.at(k).at(w); }
  RandomVariable row(std::size_t k) const { return RandomVariable(space(), values_.at(k)); }
  RandomVariable terminal() const { return row(steps()); }

  // Increment X_k - X_{k-1} for k >= 1.
  RandomVariable increment(std::size_t k) const {
    std::vector<Rational> d(outcome_count());
    for (std::size_t w = 0; w < d.size(); ++w) d[w] = values_.at(k)[w] - values_.at(k - 1)[w];
    return RandomVariable(space(), std::move(d));
  }

  template <typename F>
  ProcessPath map(F&& f) const {
    auto rows = values_;
    for (auto& r : rows)
      for (auto& v : r) v = f(v);
    return ProcessPath(filtration_, std::move(rows));
  }

  friend ProcessPath operator+(const ProcessPath& a, const ProcessPath& b) {
    return zip(a, b, [](const Rational& x, const Rational& y) { return Rational(x + y); });
  }
  friend ProcessPath operator-(const ProcessPath& a, const ProcessPath& b) {
    return zip(a, b, [](const Rational& x, const Rational& y) { return Rational(x - y); });
  }
  // Pointwise product, e.g. M * M for M^2.
  friend ProcessPath operator*(const ProcessPath& a, const ProcessPath& b) {
    return zip(a, b, [](const Rational& x, const Rational& y) { return Rational(x * y); });
  }
  friend ProcessPath operator*(const Rational& c, const ProcessPath& a) {
    return a.map([&](const Rational& x) { return Rational(c * x); });
  }
  ProcessPath operator-() const {
    return map([](const Rational& x) { return Rational(-x); });
  }

  bool operator==(const ProcessPath& other) const {
    return same_filtration(*this, other) && values_ == other.values_;
  }

  static bool same_filtration(const ProcessPath& a, const ProcessPath& b) {
    return a.filtration_ == b.filtration_ || *a.filtration_ == *b.filtration_;
  }

  static void require_same_filtration(const ProcessPath& a, const ProcessPath& b, const char* op) {
    if (!same_filtration(a, b)) throw PreconditionError(std::string(op) + ": processes live on different filtrations");
  }

 private:
  template <typename Op>
  static ProcessPath zip(const ProcessPath& a, const ProcessPath& b, Op op) {
    require_same_filtration(a, b, "process arithmetic");
    auto rows = a.values_;
    for (std::size_t k = 0; k < rows.size(); ++k)
      for (std::size_t w = 0; w < rows[k].size(); ++w) rows[k][w] = op(rows[k][w], b.values_[k][w]);
    return ProcessPath(a.filtration_, std::move(rows));
  }

  FiltrationPtr filtration_;
  std::vector<Row> values_;
};

// Per-outcome stop index in {0..N}; std::nullopt encodes infinity.
class StoppingTime {
 public:
  using Index = std::optional<std::size_t>;
  static constexpr Index infinity = std::nullopt;

  StoppingTime(FiltrationPtr filtration, std::vector<Index> stop_index)
      : filtration_(std::move(filtration)), stop_(std::move(stop_index)) {
    if (!filtration_) throw ValidationError("stopping time", "missing filtration");
    if (stop_.size() != filtration_->space()->size())
      throw ValidationError("stopping time", "length differs from outcome count");
    const std::size_t n = filtration_->steps();
    for (std::size_t w = 0; w < stop_.size(); ++w)
      if (stop_[w] && *stop_[w] > n)
        throw ValidationError("stopping time[" + std::to_string(w) + "]",
                              "index " + std::to_string(*stop_[w]) + " beyond horizon " + std::to_string(n));
    for (std::size_t k = 0; k <= n; ++k) {
      const Partition& part = filtration_->at(k);
      for (std::size_t b = 0; b < part.block_count(); ++b) {
        const auto& block = part.block(b);
        bool first = stopped_by(block.front(), k);
        for (std::size_t w : block)
          if (stopped_by(w, k) != first)
            throw ValidationError("stopping time",
                                  "event {T <= " + std::to_string(k) + "} splits block " + std::to_string(b) +
                                      " of partition " + std::to_string(k));
      }
    }
  }

  static StoppingTime constant(FiltrationPtr f, Index k) {
    std::size_t n = f->space()->size();
    return StoppingTime(std::move(f), std::vector<Index>(n, k));
  }

  // First time index k with pred(k, X_k(w)); infinity if none. Valid whenever X is adapted.
  static StoppingTime first_time(const ProcessPath& x, const std::function<bool(std::size_t, const Rational&)>& pred) {
    std::vector<Index> stop(x.outcome_count(), infinity);
    for (std::size_t w = 0; w < stop.size(); ++w)
      for (std::size_t k = 0; k < x.size(); ++k)
        if (pred(k, x.at(k, w))) {
          stop[w] = k;
          break;
        }
    return StoppingTime(x.filtration(), std::move(stop));
  }

  const FiltrationPtr& filtration() const noexcept { return filtration_; }
  const std::vector<Index>& indices() const noexcept { return stop_; }
  const Index& operator[](std::size_t w) const { return stop_[w]; }
  std::size_t size() const noexcept { return stop_.size(); }

  bool stopped_by(std::size_t w, std::size_t k) const { return stop_[w] && *stop_[w] <= k; }

  bool is_finite() const {
    for (const auto& s : stop_)
      if (!s) return false;
    return true;
  }

  // Pointwise minimum with a constant index.
  StoppingTime capped(std::size_t k) const {
    auto s = stop_;
    for (auto& v : s) v = v ? std::min(*v, k) : k;
    return StoppingTime(filtration_, std::move(s));
  }

 private:
  FiltrationPtr filtration_;
  std::vector<Index> stop_;
};

namespace detail {

inline VerificationReport measurability_report(const ProcessPath& x, std::size_t row, const Partition& g,
                                               const std::string& what) {
  auto gap = measurability_gap(x.row_values(row), g);
  if (gap.spread == 0) return VerificationReport::pass();
  return VerificationReport::fail(gap.spread, Witness{row, g.block(gap.block)}, what);
}

}  // namespace detail

inline VerificationReport is_adapted(const ProcessPath& x) {
  const auto& f = *x.filtration();
  for (std::size_t k = 0; k < x.size(); ++k) {
    auto r = detail::measurability_report(x, k, f.at(k),
                                          "row " + std::to_string(k) + " is not measurable w.r.t. partition " +
                                              std::to_string(k));
    if (!r) return r;
  }
  return VerificationReport::pass("adapted");
}

inline VerificationReport is_predictable(const ProcessPath& x) {
  const auto& f = *x.filtration();
  auto r0 = detail::measurability_report(x, 0, Partition::trivial(x.outcome_count()),
                                         "initial value is not deterministic");
  if (!r0) return r0;
  for (std::size_t k = 1; k < x.size(); ++k) {
    auto r = detail::measurability_report(x, k, f.at(k - 1),
                                          "row " + std::to_string(k) + " is not measurable w.r.t. partition " +
                                              std::to_string(k - 1));
    if (!r) return r;
  }
  return VerificationReport::pass("predictable");
}

inline bool is_increasing(const ProcessPath& x) {
  for (std::size_t k = 1; k < x.size(); ++k)
    for (std::size_t w = 0; w < x.outcome_count(); ++w)
      if (x.at(k, w) < x.at(k - 1, w)) return false;
  return true;
}

// Worst |E(M_{k+1}|F_k) - M_k| over all k and blocks of F_k.
inline VerificationReport is_martingale(const ProcessPath& m) {
  if (auto adapted = is_adapted(m); !adapted)
    throw PreconditionError("is_martingale: process is not adapted (" + adapted.detail + ")");
  const auto& f = *m.filtration();
  const auto& p = m.space()->probs();
  Rational worst = 0;
  std::optional<Witness> witness;
  for (std::size_t k = 0; k + 1 < m.size(); ++k) {
    const Partition& part = f.at(k);
    for (std::size_t b = 0; b < part.block_count(); ++b) {
      const auto& block = part.block(b);
      Rational mass = 0, drift = 0;
      for (std::size_t w : block) {
        mass += p[w];
        drift += p[w] * (m.at(k + 1, w) - m.at(k, w));
      }
      Rational gap = abs(Rational(drift / mass));
      if (worst < gap) {
        worst = gap;
        witness = Witness{k, block};
      }
    }
  }
  if (worst == 0) return VerificationReport::pass("martingale");
  return VerificationReport::fail(worst, witness,
                                  "conditional increment E(M_{k+1} - M_k | F_k) is nonzero at k = " +
                                      std::to_string(witness->time_index));
}

inline ProcessPath total_variation(const ProcessPath& a) {
  std::vector<ProcessPath::Row> rows(a.size(), ProcessPath::Row(a.outcome_count(), Rational(0)));
  for (std::size_t k = 1; k < a.size(); ++k)
    for (std::size_t w = 0; w < a.outcome_count(); ++w)
      rows[k][w] = rows[k - 1][w] + abs(Rational(a.at(k, w) - a.at(k - 1, w)));
  return ProcessPath(a.filtration(), std::move(rows));
}

inline void require_compatible(const ProcessPath& x, const StoppingTime& t, const char* op) {
  if (!(t.filtration() == x.filtration() || *t.filtration() == *x.filtration()))
    throw PreconditionError(std::string(op) + ": stopping time is on a different filtration");
}

inline ProcessPath stopped_process(const ProcessPath& x, const StoppingTime& t) {
  require_compatible(x, t, "stopped_process");
  auto rows = x.values();
  for (std::size_t k = 0; k < rows.size(); ++k)
    for (std::size_t w = 0; w < rows[k].size(); ++w)
      if (t[w] && *t[w] < k) rows[k][w] = x.at(*t[w], w);
  return ProcessPath(x.filtration(), std::move(rows));
}

// X_T for a finite stopping time.
inline RandomVariable sample_at(const ProcessPath& x, const StoppingTime& t) {
  require_compatible(x, t, "sample_at");
  std::vector<Rational> v(x.outcome_count());
  for (std::size_t w = 0; w < v.size(); ++w) {
    if (!t[w]) throw PreconditionError("sample_at: stopping time is infinite on outcome " + std::to_string(w));
    v[w] = x.at(*t[w], w);
  }
  return RandomVariable(x.space(), std::move(v));
}

inline VerificationReport optional_sampling_check(const ProcessPath& m, const StoppingTime& t) {
  if (!t.is_finite()) throw PreconditionError("optional_sampling_check: stopping time must be finite everywhere");
  auto mart = is_martingale(m);
  if (!mart) {
    mart.detail = "precondition violated: input is not a martingale; " + mart.detail;
    return mart;
  }
  Rational gap = expectation(sample_at(m, t)) - expectation(m.row(0));
  if (gap != 0) return VerificationReport::fail(abs(gap), std::nullopt, "E[M_T] differs from E[M_0]");
  auto stopped = is_martingale(stopped_process(m, t));
  if (!stopped) {
    stopped.detail = "stopped process is not a martingale; " + stopped.detail;
    return stopped;
  }
  return VerificationReport::pass("E[M_T] = E[M_0] = " + to_string(expectation(m.row(0))));
}

}  // namespace martlab
