#pragma once

// Discrete dual predictable projection B of an adapted process A:
//   B_0 = 0,  B_k = sum_{i<=k} E(A_i - A_{i-1} | F_{i-1}),
// the unique predictable process null at 0 with A - B a martingale.

#include <cstddef>
#include <string>
#include <utility>

#include "martlab/processes.hpp"

namespace martlab {

inline ProcessPath discrete_compensator(const ProcessPath& a) {
  if (auto adapted = is_adapted(a); !adapted)
    throw PreconditionError("discrete_compensator: input is not adapted (" + adapted.detail + ")");
  const auto& f = *a.filtration();
  std::vector<ProcessPath::Row> rows(a.size(), ProcessPath::Row(a.outcome_count(), Rational(0)));
  for (std::size_t k = 1; k < a.size(); ++k) {
    RandomVariable step = conditional_expectation(a.increment(k), f.at(k - 1));
    for (std::size_t w = 0; w < a.outcome_count(); ++w) rows[k][w] = rows[k - 1][w] + step[w];
  }
  ProcessPath b(a.filtration(), std::move(rows));

  if (auto pred = is_predictable(b); !pred)
    throw InternalDefect("discrete_compensator: output not predictable: " + pred.detail);
  if (auto mart = is_martingale(a - b); !mart)
    throw InternalDefect("discrete_compensator: A - B not a martingale: " + mart.detail);
  return b;
}

// Predictable quadratic variation <M> := compensator of a given [M].
inline ProcessPath predictable_bracket(const ProcessPath& qv) { return discrete_compensator(qv); }

// A = xi * 1{T <= k}. Requires T >= 1 everywhere and xi >= 0, F_T-measurable.
inline ProcessPath single_jump_process(const StoppingTime& t, const RandomVariable& xi) {
  const auto& f = *t.filtration();
  if (xi.size() != t.size()) throw PreconditionError("single_jump_process: xi has the wrong length");
  for (std::size_t w = 0; w < t.size(); ++w) {
    if (t[w] && *t[w] == 0)
      throw PreconditionError("single_jump_process: T must be > 0, but T = 0 on outcome " + std::to_string(w));
    if (xi[w] < 0) throw PreconditionError("single_jump_process: xi is negative on outcome " + std::to_string(w));
  }
  // On {T = k}, xi must be constant on F_k-atoms.
  for (std::size_t k = 1; k < f.size(); ++k) {
    const Partition& part = f.at(k);
    for (const auto& block : part.blocks()) {
      const Rational* seen = nullptr;
      for (std::size_t w : block) {
        if (!(t[w] && *t[w] == k)) continue;
        if (seen && *seen != xi[w])
          throw PreconditionError("single_jump_process: xi is not F_T-measurable on {T = " + std::to_string(k) + "}");
        seen = &xi[w];
      }
    }
  }
  return ProcessPath::generate(t.filtration(), [&](std::size_t k, std::size_t w) {
    return t.stopped_by(w, k) ? xi[w] : Rational(0);
  });
}

// Jordan split A - A_0 = A_plus - A_minus into increasing adapted parts null at 0.
inline std::pair<ProcessPath, ProcessPath> jordan_decomposition(const ProcessPath& a) {
  std::vector<ProcessPath::Row> up(a.size(), ProcessPath::Row(a.outcome_count(), Rational(0)));
  auto down = up;
  for (std::size_t k = 1; k < a.size(); ++k)
    for (std::size_t w = 0; w < a.outcome_count(); ++w) {
      Rational d = a.at(k, w) - a.at(k - 1, w);
      up[k][w] = up[k - 1][w] + (d > 0 ? d : Rational(0));
      down[k][w] = down[k - 1][w] + (d < 0 ? Rational(-d) : Rational(0));
    }
  return {ProcessPath(a.filtration(), std::move(up)), ProcessPath(a.filtration(), std::move(down))};
}

// Passed iff B1 == B2, after confirming both are compensators of A.
//
// The difference D = B1 - B2 is predictable, null at 0, and a martingale.
// Predictability gives E(dD_k | F_{k-1}) = dD_k, the martingale property
// gives E(dD_k | F_{k-1}) = 0, so every increment vanishes. The loop below
// runs that induction step by step, reporting the first k where it breaks.
inline VerificationReport compensator_uniqueness_check(const ProcessPath& a, const ProcessPath& b1,
                                                       const ProcessPath& b2) {
  ProcessPath::require_same_filtration(a, b1, "compensator_uniqueness_check");
  ProcessPath::require_same_filtration(a, b2, "compensator_uniqueness_check");
  int index = 1;
  for (const ProcessPath* b : {&b1, &b2}) {
    std::string name = "B" + std::to_string(index++);
    if (auto pred = is_predictable(*b); !pred) {
      pred.detail = "precondition violated: " + name + " is not predictable; " + pred.detail;
      return pred;
    }
    auto initial = measurability_gap(b->row_values(0), Partition::trivial(b->outcome_count()));
    if (Rational v = abs(b->at(0, 0)) + initial.spread; v != 0)
      return VerificationReport::fail(v, Witness{0, {}}, "precondition violated: " + name + " is not null at 0");
    if (auto mart = is_martingale(a - *b); !mart) {
      mart.detail = "precondition violated: A - " + name + " is not a martingale; " + mart.detail;
      return mart;
    }
  }
  const auto& f = *a.filtration();
  ProcessPath d = b1 - b2;
  for (std::size_t k = 1; k < d.size(); ++k) {
    RandomVariable step = d.increment(k);
    RandomVariable projected = conditional_expectation(step, f.at(k - 1));
    if (!(projected == step))
      throw InternalDefect("compensator_uniqueness_check: predictable increment changed under projection");
    for (const auto& block : f.at(k - 1).blocks()) {
      Rational v = abs(projected[block.front()]);
      if (v != 0)
        return VerificationReport::fail(v, Witness{k, block}, "compensators differ at k = " + std::to_string(k));
    }
  }
  return VerificationReport::pass("compensator is unique");
}

}  // namespace martlab
