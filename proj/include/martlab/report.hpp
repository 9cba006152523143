#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>

#include "martlab/prob_core.hpp"

namespace martlab {

struct Witness {
  std::size_t time_index = 0;
  Block block;  // outcome indices of the offending atom

  bool operator==(const Witness&) const = default;
};

// Outcome of a verification. Invariant: worst_violation == 0 iff passed.
struct VerificationReport {
  bool passed = true;
  Rational worst_violation = 0;
  std::optional<Witness> witness;
  std::string detail;

  static VerificationReport pass(std::string detail = {}) {
    VerificationReport r;
    r.detail = std::move(detail);
    return r;
  }

  static VerificationReport fail(Rational violation, std::optional<Witness> witness,
                                 std::string detail) {
    if (violation <= 0) throw InternalDefect("failed report requires a positive violation");
    VerificationReport r;
    r.passed = false;
    r.worst_violation = std::move(violation);
    r.witness = std::move(witness);
    r.detail = std::move(detail);
    return r;
  }

  // Pass when `violation` is zero, fail otherwise.
  static VerificationReport from_violation(Rational violation, std::optional<Witness> witness,
                                           std::string detail) {
    if (violation == 0) return pass(std::move(detail));
    return fail(abs(violation), std::move(witness), std::move(detail));
  }

  explicit operator bool() const noexcept { return passed; }
};

}  // namespace martlab
