#pragma once

// Pathwise quadratic (co)variation, the N-process M_k^2 - M_0^2 - [M]_k,
// discrete predictable integrals and the identities tying them together.

#include <cstddef>
#include <string>
#include <utility>

#include "martlab/processes.hpp"

namespace martlab {

// [X,Y]_k = sum_{i<=k} dX_i dY_i.
inline ProcessPath raw_covariation(const ProcessPath& x, const ProcessPath& y) {
  ProcessPath::require_same_filtration(x, y, "covariation");
  std::vector<ProcessPath::Row> rows(x.size(), ProcessPath::Row(x.outcome_count(), Rational(0)));
  for (std::size_t k = 1; k < x.size(); ++k)
    for (std::size_t w = 0; w < x.outcome_count(); ++w)
      rows[k][w] = rows[k - 1][w] + (x.at(k, w) - x.at(k - 1, w)) * (y.at(k, w) - y.at(k - 1, w));
  return ProcessPath(x.filtration(), std::move(rows));
}

inline ProcessPath quadratic_variation(const ProcessPath& m) {
  ProcessPath qv = raw_covariation(m, m);
  for (std::size_t k = 1; k < m.size(); ++k)
    for (std::size_t w = 0; w < m.outcome_count(); ++w) {
      Rational dm = m.at(k, w) - m.at(k - 1, w);
      if (qv.at(k, w) - qv.at(k - 1, w) != dm * dm)
        throw InternalDefect("quadratic_variation: jump condition d[M] = (dM)^2 violated");
    }
  return qv;
}

inline ProcessPath covariation(const ProcessPath& x, const ProcessPath& y) {
  ProcessPath xy = raw_covariation(x, y);
  ProcessPath polarized = Rational(1, 4) * (raw_covariation(x + y, x + y) - raw_covariation(x - y, x - y));
  if (!(polarized == xy)) throw InternalDefect("covariation: polarization identity violated");
  return xy;
}

// (X_-)_k = X_{k-1} for k >= 1, and 0 at k = 0.
// Row 0 never enters a predictable integral, so 0 keeps the lag predictable
// even when X_0 is random.
inline ProcessPath lag(const ProcessPath& x) {
  std::vector<ProcessPath::Row> rows(x.size(), ProcessPath::Row(x.outcome_count(), Rational(0)));
  for (std::size_t k = 1; k < x.size(); ++k) rows[k] = x.row_values(k - 1);
  return ProcessPath(x.filtration(), std::move(rows));
}

namespace detail {

inline ProcessPath integral_sum(const ProcessPath& h, const ProcessPath& x) {
  std::vector<ProcessPath::Row> rows(x.size(), ProcessPath::Row(x.outcome_count(), Rational(0)));
  for (std::size_t k = 1; k < x.size(); ++k)
    for (std::size_t w = 0; w < x.outcome_count(); ++w)
      rows[k][w] = rows[k - 1][w] + h.at(k, w) * (x.at(k, w) - x.at(k - 1, w));
  return ProcessPath(x.filtration(), std::move(rows));
}

}  // namespace detail

// (H.X)_k = sum_{i=1..k} H_i (X_i - X_{i-1}) for predictable H.
inline ProcessPath stochastic_integral(const ProcessPath& h, const ProcessPath& x) {
  ProcessPath::require_same_filtration(h, x, "stochastic_integral");
  if (auto pred = is_predictable(h); !pred)
    throw PreconditionError("stochastic_integral: integrand is not predictable (" + pred.detail + ")");
  ProcessPath out = detail::integral_sum(h, x);

  // [H.X]_k = sum H_i^2 (dX_i)^2
  ProcessPath qv = raw_covariation(out, out);
  ProcessPath expected = detail::integral_sum(h * h, quadratic_variation(x));
  if (!(qv == expected)) throw InternalDefect("stochastic_integral: [H.X] != H^2 . [X]");

  if (is_adapted(x) && is_martingale(x)) {
    if (auto mart = is_martingale(out); !mart)
      throw InternalDefect("stochastic_integral: H.M lost the martingale property: " + mart.detail);
  }
  return out;
}

// N_k = 2 sum_{i<=k} M_{i-1} (M_i - M_{i-1}); M_k^2 - M_0^2 = N_k + [M]_k.
inline ProcessPath n_process(const ProcessPath& m) {
  if (auto adapted = is_adapted(m); !adapted)
    throw PreconditionError("n_process: input is not adapted (" + adapted.detail + ")");
  ProcessPath n = Rational(2) * detail::integral_sum(lag(m), m);
  ProcessPath qv = quadratic_variation(m);
  for (std::size_t k = 0; k < m.size(); ++k)
    for (std::size_t w = 0; w < m.outcome_count(); ++w) {
      const Rational& x = m.at(k, w);
      const Rational& x0 = m.at(0, w);
      if (x * x - x0 * x0 != n.at(k, w) + qv.at(k, w))
        throw InternalDefect("n_process: telescoping identity M^2 - M_0^2 = N + [M] violated");
    }
  if (is_martingale(m)) {
    if (auto mart = is_martingale(n); !mart)
      throw InternalDefect("n_process: N is not a martingale although M is: " + mart.detail);
  }
  return n;
}

// X_k Y_k - X_0 Y_0 = (X_- . Y)_k + (Y_- . X)_k + [X,Y]_k
inline VerificationReport integration_by_parts_check(const ProcessPath& x, const ProcessPath& y) {
  ProcessPath::require_same_filtration(x, y, "integration_by_parts_check");
  ProcessPath rhs = detail::integral_sum(lag(x), y) + detail::integral_sum(lag(y), x) + raw_covariation(x, y);
  Rational worst = 0;
  std::optional<Witness> witness;
  for (std::size_t k = 0; k < x.size(); ++k)
    for (std::size_t w = 0; w < x.outcome_count(); ++w) {
      Rational lhs = x.at(k, w) * y.at(k, w) - x.at(0, w) * y.at(0, w);
      Rational gap = abs(Rational(lhs - rhs.at(k, w)));
      if (worst < gap) {
        worst = gap;
        witness = Witness{k, {w}};
      }
    }
  return VerificationReport::from_violation(worst, witness,
                                            worst == 0 ? "integration by parts holds"
                                                       : "integration by parts identity fails");
}

// With M = Mb + Mi and A = [Mb] + 2[Mb,Mi] + [Mi], checks that
// Mb^2 - [Mb], Mb Mi - [Mb,Mi], Mi^2 - [Mi] and M^2 - A are martingales,
// and that A coincides with [M].
inline VerificationReport decomposition_check(const ProcessPath& mb, const ProcessPath& mi) {
  ProcessPath::require_same_filtration(mb, mi, "decomposition_check");
  for (auto [name, p] : {std::pair{"Mb", &mb}, std::pair{"Mi", &mi}}) {
    if (auto adapted = is_adapted(*p); !adapted) {
      adapted.detail = std::string("precondition violated: ") + name + " is not adapted; " + adapted.detail;
      return adapted;
    }
    if (auto mart = is_martingale(*p); !mart) {
      mart.detail = std::string("precondition violated: ") + name + " is not a martingale; " + mart.detail;
      return mart;
    }
  }
  ProcessPath qb = quadratic_variation(mb);
  ProcessPath qi = quadratic_variation(mi);
  ProcessPath cross = covariation(mb, mi);
  ProcessPath total = qb + Rational(2) * cross + qi;
  ProcessPath m = mb + mi;

  const std::pair<const char*, ProcessPath> parts[] = {
      {"Mb^2 - [Mb]", mb * mb - qb},
      {"Mb*Mi - [Mb,Mi]", mb * mi - cross},
      {"Mi^2 - [Mi]", mi * mi - qi},
      {"M^2 - A", m * m - total},
  };
  for (const auto& [name, p] : parts) {
    if (auto mart = is_martingale(p); !mart) {
      mart.detail = std::string(name) + " is not a martingale; " + mart.detail;
      return mart;
    }
  }
  ProcessPath qm = quadratic_variation(m);
  Rational worst = 0;
  std::optional<Witness> witness;
  for (std::size_t k = 0; k < m.size(); ++k)
    for (std::size_t w = 0; w < m.outcome_count(); ++w) {
      Rational gap = abs(Rational(total.at(k, w) - qm.at(k, w)));
      if (worst < gap) {
        worst = gap;
        witness = Witness{k, {w}};
      }
    }
  if (worst != 0) return VerificationReport::fail(worst, witness, "[Mb] + 2[Mb,Mi] + [Mi] differs from [M]");
  return VerificationReport::pass("decomposition identity holds; A = [M]");
}

}  // namespace martlab
