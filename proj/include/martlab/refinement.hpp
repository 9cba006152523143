#pragma once

// Dyadic coarsening of a fine-grid model and the two approximation pipelines:
// compensators via Mazur-recombined coarse compensators, and [M] via
// recombined N-processes.

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "martlab/compensator.hpp"
#include "martlab/mazur.hpp"
#include "martlab/processes.hpp"
#include "martlab/quadratic.hpp"

namespace martlab {

struct LevelRange {
  std::size_t first = 0;
  std::size_t last = 0;
};

inline Rational dyadic(std::size_t level) {
  Rational r(mpz_class(1) << static_cast<mp_bitcnt_t>(level));
  return Rational(1) / r;
}

// Times k 2^-level for 0 <= k <= horizon 2^level.
struct DyadicGrid {
  std::size_t level = 0;
  Rational horizon = 0;

  DyadicGrid(std::size_t lvl, Rational h) : level(lvl), horizon(std::move(h)) {
    if (horizon < 0) throw ValidationError("horizon", "must be nonnegative");
    Rational k = horizon / dyadic(level);
    if (k.get_den() != 1) throw ValidationError("horizon", "not a point of the level-" + std::to_string(level) + " grid");
  }

  std::size_t steps() const {
    Rational k = horizon / dyadic(level);
    return k.get_num().get_ui();
  }

  std::vector<Rational> times() const {
    std::vector<Rational> t;
    const Rational dt = dyadic(level);
    for (std::size_t k = 0; k <= steps(); ++k) t.push_back(dt * static_cast<long>(k));
    return t;
  }

  bool contains(const Rational& t) const {
    if (t < 0 || t > horizon) return false;
    return Rational(t / dyadic(level)).get_den() == 1;
  }
};

// Level L of a filtration whose times are exactly j 2^-L, j = 0..N.
inline std::size_t grid_level(const Filtration& f) {
  if (f.steps() == 0) return 0;
  const Rational dt = f.times()[1];
  std::size_t level = 0;
  while (level <= 62 && dyadic(level) != dt) ++level;
  if (level > 62) throw ValidationError("filtration.times", "first step is not of the form 2^-n");
  for (std::size_t j = 0; j < f.size(); ++j)
    if (f.times()[j] != dt * static_cast<long>(j))
      throw ValidationError("filtration.times[" + std::to_string(j) + "]", "times are not an equally spaced dyadic grid");
  return level;
}

inline DyadicGrid grid_of(const Filtration& f) { return DyadicGrid(grid_level(f), f.times().back()); }

namespace detail {

inline std::size_t stride(std::size_t fine_level, std::size_t level) { return std::size_t{1} << (fine_level - level); }

inline FiltrationPtr coarsen_filtration(const Filtration& f, std::size_t level) {
  const std::size_t fine = grid_level(f);
  if (level > fine) throw PreconditionError("coarsen: level " + std::to_string(level) + " above the fine level " +
                                            std::to_string(fine));
  const std::size_t r = stride(fine, level);
  if (f.steps() % r != 0)
    throw PreconditionError("coarsen: horizon is not a point of the level-" + std::to_string(level) + " grid");
  std::vector<Rational> times;
  std::vector<Partition> parts;
  for (std::size_t j = 0; j < f.size(); j += r) {
    times.push_back(f.times()[j]);
    parts.push_back(f.at(j));
  }
  return std::make_shared<const Filtration>(f.space(), std::move(times), std::move(parts));
}

}  // namespace detail

// Level-n skeleton: rows and partitions at the times k 2^-n.
inline ProcessPath coarsen(const ProcessPath& x, std::size_t level) {
  const std::size_t fine = grid_level(*x.filtration());
  FiltrationPtr f = detail::coarsen_filtration(*x.filtration(), level);
  const std::size_t r = detail::stride(fine, level);
  std::vector<ProcessPath::Row> rows;
  for (std::size_t j = 0; j < x.size(); j += r) rows.push_back(x.row_values(j));
  return ProcessPath(std::move(f), std::move(rows));
}

// Right-constant lift: X_t = X_{t_k} on [t_k, t_{k+1}).
inline ProcessPath lift_right_constant(const ProcessPath& coarse, const FiltrationPtr& fine) {
  const std::size_t r = detail::stride(grid_level(*fine), grid_level(*coarse.filtration()));
  std::vector<ProcessPath::Row> rows;
  for (std::size_t j = 0; j < fine->size(); ++j) rows.push_back(coarse.row_values(j / r));
  return ProcessPath(fine, std::move(rows));
}

// Left-continuous lift of a predictable path: X_t = X_{t_{k+1}} on (t_k, t_{k+1}].
// This is the version for which X_S = X_{S_n} with S_n the grid point above S.
inline ProcessPath lift_left_continuous(const ProcessPath& coarse, const FiltrationPtr& fine) {
  const std::size_t r = detail::stride(grid_level(*fine), grid_level(*coarse.filtration()));
  std::vector<ProcessPath::Row> rows;
  for (std::size_t j = 0; j < fine->size(); ++j) rows.push_back(coarse.row_values((j + r - 1) / r));
  return ProcessPath(fine, std::move(rows));
}

struct ConvergenceRow {
  std::size_t level = 0;
  Rational sup_error = 0;
  Rational terminal_error = 0;
  std::optional<Rational> jump_error;  // qv pipeline only
  double alpha = 0;
  ConvexWeights weights;  // over levels start_index + first ...
};

struct ConvergenceTable {
  std::string pipeline;
  std::size_t n_max = 0;
  std::size_t window = 0;
  std::vector<ConvergenceRow> rows;
  MazurCertificate mazur;
  bool invariants_hold = true;
  std::vector<std::string> notes;

  bool top_exact() const {
    if (rows.empty()) return false;
    const auto& top = rows.back();
    return top.sup_error == 0 && top.terminal_error == 0 && (!top.jump_error || *top.jump_error == 0);
  }

  // Errors nonincreasing over the last three levels.
  bool tail_nonincreasing() const {
    const std::size_t from = rows.size() > 3 ? rows.size() - 3 : 0;
    for (std::size_t i = from + 1; i < rows.size(); ++i) {
      const auto& p = rows[i - 1];
      const auto& r = rows[i];
      if (r.sup_error > p.sup_error || r.terminal_error > p.terminal_error) return false;
      if (r.jump_error && p.jump_error && *r.jump_error > *p.jump_error) return false;
    }
    return true;
  }

  bool passed() const { return top_exact() && tail_nonincreasing() && invariants_hold; }
};

namespace detail {

inline ProcessPath prepare_fine(const ProcessPath& x, const LevelRange& levels, const char* op) {
  const std::size_t fine = grid_level(*x.filtration());
  if (levels.first > levels.last) throw PreconditionError(std::string(op) + ": empty level range");
  if (levels.last > fine)
    throw PreconditionError(std::string(op) + ": top level " + std::to_string(levels.last) +
                            " exceeds the model's level " + std::to_string(fine));
  // Validate every requested level up front.
  for (std::size_t i = levels.first; i <= levels.last; ++i) coarsen_filtration(*x.filtration(), i);
  return levels.last == fine ? x : coarsen(x, levels.last);
}

inline Rational sup_abs(const ProcessPath& x, const ProcessPath& y) {
  Rational s = 0;
  for (std::size_t k = 0; k < x.size(); ++k)
    for (std::size_t w = 0; w < x.outcome_count(); ++w) s = max(s, abs(x.at(k, w) - y.at(k, w)));
  return s;
}

inline Rational terminal_abs(const ProcessPath& x, const ProcessPath& y) {
  Rational s = 0;
  for (std::size_t w = 0; w < x.outcome_count(); ++w) s = max(s, abs(x.at(x.steps(), w) - y.at(y.steps(), w)));
  return s;
}

inline ProcessPath recombine(const std::vector<ProcessPath>& paths, const ConvexWeights& w) {
  ProcessPath c = w.exact[0] * paths[w.start_index];
  for (std::size_t i = 1; i < w.exact.size(); ++i) c = c + w.exact[i] * paths[w.start_index + i];
  return c;
}

inline void window_note(ConvergenceTable& t) {
  if (t.window == 1) t.notes.push_back("window 1: degenerate Mazur step, each row uses its own level only");
}

}  // namespace detail

// A^i = A on the level-i grid, B^i its compensator lifted left-continuously,
// C^n = sum_i lambda^n_i B^i with weights from the Mazur sequence of
// A_inf - B^i_inf. Errors are against the exact compensator at the top level.
inline ConvergenceTable compensator_pipeline(const ProcessPath& a, const LevelRange& levels, std::size_t window,
                                             const MazurOptions& opt = {}) {
  if (!is_adapted(a)) throw PreconditionError("compensator_pipeline: A is not adapted");
  if (!is_increasing(a)) throw PreconditionError("compensator_pipeline: A is not increasing");
  ProcessPath fine = detail::prepare_fine(a, levels, "compensator_pipeline");
  const FiltrationPtr& ff = fine.filtration();
  ProcessPath b = discrete_compensator(fine);

  std::vector<ProcessPath> lifted;
  std::vector<RandomVariable> terminal_martingales;
  for (std::size_t i = levels.first; i <= levels.last; ++i) {
    ProcessPath bi = discrete_compensator(coarsen(fine, i));
    lifted.push_back(lift_left_continuous(bi, ff));
    terminal_martingales.push_back(fine.terminal() - bi.terminal());
  }
  auto [weights, cert] = detail::mazur_core(terminal_martingales, window, opt);

  ConvergenceTable t;
  t.pipeline = "compensator";
  t.n_max = levels.last;
  t.window = window;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    ProcessPath c = detail::recombine(lifted, weights[j]);
    ConvergenceRow row;
    row.level = levels.first + j;
    row.sup_error = detail::sup_abs(c, b);
    row.terminal_error = detail::terminal_abs(c, b);
    row.alpha = cert.alpha_sequence[j];
    row.weights = weights[j];
    t.rows.push_back(std::move(row));
  }
  t.invariants_hold = cert.ok();
  if (!cert.ok()) t.notes.push_back("Mazur certificate failed");
  t.mazur = std::move(cert);
  detail::window_note(t);
  return t;
}

// N^i_t = 2 sum_k M_{t_{k-1}} (M_{t ^ t_k} - M_{t_{k-1}}) over the level-i
// grid, evaluated at every fine time.
inline ProcessPath n_process_on_fine_grid(const ProcessPath& m, std::size_t level) {
  const std::size_t r = detail::stride(grid_level(*m.filtration()), level);
  std::vector<ProcessPath::Row> rows(m.size(), ProcessPath::Row(m.outcome_count(), Rational(0)));
  for (std::size_t j = 1; j < m.size(); ++j) {
    const std::size_t base = (j - 1) / r * r;  // last coarse point strictly before j
    for (std::size_t w = 0; w < m.outcome_count(); ++w)
      rows[j][w] = rows[base][w] + 2 * m.at(base, w) * (m.at(j, w) - m.at(base, w));
  }
  return ProcessPath(m.filtration(), std::move(rows));
}

inline ConvergenceTable qv_pipeline(const ProcessPath& m, const LevelRange& levels, std::size_t window,
                                    const MazurOptions& opt = {}) {
  if (!is_adapted(m)) throw PreconditionError("qv_pipeline: M is not adapted");
  if (!is_martingale(m)) throw PreconditionError("qv_pipeline: M is not a martingale");
  ProcessPath fine = detail::prepare_fine(m, levels, "qv_pipeline");
  ProcessPath qv = quadratic_variation(fine);
  Rational c = 0;
  for (const auto& row : fine.values())
    for (const auto& v : row) c = max(c, abs(v));
  const Rational energy_bound = 4 * c * c * l2_norm_sq(fine.terminal());

  ConvergenceTable t;
  t.pipeline = "qv";
  t.n_max = levels.last;
  t.window = window;

  std::vector<ProcessPath> ns;
  std::vector<RandomVariable> terminals;
  for (std::size_t i = levels.first; i <= levels.last; ++i) {
    ProcessPath coarse_n = n_process(coarsen(fine, i));
    ProcessPath ni = n_process_on_fine_grid(fine, i);
    if (!(coarsen(ni, i) == coarse_n)) throw InternalDefect("qv_pipeline: fine-grid N disagrees with n_process");
    if (!is_martingale(coarse_n)) {
      t.invariants_hold = false;
      t.notes.push_back("N at level " + std::to_string(i) + " is not a martingale");
    }
    if (l2_norm_sq(coarse_n.terminal()) > energy_bound) {
      t.invariants_hold = false;
      t.notes.push_back("E[N_inf^2] <= 4c^2 E[M_inf^2] fails at level " + std::to_string(i));
    }
    terminals.push_back(ni.terminal());
    ns.push_back(std::move(ni));
  }
  auto [weights, cert] = detail::mazur_core(terminals, window, opt);

  ProcessPath m0 = ProcessPath::generate(fine.filtration(), [&](std::size_t, std::size_t w) { return fine.at(0, w); });
  ProcessPath base = fine * fine - m0 * m0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    ProcessPath an = base - detail::recombine(ns, weights[j]);
    ConvergenceRow row;
    row.level = levels.first + j;
    row.sup_error = detail::sup_abs(an, qv);
    row.terminal_error = detail::terminal_abs(an, qv);
    Rational jump = 0;
    for (std::size_t k = 1; k < fine.size(); ++k)
      for (std::size_t w = 0; w < fine.outcome_count(); ++w) {
        Rational dm = fine.at(k, w) - fine.at(k - 1, w);
        jump = max(jump, abs(an.at(k, w) - an.at(k - 1, w) - dm * dm));
      }
    row.jump_error = jump;
    row.alpha = cert.alpha_sequence[j];
    row.weights = weights[j];
    t.rows.push_back(std::move(row));
  }
  if (!cert.ok()) {
    t.invariants_hold = false;
    t.notes.push_back("Mazur certificate failed");
  }
  t.mazur = std::move(cert);
  detail::window_note(t);
  return t;
}

struct StoppingLevelRow {
  std::size_t level = 0;
  Rational identity_violation = 0;  // max |B^n_S - B^n_{S_n}|
  Rational discrepancy = 0;         // |E B^n_S - E B_S|
};

struct StoppingLimsupTable {
  std::vector<StoppingLevelRow> rows;
  Rational expected_b_s = 0;
};

// S_n = grid point of level n with t_{k-1} < S <= t_k (S_n = 0 when S = 0).
inline StoppingTime discretize_up(const StoppingTime& s, const FiltrationPtr& coarse) {
  const std::size_t r = detail::stride(grid_level(*s.filtration()), grid_level(*coarse));
  std::vector<StoppingTime::Index> idx(s.size());
  for (std::size_t w = 0; w < s.size(); ++w) idx[w] = (*s[w] + r - 1) / r;
  return StoppingTime(coarse, std::move(idx));
}

inline StoppingLimsupTable limsup_table(const ProcessPath& a, const StoppingTime& s, const LevelRange& levels) {
  if (!is_adapted(a)) throw PreconditionError("limsup_at_stopping_time_check: A is not adapted");
  if (!is_increasing(a)) throw PreconditionError("limsup_at_stopping_time_check: A is not increasing");
  require_compatible(a, s, "limsup_at_stopping_time_check");
  if (!s.is_finite()) throw PreconditionError("limsup_at_stopping_time_check: S is infinite somewhere");
  const std::size_t fine = grid_level(*a.filtration());
  if (levels.first > levels.last || levels.last > fine)
    throw PreconditionError("limsup_at_stopping_time_check: level range outside [0, " + std::to_string(fine) + "]");

  StoppingLimsupTable t;
  ProcessPath b = discrete_compensator(a);
  t.expected_b_s = expectation(sample_at(b, s));
  for (std::size_t n = levels.first; n <= levels.last; ++n) {
    ProcessPath bn = discrete_compensator(coarsen(a, n));
    ProcessPath lifted = lift_left_continuous(bn, a.filtration());
    StoppingTime sn = discretize_up(s, bn.filtration());
    const std::size_t r = detail::stride(fine, n);
    StoppingLevelRow row;
    row.level = n;
    std::vector<Rational> bs(s.size());
    for (std::size_t w = 0; w < s.size(); ++w) {
      const std::size_t j = *s[w];
      // sum_k B^n_{t_{k+1}} 1(t_k < S <= t_{k+1}), and B^n_0 on {S = 0}
      Rational by_sum = j == 0 ? bn.at(0, w) : Rational(0);
      for (std::size_t k = 0; k < bn.steps(); ++k)
        if (k * r < j && j <= (k + 1) * r) by_sum += bn.at(k + 1, w);
      bs[w] = lifted.at(j, w);
      Rational at_sn = bn.at(*sn[w], w);
      row.identity_violation = max(row.identity_violation, max(abs(bs[w] - at_sn), abs(by_sum - at_sn)));
    }
    row.discrepancy = abs(expectation(RandomVariable(a.space(), std::move(bs))) - t.expected_b_s);
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline VerificationReport limsup_at_stopping_time_check(const ProcessPath& a, const StoppingTime& s,
                                                        const LevelRange& levels) {
  StoppingLimsupTable t = limsup_table(a, s, levels);
  Rational violation = 0;
  std::string detail;
  for (const auto& row : t.rows) {
    if (row.identity_violation > 0 && detail.empty())
      detail = "B^n_S != B^n_{S_n} at level " + std::to_string(row.level);
    violation = max(violation, row.identity_violation);
  }
  if (t.rows.back().discrepancy != 0) {
    if (detail.empty()) detail = "E B^n_S differs from E B_S at the top level";
    violation = max(violation, t.rows.back().discrepancy);
  }
  if (detail.empty()) {
    detail = "identity exact at every level; |E B^n_S - E B_S| by level:";
    for (const auto& row : t.rows) detail += " " + to_string(row.discrepancy);
  }
  return VerificationReport::from_violation(violation, std::nullopt, detail);
}

}  // namespace martlab
