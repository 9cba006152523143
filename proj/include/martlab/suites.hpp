#pragma once

// Verification suites over a loaded model, and the structured report format.
// Checks are returned sorted by (suite, name) so output never depends on
// evaluation order.

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "martlab/compensator.hpp"
#include "martlab/mazur.hpp"
#include "martlab/model_io.hpp"
#include "martlab/quadratic.hpp"
#include "martlab/refinement.hpp"
#include "martlab/step_function.hpp"

namespace martlab {

struct CheckResult {
  std::string suite;
  std::string name;
  VerificationReport report;
};

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"appendix", "compensator", "martingale", "mazur", "quadratic"};
  return names;
}

struct SuiteOptions {
  std::size_t window = 16;
  MazurOptions mazur;
};

namespace suites {

// Largest X_{k-1} - X_k over the path; 0 iff increasing.
inline Rational worst_decrease(const ProcessPath& x) {
  Rational worst = 0;
  for (std::size_t k = 1; k < x.size(); ++k)
    for (std::size_t w = 0; w < x.outcome_count(); ++w) worst = max(worst, Rational(x.at(k - 1, w) - x.at(k, w)));
  return worst;
}

inline bool claims_adapted(const NamedProcess& p) { return p.kind != "process"; }

inline VerificationReport precondition(VerificationReport r, const std::string& what) {
  r.detail = "precondition violated: " + what + "; " + r.detail;
  return r;
}

// Stopping times capped at the horizon, so optional sampling always applies.
inline StoppingTime bounded(const StoppingTime& t) { return t.capped(t.filtration()->steps()); }

inline void martingale_suite(const Model& m, std::vector<CheckResult>& out) {
  const std::string s = "martingale";
  for (const auto& p : m.processes) {
    if (p.kind == "predictable") {
      out.push_back({s, p.name + ": predictable", is_predictable(p.path)});
      continue;
    }
    if (!claims_adapted(p)) continue;
    auto adapted = is_adapted(p.path);
    out.push_back({s, p.name + ": adapted", adapted});
    if (p.kind == "increasing") {
      out.push_back({s, p.name + ": increasing",
                     VerificationReport::from_violation(worst_decrease(p.path), std::nullopt, "largest decrease")});
    }
    if (p.kind != "martingale") continue;
    if (!adapted) {
      out.push_back({s, p.name + ": is_martingale", precondition(adapted, "not adapted")});
      continue;
    }
    out.push_back({s, p.name + ": is_martingale", is_martingale(p.path)});
    for (const auto& t : m.stopping_times)
      out.push_back({s, p.name + ": optional_sampling[" + t.name + "]", optional_sampling_check(p.path, bounded(t.time))});
  }
}

inline void compensator_suite(const Model& m, std::vector<CheckResult>& out) {
  const std::string s = "compensator";
  for (const auto& p : m.processes) {
    if (p.kind != "increasing" && p.kind != "adapted") continue;
    auto adapted = is_adapted(p.path);
    if (!adapted) {
      out.push_back({s, p.name + ": compensator", precondition(adapted, "not adapted")});
      continue;
    }
    ProcessPath b = discrete_compensator(p.path);
    out.push_back({s, p.name + ": B predictable", is_predictable(b)});
    out.push_back({s, p.name + ": A - B martingale", is_martingale(p.path - b)});
    out.push_back({s, p.name + ": uniqueness", compensator_uniqueness_check(p.path, b, b)});
    if (p.kind == "increasing") {
      out.push_back({s, p.name + ": B increasing",
                     VerificationReport::from_violation(worst_decrease(b), std::nullopt, "largest decrease of B")});
      Rational gap = expectation(b.terminal()) - expectation(p.path.terminal() - p.path.row(0));
      out.push_back({s, p.name + ": E B_N = E (A_N - A_0)",
                     VerificationReport::from_violation(gap, std::nullopt,
                                                        "E B_N = " + to_string(expectation(b.terminal())))});
    }
    for (const auto& t : m.stopping_times) {
      ProcessPath lhs = discrete_compensator(stopped_process(p.path, t.time));
      ProcessPath rhs = stopped_process(b, t.time);
      Rational worst = 0;
      for (std::size_t k = 0; k < lhs.size(); ++k)
        for (std::size_t w = 0; w < lhs.outcome_count(); ++w) worst = max(worst, abs(Rational(lhs.at(k, w) - rhs.at(k, w))));
      out.push_back({s, p.name + ": stopping commutes[" + t.name + "]",
                     VerificationReport::from_violation(worst, std::nullopt, "compensator of A^T equals B^T")});
    }
  }
  for (const auto& p : m.processes) {
    if (p.kind != "martingale" || !is_adapted(p.path)) continue;
    ProcessPath bracket = predictable_bracket(quadratic_variation(p.path));
    auto r = is_martingale(p.path * p.path - bracket);
    r.detail = "M^2 - <M>: " + r.detail;
    out.push_back({s, p.name + ": predictable bracket", r});
  }
}

inline void quadratic_suite(const Model& m, std::vector<CheckResult>& out) {
  const std::string s = "quadratic";
  std::vector<const NamedProcess*> adapted;
  for (const auto& p : m.processes)
    if (claims_adapted(p) && is_adapted(p.path)) adapted.push_back(&p);
  for (const auto* p : adapted) {
    const ProcessPath& x = p->path;
    ProcessPath qv = quadratic_variation(x);
    ProcessPath n = n_process(x);
    ProcessPath x0 = ProcessPath::generate(x.filtration(), [&](std::size_t, std::size_t w) { return x.at(0, w); });
    Rational gap = 0;
    ProcessPath lhs = x * x - x0 * x0 - n - qv;
    for (const auto& row : lhs.values())
      for (const auto& v : row) gap = max(gap, abs(v));
    out.push_back({s, p->name + ": X^2 - X_0^2 = N + [X]",
                   VerificationReport::from_violation(gap, std::nullopt, "N-process telescoping identity")});
    if (p->kind != "martingale") continue;
    auto mart = is_martingale(x);
    if (!mart) {
      out.push_back({s, p->name + ": M^2 - [M] martingale", precondition(mart, "not a martingale")});
      continue;
    }
    auto r = is_martingale(x * x - qv);
    out.push_back({s, p->name + ": M^2 - [M] martingale", r});
    out.push_back({s, p->name + ": N martingale", is_martingale(n)});
    Rational lhs_e = l2_norm_sq(x.terminal()) - l2_norm_sq(x.row(0));
    Rational rhs_e = expectation(qv.terminal());
    out.push_back({s, p->name + ": energy identity",
                   VerificationReport::from_violation(lhs_e - rhs_e, std::nullopt,
                                                      "E[M_N^2] - E[M_0^2] = " + to_string(lhs_e) +
                                                          ", E[[M]_N] = " + to_string(rhs_e))});
    Rational c = 0;
    for (const auto& row : x.values())
      for (const auto& v : row) c = max(c, abs(v));
    ProcessPath half = Rational(1, 2) * n;
    Rational excess = 0;
    for (std::size_t k = 0; k < x.size(); ++k)
      excess = max(excess, Rational(l2_norm_sq(half.row(k)) - c * c * l2_norm_sq(x.row(k))));
    out.push_back({s, p->name + ": E[(N_k/2)^2] <= c^2 E[M_k^2]",
                   VerificationReport::from_violation(excess, std::nullopt, "c = " + to_string(c))});
  }
  for (std::size_t i = 0; i < adapted.size(); ++i)
    for (std::size_t j = i; j < adapted.size(); ++j)
      out.push_back({s, "integration by parts(" + adapted[i]->name + ", " + adapted[j]->name + ")",
                     integration_by_parts_check(adapted[i]->path, adapted[j]->path)});
  std::vector<const NamedProcess*> marts;
  for (const auto* p : adapted)
    if (p->kind == "martingale" && is_martingale(p->path)) marts.push_back(p);
  for (std::size_t i = 0; i < marts.size(); ++i)
    for (std::size_t j = i + 1; j < marts.size(); ++j)
      out.push_back({s, "decomposition(" + marts[i]->name + ", " + marts[j]->name + ")",
                     decomposition_check(marts[i]->path, marts[j]->path)});
}

// Mazur certificate on the row sequence X_0, ..., X_N of each process.
inline void mazur_suite(const Model& m, const SuiteOptions& opt, std::vector<CheckResult>& out) {
  const std::string s = "mazur";
  for (const auto& p : m.processes) {
    std::vector<RandomVariable> rows;
    for (std::size_t k = 0; k < p.path.size(); ++k) rows.push_back(p.path.row(k));
    if (rows.size() < 3) {
      out.push_back({s, p.name + ": certificate", VerificationReport::pass("skipped: fewer than 3 time points")});
      continue;
    }
    std::size_t window = std::min(opt.window, rows.size() - 2);
    auto [weights, cert] = mazur_sequence(rows, window, opt.mazur);
    std::string detail = "window " + std::to_string(window) + (cert.exact ? ", exact KKT" : ", floating point") +
                         ", alpha_0 = " + to_string(cert.exact_alpha.front());
    Rational worst = cert.worst_violation(cert.exact ? Rational(0) : from_double(1e-9));
    if (cert.ok()) {
      out.push_back({s, p.name + ": certificate", VerificationReport::pass(detail)});
    } else {
      std::string why = !cert.alpha_monotone ? "alpha not monotone" : !cert.parallelogram_exact ? "parallelogram identity fails" : "pairwise bound fails";
      out.push_back({s, p.name + ": certificate",
                     VerificationReport::fail(worst, std::nullopt, why + "; " + detail)});
    }
  }
}

// Path-by-path step functions: f_k = dA_k 1_{[t_k, inf)}.
inline std::vector<StepFunction> path_increments(const ProcessPath& a, std::size_t w) {
  std::vector<StepFunction> fs;
  const auto& t = a.filtration()->times();
  for (std::size_t k = 1; k < a.size(); ++k) fs.push_back(StepFunction::indicator(t[k], a.at(k, w) - a.at(k - 1, w)));
  return fs;
}

inline void appendix_suite(const Model& m, std::vector<CheckResult>& out) {
  const std::string s = "appendix";
  for (const auto& p : m.processes) {
    std::vector<RandomVariable> rows;
    for (std::size_t k = 0; k < p.path.size(); ++k) rows.push_back(p.path.row(k));
    out.push_back({s, p.name + ": tail sup Fatou", tail_sup_fatou_check(rows, 0)});
    if (p.kind != "increasing" || !is_increasing(p.path)) continue;
    const Rational horizon = m.filtration->times().back();
    VerificationReport sums = VerificationReport::pass("every path");
    VerificationReport jumps = VerificationReport::pass("every path");
    for (std::size_t w = 0; w < p.path.outcome_count(); ++w) {
      auto fs = path_increments(p.path, w);
      auto r = step_sum_convergence_check(fs, horizon);
      if (!r && sums) sums = r;
      std::vector<StepFunction> partial;
      StepFunction acc(0);
      for (const auto& f : fs) partial.push_back(acc = acc + f);
      if (partial.empty()) continue;
      auto j = uniform_jump_convergence_check(partial, partial.back());
      if (!j && jumps) jumps = j;
    }
    out.push_back({s, p.name + ": step sums converge uniformly", sums});
    out.push_back({s, p.name + ": partial paths converge with jumps", jumps});
  }
}

}  // namespace suites

inline std::vector<CheckResult> run_suite(const Model& m, const std::string& suite, const SuiteOptions& opt = {}) {
  std::vector<std::string> selected;
  if (suite == "all") {
    selected = suite_names();
  } else if (std::find(suite_names().begin(), suite_names().end(), suite) != suite_names().end()) {
    selected = {suite};
  } else {
    throw ValidationError("suite", "unknown suite '" + suite + "'");
  }
  std::vector<CheckResult> out;
  for (const auto& s : selected) {
    if (s == "martingale") suites::martingale_suite(m, out);
    if (s == "compensator") suites::compensator_suite(m, out);
    if (s == "quadratic") suites::quadratic_suite(m, out);
    if (s == "mazur") suites::mazur_suite(m, opt, out);
    if (s == "appendix") suites::appendix_suite(m, out);
  }
  std::stable_sort(out.begin(), out.end(), [](const CheckResult& a, const CheckResult& b) {
    return a.suite != b.suite ? a.suite < b.suite : a.name < b.name;
  });
  return out;
}

inline bool all_passed(const std::vector<CheckResult>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.report.passed; });
}

inline Json report_json(const VerificationReport& r) {
  Json j = Json::object();
  j["passed"] = r.passed;
  j["worst_violation"] = to_string(r.worst_violation);
  if (r.witness) {
    j["witness"] = {{"time_index", r.witness->time_index}, {"block", r.witness->block}};
  } else {
    j["witness"] = nullptr;
  }
  j["detail"] = r.detail;
  return j;
}

inline Json checks_json(const std::vector<CheckResult>& checks) {
  Json arr = Json::array();
  for (const auto& c : checks) {
    Json j = Json::object();
    j["suite"] = c.suite;
    j["name"] = c.name;
    Json r = report_json(c.report);
    for (auto& [k, v] : r.items()) j[k] = v;
    arr.push_back(j);
  }
  return arr;
}

inline Json table_json(const ConvergenceTable& t) {
  Json j = Json::object();
  j["pipeline"] = t.pipeline;
  j["n_max"] = t.n_max;
  j["window"] = t.window;
  Json rows = Json::array();
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    Json row = Json::object();
    row["level"] = r.level;
    row["sup_error"] = to_string(r.sup_error);
    row["terminal_error"] = to_string(r.terminal_error);
    if (r.jump_error) row["jump_error"] = to_string(*r.jump_error);
    row["alpha"] = to_string(t.mazur.exact_alpha[i]);
    row["weights_from_level"] = t.rows.front().level + r.weights.start_index;
    Json w = Json::array();
    for (const auto& x : r.weights.exact) w.push_back(to_string(x));
    row["weights"] = w;
    rows.push_back(row);
  }
  j["rows"] = rows;
  j["mazur_exact"] = t.mazur.exact;
  j["top_exact"] = t.top_exact();
  j["tail_nonincreasing"] = t.tail_nonincreasing();
  j["invariants_hold"] = t.invariants_hold;
  j["notes"] = t.notes;
  j["passed"] = t.passed();
  return j;
}

}  // namespace martlab
