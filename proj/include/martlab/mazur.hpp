#pragma once

// Forward convex combinations of an L2-bounded sequence, chosen to minimize
// E[Z^2] over shrinking tails, with the Cauchy bookkeeping checked exactly.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "martlab/linalg.hpp"
#include "martlab/prob_core.hpp"

namespace martlab {

struct ConvexWeights {
  std::size_t start_index = 0;
  std::vector<double> weights;
  // Same weights as exact rationals summing to exactly 1. When the KKT
  // refinement succeeds these are the exact minimizer.
  std::vector<Rational> exact;

  std::size_t size() const { return weights.size(); }
};

struct MazurOptions {
  double l2_cap = 1e12;
  // Rational KKT over all supports instead of Frank-Wolfe + refinement.
  bool exact = false;
  double gap_tolerance = 1e-10;
  std::size_t max_iterations = 100000;
};

struct TailMinimum {
  ConvexWeights weights;
  double value = 0;
  // True when `exact_value` is the exact minimum (verified KKT point).
  bool kkt_certified = false;
  Rational exact_value = 0;
  std::size_t iterations = 0;
};

struct PairwiseBound {
  std::size_t n = 0, m = 0;
  Rational lhs;  // E[(Y_n - Y_m)^2]
  Rational rhs;  // 2(eps_n + eps_m) + 2(alpha_m - alpha_n)
  bool holds = false;
};

struct MazurCertificate {
  std::vector<double> alpha_sequence;
  std::vector<Rational> exact_alpha;  // rationalized when not certified
  bool exact = false;                 // every alpha is a certified exact minimum
  std::vector<Rational> energies;     // E[Y_n^2]
  std::vector<PairwiseBound> pairwise_bound_checks;
  bool alpha_monotone = false;
  bool parallelogram_exact = false;
  bool bounds_hold = false;
  Rational sup_l2 = 0;
  Rational parallelogram_gap = 0;

  // Largest amount by which any of the three certified claims fails.
  Rational worst_violation(const Rational& tolerance = 0) const {
    Rational v = parallelogram_gap;
    for (std::size_t n = 0; n + 1 < exact_alpha.size(); ++n)
      v = max(v, Rational(exact_alpha[n] - exact_alpha[n + 1] - tolerance));
    for (const auto& pb : pairwise_bound_checks)
      if (!pb.holds) v = max(v, Rational(pb.lhs - pb.rhs));
    return v;
  }

  bool ok() const { return alpha_monotone && parallelogram_exact && bounds_hold; }
};

inline Matrix<Rational> gram_matrix(const std::vector<RandomVariable>& xs, std::size_t n, std::size_t window) {
  Matrix<Rational> g(window, std::vector<Rational>(window));
  for (std::size_t i = 0; i < window; ++i)
    for (std::size_t j = i; j < window; ++j) g[i][j] = g[j][i] = l2_inner(xs[n + i], xs[n + j]);
  return g;
}

inline RandomVariable combine(const std::vector<RandomVariable>& xs, const ConvexWeights& w) {
  if (w.exact.empty() || w.start_index + w.exact.size() > xs.size())
    throw PreconditionError("combine: weights do not fit the sequence");
  RandomVariable z = w.exact[0] * xs[w.start_index];
  for (std::size_t i = 1; i < w.exact.size(); ++i) z = z + w.exact[i] * xs[w.start_index + i];
  return z;
}

namespace detail {

inline Rational quad_form(const Matrix<Rational>& g, const std::vector<Rational>& l) {
  Rational s = 0;
  for (std::size_t i = 0; i < l.size(); ++i) {
    if (l[i] == 0) continue;
    Rational row = 0;
    for (std::size_t j = 0; j < l.size(); ++j) row += g[i][j] * l[j];
    s += l[i] * row;
  }
  return s;
}

// Solve the bordered system on `support` and verify KKT exactly:
//   (G l)_i = mu on the support, >= mu off it, l >= 0, sum l = 1.
inline std::optional<std::vector<Rational>> kkt_point(const Matrix<Rational>& g, const std::vector<std::size_t>& support) {
  const std::size_t s = support.size(), w = g.size();
  Matrix<Rational> a(s + 1, std::vector<Rational>(s + 1));
  std::vector<Rational> b(s + 1);
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = 0; j < s; ++j) a[i][j] = g[support[i]][support[j]];
    a[i][s] = -1;
    a[s][i] = 1;
  }
  b[s] = 1;
  auto sol = solve_linear(std::move(a), std::move(b));
  if (!sol) return std::nullopt;
  std::vector<Rational> l(w);
  for (std::size_t i = 0; i < s; ++i) {
    if ((*sol)[i] < 0) return std::nullopt;
    l[support[i]] = (*sol)[i];
  }
  const Rational& mu = (*sol)[s];
  for (std::size_t i = 0; i < w; ++i) {
    Rational gi = 0;
    for (std::size_t j = 0; j < w; ++j) gi += g[i][j] * l[j];
    if (gi < mu) return std::nullopt;
  }
  return l;
}

// Away-step Frank-Wolfe on min l'Gl over the simplex. Starts at e_1; ties go
// to the lowest index.
inline std::vector<double> frank_wolfe(const Matrix<double>& g, const MazurOptions& opt, std::size_t& iterations) {
  const std::size_t w = g.size();
  std::vector<double> l(w, 0.0), gl(w);
  l[0] = 1;
  auto refresh = [&] {
    for (std::size_t i = 0; i < w; ++i) {
      gl[i] = 0;
      for (std::size_t j = 0; j < w; ++j) gl[i] += g[i][j] * l[j];
    }
  };
  refresh();
  iterations = 0;
  for (; iterations < opt.max_iterations; ++iterations) {
    double f = 0;
    for (std::size_t i = 0; i < w; ++i) f += l[i] * gl[i];
    std::size_t s = 0;
    for (std::size_t i = 1; i < w; ++i)
      if (gl[i] < gl[s]) s = i;
    std::size_t v = w;
    for (std::size_t i = 0; i < w; ++i)
      if (l[i] > 0 && (v == w || gl[i] > gl[v])) v = i;
    double fw_gap = f - gl[s];
    if (2 * fw_gap <= opt.gap_tolerance) break;
    double away_gap = gl[v] - f;
    // direction d = e_s - l (toward) or l - e_v (away)
    bool toward = fw_gap >= away_gap;
    double slope, curv, gmax;
    if (toward) {
      slope = gl[s] - f;
      curv = g[s][s] - 2 * gl[s] + f;
      gmax = 1;
    } else {
      slope = f - gl[v];
      curv = f - 2 * gl[v] + g[v][v];
      gmax = l[v] < 1 ? l[v] / (1 - l[v]) : std::numeric_limits<double>::infinity();
    }
    double gamma = curv > 0 ? std::min(gmax, -slope / curv) : gmax;
    if (!(gamma > 0) || !std::isfinite(gamma)) break;
    if (toward) {
      for (auto& x : l) x *= 1 - gamma;
      l[s] += gamma;
    } else {
      for (auto& x : l) x *= 1 + gamma;
      l[v] -= gamma;
      if (gamma == gmax || l[v] < 0) l[v] = 0;
    }
    refresh();
  }
  return l;
}

inline std::vector<Rational> rationalize(const std::vector<double>& l) {
  std::vector<Rational> r(l.size());
  Rational total = 0;
  for (std::size_t i = 0; i < l.size(); ++i) {
    r[i] = l[i] > 0 ? from_double(l[i]) : Rational(0);
    total += r[i];
  }
  if (total == 0) throw InternalDefect("rationalize: all weights vanished");
  for (auto& x : r) x /= total;
  return r;
}

inline TailMinimum certified(const Matrix<Rational>& g, std::vector<Rational> l, std::size_t n) {
  TailMinimum out;
  out.kkt_certified = true;
  out.exact_value = quad_form(g, l);
  out.value = to_double(out.exact_value);
  out.weights.start_index = n;
  for (const auto& x : l) out.weights.weights.push_back(to_double(x));
  out.weights.exact = std::move(l);
  return out;
}

// Enumerate supports by size then lexicographically; the first exact KKT
// point is the minimum (the problem is convex).
inline std::optional<std::vector<Rational>> exhaustive_kkt(const Matrix<Rational>& g) {
  const std::size_t w = g.size();
  for (std::size_t size = 1; size <= w; ++size) {
    std::vector<bool> pick(w, false);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(size), true);
    do {
      std::vector<std::size_t> support;
      for (std::size_t i = 0; i < w; ++i)
        if (pick[i]) support.push_back(i);
      if (auto l = kkt_point(g, support)) return l;
    } while (std::prev_permutation(pick.begin(), pick.end()));
  }
  return std::nullopt;
}

inline TailMinimum minimize_gram(const Matrix<Rational>& g, std::size_t n, const MazurOptions& opt) {
  const std::size_t w = g.size();
  if (opt.exact) {
    if (w > 12) throw PreconditionError("exact Mazur mode supports windows of at most 12");
    auto l = exhaustive_kkt(g);
    if (!l) throw InternalDefect("exhaustive KKT enumeration found no minimizer");
    return certified(g, std::move(*l), n);
  }
  Matrix<double> gd(w, std::vector<double>(w));
  for (std::size_t i = 0; i < w; ++i)
    for (std::size_t j = 0; j < w; ++j) gd[i][j] = to_double(g[i][j]);
  std::size_t iterations = 0;
  std::vector<double> l = frank_wolfe(gd, opt, iterations);

  // Active-set refinement: try the Frank-Wolfe support, then shrink it by
  // dropping the smallest weight, looking for an exact KKT point.
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < w; ++i)
    if (l[i] > 1e-12) support.push_back(i);
  while (!support.empty()) {
    if (auto exact = kkt_point(g, support)) {
      auto out = certified(g, std::move(*exact), n);
      out.iterations = iterations;
      return out;
    }
    auto smallest = std::min_element(support.begin(), support.end(),
                                     [&](std::size_t a, std::size_t b) { return l[a] < l[b]; });
    support.erase(smallest);
  }

  TailMinimum out;
  out.iterations = iterations;
  out.weights.start_index = n;
  out.weights.exact = rationalize(l);
  for (const auto& x : out.weights.exact) out.weights.weights.push_back(to_double(x));
  out.exact_value = quad_form(g, out.weights.exact);
  out.value = to_double(out.exact_value);
  return out;
}

inline void require_sequence(const std::vector<RandomVariable>& xs) {
  for (std::size_t i = 1; i < xs.size(); ++i) RandomVariable::require_same_space(xs[0], xs[i]);
}

}  // namespace detail

// Minimize E[Z^2] over convex combinations of xs[n .. n+window-1].
inline TailMinimum tail_min_l2(const std::vector<RandomVariable>& xs, std::size_t n, std::size_t window,
                               const MazurOptions& opt = {}) {
  if (window < 1) throw PreconditionError("tail_min_l2: empty window");
  if (n + window > xs.size()) throw PreconditionError("tail_min_l2: window runs past the end of the sequence");
  detail::require_sequence(xs);
  return detail::minimize_gram(gram_matrix(xs, n, window), n, opt);
}

namespace detail {

// Shared core without the length precondition; windows are clipped at the
// end of the sequence, so the last Y is the last element.
// alpha_n minimizes over the whole remaining tail xs[n..], which makes the
// tails nested and the Cauchy estimate valid.
inline std::pair<std::vector<ConvexWeights>, MazurCertificate> mazur_core(const std::vector<RandomVariable>& xs,
                                                                          std::size_t window,
                                                                          const MazurOptions& opt) {
  if (window < 1) throw PreconditionError("mazur_sequence: window must be at least 1");
  if (xs.empty()) throw PreconditionError("mazur_sequence: empty sequence");
  require_sequence(xs);
  const std::size_t len = xs.size();
  MazurCertificate cert;
  for (const auto& x : xs) cert.sup_l2 = max(cert.sup_l2, l2_norm_sq(x));
  if (!(to_double(cert.sup_l2) <= opt.l2_cap))
    throw PreconditionError("mazur_sequence: sup E[X_n^2] = " + to_string(cert.sup_l2) + " exceeds the L2 cap");

  Matrix<Rational> full = gram_matrix(xs, 0, len);
  auto sub = [&](std::size_t from, std::size_t count) {
    Matrix<Rational> g(count, std::vector<Rational>(count));
    for (std::size_t i = 0; i < count; ++i)
      for (std::size_t j = 0; j < count; ++j) g[i][j] = full[from + i][from + j];
    return g;
  };

  std::vector<ConvexWeights> ys;
  std::vector<RandomVariable> yv;
  cert.exact = true;
  for (std::size_t n = 0; n < len; ++n) {
    TailMinimum tail = minimize_gram(sub(n, len - n), n, opt);
    cert.alpha_sequence.push_back(tail.value);
    cert.exact_alpha.push_back(tail.exact_value);
    cert.exact = cert.exact && tail.kkt_certified;
    std::size_t w = std::min(window, len - n);
    TailMinimum y = w == len - n ? tail : minimize_gram(sub(n, w), n, opt);
    cert.energies.push_back(y.exact_value);
    yv.push_back(combine(xs, y.weights));
    ys.push_back(std::move(y.weights));
  }

  // With exact alphas all comparisons are exact; otherwise alpha carries the
  // optimizer's error and gets a 1e-9 allowance.
  const Rational slack_tol = cert.exact ? Rational(0) : from_double(1e-9);
  cert.alpha_monotone = true;
  for (std::size_t n = 0; n + 1 < len; ++n)
    if (cert.exact_alpha[n] > cert.exact_alpha[n + 1] + slack_tol) cert.alpha_monotone = false;

  cert.parallelogram_exact = true;
  cert.bounds_hold = true;
  for (std::size_t n = 0; n < len; ++n)
    for (std::size_t m = n + 1; m < len; ++m) {
      Rational diff = l2_norm_sq(yv[n] - yv[m]);
      Rational para = 2 * cert.energies[n] + 2 * cert.energies[m] - l2_norm_sq(yv[n] + yv[m]);
      if (para != diff) {
        cert.parallelogram_exact = false;
        cert.parallelogram_gap = max(cert.parallelogram_gap, abs(Rational(para - diff)));
      }
      Rational eps_n = cert.energies[n] - cert.exact_alpha[n];
      Rational eps_m = cert.energies[m] - cert.exact_alpha[m];
      PairwiseBound pb{n, m, diff, 2 * (eps_n + eps_m) + 2 * (cert.exact_alpha[m] - cert.exact_alpha[n]), false};
      pb.holds = pb.lhs <= pb.rhs + 4 * slack_tol;
      cert.bounds_hold = cert.bounds_hold && pb.holds;
      cert.pairwise_bound_checks.push_back(std::move(pb));
    }
  return {std::move(ys), std::move(cert)};
}

}  // namespace detail

// Y_n = argmin E[Z^2] over convex combinations of xs[n .. n+window-1]
// (clipped at the end), with the certificate described on MazurCertificate.
inline std::pair<std::vector<ConvexWeights>, MazurCertificate> mazur_sequence(const std::vector<RandomVariable>& xs,
                                                                              std::size_t window,
                                                                              const MazurOptions& opt = {}) {
  if (xs.size() < window + 2)
    throw PreconditionError("mazur_sequence: need at least window + 2 = " + std::to_string(window + 2) +
                            " elements, got " + std::to_string(xs.size()));
  return detail::mazur_core(xs, window, opt);
}

}  // namespace martlab
