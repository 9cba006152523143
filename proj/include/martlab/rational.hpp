#pragma once

#include <gmpxx.h>

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace martlab {

using Rational = mpq_class;

// Raised when an input object violates a structural invariant (bad
// probabilities, non-refining filtration, malformed stopping time ...).
// `field` names the offending part so model loaders can point at it.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& what)
      : std::invalid_argument(field.empty() ? what : field + ": " + what),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// An operation was called outside its domain (non-adapted input to a
// martingale check, infinite stopping time where finiteness is required).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A post-condition self-check failed. This always indicates a bug.
class InternalDefect : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Canonical num/den. Use instead of the two-argument mpq_class constructor,
// which does not reduce and so breaks equality comparisons.
inline Rational ratio(long num, long den) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

inline Rational abs(const Rational& x) { return x < 0 ? Rational(-x) : x; }

inline Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }
inline Rational min(const Rational& a, const Rational& b) { return b < a ? b : a; }

// Parses "p/q", "p" or a plain decimal string such as "0.25" exactly.
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  auto fail = [&] { throw ValidationError("", "not a rational number: '" + s + "'"); };
  if (s.empty()) fail();
  if (auto dot = s.find('.'); dot != std::string::npos) {
    if (s.find('/') != std::string::npos) fail();
    std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    if (digits.empty() || digits == "-" || digits == "+") fail();
    mpz_class num;
    if (num.set_str(digits, 10) != 0) fail();
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, static_cast<unsigned long>(s.size() - dot - 1));
    Rational r(num, den);
    r.canonicalize();
    return r;
  }
  Rational r;
  if (r.set_str(s, 10) != 0) fail();
  if (r.get_den() == 0) fail();
  r.canonicalize();
  return r;
}

// Canonical exact rendering, always "p/q" (integers render as "p/1").
inline std::string to_string(const Rational& x) {
  return x.get_num().get_str() + "/" + x.get_den().get_str();
}

// Exact conversion of a finite double (every finite double is a dyadic rational).
inline Rational from_double(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("from_double: non-finite value");
  return Rational(x);
}

inline double to_double(const Rational& x) { return x.get_d(); }

}  // namespace martlab
