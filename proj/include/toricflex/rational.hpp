#pragma once

#include <gmpxx.h>

#include <cctype>
#include <optional>
#include <string>
#include <string_view>

#include "toricflex/error.hpp"

namespace toricflex {

using Int = mpz_class;
using Rational = mpq_class;

/// Parses "p", "-p" or "p/q". Whitespace around the token is ignored.
inline Rational parse_rational(std::string_view text) {
  std::size_t b = 0, e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  std::string s(text.substr(b, e - b));
  if (s.empty()) fail(errc::parse, "rational", "empty rational literal");
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  bool seen_slash = false, digits_before = false, digits_after = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      (seen_slash ? digits_after : digits_before) = true;
    } else if (c == '/' && !seen_slash) {
      seen_slash = true;
    } else {
      fail(errc::parse, "rational", "bad rational literal '" + s + "'");
    }
  }
  if (!digits_before || (seen_slash && !digits_after))
    fail(errc::parse, "rational", "bad rational literal '" + s + "'");
  if (s[0] == '+') s.erase(0, 1);
  Rational r;
  if (r.set_str(s, 10) != 0) fail(errc::parse, "rational", "bad rational literal '" + s + "'");
  if (r.get_den() == 0) fail(errc::parse, "rational", "zero denominator in '" + s + "'");
  r.canonicalize();
  return r;
}

inline std::string to_string(const Rational& r) { return r.get_str(); }
inline std::string to_string(const Int& z) { return z.get_str(); }

/// base^exp for any signed exponent; base must be nonzero when exp < 0.
inline Rational pow(const Rational& base, long exp) {
  if (exp == 0) return Rational(1);
  if (exp < 0 && base == 0) fail(errc::domain, "rational", "zero raised to a negative power");
  unsigned long k = static_cast<unsigned long>(exp < 0 ? -exp : exp);
  Int num, den;
  mpz_pow_ui(num.get_mpz_t(), base.get_num_mpz_t(), k);
  mpz_pow_ui(den.get_mpz_t(), base.get_den_mpz_t(), k);
  Rational r = exp < 0 ? Rational(den, num) : Rational(num, den);
  r.canonicalize();
  return r;
}

inline Int pow(const Int& base, unsigned long exp) {
  Int r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), exp);
  return r;
}

inline long to_long(const Int& z) {
  if (!z.fits_slong_p()) fail(errc::capability, "rational", "integer exceeds machine range: " + z.get_str());
  return z.get_si();
}

/// Floor of a/b for b != 0.
inline Int floor_div(const Int& a, const Int& b) {
  Int q;
  mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

inline Int ceil_div(const Int& a, const Int& b) {
  Int q;
  mpz_cdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

inline Int binomial(unsigned long n, unsigned long k) {
  Int r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return r;
}

/// Exact k-th root inside the rationals, if it exists. For even k the
/// positive root is returned.
inline std::optional<Rational> exact_root(const Rational& r, unsigned long k) {
  if (k == 0) return std::nullopt;
  if (k == 1) return r;
  if (r < 0 && k % 2 == 0) return std::nullopt;
  Int num = abs(r.get_num()), den = r.get_den(), rn, rd;
  if (!mpz_root(rn.get_mpz_t(), num.get_mpz_t(), k)) return std::nullopt;
  if (!mpz_root(rd.get_mpz_t(), den.get_mpz_t(), k)) return std::nullopt;
  if (r < 0) rn = -rn;
  Rational out(rn, rd);
  out.canonicalize();
  return out;
}

inline Rational floor(const Rational& r) { return Rational(floor_div(r.get_num(), r.get_den())); }

}  // namespace toricflex
