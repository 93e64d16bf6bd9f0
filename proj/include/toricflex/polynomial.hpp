#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <complex>
#include <map>
#include <string>
#include <vector>

#include "toricflex/error.hpp"
#include "toricflex/rational.hpp"

namespace toricflex {

using Complex = std::complex<double>;

// ---------------------------------------------------------------------------
// Univariate polynomials, coefficients from low to high degree.

template <class K>
struct UPoly {
  std::vector<K> c;

  UPoly() = default;
  explicit UPoly(std::vector<K> coeffs) : c(std::move(coeffs)) { trim(); }

  void trim() {
    while (!c.empty() && c.back() == K(0)) c.pop_back();
  }
  int degree() const { return static_cast<int>(c.size()) - 1; }
  bool is_zero() const { return c.empty(); }
  const K& lead() const { return c.back(); }

  K operator()(const K& x) const {
    K v(0);
    for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * x + *it;
    return v;
  }

  UPoly derivative() const {
    std::vector<K> d;
    for (std::size_t i = 1; i < c.size(); ++i) d.push_back(c[i] * K(static_cast<long>(i)));
    return UPoly(d);
  }

  friend UPoly operator+(const UPoly& a, const UPoly& b) {
    std::vector<K> r(std::max(a.c.size(), b.c.size()), K(0));
    for (std::size_t i = 0; i < a.c.size(); ++i) r[i] += a.c[i];
    for (std::size_t i = 0; i < b.c.size(); ++i) r[i] += b.c[i];
    return UPoly(r);
  }
  friend UPoly operator-(const UPoly& a, const UPoly& b) {
    std::vector<K> r(std::max(a.c.size(), b.c.size()), K(0));
    for (std::size_t i = 0; i < a.c.size(); ++i) r[i] += a.c[i];
    for (std::size_t i = 0; i < b.c.size(); ++i) r[i] -= b.c[i];
    return UPoly(r);
  }
  friend UPoly operator*(const UPoly& a, const UPoly& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<K> r(a.c.size() + b.c.size() - 1, K(0));
    for (std::size_t i = 0; i < a.c.size(); ++i)
      for (std::size_t j = 0; j < b.c.size(); ++j) r[i + j] += a.c[i] * b.c[j];
    return UPoly(r);
  }
};

using QPoly = UPoly<Rational>;

/// Quotient and remainder of a by b over a field.
inline std::pair<QPoly, QPoly> divmod(QPoly a, const QPoly& b) {
  if (b.is_zero()) fail(errc::internal, "polynomial", "division by the zero polynomial");
  std::vector<Rational> q(std::max(0, a.degree() - b.degree() + 1), Rational(0));
  while (!a.is_zero() && a.degree() >= b.degree()) {
    int shift = a.degree() - b.degree();
    Rational f = a.lead() / b.lead();
    q[shift] = f;
    for (int i = 0; i <= b.degree(); ++i) a.c[i + shift] -= f * b.c[i];
    a.trim();
  }
  return {QPoly(q), a};
}

inline QPoly poly_gcd(QPoly a, QPoly b) {
  while (!b.is_zero()) {
    auto r = divmod(a, b).second;
    a = std::move(b);
    b = std::move(r);
  }
  if (a.is_zero()) return a;
  Rational l = a.lead();
  for (auto& x : a.c) x /= l;
  return a;
}

namespace detail {

inline int sign_changes(const std::vector<QPoly>& seq, const Rational& x) {
  int changes = 0, last = 0;
  for (const auto& p : seq) {
    int s = sgn(p(x));
    if (s == 0) continue;
    if (last != 0 && s != last) ++changes;
    last = s;
  }
  return changes;
}

}  // namespace detail

/// Distinct rational roots, sorted ascending. Exact: real roots are isolated
/// with a Sturm sequence and the only admissible rational candidates k/a_n in
/// each isolating interval are tested.
inline std::vector<Rational> rational_roots(const QPoly& p_in) {
  if (p_in.is_zero()) fail(errc::domain, "roots", "zero polynomial has every value as a root");
  std::vector<Rational> roots;
  QPoly p = p_in;
  // strip the root 0
  std::size_t low = 0;
  while (low < p.c.size() && p.c[low] == 0) ++low;
  if (low > 0) {
    roots.push_back(0);
    p = QPoly(std::vector<Rational>(p.c.begin() + low, p.c.end()));
  }
  if (p.degree() <= 0) return roots;
  // square-free part with primitive integer coefficients
  QPoly g = poly_gcd(p, p.derivative());
  if (g.degree() > 0) p = divmod(p, g).first;
  Int l = 1;
  for (const auto& x : p.c) l = lcm(l, x.get_den());
  Int cont = 0;
  std::vector<Rational> ic;
  for (const auto& x : p.c) {
    Rational y = x * l;
    ic.push_back(y);
    cont = gcd(cont, y.get_num());
  }
  for (auto& x : ic) x /= cont;
  p = QPoly(ic);
  const Int an = abs(p.lead().get_num());

  if (p.degree() == 1) {
    roots.push_back(-p.c[0] / p.c[1]);
  } else {
    Rational bound = 0;
    for (int i = 0; i < p.degree(); ++i) bound = std::max(bound, Rational(abs(p.c[i]) / abs(p.lead())));
    bound += 1;
    std::vector<QPoly> seq{p, p.derivative()};
    while (seq.back().degree() > 0) {
      auto r = divmod(seq[seq.size() - 2], seq.back()).second;
      if (r.is_zero()) break;
      for (auto& x : r.c) x = -x;
      seq.push_back(r);
    }
    // intervals (lo, hi] with their root counts
    std::vector<std::pair<Rational, Rational>> todo{{-bound, bound}};
    const Rational width = Rational(1) / Rational(an);
    while (!todo.empty()) {
      auto [lo, hi] = todo.back();
      todo.pop_back();
      int count = detail::sign_changes(seq, lo) - detail::sign_changes(seq, hi);
      if (count == 0) continue;
      if (count == 1 && hi - lo < width) {
        // at most one candidate k/an in (lo, hi]
        Rational scaled = lo * an;
        Int k = floor_div(scaled.get_num(), scaled.get_den());
        for (Int kk = k; kk <= k + 2; ++kk) {
          Rational cand(kk, an);
          cand.canonicalize();
          if (cand > lo && cand <= hi && p(cand) == 0) roots.push_back(cand);
        }
        continue;
      }
      Rational mid = (lo + hi) / 2;
      todo.push_back({lo, mid});
      todo.push_back({mid, hi});
    }
  }
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
  return roots;
}

/// All complex roots with multiplicity (companion matrix plus Newton polishing).
inline std::vector<Complex> complex_roots(const UPoly<Complex>& p_in) {
  UPoly<Complex> p = p_in;
  if (p.is_zero()) fail(errc::domain, "roots", "zero polynomial has every value as a root");
  const int d = p.degree();
  if (d <= 0) return {};
  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(d, d);
  for (int i = 1; i < d; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < d; ++i) comp(i, d - 1) = -p.c[i] / p.lead();
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
  std::vector<Complex> roots;
  auto dp = p.derivative();
  for (int i = 0; i < d; ++i) {
    Complex z = es.eigenvalues()(i);
    for (int it = 0; it < 8; ++it) {
      Complex dz = dp(z);
      if (std::abs(dz) == 0.0) break;
      Complex step = p(z) / dz;
      z -= step;
      if (std::abs(step) < 1e-16 * (1 + std::abs(z))) break;
    }
    roots.push_back(z);
  }
  return roots;
}

// ---------------------------------------------------------------------------
// Multivariate polynomials over a fixed ordered variable list.

using Monomial = std::vector<int>;

template <class K>
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::size_t nvars) : nvars_(nvars) {}

  static Polynomial constant(std::size_t nvars, const K& c) {
    Polynomial p(nvars);
    if (c != K(0)) p.terms_[Monomial(nvars, 0)] = c;
    return p;
  }
  static Polynomial variable(std::size_t nvars, std::size_t i) {
    Polynomial p(nvars);
    Monomial m(nvars, 0);
    m.at(i) = 1;
    p.terms_[m] = K(1);
    return p;
  }

  std::size_t nvars() const { return nvars_; }
  const std::map<Monomial, K>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  bool is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && std::all_of(terms_.begin()->first.begin(),
                                                                 terms_.begin()->first.end(),
                                                                 [](int e) { return e == 0; }));
  }
  K constant_term() const {
    auto it = terms_.find(Monomial(nvars_, 0));
    return it == terms_.end() ? K(0) : it->second;
  }

  int degree_in(std::size_t var) const {
    int d = -1;
    for (const auto& [m, c] : terms_) d = std::max(d, m[var]);
    return d;
  }
  int total_degree() const {
    int d = -1;
    for (const auto& [m, c] : terms_) {
      int s = 0;
      for (int e : m) s += e;
      d = std::max(d, s);
    }
    return d;
  }

  void add_term(const Monomial& m, const K& c) {
    if (c == K(0)) return;
    auto [it, inserted] = terms_.emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (it->second == K(0)) terms_.erase(it);
    }
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) {
    a.check(b);
    for (const auto& [m, c] : b.terms_) a.add_term(m, c);
    return a;
  }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) {
    a.check(b);
    for (const auto& [m, c] : b.terms_) a.add_term(m, -c);
    return a;
  }
  friend Polynomial operator-(const Polynomial& a) { return Polynomial(a.nvars_) - a; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    a.check(b);
    Polynomial r(a.nvars_);
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) {
        Monomial m(a.nvars_);
        for (std::size_t i = 0; i < m.size(); ++i) m[i] = ma[i] + mb[i];
        r.add_term(m, ca * cb);
      }
    return r;
  }
  friend Polynomial operator*(const K& k, const Polynomial& a) {
    Polynomial r(a.nvars_);
    for (const auto& [m, c] : a.terms_) r.add_term(m, k * c);
    return r;
  }
  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.nvars_ == b.nvars_ && a.terms_ == b.terms_;
  }

  Polynomial pow(unsigned k) const {
    Polynomial r = constant(nvars_, K(1)), base = *this;
    while (k) {
      if (k & 1u) r = r * base;
      base = base * base;
      k >>= 1;
    }
    return r;
  }

  Polynomial derivative(std::size_t var) const {
    Polynomial r(nvars_);
    for (const auto& [m, c] : terms_) {
      if (m[var] == 0) continue;
      Monomial mm = m;
      --mm[var];
      r.add_term(mm, c * K(static_cast<long>(m[var])));
    }
    return r;
  }

  K operator()(const std::vector<K>& x) const {
    if (x.size() != nvars_) fail(errc::rank_mismatch, "polynomial", "evaluation point has wrong length");
    K v(0);
    for (const auto& [m, c] : terms_) {
      K t = c;
      for (std::size_t i = 0; i < nvars_; ++i)
        for (int e = 0; e < m[i]; ++e) t *= x[i];
      v += t;
    }
    return v;
  }

  /// Replaces variable i by q.
  Polynomial substitute(std::size_t var, const Polynomial& q) const {
    Polynomial r(nvars_);
    std::map<int, Polynomial> powers;
    for (const auto& [m, c] : terms_) {
      Monomial rest = m;
      int e = rest[var];
      rest[var] = 0;
      Polynomial mono(nvars_);
      mono.add_term(rest, c);
      if (e > 0) {
        auto it = powers.find(e);
        if (it == powers.end()) it = powers.emplace(e, q.pow(static_cast<unsigned>(e))).first;
        mono = mono * it->second;
      }
      r = r + mono;
    }
    return r;
  }

  /// Widens or narrows the variable list; dropped variables must not occur.
  Polynomial with_nvars(std::size_t n) const {
    Polynomial r(n);
    for (const auto& [m, c] : terms_) {
      Monomial mm(n, 0);
      for (std::size_t i = 0; i < m.size(); ++i) {
        if (i >= n) {
          if (m[i] != 0) fail(errc::internal, "polynomial", "narrowing drops a used variable");
        } else {
          mm[i] = m[i];
        }
      }
      r.add_term(mm, c);
    }
    return r;
  }

  /// Univariate view in variable var; other variables must not occur.
  UPoly<K> univariate(std::size_t var) const {
    std::vector<K> c(std::max(0, degree_in(var) + 1), K(0));
    for (const auto& [m, k] : terms_) {
      for (std::size_t i = 0; i < nvars_; ++i)
        if (i != var && m[i] != 0) fail(errc::domain, "polynomial", "polynomial is not univariate");
      c[m[var]] += k;
    }
    return UPoly<K>(c);
  }

  template <class L, class F>
  Polynomial<L> map(F f) const {
    Polynomial<L> r(nvars_);
    for (const auto& [m, c] : terms_) r.add_term(m, f(c));
    return r;
  }

 private:
  void check(const Polynomial& b) const {
    if (nvars_ != b.nvars_) fail(errc::rank_mismatch, "polynomial", "variable lists differ");
  }
  std::size_t nvars_ = 0;
  std::map<Monomial, K> terms_;
};

using QPolyN = Polynomial<Rational>;

inline std::string to_string(const QPolyN& p, const std::vector<std::string>& names) {
  if (p.is_zero()) return "0";
  std::string s;
  bool first = true;
  for (auto it = p.terms().rbegin(); it != p.terms().rend(); ++it) {
    const auto& [m, c] = *it;
    Rational a = abs(c);
    std::string mono;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i] == 0) continue;
      if (!mono.empty()) mono += "*";
      mono += names.at(i);
      if (m[i] > 1) mono += "^" + std::to_string(m[i]);
    }
    std::string coef = (a == 1 && !mono.empty()) ? "" : a.get_str() + (mono.empty() ? "" : "*");
    if (first)
      s += (c < 0 ? "-" : "") + coef + mono;
    else
      s += (c < 0 ? " - " : " + ") + coef + mono;
    first = false;
  }
  return s;
}

namespace detail {

// Recursive-descent parser: sums of products of powers of atoms.
class PolyParser {
 public:
  PolyParser(const std::string& text, const std::vector<std::string>& names) : s_(text), names_(names) {}

  QPolyN parse() {
    QPolyN p = expr();
    skip();
    if (i_ != s_.size()) error("unexpected '" + std::string(1, s_[i_]) + "'");
    return p;
  }

 private:
  [[noreturn]] void error(const std::string& msg) const {
    fail(errc::parse, "polynomial", msg + " at offset " + std::to_string(i_) + " in '" + s_ + "'");
  }
  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  bool eat(char c) {
    skip();
    if (i_ < s_.size() && s_[i_] == c) {
      ++i_;
      return true;
    }
    return false;
  }
  QPolyN expr() {
    QPolyN p = eat('-') ? -term() : (eat('+'), term());
    for (;;) {
      if (eat('+'))
        p = p + term();
      else if (eat('-'))
        p = p - term();
      else
        return p;
    }
  }
  QPolyN term() {
    QPolyN p = power();
    for (;;) {
      if (eat('*')) {
        p = p * power();
      } else if (eat('/')) {
        skip();
        Int d = integer();
        if (d == 0) error("division by zero");
        p = Rational(1, d) * p;
      } else {
        return p;
      }
    }
  }
  QPolyN power() {
    QPolyN b = atom();
    if (eat('^')) {
      skip();
      Int e = integer();
      if (e < 0 || e > 64) error("exponent out of range");
      b = b.pow(static_cast<unsigned>(e.get_ui()));
    }
    return b;
  }
  Int integer() {
    std::size_t st = i_;
    while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
    if (st == i_) error("expected an integer");
    return Int(s_.substr(st, i_ - st));
  }
  QPolyN atom() {
    skip();
    if (i_ >= s_.size()) error("unexpected end");
    if (eat('(')) {
      QPolyN p = expr();
      if (!eat(')')) error("expected ')'");
      return p;
    }
    if (eat('-')) return -power();
    if (std::isdigit(static_cast<unsigned char>(s_[i_]))) return QPolyN::constant(names_.size(), Rational(integer()));
    std::size_t st = i_;
    while (i_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[i_]))) ++i_;
    std::string name = s_.substr(st, i_ - st);
    for (std::size_t k = 0; k < names_.size(); ++k)
      if (names_[k] == name) return QPolyN::variable(names_.size(), k);
    error("unknown variable '" + name + "'");
  }

  std::string s_;
  const std::vector<std::string>& names_;
  std::size_t i_ = 0;
};

}  // namespace detail

inline QPolyN parse_polynomial(const std::string& text, const std::vector<std::string>& names) {
  return detail::PolyParser(text, names).parse();
}

inline Complex to_complex(const Rational& r) { return Complex(r.get_d(), 0.0); }

}  // namespace toricflex
