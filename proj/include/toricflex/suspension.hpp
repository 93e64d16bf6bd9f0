#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "toricflex/error.hpp"
#include "toricflex/linalg.hpp"
#include "toricflex/polynomial.hpp"
#include "toricflex/rational.hpp"

namespace toricflex {

// ---------------------------------------------------------------------------
// Scalars: exact rationals or complex doubles.

template <class K>
struct scalar_ops;

template <>
struct scalar_ops<Rational> {
  static constexpr bool exact = true;
  static Rational from(const Rational& r) { return r; }
  static double abs(const Rational& r) { return std::fabs(r.get_d()); }
  static bool zero(const Rational& r, double) { return r == 0; }
};

template <>
struct scalar_ops<Complex> {
  static constexpr bool exact = false;
  static Complex from(const Rational& r) { return to_complex(r); }
  static double abs(const Complex& z) { return std::abs(z); }
  static bool zero(const Complex& z, double tol) { return std::abs(z) <= tol; }
};

inline std::string format_double(double d) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", d);
  return buf;
}

template <class K>
bool near_zero(const K& x, double tol) {
  return scalar_ops<K>::zero(x, tol);
}

/// Evaluates p on the leading p.nvars() entries of x.
template <class K>
K eval_prefix(const QPolyN& p, const std::vector<K>& x) {
  if (x.size() < p.nvars()) fail(errc::rank_mismatch, "polynomial", "point is too short");
  K v(0);
  for (const auto& [m, c] : p.terms()) {
    K t = scalar_ops<K>::from(c);
    for (std::size_t i = 0; i < p.nvars(); ++i)
      for (int e = 0; e < m[i]; ++e) t *= x[i];
    v += t;
  }
  return v;
}

template <class K>
UPoly<K> to_field(const QPoly& q) {
  std::vector<K> c;
  for (const auto& x : q.c) c.push_back(scalar_ops<K>::from(x));
  return UPoly<K>(c);
}

/// q(z) as a polynomial in variable var of an nvars-variable ring.
inline QPolyN embed(const QPoly& q, std::size_t nvars, std::size_t var) {
  QPolyN r(nvars);
  for (std::size_t j = 0; j < q.c.size(); ++j) {
    Monomial m(nvars, 0);
    m[var] = static_cast<int>(j);
    r.add_term(m, q.c[j]);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Iterated suspensions over A^k.

struct SuspensionVariety {
  std::size_t k = 1;
  /// f_i in the k + 2(i-1) variables of the previous level.
  std::vector<QPolyN> fs;

  std::size_t level() const { return fs.size(); }
  std::size_t nvars() const { return k + 2 * fs.size(); }
  std::size_t dim() const { return k + fs.size(); }
  /// Coordinate indices of u_i, v_i for the 1-based level i.
  std::size_t u_index(std::size_t i) const { return k + 2 * (i - 1); }
  std::size_t v_index(std::size_t i) const { return k + 2 * (i - 1) + 1; }
  bool is_surface() const { return k == 1 && fs.size() == 1; }
  const QPolyN& top() const { return fs.back(); }

  std::vector<std::string> names() const {
    std::vector<std::string> n;
    for (std::size_t i = 0; i < k; ++i) n.push_back("x" + std::to_string(i));
    for (std::size_t i = 1; i <= level(); ++i) {
      n.push_back("u" + std::to_string(i));
      n.push_back("v" + std::to_string(i));
    }
    return n;
  }

  /// f_i - u_i v_i in all variables.
  QPolyN relation(std::size_t i) const {
    const std::size_t n = nvars();
    Monomial uv(n, 0);
    uv[u_index(i)] = 1;
    uv[v_index(i)] = 1;
    QPolyN r = fs.at(i - 1).with_nvars(n);
    r.add_term(uv, Rational(-1));
    return r;
  }
};

inline SuspensionVariety affine_space(std::size_t k) {
  if (k == 0) fail(errc::domain, "suspension", "base dimension must be positive");
  SuspensionVariety x;
  x.k = k;
  return x;
}

inline SuspensionVariety base_of(const SuspensionVariety& x) {
  if (x.level() == 0) fail(errc::domain, "suspension", "affine space has no base");
  SuspensionVariety b = x;
  b.fs.pop_back();
  return b;
}

/// Normal form modulo u_i v_i = f_i: no monomial keeps both u_i and v_i.
inline QPolyN reduce(const SuspensionVariety& x, QPolyN g) {
  const std::size_t n = g.nvars();
  for (std::size_t i = x.level(); i >= 1; --i) {
    const std::size_t ui = x.u_index(i), vi = x.v_index(i);
    if (vi >= n) continue;
    QPolyN fi = x.fs[i - 1].with_nvars(n);
    QPolyN r(n);
    for (const auto& [m, c] : g.terms()) {
      int e = std::min(m[ui], m[vi]);
      Monomial rest = m;
      rest[ui] -= e;
      rest[vi] -= e;
      QPolyN mono(n);
      mono.add_term(rest, c);
      r = r + (e > 0 ? mono * fi.pow(static_cast<unsigned>(e)) : mono);
    }
    g = r;
  }
  return g;
}

/// True when some monomial of g contains a product u_i v_i.
inline bool has_uv_monomial(const SuspensionVariety& x, const QPolyN& g) {
  for (const auto& [m, c] : g.terms())
    for (std::size_t i = 1; i <= x.level(); ++i)
      if (x.v_index(i) < m.size() && m[x.u_index(i)] > 0 && m[x.v_index(i)] > 0) return true;
  return false;
}

inline SuspensionVariety build_suspension(const SuspensionVariety& base, const QPolyN& f) {
  if (f.nvars() > base.nvars())
    fail(errc::domain, "suspension", "f uses variables outside the base");
  QPolyN g = f.with_nvars(base.nvars());
  if (reduce(base, g).is_constant())
    fail(errc::domain, "suspension", "f is constant modulo the base relations");
  SuspensionVariety x = base;
  x.fs.push_back(g);
  return x;
}

/// Suspension tower over A^k from textual f_1, ..., f_l.
inline SuspensionVariety parse_suspension(std::size_t k, const std::vector<std::string>& fs) {
  SuspensionVariety x = affine_space(k);
  for (const auto& text : fs) x = build_suspension(x, parse_polynomial(text, x.names()));
  return x;
}

// ---------------------------------------------------------------------------
// Points.

template <class K>
using SuspPoint = std::vector<K>;

template <class K>
double relation_residual(const SuspensionVariety& x, const SuspPoint<K>& p) {
  if (p.size() != x.nvars()) fail(errc::rank_mismatch, "suspension", "point has wrong length");
  double r = 0;
  for (std::size_t i = 1; i <= x.level(); ++i) {
    K d = p[x.u_index(i)] * p[x.v_index(i)] - eval_prefix(x.fs[i - 1], p);
    r = std::max(r, scalar_ops<K>::abs(d));
  }
  return r;
}

template <class K>
bool on_variety(const SuspensionVariety& x, const SuspPoint<K>& p, double tol = 0) {
  if (p.size() != x.nvars()) return false;
  if constexpr (scalar_ops<K>::exact) {
    for (std::size_t i = 1; i <= x.level(); ++i)
      if (p[x.u_index(i)] * p[x.v_index(i)] != eval_prefix(x.fs[i - 1], p)) return false;
    return true;
  } else {
    return relation_residual(x, p) <= tol;
  }
}

template <class K>
SuspPoint<K> project(const SuspPoint<K>& p) {
  if (p.size() < 2) fail(errc::domain, "suspension", "point has no fibre coordinates");
  return SuspPoint<K>(p.begin(), p.end() - 2);
}

template <class K>
double max_distance(const SuspPoint<K>& a, const SuspPoint<K>& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, scalar_ops<K>::abs(a[i] - b[i]));
  return d;
}

template <class K>
bool same_point(const SuspPoint<K>& a, const SuspPoint<K>& b, double tol) {
  if constexpr (scalar_ops<K>::exact)
    return a == b;
  else
    return max_distance(a, b) <= tol;
}

/// Jacobian of the relations f_i - u_i v_i at p; one row per level.
template <class K>
std::vector<std::vector<K>> jacobian(const SuspensionVariety& x, const SuspPoint<K>& p) {
  std::vector<std::vector<K>> d;
  for (std::size_t i = 1; i <= x.level(); ++i) {
    QPolyN g = x.relation(i);
    std::vector<K> row;
    for (std::size_t j = 0; j < x.nvars(); ++j) row.push_back(eval_prefix(g.derivative(j), p));
    d.push_back(row);
  }
  return d;
}

template <class K>
std::size_t matrix_rank(const std::vector<std::vector<K>>& a, std::size_t ncols, double tol) {
  if (a.empty()) return 0;
  if constexpr (scalar_ops<K>::exact) {
    return linalg::rank(a, ncols);
  } else {
    Eigen::MatrixXcd m(a.size(), ncols);
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < ncols; ++j) m(i, j) = a[i][j];
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    const auto& s = svd.singularValues();
    double cut = tol * std::max(1.0, s.size() ? s(0) : 0.0);
    std::size_t r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
      if (s(i) > cut) ++r;
    return r;
  }
}

/// Smooth iff the Jacobian has rank equal to the codimension.
template <class K>
bool smoothness_check(const SuspensionVariety& x, const SuspPoint<K>& p, double tol = 1e-9) {
  if (!on_variety(x, p, tol)) fail(errc::domain, "smoothness", "point is not on the variety");
  return matrix_rank(jacobian(x, p), x.nvars(), tol) == x.level();
}

// ---------------------------------------------------------------------------
// Derivations of the ambient polynomial ring.

struct Derivation {
  std::vector<QPolyN> images;

  std::size_t nvars() const { return images.size(); }

  QPolyN operator()(const QPolyN& g) const {
    if (g.nvars() != nvars()) fail(errc::rank_mismatch, "derivation", "variable lists differ");
    QPolyN r(nvars());
    for (std::size_t i = 0; i < nvars(); ++i)
      if (!images[i].is_zero() && g.degree_in(i) > 0) r = r + images[i] * g.derivative(i);
    return r;
  }

  static Derivation zero(std::size_t n) { return Derivation{std::vector<QPolyN>(n, QPolyN(n))}; }
  static Derivation partial(std::size_t n, std::size_t i) {
    Derivation d = zero(n);
    d.images.at(i) = QPolyN::constant(n, Rational(1));
    return d;
  }
  /// Constant vector field w.
  static Derivation translation(const std::vector<Rational>& w) {
    Derivation d = zero(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) d.images[i] = QPolyN::constant(w.size(), w[i]);
    return d;
  }
};

/// Some ordering of the variables makes the image of each one a polynomial in
/// the earlier ones.
inline bool is_triangular(const Derivation& d) {
  const std::size_t n = d.nvars();
  std::vector<bool> placed(n, false);
  for (std::size_t round = 0; round < n; ++round) {
    bool progress = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (placed[i]) continue;
      bool ok = true;
      for (std::size_t j = 0; j < n && ok; ++j)
        if (!placed[j] && d.images[i].degree_in(j) > 0) ok = false;
      if (ok) {
        placed[i] = true;
        progress = true;
      }
    }
    if (!progress) break;
  }
  return std::all_of(placed.begin(), placed.end(), [](bool b) { return b; });
}

/// g, d(g), d^2(g), ... up to the last nonzero term.
inline std::vector<QPolyN> iterate(const Derivation& d, const QPolyN& g, std::size_t cap = 64) {
  std::vector<QPolyN> seq;
  QPolyN cur = g;
  while (!cur.is_zero()) {
    if (seq.size() == cap)
      fail(errc::domain, "derivation", "not locally nilpotent within " + std::to_string(cap) + " steps");
    seq.push_back(cur);
    cur = d(cur);
  }
  return seq;
}

inline void check_locally_nilpotent(const Derivation& d, std::size_t cap = 64) {
  if (is_triangular(d)) return;
  for (std::size_t i = 0; i < d.nvars(); ++i) iterate(d, QPolyN::variable(d.nvars(), i), cap);
}

/// exp(t d) on points, via the iterated images of the coordinates.
class Flow {
 public:
  explicit Flow(const Derivation& d) {
    for (std::size_t i = 0; i < d.nvars(); ++i) seqs_.push_back(iterate(d, QPolyN::variable(d.nvars(), i)));
  }

  template <class K>
  SuspPoint<K> operator()(const K& t, const SuspPoint<K>& p) const {
    if (p.size() != seqs_.size()) fail(errc::rank_mismatch, "flow", "point has wrong length");
    SuspPoint<K> r(p.size(), K(0));
    for (std::size_t i = 0; i < seqs_.size(); ++i) {
      K tj(1), acc(0);
      for (std::size_t j = 0; j < seqs_[i].size(); ++j) {
        if (j > 0) tj = tj * t / K(static_cast<long>(j));
        acc += tj * eval_prefix(seqs_[i][j], p);
      }
      r[i] = acc;
    }
    return r;
  }

 private:
  std::vector<std::vector<QPolyN>> seqs_;
};

template <class K>
SuspPoint<K> exp_apply(const Derivation& d, const K& t, const SuspPoint<K>& p) {
  return Flow(d)(t, p);
}

template <class K>
std::vector<K> velocity(const Derivation& d, const SuspPoint<K>& p) {
  std::vector<K> v;
  for (const auto& g : d.images) v.push_back(eval_prefix(g, p));
  return v;
}

// ---------------------------------------------------------------------------
// Lifting base derivations to the top suspension.

struct SuspLnd {
  Derivation base;
  QPoly q;
  /// 'v': multiplier q(v) and v in the kernel; 'u': roles of u and v swapped.
  char side = 'v';
  Derivation lifted;
};

/// q(z)/z; requires q(0) = 0.
inline QPoly divide_by_z(const QPoly& q) {
  if (q.is_zero()) return q;
  if (q.c[0] != 0) fail(errc::domain, "lift", "multiplier q must satisfy q(0) = 0");
  return QPoly(std::vector<Rational>(q.c.begin() + 1, q.c.end()));
}

inline SuspLnd lift_lnd(const SuspensionVariety& x, const Derivation& d0, const QPoly& q, char side = 'v') {
  if (x.level() == 0) fail(errc::domain, "lift", "affine space is not a suspension");
  if (side != 'u' && side != 'v') fail(errc::domain, "lift", "side must be u or v");
  const QPoly qz = divide_by_z(q);
  const SuspensionVariety base = base_of(x);
  const std::size_t nb = base.nvars(), n = x.nvars();
  if (d0.nvars() != nb) fail(errc::rank_mismatch, "lift", "base derivation has wrong arity");
  for (std::size_t i = 1; i <= base.level(); ++i)
    if (!reduce(base, d0(base.relation(i))).is_zero())
      fail(errc::domain, "lift", "base derivation does not preserve relation " + std::to_string(i));
  check_locally_nilpotent(d0);

  const std::size_t ui = x.u_index(x.level()), vi = x.v_index(x.level());
  const std::size_t carrier = side == 'v' ? vi : ui, moved = side == 'v' ? ui : vi;
  const QPolyN mult = embed(q, n, carrier), multz = embed(qz, n, carrier);
  const QPolyN f = x.top().with_nvars(n);

  SuspLnd r{d0, q, side, Derivation::zero(n)};
  for (std::size_t i = 0; i < nb; ++i) r.lifted.images[i] = mult * d0.images[i].with_nvars(n);
  r.lifted.images[moved] = multz * d0(x.top()).with_nvars(n);

  QPolyN uv(n);
  Monomial m(n, 0);
  m[ui] = m[vi] = 1;
  uv.add_term(m, Rational(1));
  if (!r.lifted(uv - f).is_zero()) fail(errc::internal, "lift", "lifted derivation does not annihilate uv - f");
  return r;
}

/// Multiplier z * prod (z - c_j) vanishing on the levels c_j and at 0.
inline QPoly vanishing_multiplier(const std::vector<Rational>& cs) {
  QPoly q(std::vector<Rational>{0, 1});
  for (const auto& c : cs) q = q * QPoly(std::vector<Rational>{-c, 1});
  return q;
}

/// alpha z prod (z - c_s) with value 1 at c0.
inline QPoly freezing_multiplier(const std::vector<Rational>& frozen, const Rational& c0) {
  QPoly q = vanishing_multiplier(frozen);
  Rational at = q(c0);
  if (at == 0) fail(errc::domain, "freeze", "c0 must be nonzero and differ from the frozen levels");
  return QPoly(std::vector<Rational>{Rational(1) / at}) * q;
}

// ---------------------------------------------------------------------------
// Words of lifted one-parameter subgroups exp(t delta_1).

struct LndLetter {
  SuspLnd lnd;
  Rational t;
  std::string stage;
};

struct LndWord {
  std::vector<LndLetter> letters;

  std::size_t size() const { return letters.size(); }

  template <class K>
  std::vector<SuspPoint<K>> replay(std::vector<SuspPoint<K>> pts) const {
    for (const auto& l : letters) {
      Flow flow(l.lnd.lifted);
      K t = scalar_ops<K>::from(l.t);
      for (auto& p : pts) p = flow(t, p);
    }
    return pts;
  }

  LndWord inverse(const std::string& prefix = "") const {
    LndWord w;
    for (auto it = letters.rbegin(); it != letters.rend(); ++it) {
      LndLetter l = *it;
      l.t = -l.t;
      l.stage = prefix + l.stage;
      w.letters.push_back(std::move(l));
    }
    return w;
  }

  void append(const LndWord& o) { letters.insert(letters.end(), o.letters.begin(), o.letters.end()); }
};

/// Lifts a base word with a multiplier that is 1 on V_{c0} and 0 on every V_{c_s}.
inline LndWord freeze_word(const SuspensionVariety& x, const std::vector<std::pair<Derivation, Rational>>& base_word,
                           const std::vector<Rational>& frozen, const Rational& c0, char side = 'v',
                           const std::string& stage = "freeze") {
  QPoly q = freezing_multiplier(frozen, c0);
  LndWord w;
  for (const auto& [d, t] : base_word) w.letters.push_back({lift_lnd(x, d, q, side), t, stage});
  return w;
}

// ---------------------------------------------------------------------------
// Surface uv = f(x): the subgroups H_u(q), H_v(q).

/// Coefficients of f(x + s) in s.
template <class K>
std::vector<K> taylor_shift(const UPoly<K>& f, const K& x) {
  std::vector<K> b = f.c;
  const int n = f.degree();
  for (int i = 0; i < n; ++i)
    for (int j = n - 1; j >= i; --j) b[j] += x * b[j + 1];
  return b;
}

template <class K>
UPoly<K> surface_f(const SuspensionVariety& x) {
  if (!x.is_surface()) fail(errc::domain, "surface", "expected a surface uv = f(x)");
  return to_field<K>(x.top().univariate(0));
}

template <class K>
bool vanishes_at_zero(const UPoly<K>& q) {
  return q.is_zero() || q.c[0] == K(0);
}

/// side 'u': (x + t q(u), u, v + (f(x + t q(u)) - f(x))/u); side 'v' symmetric.
/// The quotient is expanded in powers of t q(u), so u = 0 is never a division.
template <class K>
SuspPoint<K> surface_act(const SuspensionVariety& x, char side, const UPoly<K>& q, const K& t,
                         const SuspPoint<K>& p) {
  if (side != 'u' && side != 'v') fail(errc::domain, "surface", "side must be u or v");
  if (!vanishes_at_zero(q)) fail(errc::domain, "surface", "q must satisfy q(0) = 0");
  if (p.size() != 3) fail(errc::rank_mismatch, "surface", "point has wrong length");
  const UPoly<K> f = surface_f<K>(x);
  const std::size_t carrier = side == 'u' ? 1 : 2, moved = side == 'u' ? 2 : 1;
  const K z = p[carrier];
  K qz(0);
  for (std::size_t j = q.c.size(); j-- > 1;) qz = qz * z + q.c[j];
  const K s = t * qz * z;
  const std::vector<K> c = taylor_shift(f, p[0]);
  K dd(0);
  for (std::size_t j = c.size(); j-- > 1;) dd = dd * s + c[j];
  SuspPoint<K> r = p;
  r[0] = p[0] + s;
  r[moved] = p[moved] + dd * t * qz;
  return r;
}

template <class K>
SuspPoint<K> hu_action(const SuspensionVariety& x, const UPoly<K>& q, const K& t, const SuspPoint<K>& p) {
  return surface_act(x, 'u', q, t, p);
}

template <class K>
SuspPoint<K> hv_action(const SuspensionVariety& x, const UPoly<K>& q, const K& t, const SuspPoint<K>& p) {
  return surface_act(x, 'v', q, t, p);
}

template <class K>
struct SurfaceLetter {
  char side = 'u';
  UPoly<K> q;
  K t{0};
  std::string stage;
};

template <class K>
struct SurfaceWord {
  std::vector<SurfaceLetter<K>> letters;

  std::size_t size() const { return letters.size(); }

  std::vector<SuspPoint<K>> replay(const SuspensionVariety& x, std::vector<SuspPoint<K>> pts) const {
    for (const auto& l : letters)
      for (auto& p : pts) p = surface_act(x, l.side, l.q, l.t, p);
    return pts;
  }

  SurfaceWord inverse(const std::string& prefix = "") const {
    SurfaceWord w;
    for (auto it = letters.rbegin(); it != letters.rend(); ++it) {
      SurfaceLetter<K> l = *it;
      l.t = -l.t;
      l.stage = prefix + l.stage;
      w.letters.push_back(std::move(l));
    }
    return w;
  }

  void append(const SurfaceWord& o) { letters.insert(letters.end(), o.letters.begin(), o.letters.end()); }
};

/// Base derivation d/dx lifted with multiplier q: the derivation of H_u(q) or H_v(q).
inline SuspLnd surface_lnd(const SuspensionVariety& x, const QPoly& q, char side) {
  if (!x.is_surface()) fail(errc::domain, "surface", "expected a surface uv = f(x)");
  return lift_lnd(x, Derivation::partial(1, 0), q, side == 'u' ? 'u' : 'v');
}

// ---------------------------------------------------------------------------
// Surface solver: Steps 1-4 to a standard tuple, then composition.

namespace susp_stage {
inline constexpr const char* nonzero_v = "step1-nonzero-v";
inline constexpr const char* distinct_u = "step2-distinct-u";
inline constexpr const char* standard_v = "step3-standard-v";
inline constexpr const char* standard_x = "step4-standard-x";
inline constexpr const char* inverse_target = "inverse-target:";
}  // namespace susp_stage

/// x_i = 0, v_i = i, u_i = f(0)/i.
template <class K>
std::vector<SuspPoint<K>> surface_standard_tuple(const SuspensionVariety& x, std::size_t m) {
  const UPoly<K> f = surface_f<K>(x);
  std::vector<SuspPoint<K>> r;
  for (std::size_t i = 1; i <= m; ++i) {
    K v(static_cast<long>(i));
    r.push_back({K(0), f(K(0)) / v, v});
  }
  return r;
}

/// Postcondition of a step; step 0 checks nothing.
template <class K>
bool surface_step_holds(const SuspensionVariety& x, int step, const std::vector<SuspPoint<K>>& pts, double tol) {
  const double sep = scalar_ops<K>::exact ? 0.0 : tol;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& p = pts[i];
    if (!on_variety(x, p, tol)) return false;
    if (step >= 1 && scalar_ops<K>::abs(p[2]) <= sep) return false;
    if (step == 2) {
      if (scalar_ops<K>::abs(p[1]) <= sep) return false;
      for (std::size_t j = 0; j < i; ++j)
        if (scalar_ops<K>::abs(p[1] - pts[j][1]) <= sep) return false;
    }
    if (step >= 3 && scalar_ops<K>::abs(p[2] - K(static_cast<long>(i + 1))) > sep) return false;
    if (step >= 4 && scalar_ops<K>::abs(p[0]) > sep) return false;
  }
  return true;
}

template <class K>
struct SurfaceSolve {
  SurfaceWord<K> word;
  std::vector<SuspPoint<K>> standard;
  /// trail[s]: the tuple after step s of the source leg; trail[0] is the input.
  std::vector<std::vector<SuspPoint<K>>> trail;
};

namespace detail {

/// Root of f(a) = c nearest to x0.
template <class K>
K level_root(const UPoly<K>& f, const K& c, const K& x0) {
  UPoly<K> g = f - UPoly<K>(std::vector<K>{c});
  std::vector<K> roots;
  if constexpr (scalar_ops<K>::exact) {
    roots = rational_roots(g);
    if (roots.empty())
      fail(errc::field_extension, susp_stage::standard_v,
           "f(x) = " + to_string(c) + " has no rational root; rerun in numeric mode");
  } else {
    roots = complex_roots(g);
    if (roots.empty()) fail(errc::internal, susp_stage::standard_v, "no root found");
  }
  K best = roots[0];
  for (const auto& r : roots) {
    double d = scalar_ops<K>::abs(r - x0), db = scalar_ops<K>::abs(best - x0);
    if (d < db) best = r;
  }
  return best;
}

/// Interpolating polynomial through (0,0) and (z_i, y_i).
template <class K>
UPoly<K> lagrange_through_origin(const std::vector<K>& z, const std::vector<K>& y) {
  std::vector<K> nodes{K(0)};
  nodes.insert(nodes.end(), z.begin(), z.end());
  UPoly<K> q;
  for (std::size_t i = 0; i < z.size(); ++i) {
    UPoly<K> li(std::vector<K>{K(1)});
    K denom(1);
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      if (j == i + 1) continue;
      li = li * UPoly<K>(std::vector<K>{-nodes[j], K(1)});
      denom *= z[i] - nodes[j];
    }
    q = q + UPoly<K>(std::vector<K>{y[i] / denom}) * li;
  }
  if (!q.c.empty()) q.c[0] = K(0);
  return q;
}

template <class K>
void apply_letter(const SuspensionVariety& x, SurfaceSolve<K>& s, std::vector<SuspPoint<K>>& pts,
                  SurfaceLetter<K> l) {
  for (auto& p : pts) p = surface_act(x, l.side, l.q, l.t, p);
  s.word.letters.push_back(std::move(l));
}

/// Conditioning score of a coordinate: separation from 0 (and pairwise),
/// damped by magnitude.
template <class K>
double spread(const std::vector<SuspPoint<K>>& pts, std::size_t coord, bool pairwise) {
  double best = 1e300, big = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    best = std::min(best, scalar_ops<K>::abs(pts[i][coord]));
    big = std::max(big, scalar_ops<K>::abs(pts[i][coord]));
    if (pairwise)
      for (std::size_t j = 0; j < i; ++j) best = std::min(best, scalar_ops<K>::abs(pts[i][coord] - pts[j][coord]));
  }
  return std::min(best, 1.0) / ((1 + big) * (1 + big));
}

/// Generic parameters: 1, 2, 3, ... in exact mode. In numeric mode a grid of
/// quarters scaled so that the displacements t q(z) stay of order one; the
/// best conditioned candidate is kept.
template <class K>
std::vector<K> parameter_grid(const UPoly<K>& q, const std::vector<SuspPoint<K>>& pts, std::size_t carrier) {
  std::vector<K> ts;
  if constexpr (scalar_ops<K>::exact) {
    for (long t = 1; t <= 64; ++t) ts.push_back(K(t));
  } else {
    double big = 1;
    for (const auto& p : pts) big = std::max(big, std::abs(q(p[carrier])));
    for (long k = 1; k <= 16; ++k) {
      ts.push_back(K(k / (4.0 * big)));
      ts.push_back(K(-k / (4.0 * big)));
    }
  }
  return ts;
}

}  // namespace detail

template <class K>
void check_surface_input(const SuspensionVariety& x, const std::vector<SuspPoint<K>>& pts, double tol,
                         const std::string& stage) {
  if (!x.is_surface()) fail(errc::domain, stage, "expected a surface uv = f(x)");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!on_variety(x, pts[i], tol)) fail(errc::domain, stage, "point " + std::to_string(i) + " is not on the surface");
    if (!smoothness_check(x, pts[i], tol))
      fail(errc::domain, stage, "point " + std::to_string(i) + " is singular");
    for (std::size_t j = 0; j < i; ++j)
      if (same_point(pts[i], pts[j], tol)) fail(errc::domain, stage, "points are not distinct");
  }
}

/// Word sending pts to the standard tuple, Steps 1-4.
template <class K>
SurfaceSolve<K> surface_to_standard(const SuspensionVariety& x, std::vector<SuspPoint<K>> pts, double tol = 1e-9) {
  check_surface_input(x, pts, tol, "surface-solve");
  constexpr bool exact = scalar_ops<K>::exact;
  const std::size_t m = pts.size();
  const UPoly<K> f = surface_f<K>(x);
  SurfaceSolve<K> s;
  s.trail.push_back(pts);

  // Step 1: H_u(z) with a general t makes every v nonzero.
  if (!surface_step_holds(x, 1, pts, tol)) {
    const UPoly<K> q(std::vector<K>{K(0), K(1)});
    std::optional<K> pick;
    double best = -1;
    for (const K& t : detail::parameter_grid(q, pts, 1)) {
      auto trial = pts;
      for (auto& p : trial) p = hu_action(x, q, t, p);
      if (!surface_step_holds(x, 1, trial, tol)) continue;
      double score = detail::spread(trial, 2, false);
      if (score > best) best = score, pick = t;
      if (exact) break;
    }
    if (!pick) fail(errc::infeasible, susp_stage::nonzero_v, "no parameter made every v nonzero");
    detail::apply_letter(x, s, pts, {'u', q, *pick, susp_stage::nonzero_v});
  }
  s.trail.push_back(pts);

  // Step 2: H_v(q) with q(v_i) != 0 separates the u coordinates.
  if (!surface_step_holds(x, 2, pts, tol)) {
    std::optional<SurfaceLetter<K>> pick;
    double best = -1;
    for (long c = 0; c <= static_cast<long>(m) + 1 && !(exact && pick); ++c) {
      const UPoly<K> q(std::vector<K>{K(0), K(1), K(c)});
      for (const K& t : detail::parameter_grid(q, pts, 2)) {
        auto trial = pts;
        for (auto& p : trial) p = hv_action(x, q, t, p);
        if (!surface_step_holds(x, 2, trial, tol)) continue;
        double score = detail::spread(trial, 1, true);
        if (score > best) best = score, pick = SurfaceLetter<K>{'v', q, t, susp_stage::distinct_u};
        if (exact) break;
      }
    }
    if (!pick) fail(errc::infeasible, susp_stage::distinct_u, "no (q, t) made the u coordinates distinct");
    detail::apply_letter(x, s, pts, *pick);
  }
  s.trail.push_back(pts);

  // Step 3: for each i, q vanishing at the other u_j moves v_i alone.
  for (std::size_t i = 0; i < m; ++i) {
    const K target(static_cast<long>(i + 1));
    if (exact ? pts[i][2] == target : scalar_ops<K>::abs(pts[i][2] - target) <= tol) continue;
    UPoly<K> q(std::vector<K>{K(0), K(1)});
    for (std::size_t j = 0; j < m; ++j)
      if (j != i) q = q * UPoly<K>(std::vector<K>{-pts[j][1], K(1)});
    const K a = detail::level_root<K>(f, K(pts[i][1] * target), pts[i][0]);
    const K t = (a - pts[i][0]) / q(pts[i][1]);
    detail::apply_letter(x, s, pts, {'u', q, t, susp_stage::standard_v});
  }
  s.trail.push_back(pts);

  // Step 4: q(0) = 0, q(i) = -x_i and t = 1 puts every x at 0.
  bool moved = false;
  for (const auto& p : pts) moved = moved || !near_zero(p[0], exact ? 0.0 : tol);
  if (moved) {
    std::vector<K> z, y;
    for (std::size_t i = 0; i < m; ++i) {
      z.push_back(K(static_cast<long>(i + 1)));
      y.push_back(-pts[i][0]);
    }
    detail::apply_letter(x, s, pts, {'v', detail::lagrange_through_origin(z, y), K(1), susp_stage::standard_x});
  }
  s.trail.push_back(pts);

  s.standard = surface_standard_tuple<K>(x, m);
  for (int step = 1; step <= 4; ++step)
    if (!surface_step_holds(x, step, s.trail[step], tol))
      fail(errc::internal, "surface-solve", "postcondition of step " + std::to_string(step) + " failed");
  for (std::size_t i = 0; i < m; ++i)
    if (!same_point(pts[i], s.standard[i], tol))
      fail(errc::internal, "surface-solve", "final tuple differs from the standard tuple");
  return s;
}

/// Word sending pts to targets (default: the standard tuple). Verified by replay.
template <class K>
SurfaceSolve<K> surface_solve(const SuspensionVariety& x, const std::vector<SuspPoint<K>>& pts,
                              const std::optional<std::vector<SuspPoint<K>>>& targets = std::nullopt,
                              double tol = 1e-9) {
  SurfaceSolve<K> s = surface_to_standard(x, pts, tol);
  std::vector<SuspPoint<K>> goal = s.standard;
  if (targets) {
    if (targets->size() != pts.size()) fail(errc::domain, "surface-solve", "targets have a different size");
    SurfaceSolve<K> back = surface_to_standard(x, *targets, tol);
    s.word.append(back.word.inverse(susp_stage::inverse_target));
    goal = *targets;
  }
  auto out = s.word.replay(x, pts);
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (max_distance(out[i], goal[i]) > (scalar_ops<K>::exact ? 0.0 : tol))
      fail(scalar_ops<K>::exact ? errc::internal : errc::infeasible, "surface-solve",
           "replay residual " + format_double(max_distance(out[i], goal[i])) + " exceeds tolerance");
  return s;
}

/// Replays the word, re-checks each step postcondition on both legs, and
/// returns the max-norm residual against expect.
template <class K>
double verify_surface_word(const SuspensionVariety& x, const SurfaceWord<K>& w, const std::vector<SuspPoint<K>>& pts,
                           const std::vector<SuspPoint<K>>& expect, double tol, std::string* why = nullptr) {
  auto note = [&](const std::string& s) {
    if (why) *why = s;
  };
  if (pts.size() != expect.size()) {
    note("point counts differ");
    return 1e300;
  }
  SurfaceWord<K> forward, backward;
  for (const auto& l : w.letters) {
    if (l.stage.rfind(susp_stage::inverse_target, 0) == 0)
      backward.letters.push_back(l);
    else
      forward.letters.push_back(l);
  }
  auto check_leg = [&](const SurfaceWord<K>& leg, std::vector<SuspPoint<K>> cur) {
    const char* tags[] = {susp_stage::nonzero_v, susp_stage::distinct_u, susp_stage::standard_v,
                          susp_stage::standard_x};
    std::size_t li = 0;
    for (int step = 1; step <= 4; ++step) {
      while (li < leg.letters.size() && leg.letters[li].stage.find(tags[step - 1]) != std::string::npos) {
        const auto& l = leg.letters[li++];
        for (auto& p : cur) p = surface_act(x, l.side, l.q, l.t, p);
      }
      if (!surface_step_holds(x, step, cur, tol)) return step;
    }
    return li == leg.letters.size() ? 0 : 5;
  };
  if (int bad = check_leg(forward, pts)) {
    note("source leg fails the postcondition of step " + std::to_string(bad));
    return 1e300;
  }
  if (!backward.letters.empty()) {
    if (int bad = check_leg(backward.inverse(), expect)) {
      note("target leg fails the postcondition of step " + std::to_string(bad));
      return 1e300;
    }
  }
  auto out = w.replay(x, pts);
  double r = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) r = std::max(r, max_distance(out[i], expect[i]));
  note(r == 0 ? "exact match" : "residual " + format_double(r));
  return r;
}

// ---------------------------------------------------------------------------
// Flexibility at hyperbolic points.

struct SuspFlexCertificate {
  /// Rows xi_j(P) of the base family at P = pi(p).
  linalg::RatMat base_velocity;
  linalg::RatMat e;
  /// Base derivation with d(f)(P) != 0, reused on the u side.
  std::size_t special = 0;
  std::size_t rank = 0;
  /// Lifts with q = v for the base family, then the u-side lift of the special one.
  std::vector<SuspLnd> lnds;

  bool full(std::size_t dim) const { return rank == dim; }
};

inline SuspFlexCertificate flexibility_matrix(const SuspensionVariety& x, const SuspPoint<Rational>& p,
                                              std::optional<std::vector<Derivation>> family = std::nullopt);

/// n = dim base derivations spanning the tangent space at P.
inline std::vector<Derivation> base_flex_family(const SuspensionVariety& base, const SuspPoint<Rational>& P) {
  std::vector<Derivation> fam;
  if (base.level() == 0) {
    for (std::size_t i = 0; i < base.k; ++i) fam.push_back(Derivation::partial(base.k, i));
    return fam;
  }
  for (const auto& l : flexibility_matrix(base, P).lnds) fam.push_back(l.lifted);
  return fam;
}

inline SuspFlexCertificate flexibility_matrix(const SuspensionVariety& x, const SuspPoint<Rational>& p,
                                              std::optional<std::vector<Derivation>> family) {
  const char* st = "flexibility";
  if (x.level() == 0) fail(errc::domain, st, "affine space is not a suspension");
  if (!on_variety(x, p)) fail(errc::domain, st, "point is not on the variety");
  const std::size_t ui = x.u_index(x.level()), vi = x.v_index(x.level());
  const Rational u0 = p[ui], v0 = p[vi];
  if (u0 * v0 == 0) fail(errc::domain, st, "point is not hyperbolic (uv = 0)");
  const SuspensionVariety base = base_of(x);
  const SuspPoint<Rational> P = project(p);
  if (!family) family = base_flex_family(base, P);
  const std::size_t n = base.dim(), nb = base.nvars();

  SuspFlexCertificate c;
  for (const auto& d : *family) c.base_velocity.push_back(velocity(d, P));
  if (linalg::rank(c.base_velocity, nb) < n)
    fail(errc::infeasible, st, "base derivations do not span the tangent space at pi(p)");

  std::vector<Rational> df;
  for (const auto& d : *family) df.push_back(eval_prefix(d(x.top()), P));
  auto it = std::find_if(df.begin(), df.end(), [](const Rational& r) { return r != 0; });
  if (it == df.end()) fail(errc::infeasible, st, "no base derivation with d(f)(P) != 0 among those supplied");
  c.special = static_cast<std::size_t>(it - df.begin());

  auto row = [&](const Rational& scale, std::size_t j, bool u_side) {
    linalg::RatVec r;
    for (const auto& xi : c.base_velocity[j]) r.push_back(scale * xi);
    r.push_back(u_side ? Rational(0) : df[j]);
    r.push_back(u_side ? df[j] : Rational(0));
    return r;
  };
  // Only the spanning subfamily enters E; the rows after it are redundant.
  std::vector<std::size_t> keep;
  {
    linalg::RatMat acc;
    for (std::size_t j = 0; j < family->size() && keep.size() < n; ++j) {
      acc.push_back(c.base_velocity[j]);
      if (linalg::rank(acc, nb) == keep.size() + 1)
        keep.push_back(j);
      else
        acc.pop_back();
    }
  }
  const QPoly z(std::vector<Rational>{0, 1});
  for (auto j : keep) {
    c.e.push_back(row(v0, j, false));
    c.lnds.push_back(lift_lnd(x, (*family)[j], z, 'v'));
  }
  c.e.push_back(row(u0, c.special, true));
  c.lnds.push_back(lift_lnd(x, (*family)[c.special], z, 'u'));

  // Second route: velocities of the lifted derivations at p.
  for (std::size_t r = 0; r < c.lnds.size(); ++r)
    if (velocity(c.lnds[r].lifted, p) != c.e[r])
      fail(errc::internal, st, "lifted velocity differs from the matrix row");
  c.rank = linalg::rank(c.e, nb + 2);
  return c;
}

}  // namespace toricflex
