#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "toricflex/io.hpp"
#include "toricflex/suspension.hpp"
#include "toricflex/toric.hpp"
#include "toricflex/transitivity.hpp"

namespace toricflex::testing {

inline std::string catalog_path(const std::string& rel) { return std::string(TORICFLEX_CATALOG) + "/" + rel; }

inline ToricVariety catalog_toric(const std::string& name) {
  return io::variety_from(io::read_json(catalog_path("toric/" + name + ".json")));
}

inline SuspensionVariety catalog_susp(const std::string& name) {
  return io::suspension_from(io::read_json(catalog_path("susp/" + name + ".json")));
}

inline const std::vector<std::string>& toric_names() {
  static const std::vector<std::string> names{"a2", "a3", "x21", "x31", "quadric"};
  return names;
}

inline const std::vector<std::string>& surface_names() {
  static const std::vector<std::string> names{"x2", "x2mx", "x3px"};
  return names;
}

using Rng = std::mt19937_64;

inline long uniform(Rng& g, long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(g); }

inline Rational rational(Rng& g, long num = 5, long den = 3) {
  Rational r(uniform(g, -num, num), uniform(g, 1, den));
  r.canonicalize();
  return r;
}

inline Rational nonzero_rational(Rng& g, long num = 5, long den = 3) {
  for (;;) {
    Rational r = rational(g, num, den);
    if (r != 0) return r;
  }
}

/// Smooth rational point: theta(t) applied to a distinguished point of a random smooth orbit.
inline Point smooth_point(const ToricVariety& x, Rng& g, double open_bias = 0.6) {
  std::vector<std::size_t> smooth;
  for (std::size_t i = 0; i < x.faces().size(); ++i)
    if (x.face(i).smooth) smooth.push_back(i);
  const auto basis = choose_ray_basis(x);
  std::size_t face = std::uniform_real_distribution<double>(0, 1)(g) < open_bias
                         ? x.open_face()
                         : smooth[static_cast<std::size_t>(uniform(g, 0, static_cast<long>(smooth.size()) - 1))];
  RatVec t;
  for (std::size_t i = 0; i < x.rank(); ++i) t.push_back(nonzero_rational(g));
  return point_on_face(x, face, basis, t);
}

/// Any rational point, singular orbits included.
inline Point any_point(const ToricVariety& x, Rng& g) {
  const auto basis = choose_ray_basis(x);
  auto face = static_cast<std::size_t>(uniform(g, 0, static_cast<long>(x.faces().size()) - 1));
  RatVec t;
  for (std::size_t i = 0; i < x.rank(); ++i) t.push_back(nonzero_rational(g));
  return point_on_face(x, face, basis, t);
}

inline std::vector<Point> smooth_tuple(const ToricVariety& x, Rng& g, std::size_t m) {
  std::vector<Point> pts;
  while (pts.size() < m) {
    Point p = smooth_point(x, g);
    if (std::find(pts.begin(), pts.end(), p) == pts.end()) pts.push_back(p);
  }
  return pts;
}

/// Random smooth point of the surface uv = f(x), drawn from small half-integers.
template <class K>
std::optional<SuspPoint<K>> surface_point(const SuspensionVariety& y, Rng& g) {
  const UPoly<K> f = surface_f<K>(y);
  auto half = [&] {
    Rational r(uniform(g, -5, 5), 2);
    r.canonicalize();
    return r;
  };
  Rational xr = half(), ur = half();
  if (uniform(g, 0, 3) == 0) ur = 0;
  const K x = scalar_ops<K>::from(xr), u = scalar_ops<K>::from(ur);
  const K fx = f(x);
  SuspPoint<K> p;
  if (ur == 0) {
    if (!near_zero(fx, 1e-12)) return std::nullopt;
    p = {x, u, scalar_ops<K>::from(half())};
  } else {
    p = {x, u, fx / u};
  }
  if (!smoothness_check(y, p)) return std::nullopt;
  return p;
}

template <class K>
std::vector<SuspPoint<K>> surface_tuple(const SuspensionVariety& y, Rng& g, std::size_t m) {
  std::vector<SuspPoint<K>> pts;
  while (pts.size() < m) {
    auto p = surface_point<K>(y, g);
    if (!p) continue;
    bool dup = std::any_of(pts.begin(), pts.end(), [&](const auto& q) { return same_point(q, *p, 1e-9); });
    if (!dup) pts.push_back(*p);
  }
  return pts;
}

/// Exact tuple whose Step-3 equations f(a) = u_i * i all have rational roots:
/// u_i = f(a_i)/i for distinct rational a_i, then v_i = f(x_i)/u_i.
inline std::vector<SuspPoint<Rational>> engineered_tuple(const SuspensionVariety& y, Rng& g, std::size_t m) {
  const QPoly f = surface_f<Rational>(y);
  std::vector<SuspPoint<Rational>> pts;
  std::vector<Rational> us;
  while (pts.size() < m) {
    const Rational a = rational(g, 7, 2);
    const Rational u = f(a) / Rational(static_cast<long>(pts.size() + 1));
    if (u == 0 || std::find(us.begin(), us.end(), u) != us.end()) continue;
    const Rational x = rational(g, 7, 2);
    if (f(x) == 0) continue;
    us.push_back(u);
    pts.push_back({x, u, f(x) / u});
  }
  return pts;
}

/// Random exact point of an iterated suspension: base point, then a nonzero
/// u (or a zero one when f vanishes) at every level.
inline SuspPoint<Rational> tower_point(const SuspensionVariety& y, Rng& g, bool allow_zero = true) {
  SuspPoint<Rational> p;
  for (std::size_t i = 0; i < y.k; ++i) p.push_back(rational(g, 4, 2));
  for (std::size_t l = 1; l <= y.level(); ++l) {
    const Rational fv = eval_prefix(y.fs[l - 1], p);
    if (fv == 0 && allow_zero) {
      if (uniform(g, 0, 1) == 0) {
        p.push_back(0);
        p.push_back(rational(g, 4, 2));
      } else {
        p.push_back(rational(g, 4, 2));
        p.push_back(0);
      }
      continue;
    }
    Rational u = nonzero_rational(g, 4, 2);
    p.push_back(u);
    p.push_back(fv / u);
  }
  return p;
}

/// Point with u_l v_l != 0 at every level.
inline SuspPoint<Rational> hyperbolic_point(const SuspensionVariety& y, Rng& g) {
  for (;;) {
    SuspPoint<Rational> p = tower_point(y, g, false);
    bool ok = true;
    for (std::size_t l = 1; l <= y.level(); ++l) ok = ok && p[y.u_index(l)] * p[y.v_index(l)] != 0;
    if (ok) return p;
  }
}

/// The base family at pi(p) contains a derivation moving f.
inline bool moves_f(const SuspensionVariety& y, const SuspPoint<Rational>& p) {
  const auto base = base_of(y);
  const auto P = project(p);
  for (const auto& d : base_flex_family(base, P))
    if (eval_prefix(d(y.top()), P) != 0) return true;
  return false;
}

}  // namespace toricflex::testing
