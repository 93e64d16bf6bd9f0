#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "toricflex/error.hpp"
#include "toricflex/suspension.hpp"
#include "toricflex/transitivity.hpp"

namespace toricflex {

/// exp(t_1 d_1), then exp(t_2 d_2), ...
using DerivationWord = std::vector<std::pair<Derivation, Rational>>;

inline std::vector<SuspPoint<Rational>> replay(const DerivationWord& w, std::vector<SuspPoint<Rational>> pts) {
  for (const auto& [d, t] : w) {
    Flow flow(d);
    for (auto& p : pts) p = flow(t, p);
  }
  return pts;
}

inline DerivationWord inverse(const DerivationWord& w) {
  DerivationWord r(w.rbegin(), w.rend());
  for (auto& l : r) l.second = -l.second;
  return r;
}

// ---------------------------------------------------------------------------
// A^k as the toric variety of the positive orthant.

struct AffineToric {
  ToricVariety x;
  /// coordinate of each Hilbert basis element
  std::vector<std::size_t> coord_of_hilb;
};

inline AffineToric affine_toric(std::size_t k) {
  AffineToric a{build_variety(linalg::identity(k)), {}};
  for (const auto& h : a.x.hilb()) {
    auto it = std::find(h.begin(), h.end(), Int(1));
    a.coord_of_hilb.push_back(static_cast<std::size_t>(it - h.begin()));
  }
  return a;
}

inline Point to_toric(const AffineToric& a, const SuspPoint<Rational>& p) {
  RatVec w;
  for (auto j : a.coord_of_hilb) w.push_back(p.at(j));
  return point_from_values(a.x, w);
}

inline SuspPoint<Rational> from_toric(const AffineToric& a, const Point& p) {
  SuspPoint<Rational> r(a.x.rank());
  auto w = hilbert_values(a.x, p);
  for (std::size_t h = 0; h < w.size(); ++h) r[a.coord_of_hilb[h]] = w[h];
  return r;
}

/// q * d_e as a derivation of k[x_1..x_k]: x_j -> sum c <rho, e_j> x^{m + e_j + e}.
inline Derivation to_derivation(const AffineToric& a, const GeneratorApplication& g) {
  const std::size_t k = a.x.rank();
  Derivation d = Derivation::zero(k);
  const auto& rho = a.x.rays()[g.root.ray];
  for (std::size_t j = 0; j < k; ++j) {
    if (rho[j] == 0) continue;
    for (const auto& [c, m] : g.q.terms) {
      Monomial mono(k);
      for (std::size_t i = 0; i < k; ++i) {
        Int e = m[i] + g.root.e[i] + (i == j ? 1 : 0);
        if (e < 0) fail(errc::internal, "affine-lnd", "derivation image is not a polynomial");
        mono[i] = static_cast<int>(to_long(e));
      }
      d.images[j].add_term(mono, c * Rational(rho[j]));
    }
  }
  return d;
}

// ---------------------------------------------------------------------------
// Rational points along lines of simple charts.

/// Value of g at univariate polynomial arguments.
inline QPoly compose(const QPolyN& g, const std::vector<QPoly>& args) {
  QPoly r;
  for (const auto& [m, c] : g.terms()) {
    QPoly t(std::vector<Rational>{c});
    for (std::size_t i = 0; i < g.nvars(); ++i)
      for (int e = 0; e < m[i]; ++e) t = t * args[i];
    r = r + t;
  }
  return r;
}

/// Fixed coordinate per level: ('u', c) means u_i = c and v_i = f_i / c.
using Chart = std::vector<std::pair<char, Rational>>;

/// Coordinates of the chart point over x(s) = r + s e_dir; the default chart has every u_i = 1.
inline std::vector<QPoly> chart_line(const SuspensionVariety& y, const std::vector<Rational>& r, std::size_t dir,
                                     const Chart& chart = {}) {
  std::vector<QPoly> c;
  for (std::size_t i = 0; i < y.k; ++i)
    c.push_back(QPoly(i == dir ? std::vector<Rational>{r[i], 1} : std::vector<Rational>{r[i]}));
  for (std::size_t i = 1; i <= y.level(); ++i) {
    auto [side, val] = i <= chart.size() ? chart[i - 1] : std::pair<char, Rational>{'u', Rational(1)};
    QPoly fi = compose(y.fs[i - 1], c);
    QPoly fixed(std::vector<Rational>{val}), other = QPoly(std::vector<Rational>{Rational(1) / val}) * fi;
    c.push_back(side == 'u' ? fixed : other);
    c.push_back(side == 'u' ? other : fixed);
  }
  return c;
}

inline SuspPoint<Rational> chart_point(const SuspensionVariety& y, const std::vector<Rational>& xs) {
  SuspPoint<Rational> p;
  for (const auto& l : chart_line(y, xs, 0)) p.push_back(l(Rational(0)));
  return p;
}

/// Integer grid points of growing max-norm radius.
inline std::vector<std::vector<Rational>> grid_shell(std::size_t k, long radius) {
  std::vector<std::vector<Rational>> out;
  std::vector<long> c(k, -radius);
  for (;;) {
    long mx = 0;
    for (auto v : c) mx = std::max(mx, std::labs(v));
    if (mx == radius) out.push_back(std::vector<Rational>(c.begin(), c.end()));
    std::size_t i = 0;
    while (i < k && c[i] == radius) c[i++] = -radius;
    if (i == k) break;
    ++c[i];
  }
  return out;
}

/// Charts tried by level_points: the default one first.
inline std::vector<Chart> charts(std::size_t level) {
  const std::vector<Rational> vals{1, -1, 2, -2, Rational(1, 2), Rational(-1, 2), 3, Rational(1, 3)};
  std::vector<Chart> out{Chart{}};
  for (std::size_t i = 0; i < level; ++i) {
    std::vector<Chart> next;
    for (const auto& c : out)
      for (char side : {'u', 'v'})
        for (const auto& v : vals) {
          Chart d = c;
          d.push_back({side, v});
          next.push_back(d);
        }
    out.insert(out.end(), next.begin(), next.end());
  }
  return out;
}

/// count distinct chart points P of y with f(P) = c, avoiding the listed ones.
/// Searches integer base lines through several charts; over Q such points
/// need not exist.
inline std::vector<SuspPoint<Rational>> level_points(const SuspensionVariety& y, const QPolyN& f, const Rational& c,
                                                     std::size_t count, const std::vector<SuspPoint<Rational>>& avoid,
                                                     const std::string& stage) {
  std::vector<SuspPoint<Rational>> found;
  auto fresh = [&](const SuspPoint<Rational>& p) {
    return std::find(avoid.begin(), avoid.end(), p) == avoid.end() &&
           std::find(found.begin(), found.end(), p) == found.end();
  };
  const auto all = charts(y.level());
  for (std::size_t ci = 0; ci < all.size() && found.size() < count; ++ci)
    for (long radius = 0; radius <= (ci == 0 ? 6 : 2) && found.size() < count; ++radius)
      for (const auto& r : grid_shell(y.k, radius))
        for (std::size_t dir = 0; dir < y.k && found.size() < count; ++dir) {
          auto line = chart_line(y, r, dir, all[ci]);
          QPoly g = compose(f, line) - QPoly(std::vector<Rational>{c});
          std::vector<Rational> ss;
          if (g.is_zero())
            for (long s = 0; s < static_cast<long>(count + avoid.size()) + 1; ++s) ss.push_back(s);
          else
            ss = rational_roots(g);
          for (const auto& s : ss) {
            SuspPoint<Rational> p;
            for (const auto& l : line) p.push_back(l(s));
            if (fresh(p) && found.size() < count) found.push_back(p);
          }
        }
  if (found.size() < count)
    fail(errc::field_extension, stage, "no rational chart point with f = " + to_string(c) + " found");
  return found;
}

// ---------------------------------------------------------------------------
// Transport of tuples on engine varieties.

struct TowerSolve {
  LndWord word;
  std::vector<SuspPoint<Rational>> standard;
};

inline TowerSolve tower_solve(const SuspensionVariety& x, const std::vector<SuspPoint<Rational>>& pts,
                              const std::optional<std::vector<SuspPoint<Rational>>>& targets = std::nullopt);

/// A word of derivations of y sending pts to targets (pointwise, in order).
inline DerivationWord transport(const SuspensionVariety& y, const std::vector<SuspPoint<Rational>>& pts,
                                const std::vector<SuspPoint<Rational>>& targets) {
  if (pts == targets) return {};
  DerivationWord w;
  if (y.level() == 0) {
    if (y.k == 1) {
      if (pts.size() != 1) fail(errc::domain, "transport", "translations of the line are only 1-transitive");
      w.push_back({Derivation::partial(1, 0), targets[0][0] - pts[0][0]});
      return w;
    }
    AffineToric a = affine_toric(y.k);
    std::vector<Point> p, q;
    for (const auto& s : pts) p.push_back(to_toric(a, s));
    for (const auto& s : targets) q.push_back(to_toric(a, s));
    for (const auto& l : solve(a.x, p, q).word.letters) w.push_back({to_derivation(a, l.g), l.g.t});
  } else if (y.is_surface()) {
    for (const auto& l : surface_solve<Rational>(y, pts, targets).word.letters)
      w.push_back({surface_lnd(y, l.q, l.side).lifted, l.t});
  } else {
    for (const auto& l : tower_solve(y, pts, targets).word.letters) w.push_back({l.lnd.lifted, l.t});
  }
  if (replay(w, pts) != targets) fail(errc::internal, "transport", "base word misses its targets");
  return w;
}

/// Derivations of y tried when a point needs d(f) != 0: coordinate
/// derivatives on A^k, and their lifts with q = z on both sides above it.
inline std::vector<Derivation> candidate_lnds(const SuspensionVariety& y) {
  if (y.level() == 0) {
    std::vector<Derivation> r;
    for (std::size_t i = 0; i < y.k; ++i) r.push_back(Derivation::partial(y.k, i));
    return r;
  }
  std::vector<Derivation> r;
  const QPoly z(std::vector<Rational>{0, 1});
  for (const auto& d : candidate_lnds(base_of(y))) {
    r.push_back(lift_lnd(y, d, z, 'v').lifted);
    r.push_back(lift_lnd(y, d, z, 'u').lifted);
  }
  return r;
}

namespace tower_stage {
inline constexpr const char* hyperbolic = "hyperbolic";
inline constexpr const char* fibres = "fibre-transport";
inline constexpr const char* standard = "standard-u1";
inline constexpr const char* inverse_target = "inverse-target:";
}  // namespace tower_stage

/// (B_i, 1, f(B_i)) with B_i the chart point over x = (i, 1, ..., 1).
inline std::vector<SuspPoint<Rational>> tower_standard_tuple(const SuspensionVariety& x, std::size_t m) {
  const SuspensionVariety b = base_of(x);
  std::vector<SuspPoint<Rational>> r;
  for (std::size_t i = 1; i <= m; ++i) {
    std::vector<Rational> xs(b.k, Rational(1));
    xs[0] = Rational(static_cast<long>(i));
    SuspPoint<Rational> p = chart_point(b, xs);
    Rational fv = eval_prefix(x.top(), p);
    p.push_back(1);
    p.push_back(fv);
    r.push_back(p);
  }
  return r;
}

namespace detail {

struct TowerState {
  const SuspensionVariety& x;
  SuspensionVariety base;
  std::size_t ui, vi;
  std::vector<SuspPoint<Rational>> pts;
  LndWord word;

  bool hyperbolic(std::size_t i) const { return pts[i][ui] != 0 && pts[i][vi] != 0; }

  void apply(const LndWord& w) {
    pts = w.replay<Rational>(pts);
    word.append(w);
  }

  /// Moves the points whose carrier coordinate equals c0 by a base word
  /// sending their projections to new_base; other carrier levels stay fixed.
  void move_fibre(char side, const Rational& c0, const std::vector<std::size_t>& members,
                  const std::vector<SuspPoint<Rational>>& new_base, const char* stage) {
    const std::size_t carrier = side == 'v' ? vi : ui;
    std::vector<Rational> frozen;
    for (const auto& p : pts)
      if (p[carrier] != c0 && p[carrier] != 0 &&
          std::find(frozen.begin(), frozen.end(), p[carrier]) == frozen.end())
        frozen.push_back(p[carrier]);
    std::vector<SuspPoint<Rational>> from;
    for (auto i : members) from.push_back(project(pts[i]));
    apply(freeze_word(x, transport(base, from, new_base), frozen, c0, side, stage));
  }
};

}  // namespace detail

/// Word sending pts to the standard tuple of u = 1 points.
inline TowerSolve tower_to_standard(const SuspensionVariety& x, const std::vector<SuspPoint<Rational>>& pts) {
  const char* st = "tower-solve";
  if (x.level() == 0) fail(errc::domain, st, "affine space is not a suspension");
  if (x.is_surface()) fail(errc::domain, st, "surfaces over the line use the surface solver");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!on_variety(x, pts[i])) fail(errc::domain, st, "point " + std::to_string(i) + " is not on the variety");
    if (!smoothness_check(x, pts[i])) fail(errc::domain, st, "point " + std::to_string(i) + " is singular");
    for (std::size_t j = 0; j < i; ++j)
      if (pts[i] == pts[j]) fail(errc::domain, st, "points are not distinct");
  }
  detail::TowerState s{x, base_of(x), x.u_index(x.level()), x.v_index(x.level()), pts, {}};
  const std::size_t m = pts.size();
  const QPoly z(std::vector<Rational>{0, 1});

  // Make every point hyperbolic, one point at a time.
  for (std::size_t guard = 0; guard < 3 * m + 3; ++guard) {
    std::size_t j = 0;
    while (j < m && s.hyperbolic(j)) ++j;
    if (j == m) break;
    const auto& p = s.pts[j];
    if (p[s.ui] == 0 && p[s.vi] == 0) {
      // push u off zero with q = v prod (v - v_h) over hyperbolic points
      std::vector<Rational> hv;
      for (std::size_t i = 0; i < m; ++i)
        if (s.hyperbolic(i) && std::find(hv.begin(), hv.end(), s.pts[i][s.vi]) == hv.end())
          hv.push_back(s.pts[i][s.vi]);
      const QPoly q = vanishing_multiplier(hv);
      const SuspPoint<Rational> P = project(p);
      std::optional<Derivation> pick;
      for (const auto& d : candidate_lnds(s.base))
        if (eval_prefix(d(x.top()), P) != 0) {
          pick = d;
          break;
        }
      if (!pick) fail(errc::infeasible, tower_stage::hyperbolic, "no candidate derivation moves f at a point with u = v = 0");
      LndWord w;
      w.letters.push_back({lift_lnd(x, *pick, q, 'v'), Rational(1), tower_stage::hyperbolic});
      s.apply(w);
      continue;
    }
    // exactly one of u, v vanishes: move the base point inside its fibre
    const char side = p[s.vi] != 0 ? 'v' : 'u';
    const std::size_t carrier = side == 'v' ? s.vi : s.ui;
    const Rational c0 = p[carrier];
    std::vector<std::size_t> members;
    std::vector<SuspPoint<Rational>> bases;
    for (std::size_t i = 0; i < m; ++i)
      if (s.pts[i][carrier] == c0) {
        members.push_back(i);
        bases.push_back(project(s.pts[i]));
      }
    std::vector<SuspPoint<Rational>> goal = bases;
    const auto pos = static_cast<std::size_t>(std::find(members.begin(), members.end(), j) - members.begin());
    // a base chart point off {f = 0}
    bool placed = false;
    for (long radius = 0; radius <= 6 && !placed; ++radius)
      for (const auto& r : grid_shell(s.base.k, radius)) {
        auto cand = chart_point(s.base, r);
        if (eval_prefix(x.top(), cand) == 0 || std::find(bases.begin(), bases.end(), cand) != bases.end()) continue;
        goal[pos] = cand;
        placed = true;
        break;
      }
    if (!placed) fail(errc::infeasible, tower_stage::hyperbolic, "no base point off the zero set of f found");
    s.move_fibre(side, c0, members, goal, tower_stage::hyperbolic);
  }
  for (std::size_t i = 0; i < m; ++i)
    if (!s.hyperbolic(i)) fail(errc::internal, tower_stage::hyperbolic, "a point stayed on u = 0 or v = 0");

  // Inside each level set v = c, move the base points onto f = c, so u = 1.
  std::vector<Rational> levels;
  for (const auto& p : s.pts)
    if (std::find(levels.begin(), levels.end(), p[s.vi]) == levels.end()) levels.push_back(p[s.vi]);
  for (const auto& c : levels) {
    std::vector<std::size_t> members;
    std::vector<SuspPoint<Rational>> bases;
    for (std::size_t i = 0; i < m; ++i)
      if (s.pts[i][s.vi] == c) {
        members.push_back(i);
        bases.push_back(project(s.pts[i]));
      }
    std::vector<SuspPoint<Rational>> goal(bases.size());
    std::vector<std::size_t> todo;
    for (std::size_t a = 0; a < bases.size(); ++a)
      if (s.pts[members[a]][s.ui] == 1)
        goal[a] = bases[a];
      else
        todo.push_back(a);
    if (todo.empty()) continue;
    auto fresh = level_points(s.base, x.top(), c, todo.size(), bases, tower_stage::fibres);
    for (std::size_t a = 0; a < todo.size(); ++a) goal[todo[a]] = fresh[a];
    s.move_fibre('v', c, members, goal, tower_stage::fibres);
  }
  for (const auto& p : s.pts)
    if (p[s.ui] != 1) fail(errc::internal, tower_stage::fibres, "a point is off u = 1");

  // On u = 1 the u-side lift with q = u acts as the base group.
  TowerSolve out;
  out.standard = tower_standard_tuple(x, m);
  std::vector<SuspPoint<Rational>> from, to;
  for (std::size_t i = 0; i < m; ++i) {
    from.push_back(project(s.pts[i]));
    to.push_back(project(out.standard[i]));
  }
  LndWord w;
  for (const auto& [d, t] : transport(s.base, from, to)) w.letters.push_back({lift_lnd(x, d, z, 'u'), t, tower_stage::standard});
  s.apply(w);
  if (s.pts != out.standard) fail(errc::internal, tower_stage::standard, "final tuple differs from the standard tuple");
  out.word = s.word;
  return out;
}

inline TowerSolve tower_solve(const SuspensionVariety& x, const std::vector<SuspPoint<Rational>>& pts,
                              const std::optional<std::vector<SuspPoint<Rational>>>& targets) {
  TowerSolve s = tower_to_standard(x, pts);
  std::vector<SuspPoint<Rational>> goal = s.standard;
  if (targets) {
    if (targets->size() != pts.size()) fail(errc::domain, "tower-solve", "targets have a different size");
    s.word.append(tower_to_standard(x, *targets).word.inverse(tower_stage::inverse_target));
    goal = *targets;
  }
  if (s.word.replay<Rational>(pts) != goal) fail(errc::internal, "tower-solve", "replay does not reach the targets");
  return s;
}

}  // namespace toricflex
