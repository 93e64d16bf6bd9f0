#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "toricflex/demazure.hpp"
#include "toricflex/error.hpp"
#include "toricflex/toric.hpp"

namespace toricflex {

/// A word letter with the solver stage that produced it.
struct Letter {
  GeneratorApplication g;
  std::string stage;
};

struct AutomorphismWord {
  std::vector<Letter> letters;

  std::size_t size() const { return letters.size(); }

  std::vector<Point> replay(const ToricVariety& x, std::vector<Point> pts) const {
    for (const auto& l : letters)
      for (auto& p : pts) p = exp_action(x, l.g, p);
    return pts;
  }

  /// Reversed letters with negated parameters.
  AutomorphismWord inverse(const std::string& stage_prefix = "") const {
    AutomorphismWord w;
    for (auto it = letters.rbegin(); it != letters.rend(); ++it) {
      Letter l = *it;
      l.g.t = -l.g.t;
      if (!stage_prefix.empty()) l.stage = stage_prefix + l.stage;
      w.letters.push_back(std::move(l));
    }
    return w;
  }

  void append(const AutomorphismWord& other) {
    letters.insert(letters.end(), other.letters.begin(), other.letters.end());
  }
};

namespace stage {
inline constexpr const char* open_orbit = "open-orbit";
inline constexpr const char* separate = "separate-orbits";
inline constexpr const char* normalize = "normalize";
inline constexpr const char* inverse_target = "inverse-target:";
}  // namespace stage

struct StageResult {
  AutomorphismWord word;
  std::vector<Point> points;
};

/// Order of the kernel of the ray-basis parametrization of the torus.
inline Int theta_order(const ToricVariety& x, const std::vector<std::size_t>& basis) {
  IntMat rows;
  for (auto i : basis) rows.push_back(x.rays()[i]);
  auto s = linalg::smith_normal_form(rows, x.rank());
  if (s.divisors.size() != x.rank()) fail(errc::domain, "kappa", "rays are dependent");
  Int k = 1;
  for (const auto& d : s.divisors) k *= d;
  return k;
}

/// t' = eps * t for a kappa-th root of unity eps; over Q eps is +1 or -1.
inline bool kappa_equivalent(const Rational& a, const Rational& b, const Int& kappa) {
  return a == b || (kappa % 2 == 0 && a == -b);
}

inline std::size_t facet_of_ray(const ToricVariety& x, std::size_t ray) {
  return x.face_by_sigma_mask(RayMask{1} << ray);
}

/// Values on a lattice basis of rho^perp: equal keys iff same orbit of the ray subgroup.
inline RatVec ray_orbit_key(const ToricVariety& x, std::size_t ray, const Point& p) {
  if (p.face != x.open_face()) fail(errc::domain, "orbit-key", "point is not in the open orbit");
  RatVec key;
  for (const auto& b : x.face(facet_of_ray(x, ray)).basis) key.push_back(evaluate_on_face_group(x, p, b));
  return key;
}

inline int tuple_dimension(const ToricVariety& x, const std::vector<Point>& pts) {
  int d = 0;
  for (const auto& p : pts) d += x.face(p.face).dim;
  return d;
}

/// Root raising the orbit of a point whose dual face is smooth.
inline Root raising_root(const ToricVariety& x, const Point& p) {
  const auto& f = x.face(p.face);
  auto delta = mask_indices(f.dual_mask);
  if (delta.empty()) fail(errc::internal, "open-orbit", "point already in the open orbit");
  const std::size_t n = x.rank();
  IntMat rows;
  IntVec rhs;
  for (std::size_t k = 0; k < delta.size(); ++k) {
    rows.push_back(x.rays()[delta[k]]);
    rhs.push_back(k == 0 ? Int(-1) : Int(0));
  }
  auto e1 = linalg::solve_integer(rows, n, rhs);
  if (!e1) fail(errc::domain, "open-orbit", "dual face rays are not part of a lattice basis");
  IntVec ell(n, 0);
  for (auto i : mask_indices(f.mask)) ell = add(ell, x.dual().rays()[i]);
  Int k = 0;
  for (std::size_t j = 0; j < x.rays().size(); ++j) {
    if (f.dual_mask >> j & 1u) continue;
    Int pl = linalg::dot(x.rays()[j], ell);
    if (pl <= 0) fail(errc::internal, "open-orbit", "face vector is not relatively interior");
    Int need = floor_div(-linalg::dot(x.rays()[j], *e1), pl) + 1;
    k = std::max(k, need);
  }
  Root r{add(*e1, scale(k, ell)), delta[0]};
  check_root(x, r);
  return r;
}

/// Moves every point of the tuple into the open orbit.
inline StageResult move_to_open_orbit(const ToricVariety& x, std::vector<Point> pts) {
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (!is_smooth_point(x, pts[i]))
      fail(errc::domain, stage::open_orbit, "point " + std::to_string(i) + " is singular");
  StageResult res;
  for (;;) {
    auto it = std::find_if(pts.begin(), pts.end(), [&](const Point& p) { return p.face != x.open_face(); });
    if (it == pts.end()) break;
    const std::size_t i = static_cast<std::size_t>(it - pts.begin());
    Root r = raising_root(x, pts[i]);
    const int d0 = tuple_dimension(x, pts);
    bool done = false;
    for (long t = 1; t <= 10000 && !done; ++t) {
      GeneratorApplication g{r, KernelElement::one(x.rank()), Rational(t)};
      std::vector<Point> next;
      bool ok = true;
      for (std::size_t j = 0; j < pts.size() && ok; ++j) {
        Point q = exp_action(x, g, pts[j]);
        int before = x.face(pts[j].face).dim, after = x.face(q.face).dim;
        if (after < before || (j == i && after <= before)) ok = false;
        next.push_back(std::move(q));
      }
      if (!ok) continue;
      if (tuple_dimension(x, next) <= d0) fail(errc::internal, stage::open_orbit, "orbit dimension did not grow");
      res.word.letters.push_back({g, stage::open_orbit});
      pts = std::move(next);
      done = true;
    }
    if (!done) fail(errc::internal, stage::open_orbit, "no admissible parameter found");
  }
  res.points = std::move(pts);
  return res;
}

/// Invariant equal to 1 on the orbit of reps[0] and 0 on the orbits of the other reps.
inline KernelElement separating_invariant(const ToricVariety& x, const Root& r, const std::vector<Point>& reps) {
  check_root(x, r);
  if (reps.empty()) fail(errc::domain, "separate", "no representatives");
  const auto& facet = x.face(facet_of_ray(x, r.ray));
  std::map<IntVec, Rational> q{{IntVec(x.rank(), 0), Rational(1)}};
  for (std::size_t j = 1; j < reps.size(); ++j) {
    std::optional<std::size_t> hit;
    Rational a0, aj;
    for (auto h : facet.hilb) {
      a0 = evaluate_character(x, reps[0], x.hilb()[h]);
      aj = evaluate_character(x, reps[j], x.hilb()[h]);
      if (a0 != aj) {
        hit = h;
        break;
      }
    }
    if (!hit)
      fail(errc::infeasible, "separate", "representatives 0 and " + std::to_string(j) + " share an orbit");
    // factor (chi^h - aj) / (a0 - aj)
    const Rational inv = 1 / (a0 - aj);
    std::map<IntVec, Rational> next;
    for (const auto& [m, c] : q) {
      next[add(m, x.hilb()[*hit])] += c * inv;
      next[m] += -c * aj * inv;
    }
    q.clear();
    for (auto& [m, c] : next)
      if (c != 0) q.emplace(m, c);
  }
  KernelElement out;
  for (const auto& [m, c] : q) out.terms.push_back({c, m});
  if (evaluate_kernel(x, out, reps[0]) != 1) fail(errc::internal, "separate", "invariant is not 1 on the moved orbit");
  for (std::size_t j = 1; j < reps.size(); ++j)
    if (evaluate_kernel(x, out, reps[j]) != 0) fail(errc::internal, "separate", "invariant does not vanish");
  return out;
}

/// A letter that shifts along the orbit where q = 1 and fixes the orbits where q = 0.
inline GeneratorApplication stab_shift(const Root& r, const KernelElement& q, const Rational& t) { return {r, q, t}; }

inline bool keys_distinct(const ToricVariety& x, std::size_t ray, const std::vector<Point>& pts) {
  std::vector<RatVec> keys;
  for (const auto& p : pts) keys.push_back(ray_orbit_key(x, ray, p));
  std::sort(keys.begin(), keys.end());
  return std::adjacent_find(keys.begin(), keys.end()) == keys.end();
}

/// Puts the points of an open-orbit tuple on pairwise distinct orbits of the first basis ray.
inline StageResult make_r1_orbits_distinct(const ToricVariety& x, std::vector<Point> pts,
                                           const std::vector<std::size_t>& basis) {
  if (basis.size() < 2) fail(errc::domain, stage::separate, "needs rank at least 2");
  for (const auto& p : pts)
    if (p.face != x.open_face()) fail(errc::domain, stage::separate, "point is not in the open orbit");
  const std::size_t r1 = basis[0], r2 = basis[1];
  StageResult res;
  // groups of points sharing an orbit of the second ray subgroup
  std::vector<std::vector<std::size_t>> groups;
  {
    std::map<RatVec, std::size_t> index;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      auto key = ray_orbit_key(x, r2, pts[i]);
      auto [it, inserted] = index.emplace(key, groups.size());
      if (inserted) groups.emplace_back();
      groups[it->second].push_back(i);
    }
  }
  const Root e = root_for_ray(x, r2);
  auto clashes = [&](const std::vector<Point>& cur, std::size_t i) {
    auto ki = ray_orbit_key(x, r1, cur[i]);
    for (std::size_t j = 0; j < cur.size(); ++j)
      if (j != i && ray_orbit_key(x, r1, cur[j]) == ki) return true;
    return false;
  };
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& grp = groups[g];
    bool bad = std::any_of(grp.begin(), grp.end(), [&](std::size_t i) { return clashes(pts, i); });
    if (!bad) continue;
    std::vector<Point> reps{pts[grp[0]]};
    for (std::size_t h = 0; h < groups.size(); ++h)
      if (h != g) reps.push_back(pts[groups[h][0]]);
    KernelElement q = separating_invariant(x, e, reps);
    bool done = false;
    for (long t = 1; t <= 10000 && !done; ++t) {
      GeneratorApplication a = stab_shift(e, q, Rational(t));
      std::vector<Point> next;
      for (const auto& p : pts) next.push_back(exp_action(x, a, p));
      bool ok = std::all_of(grp.begin(), grp.end(), [&](std::size_t i) { return next[i].face == x.open_face(); });
      for (std::size_t i = 0; i < pts.size() && ok; ++i) {
        bool in_group = std::find(grp.begin(), grp.end(), i) != grp.end();
        if (!in_group && !(next[i] == pts[i])) fail(errc::internal, stage::separate, "frozen point moved");
        if (in_group && clashes(next, i)) ok = false;
      }
      if (!ok) continue;
      res.word.letters.push_back({a, stage::separate});
      pts = std::move(next);
      done = true;
    }
    if (!done) fail(errc::internal, stage::separate, "no admissible shift found");
  }
  if (!keys_distinct(x, r1, pts)) fail(errc::internal, stage::separate, "orbits are still not distinct");
  res.points = std::move(pts);
  return res;
}

/// Coordinates t with p = theta(t).x0 for the ray basis; irrational roots raise field-extension.
inline RatVec torus_coordinates(const ToricVariety& x, const std::vector<std::size_t>& basis, const Point& p,
                                const std::string& stage_tag = stage::normalize) {
  if (p.face != x.open_face()) fail(errc::domain, stage_tag, "point is not in the open orbit");
  const std::size_t n = x.rank();
  IntMat a(n, IntVec(n));
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = 0; l < n; ++l) a[k][l] = x.rays()[basis[l]][k];
  auto s = linalg::smith_normal_form(a, n);
  RatVec t = linalg::solve_multiplicative(s, p.chi, stage_tag);
  if (!(point_from_torus(x, basis, t) == p)) fail(errc::internal, stage_tag, "torus coordinates do not reproduce the point");
  return t;
}

/// First m positive integers that give pairwise distinct, non-kappa-equivalent standard points.
inline std::vector<Rational> standard_values(const ToricVariety& x, const std::vector<std::size_t>& basis,
                                             std::size_t m) {
  const Int kappa = theta_order(x, basis);
  std::vector<Rational> vals;
  std::vector<Point> pts;
  for (long v = 1; vals.size() < m; ++v) {
    Rational c(v);
    Point p = point_from_torus(x, basis, RatVec(x.rank(), c));
    bool ok = std::none_of(vals.begin(), vals.end(), [&](const Rational& u) { return kappa_equivalent(u, c, kappa); }) &&
              std::find(pts.begin(), pts.end(), p) == pts.end();
    if (!ok) continue;
    vals.push_back(c);
    pts.push_back(p);
  }
  return vals;
}

inline std::vector<Point> standard_tuple(const ToricVariety& x, const std::vector<std::size_t>& basis, std::size_t m) {
  std::vector<Point> out;
  for (const auto& v : standard_values(x, basis, m)) out.push_back(point_from_torus(x, basis, RatVec(x.rank(), v)));
  return out;
}

/// Sets every torus coordinate of point j to the j-th standard value, ray by ray.
inline StageResult normalize_to_standard(const ToricVariety& x, std::vector<Point> pts,
                                         const std::vector<std::size_t>& basis) {
  const std::size_t n = x.rank(), m = pts.size();
  if (!keys_distinct(x, basis[0], pts)) fail(errc::domain, stage::normalize, "points share an orbit of the first ray");
  auto targets = standard_values(x, basis, m);
  std::vector<RatVec> t;
  for (const auto& p : pts) t.push_back(torus_coordinates(x, basis, p));
  StageResult res;
  for (std::size_t l = 0; l < n; ++l) {
    const Root e = root_for_ray(x, basis[l]);
    for (std::size_t j = 0; j < m; ++j) {
      if (t[j][l] == targets[j]) continue;
      std::vector<Point> reps{pts[j]};
      for (std::size_t k = 0; k < m; ++k)
        if (k != j) reps.push_back(pts[k]);
      KernelElement q = separating_invariant(x, e, reps);
      const Rational c = targets[j] / t[j][l];
      const Rational s = (c - 1) / evaluate_on_face_group(x, pts[j], e.e);
      GeneratorApplication a = stab_shift(e, q, s);
      for (std::size_t k = 0; k < m; ++k) {
        Point moved = exp_action(x, a, pts[k]);
        if (k != j && !(moved == pts[k])) fail(errc::internal, stage::normalize, "frozen point moved");
        pts[k] = std::move(moved);
      }
      t[j][l] = targets[j];
      if (!(point_from_torus(x, basis, t[j]) == pts[j]))
        fail(errc::internal, stage::normalize, "shift did not reach the requested coordinate");
      res.word.letters.push_back({a, stage::normalize});
    }
  }
  if (!(pts == standard_tuple(x, basis, m))) fail(errc::internal, stage::normalize, "standard tuple not reached");
  res.points = std::move(pts);
  return res;
}

/// Word sending the tuple to the standard tuple.
inline StageResult to_standard(const ToricVariety& x, const std::vector<Point>& pts,
                               const std::vector<std::size_t>& basis) {
  StageResult a = move_to_open_orbit(x, pts);
  StageResult b = make_r1_orbits_distinct(x, a.points, basis);
  StageResult c = normalize_to_standard(x, b.points, basis);
  StageResult out;
  out.word = a.word;
  out.word.append(b.word);
  out.word.append(c.word);
  out.points = c.points;
  return out;
}

struct SolveResult {
  AutomorphismWord word;
  std::vector<std::size_t> basis;
  Int kappa;
  std::vector<Rational> standard;
  std::size_t forward_letters = 0;  // letters acting on the source tuple before the inverted part
};

inline void check_tuple(const ToricVariety& x, const std::vector<Point>& pts, const char* what) {
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].face >= x.faces().size() || pts[i].chi.size() != x.face(pts[i].face).basis.size())
      fail(errc::domain, "solve", std::string(what) + " point " + std::to_string(i) + " is malformed");
    for (const auto& c : pts[i].chi)
      if (c == 0) fail(errc::domain, "solve", std::string(what) + " point " + std::to_string(i) + " has a zero value");
    if (!is_smooth_point(x, pts[i]))
      fail(errc::domain, "solve", std::string(what) + " point " + std::to_string(i) + " is singular");
    for (std::size_t j = 0; j < i; ++j)
      if (pts[i] == pts[j])
        fail(errc::domain, "solve", std::string(what) + " points " + std::to_string(j) + " and " + std::to_string(i) +
                                        " coincide");
  }
}

/// Word w with replay(w, points) == targets (the standard tuple when targets are absent).
inline SolveResult solve(const ToricVariety& x, const std::vector<Point>& points,
                         const std::optional<std::vector<Point>>& targets = std::nullopt) {
  if (x.rank() < 2) fail(errc::domain, "solve", "transitivity solver needs rank at least 2");
  if (points.empty()) fail(errc::domain, "solve", "empty tuple");
  check_tuple(x, points, "source");
  if (targets) {
    if (targets->size() != points.size()) fail(errc::domain, "solve", "tuple sizes differ");
    check_tuple(x, *targets, "target");
  }
  SolveResult res;
  res.basis = choose_ray_basis(x);
  res.kappa = theta_order(x, res.basis);
  res.standard = standard_values(x, res.basis, points.size());
  StageResult fwd = to_standard(x, points, res.basis);
  res.word = fwd.word;
  res.forward_letters = fwd.word.size();
  std::vector<Point> expected = fwd.points;
  if (targets) {
    StageResult back = to_standard(x, *targets, res.basis);
    res.word.append(back.word.inverse(stage::inverse_target));
    expected = *targets;
  }
  if (!(res.word.replay(x, points) == expected)) fail(errc::internal, "solve", "replay does not reach the targets");
  return res;
}

}  // namespace toricflex
