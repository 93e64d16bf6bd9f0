#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "toricflex/error.hpp"
#include "toricflex/lattice.hpp"
#include "toricflex/polynomial.hpp"
#include "toricflex/toric.hpp"

namespace toricflex {

/// Demazure root: <rho_ray, e> = -1 and <rho_j, e> >= 0 for j != ray.
struct Root {
  IntVec e;
  std::size_t ray = 0;
  friend bool operator==(const Root&, const Root&) = default;
  friend bool operator<(const Root& a, const Root& b) {
    if (a.ray != b.ray) return a.ray < b.ray;
    return a.e < b.e;
  }
};

inline bool is_root(const ToricVariety& x, const IntVec& e, std::size_t ray) {
  if (e.size() != x.rank() || ray >= x.rays().size()) return false;
  for (std::size_t j = 0; j < x.rays().size(); ++j) {
    Int p = linalg::dot(x.rays()[j], e);
    if (j == ray ? p != -1 : p < 0) return false;
  }
  return true;
}

inline void check_root(const ToricVariety& x, const Root& r) {
  if (!is_root(x, r.e, r.ray))
    fail(errc::domain, "root", to_string(r.e) + " is not a root for ray " + std::to_string(r.ray));
}

/// The distinguished ray of a character, if it is a root.
inline std::optional<Root> as_root(const ToricVariety& x, const IntVec& e) {
  for (std::size_t i = 0; i < x.rays().size(); ++i)
    if (is_root(x, e, i)) return Root{e, i};
  return std::nullopt;
}

/// All roots with sup-norm at most `bound`, ordered by distinguished ray then coordinates.
inline std::vector<Root> enumerate_roots(const ToricVariety& x, long bound) {
  if (bound < 1) fail(errc::domain, "enumerate-roots", "bound must be at least 1");
  const std::size_t n = x.rank();
  std::vector<Root> out;
  IntVec e(n, -bound);
  for (;;) {
    if (auto r = as_root(x, e)) out.push_back(*r);
    std::size_t k = 0;
    while (k < n && e[k] == bound) e[k] = -bound, ++k;
    if (k == n) break;
    ++e[k];
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::map<std::size_t, std::vector<Root>> partition_roots(const std::vector<Root>& roots) {
  std::map<std::size_t, std::vector<Root>> classes;
  for (const auto& r : roots) classes[r.ray].push_back(r);
  return classes;
}

/// A root for the given ray: e0 with <rho_i, e0> = -1 moved along a relative
/// interior vector of the facet by the least k that makes every other pairing
/// nonnegative.
inline Root root_for_ray(const ToricVariety& x, std::size_t i) {
  const auto& rays = x.rays();
  if (i >= rays.size()) fail(errc::domain, "root-for-ray", "ray index out of range");
  const std::size_t n = x.rank();
  auto e0 = linalg::solve_integer({rays[i]}, n, {Int(-1)});
  if (!e0) fail(errc::internal, "root-for-ray", "ray is not primitive");
  IntVec v0(n, 0);
  for (const auto& r : x.dual().rays())
    if (linalg::dot(rays[i], r) == 0) v0 = add(v0, r);
  std::optional<Int> k;
  for (std::size_t j = 0; j < rays.size(); ++j) {
    if (j == i) continue;
    Int pv = linalg::dot(rays[j], v0);
    if (pv <= 0) fail(errc::internal, "root-for-ray", "facet vector is not relatively interior");
    Int need = ceil_div(-linalg::dot(rays[j], *e0), pv);
    if (!k || need > *k) k = need;
  }
  IntVec e = add(*e0, scale(k.value_or(Int(0)), v0));
  Root r{e, i};
  check_root(x, r);
  return r;
}

/// Element of the kernel of the root derivation: sum of coef * chi^m with <rho_e, m> = 0.
struct KernelElement {
  std::vector<std::pair<Rational, IntVec>> terms;

  static KernelElement one(std::size_t n) { return {{{Rational(1), IntVec(n, 0)}}}; }
  bool is_one() const { return terms.size() == 1 && terms[0].first == 1 && is_zero(terms[0].second); }
  friend bool operator==(const KernelElement&, const KernelElement&) = default;
};

inline void check_kernel_element(const ToricVariety& x, const Root& r, const KernelElement& q) {
  for (const auto& [c, m] : q.terms) {
    if (m.size() != x.rank()) fail(errc::rank_mismatch, "kernel", "kernel term has wrong rank");
    if (linalg::dot(x.rays()[r.ray], m) != 0)
      fail(errc::domain, "kernel", "term " + to_string(m) + " is not annihilated by the derivation");
    if (!x.dual().contains(m)) fail(errc::domain, "kernel", "term " + to_string(m) + " is not regular");
  }
}

inline Rational evaluate_kernel(const ToricVariety& x, const KernelElement& q, const Point& p) {
  Rational v = 0;
  for (const auto& [c, m] : q.terms) v += c * evaluate_character(x, p, m);
  return v;
}

struct GeneratorApplication {
  Root root;
  KernelElement q;
  Rational t;
};

/// One step of the derivation on a character: (<rho_e, m>, m + e).
inline std::pair<Int, IntVec> lnd_apply(const ToricVariety& x, const Root& r, const IntVec& m) {
  if (m.size() != x.rank()) fail(errc::rank_mismatch, "lnd", "character rank differs");
  return {linalg::dot(x.rays()[r.ray], m), add(m, r.e)};
}

/// Hilbert values of exp(s * d_e).p as polynomials in s.
inline std::vector<QPoly> orbit_polynomials(const ToricVariety& x, const Root& r, const Point& p) {
  std::vector<QPoly> out;
  const auto& rho = x.rays()[r.ray];
  for (const auto& h : x.hilb()) {
    long a = to_long(linalg::dot(rho, h));
    std::vector<Rational> c;
    IntVec m = h;
    for (long k = 0; k <= a; ++k) {
      c.push_back(Rational(binomial(a, k)) * evaluate_character(x, p, m));
      m = add(m, r.e);
    }
    out.push_back(QPoly(c));
  }
  return out;
}

/// exp(s * d_e).p for a scalar s.
inline Point exp_scalar(const ToricVariety& x, const Root& r, const Rational& s, const Point& p) {
  if (s == 0) return p;
  RatVec w;
  for (const auto& poly : orbit_polynomials(x, r, p)) w.push_back(poly(s));
  return point_from_values(x, w);
}

inline Point exp_action(const ToricVariety& x, const GeneratorApplication& g, const Point& p) {
  check_root(x, g.root);
  check_kernel_element(x, g.root, g.q);
  Rational s = g.t * evaluate_kernel(x, g.q, p);
  return exp_scalar(x, g.root, s, p);
}

/// The one-parameter subgroup of the distinguished ray acting by t^{<rho_e, m>}.
inline Point re_action(const ToricVariety& x, const Root& r, const Rational& t, const Point& p) {
  if (t == 0) fail(errc::domain, "re-action", "torus parameter is zero");
  Point out = p;
  const auto& rho = x.rays()[r.ray];
  const auto& basis = x.face(p.face).basis;
  for (std::size_t i = 0; i < basis.size(); ++i) out.chi[i] *= pow(t, to_long(linalg::dot(rho, basis[i])));
  return out;
}

struct HConnectedWitness {
  bool connected = false;
  struct Row {
    std::size_t ray;
    Int pairing;
    bool in_small, in_large;  // membership in the dual faces of tau1 and tau2
  };
  std::vector<Row> table;
  std::string reason;
};

/// Criterion for the pair (O_tau1, O_tau2), tau2 a face of tau1, to be joined by an H_e-orbit.
inline HConnectedWitness h_connected(const ToricVariety& x, const Root& r, std::size_t tau1, std::size_t tau2) {
  check_root(x, r);
  const auto& f1 = x.face(tau1);
  const auto& f2 = x.face(tau2);
  if ((f2.mask & ~f1.mask) != 0) fail(errc::domain, "h-connected", "second orbit is not in the closure of the first");
  HConnectedWitness w;
  const RayMask d1 = f1.dual_mask, d2 = f2.dual_mask;
  for (std::size_t j = 0; j < x.rays().size(); ++j)
    w.table.push_back({j, linalg::dot(x.rays()[j], r.e), bool(d1 >> j & 1u), bool(d2 >> j & 1u)});
  if (f1.dim != f2.dim + 1) {
    w.reason = "orbit dimensions do not differ by one";
    return w;
  }
  RayMask cut = 0;
  for (const auto& row : w.table) {
    if (!row.in_large) continue;
    if (row.pairing > 0) {
      w.reason = "root is positive on ray " + std::to_string(row.ray) + " of the larger dual face";
      return w;
    }
    if (row.pairing == 0) cut |= RayMask{1} << row.ray;
  }
  if (cut != d1) {
    w.reason = "hyperplane section of the larger dual face is not the smaller one";
    return w;
  }
  w.connected = true;
  w.reason = "root is nonpositive on the larger dual face and cuts out the smaller one";
  return w;
}

/// Stability of the orbit closure under H_e, checked on lattice points of a box.
inline bool stable_under(const ToricVariety& x, const Root& r, std::size_t tau) {
  check_root(x, r);
  const std::size_t n = x.rank();
  Int emax = 0;
  for (const auto& c : r.e) emax = std::max(emax, Int(abs(c)));
  Int hmax = 0;
  for (const auto& h : x.hilb())
    for (const auto& c : h) hmax = std::max(hmax, Int(abs(c)));
  const long box = to_long(hmax + emax + 2);
  const auto& rho = x.rays()[r.ray];
  IntVec m(n, -box);
  for (;;) {
    if (x.dual().contains(m) && !x.face_contains(tau, m) && linalg::dot(rho, m) > 0) {
      IntVec me = add(m, r.e);
      if (!x.dual().contains(me) || x.face_contains(tau, me)) return false;
    }
    std::size_t k = 0;
    while (k < n && m[k] == box) m[k] = -box, ++k;
    if (k == n) break;
    ++m[k];
  }
  return true;
}

struct HOrbitTrace {
  std::size_t generic_face = 0;
  std::optional<std::size_t> special_face;
  std::optional<Rational> exceptional_t;  // parameter at which the orbit meets the smaller orbit
  bool rational = true;                   // false if the special fibre is not a rational point
  std::vector<std::size_t> faces_met;
  std::optional<Point> special_point;
};

/// Follows the H_e-orbit of p and reports the torus orbits it meets.
inline HOrbitTrace trace_h_orbit(const ToricVariety& x, const Root& r, const Point& p) {
  check_root(x, r);
  auto polys = orbit_polynomials(x, r, p);
  bool moves = std::any_of(polys.begin(), polys.end(), [](const QPoly& q) { return q.degree() > 0; });
  if (!moves) fail(errc::domain, "trace", "point is fixed by the subgroup");
  std::vector<Rational> cands;
  for (const auto& q : polys)
    if (q.degree() > 0)
      for (const auto& z : rational_roots(q)) cands.push_back(z);
  std::sort(cands.begin(), cands.end());
  cands.erase(std::unique(cands.begin(), cands.end()), cands.end());

  auto face_at = [&](const Rational& s) {
    RatVec w;
    for (const auto& q : polys) w.push_back(q(s));
    return point_from_values(x, w);
  };
  Rational generic = 1;
  while (std::binary_search(cands.begin(), cands.end(), generic)) generic += 1;
  HOrbitTrace tr;
  tr.generic_face = face_at(generic).face;
  tr.faces_met.push_back(tr.generic_face);
  for (const auto& s : cands) {
    Point q = face_at(s);
    if (q.face == tr.generic_face) continue;
    if (std::find(tr.faces_met.begin(), tr.faces_met.end(), q.face) == tr.faces_met.end())
      tr.faces_met.push_back(q.face);
    if (!tr.special_face) {
      tr.special_face = q.face;
      tr.exceptional_t = s;
      tr.special_point = q;
    }
  }
  if (!tr.special_face) tr.rational = false;
  return tr;
}

/// First n rays (lexicographic index order) spanning N_Q.
inline std::vector<std::size_t> choose_ray_basis(const ToricVariety& x) {
  std::vector<std::size_t> out;
  detail::for_each_subset(x.rays().size(), x.rank(), [&](const std::vector<std::size_t>& idx) {
    if (!out.empty()) return;
    RatMat m;
    for (auto i : idx) m.push_back(linalg::to_rational(x.rays()[i]));
    if (linalg::determinant(m) != 0) out = idx;
  });
  if (out.empty()) fail(errc::domain, "basis", "rays do not span");
  return out;
}

struct FlexCertificate {
  std::vector<std::size_t> basis_rays;
  std::vector<Root> roots;
  RatMat velocity;  // rows: roots, columns: Hilbert basis
  std::size_t rank = 0;
};

/// Velocity vectors of the root subgroups at an open-orbit point span the tangent space.
inline FlexCertificate flexibility_certificate(const ToricVariety& x, const Point& p) {
  if (p.face != x.open_face()) fail(errc::domain, "flex", "point is not in the open orbit");
  FlexCertificate c;
  c.basis_rays = choose_ray_basis(x);
  for (auto i : c.basis_rays) {
    Root r = root_for_ray(x, i);
    c.roots.push_back(r);
    RatVec row;
    for (const auto& h : x.hilb()) {
      auto [coef, m] = lnd_apply(x, r, h);
      row.push_back(coef == 0 ? Rational(0) : Rational(coef) * evaluate_character(x, p, m));
    }
    c.velocity.push_back(row);
  }
  c.rank = linalg::rank(c.velocity, x.hilb().size());
  if (c.rank != x.rank()) fail(errc::internal, "flex", "velocity matrix is rank deficient");
  return c;
}

}  // namespace toricflex
