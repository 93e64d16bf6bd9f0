#pragma once

#include <algorithm>
#include <compare>
#include <functional>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "toricflex/error.hpp"
#include "toricflex/linalg.hpp"
#include "toricflex/rational.hpp"

namespace toricflex {

using linalg::IntMat;
using linalg::IntVec;
using linalg::RatMat;
using linalg::RatVec;

enum class Space { N, M };

inline const char* to_string(Space s) { return s == Space::N ? "N" : "M"; }

struct LatticeVector {
  IntVec coords;
  Space space = Space::N;

  std::size_t rank() const { return coords.size(); }
  bool is_primitive() const { return linalg::content(coords) == 1; }

  friend bool operator==(const LatticeVector&, const LatticeVector&) = default;
  friend bool operator<(const LatticeVector& a, const LatticeVector& b) {
    if (a.space != b.space) return a.space < b.space;
    return a.coords < b.coords;
  }
};

inline LatticeVector vec_n(std::initializer_list<long> xs) {
  LatticeVector v{{}, Space::N};
  for (long x : xs) v.coords.emplace_back(x);
  return v;
}

inline LatticeVector vec_m(std::initializer_list<long> xs) {
  LatticeVector v{{}, Space::M};
  for (long x : xs) v.coords.emplace_back(x);
  return v;
}

inline IntVec ints(std::initializer_list<long> xs) {
  IntVec v;
  for (long x : xs) v.emplace_back(x);
  return v;
}

inline IntVec add(const IntVec& a, const IntVec& b) {
  IntVec c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
  return c;
}

inline IntVec sub(const IntVec& a, const IntVec& b) {
  IntVec c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] - b[i];
  return c;
}

inline IntVec scale(const Int& k, const IntVec& a) {
  IntVec c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = k * a[i];
  return c;
}

inline bool is_zero(const IntVec& v) {
  return std::all_of(v.begin(), v.end(), [](const Int& x) { return x == 0; });
}

inline std::string to_string(const IntVec& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i].get_str();
  return s + ")";
}

/// The natural pairing between N and M.
inline Int pairing(const LatticeVector& v, const LatticeVector& m) {
  if (v.rank() != m.rank())
    fail(errc::rank_mismatch, "pairing",
         "ranks " + std::to_string(v.rank()) + " and " + std::to_string(m.rank()) + " differ");
  if (v.space == m.space) fail(errc::domain, "pairing", "both vectors live in the same lattice");
  return linalg::dot(v.coords, m.coords);
}

inline Int pairing(const IntVec& v, const IntVec& m) {
  if (v.size() != m.size())
    fail(errc::rank_mismatch, "pairing",
         "ranks " + std::to_string(v.size()) + " and " + std::to_string(m.size()) + " differ");
  return linalg::dot(v, m);
}

using RayMask = std::uint64_t;

inline std::vector<std::size_t> mask_indices(RayMask mask) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < 64; ++i)
    if (mask >> i & 1u) out.push_back(i);
  return out;
}

inline int popcount(RayMask m) { return __builtin_popcountll(m); }

class Cone;

/// A face of a cone, identified by the rays of the parent it contains.
struct FaceData {
  RayMask mask = 0;
  int dim = 0;
};

class Cone {
 public:
  struct Impl {
    std::size_t n = 0;
    Space space = Space::N;
    IntMat rays;        // primitive extremal generators modulo lineality, sorted
    IntMat lineality;   // canonical basis of the lineality space
    IntMat equations;   // Z-basis of the orthogonal complement of the span
    IntMat facets;      // inward primitive normals lying in the span, sorted
    std::vector<FaceData> faces;  // ordered by dimension then mask
    int dim = 0;
    mutable std::once_flag dual_once;
    mutable std::shared_ptr<const Impl> dual;
  };

  Cone() : Cone(from_generators(0, Space::N, {})) {}

  /// The cone generated by the given vectors (any rational cone).
  static Cone from_generators(std::size_t n, Space space, const IntMat& gens);

  static Cone from_rays(Space space, const std::vector<IntVec>& rays) {
    if (rays.empty()) fail(errc::domain, "cone", "rank of an empty ray list is unknown");
    return from_generators(rays.front().size(), space, rays);
  }

  std::size_t ambient_rank() const { return impl_->n; }
  Space space() const { return impl_->space; }
  const IntMat& rays() const { return impl_->rays; }
  const IntMat& facets() const { return impl_->facets; }
  const IntMat& lineality() const { return impl_->lineality; }
  const IntMat& equations() const { return impl_->equations; }
  int dim() const { return impl_->dim; }
  bool pointed() const { return impl_->lineality.empty(); }
  bool full_dimensional() const { return impl_->equations.empty(); }

  LatticeVector ray(std::size_t i) const { return {impl_->rays.at(i), impl_->space}; }

  bool contains(const IntVec& x) const {
    if (x.size() != impl_->n) fail(errc::rank_mismatch, "cone", "vector rank differs from cone rank");
    for (const auto& e : impl_->equations)
      if (linalg::dot(e, x) != 0) return false;
    for (const auto& a : impl_->facets)
      if (linalg::dot(a, x) < 0) return false;
    return true;
  }

  bool contains_rational(const RatVec& x) const {
    for (const auto& e : impl_->equations)
      if (linalg::dot(linalg::to_rational(e), x) != 0) return false;
    for (const auto& a : impl_->facets)
      if (linalg::dot(linalg::to_rational(a), x) < 0) return false;
    return true;
  }

  Cone dual() const;

  const std::vector<FaceData>& faces() const { return impl_->faces; }

  /// Index into faces() of the face with the given ray mask.
  std::size_t face_index(RayMask mask) const {
    for (std::size_t i = 0; i < impl_->faces.size(); ++i)
      if (impl_->faces[i].mask == mask) return i;
    fail(errc::internal, "cone", "ray set does not describe a face");
  }

  /// Smallest face containing the given (cone) vector.
  RayMask minimal_face_of(const IntVec& x) const {
    RayMask mask = full_mask();
    for (const auto& a : impl_->facets)
      if (linalg::dot(a, x) == 0)
        for (std::size_t i = 0; i < impl_->rays.size(); ++i)
          if (linalg::dot(a, impl_->rays[i]) != 0) mask &= ~(RayMask{1} << i);
    return mask;
  }

  RayMask full_mask() const {
    return impl_->rays.size() == 64 ? ~RayMask{0} : (RayMask{1} << impl_->rays.size()) - 1;
  }

  IntMat face_rays(RayMask mask) const {
    IntMat out;
    for (auto i : mask_indices(mask)) out.push_back(impl_->rays.at(i));
    return out;
  }

  /// Mask of the face of the dual cone orthogonal to the face `mask` of this cone.
  RayMask dual_face_mask(RayMask mask) const {
    Cone d = dual();
    RayMask out = 0;
    auto fr = face_rays(mask);
    for (std::size_t j = 0; j < d.rays().size(); ++j) {
      bool orth = true;
      for (const auto& r : fr)
        if (linalg::dot(r, d.rays()[j]) != 0) orth = false;
      for (const auto& l : impl_->lineality)
        if (linalg::dot(l, d.rays()[j]) != 0) orth = false;
      if (orth) out |= RayMask{1} << j;
    }
    return out;
  }

  /// True iff the rays of the face extend to a basis of the ambient lattice.
  bool smooth_face(RayMask mask) const {
    auto fr = face_rays(mask);
    if (fr.empty()) return true;
    auto s = linalg::smith_normal_form(fr, impl_->n);
    if (s.divisors.size() != fr.size()) return false;
    return std::all_of(s.divisors.begin(), s.divisors.end(), [](const Int& d) { return d == 1; });
  }

  friend bool operator==(const Cone& a, const Cone& b) {
    return a.impl_->n == b.impl_->n && a.impl_->space == b.impl_->space && a.impl_->rays == b.impl_->rays &&
           a.impl_->lineality == b.impl_->lineality && a.impl_->equations.size() == b.impl_->equations.size();
  }

  const Impl* impl() const { return impl_.get(); }

 private:
  explicit Cone(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

/// A face of a cone: parent plus the subset of parent rays it contains.
struct Face {
  Cone parent;
  RayMask mask = 0;
  int dim = 0;

  IntMat rays() const { return parent.face_rays(mask); }
  friend bool operator==(const Face& a, const Face& b) { return a.parent == b.parent && a.mask == b.mask; }
};

namespace detail {

inline void for_each_subset(std::size_t n, std::size_t k, const std::function<void(const std::vector<std::size_t>&)>& f) {
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  if (k > n) return;
  for (;;) {
    f(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

inline IntMat canonical_basis(std::vector<RatVec> basis, std::size_t n) {
  if (basis.empty()) return {};
  linalg::rref(basis, n);
  IntMat out;
  for (auto& row : basis) {
    auto p = linalg::primitive(row);
    if (!is_zero(p)) out.push_back(p);
  }
  return out;
}

// Orthogonal projection of x onto the complement of span(l).
inline IntVec project_out(const IntVec& x, const IntMat& l, std::size_t n) {
  if (l.empty()) return x;
  RatMat lr = linalg::to_rational(l);
  RatMat gram(l.size(), RatVec(l.size()));
  for (std::size_t i = 0; i < l.size(); ++i)
    for (std::size_t j = 0; j < l.size(); ++j) gram[i][j] = linalg::dot(lr[i], lr[j]);
  auto ginv = linalg::inverse(gram);
  RatVec xr = linalg::to_rational(x);
  RatVec rhs(l.size());
  for (std::size_t i = 0; i < l.size(); ++i) rhs[i] = linalg::dot(lr[i], xr);
  RatVec c = linalg::mat_vec(*ginv, rhs);
  for (std::size_t i = 0; i < l.size(); ++i)
    for (std::size_t j = 0; j < n; ++j) xr[j] -= c[i] * lr[i][j];
  return linalg::primitive(xr);
}

}  // namespace detail

inline Cone Cone::from_generators(std::size_t n, Space space, const IntMat& gens_in) {
  auto impl = std::make_shared<Impl>();
  impl->n = n;
  impl->space = space;
  IntMat gens;
  for (const auto& g : gens_in) {
    if (g.size() != n) fail(errc::rank_mismatch, "cone", "generator rank differs from cone rank");
    if (!is_zero(g)) gens.push_back(linalg::primitive(g));
  }
  std::sort(gens.begin(), gens.end());
  gens.erase(std::unique(gens.begin(), gens.end()), gens.end());

  const std::size_t d = linalg::rank(gens, n);
  impl->dim = static_cast<int>(d);
  impl->equations = detail::canonical_basis(linalg::nullspace(linalg::to_rational(gens), n), n);

  // facet normals: orthogonal to d-1 independent generators and to the equations
  std::set<IntVec> facets;
  if (d > 0) {
    detail::for_each_subset(gens.size(), d - 1, [&](const std::vector<std::size_t>& idx) {
      IntMat rows;
      for (auto i : idx) rows.push_back(gens[i]);
      if (linalg::rank(rows, n) != d - 1) return;
      for (const auto& e : impl->equations) rows.push_back(e);
      auto ns = linalg::nullspace(linalg::to_rational(rows), n);
      if (ns.size() != 1) return;
      IntVec a = linalg::primitive(ns[0]);
      bool pos = false, neg = false;
      for (const auto& g : gens) {
        Int s = linalg::dot(a, g);
        if (s > 0) pos = true;
        if (s < 0) neg = true;
      }
      if (pos && neg) return;
      if (!pos && !neg) return;
      if (neg) a = scale(Int(-1), a);
      facets.insert(a);
    });
  }
  impl->facets.assign(facets.begin(), facets.end());

  if (d > 0) {
    IntMat rows = impl->facets;
    for (const auto& e : impl->equations) rows.push_back(e);
    impl->lineality = detail::canonical_basis(linalg::nullspace(linalg::to_rational(rows), n), n);
  }
  const std::size_t l = impl->lineality.size();

  std::set<IntVec> rays;
  for (const auto& g : gens) {
    IntMat tight = impl->equations;
    for (const auto& a : impl->facets)
      if (linalg::dot(a, g) == 0) tight.push_back(a);
    if (linalg::rank(tight, n) + l + 1 != n) continue;
    IntVec r = detail::project_out(g, impl->lineality, n);
    if (!is_zero(r)) rays.insert(r);
  }
  impl->rays.assign(rays.begin(), rays.end());
  if (impl->rays.size() > 64) fail(errc::capability, "cone", "more than 64 extremal rays");

  // faces by closure under facet intersection
  const std::size_t r = impl->rays.size();
  RayMask full = r == 64 ? ~RayMask{0} : (RayMask{1} << r) - 1;
  std::set<RayMask> seen{full};
  std::vector<RayMask> todo{full};
  while (!todo.empty()) {
    RayMask cur = todo.back();
    todo.pop_back();
    for (const auto& a : impl->facets) {
      RayMask next = 0;
      for (auto i : mask_indices(cur))
        if (linalg::dot(a, impl->rays[i]) == 0) next |= RayMask{1} << i;
      if (seen.insert(next).second) todo.push_back(next);
    }
  }
  // a nonempty face set with lineality includes the lineality space itself
  for (RayMask m : seen) {
    IntMat span = impl->lineality;
    for (auto i : mask_indices(m)) span.push_back(impl->rays[i]);
    impl->faces.push_back({m, static_cast<int>(linalg::rank(span, n))});
  }
  // closure under facets can yield a mask twice only through equal faces; sets dedupe masks.
  std::sort(impl->faces.begin(), impl->faces.end(), [](const FaceData& a, const FaceData& b) {
    return a.dim != b.dim ? a.dim < b.dim : a.mask < b.mask;
  });
  return Cone(std::move(impl));
}

inline Cone Cone::dual() const {
  std::call_once(impl_->dual_once, [this] {
    IntMat gens = impl_->facets;
    for (const auto& e : impl_->equations) {
      gens.push_back(e);
      gens.push_back(scale(Int(-1), e));
    }
    Space s = impl_->space == Space::N ? Space::M : Space::N;
    impl_->dual = from_generators(impl_->n, s, gens).impl_;
  });
  return Cone(impl_->dual);
}

inline Cone dual_cone(const Cone& c) { return c.dual(); }

inline std::vector<Face> faces(const Cone& c) {
  std::vector<Face> out;
  for (const auto& f : c.faces()) out.push_back({c, f.mask, f.dim});
  return out;
}

inline Face dual_face(const Face& f) {
  Cone d = f.parent.dual();
  RayMask m = f.parent.dual_face_mask(f.mask);
  return {d, m, d.faces()[d.face_index(m)].dim};
}

inline bool smooth_face_test(const Face& f) { return f.parent.smooth_face(f.mask); }

namespace detail {

// Simplicial cones (as ray masks) covering the face `mask` of a pointed cone.
inline std::vector<RayMask> triangulate(const Cone& c, RayMask mask, int dim) {
  if (popcount(mask) == dim) return {mask};
  std::size_t r0 = mask_indices(mask).front();
  std::vector<RayMask> out;
  for (const auto& f : c.faces()) {
    if (f.dim != dim - 1 || (f.mask & ~mask) != 0 || (f.mask >> r0 & 1u)) continue;
    for (RayMask s : triangulate(c, f.mask, f.dim)) out.push_back(s | RayMask{1} << r0);
  }
  return out;
}

// Nonzero lattice points of the half-open parallelepiped sum lambda_i r_i, lambda in [0,1).
inline std::vector<IntVec> parallelepiped_points(const IntMat& simplex, std::size_t n) {
  const std::size_t d = simplex.size();
  // choose d coordinates on which the rays are independent
  std::vector<std::size_t> coords;
  for_each_subset(n, d, [&](const std::vector<std::size_t>& idx) {
    if (!coords.empty()) return;
    RatMat sub(d, RatVec(d));
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) sub[i][j] = simplex[j][idx[i]];
    if (linalg::determinant(sub) != 0) coords = idx;
  });
  RatMat sub(d, RatVec(d));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) sub[i][j] = simplex[j][coords[i]];
  RatMat inv = *linalg::inverse(sub);

  IntVec lo(n, 0), hi(n, 0);
  for (const auto& r : simplex)
    for (std::size_t k = 0; k < n; ++k) (r[k] < 0 ? lo[k] : hi[k]) += r[k];

  std::vector<IntVec> out;
  IntVec x = lo;
  for (;;) {
    RatVec xs(d);
    for (std::size_t i = 0; i < d; ++i) xs[i] = x[coords[i]];
    RatVec lambda = linalg::mat_vec(inv, xs);
    bool ok = std::all_of(lambda.begin(), lambda.end(), [](const Rational& v) { return v >= 0 && v < 1; });
    if (ok && !is_zero(x)) {
      RatVec y(n, 0);
      for (std::size_t j = 0; j < d; ++j)
        for (std::size_t k = 0; k < n; ++k) y[k] += lambda[j] * simplex[j][k];
      if (y == linalg::to_rational(x)) out.push_back(x);
    }
    std::size_t k = 0;
    while (k < n && x[k] == hi[k]) x[k] = lo[k], ++k;
    if (k == n) break;
    ++x[k];
  }
  return out;
}

}  // namespace detail

/// Minimal generating set of the semigroup c ∩ lattice, sorted lexicographically.
inline std::vector<LatticeVector> hilbert_basis(const Cone& c, std::size_t max_rank = 4) {
  if (c.ambient_rank() > max_rank)
    fail(errc::capability, "hilbert-basis",
         "rank " + std::to_string(c.ambient_rank()) + " exceeds bound " + std::to_string(max_rank));
  if (!c.pointed()) fail(errc::domain, "hilbert-basis", "cone contains a line");
  const std::size_t n = c.ambient_rank();
  std::set<IntVec> cand(c.rays().begin(), c.rays().end());
  if (c.dim() > 0)
    for (RayMask s : detail::triangulate(c, c.full_mask(), c.dim()))
      for (auto& p : detail::parallelepiped_points(c.face_rays(s), n)) cand.insert(p);
  std::vector<LatticeVector> out;
  for (const auto& x : cand) {
    bool reducible = false;
    for (const auto& y : cand)
      if (y != x && c.contains(sub(x, y))) {
        reducible = true;
        break;
      }
    if (!reducible) out.push_back({x, c.space()});
  }
  return out;
}

}  // namespace toricflex
