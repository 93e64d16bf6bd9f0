#pragma once

#include <algorithm>
#include <memory>
#include <string>
#include <vector>

#include "toricflex/error.hpp"
#include "toricflex/lattice.hpp"
#include "toricflex/linalg.hpp"
#include "toricflex/rational.hpp"

namespace toricflex {

/// Per-face data of the orbit catalog. Faces are faces of the dual cone;
/// the corresponding face of sigma is recorded as a ray mask of sigma.
struct OrbitFace {
  RayMask mask = 0;       // rays of the dual cone in the face
  RayMask dual_mask = 0;  // rays of sigma orthogonal to the face
  int dim = 0;
  IntMat basis;  // Z-basis of the group generated by the lattice points of the face
  std::vector<std::size_t> hilb;  // indices of Hilbert basis elements in the face
  bool smooth = false;            // dual face of sigma extends to a lattice basis

  // coordinates of m in `basis`: inv * (m restricted to coord_cols)
  std::vector<std::size_t> coord_cols;
  RatMat coord_inv;
  // Smith form of the exponent matrix (rows: hilb elements, cols: basis)
  linalg::SmithForm snf;
};

class ToricVariety {
 public:
  struct Impl {
    Cone sigma, dual;
    std::size_t n = 0;
    IntMat hilb;
    std::vector<OrbitFace> faces;
    std::size_t open_face = 0, vertex_face = 0;
  };

  std::size_t rank() const { return impl_->n; }
  const Cone& sigma() const { return impl_->sigma; }
  const Cone& dual() const { return impl_->dual; }
  const IntMat& rays() const { return impl_->sigma.rays(); }
  const IntMat& hilb() const { return impl_->hilb; }
  const std::vector<OrbitFace>& faces() const { return impl_->faces; }
  const OrbitFace& face(std::size_t i) const { return impl_->faces.at(i); }
  std::size_t open_face() const { return impl_->open_face; }
  std::size_t vertex_face() const { return impl_->vertex_face; }

  std::size_t face_by_mask(RayMask dual_cone_mask) const {
    for (std::size_t i = 0; i < impl_->faces.size(); ++i)
      if (impl_->faces[i].mask == dual_cone_mask) return i;
    fail(errc::domain, "face", "ray set does not describe a face of the dual cone");
  }

  std::size_t face_by_sigma_mask(RayMask sigma_mask) const {
    for (std::size_t i = 0; i < impl_->faces.size(); ++i)
      if (impl_->faces[i].dual_mask == sigma_mask) return i;
    fail(errc::domain, "face", "ray set does not describe a face of the cone");
  }

  /// Coordinates of m in the lattice basis of the face; m must lie in its group.
  IntVec coordinates(std::size_t face_idx, const IntVec& m) const {
    const auto& f = face(face_idx);
    const std::size_t d = f.basis.size();
    RatVec sub(d);
    for (std::size_t i = 0; i < d; ++i) sub[i] = m[f.coord_cols[i]];
    RatVec c = linalg::mat_vec(f.coord_inv, sub);
    IntVec out(d);
    IntVec back(impl_->n, 0);
    for (std::size_t i = 0; i < d; ++i) {
      if (c[i].get_den() != 1) fail(errc::internal, "toric", "vector outside the face lattice");
      out[i] = c[i].get_num();
      for (std::size_t k = 0; k < impl_->n; ++k) back[k] += out[i] * f.basis[i][k];
    }
    if (back != m) fail(errc::internal, "toric", "vector outside the face lattice");
    return out;
  }

  bool face_contains(std::size_t face_idx, const IntVec& m) const {
    const auto& f = face(face_idx);
    if (!impl_->dual.contains(m)) return false;
    // m lies in the face iff it is orthogonal to every ray of the dual face
    for (auto i : mask_indices(f.dual_mask))
      if (linalg::dot(impl_->sigma.rays()[i], m) != 0) return false;
    return true;
  }

  friend bool operator==(const ToricVariety& a, const ToricVariety& b) { return a.impl_->sigma == b.impl_->sigma; }

  const Impl* impl() const { return impl_.get(); }

 private:
  friend ToricVariety build_variety(const Cone& sigma, std::size_t max_rank);
  explicit ToricVariety(std::shared_ptr<const Impl> i) : impl_(std::move(i)) {}
  std::shared_ptr<const Impl> impl_;
};

inline ToricVariety build_variety(const Cone& sigma, std::size_t max_rank = 4) {
  if (sigma.space() != Space::N) fail(errc::domain, "build-variety", "cone must live in N");
  if (!sigma.pointed()) fail(errc::domain, "build-variety", "cone is not pointed");
  if (!sigma.full_dimensional()) fail(errc::domain, "build-variety", "cone is not full-dimensional");
  if (sigma.ambient_rank() == 0) fail(errc::domain, "build-variety", "rank zero");
  auto impl = std::make_shared<ToricVariety::Impl>();
  impl->sigma = sigma;
  impl->dual = sigma.dual();
  impl->n = sigma.ambient_rank();
  for (const auto& h : hilbert_basis(impl->dual, max_rank)) impl->hilb.push_back(h.coords);
  const std::size_t n = impl->n;

  for (const auto& fd : impl->dual.faces()) {
    OrbitFace f;
    f.mask = fd.mask;
    f.dim = fd.dim;
    f.dual_mask = impl->dual.dual_face_mask(fd.mask);
    f.smooth = sigma.smooth_face(f.dual_mask);
    IntMat gens;
    for (std::size_t i = 0; i < impl->hilb.size(); ++i) {
      bool in = true;
      for (auto r : mask_indices(f.dual_mask))
        if (linalg::dot(sigma.rays()[r], impl->hilb[i]) != 0) in = false;
      if (in) {
        f.hilb.push_back(i);
        gens.push_back(impl->hilb[i]);
      }
    }
    if (fd.dim == static_cast<int>(n)) {
      f.basis = linalg::identity(n);
    } else {
      f.basis = linalg::lattice_basis(gens, n);
    }
    if (static_cast<int>(f.basis.size()) != f.dim) fail(errc::internal, "build-variety", "face lattice rank mismatch");
    const std::size_t d = f.basis.size();
    detail::for_each_subset(n, d, [&](const std::vector<std::size_t>& idx) {
      if (!f.coord_cols.empty() || d == 0) return;
      RatMat sub(d, RatVec(d));
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) sub[i][j] = f.basis[j][idx[i]];
      if (auto inv = linalg::inverse(sub)) {
        f.coord_cols = idx;
        f.coord_inv = *inv;
      }
    });
    impl->faces.push_back(std::move(f));
  }
  // exponent matrices need coordinates, which need the face data above
  auto tmp = std::shared_ptr<ToricVariety::Impl>(impl);
  ToricVariety probe(tmp);
  for (std::size_t fi = 0; fi < impl->faces.size(); ++fi) {
    auto& f = impl->faces[fi];
    IntMat a;
    for (auto h : f.hilb) a.push_back(probe.coordinates(fi, impl->hilb[h]));
    f.snf = linalg::smith_normal_form(a, f.basis.size());
    for (const auto& dv : f.snf.divisors)
      if (dv != 1) fail(errc::internal, "build-variety", "face Hilbert elements do not generate the face lattice");
    if (f.dim == static_cast<int>(n)) impl->open_face = fi;
    if (f.dim == 0) impl->vertex_face = fi;
  }
  return ToricVariety(impl);
}

inline ToricVariety build_variety(const IntMat& rays) { return build_variety(Cone::from_rays(Space::N, rays)); }

/// A point: support face of the dual cone plus character values on the face lattice basis.
struct Point {
  std::size_t face = 0;
  RatVec chi;
  friend bool operator==(const Point&, const Point&) = default;
  friend bool operator<(const Point& a, const Point& b) {
    if (a.face != b.face) return a.face < b.face;
    return a.chi < b.chi;
  }
};

/// theta(t).x_tau: character values prod_i t_i^{<rho_i, b>} on the face basis.
inline Point point_on_face(const ToricVariety& x, std::size_t face, const std::vector<std::size_t>& basis_rays,
                           const RatVec& t) {
  const std::size_t n = x.rank();
  if (basis_rays.size() != n || t.size() != n)
    fail(errc::rank_mismatch, "point-from-torus", "need exactly n rays and n coordinates");
  IntMat rows;
  for (auto i : basis_rays) {
    if (i >= x.rays().size()) fail(errc::domain, "point-from-torus", "ray index out of range");
    rows.push_back(x.rays()[i]);
  }
  if (linalg::rank(rows, n) != n) fail(errc::domain, "point-from-torus", "rays are linearly dependent");
  for (const auto& s : t)
    if (s == 0) fail(errc::domain, "point-from-torus", "torus coordinate is zero");
  Point p{face, {}};
  for (const auto& b : x.face(face).basis) {
    Rational v = 1;
    for (std::size_t i = 0; i < n; ++i) v *= pow(t[i], to_long(linalg::dot(rows[i], b)));
    p.chi.push_back(v);
  }
  return p;
}

inline Point point_from_torus(const ToricVariety& x, const std::vector<std::size_t>& basis_rays, const RatVec& t) {
  return point_on_face(x, x.open_face(), basis_rays, t);
}

/// The distinguished point of an orbit (all character values 1).
inline Point distinguished_point(const ToricVariety& x, std::size_t face) {
  return Point{face, RatVec(x.face(face).basis.size(), 1)};
}

inline Rational evaluate_character(const ToricVariety& x, const Point& p, const IntVec& m) {
  if (m.size() != x.rank()) fail(errc::rank_mismatch, "evaluate-character", "character rank differs");
  if (!x.dual().contains(m)) fail(errc::domain, "evaluate-character", "character " + to_string(m) + " is not regular");
  if (!x.face_contains(p.face, m)) return 0;
  IntVec c = x.coordinates(p.face, m);
  Rational v = 1;
  for (std::size_t i = 0; i < c.size(); ++i)
    if (c[i] != 0) v *= pow(p.chi[i], to_long(c[i]));
  return v;
}

/// Character value on an arbitrary lattice vector of the face group (Laurent extension).
inline Rational evaluate_on_face_group(const ToricVariety& x, const Point& p, const IntVec& m) {
  IntVec c = x.coordinates(p.face, m);
  Rational v = 1;
  for (std::size_t i = 0; i < c.size(); ++i)
    if (c[i] != 0) v *= pow(p.chi[i], to_long(c[i]));
  return v;
}

inline RatVec hilbert_values(const ToricVariety& x, const Point& p) {
  RatVec out;
  out.reserve(x.hilb().size());
  for (const auto& h : x.hilb()) out.push_back(evaluate_character(x, p, h));
  return out;
}

/// Rebuilds a point from its Hilbert-basis value vector.
inline Point point_from_values(const ToricVariety& x, const RatVec& w) {
  if (w.size() != x.hilb().size()) fail(errc::rank_mismatch, "reconstruct", "value vector length mismatch");
  IntVec sum(x.rank(), 0);
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i] != 0) {
      support.push_back(i);
      sum = add(sum, x.hilb()[i]);
    }
  std::size_t fi = x.face_by_mask(x.dual().minimal_face_of(sum));
  const auto& f = x.face(fi);
  if (f.hilb != support)
    fail(errc::internal, "reconstruct", "value vector support is not the Hilbert set of a face");
  RatVec rhs;
  for (auto h : f.hilb) rhs.push_back(w[h]);
  Point p{fi, f.basis.empty() ? RatVec{} : linalg::solve_multiplicative(f.snf, rhs, "reconstruct")};
  for (std::size_t k = 0; k < f.hilb.size(); ++k)
    if (evaluate_on_face_group(x, p, x.hilb()[f.hilb[k]]) != rhs[k])
      fail(errc::internal, "reconstruct", "value vector violates the toric relations");
  return p;
}

inline std::size_t orbit_of(const Point& p) { return p.face; }
inline int orbit_dim(const ToricVariety& x, std::size_t face) { return x.face(face).dim; }

/// Saturated sublattice of N whose subtorus fixes the points of the orbit.
inline IntMat stabilizer_subtorus(const ToricVariety& x, std::size_t face) {
  return linalg::integer_kernel(x.face(face).basis, x.rank());
}

inline bool is_smooth_point(const ToricVariety& x, const Point& p) { return x.face(p.face).smooth; }

/// Certificate that the common kernel of the root derivations is the constants.
struct MlCertificate {
  struct Entry {
    std::size_t ray;
    IntMat facet_rays;  // rays of the facet of the dual cone orthogonal to the ray
  };
  std::vector<Entry> facets;
  std::size_t ray_matrix_rank = 0;
  IntMat intersection_basis;  // Z-basis of the common orthogonal lattice
  bool trivial = false;
};

inline MlCertificate ml_trivial_certificate(const ToricVariety& x) {
  MlCertificate c;
  const auto& rays = x.rays();
  for (std::size_t i = 0; i < rays.size(); ++i) {
    MlCertificate::Entry e{i, {}};
    for (const auto& r : x.dual().rays())
      if (linalg::dot(rays[i], r) == 0) e.facet_rays.push_back(r);
    c.facets.push_back(std::move(e));
  }
  c.ray_matrix_rank = linalg::rank(rays, x.rank());
  c.intersection_basis = linalg::integer_kernel(rays, x.rank());
  c.trivial = c.intersection_basis.empty() && c.ray_matrix_rank == x.rank();
  return c;
}

/// Recomputes the certificate from the variety and compares.
inline bool check_ml_certificate(const ToricVariety& x, const MlCertificate& c) {
  auto fresh = ml_trivial_certificate(x);
  if (fresh.ray_matrix_rank != c.ray_matrix_rank || fresh.intersection_basis != c.intersection_basis) return false;
  if (fresh.facets.size() != c.facets.size()) return false;
  for (std::size_t i = 0; i < c.facets.size(); ++i) {
    if (fresh.facets[i].facet_rays != c.facets[i].facet_rays) return false;
    // each listed facet ray lies on the facet and the facet spans a hyperplane
    for (const auto& r : c.facets[i].facet_rays)
      if (linalg::dot(x.rays()[c.facets[i].ray], r) != 0 || !x.dual().contains(r)) return false;
    if (linalg::rank(c.facets[i].facet_rays, x.rank()) + 1 != x.rank()) return false;
  }
  return c.trivial == fresh.trivial && fresh.trivial;
}

}  // namespace toricflex
