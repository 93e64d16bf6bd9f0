#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "toricflex/error.hpp"
#include "toricflex/rational.hpp"

// Exact linear algebra over Z and Q on small dense matrices. Matrices are
// row-major vectors of rows; an empty matrix carries its column count
// separately where it matters.
namespace toricflex::linalg {

using IntVec = std::vector<Int>;
using RatVec = std::vector<Rational>;
using IntMat = std::vector<IntVec>;
using RatMat = std::vector<RatVec>;

inline RatVec to_rational(const IntVec& v) { return RatVec(v.begin(), v.end()); }

inline RatMat to_rational(const IntMat& a) {
  RatMat out;
  out.reserve(a.size());
  for (const auto& row : a) out.push_back(to_rational(row));
  return out;
}

inline IntMat identity(std::size_t n) {
  IntMat id(n, IntVec(n, 0));
  for (std::size_t i = 0; i < n; ++i) id[i][i] = 1;
  return id;
}

template <class T>
std::vector<std::vector<T>> transpose(const std::vector<std::vector<T>>& a, std::size_t ncols) {
  std::vector<std::vector<T>> t(ncols, std::vector<T>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < ncols; ++j) t[j][i] = a[i][j];
  return t;
}

template <class T>
T dot(const std::vector<T>& a, const std::vector<T>& b) {
  if (a.size() != b.size()) fail(errc::rank_mismatch, "linalg", "dot product of vectors with different lengths");
  T s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

template <class T>
std::vector<T> mat_vec(const std::vector<std::vector<T>>& a, const std::vector<T>& x) {
  std::vector<T> y;
  y.reserve(a.size());
  for (const auto& row : a) y.push_back(dot(row, x));
  return y;
}

template <class T>
std::vector<std::vector<T>> mat_mul(const std::vector<std::vector<T>>& a, const std::vector<std::vector<T>>& b,
                                    std::size_t bcols) {
  std::vector<std::vector<T>> c(a.size(), std::vector<T>(bcols, 0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k) {
      if (a[i][k] == 0) continue;
      for (std::size_t j = 0; j < bcols; ++j) c[i][j] += a[i][k] * b[k][j];
    }
  return c;
}

/// Reduced row echelon form in place; returns pivot columns.
inline std::vector<std::size_t> rref(RatMat& a, std::size_t ncols) {
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t col = 0; col < ncols && row < a.size(); ++col) {
    std::size_t piv = row;
    while (piv < a.size() && a[piv][col] == 0) ++piv;
    if (piv == a.size()) continue;
    std::swap(a[row], a[piv]);
    Rational inv = 1 / a[row][col];
    for (auto& x : a[row]) x *= inv;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (i == row || a[i][col] == 0) continue;
      Rational f = a[i][col];
      for (std::size_t j = col; j < a[i].size(); ++j) a[i][j] -= f * a[row][j];
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

inline std::size_t rank(RatMat a, std::size_t ncols) { return rref(a, ncols).size(); }
inline std::size_t rank(const IntMat& a, std::size_t ncols) { return rank(to_rational(a), ncols); }

/// Basis of {x in Q^ncols : a x = 0}.
inline std::vector<RatVec> nullspace(RatMat a, std::size_t ncols) {
  auto pivots = rref(a, ncols);
  std::vector<bool> is_pivot(ncols, false);
  for (auto p : pivots) is_pivot[p] = true;
  std::vector<RatVec> basis;
  for (std::size_t free = 0; free < ncols; ++free) {
    if (is_pivot[free]) continue;
    RatVec v(ncols, 0);
    v[free] = 1;
    for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -a[r][free];
    basis.push_back(std::move(v));
  }
  return basis;
}

inline Int content(const IntVec& v) {
  Int g = 0;
  for (const auto& x : v) g = gcd(g, x);
  return g;
}

/// Smallest integer vector on the ray spanned by v (zero stays zero).
inline IntVec primitive(const IntVec& v) {
  Int g = content(v);
  if (g == 0 || g == 1) return v;
  IntVec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / g;
  return out;
}

inline IntVec primitive(const RatVec& v) {
  Int l = 1;
  for (const auto& x : v) l = lcm(l, x.get_den());
  IntVec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    Rational s = v[i] * l;
    out[i] = s.get_num();
  }
  return primitive(out);
}

inline Rational determinant(RatMat a) {
  const std::size_t n = a.size();
  Rational det = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && a[p][c] == 0) ++p;
    if (p == n) return 0;
    if (p != c) {
      std::swap(a[p], a[c]);
      det = -det;
    }
    det *= a[c][c];
    for (std::size_t r = c + 1; r < n; ++r) {
      if (a[r][c] == 0) continue;
      Rational f = a[r][c] / a[c][c];
      for (std::size_t j = c; j < n; ++j) a[r][j] -= f * a[c][j];
    }
  }
  return det;
}

inline std::optional<RatMat> inverse(const RatMat& a) {
  const std::size_t n = a.size();
  RatMat aug(n, RatVec(2 * n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug[i][j] = a[i][j];
    aug[i][n + i] = 1;
  }
  auto piv = rref(aug, n);
  if (piv.size() != n) return std::nullopt;
  RatMat inv(n, RatVec(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) inv[i][j] = aug[i][n + j];
  return inv;
}

inline IntMat inverse_unimodular(const IntMat& a) {
  auto inv = inverse(to_rational(a));
  if (!inv) fail(errc::internal, "linalg", "matrix is not invertible");
  IntMat out(a.size(), IntVec(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) {
      if ((*inv)[i][j].get_den() != 1) fail(errc::internal, "linalg", "matrix is not unimodular");
      out[i][j] = (*inv)[i][j].get_num();
    }
  return out;
}

/// Smith normal form U * A * V = D with U, V unimodular and
/// D = diag(d_1, ..., d_r, 0, ...), d_i > 0, d_i | d_{i+1}.
struct SmithForm {
  IntMat u, d, v;
  std::vector<Int> divisors;  // d_1..d_r
  std::size_t rows = 0, cols = 0;
};

inline SmithForm smith_normal_form(const IntMat& a, std::size_t ncols) {
  SmithForm s;
  s.rows = a.size();
  s.cols = ncols;
  s.d = a;
  s.u = identity(s.rows);
  s.v = identity(ncols);
  auto& d = s.d;
  const std::size_t k = s.rows, n = ncols;

  auto swap_rows = [&](std::size_t i, std::size_t j) {
    std::swap(d[i], d[j]);
    std::swap(s.u[i], s.u[j]);
  };
  auto swap_cols = [&](std::size_t i, std::size_t j) {
    for (auto& row : d) std::swap(row[i], row[j]);
    for (auto& row : s.v) std::swap(row[i], row[j]);
  };
  // row_i -= f * row_j
  auto row_axpy = [&](std::size_t i, std::size_t j, const Int& f) {
    for (std::size_t c = 0; c < n; ++c) d[i][c] -= f * d[j][c];
    for (std::size_t c = 0; c < k; ++c) s.u[i][c] -= f * s.u[j][c];
  };
  // col_i -= f * col_j
  auto col_axpy = [&](std::size_t i, std::size_t j, const Int& f) {
    for (std::size_t r = 0; r < k; ++r) d[r][i] -= f * d[r][j];
    for (std::size_t r = 0; r < n; ++r) s.v[r][i] -= f * s.v[r][j];
  };

  for (std::size_t t = 0; t < std::min(k, n); ++t) {
    for (;;) {
      // smallest nonzero entry of the trailing block becomes the pivot
      std::size_t pi = k, pj = n;
      for (std::size_t i = t; i < k; ++i)
        for (std::size_t j = t; j < n; ++j)
          if (d[i][j] != 0 && (pi == k || abs(d[i][j]) < abs(d[pi][pj]))) {
            pi = i;
            pj = j;
          }
      if (pi == k) break;
      if (pi != t) swap_rows(pi, t);
      if (pj != t) swap_cols(pj, t);

      bool clean = true;
      for (std::size_t i = t + 1; i < k; ++i) {
        if (d[i][t] == 0) continue;
        Int q;
        mpz_tdiv_q(q.get_mpz_t(), d[i][t].get_mpz_t(), d[t][t].get_mpz_t());
        row_axpy(i, t, q);
        if (d[i][t] != 0) clean = false;
      }
      for (std::size_t j = t + 1; j < n; ++j) {
        if (d[t][j] == 0) continue;
        Int q;
        mpz_tdiv_q(q.get_mpz_t(), d[t][j].get_mpz_t(), d[t][t].get_mpz_t());
        col_axpy(j, t, q);
        if (d[t][j] != 0) clean = false;
      }
      if (!clean) continue;

      bool divides = true;
      for (std::size_t i = t + 1; i < k && divides; ++i)
        for (std::size_t j = t + 1; j < n; ++j)
          if (d[i][j] % d[t][t] != 0) {
            row_axpy(t, i, Int(-1));  // row_t += row_i
            divides = false;
            break;
          }
      if (divides) break;
    }
    if (d[t][t] == 0) break;
    if (d[t][t] < 0) {
      for (auto& x : d[t]) x = -x;
      for (auto& x : s.u[t]) x = -x;
    }
    s.divisors.push_back(d[t][t]);
  }
  return s;
}

/// Z-basis of {x in Z^ncols : A x = 0}; the result is saturated.
inline IntMat integer_kernel(const IntMat& a, std::size_t ncols) {
  auto s = smith_normal_form(a, ncols);
  IntMat basis;
  for (std::size_t j = s.divisors.size(); j < ncols; ++j) {
    IntVec col(ncols);
    for (std::size_t r = 0; r < ncols; ++r) col[r] = s.v[r][j];
    basis.push_back(std::move(col));
  }
  return basis;
}

/// Z-basis of the subgroup of Z^ncols generated by the rows of `gens`.
inline IntMat lattice_basis(const IntMat& gens, std::size_t ncols) {
  if (gens.empty()) return {};
  auto s = smith_normal_form(gens, ncols);
  // rows(A) = rows(D V^{-1}) since U is unimodular
  IntMat vinv = inverse_unimodular(s.v);
  IntMat basis;
  for (std::size_t i = 0; i < s.divisors.size(); ++i) {
    IntVec row(ncols);
    for (std::size_t c = 0; c < ncols; ++c) row[c] = s.divisors[i] * vinv[i][c];
    basis.push_back(std::move(row));
  }
  return basis;
}

/// Integer solution of A x = b, if one exists.
inline std::optional<IntVec> solve_integer(const IntMat& a, std::size_t ncols, const IntVec& b) {
  auto s = smith_normal_form(a, ncols);
  // D y = U b, x = V y
  IntVec ub(s.rows, 0);
  for (std::size_t i = 0; i < s.rows; ++i)
    for (std::size_t j = 0; j < s.rows; ++j) ub[i] += s.u[i][j] * b[j];
  IntVec y(ncols, 0);
  for (std::size_t i = 0; i < s.rows; ++i) {
    if (i < s.divisors.size()) {
      if (ub[i] % s.divisors[i] != 0) return std::nullopt;
      y[i] = ub[i] / s.divisors[i];
    } else if (ub[i] != 0) {
      return std::nullopt;
    }
  }
  IntVec x(ncols, 0);
  for (std::size_t r = 0; r < ncols; ++r)
    for (std::size_t c = 0; c < ncols; ++c) x[r] += s.v[r][c] * y[c];
  return x;
}

/// Solves the multiplicative system prod_i x_i^{A_ji} = w_j over the
/// nonzero rationals, given a precomputed Smith form of A. Free unknowns are
/// set to 1. Throws field_extension when a needed root is irrational and
/// infeasible when the system is inconsistent.
inline RatVec solve_multiplicative(const SmithForm& s, const RatVec& w, const std::string& stage) {
  const std::size_t k = s.rows, d = s.cols;
  if (w.size() != k) fail(errc::rank_mismatch, stage, "multiplicative system size mismatch");
  for (const auto& x : w)
    if (x == 0) fail(errc::domain, stage, "multiplicative system with a zero right-hand side");
  RatVec uw(k, 1);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      if (s.u[i][j] != 0) uw[i] *= pow(w[j], to_long(s.u[i][j]));
  RatVec z(d, 1);
  for (std::size_t i = 0; i < k; ++i) {
    if (i < s.divisors.size()) {
      auto root = exact_root(uw[i], static_cast<unsigned long>(to_long(s.divisors[i])));
      if (!root)
        fail(errc::field_extension, stage,
             "value " + to_string(uw[i]) + " has no rational root of order " + to_string(s.divisors[i]));
      z[i] = *root;
    } else if (uw[i] != 1) {
      fail(errc::infeasible, stage, "multiplicative system is inconsistent");
    }
  }
  RatVec x(d, 1);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c)
      if (s.v[r][c] != 0) x[r] *= pow(z[c], to_long(s.v[r][c]));
  return x;
}

}  // namespace toricflex::linalg
