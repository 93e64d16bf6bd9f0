#include <gtest/gtest.h>

#include <map>
#include <set>

#include "support.hpp"
#include "toricflex/demazure.hpp"

using namespace toricflex;
using namespace toricflex::testing;

namespace {

ToricVariety a2() { return build_variety(IntMat{ints({1, 0}), ints({0, 1})}); }

// A² point with coordinates (x, y); the Hilbert basis is sorted, so values are (y, x).
Point a2_point(const ToricVariety& x, long a, long b) { return point_from_values(x, {Rational(b), Rational(a)}); }

std::pair<Rational, Rational> a2_coords(const ToricVariety& x, const Point& p) {
  auto v = hilbert_values(x, p);
  return {v[1], v[0]};
}

Root root_of(const ToricVariety& x, const IntVec& e) {
  auto r = as_root(x, e);
  if (!r) ADD_FAILURE() << to_string(e) << " is not a root";
  return *r;
}

Rational power(const Rational& b, const Int& k) {
  Rational r = 1;
  for (Int i = 0; i < k; ++i) r *= b;
  return r;
}

// Minimal generators of the monomials x^a y^b invariant under (x, y) -> (z x, z^e y), z^d = 1.
std::size_t invariant_generators(long d, long e) {
  std::vector<std::pair<long, long>> inv;
  for (long a = 0; a <= 2 * d; ++a)
    for (long b = 0; b <= 2 * d; ++b)
      if ((a || b) && (a + e * b) % d == 0) inv.emplace_back(a, b);
  std::size_t count = 0;
  for (auto [a, b] : inv) {
    bool reducible = false;
    for (auto [c, dd] : inv)
      if ((c != a || dd != b) && c <= a && dd <= b) reducible = true;
    if (!reducible) ++count;
  }
  return count;
}

// Character polynomials as exponent -> coefficient, for applying q * d_e symbolically.
using Laurent = std::map<IntVec, Rational>;

Laurent times(const Laurent& a, const Laurent& b) {
  Laurent out;
  for (const auto& [m, c] : a)
    for (const auto& [n, d] : b) out[add(m, n)] += c * d;
  return out;
}

Laurent derive(const ToricVariety& x, const Root& r, const Laurent& f) {
  Laurent out;
  for (const auto& [m, c] : f) {
    Int k = linalg::dot(x.rays()[r.ray], m);
    if (k != 0) out[add(m, r.e)] += c * Rational(k);
  }
  return out;
}

Rational evaluate(const ToricVariety& x, const Laurent& f, const Point& p) {
  Rational v = 0;
  for (const auto& [m, c] : f)
    if (c != 0) v += c * evaluate_character(x, p, m);
  return v;
}

// exp(t q d_e) on each Hilbert character by the truncated series of the operator q d_e.
RatVec series_values(const ToricVariety& x, const Root& r, const Laurent& q, const Rational& t, const Point& p) {
  RatVec out;
  for (const auto& h : x.hilb()) {
    Laurent term{{h, Rational(1)}};
    Rational sum = 0, coef = 1;
    for (long k = 0; !term.empty(); ++k) {
      sum += coef * evaluate(x, term, p);
      term = times(q, derive(x, r, term));
      std::erase_if(term, [](const auto& kv) { return kv.second == 0; });
      coef *= t / Rational(k + 1);
    }
    out.push_back(sum);
  }
  return out;
}

IntVec random_kernel_exponent(const ToricVariety& x, const Root& r, Rng& g) {
  IntVec m(x.rank(), 0);
  for (const auto& h : x.hilb())
    if (linalg::dot(x.rays()[r.ray], h) == 0) m = add(m, scale(Int(uniform(g, 0, 2)), h));
  return m;
}

}  // namespace

TEST(BuildVariety, HilbertBasisSizes) {
  auto x = a2();
  EXPECT_EQ(x.hilb(), (IntMat{ints({0, 1}), ints({1, 0})}));
  auto x21 = catalog_toric("x21");
  EXPECT_EQ(invariant_generators(2, 1), 3u);
  EXPECT_EQ(x21.hilb().size(), invariant_generators(2, 1));
  EXPECT_EQ(catalog_toric("a3").faces().size(), 8u);
  EXPECT_EQ(catalog_toric("quadric").faces().size(), 10u);
  EXPECT_EQ(catalog_toric("quadric").hilb().size(), 4u);
}

TEST(BuildVariety, RejectsDegenerateCones) {
  EXPECT_THROW(build_variety(IntMat{ints({1, 0})}), error);
  EXPECT_THROW(build_variety(Cone::from_generators(2, Space::N, {ints({1, 0}), ints({-1, 0}), ints({0, 1})})), error);
}

TEST(PointFromTorus, Examples) {
  auto x = a2();
  auto basis = choose_ray_basis(x);
  for (long j = 1; j <= 4; ++j) {
    Point p = point_from_torus(x, basis, {Rational(j), Rational(j)});
    EXPECT_EQ(p.face, x.open_face());
    EXPECT_EQ(a2_coords(x, p), std::make_pair(Rational(j), Rational(j)));
  }
  for (const auto& name : toric_names()) {
    auto y = catalog_toric(name);
    Point p = point_from_torus(y, choose_ray_basis(y), RatVec(y.rank(), Rational(1)));
    for (const auto& v : hilbert_values(y, p)) EXPECT_EQ(v, 1);
    EXPECT_EQ(p, distinguished_point(y, y.open_face()));
  }
  auto x21 = catalog_toric("x21");
  auto b21 = choose_ray_basis(x21);
  Point p = point_from_torus(x21, b21, {Rational(2), Rational(3)});
  auto vals = hilbert_values(x21, p);
  for (std::size_t i = 0; i < x21.hilb().size(); ++i) {
    Rational want = power(Rational(2), linalg::dot(x21.rays()[b21[0]], x21.hilb()[i])) *
                    power(Rational(3), linalg::dot(x21.rays()[b21[1]], x21.hilb()[i]));
    EXPECT_EQ(vals[i], want);
  }
  EXPECT_THROW(point_from_torus(x, basis, {Rational(0), Rational(1)}), error);
  EXPECT_THROW(point_from_torus(x, {0, 0}, {Rational(1), Rational(1)}), error);
}

TEST(EvaluateCharacter, Examples) {
  auto x = a2();
  EXPECT_EQ(evaluate_character(x, a2_point(x, 2, 5), ints({1, 1})), 10);
  Point axis = a2_point(x, 3, 0);
  EXPECT_EQ(evaluate_character(x, axis, ints({0, 1})), 0);
  EXPECT_EQ(evaluate_character(x, axis, ints({2, 0})), 9);
  try {
    evaluate_character(x, axis, ints({-1, 0}));
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::domain);
  }
}

// Any nonnegative combination of Hilbert elements evaluates to the product of the values.
TEST(EvaluateCharacter, FactorizationIndependent) {
  Rng g(21);
  for (const auto& name : toric_names()) {
    auto x = catalog_toric(name);
    for (int it = 0; it < 100; ++it) {
      Point p = any_point(x, g);
      auto vals = hilbert_values(x, p);
      IntVec m(x.rank(), 0);
      Rational prod = 1;
      for (std::size_t i = 0; i < vals.size(); ++i) {
        long c = uniform(g, 0, 2);
        m = add(m, scale(Int(c), x.hilb()[i]));
        prod *= pow(vals[i], c);
      }
      EXPECT_EQ(evaluate_character(x, p, m), prod) << name;
    }
  }
}

TEST(Orbits, Examples) {
  auto x = a2();
  Point open = a2_point(x, 1, 1);
  EXPECT_EQ(orbit_of(open), x.open_face());
  EXPECT_EQ(orbit_dim(x, x.open_face()), 2);
  EXPECT_TRUE(stabilizer_subtorus(x, x.open_face()).empty());
  Point origin = a2_point(x, 0, 0);
  EXPECT_EQ(orbit_of(origin), x.vertex_face());
  EXPECT_EQ(orbit_dim(x, x.vertex_face()), 0);
  EXPECT_EQ(stabilizer_subtorus(x, x.vertex_face()).size(), 2u);
  Point axis = a2_point(x, 4, 0);
  EXPECT_EQ(orbit_dim(x, axis.face), 1);
  EXPECT_TRUE(x.face_contains(axis.face, ints({1, 0})));
  EXPECT_FALSE(x.face_contains(axis.face, ints({0, 1})));
  EXPECT_EQ(stabilizer_subtorus(x, axis.face), (IntMat{ints({0, 1})}));
}

TEST(Orbits, TorusPointsAreOpen) {
  Rng g(5);
  for (const auto& name : toric_names()) {
    auto x = catalog_toric(name);
    auto basis = choose_ray_basis(x);
    for (int it = 0; it < 20; ++it) {
      RatVec t;
      for (std::size_t i = 0; i < x.rank(); ++i) t.push_back(nonzero_rational(g));
      EXPECT_EQ(orbit_of(point_from_torus(x, basis, t)), x.open_face());
    }
    for (std::size_t f = 0; f < x.faces().size(); ++f)
      EXPECT_EQ(static_cast<int>(stabilizer_subtorus(x, f).size()), static_cast<int>(x.rank()) - orbit_dim(x, f));
  }
}

TEST(Flexibility, Certificates) {
  auto x = a2();
  auto c = flexibility_certificate(x, a2_point(x, 1, 1));
  std::set<IntVec> es;
  for (const auto& r : c.roots) es.insert(r.e);
  EXPECT_EQ(es, (std::set<IntVec>{ints({-1, 0}), ints({0, -1})}));
  EXPECT_EQ(c.rank, 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    Rational nonzero = 0;
    for (const auto& v : c.velocity[i]) nonzero += v == 0 ? 0 : 1;
    EXPECT_EQ(nonzero, 1);
  }
  for (const auto& name : toric_names()) {
    auto y = catalog_toric(name);
    auto cert = flexibility_certificate(y, distinguished_point(y, y.open_face()));
    EXPECT_EQ(cert.rank, y.rank()) << name;
    EXPECT_EQ(linalg::rank(cert.velocity, y.hilb().size()), y.rank());
  }
  EXPECT_THROW(flexibility_certificate(x, a2_point(x, 0, 1)), error);
}

TEST(MakarLimanov, CatalogConesAreTrivial) {
  for (const auto& name : toric_names()) {
    auto x = catalog_toric(name);
    auto c = ml_trivial_certificate(x);
    EXPECT_TRUE(c.trivial) << name;
    EXPECT_TRUE(c.intersection_basis.empty());
    EXPECT_TRUE(check_ml_certificate(x, c));
    c.ray_matrix_rank = 1;
    EXPECT_FALSE(check_ml_certificate(x, c));
  }
}

TEST(Roots, PlaneClasses) {
  auto x = a2();
  auto roots = enumerate_roots(x, 3);
  std::set<IntVec> got, want;
  for (const auto& r : roots) got.insert(r.e);
  for (long k = 0; k <= 3; ++k) want.insert(ints({k, -1})), want.insert(ints({-1, k}));
  EXPECT_EQ(got, want);
  EXPECT_EQ(roots.size(), want.size());
  auto classes = partition_roots(roots);
  ASSERT_EQ(classes.size(), 2u);
  for (const auto& [ray, rs] : classes)
    for (const auto& r : rs) EXPECT_EQ(linalg::dot(x.rays()[ray], r.e), -1);
}

TEST(Roots, MatchBoxScan) {
  for (const auto& name : toric_names()) {
    auto x = catalog_toric(name);
    const long bound = 3;
    std::set<std::pair<IntVec, std::size_t>> oracle;
    IntVec e(x.rank(), -bound);
    for (;;) {
      std::vector<Int> p;
      for (const auto& rho : x.rays()) p.push_back(linalg::dot(rho, e));
      for (std::size_t i = 0; i < p.size(); ++i) {
        bool ok = p[i] == -1;
        for (std::size_t j = 0; j < p.size(); ++j) ok = ok && (j == i || p[j] >= 0);
        if (ok) oracle.insert({e, i});
      }
      std::size_t k = 0;
      while (k < e.size() && e[k] == bound) e[k] = -bound, ++k;
      if (k == e.size()) break;
      ++e[k];
    }
    std::set<std::pair<IntVec, std::size_t>> got;
    for (const auto& r : enumerate_roots(x, bound)) got.insert({r.e, r.ray});
    EXPECT_EQ(got, oracle) << name;
    EXPECT_EQ(partition_roots(enumerate_roots(x, bound)).size(), x.rays().size()) << name;
  }
}

TEST(Roots, RootForRay) {
  auto x = a2();
  std::size_t ray_y = x.rays()[0] == ints({0, 1}) ? 0 : 1;
  EXPECT_EQ(root_for_ray(x, ray_y).e, ints({0, -1}));
  for (const auto& name : toric_names()) {
    auto y = catalog_toric(name);
    for (std::size_t i = 0; i < y.rays().size(); ++i) {
      Root r = root_for_ray(y, i);
      EXPECT_EQ(r.ray, i);
      EXPECT_TRUE(is_root(y, r.e, i)) << name << " ray " << i;
    }
  }
}

TEST(Lnd, Examples) {
  auto x = a2();
  Root dy = root_of(x, ints({0, -1}));
  for (long a = 0; a < 4; ++a)
    for (long b = 0; b < 4; ++b) {
      auto [c, m] = lnd_apply(x, dy, ints({a, b}));
      EXPECT_EQ(c, b);
      EXPECT_EQ(m, ints({a, b - 1}));
    }
  EXPECT_EQ(lnd_apply(x, dy, ints({5, 0})).first, 0);
}

TEST(Lnd, LocallyNilpotent) {
  for (const auto& name : toric_names()) {
    auto x = catalog_toric(name);
    for (const auto& r : enumerate_roots(x, 3))
      for (const auto& h : x.hilb()) {
        const Int k = linalg::dot(x.rays()[r.ray], h);
        IntVec m = h;
        Int coef = 1;
        for (Int i = 0; i <= k; ++i) {
          auto [c, next] = lnd_apply(x, r, m);
          coef *= c;
          if (i < k) {
            EXPECT_NE(coef, 0);
            EXPECT_TRUE(x.dual().contains(next));
          }
          m = next;
        }
        EXPECT_EQ(coef, 0) << name;
      }
  }
}

TEST(ExpAction, PlaneExamples) {
  auto x = a2();
  auto one = KernelElement::one(2);
  Root dy = root_of(x, ints({0, -1}));
  Root xdy = root_of(x, ints({1, -1}));
  Rng g(3);
  for (int it = 0; it < 20; ++it) {
    long a = uniform(g, -4, 4), b = uniform(g, -4, 4);
    Rational t = rational(g);
    Point p = a2_point(x, a, b);
    EXPECT_EQ(a2_coords(x, exp_action(x, {dy, one, t}, p)), std::make_pair(Rational(a), Rational(b + t)));
    EXPECT_EQ(a2_coords(x, exp_action(x, {xdy, one, t}, p)), std::make_pair(Rational(a), Rational(b + t * a)));
    EXPECT_EQ(exp_action(x, {dy, one, Rational(0)}, p), p);
  }
}

TEST(ExpAction, GroupLaw) {
  Rng g(8);
  for (const auto& name : toric_names()) {
    auto x = catalog_toric(name);
    auto roots = enumerate_roots(x, 2);
    auto one = KernelElement::one(x.rank());
    for (int it = 0; it < 40; ++it) {
      const Root& r = roots[static_cast<std::size_t>(uniform(g, 0, static_cast<long>(roots.size()) - 1))];
      Point p = any_point(x, g);
      Rational s = rational(g), t = rational(g);
      Point lhs = exp_action(x, {r, one, s + t}, p);
      Point rhs = exp_action(x, {r, one, s}, exp_action(x, {r, one, t}, p));
      EXPECT_EQ(lhs, rhs) << name;
      EXPECT_EQ(exp_action(x, {r, one, -t}, exp_action(x, {r, one, t}, p)), p);
    }
  }
}

// Binomial relations among Hilbert values hold after every exponential.
TEST(ExpAction, PreservesRelations) {
  Rng g(13);
  for (const auto& name : toric_names()) {
    auto x = catalog_toric(name);
    const std::size_t h = x.hilb().size();
    IntMat rel = linalg::integer_kernel(linalg::transpose(x.hilb(), x.rank()), h);
    auto roots = enumerate_roots(x, 2);
    auto one = KernelElement::one(x.rank());
    for (int it = 0; it < 40; ++it) {
      const Root& r = roots[static_cast<std::size_t>(uniform(g, 0, static_cast<long>(roots.size()) - 1))];
      Point q = exp_action(x, {r, one, rational(g)}, any_point(x, g));
      auto v = hilbert_values(x, q);
      for (const auto& k : rel) {
        Rational lhs = 1, rhs = 1;
        for (std::size_t i = 0; i < h; ++i) {
          if (k[i] > 0) lhs *= power(v[i], k[i]);
          if (k[i] < 0) rhs *= power(v[i], -k[i]);
        }
        EXPECT_EQ(lhs, rhs) << name;
      }
      EXPECT_EQ(point_from_values(x, v), q);
    }
  }
}

// exp(t q d_e) against the operator series of q d_e, with q a random kernel element.
TEST(ExpAction, KernelMultiplierMatchesSeries) {
  Rng g(17);
  for (const auto& name : toric_names()) {
    auto x = catalog_toric(name);
    auto roots = enumerate_roots(x, 2);
    for (int it = 0; it < 15; ++it) {
      const Root& r = roots[static_cast<std::size_t>(uniform(g, 0, static_cast<long>(roots.size()) - 1))];
      KernelElement q;
      Laurent ql;
      for (int k = 0; k < 2; ++k) {
        IntVec m = random_kernel_exponent(x, r, g);
        Rational c = nonzero_rational(g, 3, 2);
        q.terms.push_back({c, m});
        ql[m] += c;
      }
      Point p = smooth_point(x, g);
      Rational t = rational(g);
      Point got = exp_action(x, {r, q, t}, p);
      EXPECT_EQ(hilbert_values(x, got), series_values(x, r, ql, t, p)) << name;
      EXPECT_EQ(got, exp_action(x, {r, KernelElement::one(x.rank()), t * evaluate_kernel(x, q, p)}, p));
    }
  }
}

TEST(ExpAction, RejectsBadKernelElement) {
  auto x = a2();
  Root dy = root_of(x, ints({0, -1}));
  KernelElement q{{{Rational(1), ints({0, 1})}}};
  EXPECT_THROW(exp_action(x, {dy, q, Rational(1)}, a2_point(x, 1, 1)), error);
}

TEST(ReAction, Examples) {
  auto x = a2();
  Root dy = root_of(x, ints({0, -1}));
  Point p = a2_point(x, 3, 5);
  EXPECT_EQ(a2_coords(x, re_action(x, dy, Rational(2), p)), std::make_pair(Rational(3), Rational(10)));
  EXPECT_EQ(re_action(x, dy, Rational(1), p), p);
  EXPECT_THROW(re_action(x, dy, Rational(0), p), error);
  Rng g(4);
  for (const auto& name : toric_names()) {
    auto y = catalog_toric(name);
    for (const auto& r : enumerate_roots(y, 2)) {
      Point q = smooth_point(y, g);
      Point s = re_action(y, r, nonzero_rational(g), q);
      for (const auto& h : y.hilb())
        if (linalg::dot(y.rays()[r.ray], h) == 0) { EXPECT_EQ(evaluate_character(y, s, h), evaluate_character(y, q, h)); }
    }
  }
  // off the exceptional parameter, the shifted point lies on the scaled orbit
  for (long s = -3; s <= 3; ++s) {
    Point shifted = exp_action(x, {dy, KernelElement::one(2), Rational(s)}, p);
    EXPECT_EQ(shifted, re_action(x, dy, Rational(5 + s, 5), p));
  }
}

TEST(Stability, Examples) {
  auto x = a2();
  EXPECT_TRUE(stable_under(x, root_of(x, ints({0, -1})), x.open_face()));
  EXPECT_FALSE(stable_under(x, root_of(x, ints({0, -1})), x.vertex_face()));
  for (long a = 1; a <= 3; ++a) EXPECT_TRUE(stable_under(x, root_of(x, ints({a, -1})), x.vertex_face()));
  // rho_e outside the rays orthogonal to the face
  for (const auto& name : toric_names()) {
    auto y = catalog_toric(name);
    for (const auto& r : enumerate_roots(y, 2))
      for (std::size_t f = 0; f < y.faces().size(); ++f)
        if (!(y.face(f).dual_mask >> r.ray & 1u)) { EXPECT_TRUE(stable_under(y, r, f)) << name; }
  }
}

// Moving a point by exp_action and checking which orbit the closure of its orbit picks up.
TEST(Stability, AgreesWithSampledMotion) {
  auto x = a2();
  for (const auto& e : {ints({0, -1}), ints({1, -1}), ints({-1, 0}), ints({-1, 2})}) {
    Root r = root_of(x, e);
    for (std::size_t f = 0; f < x.faces().size(); ++f) {
      bool stays = true;
      for (long a = -2; a <= 2; ++a)
        for (long t = -2; t <= 2; ++t) {
          if (a == 0) continue;
          Point p = point_on_face(x, f, choose_ray_basis(x), {Rational(a), Rational(2)});
          Point q = exp_action(x, {r, KernelElement::one(2), Rational(t)}, p);
          // the orbit closure of face f consists of faces contained in f
          if ((x.face(q.face).mask & ~x.face(f).mask) != 0) stays = false;
        }
      EXPECT_EQ(stable_under(x, r, f), stays) << to_string(e) << " face " << f;
    }
  }
}

TEST(HOrbits, PlaneTrace) {
  auto x = a2();
  Root dy = root_of(x, ints({0, -1}));
  for (long a : {1, -2, 3})
    for (long b : {-1, 0, 4}) {
      auto tr = trace_h_orbit(x, dy, a2_point(x, a, b));
      ASSERT_TRUE(tr.special_face);
      EXPECT_EQ(tr.generic_face, x.open_face());
      EXPECT_EQ(*tr.exceptional_t, -b);
      EXPECT_EQ(a2_coords(x, *tr.special_point), std::make_pair(Rational(a), Rational(0)));
      EXPECT_TRUE(x.face_contains(*tr.special_face, ints({1, 0})));
    }
  EXPECT_THROW(trace_h_orbit(x, root_of(x, ints({1, -1})), a2_point(x, 0, 3)), error);
}

TEST(HOrbits, PlaneCriterion) {
  auto x = a2();
  Root dy = root_of(x, ints({0, -1}));
  std::size_t xaxis = a2_point(x, 1, 0).face, yaxis = a2_point(x, 0, 1).face;
  EXPECT_TRUE(h_connected(x, dy, x.open_face(), xaxis).connected);
  EXPECT_FALSE(h_connected(x, dy, x.open_face(), yaxis).connected);
  EXPECT_FALSE(h_connected(x, dy, x.open_face(), x.open_face()).connected);
  EXPECT_THROW(h_connected(x, dy, xaxis, yaxis), error);
  // O_1 = {x != 0} and O_2 = {x = 0} are joined by the x-translations
  Root dx = root_of(x, ints({-1, 0}));
  EXPECT_TRUE(h_connected(x, dx, x.open_face(), yaxis).connected);
  EXPECT_TRUE(h_connected(x, dx, xaxis, x.vertex_face()).connected);
}

// Traced orbits realize exactly the connected pairs, with dimension gap one.
TEST(HOrbits, CriterionMatchesTracing) {
  Rng g(29);
  for (const auto& name : toric_names()) {
    auto x = catalog_toric(name);
    auto basis = choose_ray_basis(x);
    for (const auto& r : enumerate_roots(x, 2)) {
      std::set<std::pair<std::size_t, std::size_t>> traced;
      for (std::size_t f = 0; f < x.faces().size(); ++f)
        for (int k = 0; k < 3; ++k) {
          RatVec t;
          for (std::size_t i = 0; i < x.rank(); ++i) t.push_back(k == 0 ? Rational(1) : nonzero_rational(g));
          Point p = point_on_face(x, f, basis, t);
          auto polys = orbit_polynomials(x, r, p);
          if (std::all_of(polys.begin(), polys.end(), [](const QPoly& q) { return q.degree() <= 0; })) continue;
          auto tr = trace_h_orbit(x, r, p);
          ASSERT_TRUE(tr.special_face) << name;
          EXPECT_EQ(tr.faces_met.size(), 2u);
          EXPECT_EQ(x.face(tr.generic_face).dim, x.face(*tr.special_face).dim + 1);
          traced.insert({tr.generic_face, *tr.special_face});
        }
      for (std::size_t a = 0; a < x.faces().size(); ++a)
        for (std::size_t b = 0; b < x.faces().size(); ++b) {
          if ((x.face(b).mask & ~x.face(a).mask) != 0) continue;
          EXPECT_EQ(h_connected(x, r, a, b).connected, traced.count({a, b}) == 1)
              << name << " e=" << to_string(r.e) << " faces " << a << "," << b;
        }
    }
  }
}
