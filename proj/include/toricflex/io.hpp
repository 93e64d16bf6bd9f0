#pragma once

#include <nlohmann/json.hpp>

#include <complex>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "toricflex/demazure.hpp"
#include "toricflex/error.hpp"
#include "toricflex/suspension.hpp"
#include "toricflex/toric.hpp"
#include "toricflex/tower.hpp"
#include "toricflex/transitivity.hpp"

namespace toricflex::io {

using json = nlohmann::json;

inline constexpr const char* engine_name = "toricflex";
inline constexpr const char* engine_version = "0.1.0";

// ---------------------------------------------------------------------------
// Scalars and vectors.

inline json to_json(const Rational& r) { return r.get_str(); }

inline Rational rational_from(const json& j, const std::string& where) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<long>());
  fail(errc::parse, where, "expected a rational \"p/q\", got " + j.dump());
}

inline json to_json(const Complex& z) { return json::array({z.real(), z.imag()}); }

inline Complex complex_from(const json& j, const std::string& where) {
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_string()) return to_complex(parse_rational(j.get<std::string>()));
  fail(errc::parse, where, "expected a complex [re, im], got " + j.dump());
}

template <class K>
K scalar_from(const json& j, const std::string& where) {
  if constexpr (scalar_ops<K>::exact)
    return rational_from(j, where);
  else
    return complex_from(j, where);
}

inline json ints_to_json(const IntVec& v) {
  json a = json::array();
  for (const auto& x : v) {
    if (x.fits_slong_p())
      a.push_back(x.get_si());
    else
      a.push_back(x.get_str());
  }
  return a;
}

inline IntVec ints_from(const json& j, const std::string& where) {
  if (!j.is_array()) fail(errc::parse, where, "expected an integer array, got " + j.dump());
  IntVec v;
  for (const auto& x : j) {
    if (x.is_number_integer())
      v.emplace_back(x.get<long>());
    else if (x.is_string()) {
      Rational r = parse_rational(x.get<std::string>());
      if (r.get_den() != 1) fail(errc::parse, where, "expected an integer, got " + x.dump());
      v.push_back(r.get_num());
    } else
      fail(errc::parse, where, "expected an integer, got " + x.dump());
  }
  return v;
}

inline json mat_to_json(const IntMat& m) {
  json a = json::array();
  for (const auto& r : m) a.push_back(ints_to_json(r));
  return a;
}

inline json mat_to_json(const RatMat& m) {
  json a = json::array();
  for (const auto& r : m) {
    json row = json::array();
    for (const auto& x : r) row.push_back(to_json(x));
    a.push_back(row);
  }
  return a;
}

inline std::vector<std::size_t> indices_from(const json& j, const std::string& where) {
  if (!j.is_array()) fail(errc::parse, where, "expected an index array, got " + j.dump());
  std::vector<std::size_t> v;
  for (const auto& x : j) {
    if (!x.is_number_unsigned()) fail(errc::parse, where, "expected a nonnegative index, got " + x.dump());
    v.push_back(x.get<std::size_t>());
  }
  return v;
}

inline const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) fail(errc::parse, where, std::string("missing field \"") + key + "\"");
  return j.at(key);
}

// ---------------------------------------------------------------------------
// Files and hashes.

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

/// FNV-1a of the compact canonical dump.
inline std::string hash_of(const json& j) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a:%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

inline json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::parse, "io", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    fail(errc::parse, "io", path + ": " + e.what());
  }
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Toric varieties, points, roots and words.

inline ToricVariety variety_from(const json& j) {
  const std::string w = "variety";
  const json& rays = field(j, "rays", w);
  if (!rays.is_array() || rays.empty()) fail(errc::parse, w, "\"rays\" must be a nonempty array");
  IntMat r;
  for (const auto& ray : rays) r.push_back(ints_from(ray, w));
  if (j.contains("rank")) {
    auto n = j.at("rank").get<std::size_t>();
    for (const auto& ray : r)
      if (ray.size() != n) fail(errc::rank_mismatch, w, "ray " + to_string(ray) + " does not have rank " + std::to_string(n));
  }
  return build_variety(Cone::from_rays(Space::N, r));
}

/// Canonical description: rank and sorted primitive rays.
inline json variety_to_json(const ToricVariety& x) { return {{"rank", x.rank()}, {"rays", mat_to_json(x.rays())}}; }

inline json point_to_json(const ToricVariety& x, const Point& p) {
  const auto& f = x.face(p.face);
  json vals = json::array();
  for (const auto& c : p.chi) vals.push_back(to_json(c));
  json face = json::array();
  for (auto i : mask_indices(f.mask)) face.push_back(i);
  return {{"face", face}, {"char", {{"basis", mat_to_json(f.basis)}, {"values", vals}}}};
}

/// {"torus": {...}}, {"face": [...], "char": {...}} or {"hilb": [...]}.
inline Point point_from(const ToricVariety& x, const json& j) {
  const std::string w = "point";
  if (j.contains("torus")) {
    const json& t = j.at("torus");
    auto basis = indices_from(field(t, "basis", w), w);
    RatVec coords;
    for (const auto& c : field(t, "coords", w)) coords.push_back(rational_from(c, w));
    return point_from_torus(x, basis, coords);
  }
  if (j.contains("face")) {
    RayMask mask = 0;
    for (auto i : indices_from(j.at("face"), w)) {
      if (i >= x.dual().rays().size()) fail(errc::domain, w, "dual ray index out of range");
      mask |= RayMask{1} << i;
    }
    const std::size_t fi = x.face_by_mask(mask);
    const json& ch = field(j, "char", w);
    RatVec vals;
    for (const auto& c : field(ch, "values", w)) vals.push_back(rational_from(c, w));
    if (vals.size() != x.face(fi).basis.size())
      fail(errc::domain, w, "character needs " + std::to_string(x.face(fi).basis.size()) + " values");
    if (ch.contains("basis")) {
      IntMat b;
      for (const auto& r : ch.at("basis")) b.push_back(ints_from(r, w));
      if (b != x.face(fi).basis) fail(errc::domain, w, "character basis differs from the face lattice basis");
    }
    for (const auto& v : vals)
      if (v == 0) fail(errc::domain, w, "character values must be nonzero");
    return Point{fi, vals};
  }
  if (j.contains("hilb")) {
    RatVec vals;
    for (const auto& c : j.at("hilb")) vals.push_back(rational_from(c, w));
    return point_from_values(x, vals);
  }
  fail(errc::parse, w, "point needs \"torus\", \"face\" or \"hilb\"");
}

inline std::vector<Point> points_from(const ToricVariety& x, const json& j) {
  const json& arr = j.is_array() ? j : field(j, "points", "points");
  std::vector<Point> out;
  for (const auto& p : arr) out.push_back(point_from(x, p));
  return out;
}

inline json points_to_json(const ToricVariety& x, const std::vector<Point>& pts) {
  json a = json::array();
  for (const auto& p : pts) a.push_back(point_to_json(x, p));
  return {{"points", a}};
}

inline json root_to_json(const Root& r) { return {{"e", ints_to_json(r.e)}, {"ray", r.ray}}; }

inline json letter_to_json(const Letter& l) {
  json q = json::array();
  for (const auto& [c, m] : l.g.q.terms) q.push_back(json::array({to_json(c), ints_to_json(m)}));
  return {{"e", ints_to_json(l.g.root.e)}, {"ray", l.g.root.ray}, {"q", q}, {"t", to_json(l.g.t)}, {"stage", l.stage}};
}

inline Letter letter_from(const ToricVariety& x, const json& j) {
  const std::string w = "generator";
  Letter l;
  IntVec e = ints_from(field(j, "e", w), w);
  if (e.size() != x.rank()) fail(errc::rank_mismatch, w, "root has the wrong rank");
  if (j.contains("ray")) {
    l.g.root = Root{e, j.at("ray").get<std::size_t>()};
    check_root(x, l.g.root);
  } else if (auto r = as_root(x, e)) {
    l.g.root = *r;
  } else {
    fail(errc::domain, w, to_string(e) + " is not a root");
  }
  if (j.contains("q")) {
    for (const auto& term : j.at("q")) {
      if (!term.is_array() || term.size() != 2) fail(errc::parse, w, "kernel term must be [coef, m]");
      l.g.q.terms.push_back({rational_from(term[0], w), ints_from(term[1], w)});
    }
  } else {
    l.g.q = KernelElement::one(x.rank());
  }
  l.g.t = rational_from(field(j, "t", w), w);
  if (j.contains("stage")) l.stage = j.at("stage").get<std::string>();
  return l;
}

/// A word object with "letters", a bare letter array, or one generator.
inline AutomorphismWord word_from(const ToricVariety& x, const json& j) {
  AutomorphismWord w;
  const json* arr = &j;
  if (j.is_object() && j.contains("letters")) arr = &j.at("letters");
  if (arr->is_array()) {
    for (const auto& l : *arr) w.letters.push_back(letter_from(x, l));
  } else {
    w.letters.push_back(letter_from(x, j));
  }
  return w;
}

template <class L>
json provenance(const std::vector<L>& letters) {
  json out = json::array();
  for (const auto& l : letters) {
    if (!out.empty() && out.back()["stage"] == l.stage)
      out.back()["letters"] = out.back()["letters"].template get<std::size_t>() + 1;
    else
      out.push_back({{"stage", l.stage}, {"letters", 1}});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Suspensions.

inline SuspensionVariety suspension_from(const json& j) {
  const std::string w = "suspension";
  if (j.contains("base") && j.at("base") != "affine") fail(errc::parse, w, "only \"affine\" bases are supported");
  const std::size_t k = j.contains("k") ? j.at("k").get<std::size_t>() : 1;
  std::vector<std::string> fs;
  for (const auto& f : field(j, "fs", w)) {
    if (!f.is_string()) fail(errc::parse, w, "each f must be a polynomial string");
    fs.push_back(f.get<std::string>());
  }
  if (fs.empty()) fail(errc::domain, w, "\"fs\" is empty");
  return parse_suspension(k, fs);
}

inline json suspension_to_json(const SuspensionVariety& x) {
  json fs = json::array();
  auto names = x.names();
  for (const auto& f : x.fs) fs.push_back(to_string(f, names));
  return {{"base", "affine"}, {"k", x.k}, {"fs", fs}};
}

template <class K>
json susp_point_to_json(const SuspPoint<K>& p) {
  json a = json::array();
  for (const auto& c : p) a.push_back(to_json(c));
  return a;
}

template <class K>
std::vector<SuspPoint<K>> susp_points_from(const SuspensionVariety& x, const json& j) {
  const json& arr = j.is_array() ? j : field(j, "points", "points");
  std::vector<SuspPoint<K>> out;
  for (const auto& p : arr) {
    if (!p.is_array() || p.size() != x.nvars())
      fail(errc::parse, "points", "a point needs " + std::to_string(x.nvars()) + " coordinates");
    SuspPoint<K> q;
    for (const auto& c : p) q.push_back(scalar_from<K>(c, "points"));
    out.push_back(std::move(q));
  }
  return out;
}

template <class K>
json susp_points_to_json(const std::vector<SuspPoint<K>>& pts) {
  json a = json::array();
  for (const auto& p : pts) a.push_back(susp_point_to_json(p));
  return {{"points", a}};
}

template <class K>
json poly_to_json(const UPoly<K>& q) {
  json a = json::array();
  for (const auto& c : q.c) a.push_back(to_json(c));
  return a;
}

template <class K>
UPoly<K> poly_from(const json& j, const std::string& where) {
  if (!j.is_array()) fail(errc::parse, where, "q must be a coefficient array, lowest degree first");
  std::vector<K> c;
  for (const auto& x : j) c.push_back(scalar_from<K>(x, where));
  return UPoly<K>(c);
}

inline char side_from(const json& j, const std::string& where) {
  const auto s = j.get<std::string>();
  if (s != "u" && s != "v") fail(errc::parse, where, "side must be \"u\" or \"v\"");
  return s[0];
}

template <class K>
json surface_letter_to_json(const SurfaceLetter<K>& l) {
  return {{"side", std::string(1, l.side)}, {"q", poly_to_json(l.q)}, {"t", to_json(l.t)}, {"stage", l.stage}};
}

template <class K>
SurfaceLetter<K> surface_letter_from(const json& j) {
  const std::string w = "surface-letter";
  SurfaceLetter<K> l;
  l.side = side_from(field(j, "side", w), w);
  l.q = poly_from<K>(field(j, "q", w), w);
  l.t = scalar_from<K>(field(j, "t", w), w);
  if (j.contains("stage")) l.stage = j.at("stage").get<std::string>();
  return l;
}

/// Lifted letter: base derivation images, multiplier q and side; the lift is recomputed on read.
inline json lnd_letter_to_json(const SuspensionVariety& x, const LndLetter& l) {
  const auto names = base_of(x).names();
  json base = json::array();
  for (const auto& g : l.lnd.base.images) base.push_back(to_string(g, names));
  return {{"base", base},
          {"q", poly_to_json(l.lnd.q)},
          {"side", std::string(1, l.lnd.side)},
          {"t", to_json(l.t)},
          {"stage", l.stage}};
}

inline LndLetter lnd_letter_from(const SuspensionVariety& x, const json& j) {
  const std::string w = "lifted-letter";
  const auto base = base_of(x);
  const auto names = base.names();
  Derivation d = Derivation::zero(base.nvars());
  const json& imgs = field(j, "base", w);
  if (!imgs.is_array() || imgs.size() != base.nvars())
    fail(errc::parse, w, "base derivation needs " + std::to_string(base.nvars()) + " images");
  for (std::size_t i = 0; i < imgs.size(); ++i) d.images[i] = parse_polynomial(imgs[i].get<std::string>(), names);
  LndLetter l;
  l.lnd = lift_lnd(x, d, poly_from<Rational>(field(j, "q", w), w), side_from(field(j, "side", w), w));
  l.t = rational_from(field(j, "t", w), w);
  if (j.contains("stage")) l.stage = j.at("stage").get<std::string>();
  return l;
}

inline const json& letters_of(const json& j) { return j.is_object() && j.contains("letters") ? j.at("letters") : j; }

template <class K>
SurfaceWord<K> surface_word_from(const json& j) {
  SurfaceWord<K> w;
  const json& arr = letters_of(j);
  if (!arr.is_array()) {
    w.letters.push_back(surface_letter_from<K>(arr));
    return w;
  }
  for (const auto& l : arr) w.letters.push_back(surface_letter_from<K>(l));
  return w;
}

inline LndWord lnd_word_from(const SuspensionVariety& x, const json& j) {
  LndWord w;
  const json& arr = letters_of(j);
  if (!arr.is_array()) {
    w.letters.push_back(lnd_letter_from(x, arr));
    return w;
  }
  for (const auto& l : arr) w.letters.push_back(lnd_letter_from(x, l));
  return w;
}

}  // namespace toricflex::io
