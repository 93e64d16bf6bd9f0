#pragma once

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "toricflex/io.hpp"

namespace toricflex::cli {

using io::json;

/// Exit codes: 0 success (verified), 1 check failed, 2 engine error, 3 usage or input error.
enum exit_code : int { ok = 0, rejected = 1, engine_error = 2, usage = 3 };

struct Options {
  std::string variety, points, targets, word, expect, out;
  long bound = 5;
  std::string mode = "exact";
  double tol = 1e-9;
  long seed = 0;  // reserved
};

namespace detail {

inline void emit(const json& j, const Options& o, std::ostream& out) {
  const std::string text = io::dump(j);
  if (o.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(o.out);
  if (!f) fail(errc::parse, "io", "cannot write " + o.out);
  f << text;
}

inline json engine() { return {{"name", io::engine_name}, {"version", io::engine_version}}; }

inline const std::string& need(const std::string& path, const char* flag) {
  if (path.empty()) fail(errc::parse, "usage", std::string("missing ") + flag);
  return path;
}

constexpr const char* rational_orbit_note =
    "orbits are orbits of rational points under the subgroup generated by the listed root subgroups; "
    "orbit membership over Q is decided by equality of character values";

// ---------------------------------------------------------------------------
// toric

inline json roots_json(const ToricVariety& x, long bound) {
  json classes = json::array();
  for (const auto& [ray, roots] : partition_roots(enumerate_roots(x, bound))) {
    json rs = json::array();
    for (const auto& r : roots) rs.push_back(io::ints_to_json(r.e));
    classes.push_back({{"ray", ray}, {"rho", io::ints_to_json(x.rays()[ray])}, {"roots", rs}});
  }
  return classes;
}

inline json ml_json(const ToricVariety& x, const MlCertificate& c) {
  json facets = json::array();
  for (const auto& f : c.facets) facets.push_back({{"ray", f.ray}, {"facet_rays", io::mat_to_json(f.facet_rays)}});
  return {{"facets", facets},
          {"ray_matrix_rank", c.ray_matrix_rank},
          {"intersection_basis", io::mat_to_json(c.intersection_basis)},
          {"trivial", c.trivial},
          {"checked", check_ml_certificate(x, c)}};
}

inline int toric_info(const Options& o, std::ostream& out) {
  auto vj = io::read_json(need(o.variety, "--variety"));
  auto x = io::variety_from(vj);
  json faces = json::array();
  for (std::size_t i = 0; i < x.faces().size(); ++i) {
    const auto& f = x.face(i);
    json dual_face = json::array(), sigma_face = json::array();
    for (auto r : mask_indices(f.mask)) dual_face.push_back(r);
    for (auto r : mask_indices(f.dual_mask)) sigma_face.push_back(r);
    faces.push_back({{"index", i}, {"face", dual_face}, {"orthogonal_rays", sigma_face}, {"dim", f.dim},
                     {"smooth", f.smooth}});
  }
  json hilb = io::mat_to_json(x.hilb());
  json rep = {{"variety", io::variety_to_json(x)},
              {"dual_rays", io::mat_to_json(x.dual().rays())},
              {"hilbert_basis", hilb},
              {"faces", faces},
              {"bound", o.bound},
              {"roots", roots_json(x, o.bound)},
              {"ml", ml_json(x, ml_trivial_certificate(x))}};
  emit(rep, o, out);
  return ok;
}

inline int toric_roots(const Options& o, std::ostream& out) {
  auto x = io::variety_from(io::read_json(need(o.variety, "--variety")));
  emit({{"bound", o.bound}, {"classes", roots_json(x, o.bound)}}, o, out);
  return ok;
}

inline int toric_act(const Options& o, std::ostream& out) {
  auto x = io::variety_from(io::read_json(need(o.variety, "--variety")));
  auto pts = io::points_from(x, io::read_json(need(o.points, "--points")));
  auto w = io::word_from(x, io::read_json(need(o.word, "--word")));
  emit(io::points_to_json(x, w.replay(x, pts)), o, out);
  return ok;
}

inline json toric_inputs(const ToricVariety& x, const std::vector<Point>& pts,
                         const std::optional<std::vector<Point>>& targets) {
  return {{"variety", io::hash_of(io::variety_to_json(x))},
          {"points", io::hash_of(io::points_to_json(x, pts))},
          {"targets", targets ? json(io::hash_of(io::points_to_json(x, *targets))) : json(nullptr)}};
}

inline int toric_solve(const Options& o, std::ostream& out) {
  auto x = io::variety_from(io::read_json(need(o.variety, "--variety")));
  auto pts = io::points_from(x, io::read_json(need(o.points, "--points")));
  std::optional<std::vector<Point>> targets;
  if (!o.targets.empty()) targets = io::points_from(x, io::read_json(o.targets));
  if (o.mode != "exact") fail(errc::capability, "solve", "toric solving is exact only");
  SolveResult r = solve(x, pts, targets);
  json letters = json::array();
  for (const auto& l : r.word.letters) letters.push_back(io::letter_to_json(l));
  json standard = json::array();
  for (const auto& s : r.standard) standard.push_back(io::to_json(s));
  json basis = json::array();
  for (auto b : r.basis) basis.push_back(b);
  const auto image = r.word.replay(x, pts);
  const auto goal = targets ? *targets : standard_tuple(x, r.basis, pts.size());
  json cert = {{"certificate", "toric-word"},
               {"engine", engine()},
               {"mode", "exact"},
               {"inputs", toric_inputs(x, pts, targets)},
               {"variety", io::variety_to_json(x)},
               {"basis", basis},
               {"kappa", r.kappa.get_str()},
               {"standard", standard},
               {"forward_letters", r.forward_letters},
               {"letters", letters},
               {"provenance", io::provenance(r.word.letters)},
               {"image", io::points_to_json(x, image)["points"]},
               {"verdict", {{"verified", image == goal}, {"method", "exact replay on the input tuple"}}},
               {"notes", json::array({rational_orbit_note})}};
  emit(cert, o, out);
  return image == goal ? ok : rejected;
}

inline int toric_verify(const Options& o, std::ostream& out) {
  auto x = io::variety_from(io::read_json(need(o.variety, "--variety")));
  auto pts = io::points_from(x, io::read_json(need(o.points, "--points")));
  auto wj = io::read_json(need(o.word, "--word"));
  json rep = {{"engine", engine()}, {"recomputed", true}};
  auto verdict = [&](bool v, const std::string& why) {
    rep["verified"] = v;
    rep["reason"] = why;
    emit(rep, o, out);
    return v ? ok : rejected;
  };
  if (wj.is_object() && wj.contains("inputs") && wj["inputs"].contains("variety") &&
      wj["inputs"]["variety"] != io::hash_of(io::variety_to_json(x)))
    return verdict(false, "word was produced for a different variety");
  AutomorphismWord w;
  try {
    w = io::word_from(x, wj);
  } catch (const error& e) {
    return verdict(false, std::string("invalid letter: ") + e.what());
  }
  std::vector<Point> goal;
  if (!o.expect.empty()) {
    goal = io::points_from(x, io::read_json(o.expect));
  } else {
    goal = standard_tuple(x, choose_ray_basis(x), pts.size());
  }
  if (goal.size() != pts.size()) return verdict(false, "expected tuple has a different size");
  std::vector<Point> image;
  try {
    image = w.replay(x, pts);
  } catch (const error& e) {
    return verdict(false, std::string("replay failed: ") + e.what());
  }
  rep["letters"] = w.size();
  rep["image"] = io::points_to_json(x, image)["points"];
  for (std::size_t i = 0; i < goal.size(); ++i)
    if (!(image[i] == goal[i])) return verdict(false, "point " + std::to_string(i) + " differs from the expected point");
  return verdict(true, "exact replay matches");
}

inline json flex_json(const ToricVariety& x, const FlexCertificate& c) {
  json roots = json::array();
  for (const auto& r : c.roots) roots.push_back(io::root_to_json(r));
  json basis = json::array();
  for (auto b : c.basis_rays) basis.push_back(b);
  return {{"basis_rays", basis}, {"roots", roots}, {"velocity", io::mat_to_json(c.velocity)}, {"rank", c.rank},
          {"full_rank", c.rank == x.rank()}};
}

inline int toric_flex(const Options& o, std::ostream& out) {
  auto x = io::variety_from(io::read_json(need(o.variety, "--variety")));
  std::vector<Point> pts{distinguished_point(x, x.open_face())};
  if (!o.points.empty()) pts = io::points_from(x, io::read_json(o.points));
  json certs = json::array();
  bool all = true;
  for (const auto& p : pts) {
    auto c = flexibility_certificate(x, p);
    all = all && c.rank == x.rank();
    certs.push_back({{"point", io::point_to_json(x, p)}, {"certificate", flex_json(x, c)}});
  }
  emit({{"variety", io::variety_to_json(x)}, {"points", certs}, {"flexible", all}}, o, out);
  return all ? ok : rejected;
}

inline int toric_ml(const Options& o, std::ostream& out) {
  auto x = io::variety_from(io::read_json(need(o.variety, "--variety")));
  auto c = ml_trivial_certificate(x);
  json j = ml_json(x, c);
  emit({{"variety", io::variety_to_json(x)}, {"ml", j}}, o, out);
  return j["checked"].get<bool>() ? ok : rejected;
}

// ---------------------------------------------------------------------------
// susp

inline bool numeric(const Options& o) {
  if (o.mode == "exact") return false;
  if (o.mode == "numeric") return true;
  fail(errc::parse, "usage", "--mode must be exact or numeric");
}

inline int susp_build(const Options& o, std::ostream& out) {
  auto x = io::suspension_from(io::read_json(need(o.variety, "--variety")));
  json rel = json::array(), uv_free = json::array();
  const auto names = x.names();
  for (std::size_t i = 1; i <= x.level(); ++i) {
    const auto base = base_of(SuspensionVariety{x.k, {x.fs.begin(), x.fs.begin() + static_cast<long>(i)}});
    QPolyN r = x.relation(i);
    rel.push_back(to_string(QPolyN(x.nvars()) - r, names) + " = 0");
    uv_free.push_back(!has_uv_monomial(base, reduce(base, x.fs[i - 1])));
  }
  emit({{"variety", io::suspension_to_json(x)},
        {"names", names},
        {"level", x.level()},
        {"dim", x.dim()},
        {"surface", x.is_surface()},
        {"relations", rel},
        {"reduced_f_has_no_uv_monomial", uv_free}},
       o, out);
  return ok;
}

template <class K>
int susp_act_impl(const SuspensionVariety& x, const Options& o, std::ostream& out) {
  auto pts = io::susp_points_from<K>(x, io::read_json(need(o.points, "--points")));
  auto wj = io::read_json(need(o.word, "--word"));
  const json& arr = io::letters_of(wj);
  const json& first = arr.is_array() ? (arr.empty() ? json::object() : arr[0]) : arr;
  if (first.contains("base")) {
    if constexpr (!scalar_ops<K>::exact) {
      fail(errc::capability, "act", "lifted letters act in exact mode only");
    } else {
      pts = io::lnd_word_from(x, wj).template replay<K>(pts);
    }
  } else {
    pts = io::surface_word_from<K>(wj).replay(x, pts);
  }
  emit(io::susp_points_to_json(pts), o, out);
  return ok;
}

inline int susp_act(const Options& o, std::ostream& out) {
  auto x = io::suspension_from(io::read_json(need(o.variety, "--variety")));
  return numeric(o) ? susp_act_impl<Complex>(x, o, out) : susp_act_impl<Rational>(x, o, out);
}

template <class K>
json susp_inputs(const SuspensionVariety& x, const std::vector<SuspPoint<K>>& pts,
                 const std::optional<std::vector<SuspPoint<K>>>& targets) {
  return {{"variety", io::hash_of(io::suspension_to_json(x))},
          {"points", io::hash_of(io::susp_points_to_json(pts))},
          {"targets", targets ? json(io::hash_of(io::susp_points_to_json(*targets))) : json(nullptr)}};
}

template <class K>
int surface_solve_impl(const SuspensionVariety& x, const Options& o, std::ostream& out) {
  auto pts = io::susp_points_from<K>(x, io::read_json(need(o.points, "--points")));
  std::optional<std::vector<SuspPoint<K>>> targets;
  if (!o.targets.empty()) targets = io::susp_points_from<K>(x, io::read_json(o.targets));
  auto s = surface_solve<K>(x, pts, targets, o.tol);
  const auto goal = targets ? *targets : s.standard;
  std::string why;
  const double r = verify_surface_word(x, s.word, pts, goal, o.tol, &why);
  const bool good = scalar_ops<K>::exact ? r == 0 : r <= o.tol;
  json letters = json::array();
  for (const auto& l : s.word.letters) letters.push_back(io::surface_letter_to_json(l));
  json cert = {{"certificate", "surface-word"},
               {"engine", engine()},
               {"mode", o.mode},
               {"tol", o.tol},
               {"inputs", susp_inputs(x, pts, targets)},
               {"variety", io::suspension_to_json(x)},
               {"standard", io::susp_points_to_json(s.standard)["points"]},
               {"letters", letters},
               {"provenance", io::provenance(s.word.letters)},
               {"verdict", {{"verified", good}, {"residual", r}, {"method", why}}}};
  emit(cert, o, out);
  return good ? ok : rejected;
}

inline int tower_solve_impl(const SuspensionVariety& x, const Options& o, std::ostream& out) {
  if (numeric(o)) fail(errc::capability, "tower-solve", "higher-dimensional suspensions are solved in exact mode only");
  auto pts = io::susp_points_from<Rational>(x, io::read_json(need(o.points, "--points")));
  std::optional<std::vector<SuspPoint<Rational>>> targets;
  if (!o.targets.empty()) targets = io::susp_points_from<Rational>(x, io::read_json(o.targets));
  auto s = tower_solve(x, pts, targets);
  const auto goal = targets ? *targets : s.standard;
  const bool good = s.word.replay<Rational>(pts) == goal;
  json letters = json::array();
  for (const auto& l : s.word.letters) letters.push_back(io::lnd_letter_to_json(x, l));
  json cert = {{"certificate", "suspension-word"},
               {"engine", engine()},
               {"mode", "exact"},
               {"inputs", susp_inputs(x, pts, targets)},
               {"variety", io::suspension_to_json(x)},
               {"standard", io::susp_points_to_json(s.standard)["points"]},
               {"letters", letters},
               {"provenance", io::provenance(s.word.letters)},
               {"base_instances", {{"tuple_size", pts.size()}, {"levels", x.level()}}},
               {"verdict", {{"verified", good}, {"method", "exact replay on the input tuple"}}},
               {"notes", json::array({"base transitivity is exercised on the transported tuples only; "
                                      "no claim is made beyond the instance sizes recorded here"})}};
  emit(cert, o, out);
  return good ? ok : rejected;
}

inline int susp_solve(const Options& o, std::ostream& out) {
  auto x = io::suspension_from(io::read_json(need(o.variety, "--variety")));
  if (x.is_surface()) return numeric(o) ? surface_solve_impl<Complex>(x, o, out) : surface_solve_impl<Rational>(x, o, out);
  return tower_solve_impl(x, o, out);
}

template <class K>
int surface_verify_impl(const SuspensionVariety& x, const json& wj, const Options& o, json& rep) {
  auto pts = io::susp_points_from<K>(x, io::read_json(need(o.points, "--points")));
  std::vector<SuspPoint<K>> goal = o.expect.empty() ? surface_standard_tuple<K>(x, pts.size())
                                                    : io::susp_points_from<K>(x, io::read_json(o.expect));
  SurfaceWord<K> w;
  try {
    w = io::surface_word_from<K>(wj);
  } catch (const error& e) {
    rep["reason"] = std::string("invalid letter: ") + e.what();
    return rejected;
  }
  const bool tagged = !w.letters.empty() && std::all_of(w.letters.begin(), w.letters.end(), [](const auto& l) {
    return l.stage.find("step") != std::string::npos;
  });
  std::string why;
  double r = 1e300;
  if (tagged) {
    r = verify_surface_word(x, w, pts, goal, o.tol, &why);
  } else if (pts.size() == goal.size()) {
    auto img = w.replay(x, pts);
    r = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) r = std::max(r, max_distance(img[i], goal[i]));
    why = "replay only (letters carry no step tags)";
  } else {
    why = "expected tuple has a different size";
  }
  rep["residual"] = r;
  rep["steps_rechecked"] = tagged;
  rep["reason"] = why;
  const bool good = scalar_ops<K>::exact ? r == 0 : r <= o.tol;
  return good ? ok : rejected;
}

inline int susp_verify(const Options& o, std::ostream& out) {
  auto x = io::suspension_from(io::read_json(need(o.variety, "--variety")));
  auto wj = io::read_json(need(o.word, "--word"));
  json rep = {{"engine", engine()}, {"recomputed", true}, {"mode", o.mode}};
  int code = rejected;
  if (wj.is_object() && wj.contains("inputs") && wj["inputs"].contains("variety") &&
      wj["inputs"]["variety"] != io::hash_of(io::suspension_to_json(x))) {
    rep["reason"] = "word was produced for a different variety";
  } else if (x.is_surface()) {
    code = numeric(o) ? surface_verify_impl<Complex>(x, wj, o, rep) : surface_verify_impl<Rational>(x, wj, o, rep);
  } else {
    if (numeric(o)) fail(errc::capability, "verify", "higher-dimensional suspensions are verified in exact mode only");
    auto pts = io::susp_points_from<Rational>(x, io::read_json(need(o.points, "--points")));
    auto goal = o.expect.empty() ? tower_standard_tuple(x, pts.size())
                                 : io::susp_points_from<Rational>(x, io::read_json(o.expect));
    try {
      LndWord w = io::lnd_word_from(x, wj);
      const bool good = w.replay<Rational>(pts) == goal;
      rep["reason"] = good ? "exact replay matches" : "replay differs from the expected tuple";
      code = good ? ok : rejected;
    } catch (const error& e) {
      rep["reason"] = std::string("invalid letter: ") + e.what();
    }
  }
  rep["verified"] = code == ok;
  emit(rep, o, out);
  return code;
}

inline int susp_flex(const Options& o, std::ostream& out) {
  auto x = io::suspension_from(io::read_json(need(o.variety, "--variety")));
  auto pts = io::susp_points_from<Rational>(x, io::read_json(need(o.points, "--points")));
  json certs = json::array();
  bool all = true;
  for (const auto& p : pts) {
    auto c = flexibility_matrix(x, p);
    all = all && c.full(x.dim());
    json lnds = json::array();
    for (const auto& l : c.lnds) lnds.push_back(io::lnd_letter_to_json(x, LndLetter{l, Rational(0), "flex"}));
    for (auto& l : lnds) l.erase("t"), l.erase("stage");
    certs.push_back({{"point", io::susp_point_to_json(p)},
                     {"e", io::mat_to_json(c.e)},
                     {"rank", c.rank},
                     {"full_rank", c.full(x.dim())},
                     {"special", c.special},
                     {"lnds", lnds}});
  }
  emit({{"variety", io::suspension_to_json(x)}, {"dim", x.dim()}, {"points", certs}, {"flexible", all}}, o, out);
  return all ? ok : rejected;
}

}  // namespace detail

/// Runs one command line (without the program name).
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact toric and suspension automorphism engine"};
  app.require_subcommand(1);
  Options o;
  int code = ok;

  auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& help, auto fn,
                  std::initializer_list<const char*> flags) {
    auto* sub = parent->add_subcommand(name, help);
    for (std::string f : flags) {
      if (f == "variety") sub->add_option("--variety", o.variety, "variety JSON file");
      if (f == "points") sub->add_option("--points", o.points, "points JSON file");
      if (f == "targets") sub->add_option("--targets", o.targets, "target points JSON file");
      if (f == "word") sub->add_option("--word", o.word, "word or certificate JSON file");
      if (f == "expect") sub->add_option("--expect", o.expect, "expected points JSON file");
    }
    sub->add_option("--bound", o.bound, "sup-norm bound for root enumeration")->capture_default_str();
    sub->add_option("--mode", o.mode, "exact or numeric")->capture_default_str()->check(CLI::IsMember({"exact", "numeric"}));
    sub->add_option("--tol", o.tol, "numeric tolerance")->capture_default_str();
    sub->add_option("--seed", o.seed, "reserved");
    sub->add_option("--out", o.out, "output file (default stdout)");
    sub->callback([&, fn] { code = fn(o, out); });
  };

  auto* toric = app.add_subcommand("toric", "affine toric varieties");
  toric->require_subcommand(1);
  leaf(toric, "info", "Hilbert basis, faces, roots and ML certificate", detail::toric_info, {"variety"});
  leaf(toric, "roots", "Demazure roots within --bound", detail::toric_roots, {"variety"});
  leaf(toric, "act", "apply a word to points", detail::toric_act, {"variety", "points", "word"});
  leaf(toric, "solve", "word moving points to targets", detail::toric_solve, {"variety", "points", "targets"});
  leaf(toric, "verify", "replay a word and compare", detail::toric_verify, {"variety", "points", "word", "expect"});
  leaf(toric, "flex", "flexibility certificate", detail::toric_flex, {"variety", "points"});
  leaf(toric, "ml", "Makar-Limanov triviality certificate", detail::toric_ml, {"variety"});

  auto* susp = app.add_subcommand("susp", "suspensions uv = f over affine space");
  susp->require_subcommand(1);
  leaf(susp, "build", "validate a suspension", detail::susp_build, {"variety"});
  leaf(susp, "act", "apply a word to points", detail::susp_act, {"variety", "points", "word"});
  leaf(susp, "solve", "word moving points to targets", detail::susp_solve, {"variety", "points", "targets"});
  leaf(susp, "verify", "replay a word and compare", detail::susp_verify, {"variety", "points", "word", "expect"});
  leaf(susp, "flex", "flexibility matrices at hyperbolic points", detail::susp_flex, {"variety", "points"});

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? ok : usage;
  } catch (const error& e) {
    err << e.what() << "\n";
    return e.code() == errc::parse ? usage : engine_error;
  } catch (const std::exception& e) {
    err << "[internal] " << e.what() << "\n";
    return engine_error;
  }
  return code;
}

}  // namespace toricflex::cli
