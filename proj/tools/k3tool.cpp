// k3tool: batch front end for the k3 library.
//
// Every invocation prints one JSON document (or a CSV table with
// --format csv where supported).  Exit codes:
//   0 success, 1 internal error, 2 invalid configuration,
//   3 enumeration guard exceeded, 4 invariant violation detected.

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "k3/k3.hpp"

namespace {

using k3::io::json;

constexpr const char* kSchema = "k3tool/1";
constexpr const char* kCapEnv = "K3TOOL_ENUM_CAP";

enum Exit { kOk = 0, kInternal = 1, kInvalid = 2, kGuard = 3, kInvariant = 4 };

struct RunConfig {
  int p = 0;
  int sigma0 = 0;
  int n = 0;  // extension degree
  int m = 0;
  int r = 0;
  int prec = 0;
  int height = 0;
  int mult = 0;
  int trunc = 0;
  int ring_degree = 1;
  int bound = k3::kDefaultEmbeddingBound;
  int base_index = -1;
  int max_n = 4;
  int s0 = 0;
  int s0p = 0;
  std::string law;
  std::string gram;
  std::string preset;
  std::string basis;
  std::string format = "json";
  std::string output;
  std::optional<std::uint64_t> cap;
  bool formula = false;
  bool bruteforce = false;
  bool jsonl = false;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct Result {
  json doc = json::object();
  std::optional<Table> table;
  std::vector<std::string> lines;  // JSON Lines output
  bool violation = false;
};

// ---------------------------------------------------------------- helpers

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string render_csv(const Table& t) {
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << csv_cell(cells[i]);
    out << "\n";
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return out.str();
}

std::string str(bool b) { return b ? "true" : "false"; }

k3::EnumerationLimits limits(const RunConfig& cfg) {
  k3::EnumerationLimits lim;
  if (cfg.cap) {
    lim.cap = *cfg.cap;
  } else if (const char* env = std::getenv(kCapEnv)) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used != std::string(env).size() || v == 0) throw std::invalid_argument(env);
      lim.cap = v;
    } catch (const std::exception&) {
      throw k3::InvalidInput(std::string(kCapEnv) + " must be a positive integer");
    }
  }
  if (lim.cap == 0) throw k3::InvalidInput("enumeration cap must be positive");
  return lim;
}

k3::Field field_of(const RunConfig& cfg) {
  if (cfg.n < 1) throw k3::InvalidInput("extension degree -n must be >= 1");
  return k3::make_field(cfg.p, cfg.n);
}

// ---------------------------------------------------------------- lattices

k3::GramLattice preset_term(const std::string& term) {
  std::string name = term;
  std::optional<k3::Integer> scale;
  if (const auto open = term.find('('); open != std::string::npos) {
    if (term.back() != ')') throw k3::InvalidInput("malformed lattice term: " + term);
    name = term.substr(0, open);
    try {
      scale = k3::Integer(term.substr(open + 1, term.size() - open - 2));
    } catch (const std::invalid_argument&) {
      throw k3::InvalidInput("malformed twist in lattice term: " + term);
    }
  }
  k3::GramLattice base = [&] {
    if (name == "U") return k3::make_U();
    if (name == "Uprime" || name == "U'") return k3::make_U_prime();
    if (name == "A1") return k3::GramLattice(k3::IntMatrix(1, 1, {2}));
    if (name == "A2") return k3::GramLattice(k3::IntMatrix(2, 2, {2, -1, -1, 2}));
    if (name == "E8") {
      // Dynkin chain 1-2-3-4-5-6-7 with node 8 attached to node 5
      k3::IntMatrix g(8, 8);
      for (std::size_t i = 0; i < 8; ++i) g(i, i) = 2;
      auto bond = [&](std::size_t a, std::size_t b) { g(a, b) = g(b, a) = -1; };
      for (std::size_t i = 0; i + 1 < 7; ++i) bond(i, i + 1);
      bond(4, 7);
      return k3::GramLattice(g);
    }
    throw k3::InvalidInput("unknown lattice preset: " + name + " (known: U, Uprime, A1, A2, E8)");
  }();
  return scale ? k3::twist(base, *scale) : base;
}

k3::GramLattice parse_preset(const std::string& expr) {
  std::optional<k3::GramLattice> acc;
  std::string term;
  std::istringstream in(expr);
  while (std::getline(in, term, '+')) {
    term.erase(std::remove_if(term.begin(), term.end(), [](unsigned char c) { return std::isspace(c); }), term.end());
    if (term.empty()) throw k3::InvalidInput("empty term in lattice expression");
    auto L = preset_term(term);
    acc = acc ? k3::direct_sum(*acc, L) : L;
  }
  if (!acc) throw k3::InvalidInput("empty lattice expression");
  return *acc;
}

k3::GramLattice lattice_of(const RunConfig& cfg) {
  if (cfg.gram.empty() == cfg.preset.empty()) throw k3::InvalidInput("give exactly one of --gram or --preset");
  return cfg.gram.empty() ? parse_preset(cfg.preset) : k3::io::lattice_from_file(cfg.gram);
}

Result lattice_info(const RunConfig& cfg) {
  const auto L = lattice_of(cfg);
  const auto snf = k3::smith_normal_form(L.gram());
  Result res;
  res.doc["lattice"] = k3::io::lattice_json(L);
  res.doc["discriminant"] = k3::io::to_json(k3::discriminant(L));
  json divs = json::array();
  for (const auto& d : snf.divisors) divs.push_back(k3::io::to_json(d));
  res.doc["elementary_divisors"] = divs;
  res.doc["even"] = true;
  if (cfg.p != 0) {
    try {
      res.doc["artin_invariant"] = k3::artin_invariant_from_disc(k3::discriminant(L), cfg.p);
    } catch (const k3::InvalidInput& e) {
      res.doc["artin_invariant"] = nullptr;
      res.doc["artin_invariant_reason"] = e.what();
    }
  }
  return res;
}

Result lattice_embed(const RunConfig& cfg) {
  const auto L = lattice_of(cfg);
  Result res;
  res.doc["bound"] = cfg.bound;
  const auto pair = k3::find_hyperbolic_pair(L, cfg.bound);
  res.doc["found"] = pair.has_value();
  if (pair) {
    res.doc["E"] = pair->E;
    res.doc["Z"] = pair->Z;
    auto dot = [&](const std::vector<long long>& a, const std::vector<long long>& b) {
      k3::Integer s = 0;
      for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) s += k3::Integer(std::to_string(a[i] * b[j])) * L.gram()(i, j);
      return k3::io::to_json(s);
    };
    res.doc["intersection_matrix"] = {{dot(pair->E, pair->E), dot(pair->E, pair->Z)},
                                      {dot(pair->Z, pair->E), dot(pair->Z, pair->Z)}};
  }
  return res;
}

Result lattice_disckernel(const RunConfig& cfg) {
  const auto L = lattice_of(cfg);
  const auto V = k3::disc_kernel_space(L, cfg.p);
  Result res;
  res.doc["space"] = k3::io::space_json(V);
  if (V.dim() % 2 == 0 && V.dim() > 0) res.doc["sigma0"] = V.dim() / 2;
  return res;
}

// ---------------------------------------------------------------- spaces

Result space_n0(const RunConfig& cfg) {
  const auto V = k3::standard_N0(cfg.p, cfg.sigma0);
  Result res;
  res.doc["space"] = k3::io::space_json(V);
  res.doc["sigma0"] = cfg.sigma0;
  res.doc["nonresidue"] = k3::smallest_nonresidue(cfg.p);
  return res;
}

Result space_witt(const RunConfig& cfg) {
  const auto V = k3::standard_N0(cfg.p, cfg.sigma0);
  const auto F = field_of(cfg);
  const auto w = k3::witt_index(V, F, limits(cfg));
  Result res;
  res.doc["field"] = F->name();
  res.doc["dim"] = V.dim();
  res.doc["witt_index"] = w;
  res.doc["neutral"] = 2 * w == V.dim();
  return res;
}

std::string basis_cell(const k3::Subspace& K) { return k3::io::subspace_json(K)["basis_rows"].dump(); }

Result space_enumerate(const RunConfig& cfg) {
  const auto V = k3::standard_N0(cfg.p, cfg.sigma0);
  const auto F = field_of(cfg);
  if (cfg.r < 0) throw k3::InvalidInput("-r must be >= 0");
  const auto subs = k3::enumerate_totally_isotropic(V, F, static_cast<std::size_t>(cfg.r), limits(cfg));
  Result res;
  res.doc["field"] = F->name();
  res.doc["r"] = cfg.r;
  res.doc["count"] = subs.size();
  json arr = json::array();
  Table t{{"index", "dim", "basis"}, {}};
  for (std::size_t i = 0; i < subs.size(); ++i) {
    json j = k3::io::subspace_json(subs[i]);
    if (cfg.jsonl) {
      j["index"] = i;
      res.lines.push_back(j.dump());
    }
    arr.push_back(std::move(j));
    t.rows.push_back({std::to_string(i), std::to_string(subs[i].dim()), basis_cell(subs[i])});
  }
  res.doc["subspaces"] = std::move(arr);
  res.table = std::move(t);
  return res;
}

// ---------------------------------------------------------------- crystals

Result crystal_enumerate(const RunConfig& cfg) {
  const auto V = k3::standard_N0(cfg.p, cfg.sigma0);
  const auto F = field_of(cfg);
  const auto pts = k3::enumerate_characteristic(V, F, cfg.sigma0, limits(cfg));
  Result res;
  res.doc["field"] = F->name();
  res.doc["sigma0"] = cfg.sigma0;
  res.doc["count"] = pts.size();
  std::size_t strict = 0;
  json arr = json::array();
  Table t{{"index", "strict", "basis"}, {}};
  for (std::size_t i = 0; i < pts.size(); ++i) {
    strict += pts[i].strict();
    json j = k3::io::characteristic_json(pts[i]);
    if (cfg.jsonl) {
      j["index"] = i;
      res.lines.push_back(j.dump());
    }
    arr.push_back(std::move(j));
    t.rows.push_back({std::to_string(i), str(pts[i].strict()), basis_cell(pts[i].subspace())});
  }
  res.doc["strict_count"] = strict;
  res.doc["subspaces"] = std::move(arr);
  res.table = std::move(t);
  return res;
}

Result crystal_check(const RunConfig& cfg) {
  const auto V = k3::standard_N0(cfg.p, cfg.sigma0);
  const auto F = field_of(cfg);
  json rows;
  try {
    rows = json::parse(cfg.basis);
  } catch (const json::exception& e) {
    throw k3::InvalidInput(std::string("--basis is not valid JSON: ") + e.what());
  }
  const auto K = k3::io::subspace_from_json(V, F, rows);
  Result res;
  res.doc["subspace"] = k3::io::subspace_json(K);
  res.doc["totally_isotropic"] = K.is_totally_isotropic();
  const bool ch = k3::is_characteristic(K, cfg.sigma0);
  res.doc["characteristic"] = ch;
  res.doc["phi_closure_dim"] = k3::phi_closure_dim(K);
  if (ch) res.doc["strict"] = k3::is_strictly_characteristic(K, cfg.sigma0);
  return res;
}

// ---------------------------------------------------------------- moduli

k3::Subspace base_embedded(const k3::PlusSpace& P, const k3::Field& F) {
  k3::FieldMatrix M(0, P.full.dim());
  for (std::size_t i = 0; i < P.base.dim(); ++i) {
    std::vector<k3::code_t> e(P.full.dim(), 0);
    e[i] = 1;
    M.append_row(e);
  }
  return {P.full, F, std::move(M)};
}

Result moduli_plus(const RunConfig& cfg) {
  const auto P = k3::build_plus_space(k3::standard_N0(cfg.p, cfg.sigma0));
  Result res;
  res.doc["sigma0"] = cfg.sigma0;
  res.doc["base"] = k3::io::space_json(P.base);
  res.doc["full"] = k3::io::space_json(P.full);
  res.doc["d_index"] = P.d_index;
  res.doc["e_index"] = P.e_index;
  return res;
}

Result moduli_section(const RunConfig& cfg) {
  const auto P = k3::build_plus_space(k3::standard_N0(cfg.p, cfg.sigma0));
  const auto F = field_of(cfg);
  const auto pts = k3::enumerate_characteristic(P.base, F, cfg.sigma0, limits(cfg));
  Result res;
  json arr = json::array();
  Table t{{"index", "identity", "strict", "section_basis"}, {}};
  std::size_t ok = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto S = k3::sigma_section(pts[i], P);
    const bool id = k3::gamma_plus(S, P) == pts[i];
    ok += id;
    arr.push_back({{"index", i},
                   {"base_point", k3::io::subspace_json(pts[i].subspace())},
                   {"section", k3::io::characteristic_json(S)},
                   {"identity", id}});
    t.rows.push_back({std::to_string(i), str(id), str(S.strict()), basis_cell(S.subspace())});
  }
  res.doc["field"] = F->name();
  res.doc["sigma0"] = cfg.sigma0;
  res.doc["count"] = pts.size();
  res.doc["identity_holds"] = ok;
  res.doc["all_identity"] = ok == pts.size();
  res.doc["points"] = std::move(arr);
  res.table = std::move(t);
  res.violation = ok != pts.size();
  return res;
}

Result moduli_project(const RunConfig& cfg) {
  const auto P = k3::build_plus_space(k3::standard_N0(cfg.p, cfg.sigma0));
  const auto F = field_of(cfg);
  const auto lim = limits(cfg);
  const auto base = k3::enumerate_characteristic(P.base, F, cfg.sigma0, lim);
  const auto plus = k3::enumerate_characteristic(P.full, F, cfg.sigma0 + 1, lim);
  const auto B = base_embedded(P, F);
  Result res;
  std::vector<std::size_t> fiber(base.size(), 0);
  std::size_t failures = 0;
  json arr = json::array();
  Table t{{"index", "image_index", "intersection_dim", "basis"}, {}};
  for (std::size_t i = 0; i < plus.size(); ++i) {
    const auto img = k3::gamma_plus(plus[i], P);
    const auto it = std::find(base.begin(), base.end(), img);
    if (it == base.end() || !(*it == img)) throw k3::InvariantViolation("gamma_plus image is not an enumerated base point");
    const auto idx = static_cast<std::size_t>(it - base.begin());
    ++fiber[idx];
    const auto& S = plus[i].subspace();
    const std::size_t d = k3::intersect(k3::intersect(S, k3::phi(S)), B).dim();
    failures += d != static_cast<std::size_t>(cfg.sigma0 - 1);
    arr.push_back({{"index", i}, {"image_index", idx}, {"intersection_dim", d}, {"point", k3::io::characteristic_json(plus[i])}});
    t.rows.push_back({std::to_string(i), std::to_string(idx), std::to_string(d), basis_cell(S)});
  }
  res.doc["field"] = F->name();
  res.doc["sigma0"] = cfg.sigma0;
  res.doc["base_count"] = base.size();
  res.doc["plus_count"] = plus.size();
  res.doc["fiber_sizes"] = fiber;
  res.doc["expected_fiber_size"] = F->order() + 1;
  res.doc["intersection_invariant_failures"] = failures;
  res.doc["points"] = std::move(arr);
  res.table = std::move(t);
  res.violation = failures != 0 ||
                  std::any_of(fiber.begin(), fiber.end(), [&](std::size_t s) { return s != F->order() + 1; });
  return res;
}

json fiber_point_json(const k3::FiberPoint& pt) {
  json j{{"kind", pt.kind == k3::FiberPoint::Kind::AtInfinity ? "infinity" : "affine"},
         {"subspace", k3::io::characteristic_json(pt.subspace)}};
  j["lambda"] = pt.lambda ? k3::io::element_json(*pt.lambda) : json(nullptr);
  return j;
}

Result moduli_fiber(const RunConfig& cfg) {
  if (!cfg.formula && !cfg.bruteforce) throw k3::InvalidInput("moduli fiber needs --formula and/or --bruteforce");
  const auto P = k3::build_plus_space(k3::standard_N0(cfg.p, cfg.sigma0));
  const auto F = field_of(cfg);
  const auto lim = limits(cfg);
  const auto base = k3::enumerate_characteristic(P.base, F, cfg.sigma0, lim);
  if (cfg.base_index >= static_cast<int>(base.size()))
    throw k3::InvalidInput("--base-index out of range (" + std::to_string(base.size()) + " base points)");
  Result res;
  Table t{{"base_index", "method", "kind", "lambda", "basis"}, {}};
  json fibers = json::array();
  bool all_match = true;
  for (std::size_t b = 0; b < base.size(); ++b) {
    if (cfg.base_index >= 0 && b != static_cast<std::size_t>(cfg.base_index)) continue;
    json fj{{"base_index", b}, {"base_point", k3::io::subspace_json(base[b].subspace())}};
    std::vector<k3::CharacteristicSubspace> from_formula, from_search;
    if (cfg.formula) {
      const auto r = k3::fiber_formula(base[b], P, F, lim);
      json pts = json::array();
      for (const auto& pt : r.points) {
        pts.push_back(fiber_point_json(pt));
        from_formula.push_back(pt.subspace);
        t.rows.push_back({std::to_string(b), "formula", pt.kind == k3::FiberPoint::Kind::AtInfinity ? "infinity" : "affine",
                          pt.lambda ? k3::io::element_json(*pt.lambda).dump() : "", basis_cell(pt.subspace.subspace())});
      }
      fj["formula"] = {{"working_field", k3::io::field_json(*r.working_field)},
                       {"extended", r.extended},
                       {"v", k3::io::vector_json(*r.working_field, r.v)},
                       {"pairing", k3::io::element_json(r.pairing)},
                       {"normalizer", k3::io::element_json(r.normalizer)},
                       {"count", r.points.size()},
                       {"points", pts}};
    }
    if (cfg.bruteforce) {
      from_search = k3::fiber_enumerate(base[b], P, F, lim);
      json pts = json::array();
      for (const auto& K : from_search) {
        pts.push_back(k3::io::characteristic_json(K));
        t.rows.push_back({std::to_string(b), "bruteforce", "", "", basis_cell(K.subspace())});
      }
      fj["bruteforce"] = {{"count", from_search.size()}, {"points", pts}};
    }
    if (cfg.formula && cfg.bruteforce) {
      std::sort(from_formula.begin(), from_formula.end());
      std::sort(from_search.begin(), from_search.end());
      const bool match = from_formula == from_search;
      fj["match"] = match;
      all_match = all_match && match;
    }
    fibers.push_back(std::move(fj));
  }
  res.doc["field"] = F->name();
  res.doc["sigma0"] = cfg.sigma0;
  res.doc["base_count"] = base.size();
  res.doc["fibers"] = std::move(fibers);
  if (cfg.formula && cfg.bruteforce) res.doc["all_match"] = all_match;
  res.table = std::move(t);
  res.violation = !all_match;
  return res;
}

json count_row(int p, int sigma0, int n, std::uint64_t count, std::uint64_t prediction) {
  return {{"p", p},
          {"sigma0", sigma0},
          {"n", n},
          {"field", k3::make_field(p, n)->name()},
          {"count", count},
          {"prediction", prediction},
          {"match", count == prediction}};
}

std::vector<std::string> count_cells(const json& r) {
  return {std::to_string(r["p"].get<int>()), std::to_string(r["sigma0"].get<int>()), r["field"].get<std::string>(),
          std::to_string(r["count"].get<std::uint64_t>()), std::to_string(r["prediction"].get<std::uint64_t>()),
          str(r["match"].get<bool>())};
}

const std::vector<std::string> kCountHeader{"p", "sigma0", "field", "count", "prediction", "match"};

Result moduli_count(const RunConfig& cfg) {
  field_of(cfg);
  const auto prediction = k3::tower_prediction(cfg.p, cfg.sigma0, cfg.n);
  const auto count = k3::count_points(cfg.p, cfg.sigma0, cfg.n, limits(cfg));
  Result res;
  res.doc = count_row(cfg.p, cfg.sigma0, cfg.n, count, prediction);
  res.table = Table{kCountHeader, {count_cells(res.doc)}};
  res.violation = count != prediction;
  return res;
}

Result moduli_tower(const RunConfig& cfg) {
  if (cfg.max_n < 1) throw k3::InvalidInput("--max-n must be >= 1");
  const auto lim = limits(cfg);
  Result res;
  Table t{kCountHeader, {}};
  json rows = json::array();
  bool all = true;
  for (int n = 1; n <= cfg.max_n; ++n) {
    k3::make_field(cfg.p, n);
    const auto prediction = k3::tower_prediction(cfg.p, cfg.sigma0, n);
    const auto count = k3::count_points(cfg.p, cfg.sigma0, n, lim);
    json r = count_row(cfg.p, cfg.sigma0, n, count, prediction);
    all = all && count == prediction;
    t.rows.push_back(count_cells(r));
    rows.push_back(std::move(r));
  }
  res.doc["rows"] = std::move(rows);
  res.doc["all_match"] = all;
  res.table = std::move(t);
  res.violation = !all;
  return res;
}

// ---------------------------------------------------------------- formal groups

k3::FormalGroupLaw law_of(const RunConfig& cfg) {
  if (cfg.law == "additive") return k3::fgl_additive(cfg.p, cfg.prec > 0 ? cfg.prec : cfg.p * cfg.p + 1);
  if (cfg.law == "multiplicative") return k3::fgl_multiplicative(cfg.p, cfg.prec > 0 ? cfg.prec : cfg.p * cfg.p + 1);
  if (cfg.law == "lubin-tate") {
    if (cfg.height < 1) throw k3::InvalidInput("lubin-tate needs --height >= 1");
    if (cfg.prec > 0) return k3::fgl_lubin_tate(cfg.p, cfg.height, cfg.prec);
    long long q = 1;
    for (int i = 0; i < cfg.height; ++i) {
      q *= cfg.p;
      if (q > 100000) throw k3::InvalidInput("p^h exceeds the desk-scale limit 10^5");
    }
    return k3::fgl_lubin_tate(cfg.p, cfg.height, static_cast<int>(q) + 1);
  }
  throw k3::InvalidInput("--law must be additive, multiplicative or lubin-tate");
}

Result fgl_make(const RunConfig& cfg) {
  const auto F = law_of(cfg);
  const auto ax = k3::check_axioms(F);
  Result res;
  res.doc["law"] = k3::io::law_json(F);
  res.doc["axioms"] = {{"identity", ax.identity}, {"commutative", ax.commutative}, {"associative", ax.associative}};
  res.violation = !ax.all();
  return res;
}

Result fgl_nseries(const RunConfig& cfg) {
  const auto F = law_of(cfg);
  Result res;
  res.doc["law"] = F.name();
  res.doc["n"] = cfg.mult;
  res.doc["series"] = k3::io::series_json(k3::n_series(F, cfg.mult));
  return res;
}

Result fgl_height(const RunConfig& cfg) {
  const auto F = law_of(cfg);
  Result res;
  res.doc = k3::io::height_json(k3::height(F));
  res.doc["law"] = F.name();
  return res;
}

Result fgl_torsion(const RunConfig& cfg) {
  const auto F = law_of(cfg);
  if (cfg.ring_degree < 1) throw k3::InvalidInput("--ring-degree must be >= 1");
  const auto K = k3::make_field(cfg.p, cfg.ring_degree);
  const auto r = k3::torsion_analysis(F, K, cfg.trunc, cfg.mult, limits(cfg));
  Result res;
  res.doc = k3::io::torsion_json(r);
  res.doc["law"] = F.name();
  res.violation = (r.coprime_to_p && !r.injective) || (r.valuation_applicable && !r.valuation_holds);
  return res;
}

// ---------------------------------------------------------------- isogenies

Result isogeny_height(const RunConfig& cfg) {
  Result res;
  res.doc = {{"s0", cfg.s0}, {"s0p", cfg.s0p}, {"height", k3::isogeny_height(cfg.s0, cfg.s0p)}};
  return res;
}

Result isogeny_kummer(const RunConfig& cfg) {
  Result res;
  res.doc = {{"s0", cfg.s0}, {"height", k3::kummer_height(cfg.s0)}};
  return res;
}

Result isogeny_step(const RunConfig& cfg) {
  const auto st = k3::corollary_step(cfg.s0);
  Result res;
  res.doc = {{"s0", cfg.s0}, {"sigma0", st.sigma0}, {"height", st.height}};
  return res;
}

// ---------------------------------------------------------------- driver

Result field_make(const RunConfig& cfg) {
  if (cfg.m < 1) throw k3::InvalidInput("-m must be >= 1");
  const auto F = k3::make_field(cfg.p, cfg.m);
  Result res;
  res.doc["field"] = k3::io::field_json(*F);
  res.doc["order"] = F->order();
  res.doc["generator"] = k3::io::element_json(k3::FieldElement::generator(F));
  return res;
}

json error_doc(const std::string& kind, const std::string& message, int code) {
  return {{"schema", kSchema}, {"error", {{"kind", kind}, {"message", message}}}, {"exit_code", code}};
}

int emit_error(const std::string& kind, const std::string& message, int code) {
  std::cout << error_doc(kind, message, code).dump(2) << "\n";
  return code;
}

struct Command {
  CLI::App* app;
  std::string name;
  std::function<Result(const RunConfig&)> run;
  bool csv;
};

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  CLI::App app{"k3tool: characteristic subspaces, P^1-bundles, lattices and formal groups"};
  app.require_subcommand(1);
  std::vector<Command> commands;

  auto group = [&](const std::string& name, const std::string& desc) {
    auto* g = app.add_subcommand(name, desc);
    g->require_subcommand(1);
    return g;
  };
  auto leaf = [&](CLI::App* g, const std::string& name, const std::string& desc, auto run, bool csv = false) {
    auto* c = g->add_subcommand(name, desc);
    c->add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    c->add_option("-o,--output", cfg.output, "write the document to this file");
    commands.push_back({c, g->get_name() + " " + name, run, csv});
    return c;
  };
  auto prime = [&](CLI::App* c) { c->add_option("-p,--prime", cfg.p, "odd prime")->required(); };
  auto sigma = [&](CLI::App* c) { c->add_option("-s,--sigma0", cfg.sigma0, "Artin invariant")->required(); };
  auto degree = [&](CLI::App* c) { c->add_option("-n,--degree", cfg.n, "extension degree of F_{p^n}")->required(); };
  auto cap = [&](CLI::App* c) {
    c->add_option("--cap", cfg.cap, std::string("enumeration cap (default 10^7, env ") + kCapEnv + ")");
  };
  auto lattice_in = [&](CLI::App* c) {
    c->add_option("--gram", cfg.gram, "Gram matrix file (JSON {rank, rows} or CSV)");
    c->add_option("--preset", cfg.preset, "lattice expression such as U+U(3)+Uprime");
  };
  auto law = [&](CLI::App* c) {
    prime(c);
    c->add_option("--law", cfg.law, "additive, multiplicative or lubin-tate")->required();
    c->add_option("--height", cfg.height, "height of the Lubin-Tate law");
    c->add_option("--prec", cfg.prec, "total-degree precision");
  };

  auto* field = group("field", "finite fields");
  {
    auto* c = leaf(field, "make", "construct F_{p^m}", field_make);
    prime(c);
    c->add_option("-m,--degree", cfg.m, "extension degree")->required();
  }

  auto* lattice = group("lattice", "even lattices");
  {
    auto* c = leaf(lattice, "info", "Gram data, discriminant, Artin invariant", lattice_info);
    lattice_in(c);
    c->add_option("-p,--prime", cfg.p, "prime for the Artin invariant");
    c = leaf(lattice, "embed", "search a hyperbolic pair E, Z", lattice_embed);
    lattice_in(c);
    c->add_option("--bound", cfg.bound, "coefficient bound");
    c = leaf(lattice, "disckernel", "the F_p-space pL^/pL", lattice_disckernel);
    lattice_in(c);
    prime(c);
  }

  auto* space = group("space", "quadratic spaces over F_{p^n}");
  {
    auto* c = leaf(space, "n0", "the standard N_0", space_n0);
    prime(c);
    sigma(c);
    c = leaf(space, "witt", "Witt index of N_0 over F_{p^n}", space_witt);
    prime(c);
    sigma(c);
    degree(c);
    cap(c);
    c = leaf(space, "enumerate", "totally isotropic r-subspaces", space_enumerate, true);
    prime(c);
    sigma(c);
    degree(c);
    cap(c);
    c->add_option("-r,--rank", cfg.r, "subspace dimension")->required();
    c->add_flag("--jsonl", cfg.jsonl, "one JSON object per line");
  }

  auto* crystal = group("crystal", "characteristic subspaces");
  {
    auto* c = leaf(crystal, "enumerate", "all characteristic subspaces over F_{p^n}", crystal_enumerate, true);
    prime(c);
    sigma(c);
    degree(c);
    cap(c);
    c->add_flag("--jsonl", cfg.jsonl, "one JSON object per line");
    c = leaf(crystal, "check", "test a subspace given by basis rows", crystal_check);
    prime(c);
    sigma(c);
    degree(c);
    c->add_option("--basis", cfg.basis, "JSON array of rows of field elements")->required();
  }

  auto* moduli = group("moduli", "the P^1-bundle M_{N+} -> M_N");
  {
    auto* c = leaf(moduli, "plus", "the plus space N_0 (+) <D, E>", moduli_plus);
    prime(c);
    sigma(c);
    c = leaf(moduli, "section", "sigma_N on every base point", moduli_section, true);
    prime(c);
    sigma(c);
    degree(c);
    cap(c);
    c = leaf(moduli, "project", "Gamma_+ on every plus-space point", moduli_project, true);
    prime(c);
    sigma(c);
    degree(c);
    cap(c);
    c = leaf(moduli, "fiber", "fibers of Gamma_+", moduli_fiber, true);
    prime(c);
    sigma(c);
    degree(c);
    cap(c);
    c->add_flag("--formula", cfg.formula, "explicit parametrization");
    c->add_flag("--bruteforce", cfg.bruteforce, "exhaustive search");
    c->add_option("--base-index", cfg.base_index, "restrict to one base point");
    c = leaf(moduli, "count", "point count against the tower prediction", moduli_count, true);
    prime(c);
    sigma(c);
    degree(c);
    cap(c);
    c = leaf(moduli, "tower", "counts for n = 1..max-n", moduli_tower, true);
    prime(c);
    sigma(c);
    cap(c);
    c->add_option("--max-n", cfg.max_n, "largest extension degree");
  }

  auto* fgl = group("fgl", "one-dimensional formal group laws over F_p");
  {
    auto* c = leaf(fgl, "make", "coefficients and axiom check", fgl_make);
    law(c);
    c = leaf(fgl, "nseries", "the [n]-series", fgl_nseries);
    law(c);
    c->add_option("-n,--mult", cfg.mult, "multiplier")->required();
    c = leaf(fgl, "height", "height from the [p]-series", fgl_height);
    law(c);
    c = leaf(fgl, "torsion", "[n] on the maximal ideal of F_q[t]/(t^m)", fgl_torsion);
    law(c);
    cap(c);
    c->add_option("-n,--mult", cfg.mult, "multiplier")->required();
    c->add_option("--trunc", cfg.trunc, "m in F_q[t]/(t^m)")->required();
    c->add_option("--ring-degree", cfg.ring_degree, "q = p^e");
  }

  auto* isogeny = group("isogeny", "isogeny heights");
  {
    auto* c = leaf(isogeny, "height", "height between Artin invariants s0 and s0'", isogeny_height);
    c->add_option("--s0", cfg.s0, "Artin invariant")->required();
    c->add_option("--s0p", cfg.s0p, "second Artin invariant")->required();
    c = leaf(isogeny, "kummer", "height to and from the Kummer surface", isogeny_kummer);
    c->add_option("--s0", cfg.s0, "Artin invariant")->required();
    c = leaf(isogeny, "step", "one step down in Artin invariant", isogeny_step);
    c->add_option("--s0", cfg.s0, "Artin invariant")->required();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return emit_error("invalid_config", e.what(), kInvalid);
  }

  const Command* cmd = nullptr;
  for (const auto& c : commands)
    if (c.app->parsed()) cmd = &c;
  if (cmd == nullptr) return emit_error("invalid_config", "no command given", kInvalid);

  try {
    if (cfg.format == "csv" && !cmd->csv) throw k3::InvalidInput("csv output is not available for " + cmd->name);
    if (cfg.jsonl && cfg.format == "csv") throw k3::InvalidInput("--jsonl and --format csv are exclusive");
    Result res = cmd->run(cfg);

    std::string text;
    if (cfg.format == "csv") {
      text = render_csv(*res.table);
    } else if (cfg.jsonl) {
      for (const auto& l : res.lines) text += l + "\n";
    } else {
      res.doc["schema"] = kSchema;
      res.doc["command"] = cmd->name;
      if (res.violation) res.doc["invariant_violation"] = true;
      text = res.doc.dump(2) + "\n";
    }
    if (cfg.output.empty()) {
      std::cout << text;
    } else {
      std::ofstream out(cfg.output);
      if (!out) throw k3::InvalidInput("cannot write " + cfg.output);
      out << text;
    }
    return res.violation ? kInvariant : kOk;
  } catch (const k3::InvalidInput& e) {
    return emit_error("invalid_config", e.what(), kInvalid);
  } catch (const k3::GuardExceeded& e) {
    return emit_error("guard_exceeded", e.what(), kGuard);
  } catch (const k3::InvariantViolation& e) {
    return emit_error("invariant_violation", e.what(), kInvariant);
  } catch (const std::exception& e) {
    return emit_error("internal", e.what(), kInternal);
  }
}
