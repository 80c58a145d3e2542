#pragma once

// JSON encodings used by the command-line tool.
//
//   field       {"p", "m", "modulus_coeffs", "name"}
//   element     coefficient array, constant term first
//   subspace    {"field", "dim", "basis_rows"}  (rows of elements)
//   lattice     {"rank", "rows"}
//   space       {"p", "dim", "gram"}
//   law         {"p", "prec", "name", "coefficients": {"i,j": c}}

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "k3/crystals.hpp"
#include "k3/formal_groups.hpp"
#include "k3/lattices.hpp"
#include "k3/moduli.hpp"

namespace k3::io {

using json = nlohmann::json;

inline json to_json(const Integer& v) {
  if (v.fits_slong_p()) return v.get_si();
  return v.get_str();
}

inline json field_json(const GaloisField& F) {
  return {{"p", F.characteristic()}, {"m", F.degree()}, {"modulus_coeffs", F.modulus()}, {"name", F.name()}};
}

inline json element_json(const GaloisField& F, code_t c) { return F.digits(c); }

inline json element_json(const FieldElement& e) { return element_json(*e.field(), e.code()); }

inline json vector_json(const GaloisField& F, std::span<const code_t> v) {
  json out = json::array();
  for (auto c : v) out.push_back(element_json(F, c));
  return out;
}

inline json subspace_json(const Subspace& K) {
  json rows = json::array();
  for (std::size_t i = 0; i < K.dim(); ++i) rows.push_back(vector_json(*K.field(), K.basis().row(i)));
  return {{"field", field_json(*K.field())}, {"dim", K.dim()}, {"basis_rows", rows}};
}

inline json characteristic_json(const CharacteristicSubspace& K) {
  json j = subspace_json(K.subspace());
  j["characteristic"] = true;
  j["strict"] = K.strict();
  return j;
}

inline json space_json(const BilinearSpace& V) {
  json rows = json::array();
  for (std::size_t i = 0; i < V.dim(); ++i) {
    json r = json::array();
    for (std::size_t j = 0; j < V.dim(); ++j) r.push_back(V.gram(i, j));
    rows.push_back(r);
  }
  return {{"p", V.prime()}, {"dim", V.dim()}, {"gram", rows}};
}

inline json lattice_json(const GramLattice& L) {
  json rows = json::array();
  for (std::size_t i = 0; i < L.rank(); ++i) {
    json r = json::array();
    for (std::size_t j = 0; j < L.rank(); ++j) r.push_back(to_json(L.gram()(i, j)));
    rows.push_back(r);
  }
  return {{"rank", L.rank()}, {"rows", rows}};
}

inline json law_json(const FormalGroupLaw& F) {
  json coeffs = json::object();
  for (int d = 0; d <= F.precision(); ++d)
    for (int i = d; i >= 0; --i)
      if (auto c = F.coeff(i, d - i); c != 0) coeffs[std::to_string(i) + "," + std::to_string(d - i)] = c;
  return {{"p", F.prime()}, {"prec", F.precision()}, {"name", F.name()}, {"coefficients", coeffs}};
}

inline json series_json(const Series& s) {
  json terms = json::object();
  for (std::size_t k = 0; k < s.c.size(); ++k)
    if (s.c[k] != 0) terms[std::to_string(k)] = s.c[k];
  return {{"p", s.p}, {"prec", s.prec}, {"terms", terms}, {"order", s.order()}};
}

inline json height_json(const HeightVerdict& v) {
  json j{{"precision", v.precision}};
  if (v.infinite)
    j["height"] = "infinite-to-precision";
  else {
    j["height"] = v.height;
    j["lowest_degree"] = v.lowest_degree;
  }
  return j;
}

inline json torsion_json(const TorsionReport& r) {
  json val{{"applicable", r.valuation_applicable}};
  if (r.valuation_applicable) {
    val["checked"] = r.valuation_checked;
    val["holds"] = r.valuation_holds;
  }
  return {{"ring", {{"field", r.field}, {"m", r.truncation}}},
          {"points", r.points},
          {"n", r.n},
          {"coprime_to_p", r.coprime_to_p},
          {"bijective", r.injective},
          {"kernel_size", r.kernel_size},
          {"kernel_is_everything", r.kernel_size == r.points},
          {"height", height_json(r.height)},
          {"valuation_law", val}};
}

inline IntMatrix matrix_from_rows(const std::vector<std::vector<Integer>>& rows) {
  const std::size_t n = rows.size();
  IntMatrix M(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) throw InvalidInput("Gram matrix rows must all have length " + std::to_string(n));
    for (std::size_t j = 0; j < n; ++j) M(i, j) = rows[i][j];
  }
  return M;
}

inline Integer integer_from_json(const json& v) {
  if (v.is_number_integer()) return Integer(std::to_string(v.get<long long>()));
  if (v.is_string()) {
    try {
      return Integer(v.get<std::string>());
    } catch (const std::invalid_argument&) {
      throw InvalidInput("not an integer: " + v.get<std::string>());
    }
  }
  throw InvalidInput("expected an integer");
}

/// {"rank": n, "rows": [[...], ...]}
inline GramLattice lattice_from_json(const json& j) {
  if (!j.contains("rows") || !j["rows"].is_array()) throw InvalidInput("lattice JSON needs a \"rows\" array");
  std::vector<std::vector<Integer>> rows;
  for (const auto& r : j["rows"]) {
    if (!r.is_array()) throw InvalidInput("lattice rows must be arrays");
    std::vector<Integer> row;
    for (const auto& v : r) row.push_back(integer_from_json(v));
    rows.push_back(std::move(row));
  }
  if (j.contains("rank") && (!j["rank"].is_number_unsigned() || j["rank"].get<std::size_t>() != rows.size()))
    throw InvalidInput("\"rank\" disagrees with the number of rows");
  return GramLattice(matrix_from_rows(rows));
}

/// Comma-separated rows of integers; blank lines and lines starting with '#' are skipped.
inline GramLattice lattice_from_csv(const std::string& text) {
  std::vector<std::vector<Integer>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[line.find_first_not_of(" \t\r")] == '#') continue;
    std::vector<Integer> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      const auto b = cell.find_first_not_of(" \t\r"), e = cell.find_last_not_of(" \t\r");
      if (b == std::string::npos) throw InvalidInput("empty CSV cell");
      try {
        row.emplace_back(cell.substr(b, e - b + 1));
      } catch (const std::invalid_argument&) {
        throw InvalidInput("non-integer CSV cell: " + cell);
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidInput("empty CSV Gram matrix");
  return GramLattice(matrix_from_rows(rows));
}

inline GramLattice lattice_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      return lattice_from_json(json::parse(text));
    } catch (const json::exception& e) {
      throw InvalidInput(std::string("malformed lattice JSON: ") + e.what());
    }
  }
  return lattice_from_csv(text);
}

inline code_t element_from_json(const GaloisField& F, const json& v) {
  if (v.is_number_integer()) return F.from_int(v.get<long long>());
  if (!v.is_array()) throw InvalidInput("field element must be an integer or a coefficient array");
  std::vector<int> d;
  for (const auto& c : v) {
    if (!c.is_number_integer()) throw InvalidInput("element coefficients must be integers");
    d.push_back(c.get<int>());
  }
  return F.from_digits(d);
}

/// Rows of field elements -> subspace of V (x) F.
inline Subspace subspace_from_json(const BilinearSpace& V, const Field& F, const json& rows) {
  if (!rows.is_array()) throw InvalidInput("basis must be an array of rows");
  FieldMatrix M(0, V.dim());
  for (const auto& r : rows) {
    if (!r.is_array() || r.size() != V.dim()) throw InvalidInput("basis row has the wrong length");
    std::vector<code_t> v;
    for (const auto& e : r) v.push_back(element_from_json(*F, e));
    M.append_row(v);
  }
  return {V, F, std::move(M)};
}

}  // namespace k3::io
