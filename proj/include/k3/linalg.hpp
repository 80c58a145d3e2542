#pragma once

// Dense matrices over a GaloisField, stored as element codes.

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "k3/fields.hpp"

namespace k3 {

struct FieldMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<code_t> data;

  FieldMatrix() = default;
  FieldMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0) {}

  code_t& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  code_t operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<code_t> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const code_t> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  void append_row(std::span<const code_t> v) {
    if (rows == 0 && cols == 0) cols = v.size();
    if (v.size() != cols) throw InvalidInput("row length mismatch");
    data.insert(data.end(), v.begin(), v.end());
    ++rows;
  }

  bool operator==(const FieldMatrix&) const = default;
};

/// Brings M to reduced row echelon form in place, drops zero rows and
/// returns the pivot columns.
inline std::vector<std::size_t> rref(const GaloisField& F, FieldMatrix& M) {
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t c = 0; c < M.cols && r < M.rows; ++c) {
    std::size_t sel = r;
    while (sel < M.rows && M(sel, c) == 0) ++sel;
    if (sel == M.rows) continue;
    if (sel != r)
      for (std::size_t k = 0; k < M.cols; ++k) std::swap(M(sel, k), M(r, k));
    const code_t inv = F.inv(M(r, c));
    for (std::size_t k = c; k < M.cols; ++k) M(r, k) = F.mul(M(r, k), inv);
    for (std::size_t i = 0; i < M.rows; ++i) {
      if (i == r || M(i, c) == 0) continue;
      const code_t f = F.neg(M(i, c));
      for (std::size_t k = c; k < M.cols; ++k) M(i, k) = F.add(M(i, k), F.mul(f, M(r, k)));
    }
    pivots.push_back(c);
    ++r;
  }
  M.rows = r;
  M.data.resize(r * M.cols);
  return pivots;
}

inline std::size_t rank(const GaloisField& F, FieldMatrix M) { return rref(F, M).size(); }

/// Basis (in RREF) of the right kernel {x : M x = 0}.
inline FieldMatrix kernel(const GaloisField& F, FieldMatrix M) {
  const std::size_t n = M.cols;
  const auto pivots = rref(F, M);
  std::vector<bool> is_pivot(n, false);
  for (auto c : pivots) is_pivot[c] = true;
  FieldMatrix K(0, n);
  for (std::size_t f = 0; f < n; ++f) {
    if (is_pivot[f]) continue;
    std::vector<code_t> x(n, 0);
    x[f] = 1;
    for (std::size_t i = 0; i < pivots.size(); ++i) x[pivots[i]] = F.neg(M(i, f));
    K.append_row(x);
  }
  K.cols = n;
  rref(F, K);
  return K;
}

/// Affine solution set {x0 + span(directions)} of A x = b, if consistent.
struct AffineSolution {
  bool consistent = false;
  std::vector<code_t> particular;
  FieldMatrix directions;
};

inline AffineSolution solve_affine(const GaloisField& F, const FieldMatrix& A, std::span<const code_t> b) {
  const std::size_t n = A.cols;
  FieldMatrix aug(A.rows, n + 1);
  for (std::size_t i = 0; i < A.rows; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug(i, j) = A(i, j);
    aug(i, n) = b[i];
  }
  const auto pivots = rref(F, aug);
  AffineSolution out;
  if (!pivots.empty() && pivots.back() == n) return out;
  out.consistent = true;
  out.particular.assign(n, 0);
  for (std::size_t i = 0; i < pivots.size(); ++i) out.particular[pivots[i]] = aug(i, n);
  std::vector<bool> is_pivot(n, false);
  for (auto c : pivots) is_pivot[c] = true;
  out.directions = FieldMatrix(0, n);
  for (std::size_t f = 0; f < n; ++f) {
    if (is_pivot[f]) continue;
    std::vector<code_t> x(n, 0);
    x[f] = 1;
    for (std::size_t i = 0; i < pivots.size(); ++i) x[pivots[i]] = F.neg(aug(i, f));
    out.directions.append_row(x);
  }
  out.directions.cols = n;
  return out;
}

}  // namespace k3
