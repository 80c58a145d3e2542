#pragma once

// Reference enumeration: every r-dimensional subspace of F_q^n is visited as
// its reduced row echelon matrix (no pruning), then filtered.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <vector>

#include "oracle/naive_gf.hpp"

namespace oracle {

using Vec = std::vector<std::uint64_t>;
using Mat = std::vector<Vec>;  // rows

struct Tables {
  Field F;
  std::vector<std::vector<std::uint64_t>> add, mul;
  std::vector<std::uint64_t> inv, neg, frob;

  explicit Tables(Field f) : F(std::move(f)) {
    const auto q = F.q;
    add.assign(q, std::vector<std::uint64_t>(q));
    mul.assign(q, std::vector<std::uint64_t>(q));
    inv.assign(q, 0);
    neg.assign(q, 0);
    frob.assign(q, 0);
    for (std::uint64_t a = 0; a < q; ++a) {
      for (std::uint64_t b = 0; b < q; ++b) {
        add[a][b] = F.add(a, b);
        mul[a][b] = F.mul(a, b);
        if (mul[a][b] == 1) inv[a] = b;
      }
      neg[a] = F.neg(a);
      frob[a] = F.frob(a);
    }
  }
};

struct Space {
  const Tables* T;
  std::size_t n;
  std::vector<int> gram;  // n*n, entries mod p

  std::uint64_t form(const Vec& x, const Vec& y) const {
    std::uint64_t s = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const int g = gram[i * n + j];
        if (g == 0) continue;
        s = T->add[s][T->mul[static_cast<std::uint64_t>(g)][T->mul[x[i]][y[j]]]];
      }
    return s;
  }
};

inline Mat rref(const Tables& T, Mat rows) {
  std::size_t r = 0;
  const std::size_t n = rows.empty() ? 0 : rows[0].size();
  for (std::size_t c = 0; c < n && r < rows.size(); ++c) {
    std::size_t piv = r;
    while (piv < rows.size() && rows[piv][c] == 0) ++piv;
    if (piv == rows.size()) continue;
    std::swap(rows[r], rows[piv]);
    const auto iv = T.inv[rows[r][c]];
    for (auto& x : rows[r]) x = T.mul[iv][x];
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i == r || rows[i][c] == 0) continue;
      const auto f = T.neg[rows[i][c]];
      for (std::size_t k = 0; k < n; ++k) rows[i][k] = T.add[rows[i][k]][T.mul[f][rows[r][k]]];
    }
    ++r;
  }
  rows.resize(r);
  return rows;
}

inline std::size_t rank(const Tables& T, const Mat& rows) { return rref(T, rows).size(); }

/// Calls visit(M) for every r x n RREF matrix of rank r.
inline void for_each_subspace(const Tables& T, std::size_t n, std::size_t r, const std::function<void(const Mat&)>& visit) {
  std::vector<std::size_t> piv(r);
  std::function<void(std::size_t, std::size_t)> choose = [&](std::size_t i, std::size_t from) {
    if (i == r) {
      // free slots: row i, column c > piv[i], c not a pivot column
      std::vector<std::pair<std::size_t, std::size_t>> slots;
      for (std::size_t a = 0; a < r; ++a)
        for (std::size_t c = piv[a] + 1; c < n; ++c)
          if (std::find(piv.begin(), piv.end(), c) == piv.end()) slots.emplace_back(a, c);
      Mat M(r, Vec(n, 0));
      for (std::size_t a = 0; a < r; ++a) M[a][piv[a]] = 1;
      std::function<void(std::size_t)> fill = [&](std::size_t k) {
        if (k == slots.size()) {
          visit(M);
          return;
        }
        for (std::uint64_t v = 0; v < T.F.q; ++v) {
          M[slots[k].first][slots[k].second] = v;
          fill(k + 1);
        }
        M[slots[k].first][slots[k].second] = 0;
      };
      fill(0);
      return;
    }
    for (std::size_t c = from; c < n; ++c) {
      piv[i] = c;
      choose(i + 1, c + 1);
    }
  };
  choose(0, 0);
}

inline bool totally_isotropic(const Space& V, const Mat& K) {
  for (std::size_t i = 0; i < K.size(); ++i)
    for (std::size_t j = i; j < K.size(); ++j)
      if (V.form(K[i], K[j]) != 0) return false;
  return true;
}

inline Mat phi(const Tables& T, Mat K) {
  for (auto& row : K)
    for (auto& x : row) x = T.frob[x];
  return K;
}

inline bool characteristic(const Space& V, const Mat& K, std::size_t sigma0) {
  if (K.size() != sigma0 || !totally_isotropic(V, K)) return false;
  Mat both = K;
  for (auto& row : phi(*V.T, K)) both.push_back(row);
  return rank(*V.T, both) == sigma0 + 1;
}

inline std::vector<Mat> isotropic_subspaces(const Space& V, std::size_t r) {
  std::vector<Mat> out;
  for_each_subspace(*V.T, V.n, r, [&](const Mat& K) {
    if (totally_isotropic(V, K)) out.push_back(K);
  });
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<Mat> characteristic_subspaces(const Space& V, std::size_t sigma0) {
  std::vector<Mat> out;
  for (auto& K : isotropic_subspaces(V, sigma0))
    if (characteristic(V, K, sigma0)) out.push_back(K);
  return out;
}

/// H^{s-1} (+) diag(1, -delta), delta the smallest non-residue, built from scratch.
inline std::vector<int> n0_gram(int p, std::size_t s) {
  int delta = 0;
  for (int d = 2; d < p && delta == 0; ++d) {
    bool square = false;
    for (int x = 1; x < p; ++x)
      if (x * x % p == d) square = true;
    if (!square) delta = d;
  }
  const std::size_t n = 2 * s;
  std::vector<int> g(n * n, 0);
  for (std::size_t k = 0; k + 1 < s; ++k) g[2 * k * n + 2 * k + 1] = g[(2 * k + 1) * n + 2 * k] = 1;
  g[(n - 2) * n + n - 2] = 1;
  g[(n - 1) * n + n - 1] = p - delta;
  return g;
}

}  // namespace oracle
