#pragma once

// Even integer lattices given by Gram matrices: the hyperbolic planes U, U'
// and twists U(p), discriminants and Artin invariants, a bounded search for
// hyperbolic pairs (E, Z) and the discriminant-kernel space pL^v / pL.

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "k3/errors.hpp"
#include "k3/quadratic_spaces.hpp"

namespace k3 {

using Integer = mpz_class;

struct IntMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Integer> data;

  IntMatrix() = default;
  IntMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0) {}
  IntMatrix(std::size_t r, std::size_t c, std::initializer_list<long> vals) : IntMatrix(r, c) {
    if (vals.size() != r * c) throw InvalidInput("IntMatrix: wrong number of entries");
    std::size_t k = 0;
    for (long v : vals) data[k++] = v;
  }

  static IntMatrix identity(std::size_t n) {
    IntMatrix I(n, n);
    for (std::size_t i = 0; i < n; ++i) I(i, i) = 1;
    return I;
  }

  Integer& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  const Integer& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  bool operator==(const IntMatrix&) const = default;
};

inline IntMatrix operator*(const IntMatrix& a, const IntMatrix& b) {
  if (a.cols != b.rows) throw InvalidInput("matrix product: dimension mismatch");
  IntMatrix c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t k = 0; k < a.cols; ++k) {
      if (a(i, k) == 0) continue;
      for (std::size_t j = 0; j < b.cols; ++j) c(i, j) += a(i, k) * b(k, j);
    }
  return c;
}

/// Determinant by fraction-free (Bareiss) elimination.
inline Integer determinant(IntMatrix M) {
  if (M.rows != M.cols) throw InvalidInput("determinant of a non-square matrix");
  const std::size_t n = M.rows;
  if (n == 0) return 1;
  Integer prev = 1;
  int sign = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (M(k, k) == 0) {
      std::size_t sel = k + 1;
      while (sel < n && M(sel, k) == 0) ++sel;
      if (sel == n) return 0;
      for (std::size_t c = 0; c < n; ++c) std::swap(M(k, c), M(sel, c));
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        Integer t = M(i, j) * M(k, k) - M(i, k) * M(k, j);
        mpz_divexact(t.get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
        M(i, j) = t;
      }
    }
    prev = M(k, k);
  }
  return sign * M(n - 1, n - 1);
}

/// An even, nondegenerate, symmetric integer Gram matrix.
class GramLattice {
 public:
  explicit GramLattice(IntMatrix gram) : gram_(std::move(gram)) {
    if (gram_.rows == 0 || gram_.rows != gram_.cols) throw InvalidInput("Gram matrix must be square of positive size");
    const std::size_t n = gram_.rows;
    for (std::size_t i = 0; i < n; ++i) {
      if (mpz_even_p(gram_(i, i).get_mpz_t()) == 0) throw InvalidInput("lattice is not even (odd diagonal entry)");
      for (std::size_t j = 0; j < i; ++j)
        if (gram_(i, j) != gram_(j, i)) throw InvalidInput("Gram matrix is not symmetric");
    }
    det_ = determinant(gram_);
    if (det_ == 0) throw InvalidInput("Gram matrix is singular");
  }

  std::size_t rank() const noexcept { return gram_.rows; }
  const IntMatrix& gram() const noexcept { return gram_; }
  const Integer& det() const noexcept { return det_; }

  bool operator==(const GramLattice& o) const { return gram_ == o.gram_; }

 private:
  IntMatrix gram_;
  Integer det_;
};

/// Hyperbolic plane, Gram [[0,1],[1,0]].
inline GramLattice make_U() { return GramLattice(IntMatrix(2, 2, {0, 1, 1, 0})); }

/// The plane spanned by a zero section Z and a fiber E: Gram [[-2,1],[1,0]]
/// in the basis {Z, E}.
inline GramLattice make_U_prime() { return GramLattice(IntMatrix(2, 2, {-2, 1, 1, 0})); }

inline GramLattice twist(const GramLattice& L, const Integer& s) {
  if (s == 0) throw InvalidInput("twist scale must be nonzero");
  IntMatrix g = L.gram();
  for (auto& x : g.data) x *= s;
  return GramLattice(std::move(g));
}

inline GramLattice direct_sum(const GramLattice& a, const GramLattice& b) {
  const std::size_t n = a.rank(), m = b.rank();
  IntMatrix g(n + m, n + m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g(i, j) = a.gram()(i, j);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) g(n + i, n + j) = b.gram()(i, j);
  return GramLattice(std::move(g));
}

inline Integer discriminant(const GramLattice& L) { return L.det(); }

/// sigma0 with d = -p^{2 sigma0}, 1 <= sigma0 <= 10.
inline int artin_invariant_from_disc(const Integer& d, int p) {
  if (p < 3 || !detail::is_prime(p)) throw InvalidInput("p must be an odd prime");
  if (d >= 0) throw InvalidInput("discriminant must be negative");
  Integer m = -d;
  int e = 0;
  while (mpz_divisible_ui_p(m.get_mpz_t(), static_cast<unsigned long>(p)) != 0) {
    mpz_divexact_ui(m.get_mpz_t(), m.get_mpz_t(), static_cast<unsigned long>(p));
    ++e;
  }
  if (m != 1) throw InvalidInput("discriminant is not -p^k");
  if (e % 2 != 0) throw InvalidInput("discriminant is -p^k with odd k = " + std::to_string(e));
  const int s = e / 2;
  if (s < 1 || s > 10) throw InvalidInput("Artin invariant " + std::to_string(s) + " outside 1..10");
  return s;
}

/// U A V = D with U, V unimodular and D = diag(d_1, ..., d_n), d_i >= 0 and
/// d_i | d_{i+1}.
struct SmithForm {
  IntMatrix U;
  IntMatrix D;
  IntMatrix V;
  std::vector<Integer> divisors;
};

inline SmithForm smith_normal_form(const IntMatrix& A) {
  const std::size_t m = A.rows, n = A.cols;
  SmithForm s{IntMatrix::identity(m), A, IntMatrix::identity(n), {}};
  IntMatrix& D = s.D;
  auto row_swap = [&](std::size_t a, std::size_t b) {
    for (std::size_t c = 0; c < n; ++c) std::swap(D(a, c), D(b, c));
    for (std::size_t c = 0; c < m; ++c) std::swap(s.U(a, c), s.U(b, c));
  };
  auto col_swap = [&](std::size_t a, std::size_t b) {
    for (std::size_t r = 0; r < m; ++r) std::swap(D(r, a), D(r, b));
    for (std::size_t r = 0; r < n; ++r) std::swap(s.V(r, a), s.V(r, b));
  };
  // row a -= f * row b
  auto row_axpy = [&](std::size_t a, std::size_t b, const Integer& f) {
    for (std::size_t c = 0; c < n; ++c) D(a, c) -= f * D(b, c);
    for (std::size_t c = 0; c < m; ++c) s.U(a, c) -= f * s.U(b, c);
  };
  auto col_axpy = [&](std::size_t a, std::size_t b, const Integer& f) {
    for (std::size_t r = 0; r < m; ++r) D(r, a) -= f * D(r, b);
    for (std::size_t r = 0; r < n; ++r) s.V(r, a) -= f * s.V(r, b);
  };

  const std::size_t k_max = std::min(m, n);
  for (std::size_t t = 0; t < k_max; ++t) {
    while (true) {
      // smallest nonzero entry of the trailing block becomes the pivot
      std::optional<std::pair<std::size_t, std::size_t>> best;
      for (std::size_t i = t; i < m; ++i)
        for (std::size_t j = t; j < n; ++j)
          if (D(i, j) != 0 && (!best || abs(D(i, j)) < abs(D(best->first, best->second)))) best = std::pair{i, j};
      if (!best) break;
      if (best->first != t) row_swap(t, best->first);
      if (best->second != t) col_swap(t, best->second);
      bool clean = true;
      for (std::size_t i = t + 1; i < m; ++i) {
        if (D(i, t) == 0) continue;
        Integer q;
        mpz_fdiv_q(q.get_mpz_t(), D(i, t).get_mpz_t(), D(t, t).get_mpz_t());
        row_axpy(i, t, q);
        if (D(i, t) != 0) clean = false;
      }
      for (std::size_t j = t + 1; j < n; ++j) {
        if (D(t, j) == 0) continue;
        Integer q;
        mpz_fdiv_q(q.get_mpz_t(), D(t, j).get_mpz_t(), D(t, t).get_mpz_t());
        col_axpy(j, t, q);
        if (D(t, j) != 0) clean = false;
      }
      if (!clean) continue;
      // divisibility of the remaining block by the pivot
      std::optional<std::size_t> bad_row;
      for (std::size_t i = t + 1; i < m && !bad_row; ++i)
        for (std::size_t j = t + 1; j < n; ++j)
          if (mpz_divisible_p(D(i, j).get_mpz_t(), D(t, t).get_mpz_t()) == 0) {
            bad_row = i;
            break;
          }
      if (!bad_row) break;
      row_axpy(t, *bad_row, Integer(-1));
    }
    if (D(t, t) < 0) {
      for (std::size_t c = 0; c < n; ++c) D(t, c) = -D(t, c);
      for (std::size_t c = 0; c < m; ++c) s.U(t, c) = -s.U(t, c);
    }
    s.divisors.push_back(D(t, t));
  }
  return s;
}

/// The F_p-space pL^v / pL with form <x, y>_L / p mod p.  Requires L to be
/// p-elementary at p (no elementary divisor divisible by p^2).
inline BilinearSpace disc_kernel_space(const GramLattice& L, int p) {
  if (p < 3 || !detail::is_prime(p)) throw InvalidInput("p must be an odd prime");
  const SmithForm s = smith_normal_form(L.gram());
  const Integer pp = p, p2 = pp * pp;
  std::vector<std::size_t> cols;
  for (std::size_t i = 0; i < s.divisors.size(); ++i) {
    if (mpz_divisible_p(s.divisors[i].get_mpz_t(), p2.get_mpz_t()) != 0)
      throw InvalidInput("lattice is not p-elementary: elementary divisor divisible by p^2");
    if (mpz_divisible_p(s.divisors[i].get_mpz_t(), pp.get_mpz_t()) != 0) cols.push_back(i);
  }
  // generators of pL^v mod pL: columns v_i of V with p | d_i
  const std::size_t n = L.rank(), k = cols.size();
  std::vector<int> g(k * k);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b) {
      Integer acc = 0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) acc += s.V(i, cols[a]) * L.gram()(i, j) * s.V(j, cols[b]);
      if (mpz_divisible_p(acc.get_mpz_t(), pp.get_mpz_t()) == 0)
        throw InvariantViolation("form not divisible by p on pL^v");
      acc /= pp;
      Integer r;
      mpz_fdiv_r(r.get_mpz_t(), acc.get_mpz_t(), pp.get_mpz_t());
      g[a * k + b] = static_cast<int>(r.get_si());
    }
  return BilinearSpace(p, k, std::move(g));
}

struct HyperbolicPair {
  std::vector<long long> E;  // E.E = 0
  std::vector<long long> Z;  // Z.Z = -2, E.Z = 1
};

/// Sylvester's criterion on the leading principal minors.
inline bool is_definite(const GramLattice& L) {
  bool pos = true, neg = true;
  for (std::size_t k = 1; k <= L.rank(); ++k) {
    IntMatrix M(k, k);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) M(i, j) = L.gram()(i, j);
    const int s = sgn(determinant(M));
    pos = pos && s > 0;
    neg = neg && s == (k % 2 == 1 ? -1 : 1);
  }
  return pos || neg;
}

inline constexpr int kDefaultEmbeddingBound = 3;
inline constexpr std::uint64_t kEmbeddingSearchLimit = 5'000'000;

/// Bounded search for E, Z with E^2 = 0, Z^2 = -2, E.Z = 1 and all coordinates
/// in [-bound, bound].  Candidates are scanned by increasing L1 norm, ties
/// broken by decreasing lexicographic order.  nullopt means "not found within
/// the bound", not "no embedding exists".
inline std::optional<HyperbolicPair> find_hyperbolic_pair(const GramLattice& L, int bound = kDefaultEmbeddingBound) {
  if (bound < 1) throw InvalidInput("search bound must be >= 1");
  if (is_definite(L)) return std::nullopt;  // no isotropic vectors at all
  const std::size_t n = L.rank();
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < n; ++i) {
    total *= static_cast<std::uint64_t>(2 * bound + 1);
    if (total > kEmbeddingSearchLimit) throw GuardExceeded("hyperbolic pair search space too large");
  }
  std::vector<long long> g(n * n);
  for (std::size_t k = 0; k < n * n; ++k) {
    if (!L.gram().data[k].fits_slong_p()) throw GuardExceeded("Gram entries too large for the pair search");
    g[k] = L.gram().data[k].get_si();
  }
  std::vector<std::vector<long long>> cand;
  cand.reserve(total);
  std::vector<long long> v(n, -bound);
  for (std::uint64_t c = 0; c < total; ++c) {
    cand.push_back(v);
    for (std::size_t i = 0; i < n; ++i) {
      if (++v[i] <= bound) break;
      v[i] = -bound;
    }
  }
  auto l1 = [](const std::vector<long long>& x) {
    long long s = 0;
    for (auto c : x) s += c < 0 ? -c : c;
    return s;
  };
  std::stable_sort(cand.begin(), cand.end(), [&](const auto& a, const auto& b) {
    const long long la = l1(a), lb = l1(b);
    return la != lb ? la < lb : a > b;
  });
  auto apply = [&](const std::vector<long long>& x) {
    std::vector<long long> w(n, 0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) w[i] += g[i * n + j] * x[j];
    return w;
  };
  auto dot = [&](const std::vector<long long>& a, const std::vector<long long>& b) {
    long long s = 0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
  };
  for (const auto& E : cand) {
    if (l1(E) == 0) continue;
    const auto wE = apply(E);
    if (dot(wE, E) != 0) continue;
    long long gc = 0;
    for (auto c : wE) gc = std::gcd(gc, c < 0 ? -c : c);
    if (gc != 1) continue;
    for (const auto& Z : cand) {
      if (dot(wE, Z) != 1) continue;
      if (dot(apply(Z), Z) == -2) return HyperbolicPair{E, Z};
    }
  }
  return std::nullopt;
}

}  // namespace k3
