#pragma once

// Nondegenerate symmetric bilinear spaces over F_p, their subspaces over
// extension fields in canonical (RREF) form, and exhaustive enumeration of
// totally isotropic subspaces.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "k3/errors.hpp"
#include "k3/fields.hpp"
#include "k3/linalg.hpp"

namespace k3 {

inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;

/// Budget for brute-force searches: the number of candidate basis vectors a
/// search may examine before giving up with GuardExceeded.
struct EnumerationLimits {
  std::uint64_t cap = kDefaultEnumerationCap;
};

/// A finite-dimensional F_p-space with a symmetric form of nonzero
/// determinant.  Cheap to copy; copies share the Gram data.
class BilinearSpace {
 public:
  BilinearSpace(int p, std::size_t dim, std::vector<int> gram) {
    auto d = std::make_shared<Data>();
    d->base = make_field(p, 1);
    d->dim = dim;
    if (gram.size() != dim * dim) throw InvalidInput("Gram matrix has the wrong size");
    for (auto& g : gram) g = detail::mod_p(g, p);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j)
        if (gram[i * dim + j] != gram[j * dim + i]) throw InvalidInput("Gram matrix is not symmetric");
    d->gram = std::move(gram);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j)
        if (int g = d->gram[i * dim + j]; g != 0) d->entries.push_back({i, j, static_cast<code_t>(g)});
    FieldMatrix M(dim, dim);
    for (std::size_t k = 0; k < dim * dim; ++k) M.data[k] = static_cast<code_t>(d->gram[k]);
    if (k3::rank(*d->base, M) != dim) throw InvalidInput("bilinear form is degenerate");
    d_ = std::move(d);
  }

  int prime() const noexcept { return d_->base->characteristic(); }
  const Field& base() const noexcept { return d_->base; }
  std::size_t dim() const noexcept { return d_->dim; }
  int gram(std::size_t i, std::size_t j) const { return d_->gram[i * d_->dim + j]; }
  const std::vector<int>& gram_entries() const noexcept { return d_->gram; }

  /// <x, y> for coordinate vectors over an extension F of the base field.
  code_t form(const GaloisField& F, std::span<const code_t> x, std::span<const code_t> y) const {
    code_t acc = 0;
    for (const auto& e : d_->entries) {
      if (x[e.i] == 0 || y[e.j] == 0) continue;
      acc = F.add(acc, F.mul(e.g, F.mul(x[e.i], y[e.j])));
    }
    return acc;
  }

  /// The covector y -> <x, y>.
  std::vector<code_t> pair_with(const GaloisField& F, std::span<const code_t> x) const {
    std::vector<code_t> w(d_->dim, 0);
    for (const auto& e : d_->entries)
      if (x[e.i] != 0) w[e.j] = F.add(w[e.j], F.mul(e.g, x[e.i]));
    return w;
  }

  bool operator==(const BilinearSpace& o) const {
    return d_ == o.d_ || (prime() == o.prime() && d_->dim == o.d_->dim && d_->gram == o.d_->gram);
  }

 private:
  struct Entry {
    std::size_t i, j;
    code_t g;
  };
  struct Data {
    Field base;
    std::size_t dim = 0;
    std::vector<int> gram;
    std::vector<Entry> entries;
  };
  std::shared_ptr<const Data> d_;
};

inline void require_extends(const BilinearSpace& V, const Field& F) {
  if (!F || F->characteristic() != V.prime())
    throw FieldMismatch("field " + (F ? F->name() : std::string("<null>")) + " does not extend F_" +
                        std::to_string(V.prime()));
}

/// A subspace of V (x) F, held as its unique RREF basis.
class Subspace {
 public:
  Subspace(BilinearSpace space, Field field, FieldMatrix rows)
      : space_(std::move(space)), field_(std::move(field)), basis_(std::move(rows)) {
    require_extends(space_, field_);
    if (basis_.rows == 0) basis_.cols = space_.dim();
    if (basis_.cols != space_.dim()) throw InvalidInput("basis rows have the wrong length");
    for (auto c : basis_.data)
      if (c >= field_->order()) throw InvalidInput("basis entry out of range for " + field_->name());
    pivots_ = rref(*field_, basis_);
  }

  struct Canonical {};
  // rows already in RREF with the given pivots
  Subspace(Canonical, BilinearSpace space, Field field, FieldMatrix rows, std::vector<std::size_t> pivots)
      : space_(std::move(space)), field_(std::move(field)), basis_(std::move(rows)), pivots_(std::move(pivots)) {}

  static Subspace zero(const BilinearSpace& V, const Field& F) { return {V, F, FieldMatrix(0, V.dim())}; }
  static Subspace whole(const BilinearSpace& V, const Field& F) {
    FieldMatrix I(V.dim(), V.dim());
    for (std::size_t i = 0; i < V.dim(); ++i) I(i, i) = 1;
    return {V, F, std::move(I)};
  }

  const BilinearSpace& space() const noexcept { return space_; }
  const Field& field() const noexcept { return field_; }
  const FieldMatrix& basis() const noexcept { return basis_; }
  const std::vector<std::size_t>& pivots() const noexcept { return pivots_; }
  std::size_t dim() const noexcept { return basis_.rows; }
  std::size_t ambient_dim() const noexcept { return space_.dim(); }

  bool contains(std::span<const code_t> v) const {
    FieldMatrix M = basis_;
    M.append_row(v);
    return k3::rank(*field_, std::move(M)) == dim();
  }

  bool contains(const Subspace& o) const {
    require_compatible(o);
    FieldMatrix M = basis_;
    for (std::size_t i = 0; i < o.dim(); ++i) M.append_row(o.basis_.row(i));
    return k3::rank(*field_, std::move(M)) == dim();
  }

  bool is_totally_isotropic() const {
    for (std::size_t i = 0; i < dim(); ++i)
      for (std::size_t j = i; j < dim(); ++j)
        if (space_.form(*field_, basis_.row(i), basis_.row(j)) != 0) return false;
    return true;
  }

  void require_compatible(const Subspace& o) const {
    if (!(space_ == o.space_)) throw FieldMismatch("subspaces live in different ambient spaces");
    require_same_field(field_, o.field_);
  }

  bool operator==(const Subspace& o) const {
    return basis_ == o.basis_ && space_ == o.space_ && field_->same_as(*o.field_);
  }

  /// Deterministic order: pivot pattern, then entries (row-major, by code).
  bool operator<(const Subspace& o) const {
    if (pivots_ != o.pivots_) return pivots_ < o.pivots_;
    return basis_.data < o.basis_.data;
  }

 private:
  BilinearSpace space_;
  Field field_;
  FieldMatrix basis_;
  std::vector<std::size_t> pivots_;
};

inline Subspace span_of(const BilinearSpace& V, const Field& F, FieldMatrix rows) { return {V, F, std::move(rows)}; }

inline Subspace sum(const Subspace& a, const Subspace& b) {
  a.require_compatible(b);
  FieldMatrix M = a.basis();
  for (std::size_t i = 0; i < b.dim(); ++i) M.append_row(b.basis().row(i));
  return {a.space(), a.field(), std::move(M)};
}

inline Subspace intersect(const Subspace& a, const Subspace& b) {
  a.require_compatible(b);
  const GaloisField& F = *a.field();
  const std::size_t n = a.ambient_dim(), ra = a.dim(), rb = b.dim();
  // (s, t) with s A - t B = 0; the intersection is { s A }
  FieldMatrix T(n, ra + rb);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t i = 0; i < ra; ++i) T(c, i) = a.basis()(i, c);
    for (std::size_t j = 0; j < rb; ++j) T(c, ra + j) = F.neg(b.basis()(j, c));
  }
  const FieldMatrix K = kernel(F, std::move(T));
  FieldMatrix out(0, n);
  std::vector<code_t> v(n);
  for (std::size_t k = 0; k < K.rows; ++k) {
    std::fill(v.begin(), v.end(), 0);
    for (std::size_t i = 0; i < ra; ++i) {
      const code_t s = K(k, i);
      if (s == 0) continue;
      for (std::size_t c = 0; c < n; ++c) v[c] = F.add(v[c], F.mul(s, a.basis()(i, c)));
    }
    out.append_row(v);
  }
  return {a.space(), a.field(), std::move(out)};
}

inline Subspace orthogonal_complement(const Subspace& a) {
  const GaloisField& F = *a.field();
  const std::size_t n = a.ambient_dim();
  FieldMatrix W(0, n);
  for (std::size_t i = 0; i < a.dim(); ++i) W.append_row(a.space().pair_with(F, a.basis().row(i)));
  return {a.space(), a.field(), kernel(F, std::move(W))};
}

/// Lifts K to V (x) bigger through the canonical field embedding.
inline Subspace extend_field(const Subspace& K, const Field& bigger) {
  require_extends(K.space(), bigger);
  if (K.field()->same_as(*bigger)) return K;
  const auto emb = embedding(K.field(), bigger);
  FieldMatrix M = K.basis();
  for (auto& c : M.data) c = (*emb)(c);
  return {K.space(), bigger, std::move(M)};
}

inline int smallest_nonresidue(int p) {
  for (int d = 2; d < p; ++d) {
    long long r = 1, b = d;
    for (int e = (p - 1) / 2; e > 0; e >>= 1) {
      if (e & 1) r = r * b % p;
      b = b * b % p;
    }
    if (r == p - 1) return d;
  }
  throw InvalidInput("no quadratic non-residue modulo " + std::to_string(p));
}

/// H^{sigma0-1} (+) A with H = [[0,1],[1,0]] and A = diag(1, -delta), delta
/// the smallest non-residue mod p: a 2*sigma0-dimensional perfect F_p-space of
/// Witt index sigma0-1 (non-neutral).
inline BilinearSpace standard_N0(int p, int sigma0) {
  if (sigma0 < 1 || sigma0 > 10) throw InvalidInput("Artin invariant must lie in 1..10");
  if (p < 3 || !detail::is_prime(p)) throw InvalidInput("p must be an odd prime");
  const std::size_t n = 2 * static_cast<std::size_t>(sigma0);
  std::vector<int> g(n * n, 0);
  for (std::size_t k = 0; k + 1 < static_cast<std::size_t>(sigma0); ++k) {
    g[(2 * k) * n + 2 * k + 1] = 1;
    g[(2 * k + 1) * n + 2 * k] = 1;
  }
  g[(n - 2) * n + n - 2] = 1;
  g[(n - 1) * n + n - 1] = detail::mod_p(-smallest_nonresidue(p), p);
  return {p, n, std::move(g)};
}

namespace detail {

// Depth-first search over RREF matrices with a fixed pivot pattern.  Row i is
// 1 at its pivot, 0 at the other pivots and left of its pivot; its free
// entries must satisfy the linear conditions <row_j, row_i> = 0 (j < i) and
// the quadratic condition <row_i, row_i> = 0.
class IsotropicSearch {
 public:
  IsotropicSearch(const BilinearSpace& V, const Field& F, std::size_t r, const EnumerationLimits& lim)
      : V_(V), F_(F), G_(*F), n_(V.dim()), r_(r), cap_(lim.cap) {}

  // visit(matrix, pivots) -> false to stop
  template <class Visit>
  bool run_pattern(const std::vector<std::size_t>& pivots, Visit&& visit) {
    pivots_ = pivots;
    rows_.assign(r_, std::vector<code_t>(n_, 0));
    covectors_.assign(r_, {});
    return descend(0, visit);
  }

  std::uint64_t examined() const noexcept { return examined_; }

 private:
  template <class Visit>
  bool descend(std::size_t i, Visit& visit) {
    if (i == r_) {
      FieldMatrix M(r_, n_);
      for (std::size_t a = 0; a < r_; ++a) std::copy(rows_[a].begin(), rows_[a].end(), M.row(a).begin());
      return visit(std::move(M));
    }
    const std::size_t piv = pivots_[i];
    std::vector<std::size_t> free_cols;
    for (std::size_t c = piv + 1; c < n_; ++c)
      if (std::find(pivots_.begin(), pivots_.end(), c) == pivots_.end()) free_cols.push_back(c);
    const std::size_t k = free_cols.size();
    // orthogonality to earlier rows
    FieldMatrix A(i, k);
    std::vector<code_t> b(i, 0);
    for (std::size_t j = 0; j < i; ++j) {
      for (std::size_t t = 0; t < k; ++t) A(j, t) = covectors_[j][free_cols[t]];
      b[j] = G_.neg(covectors_[j][piv]);
    }
    const AffineSolution sol = solve_affine(G_, A, b);
    if (!sol.consistent) return true;
    const std::size_t dof = sol.directions.rows;
    std::vector<code_t> params(dof, 0);
    std::vector<code_t>& row = rows_[i];
    const std::uint64_t q = G_.order();
    while (true) {
      if (++examined_ > cap_)
        throw GuardExceeded("isotropic subspace search exceeded the enumeration cap of " + std::to_string(cap_) +
                            " candidates");
      std::fill(row.begin(), row.end(), 0);
      row[piv] = 1;
      for (std::size_t t = 0; t < k; ++t) {
        code_t v = sol.particular[t];
        for (std::size_t d = 0; d < dof; ++d)
          if (params[d] != 0) v = G_.add(v, G_.mul(params[d], sol.directions(d, t)));
        row[free_cols[t]] = v;
      }
      if (V_.form(G_, row, row) == 0) {
        covectors_[i] = V_.pair_with(G_, row);
        if (!descend(i + 1, visit)) return false;
      }
      // odometer over F^dof
      std::size_t d = 0;
      while (d < dof && ++params[d] == q) params[d++] = 0;
      if (d == dof) break;
    }
    return true;
  }

  const BilinearSpace& V_;
  const Field& F_;
  const GaloisField& G_;
  std::size_t n_, r_;
  std::uint64_t cap_;
  std::uint64_t examined_ = 0;
  std::vector<std::size_t> pivots_;
  std::vector<std::vector<code_t>> rows_;
  std::vector<std::vector<code_t>> covectors_;
};

inline bool next_combination(std::vector<std::size_t>& c, std::size_t n) {
  const std::size_t r = c.size();
  for (std::size_t i = r; i-- > 0;) {
    if (c[i] < n - r + i) {
      ++c[i];
      for (std::size_t j = i + 1; j < r; ++j) c[j] = c[j - 1] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace detail

/// Calls visit(const Subspace&) for every r-dimensional totally isotropic
/// subspace of V (x) F, in deterministic order (pivot pattern, then entries).
/// Returning false from visit stops the walk.  With ordered = false the
/// entries within a pivot pattern are visited in search order.
template <class Visit>
void for_each_totally_isotropic(const BilinearSpace& V, const Field& F, std::size_t r, Visit&& visit,
                                const EnumerationLimits& lim = {}, bool ordered = true) {
  require_extends(V, F);
  const std::size_t n = V.dim();
  if (r > n) throw InvalidInput("subspace dimension exceeds ambient dimension");
  if (r == 0) {
    visit(Subspace::zero(V, F));
    return;
  }
  detail::IsotropicSearch search(V, F, r, lim);
  std::vector<std::size_t> pattern(r);
  for (std::size_t i = 0; i < r; ++i) pattern[i] = i;
  do {
    if (ordered) {
      std::vector<FieldMatrix> found;
      search.run_pattern(pattern, [&](FieldMatrix M) {
        found.push_back(std::move(M));
        return true;
      });
      std::sort(found.begin(), found.end(), [](const FieldMatrix& a, const FieldMatrix& b) { return a.data < b.data; });
      for (auto& M : found)
        if (!visit(Subspace(Subspace::Canonical{}, V, F, std::move(M), pattern))) return;
    } else {
      const bool go_on = search.run_pattern(
          pattern, [&](FieldMatrix M) { return visit(Subspace(Subspace::Canonical{}, V, F, std::move(M), pattern)); });
      if (!go_on) return;
    }
  } while (detail::next_combination(pattern, n));
}

inline std::vector<Subspace> enumerate_totally_isotropic(const BilinearSpace& V, const Field& F, std::size_t r,
                                                         const EnumerationLimits& lim = {}) {
  std::vector<Subspace> out;
  for_each_totally_isotropic(
      V, F, r,
      [&](const Subspace& K) {
        out.push_back(K);
        return true;
      },
      lim);
  return out;
}

inline bool has_totally_isotropic(const BilinearSpace& V, const Field& F, std::size_t r,
                                  const EnumerationLimits& lim = {}) {
  bool found = false;
  for_each_totally_isotropic(
      V, F, r,
      [&](const Subspace&) {
        found = true;
        return false;
      },
      lim, false);
  return found;
}

/// Maximal dimension of a totally isotropic subspace of V (x) F, by search.
inline std::size_t witt_index(const BilinearSpace& V, const Field& F, const EnumerationLimits& lim = {}) {
  std::size_t r = 0;
  while (r + 1 <= V.dim() / 2 && has_totally_isotropic(V, F, r + 1, lim)) ++r;
  return r;
}

inline bool is_neutral(const BilinearSpace& V, const Field& F, const EnumerationLimits& lim = {}) {
  return witt_index(V, F, lim) * 2 == V.dim();
}

}  // namespace k3
