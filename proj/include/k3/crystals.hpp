#pragma once

// The Frobenius-semilinear operator phi = id (x) (x -> x^p) on N_0 (x) k and
// Ogus' characteristic / strictly characteristic subspaces, restricted to
// field-valued points.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "k3/quadratic_spaces.hpp"

namespace k3 {

/// Coordinate-wise p-th power of a vector (the ambient basis is F_p-rational).
inline std::vector<code_t> phi(const GaloisField& F, std::span<const code_t> v) {
  std::vector<code_t> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = F.frobenius(v[i]);
  return out;
}

inline Subspace phi(const Subspace& K) {
  const GaloisField& F = *K.field();
  FieldMatrix M = K.basis();
  for (auto& c : M.data) c = F.frobenius(c);
  // Frobenius is a field automorphism, so an RREF basis maps to an RREF basis
  return {Subspace::Canonical{}, K.space(), K.field(), std::move(M), K.pivots()};
}

namespace detail {

inline void require_ambient(const Subspace& K, int sigma0) {
  if (sigma0 < 1) throw InvalidInput("Artin invariant must be positive");
  if (K.ambient_dim() != 2 * static_cast<std::size_t>(sigma0))
    throw InvalidInput("ambient dimension " + std::to_string(K.ambient_dim()) + " is not 2*sigma0 = " +
                       std::to_string(2 * sigma0));
}

}  // namespace detail

/// dim K = sigma0, K totally isotropic, dim(K + phi K) = sigma0 + 1.
inline bool is_characteristic(const Subspace& K, int sigma0) {
  detail::require_ambient(K, sigma0);
  const auto s = static_cast<std::size_t>(sigma0);
  if (K.dim() != s || !K.is_totally_isotropic()) return false;
  return sum(K, phi(K)).dim() == s + 1;
}

/// Dimension at which K, K + phi K, K + phi K + phi^2 K, ... stabilizes.
inline std::size_t phi_closure_dim(const Subspace& K) {
  Subspace S = K;
  for (std::size_t it = 0; it < K.ambient_dim(); ++it) {
    Subspace next = sum(S, phi(S));
    if (next.dim() == S.dim()) break;
    S = std::move(next);
  }
  return S.dim();
}

inline bool is_strictly_characteristic(const Subspace& K, int sigma0) {
  if (!is_characteristic(K, sigma0)) throw InvalidInput("is_strictly_characteristic: subspace is not characteristic");
  return phi_closure_dim(K) == K.ambient_dim();
}

/// A characteristic subspace of N_0 (x) k; the field-valued point of M_N.
class CharacteristicSubspace {
 public:
  static std::optional<CharacteristicSubspace> try_make(Subspace K, int sigma0) {
    if (!is_characteristic(K, sigma0)) return std::nullopt;
    const bool strict = phi_closure_dim(K) == K.ambient_dim();
    return CharacteristicSubspace(std::move(K), sigma0, strict);
  }

  static CharacteristicSubspace make(Subspace K, int sigma0) {
    auto c = try_make(std::move(K), sigma0);
    if (!c) throw InvalidInput("subspace is not characteristic");
    return *std::move(c);
  }

  const Subspace& subspace() const noexcept { return sub_; }
  int sigma0() const noexcept { return sigma0_; }
  bool strict() const noexcept { return strict_; }
  const Field& field() const noexcept { return sub_.field(); }

  bool operator==(const CharacteristicSubspace& o) const { return sub_ == o.sub_; }
  bool operator<(const CharacteristicSubspace& o) const { return sub_ < o.sub_; }

 private:
  CharacteristicSubspace(Subspace K, int sigma0, bool strict) : sub_(std::move(K)), sigma0_(sigma0), strict_(strict) {}

  Subspace sub_;
  int sigma0_;
  bool strict_;
};

/// All characteristic subspaces of V (x) F, in enumeration order.
inline std::vector<CharacteristicSubspace> enumerate_characteristic(const BilinearSpace& V, const Field& F, int sigma0,
                                                                    const EnumerationLimits& lim = {}) {
  if (V.dim() != 2 * static_cast<std::size_t>(sigma0)) throw InvalidInput("dim V must equal 2*sigma0");
  std::vector<CharacteristicSubspace> out;
  for_each_totally_isotropic(
      V, F, static_cast<std::size_t>(sigma0),
      [&](const Subspace& K) {
        if (auto c = CharacteristicSubspace::try_make(K, sigma0)) out.push_back(*std::move(c));
        return true;
      },
      lim);
  return out;
}

}  // namespace k3
