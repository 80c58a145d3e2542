#pragma once

// The P^1-bundle M_{N+} -> M_N on field-valued points: the plus space
// N_0 (+) <D, E>, the section K -> K (+) <D>, the projection
// Gamma_+(K) = pr_{N_0}(K cap E^perp), the explicit fiber parametrization and
// brute-force point counts.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "k3/crystals.hpp"

namespace k3 {

/// full = base (+) <D, E> with <D, E> = 1 and D, E isotropic; D and E are the
/// last two coordinates.
struct PlusSpace {
  BilinearSpace base;
  BilinearSpace full;
  std::size_t d_index;
  std::size_t e_index;

  int sigma0() const noexcept { return static_cast<int>(base.dim() / 2); }
};

inline PlusSpace build_plus_space(const BilinearSpace& V) {
  const std::size_t n = V.dim(), m = n + 2;
  std::vector<int> g(m * m, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g[i * m + j] = V.gram(i, j);
  g[n * m + n + 1] = 1;
  g[(n + 1) * m + n] = 1;
  return PlusSpace{V, BilinearSpace(V.prime(), m, std::move(g)), n, n + 1};
}

namespace detail {

inline void require_base_point(const CharacteristicSubspace& K, const PlusSpace& P) {
  if (!(K.subspace().space() == P.base)) throw FieldMismatch("subspace does not live in the plus space's base");
  if (K.sigma0() != P.sigma0()) throw InvalidInput("Artin invariant does not match the plus space");
}

inline void require_plus_point(const CharacteristicSubspace& K, const PlusSpace& P) {
  if (!(K.subspace().space() == P.full)) throw FieldMismatch("subspace does not live in the plus space");
  if (K.sigma0() != P.sigma0() + 1) throw InvalidInput("Artin invariant does not match the plus space");
}

inline std::vector<code_t> pad(std::span<const code_t> v, std::size_t m) {
  std::vector<code_t> out(m, 0);
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

inline CharacteristicSubspace expect_characteristic(Subspace K, int sigma0, const char* what) {
  auto c = CharacteristicSubspace::try_make(std::move(K), sigma0);
  if (!c) throw InvariantViolation(std::string(what) + " produced a non-characteristic subspace");
  return *std::move(c);
}

inline CharacteristicSubspace lift_to(const CharacteristicSubspace& K, const Field& F) {
  if (K.field()->same_as(*F)) return K;
  return expect_characteristic(extend_field(K.subspace(), F), K.sigma0(), "field extension");
}

}  // namespace detail

/// K -> gamma^{-1}(K) = K (+) <D>.
inline CharacteristicSubspace sigma_section(const CharacteristicSubspace& K, const PlusSpace& P) {
  detail::require_base_point(K, P);
  const std::size_t m = P.full.dim();
  FieldMatrix M(0, m);
  for (std::size_t i = 0; i < K.subspace().dim(); ++i) M.append_row(detail::pad(K.subspace().basis().row(i), m));
  std::vector<code_t> d(m, 0);
  d[P.d_index] = 1;
  M.append_row(d);
  return detail::expect_characteristic(Subspace(P.full, K.field(), std::move(M)), P.sigma0() + 1, "sigma_section");
}

/// Gamma_+(K+) = pr_{N_0}(K+ cap E^perp).
inline CharacteristicSubspace gamma_plus(const CharacteristicSubspace& Kp, const PlusSpace& P) {
  detail::require_plus_point(Kp, P);
  const Field& F = Kp.field();
  const std::size_t m = P.full.dim(), n = P.base.dim();
  FieldMatrix e(1, m);
  e(0, P.e_index) = 1;
  const Subspace e_perp = orthogonal_complement(Subspace(P.full, F, std::move(e)));
  const Subspace cut = intersect(Kp.subspace(), e_perp);
  FieldMatrix proj(0, n);
  std::vector<code_t> v(n);
  for (std::size_t i = 0; i < cut.dim(); ++i) {
    std::size_t k = 0;
    for (std::size_t c = 0; c < m; ++c)
      if (c != P.d_index && c != P.e_index) v[k++] = cut.basis()(i, c);
    proj.append_row(v);
  }
  return detail::expect_characteristic(Subspace(P.base, F, std::move(proj)), P.sigma0(), "gamma_plus");
}

/// Brute-force fiber: every characteristic K+ over F with Gamma_+(K+) = K0.
inline std::vector<CharacteristicSubspace> fiber_enumerate(const CharacteristicSubspace& K0, const PlusSpace& P,
                                                           const Field& F, const EnumerationLimits& lim = {}) {
  detail::require_base_point(K0, P);
  const CharacteristicSubspace base_point = detail::lift_to(K0, F);
  std::vector<CharacteristicSubspace> out;
  for (auto& Kp : enumerate_characteristic(P.full, F, P.sigma0() + 1, lim))
    if (gamma_plus(Kp, P) == base_point) out.push_back(std::move(Kp));
  return out;
}

struct FiberPoint {
  enum class Kind { AtInfinity, Affine };
  Kind kind;
  std::optional<FieldElement> lambda;  // set for Affine
  CharacteristicSubspace subspace;
};

struct FiberFormulaResult {
  Field working_field;                 // field of the returned points
  bool extended = false;               // working_field is a proper extension of the input field
  std::vector<code_t> v;               // normalized complement vector, base coordinates
  FieldElement pairing;                // <v, phi v> before normalization (input field)
  FieldElement normalizer;             // c with c^{p+1} <v, phi v> = 1 (working field)
  std::vector<FiberPoint> points;      // at infinity first, then lambda in code order
};

namespace detail {

// First vector of K0 (basis rows in RREF order, then coefficient tuples in
// lexicographic code order) with v not in K0 cap phi(K0) and phi(v) not in K0.
inline std::vector<code_t> choose_complement(const Subspace& K0, const Subspace& meet) {
  const GaloisField& F = *K0.field();
  auto good = [&](std::span<const code_t> v) { return !meet.contains(v) && !K0.contains(std::span<const code_t>(phi(F, v))); };
  for (std::size_t i = 0; i < K0.dim(); ++i)
    if (good(K0.basis().row(i))) return {K0.basis().row(i).begin(), K0.basis().row(i).end()};
  const std::size_t r = K0.dim(), n = K0.ambient_dim();
  std::vector<code_t> coeff(r, 0);
  std::vector<code_t> v(n);
  while (true) {
    std::size_t d = r;
    while (d-- > 0) {
      if (++coeff[d] < F.order()) break;
      coeff[d] = 0;
    }
    if (d == static_cast<std::size_t>(-1)) break;
    std::fill(v.begin(), v.end(), 0);
    for (std::size_t i = 0; i < r; ++i)
      if (coeff[i] != 0)
        for (std::size_t c = 0; c < n; ++c) v[c] = F.add(v[c], F.mul(coeff[i], K0.basis()(i, c)));
    if (good(v)) return v;
  }
  throw InvariantViolation("no complement vector v with phi(v) outside K0");
}

}  // namespace detail

/// The fiber of Gamma_+ over K0 by the explicit parametrization
///   <K0, E>   and   <k_1..k_{s-1}, v + lambda E, v - lambda phi(v) + D + lambda E>,
/// where k_i is the RREF basis of K0 cap phi(K0) and <v, phi v> = 1.  When the
/// normalizing scalar needs a field extension the points are returned over
/// that extension, with lambda ranging over it.
inline FiberFormulaResult fiber_formula(const CharacteristicSubspace& K0_in, const PlusSpace& P, const Field& F,
                                        const EnumerationLimits& lim = {}) {
  detail::require_base_point(K0_in, P);
  const CharacteristicSubspace K0 = detail::lift_to(K0_in, F);
  const Subspace& K = K0.subspace();
  const int s = P.sigma0();
  const Subspace meet = intersect(K, phi(K));
  if (meet.dim() != static_cast<std::size_t>(s - 1))
    throw InvariantViolation("K0 cap phi(K0) has dimension " + std::to_string(meet.dim()) + ", expected sigma0-1");

  std::vector<code_t> v = detail::choose_complement(K, meet);
  const code_t a = P.base.form(*F, v, phi(*F, v));
  if (a == 0) throw InvariantViolation("<v, phi(v)> = 0 for the canonical complement vector");
  const FieldElement pairing(F, a);
  const NormRoot nr = solve_p_plus_1_root(pairing.inverse(), lim.cap);
  const Field W = nr.field;
  const GaloisField& G = *W;

  FieldMatrix kbasis = meet.basis();
  if (nr.extended) {
    const auto emb = embedding(F, W);
    for (auto& c : v) c = (*emb)(c);
    for (auto& c : kbasis.data) c = (*emb)(c);
  }
  for (auto& c : v) c = G.mul(nr.root.code(), c);
  const std::vector<code_t> phiv = phi(G, v);
  if (P.base.form(G, v, phiv) != 1) throw InvariantViolation("normalization <v, phi(v)> = 1 failed");

  const CharacteristicSubspace target = detail::lift_to(K0, W);
  FiberFormulaResult out{W, nr.extended, v, pairing, nr.root, {}};

  const std::size_t m = P.full.dim();
  auto check = [&](Subspace S, const char* what) {
    auto C = detail::expect_characteristic(std::move(S), s + 1, what);
    if (!(gamma_plus(C, P) == target)) throw InvariantViolation(std::string(what) + " does not lie over K0");
    return C;
  };

  {
    FieldMatrix M(0, m);
    for (std::size_t i = 0; i < target.subspace().dim(); ++i)
      M.append_row(detail::pad(target.subspace().basis().row(i), m));
    std::vector<code_t> e(m, 0);
    e[P.e_index] = 1;
    M.append_row(e);
    out.points.push_back({FiberPoint::Kind::AtInfinity, std::nullopt, check(Subspace(P.full, W, std::move(M)), "fiber point at infinity")});
  }

  if (G.order() > lim.cap) throw GuardExceeded("fiber_formula: working field larger than the enumeration cap");
  for (std::uint64_t l = 0; l < G.order(); ++l) {
    const auto lambda = static_cast<code_t>(l);
    FieldMatrix M(0, m);
    for (std::size_t i = 0; i < kbasis.rows; ++i) M.append_row(detail::pad(kbasis.row(i), m));
    std::vector<code_t> r1 = detail::pad(v, m);
    r1[P.e_index] = lambda;
    std::vector<code_t> r2 = detail::pad(v, m);
    for (std::size_t c = 0; c < v.size(); ++c) r2[c] = G.sub(r2[c], G.mul(lambda, phiv[c]));
    r2[P.d_index] = 1;
    r2[P.e_index] = lambda;
    M.append_row(r1);
    M.append_row(r2);
    out.points.push_back({FiberPoint::Kind::Affine, FieldElement(W, lambda),
                          check(Subspace(P.full, W, std::move(M)), "affine fiber point")});
  }
  return out;
}

/// Number of characteristic subspaces of standard_N0(p, sigma0) over F_{p^n}.
inline std::uint64_t count_points(int p, int sigma0, int n, const EnumerationLimits& lim = {}) {
  if (n < 1) throw InvalidInput("extension degree must be >= 1");
  const BilinearSpace V = standard_N0(p, sigma0);
  const Field F = make_field(p, n);
  std::uint64_t count = 0;
  for_each_totally_isotropic(
      V, F, static_cast<std::size_t>(sigma0),
      [&](const Subspace& K) {
        if (is_characteristic(K, sigma0)) ++count;
        return true;
      },
      lim, false);
  return count;
}

/// Point count of an iterated P^1-bundle over Spec F_{p^2}: 0 for odd n and
/// 2 (p^n + 1)^{sigma0-1} for even n.
inline std::uint64_t tower_prediction(int p, int sigma0, int n) {
  if (sigma0 < 1 || sigma0 > 10) throw InvalidInput("Artin invariant must lie in 1..10");
  if (n < 1) throw InvalidInput("extension degree must be >= 1");
  if (n % 2 != 0) return 0;
  unsigned __int128 q = 1;
  for (int i = 0; i < n; ++i) {
    q *= static_cast<unsigned>(p);
    if (q > ~std::uint64_t{0}) throw InvalidInput("tower_prediction overflows 64 bits");
  }
  unsigned __int128 r = 2;
  for (int i = 1; i < sigma0; ++i) {
    r *= q + 1;
    if (r > ~std::uint64_t{0}) throw InvalidInput("tower_prediction overflows 64 bits");
  }
  return static_cast<std::uint64_t>(r);
}

namespace detail {
inline void require_artin(int s) {
  if (s < 1 || s > 10) throw InvalidInput("Artin invariant must lie in 1..10, got " + std::to_string(s));
}
}  // namespace detail

/// Height of the purely inseparable isogenies X -> X' -> X between
/// supersingular K3 surfaces with Artin invariants s and s'.
inline int isogeny_height(int s, int s_prime) {
  detail::require_artin(s);
  detail::require_artin(s_prime);
  return 2 * s + 2 * s_prime - 4;
}

/// Height of the isogenies Km(E x E) -> X -> Km(E x E).
inline int kummer_height(int s) {
  detail::require_artin(s);
  return 2 * s - 2;
}

struct IsogenyStep {
  int sigma0;
  int height;
};

/// One step down: an isogeny of height 2 to a surface with Artin invariant s-1.
inline IsogenyStep corollary_step(int s) {
  detail::require_artin(s);
  if (s < 2) throw InvalidInput("corollary_step requires sigma0 >= 2");
  return {s - 1, 2};
}

}  // namespace k3
