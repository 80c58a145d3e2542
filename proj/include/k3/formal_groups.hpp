#pragma once

// Truncated one-dimensional commutative formal group laws over F_p.
//
// A law is stored by homogeneous components: component d holds the
// coefficients of x^i y^{d-i}, i = 0..d, for 0 <= d <= prec.

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "k3/errors.hpp"
#include "k3/fields.hpp"
#include "k3/quadratic_spaces.hpp"

namespace k3 {

using Residues = std::vector<std::uint32_t>;
using Homogeneous = std::vector<Residues>;  // [degree][power of x]

/// Univariate series mod (p, x^{prec+1}).
struct Series {
  int p = 0;
  int prec = 0;
  Residues c;  // c[k] = coefficient of x^k, size prec+1

  /// Lowest degree with a nonzero coefficient, or -1 for the zero series.
  int order() const {
    for (std::size_t k = 0; k < c.size(); ++k)
      if (c[k] != 0) return static_cast<int>(k);
    return -1;
  }
  bool operator==(const Series&) const = default;
};

namespace detail {

inline Series series_mul(const Series& a, const Series& b) {
  Series r{a.p, a.prec, Residues(static_cast<std::size_t>(a.prec) + 1, 0)};
  const auto p = static_cast<std::uint64_t>(a.p);
  for (std::size_t i = 0; i < a.c.size(); ++i) {
    if (a.c[i] == 0) continue;
    for (std::size_t j = 0; i + j < r.c.size(); ++j)
      r.c[i + j] = static_cast<std::uint32_t>((r.c[i + j] + static_cast<std::uint64_t>(a.c[i]) * b.c[j]) % p);
  }
  return r;
}

inline Homogeneous homogeneous_zero(int prec) {
  Homogeneous h(static_cast<std::size_t>(prec) + 1);
  for (std::size_t d = 0; d < h.size(); ++d) h[d].assign(d + 1, 0);
  return h;
}

inline bool component_zero(const Residues& r) {
  return std::all_of(r.begin(), r.end(), [](auto v) { return v == 0; });
}

inline Homogeneous bivariate_mul(const Homogeneous& a, const Homogeneous& b, int p) {
  const int prec = static_cast<int>(a.size()) - 1;
  Homogeneous r = homogeneous_zero(prec);
  std::vector<bool> nz_b(b.size());
  for (std::size_t d = 0; d < b.size(); ++d) nz_b[d] = !component_zero(b[d]);
  const auto pp = static_cast<std::uint64_t>(p);
  for (std::size_t da = 0; da < a.size(); ++da) {
    if (component_zero(a[da])) continue;
    for (std::size_t db = 0; da + db < r.size(); ++db) {
      if (!nz_b[db]) continue;
      auto& out = r[da + db];
      for (std::size_t i = 0; i <= da; ++i) {
        if (a[da][i] == 0) continue;
        for (std::size_t k = 0; k <= db; ++k)
          out[i + k] = static_cast<std::uint32_t>((out[i + k] + static_cast<std::uint64_t>(a[da][i]) * b[db][k]) % pp);
      }
    }
  }
  return r;
}

}  // namespace detail

/// A truncated formal group law over F_p.
class FormalGroupLaw {
 public:
  FormalGroupLaw(int p, int prec, std::string name, Homogeneous components)
      : p_(p), prec_(prec), name_(std::move(name)), comps_(std::move(components)) {
    if (p < 3 || !detail::is_prime(p)) throw InvalidInput("p must be an odd prime");
    if (prec < 1) throw InvalidInput("precision must be >= 1");
    if (comps_.size() != static_cast<std::size_t>(prec) + 1) throw InvalidInput("wrong number of components");
    for (std::size_t d = 0; d < comps_.size(); ++d)
      if (comps_[d].size() != d + 1) throw InvalidInput("malformed homogeneous component");
  }

  int prime() const noexcept { return p_; }
  int precision() const noexcept { return prec_; }
  const std::string& name() const noexcept { return name_; }
  const Homogeneous& components() const noexcept { return comps_; }

  /// Coefficient of x^i y^j (zero beyond the precision).
  std::uint32_t coeff(int i, int j) const {
    if (i < 0 || j < 0 || i + j > prec_) return 0;
    return comps_[static_cast<std::size_t>(i + j)][static_cast<std::size_t>(i)];
  }

  /// F(u(x), w(x)) for series with zero constant term.
  Series evaluate(const Series& u, const Series& w) const {
    if (u.c.at(0) != 0 || w.c.at(0) != 0) throw InvalidInput("substituted series must have zero constant term");
    const int N = prec_;
    const auto pp = static_cast<std::uint64_t>(p_);
    std::vector<Series> wpow;
    wpow.push_back(Series{p_, N, Residues(static_cast<std::size_t>(N) + 1, 0)});
    wpow[0].c[0] = 1;
    for (int j = 1; j <= N; ++j) wpow.push_back(detail::series_mul(wpow.back(), w));
    // Horner in u over c_i(w) = sum_j a_ij w^j
    Series acc{p_, N, Residues(static_cast<std::size_t>(N) + 1, 0)};
    for (int i = N; i >= 0; --i) {
      if (i != N) acc = detail::series_mul(acc, u);
      for (int j = 0; i + j <= N; ++j) {
        const std::uint32_t a = coeff(i, j);
        if (a == 0) continue;
        for (std::size_t k = 0; k < acc.c.size(); ++k)
          acc.c[k] = static_cast<std::uint32_t>((acc.c[k] + static_cast<std::uint64_t>(a) * wpow[static_cast<std::size_t>(j)].c[k]) % pp);
      }
    }
    return acc;
  }

  Series identity_series() const {
    Series x{p_, prec_, Residues(static_cast<std::size_t>(prec_) + 1, 0)};
    x.c[1] = 1;
    return x;
  }

 private:
  int p_;
  int prec_;
  std::string name_;
  Homogeneous comps_;
};

/// F = x + y.
inline FormalGroupLaw fgl_additive(int p, int prec) {
  if (prec < 1) throw InvalidInput("precision must be >= 1");
  Homogeneous h = detail::homogeneous_zero(prec);
  h[1][0] = h[1][1] = 1;
  return {p, prec, "additive", std::move(h)};
}

/// F = x + y + xy.
inline FormalGroupLaw fgl_multiplicative(int p, int prec) {
  if (prec < 1) throw InvalidInput("precision must be >= 1");
  Homogeneous h = detail::homogeneous_zero(prec);
  h[1][0] = h[1][1] = 1;
  if (prec >= 2) h[2][1] = 1;
  return {p, prec, "multiplicative", std::move(h)};
}

namespace detail {

using BigHomogeneous = std::vector<std::vector<mpz_class>>;

inline BigHomogeneous big_mul(const BigHomogeneous& a, const BigHomogeneous& b, std::size_t top, const mpz_class& M) {
  BigHomogeneous r(top + 1);
  for (std::size_t d = 0; d <= top; ++d) r[d].assign(d + 1, 0);
  auto nonzero = [](const std::vector<mpz_class>& v) { return std::any_of(v.begin(), v.end(), [](const mpz_class& x) { return x != 0; }); };
  std::vector<bool> nz_b(b.size());
  for (std::size_t d = 0; d < b.size(); ++d) nz_b[d] = nonzero(b[d]);
  for (std::size_t da = 0; da < a.size() && da <= top; ++da) {
    if (!nonzero(a[da])) continue;
    for (std::size_t db = 0; db < b.size() && da + db <= top; ++db) {
      if (!nz_b[db]) continue;
      auto& out = r[da + db];
      for (std::size_t i = 0; i <= da; ++i) {
        if (a[da][i] == 0) continue;
        for (std::size_t k = 0; k <= db; ++k)
          mpz_addmul(out[i + k].get_mpz_t(), a[da][i].get_mpz_t(), b[db][k].get_mpz_t());
      }
    }
  }
  for (auto& comp : r)
    for (auto& x : comp) mpz_fdiv_r(x.get_mpz_t(), x.get_mpz_t(), M.get_mpz_t());
  return r;
}

inline BigHomogeneous big_pow(const BigHomogeneous& f, std::uint64_t e, std::size_t top, const mpz_class& M) {
  BigHomogeneous result(top + 1);
  for (std::size_t d = 0; d <= top; ++d) result[d].assign(d + 1, 0);
  result[0][0] = 1;
  BigHomogeneous base = f;
  base.resize(std::min(base.size(), top + 1));
  while (e > 0) {
    if (e & 1) result = big_mul(result, base, top, M);
    e >>= 1;
    if (e > 0) base = big_mul(base, base, top, M);
  }
  return result;
}

}  // namespace detail

/// The Lubin-Tate law with endomorphism [p](x) = px + x^{p^h}: built degree by
/// degree over Z/p^prec from f(F(x,y)) = F(f(x), f(y)), then reduced mod p.
inline FormalGroupLaw fgl_lubin_tate(int p, int h, int prec) {
  if (p < 3 || !detail::is_prime(p)) throw InvalidInput("p must be an odd prime");
  if (h < 1) throw InvalidInput("height must be >= 1");
  std::uint64_t Q = 1;
  for (int i = 0; i < h; ++i) {
    Q *= static_cast<std::uint64_t>(p);
    if (Q > 100000) throw InvalidInput("p^h beyond desk scale");
  }
  if (static_cast<std::uint64_t>(prec) < Q + 1)
    throw InvalidInput("precision " + std::to_string(prec) + " too small to certify height " + std::to_string(h) +
                       " (need >= p^h + 1 = " + std::to_string(Q + 1) + ")");
  const int K = prec;  // p-adic working precision
  const auto N = static_cast<std::size_t>(prec);
  mpz_class M;
  mpz_ui_pow_ui(M.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(K));
  const mpz_class P = p;

  // binomials and powers of p modulo M
  std::vector<std::vector<mpz_class>> binom(N + 1);
  for (std::size_t n = 0; n <= N; ++n) {
    binom[n].assign(n + 1, 1);
    for (std::size_t k = 1; k < n; ++k) binom[n][k] = (binom[n - 1][k - 1] + binom[n - 1][k]) % M;
  }
  std::vector<mpz_class> ppow(N + 1, 1);
  for (std::size_t k = 1; k <= N; ++k) ppow[k] = (ppow[k - 1] * P) % M;

  detail::BigHomogeneous F(N + 1);
  for (std::size_t d = 0; d <= N; ++d) F[d].assign(d + 1, 0);
  F[1][0] = F[1][1] = 1;
  std::vector<int> known(N + 1, K);  // p-adic precision of each component
  const std::size_t step = static_cast<std::size_t>(Q - 1);

  std::size_t e = 1;  // components 0..e are final
  while (e < N) {
    const std::size_t top = std::min(N, e + step);
    detail::BigHomogeneous lower(F.begin(), F.begin() + static_cast<std::ptrdiff_t>(e) + 1);
    // (F^Q)_d only involves components of degree <= d - Q + 1 <= e
    const detail::BigHomogeneous FQ = detail::big_pow(lower, Q, top, M);
    for (std::size_t d = e + 1; d <= top; ++d) {
      std::vector<mpz_class> E(d + 1, 0);
      int prec_d = K;
      // [F_{<d}(f(x), f(y))]_d with f(x)^i = sum_k C(i,k) p^{i-k} x^{i + k(Q-1)}
      for (std::size_t j = 1; j < d; ++j) {
        if ((d - j) % step != 0) continue;
        const std::size_t s = (d - j) / step;
        if (s > j) continue;
        prec_d = std::min(prec_d, known[j] + static_cast<int>(j - s));
        for (std::size_t i = 0; i <= j; ++i) {
          const mpz_class& a = F[j][i];
          if (a == 0) continue;
          const std::size_t l = j - i;
          const std::size_t k_lo = s > l ? s - l : 0, k_hi = std::min(i, s);
          for (std::size_t k = k_lo; k <= k_hi; ++k) {
            const std::size_t t = s - k;
            mpz_class term = a * binom[i][k] * binom[l][t] * ppow[j - s];
            E[i + k * step] += term;
          }
        }
      }
      for (std::size_t j = 2; j + step <= d; ++j) prec_d = std::min(prec_d, known[j] + 1);
      for (std::size_t i = 0; i <= d; ++i) {
        E[i] -= FQ[d][i];
        mpz_fdiv_r(E[i].get_mpz_t(), E[i].get_mpz_t(), M.get_mpz_t());
      }
      // (p - p^d) F_d = E_d
      mpz_class unit = 1 - ppow[d - 1], unit_inv;
      unit %= M;
      if (unit < 0) unit += M;
      if (mpz_invert(unit_inv.get_mpz_t(), unit.get_mpz_t(), M.get_mpz_t()) == 0)
        throw InvariantViolation("Lubin-Tate: 1 - p^(d-1) not invertible");
      for (std::size_t i = 0; i <= d; ++i) {
        if (mpz_divisible_p(E[i].get_mpz_t(), P.get_mpz_t()) == 0)
          throw InvariantViolation("Lubin-Tate: obstruction not divisible by p in degree " + std::to_string(d));
        mpz_divexact(E[i].get_mpz_t(), E[i].get_mpz_t(), P.get_mpz_t());
        F[d][i] = (E[i] * unit_inv) % M;
      }
      known[d] = prec_d - 1;
      if (known[d] < 1)
        throw InvariantViolation("Lubin-Tate: p-adic working precision exhausted in degree " + std::to_string(d));
    }
    e = top;
  }

  Homogeneous comps = detail::homogeneous_zero(prec);
  for (std::size_t d = 0; d <= N; ++d)
    for (std::size_t i = 0; i <= d; ++i) {
      mpz_class r;
      mpz_fdiv_r(r.get_mpz_t(), F[d][i].get_mpz_t(), P.get_mpz_t());
      comps[d][i] = static_cast<std::uint32_t>(r.get_ui());
    }
  return {p, prec, "lubin-tate(h=" + std::to_string(h) + ")", std::move(comps)};
}

/// [n](x), with [0] = 0 and [k+1](x) = F([k](x), x).
inline Series n_series(const FormalGroupLaw& F, int n) {
  if (n < 0) throw InvalidInput("n must be >= 0");
  const Series x = F.identity_series();
  Series acc{F.prime(), F.precision(), Residues(static_cast<std::size_t>(F.precision()) + 1, 0)};
  for (int k = 0; k < n; ++k) acc = F.evaluate(acc, x);
  return acc;
}

struct HeightVerdict {
  bool infinite = false;  // [p](x) vanishes to the working precision
  int height = 0;
  int lowest_degree = -1;
  int precision = 0;
};

inline HeightVerdict height(const FormalGroupLaw& F) {
  const Series s = n_series(F, F.prime());
  HeightVerdict v;
  v.precision = F.precision();
  const int lowest = s.order();
  if (lowest < 0) {
    v.infinite = true;
    return v;
  }
  v.lowest_degree = lowest;
  int h = 0;
  long long q = 1;
  while (q < lowest) {
    q *= F.prime();
    ++h;
  }
  if (q != lowest || h == 0)
    throw InvariantViolation("lowest nonzero degree " + std::to_string(lowest) + " of [p](x) is not a power of p");
  v.height = h;
  return v;
}

struct AxiomReport {
  bool identity = false;
  bool commutative = false;
  bool associative = false;
  bool all() const noexcept { return identity && commutative && associative; }
};

namespace detail {

// sum_{i,j} a_ij G^i z^j (or x^i G^j), truncated to total degree N; G is a
// bivariate law in the two variables not carried by the single variable.
inline std::vector<std::uint32_t> substitute_trivariate(const FormalGroupLaw& F, bool inner_left) {
  const int N = F.precision();
  const auto n1 = static_cast<std::size_t>(N) + 1;
  const auto pp = static_cast<std::uint64_t>(F.prime());
  std::vector<std::uint32_t> T(n1 * n1 * n1, 0);
  auto at = [&](std::size_t a, std::size_t b, std::size_t c) -> std::uint32_t& { return T[(a * n1 + b) * n1 + c]; };
  Homogeneous Gpow = homogeneous_zero(N);
  Gpow[0][0] = 1;
  for (int k = 0; k <= N; ++k) {
    if (k > 0) Gpow = bivariate_mul(Gpow, F.components(), F.prime());
    for (int other = 0; k + other <= N; ++other) {
      const std::uint32_t a = inner_left ? F.coeff(k, other) : F.coeff(other, k);
      if (a == 0) continue;
      for (std::size_t d = 0; d + static_cast<std::size_t>(other) <= static_cast<std::size_t>(N); ++d) {
        for (std::size_t i = 0; i <= d; ++i) {
          const std::uint32_t g = Gpow[d][i];
          if (g == 0) continue;
          const auto add = static_cast<std::uint32_t>(static_cast<std::uint64_t>(a) * g % pp);
          // G in (x,y) with z^other, or G in (y,z) with x^other
          std::uint32_t& cell = inner_left ? at(i, d - i, static_cast<std::size_t>(other))
                                           : at(static_cast<std::size_t>(other), i, d - i);
          cell = static_cast<std::uint32_t>((cell + add) % pp);
        }
      }
    }
  }
  return T;
}

}  // namespace detail

/// Identity, commutativity and associativity to the law's precision.
inline AxiomReport check_axioms(const FormalGroupLaw& F) {
  AxiomReport r;
  const int N = F.precision();
  r.identity = F.coeff(1, 0) == 1 && F.coeff(0, 1) == 1;
  for (int d = 0; d <= N && r.identity; ++d)
    if (d != 1 && (F.coeff(d, 0) != 0 || F.coeff(0, d) != 0)) r.identity = false;
  r.commutative = true;
  for (int i = 0; i <= N && r.commutative; ++i)
    for (int j = 0; i + j <= N; ++j)
      if (F.coeff(i, j) != F.coeff(j, i)) {
        r.commutative = false;
        break;
      }
  r.associative = detail::substitute_trivariate(F, true) == detail::substitute_trivariate(F, false);
  return r;
}

struct TorsionReport {
  std::string field;
  int truncation = 0;          // R = F_q[t]/(t^m)
  std::uint64_t points = 0;    // |m_R| = q^{m-1}
  int n = 0;
  bool coprime_to_p = false;
  bool injective = false;      // [n] injective (hence bijective) on m_R
  std::uint64_t kernel_size = 0;
  HeightVerdict height;
  bool valuation_applicable = false;
  std::uint64_t valuation_checked = 0;
  bool valuation_holds = false;  // ord([p]x) = p^h ord(x) when p^h ord(x) < m, else [p]x = 0
};

/// Exhaustive evaluation of [n] and [p] on every point of m_R,
/// R = F_q[t]/(t^m).
inline TorsionReport torsion_analysis(const FormalGroupLaw& F, const Field& K, int m, int n,
                                      const EnumerationLimits& lim = {}) {
  if (m < 2) throw InvalidInput("truncation order m must be >= 2");
  if (n < 0) throw InvalidInput("n must be >= 0");
  if (K->characteristic() != F.prime()) throw FieldMismatch("ring field has the wrong characteristic");
  if (F.precision() < m - 1) throw InvalidInput("law precision below m - 1");
  const GaloisField& G = *K;
  const std::uint64_t q = G.order();
  std::uint64_t points = 1;
  for (int i = 1; i < m; ++i) {
    points *= q;
    if (points > lim.cap) throw GuardExceeded("torsion_analysis: m_R has more points than the enumeration cap");
  }
  TorsionReport rep;
  rep.field = G.name();
  rep.truncation = m;
  rep.points = points;
  rep.n = n;
  rep.coprime_to_p = n % F.prime() != 0;
  rep.height = height(F);
  const Series sn = n_series(F, n);
  const Series sp = n_series(F, F.prime());
  const auto mm = static_cast<std::size_t>(m);

  using Poly = std::vector<code_t>;  // coefficients of t^0..t^{m-1}
  auto mul = [&](const Poly& a, const Poly& b) {
    Poly r(mm, 0);
    for (std::size_t i = 0; i < mm; ++i) {
      if (a[i] == 0) continue;
      for (std::size_t j = 0; i + j < mm; ++j) r[i + j] = G.add(r[i + j], G.mul(a[i], b[j]));
    }
    return r;
  };
  auto apply = [&](const Series& s, const Poly& g) {
    Poly acc(mm, 0);
    for (std::size_t k = mm - 1; k >= 1; --k) {
      acc[0] = G.add(acc[0], static_cast<code_t>(s.c[k]));
      acc = mul(acc, g);
    }
    return acc;
  };
  auto ord = [&](const Poly& g) {
    for (std::size_t i = 0; i < mm; ++i)
      if (g[i] != 0) return static_cast<long long>(i);
    return -1LL;
  };
  auto index = [&](const Poly& g) {
    std::uint64_t idx = 0;
    for (std::size_t i = mm - 1; i >= 1; --i) idx = idx * q + g[i];
    return idx;
  };

  std::vector<bool> seen(points, false);
  rep.injective = true;
  rep.valuation_applicable = !rep.height.infinite;
  rep.valuation_holds = rep.valuation_applicable;
  long long Qh = 1;
  for (int i = 0; i < rep.height.height; ++i) Qh *= F.prime();
  Poly g(mm, 0);
  for (std::uint64_t it = 0; it < points; ++it) {
    const Poly img = apply(sn, g);
    const std::uint64_t idx = index(img);
    if (seen[idx]) rep.injective = false;
    seen[idx] = true;
    if (ord(img) < 0) ++rep.kernel_size;
    if (rep.valuation_applicable && ord(g) > 0) {
      const long long o = ord(g), op = ord(apply(sp, g));
      const bool ok = Qh * o < m ? op == Qh * o : op < 0;
      if (Qh * o < m) ++rep.valuation_checked;
      if (!ok) rep.valuation_holds = false;
    }
    for (std::size_t i = 1; i < mm; ++i) {  // next point
      if (++g[i] < q) break;
      g[i] = 0;
    }
  }
  return rep;
}

}  // namespace k3
