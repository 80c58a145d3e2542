#pragma once

// Finite fields F_{p^m} for odd p with a deterministic defining polynomial,
// Frobenius, canonical embeddings F_{p^m} -> F_{p^{mk}}, and the norm-type
// equation c^{p+1} = a.
//
// Elements are encoded as integers ("codes"): the element
// c_0 + c_1 x + ... + c_{m-1} x^{m-1} has code sum c_i p^i.  Prime-field
// residues therefore keep the same code in every extension.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "k3/errors.hpp"

namespace k3 {

namespace detail {

using Poly = std::vector<int>;  // constant term first

inline bool is_prime(long long n) {
  if (n < 2) return false;
  for (long long d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

inline int mod_p(long long v, int p) {
  long long r = v % p;
  return static_cast<int>(r < 0 ? r + p : r);
}

inline int inv_mod_p(int a, int p) {
  // p is prime; Fermat
  long long r = 1, b = a, e = p - 2;
  while (e > 0) {
    if (e & 1) r = r * b % p;
    b = b * b % p;
    e >>= 1;
  }
  return static_cast<int>(r);
}

inline void trim(Poly& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

// remainder of a modulo a monic f
inline Poly poly_rem(Poly a, const Poly& f, int p) {
  trim(a);
  const std::size_t df = f.size() - 1;
  while (a.size() > df) {
    const int c = a.back();
    const std::size_t shift = a.size() - 1 - df;
    for (std::size_t k = 0; k <= df; ++k)
      a[shift + k] = mod_p(a[shift + k] - static_cast<long long>(c) * f[k], p);
    trim(a);
  }
  return a;
}

inline Poly poly_mul(const Poly& a, const Poly& b, int p) {
  if (a.empty() || b.empty()) return {};
  Poly r(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    for (std::size_t j = 0; j < b.size(); ++j)
      r[i + j] = static_cast<int>((r[i + j] + static_cast<long long>(a[i]) * b[j]) % p);
  }
  trim(r);
  return r;
}

// gcd of arbitrary (not necessarily monic) polynomials, returned monic
inline Poly poly_gcd(Poly a, Poly b, int p) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    const int lead_inv = inv_mod_p(b.back(), p);
    Poly bm = b;
    for (int& c : bm) c = static_cast<int>(static_cast<long long>(c) * lead_inv % p);
    Poly r = poly_rem(a, bm, p);
    a = std::move(bm);
    b = std::move(r);
  }
  if (!a.empty()) {
    const int lead_inv = inv_mod_p(a.back(), p);
    for (int& c : a) c = static_cast<int>(static_cast<long long>(c) * lead_inv % p);
  }
  return a;
}

// Ben-Or: a monic f of degree m is irreducible iff gcd(x^{p^i} - x, f) = 1
// for 1 <= i <= m/2.
inline bool is_irreducible(const Poly& f, int p) {
  const std::size_t m = f.size() - 1;
  if (m == 1) return true;
  Poly xpow{0, 1};
  for (std::size_t i = 1; i <= m / 2; ++i) {
    // xpow <- xpow^p mod f
    Poly base = xpow, acc{1};
    for (int e = p; e > 0; e >>= 1) {
      if (e & 1) acc = poly_rem(poly_mul(acc, base, p), f, p);
      base = poly_rem(poly_mul(base, base, p), f, p);
    }
    xpow = acc;
    Poly diff = xpow;
    if (diff.size() < 2) diff.resize(2, 0);
    diff[1] = mod_p(diff[1] - 1, p);
    trim(diff);
    if (diff.empty()) return false;
    if (poly_gcd(diff, f, p).size() != 1) return false;
  }
  return true;
}

inline std::vector<std::uint64_t> prime_factors(std::uint64_t n) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) {
      out.push_back(d);
      while (n % d == 0) n /= d;
    }
  }
  if (n > 1) out.push_back(n);
  return out;
}

}  // namespace detail

/// The field F_{p^m} = F_p[x]/(f) with f the first monic irreducible of degree
/// m in the scan order c_{m-1}, ..., c_0 (numeric order of the lower
/// coefficients read as a base-p code).  Immutable after construction.
class GaloisField {
 public:
  using code_type = std::uint32_t;

  static constexpr std::uint64_t kTableLimit = 1u << 20;
  static constexpr std::uint64_t kAddTableLimit = 1024;
  static constexpr std::uint64_t kOrderLimit = 0xFFFFFFFFull;

  GaloisField(int p, int m) : p_(p), m_(m) {
    if (p < 3 || !detail::is_prime(p))
      throw InvalidInput("field characteristic must be an odd prime, got " + std::to_string(p));
    if (m < 1) throw InvalidInput("extension degree must be >= 1");
    q_ = 1;
    for (int i = 0; i < m; ++i) {
      q_ *= static_cast<std::uint64_t>(p);
      if (q_ > kOrderLimit) throw InvalidInput("field order beyond desk scale");
    }
    find_modulus();
    build_tables();
  }

  int characteristic() const noexcept { return p_; }
  int degree() const noexcept { return m_; }
  std::uint64_t order() const noexcept { return q_; }
  /// Monic defining polynomial, constant term first, length m+1.
  const std::vector<int>& modulus() const noexcept { return modulus_; }
  bool has_tables() const noexcept { return !log_.empty(); }

  bool same_as(const GaloisField& o) const noexcept {
    return this == &o || (p_ == o.p_ && modulus_ == o.modulus_);
  }

  std::string name() const {
    return m_ == 1 ? "F_" + std::to_string(p_)
                   : "F_" + std::to_string(p_) + "^" + std::to_string(m_);
  }

  code_type from_int(long long v) const { return static_cast<code_type>(detail::mod_p(v, p_)); }

  std::vector<int> digits(code_type a) const {
    std::vector<int> d(static_cast<std::size_t>(m_), 0);
    for (int i = 0; i < m_; ++i) {
      d[static_cast<std::size_t>(i)] = static_cast<int>(a % static_cast<code_type>(p_));
      a /= static_cast<code_type>(p_);
    }
    return d;
  }

  code_type from_digits(std::span<const int> d) const {
    if (d.size() > static_cast<std::size_t>(m_))
      throw InvalidInput("coefficient vector longer than the extension degree");
    std::uint64_t c = 0;
    for (std::size_t i = d.size(); i-- > 0;) c = c * static_cast<std::uint64_t>(p_) + static_cast<std::uint64_t>(detail::mod_p(d[i], p_));
    return static_cast<code_type>(c);
  }

  code_type add(code_type a, code_type b) const {
    if (!add_.empty()) return add_[static_cast<std::size_t>(a) * q_ + b];
    if (m_ == 1) {
      code_type s = a + b;
      return s >= static_cast<code_type>(p_) ? s - static_cast<code_type>(p_) : s;
    }
    code_type r = 0, place = 1;
    const auto pp = static_cast<code_type>(p_);
    while (a != 0 || b != 0) {
      code_type s = a % pp + b % pp;
      if (s >= pp) s -= pp;
      r += s * place;
      a /= pp;
      b /= pp;
      place *= pp;
    }
    return r;
  }

  code_type neg(code_type a) const {
    if (!neg_.empty()) return neg_[a];
    code_type r = 0, place = 1;
    const auto pp = static_cast<code_type>(p_);
    while (a != 0) {
      const code_type d = a % pp;
      r += (d == 0 ? 0 : pp - d) * place;
      a /= pp;
      place *= pp;
    }
    return r;
  }

  code_type sub(code_type a, code_type b) const { return add(a, neg(b)); }

  code_type mul(code_type a, code_type b) const {
    if (a == 0 || b == 0) return 0;
    if (!log_.empty()) return exp_[static_cast<std::size_t>(log_[a]) + log_[b]];
    return slow_mul(a, b);
  }

  code_type inv(code_type a) const {
    if (a == 0) throw InvalidInput("inverse of zero");
    if (!log_.empty()) return exp_[(q_ - 1 - log_[a]) % (q_ - 1)];
    return pow(a, q_ - 2);
  }

  code_type div(code_type a, code_type b) const { return mul(a, inv(b)); }

  code_type pow(code_type a, std::uint64_t e) const {
    if (e == 0) return 1;
    if (a == 0) return 0;
    if (!log_.empty()) {
      const std::uint64_t k = (static_cast<std::uint64_t>(log_[a]) * (e % (q_ - 1))) % (q_ - 1);
      return exp_[k];
    }
    code_type r = 1, b = a;
    while (e > 0) {
      if (e & 1) r = mul(r, b);
      b = mul(b, b);
      e >>= 1;
    }
    return r;
  }

  /// x -> x^p
  code_type frobenius(code_type a) const {
    if (!frob_.empty()) return frob_[a];
    return pow(a, static_cast<std::uint64_t>(p_));
  }

  /// Discrete logarithm to the table generator; requires has_tables() and a != 0.
  std::uint32_t log(code_type a) const { return log_.at(a); }
  code_type exp(std::uint64_t k) const { return exp_.at(k % (q_ - 1)); }

 private:
  code_type slow_mul(code_type a, code_type b) const {
    detail::Poly pa = digits(a), pb = digits(b);
    detail::trim(pa);
    detail::trim(pb);
    detail::Poly r = detail::poly_rem(detail::poly_mul(pa, pb, p_), modulus_, p_);
    return from_digits(r);
  }

  void find_modulus() {
    if (m_ == 1) {
      modulus_ = {0, 1};
      return;
    }
    std::uint64_t lower = 1;
    for (int i = 0; i < m_; ++i) lower *= static_cast<std::uint64_t>(p_);
    for (std::uint64_t c = 0; c < lower; ++c) {
      detail::Poly f(static_cast<std::size_t>(m_) + 1, 0);
      std::uint64_t t = c;
      for (int i = 0; i < m_; ++i) {
        f[static_cast<std::size_t>(i)] = static_cast<int>(t % static_cast<std::uint64_t>(p_));
        t /= static_cast<std::uint64_t>(p_);
      }
      f.back() = 1;
      if (f[0] == 0) continue;  // divisible by x
      if (detail::is_irreducible(f, p_)) {
        modulus_ = std::move(f);
        return;
      }
    }
    throw InvariantViolation("no irreducible polynomial found");  // unreachable
  }

  void build_tables() {
    if (q_ > kTableLimit) return;
    const std::size_t q = q_;
    // smallest generator of the multiplicative group
    const auto factors = detail::prime_factors(q_ - 1);
    code_type g = 0;
    for (code_type cand = 1; cand < q; ++cand) {
      bool ok = true;
      for (auto r : factors) {
        if (pow_slow(cand, (q_ - 1) / r) == 1) {
          ok = false;
          break;
        }
      }
      if (ok) {
        g = cand;
        break;
      }
    }
    exp_.assign(2 * (q - 1), 0);
    log_.assign(q, 0);
    code_type cur = 1;
    for (std::size_t k = 0; k < q - 1; ++k) {
      exp_[k] = cur;
      exp_[k + q - 1] = cur;
      log_[cur] = static_cast<std::uint32_t>(k);
      cur = slow_mul(cur, g);
    }
    neg_.assign(q, 0);
    for (std::size_t a = 0; a < q; ++a) {
      std::vector<int> d = digits(static_cast<code_type>(a));
      for (int& x : d) x = x == 0 ? 0 : p_ - x;
      neg_[a] = from_digits(d);
    }
    frob_.assign(q, 0);
    for (std::size_t a = 1; a < q; ++a)
      frob_[a] = exp_[(static_cast<std::uint64_t>(log_[a]) * static_cast<std::uint64_t>(p_)) % (q_ - 1)];
    if (q_ <= kAddTableLimit) {
      std::vector<code_type> tab(q * q);
      for (std::size_t a = 0; a < q; ++a) {
        const auto da = digits(static_cast<code_type>(a));
        for (std::size_t b = 0; b < q; ++b) {
          auto db = digits(static_cast<code_type>(b));
          for (std::size_t i = 0; i < db.size(); ++i) db[i] = (db[i] + da[i]) % p_;
          tab[a * q + b] = from_digits(db);
        }
      }
      add_ = std::move(tab);
    }
  }

  code_type pow_slow(code_type a, std::uint64_t e) const {
    code_type r = 1, b = a;
    while (e > 0) {
      if (e & 1) r = slow_mul(r, b);
      b = slow_mul(b, b);
      e >>= 1;
    }
    return r;
  }

  int p_;
  int m_;
  std::uint64_t q_ = 0;
  std::vector<int> modulus_;
  std::vector<code_type> exp_;
  std::vector<std::uint32_t> log_;
  std::vector<code_type> neg_;
  std::vector<code_type> frob_;
  std::vector<code_type> add_;
};

using Field = std::shared_ptr<const GaloisField>;
using code_t = GaloisField::code_type;

/// Deterministic, cached construction of F_{p^m}.
inline Field make_field(int p, int m) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, Field> cache;
  {
    std::lock_guard lock(mu);
    if (auto it = cache.find({p, m}); it != cache.end()) return it->second;
  }
  auto f = std::make_shared<const GaloisField>(p, m);
  std::lock_guard lock(mu);
  return cache.emplace(std::pair{p, m}, std::move(f)).first->second;
}

inline void require_same_field(const Field& a, const Field& b) {
  if (!a || !b || !a->same_as(*b))
    throw FieldMismatch("operands live over different fields");
}

/// Value type: an element together with its field.
class FieldElement {
 public:
  FieldElement(Field f, code_t c) : field_(std::move(f)), code_(c) {
    if (!field_) throw InvalidInput("null field");
    if (c >= field_->order()) throw InvalidInput("element code out of range");
  }

  static FieldElement from_coeffs(const Field& f, std::span<const int> coeffs) {
    return {f, f->from_digits(coeffs)};
  }
  static FieldElement from_int(const Field& f, long long v) { return {f, f->from_int(v)}; }
  static FieldElement zero(const Field& f) { return {f, 0}; }
  static FieldElement one(const Field& f) { return {f, 1}; }
  /// The class of x in F_p[x]/(f).
  static FieldElement generator(const Field& f) {
    if (f->degree() == 1) return {f, f->from_int(-f->modulus()[0])};
    return {f, static_cast<code_t>(f->characteristic())};
  }

  const Field& field() const noexcept { return field_; }
  code_t code() const noexcept { return code_; }
  std::vector<int> coeffs() const { return field_->digits(code_); }
  bool is_zero() const noexcept { return code_ == 0; }

  FieldElement operator+(const FieldElement& o) const {
    require_same_field(field_, o.field_);
    return {field_, field_->add(code_, o.code_)};
  }
  FieldElement operator-(const FieldElement& o) const {
    require_same_field(field_, o.field_);
    return {field_, field_->sub(code_, o.code_)};
  }
  FieldElement operator-() const { return {field_, field_->neg(code_)}; }
  FieldElement operator*(const FieldElement& o) const {
    require_same_field(field_, o.field_);
    return {field_, field_->mul(code_, o.code_)};
  }
  FieldElement operator/(const FieldElement& o) const {
    require_same_field(field_, o.field_);
    return {field_, field_->div(code_, o.code_)};
  }
  FieldElement inverse() const { return {field_, field_->inv(code_)}; }
  FieldElement pow(std::uint64_t e) const { return {field_, field_->pow(code_, e)}; }

  bool operator==(const FieldElement& o) const {
    return code_ == o.code_ && field_->same_as(*o.field_);
  }

 private:
  Field field_;
  code_t code_;
};

inline FieldElement frobenius(const FieldElement& x) {
  return {x.field(), x.field()->frobenius(x.code())};
}

/// The embedding F_{p^m} -> F_{p^{mk}} sending x to the smallest-code root of
/// the small field's modulus in the big field.
class FieldEmbedding {
 public:
  FieldEmbedding(Field from, Field to) : from_(std::move(from)), to_(std::move(to)) {
    if (from_->characteristic() != to_->characteristic() || to_->degree() % from_->degree() != 0)
      throw FieldMismatch("no embedding " + from_->name() + " -> " + to_->name());
    const auto& f = from_->modulus();
    if (from_->degree() == 1) {
      root_ = to_->from_int(-f[0]);
    } else {
      bool found = false;
      for (std::uint64_t c = 0; c < to_->order() && !found; ++c) {
        const auto r = static_cast<code_t>(c);
        code_t acc = 0;  // Horner
        for (std::size_t i = f.size(); i-- > 0;) acc = to_->add(to_->mul(acc, r), to_->from_int(f[i]));
        if (acc == 0) {
          root_ = r;
          found = true;
        }
      }
      if (!found) throw InvariantViolation("modulus has no root in the extension");
    }
    if (from_->order() <= GaloisField::kTableLimit) {
      table_.resize(from_->order());
      for (std::uint64_t c = 0; c < from_->order(); ++c) table_[c] = map_slow(static_cast<code_t>(c));
    }
  }

  const Field& source() const noexcept { return from_; }
  const Field& target() const noexcept { return to_; }
  code_t root() const noexcept { return root_; }

  code_t operator()(code_t a) const {
    if (a < static_cast<code_t>(from_->characteristic())) return a;
    if (!table_.empty()) return table_[a];
    return map_slow(a);
  }

  FieldElement operator()(const FieldElement& a) const {
    require_same_field(a.field(), from_);
    return {to_, (*this)(a.code())};
  }

 private:
  code_t map_slow(code_t a) const {
    const auto d = from_->digits(a);
    code_t acc = 0;
    for (std::size_t i = d.size(); i-- > 0;) acc = to_->add(to_->mul(acc, root_), to_->from_int(d[i]));
    return acc;
  }

  Field from_, to_;
  code_t root_ = 0;
  std::vector<code_t> table_;
};

/// Cached canonical embedding between two fields of the same characteristic.
inline std::shared_ptr<const FieldEmbedding> embedding(const Field& from, const Field& to) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int>, std::shared_ptr<const FieldEmbedding>> cache;
  const std::tuple key{from->characteristic(), from->degree(), to->degree()};
  {
    std::lock_guard lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto e = std::make_shared<const FieldEmbedding>(make_field(from->characteristic(), from->degree()),
                                                  make_field(to->characteristic(), to->degree()));
  std::lock_guard lock(mu);
  return cache.emplace(key, std::move(e)).first->second;
}

/// Result of solving c^{p+1} = a.
struct NormRoot {
  FieldElement root;  // lives in `field`
  Field field;        // smallest extension of a's field containing a solution
  bool extended;      // field differs from a's field
};

/// Multiplicative order of a nonzero element.
inline std::uint64_t multiplicative_order(const GaloisField& F, code_t a) {
  if (a == 0) throw InvalidInput("zero has no multiplicative order");
  std::uint64_t d = F.order() - 1;
  for (auto r : detail::prime_factors(F.order() - 1))
    while (d % r == 0 && F.pow(a, d / r) == 1) d /= r;
  return d;
}

/// Solves c^{p+1} = a in the smallest extension F_{p^{mk}} of a's field F_{p^m}
/// that contains a solution, returning the smallest-code solution there.
/// Extensions of order above max_order raise GuardExceeded.
inline NormRoot solve_p_plus_1_root(const FieldElement& a, std::uint64_t max_order = GaloisField::kOrderLimit) {
  if (a.is_zero()) throw InvalidInput("solve_p_plus_1_root: a must be nonzero");
  const Field& base = a.field();
  const int p = base->characteristic();
  const std::uint64_t e = static_cast<std::uint64_t>(p) + 1;
  // a is a (p+1)-th power in F_Q iff ord(a) divides (Q-1)/gcd(p+1, Q-1)
  const std::uint64_t ord = multiplicative_order(*base, a.code());
  for (int k = 1;; ++k) {
    const int deg = base->degree() * k;
    std::uint64_t order = 1;
    for (int i = 0; i < deg; ++i) {
      order *= static_cast<std::uint64_t>(p);
      if (order > GaloisField::kOrderLimit || order > max_order)
        throw GuardExceeded("solve_p_plus_1_root: a (p+1)-th root of " + base->name() + " element needs F_" +
                            std::to_string(p) + "^" + std::to_string(deg) + " or larger, beyond the cap");
    }
    if (((order - 1) / std::gcd(e, order - 1)) % ord != 0) continue;
    const Field ext = k == 1 ? base : make_field(p, deg);
    const code_t target = k == 1 ? a.code() : (*embedding(base, ext))(a.code());
    const std::uint64_t g = std::gcd(e, order - 1);
    code_t best = 0;
    bool found = false;
    if (ext->has_tables()) {
      // (p+1) t = log(target) mod (order-1); all g solutions differ by (order-1)/g
      const std::uint64_t n = order - 1, L = ext->log(target);
      const std::uint64_t n_g = n / g, e_g = (e / g) % n_g, L_g = L / g;
      std::uint64_t t0 = 0;
      if (n_g > 1) {
        // inverse of e_g modulo n_g by extended Euclid
        long long r0 = static_cast<long long>(n_g), r1 = static_cast<long long>(e_g), s0 = 0, s1 = 1;
        while (r1 != 0) {
          const long long qt = r0 / r1;
          std::tie(r0, r1) = std::pair{r1, r0 - qt * r1};
          std::tie(s0, s1) = std::pair{s1, s0 - qt * s1};
        }
        const long long inv = ((s0 % static_cast<long long>(n_g)) + static_cast<long long>(n_g)) % static_cast<long long>(n_g);
        t0 = static_cast<std::uint64_t>((static_cast<unsigned __int128>(L_g % n_g) * static_cast<std::uint64_t>(inv)) % n_g);
      }
      for (std::uint64_t j = 0; j < g; ++j) {
        const code_t c = ext->exp(t0 + j * n_g);
        if (!found || c < best) best = c;
        found = true;
      }
    } else {
      for (std::uint64_t c = 1; c < order && !found; ++c) {
        if (ext->pow(static_cast<code_t>(c), e) == target) {
          best = static_cast<code_t>(c);
          found = true;
        }
      }
    }
    if (!found) throw InvariantViolation("solve_p_plus_1_root: solvability test and search disagree");
    return NormRoot{FieldElement(ext, best), ext, k != 1};
  }
}

}  // namespace k3
