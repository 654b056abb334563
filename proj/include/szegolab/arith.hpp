#pragma once
// Exact arithmetic on prime-exponent vectors.
//
// Matrix entries downstream are looked up at ratios j/k of natural numbers,
// so naturals and positive rationals are kept in factored form: a sorted,
// duplicate-free list of (prime index, exponent) pairs with no zero
// exponents.  The factored form makes products, inverses and divisibility
// exact, and it survives far beyond the 64-bit range (index sets such as
// {3^k : k < 500} or exponent boxes {2^a 3^b : a,b <= 30} overflow machine
// integers long before they stop being interesting).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace szegolab {

using BigInt = boost::multiprecision::cpp_int;

/// Thrown when a request exceeds a configured size cap (dense-matrix caps,
/// prime-table bounds, convolution support blow-up) rather than violating a
/// mathematical precondition.
struct resource_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

// Deterministic Miller-Rabin for 64-bit inputs (the listed witness set is
// exhaustive below 3.3e24).
inline std::uint64_t mulmod_u64(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>((static_cast<__uint128_t>(a) * b) % m);
}

inline std::uint64_t powmod_u64(std::uint64_t b, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1 % m;
  b %= m;
  while (e) {
    if (e & 1) r = mulmod_u64(r, b, m);
    b = mulmod_u64(b, b, m);
    e >>= 1;
  }
  return r;
}

inline bool miller_rabin(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull,
                          23ull, 29ull, 31ull, 37ull}) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (std::uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull,
                          23ull, 29ull, 31ull, 37ull}) {
    std::uint64_t x = powmod_u64(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool witness = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod_u64(x, x, n);
      if (x == n - 1) {
        witness = false;
        break;
      }
    }
    if (witness) return false;
  }
  return true;
}

// Growable table of primes in order.  Seeded well past the first 1024
// primes; extends by re-sieving when a larger prime must be indexed.
// Guarded so factored values can be built from multiple threads.
class PrimeTable {
 public:
  static PrimeTable& instance() {
    static PrimeTable table;
    return table;
  }

  // Sieve growth cap: indexing a prime beyond this raises resource_error.
  static constexpr std::uint64_t kMaxSieve = std::uint64_t{1} << 26;

  std::uint64_t prime(std::size_t index) {
    {
      std::shared_lock lock(mutex_);
      if (index < primes_.size()) return primes_[index];
    }
    std::unique_lock lock(mutex_);
    while (index >= primes_.size()) {
      if (limit_ >= kMaxSieve)
        throw resource_error("prime table: index " + std::to_string(index) +
                             " exceeds the sieve cap");
      grow(limit_ * 2);
    }
    return primes_[index];
  }

  // Index of p in the ordered prime sequence; domain_error if p is not
  // prime, resource_error if p lies beyond the sieve cap.
  std::size_t index_of(std::uint64_t p) {
    if (p >= kMaxSieve)
      throw resource_error("prime table: " + std::to_string(p) +
                           " exceeds the sieve cap " + std::to_string(kMaxSieve));
    {
      std::shared_lock lock(mutex_);
      if (p < limit_) return index_in_table(p);
    }
    std::unique_lock lock(mutex_);
    while (p >= limit_) grow(std::min(kMaxSieve, std::max(limit_ * 2, p + 1)));
    return index_in_table(p);
  }

 private:
  PrimeTable() { grow(std::uint64_t{1} << 14); }  // 1900 primes > the 1024 seed

  // Requires mutex_ held (shared suffices; primes_ is immutable once grown).
  std::size_t index_in_table(std::uint64_t p) const {
    auto it = std::lower_bound(primes_.begin(), primes_.end(), p);
    if (it == primes_.end() || *it != p)
      throw std::domain_error("prime table: " + std::to_string(p) +
                              " is not prime");
    return static_cast<std::size_t>(it - primes_.begin());
  }

  // Requires mutex_ held exclusively.
  void grow(std::uint64_t new_limit) {
    new_limit = std::min(new_limit, kMaxSieve);
    std::vector<bool> composite(new_limit, false);
    std::vector<std::uint64_t> primes;
    for (std::uint64_t i = 2; i < new_limit; ++i) {
      if (composite[i]) continue;
      primes.push_back(i);
      for (std::uint64_t j = i * i; j < new_limit; j += i) composite[j] = true;
    }
    primes_ = std::move(primes);
    limit_ = new_limit;
  }

  std::uint64_t limit_ = 0;
  std::vector<std::uint64_t> primes_;
  mutable std::shared_mutex mutex_;
};

}  // namespace detail

/// p_0 = 2, p_1 = 3, p_2 = 5, ...
inline std::uint64_t prime(std::size_t index) {
  return detail::PrimeTable::instance().prime(index);
}

/// Inverse of prime(): the position of p in the prime sequence.
inline std::size_t prime_index_of(std::uint64_t p) {
  return detail::PrimeTable::instance().index_of(p);
}

struct PrimePower {
  std::uint32_t prime_index = 0;
  std::int32_t exponent = 0;

  friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

/// Positive rational in factored form: q = prod p_i^{e_i}, stored as pairs
/// (prime index, exponent) sorted by prime index, all exponents nonzero.
/// The default-constructed value is 1 (empty product).
class FactoredRational {
 public:
  FactoredRational() = default;

  explicit FactoredRational(std::vector<PrimePower> powers)
      : powers_(std::move(powers)) {
    normalize();
  }

  static FactoredRational one() { return FactoredRational{}; }

  bool is_one() const { return powers_.empty(); }
  bool is_natural() const {
    return std::all_of(powers_.begin(), powers_.end(),
                       [](const PrimePower& pp) { return pp.exponent > 0; });
  }

  const std::vector<PrimePower>& powers() const { return powers_; }

  /// Exponent of the prime with the given index (0 when absent).
  std::int32_t exponent_of(std::uint32_t prime_index) const {
    auto it = std::lower_bound(
        powers_.begin(), powers_.end(), prime_index,
        [](const PrimePower& pp, std::uint32_t i) { return pp.prime_index < i; });
    return (it != powers_.end() && it->prime_index == prime_index) ? it->exponent
                                                                   : 0;
  }

  FactoredRational inverse() const {
    std::vector<PrimePower> inv(powers_);
    for (auto& pp : inv) pp.exponent = -pp.exponent;
    FactoredRational r;
    r.powers_ = std::move(inv);  // stays sorted and zero-free
    return r;
  }

  FactoredRational pow(std::int32_t e) const {
    if (e == 0) return one();
    std::vector<PrimePower> out(powers_);
    for (auto& pp : out) {
      std::int64_t prod = static_cast<std::int64_t>(pp.exponent) * e;
      pp.exponent = checked_exponent(prod);
    }
    FactoredRational r;
    r.powers_ = std::move(out);
    return r;
  }

  friend FactoredRational operator*(const FactoredRational& a,
                                    const FactoredRational& b) {
    std::vector<PrimePower> out;
    out.reserve(a.powers_.size() + b.powers_.size());
    auto ia = a.powers_.begin(), ib = b.powers_.begin();
    while (ia != a.powers_.end() || ib != b.powers_.end()) {
      if (ib == b.powers_.end() ||
          (ia != a.powers_.end() && ia->prime_index < ib->prime_index)) {
        out.push_back(*ia++);
      } else if (ia == a.powers_.end() || ib->prime_index < ia->prime_index) {
        out.push_back(*ib++);
      } else {
        std::int64_t e =
            static_cast<std::int64_t>(ia->exponent) + ib->exponent;
        if (e != 0) out.push_back({ia->prime_index, checked_exponent(e)});
        ++ia;
        ++ib;
      }
    }
    FactoredRational r;
    r.powers_ = std::move(out);
    return r;
  }

  BigInt numerator() const { return signed_part(+1); }
  BigInt denominator() const { return signed_part(-1); }

  /// Natural logarithm of the represented value (floating approximation).
  double log_value() const {
    double s = 0.0;
    for (const auto& pp : powers_)
      s += static_cast<double>(pp.exponent) *
           std::log(static_cast<double>(prime(pp.prime_index)));
    return s;
  }

  std::string str() const {
    if (powers_.empty()) return "1";
    BigInt num = numerator(), den = denominator();
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
  }

  friend bool operator==(const FactoredRational&,
                         const FactoredRational&) = default;

  /// Canonical (exponent-lexicographic) strict order: a deterministic map-key
  /// order, not the numeric one.  Use numeric_less() for value order.
  friend bool operator<(const FactoredRational& a, const FactoredRational& b) {
    return std::lexicographical_compare(
        a.powers_.begin(), a.powers_.end(), b.powers_.begin(), b.powers_.end(),
        [](const PrimePower& x, const PrimePower& y) {
          if (x.prime_index != y.prime_index) return x.prime_index < y.prime_index;
          return x.exponent < y.exponent;
        });
  }

  std::size_t hash() const {
    std::size_t h = 0xcbf29ce484222325ull;
    for (const auto& pp : powers_) {
      h = (h ^ pp.prime_index) * 0x100000001b3ull;
      h = (h ^ static_cast<std::uint32_t>(pp.exponent)) * 0x100000001b3ull;
    }
    return h;
  }

 private:
  static std::int32_t checked_exponent(std::int64_t e) {
    if (e < std::numeric_limits<std::int32_t>::min() ||
        e > std::numeric_limits<std::int32_t>::max())
      throw resource_error("factored rational: exponent overflow");
    return static_cast<std::int32_t>(e);
  }

  BigInt signed_part(int sign) const {
    BigInt v = 1;
    for (const auto& pp : powers_) {
      if ((sign > 0) != (pp.exponent > 0)) continue;
      std::uint32_t e = static_cast<std::uint32_t>(
          pp.exponent > 0 ? pp.exponent : -static_cast<std::int64_t>(pp.exponent));
      v *= boost::multiprecision::pow(BigInt(prime(pp.prime_index)), e);
    }
    return v;
  }

  void normalize() {
    std::sort(powers_.begin(), powers_.end(),
              [](const PrimePower& a, const PrimePower& b) {
                return a.prime_index < b.prime_index;
              });
    std::vector<PrimePower> out;
    out.reserve(powers_.size());
    for (const auto& pp : powers_) {
      if (pp.exponent == 0) continue;
      if (!out.empty() && out.back().prime_index == pp.prime_index) {
        std::int64_t e =
            static_cast<std::int64_t>(out.back().exponent) + pp.exponent;
        if (e == 0)
          out.pop_back();
        else
          out.back().exponent = checked_exponent(e);
      } else {
        out.push_back(pp);
      }
    }
    powers_ = std::move(out);
  }

  std::vector<PrimePower> powers_;
};

/// Numeric (value) order.  Fast path compares logarithms; near-ties fall
/// back to exact big-integer cross multiplication.
inline bool numeric_less(const FactoredRational& a, const FactoredRational& b) {
  if (a == b) return false;
  double la = a.log_value(), lb = b.log_value();
  double margin = 1e-6 * (1.0 + std::abs(la) + std::abs(lb));
  if (std::abs(la - lb) > margin) return la < lb;
  return a.numerator() * b.denominator() < b.numerator() * a.denominator();
}

/// Natural number in factored form (all exponents positive); 1 is the empty
/// product.
class FactoredNatural {
 public:
  FactoredNatural() = default;

  explicit FactoredNatural(FactoredRational r) : rat_(std::move(r)) {
    if (!rat_.is_natural())
      throw std::domain_error("factored natural: value " + rat_.str() +
                              " is not a natural number");
  }

  static FactoredNatural one() { return FactoredNatural{}; }

  const FactoredRational& as_rational() const { return rat_; }
  const std::vector<PrimePower>& powers() const { return rat_.powers(); }
  bool is_one() const { return rat_.is_one(); }

  BigInt value() const { return rat_.numerator(); }

  /// The value as a machine integer; domain_error beyond 64 bits.
  std::uint64_t value_u64() const {
    BigInt v = value();
    if (v > std::numeric_limits<std::uint64_t>::max())
      throw std::domain_error("factored natural: " + rat_.str() +
                              " exceeds 64 bits");
    return static_cast<std::uint64_t>(v);
  }

  double log_value() const { return rat_.log_value(); }
  std::string str() const { return rat_.str(); }

  friend FactoredNatural operator*(const FactoredNatural& a,
                                   const FactoredNatural& b) {
    return FactoredNatural(a.rat_ * b.rat_);
  }

  friend bool operator==(const FactoredNatural&,
                         const FactoredNatural&) = default;
  friend bool operator<(const FactoredNatural& a, const FactoredNatural& b) {
    return a.rat_ < b.rat_;
  }

  std::size_t hash() const { return rat_.hash(); }

 private:
  FactoredRational rat_;
};

inline bool numeric_less(const FactoredNatural& a, const FactoredNatural& b) {
  return numeric_less(a.as_rational(), b.as_rational());
}

/// Prime factorization of n >= 1.  Trial division over the prime table with
/// a deterministic Miller-Rabin shortcut once the remaining cofactor has no
/// divisor among the first 1024 primes.
inline FactoredNatural factor(std::uint64_t n) {
  if (n == 0) throw std::domain_error("factor: 0 has no prime factorization");
  constexpr std::size_t kSeedPrimes = 1024;
  std::vector<PrimePower> powers;
  std::uint64_t m = n;
  bool cofactor_tested = false;
  for (std::size_t i = 0; m > 1; ++i) {
    if (i >= kSeedPrimes && !cofactor_tested) {
      cofactor_tested = true;
      if (detail::miller_rabin(m)) {
        powers.push_back(
            {static_cast<std::uint32_t>(prime_index_of(m)), 1});
        m = 1;
        break;
      }
    }
    const std::uint64_t p = prime(i);
    if (p > m / p) {  // p^2 > m: the cofactor is prime
      powers.push_back({static_cast<std::uint32_t>(prime_index_of(m)), 1});
      m = 1;
      break;
    }
    if (m % p == 0) {
      std::int32_t e = 0;
      do {
        m /= p;
        ++e;
      } while (m % p == 0);
      powers.push_back({static_cast<std::uint32_t>(i), e});
      cofactor_tested = false;  // new cofactor: retest before further division
    }
  }
  return FactoredNatural(FactoredRational(std::move(powers)));
}

/// The ratio j/k in lowest terms.
inline FactoredRational ratio(const FactoredNatural& j, const FactoredNatural& k) {
  return j.as_rational() * k.as_rational().inverse();
}

/// n * q when that is a natural number; empty otherwise (q may be rational).
inline bool try_multiply(const FactoredNatural& n, const FactoredRational& q,
                         FactoredNatural& out) {
  FactoredRational r = n.as_rational() * q;
  if (!r.is_natural()) return false;
  out = FactoredNatural(std::move(r));
  return true;
}

/// Divisor-function table: d_order(n) for n = 1..n_max (index 0 unused).
/// d_1 = 1 everywhere; each further order is one Dirichlet convolution with
/// the constant-1 sequence, so d_m(n) counts ordered m-tuples with product n.
inline std::vector<std::uint64_t> divisor_table(int order, std::size_t n_max) {
  if (order < 1) throw std::domain_error("divisor_table: order must be >= 1");
  if (n_max < 1) throw std::domain_error("divisor_table: empty range");
  std::vector<std::uint64_t> d(n_max + 1, 1);
  d[0] = 0;
  for (int m = 1; m < order; ++m) {
    std::vector<std::uint64_t> next(n_max + 1, 0);
    for (std::size_t i = 1; i <= n_max; ++i)
      for (std::size_t j = i; j <= n_max; j += i) next[j] += d[i];
    d = std::move(next);
  }
  return d;
}

}  // namespace szegolab

template <>
struct std::hash<szegolab::FactoredRational> {
  std::size_t operator()(const szegolab::FactoredRational& r) const {
    return r.hash();
  }
};

template <>
struct std::hash<szegolab::FactoredNatural> {
  std::size_t operator()(const szegolab::FactoredNatural& n) const {
    return n.hash();
  }
};
