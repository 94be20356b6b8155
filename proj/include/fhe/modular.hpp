#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "fhe/error.hpp"

namespace fhe {

using BigInt = boost::multiprecision::cpp_int;
using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;
using i128 = __int128;

// ---------------------------------------------------------------------------
// Signed helpers shared by every integer width.

// Floor division for b > 0 (C++ '/' truncates toward zero).
inline BigInt floor_div(const BigInt& a, const BigInt& b) {
  BigInt q = a / b;
  if (a < 0 && q * b != a) --q;
  return q;
}
inline i128 floor_div(i128 a, i128 b) {
  i128 q = a / b;
  if (a < 0 && q * b != a) --q;
  return q;
}

// Rounds a/b to nearest with ties toward +inf, i.e. floor(a/b + 1/2), b > 0.
inline BigInt round_div(const BigInt& a, const BigInt& b) { return floor_div(2 * a + b, 2 * b); }
inline i128 round_div(i128 a, i128 b) { return floor_div(2 * a + b, 2 * b); }

// Canonical residue in [0, q).
inline BigInt mod(const BigInt& x, const BigInt& q) {
  BigInt r = x % q;
  if (r < 0) r += q;
  return r;
}
inline i64 mod(i128 x, i64 q) {
  i128 r = x % q;
  if (r < 0) r += q;
  return static_cast<i64>(r);
}

// Centered residue: [-q/2, q/2 - 1] for even q, [-(q-1)/2, (q-1)/2] for odd q.
inline BigInt centered_reduce(const BigInt& x, const BigInt& q) {
  BigInt r = mod(x, q);
  if (2 * r >= q) r -= q;
  return r;
}
inline i64 centered_reduce(i128 x, i64 q) {
  i64 r = mod(x, q);
  if (2 * static_cast<i128>(r) >= q) r -= q;
  return r;
}

// ---------------------------------------------------------------------------
// Word arithmetic (q < 2^63).

inline u64 add_mod(u64 a, u64 b, u64 q) {
  u64 s = a + b;
  return (s >= q || s < a) ? s - q : s;
}
inline u64 sub_mod(u64 a, u64 b, u64 q) { return a >= b ? a - b : a + (q - b); }
inline u64 mul_mod(u64 a, u64 b, u64 q) { return static_cast<u64>((static_cast<u128>(a) * b) % q); }

inline u64 pow_mod(u64 base, u64 exp, u64 q) {
  u64 r = 1 % q;
  base %= q;
  while (exp) {
    if (exp & 1) r = mul_mod(r, base, q);
    base = mul_mod(base, base, q);
    exp >>= 1;
  }
  return r;
}

inline BigInt pow_mod(BigInt base, BigInt exp, const BigInt& q) {
  return boost::multiprecision::powm(mod(base, q), exp, q);
}

inline BigInt gcd(const BigInt& a, const BigInt& b) { return boost::multiprecision::gcd(a, b); }

// Extended Euclid; throws NotInvertible when gcd(a, q) != 1.
inline BigInt mod_inverse(const BigInt& a, const BigInt& q) {
  require(q >= 1, ErrorCode::BadModulus, "modulus must be positive");
  BigInt r0 = q, r1 = mod(a, q), s0 = 0, s1 = 1;
  while (r1 != 0) {
    BigInt quo = r0 / r1;
    BigInt r2 = r0 - quo * r1;
    BigInt s2 = s0 - quo * s1;
    r0 = std::move(r1);
    r1 = std::move(r2);
    s0 = std::move(s1);
    s1 = std::move(s2);
  }
  if (r0 != 1) fail(ErrorCode::NotInvertible, "gcd(" + a.str() + ", " + q.str() + ") != 1");
  return mod(s0, q);
}

inline u64 mod_inverse(u64 a, u64 q) {
  require(q >= 1, ErrorCode::BadModulus, "modulus must be positive");
  i128 r0 = q, r1 = a % q, s0 = 0, s1 = 1;
  while (r1 != 0) {
    i128 quo = r0 / r1;
    i128 r2 = r0 - quo * r1;
    i128 s2 = s0 - quo * s1;
    r0 = r1;
    r1 = r2;
    s0 = s1;
    s1 = s2;
  }
  if (r0 != 1) fail(ErrorCode::NotInvertible, "gcd(" + std::to_string(a) + ", " + std::to_string(q) + ") != 1");
  return static_cast<u64>(mod(s0, static_cast<i64>(q)));
}

// ---------------------------------------------------------------------------
// Canonical/centered value pair.

struct BigIntMod {
  BigInt value;    // canonical, 0 <= value < modulus
  BigInt modulus;  // >= 2

  BigIntMod(const BigInt& v, const BigInt& q) : value(mod(v, q)), modulus(q) {
    require(q >= 2, ErrorCode::BadModulus, "modulus must be >= 2");
  }
  BigInt centered() const { return centered_reduce(value, modulus); }
  static BigIntMod from_centered(const BigInt& c, const BigInt& q) { return BigIntMod(c, q); }
};

// ---------------------------------------------------------------------------
// Primality and prime generation.

// Deterministic for all 64-bit inputs with this witness set.
inline bool is_prime(u64 n) {
  if (n < 2) return false;
  static constexpr u64 small[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  for (u64 p : small) {
    if (n % p == 0) return n == p;
  }
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (u64 a : small) {
    u64 x = pow_mod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < s; ++i) {
      x = mul_mod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

// Below 2^64 defers to the deterministic test; above uses a fixed witness count.
inline bool is_prime(const BigInt& n) {
  if (n < 2) return false;
  if (n <= BigInt(std::numeric_limits<u64>::max())) return is_prime(static_cast<u64>(n));
  static constexpr unsigned witnesses[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37,
                                           41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89};
  for (unsigned p : witnesses) {
    if (n % p == 0) return false;
  }
  BigInt d = n - 1;
  unsigned s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (unsigned a : witnesses) {
    BigInt x = boost::multiprecision::powm(BigInt(a), d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (unsigned i = 1; i < s; ++i) {
      x = (x * x) % n;
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

// Prime with exactly bit_length bits and p = residue (mod modulus).
struct PrimeSpec {
  unsigned bit_length = 0;
  u64 residue = 1;
  u64 modulus = 2;
  bool descending = false;  // search downward from 2^bits - 1 instead of upward from 2^(bits-1)
};

// Returns up to `count` distinct primes matching the PrimeSpec, skipping any listed in `exclude`.
inline std::vector<u64> gen_ntt_primes(const PrimeSpec& spec, std::size_t count,
                                       const std::vector<u64>& exclude = {}) {
  require(spec.bit_length >= 2 && spec.bit_length <= 63, ErrorCode::BadModulus, "bit length out of range");
  require(spec.modulus >= 1, ErrorCode::BadModulus, "congruence modulus must be positive");
  require(static_cast<u128>(spec.modulus) <= (static_cast<u128>(1) << spec.bit_length), ErrorCode::BadModulus,
          "congruence modulus exceeds 2^bits");
  const u64 lo = u64{1} << (spec.bit_length - 1);
  const u64 hi = (spec.bit_length == 63) ? ~u64{0} >> 1 : (u64{1} << spec.bit_length) - 1;
  const u64 r = spec.residue % spec.modulus;
  std::vector<u64> out;
  auto skip = [&](u64 p) {
    for (u64 e : exclude)
      if (e == p) return true;
    for (u64 e : out)
      if (e == p) return true;
    return false;
  };
  if (!spec.descending) {
    u64 c = lo + ((r + spec.modulus - lo % spec.modulus) % spec.modulus);
    for (; c <= hi && out.size() < count; c += spec.modulus) {
      if (is_prime(c) && !skip(c)) out.push_back(c);
      if (hi - c < spec.modulus) break;
    }
  } else {
    u64 c = hi - ((hi % spec.modulus + spec.modulus - r) % spec.modulus);
    for (; c >= lo && out.size() < count; c -= spec.modulus) {
      if (is_prime(c) && !skip(c)) out.push_back(c);
      if (c < spec.modulus) break;
    }
  }
  if (out.size() < count) fail(ErrorCode::NotFound, "not enough primes for the requested PrimeSpec");
  return out;
}

inline u64 gen_ntt_prime(const PrimeSpec& spec) { return gen_ntt_primes(spec, 1).front(); }

// Smallest candidate g^((t-1)/2n) with order exactly 2n.
inline u64 find_primitive_2nth_root(u64 t, u64 n) {
  require(n >= 1 && (n & (n - 1)) == 0, ErrorCode::BadModulus, "n must be a power of two");
  require(t > 2 && (t - 1) % (2 * n) == 0, ErrorCode::BadModulus, "t must be 1 mod 2n");
  require(is_prime(t), ErrorCode::BadModulus, "t must be prime");
  const u64 e = (t - 1) / (2 * n);
  for (u64 g = 2; g < t; ++g) {
    u64 c = pow_mod(g, e, t);
    // 2n is a power of two, so c^n = -1 forces order exactly 2n.
    if (pow_mod(c, n, t) == t - 1) return c;
  }
  fail(ErrorCode::NotFound, "no primitive 2n-th root");
}

inline u64 multiplicative_order(u64 a, u64 q) {
  u64 x = a % q;
  for (u64 k = 1; k <= q; ++k) {
    if (x == 1) return k;
    x = mul_mod(x, a, q);
  }
  return 0;
}

inline unsigned bit_length(const BigInt& x) { return x == 0 ? 0 : static_cast<unsigned>(boost::multiprecision::msb(x)) + 1; }

inline BigInt parse_bigint(const std::string& s) {
  try {
    return BigInt(s);
  } catch (const std::exception&) {
    fail(ErrorCode::IoError, "bad integer literal '" + s + "'");
  }
}

}  // namespace fhe
