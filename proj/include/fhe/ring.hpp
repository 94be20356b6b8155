#pragma once

// Negacyclic ring Z_q[X]/(X^n + 1) with arbitrary-precision coefficients,
// plus the seeded PRNG and samplers every scheme draws from.

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fhe/modular.hpp"
#include "fhe/ntt_engine.hpp"

namespace fhe {

struct RingParams {
  std::size_t n = 0;
  BigInt q;

  RingParams() = default;
  RingParams(std::size_t n_, BigInt q_) : n(n_), q(std::move(q_)) {
    require(n >= 1 && (n & (n - 1)) == 0, ErrorCode::BadModulus, "ring degree must be a power of two");
    require(q >= 2, ErrorCode::BadModulus, "modulus must be >= 2");
  }
  bool operator==(const RingParams& o) const { return n == o.n && q == o.q; }
  bool operator!=(const RingParams& o) const { return !(*this == o); }
};

enum class Form { Coefficient, Evaluation };

struct RingPoly {
  RingParams params;
  std::vector<BigInt> coeffs;  // canonical residues, index 0 = constant term
  Form form = Form::Coefficient;

  RingPoly() = default;
  explicit RingPoly(const RingParams& p) : params(p), coeffs(p.n, BigInt(0)) {}

  static RingPoly zero(const RingParams& p) { return RingPoly(p); }

  template <class T>
  static RingPoly from_ints(const RingParams& p, const std::vector<T>& v) {
    require(v.size() == p.n, ErrorCode::LengthMismatch, "coefficient count must equal n");
    RingPoly f(p);
    for (std::size_t i = 0; i < p.n; ++i) f.coeffs[i] = mod(BigInt(v[i]), p.q);
    return f;
  }

  static RingPoly constant(const RingParams& p, const BigInt& c) {
    RingPoly f(p);
    f.coeffs[0] = mod(c, p.q);
    return f;
  }

  std::size_t n() const { return params.n; }
  const BigInt& q() const { return params.q; }

  std::vector<BigInt> centered() const {
    std::vector<BigInt> out(coeffs.size());
    for (std::size_t i = 0; i < coeffs.size(); ++i) out[i] = centered_reduce(coeffs[i], params.q);
    return out;
  }

  std::vector<i64> centered_i64() const {
    std::vector<i64> out(coeffs.size());
    for (std::size_t i = 0; i < coeffs.size(); ++i) out[i] = static_cast<i64>(centered_reduce(coeffs[i], params.q));
    return out;
  }

  // Max |c| over centered coefficients.
  BigInt infinity_norm() const {
    BigInt m = 0;
    for (const auto& c : coeffs) {
      BigInt v = abs(centered_reduce(c, params.q));
      if (v > m) m = v;
    }
    return m;
  }

  bool is_zero() const {
    for (const auto& c : coeffs)
      if (c != 0) return false;
    return true;
  }

  bool operator==(const RingPoly& o) const { return params == o.params && form == o.form && coeffs == o.coeffs; }
  bool operator!=(const RingPoly& o) const { return !(*this == o); }
};

inline void require_compatible(const RingPoly& a, const RingPoly& b) {
  require(a.params == b.params, ErrorCode::ParamMismatch, "ring parameters differ");
  require(a.form == b.form, ErrorCode::ParamMismatch, "polynomial forms differ");
}

inline RingPoly poly_add(const RingPoly& a, const RingPoly& b) {
  require_compatible(a, b);
  RingPoly r = a;
  for (std::size_t i = 0; i < r.coeffs.size(); ++i) {
    r.coeffs[i] += b.coeffs[i];
    if (r.coeffs[i] >= r.params.q) r.coeffs[i] -= r.params.q;
  }
  return r;
}

inline RingPoly poly_sub(const RingPoly& a, const RingPoly& b) {
  require_compatible(a, b);
  RingPoly r = a;
  for (std::size_t i = 0; i < r.coeffs.size(); ++i) {
    r.coeffs[i] -= b.coeffs[i];
    if (r.coeffs[i] < 0) r.coeffs[i] += r.params.q;
  }
  return r;
}

inline RingPoly poly_neg(const RingPoly& a) {
  RingPoly r = a;
  for (auto& c : r.coeffs)
    if (c != 0) c = r.params.q - c;
  return r;
}

inline RingPoly poly_scalar_mul(const RingPoly& a, const BigInt& s) {
  RingPoly r = a;
  const BigInt sm = mod(s, a.params.q);
  for (auto& c : r.coeffs) c = (c * sm) % r.params.q;
  return r;
}

enum class MulPath { Auto, Schoolbook, Ntt };

inline std::vector<BigInt> negacyclic_schoolbook(const std::vector<BigInt>& a, const std::vector<BigInt>& b) {
  const std::size_t n = a.size();
  std::vector<BigInt> r(n, BigInt(0));
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] == 0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t k = i + j;
      if (k < n)
        r[k] += a[i] * b[j];
      else
        r[k - n] -= a[i] * b[j];
    }
  }
  return r;
}

// Word-size helpers used by the transform tests and the TFHE engine.
inline std::vector<u64> negacyclic_schoolbook_u64(const std::vector<u64>& a, const std::vector<u64>& b, u64 q) {
  const std::size_t n = a.size();
  std::vector<u64> r(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      u64 p = mul_mod(a[i], b[j], q);
      std::size_t k = i + j;
      if (k < n)
        r[k] = add_mod(r[k], p, q);
      else
        r[k - n] = sub_mod(r[k - n], p, q);
    }
  return r;
}

inline std::vector<u64> negacyclic_ntt_u64(std::vector<u64> a, std::vector<u64> b, const NttTables& tab) {
  tab.forward(a.data());
  tab.forward(b.data());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = mul_mod(a[i], b[i], tab.q());
  tab.inverse(a.data());
  return a;
}

inline bool fits_word(const BigInt& q) { return q < (BigInt(1) << 62); }

inline RingPoly poly_negacyclic_mul(const RingPoly& a, const RingPoly& b, MulPath path = MulPath::Auto) {
  require_compatible(a, b);
  const RingParams& p = a.params;
  RingPoly r(p);
  r.form = a.form;
  if (a.form == Form::Evaluation) {
    for (std::size_t i = 0; i < p.n; ++i) r.coeffs[i] = (a.coeffs[i] * b.coeffs[i]) % p.q;
    return r;
  }
  const bool word_ntt = fits_word(p.q) && ntt_friendly(p.n, static_cast<u64>(p.q));
  if (path == MulPath::Auto) path = (p.n <= 32 && !word_ntt) ? MulPath::Schoolbook : MulPath::Ntt;
  if (path == MulPath::Schoolbook) {
    auto prod = negacyclic_schoolbook(a.centered(), b.centered());
    for (std::size_t i = 0; i < p.n; ++i) r.coeffs[i] = mod(prod[i], p.q);
    return r;
  }
  if (word_ntt) {
    const u64 q = static_cast<u64>(p.q);
    std::vector<u64> x(p.n), y(p.n);
    for (std::size_t i = 0; i < p.n; ++i) {
      x[i] = static_cast<u64>(a.coeffs[i]);
      y[i] = static_cast<u64>(b.coeffs[i]);
    }
    auto z = negacyclic_ntt_u64(std::move(x), std::move(y), *ntt_tables_for(p.n, q));
    for (std::size_t i = 0; i < p.n; ++i) r.coeffs[i] = z[i];
    return r;
  }
  const unsigned qb = bit_length(p.q);
  const unsigned bound = 2 * qb + log2_exact(p.n) + 1;
  auto prod = exact_negacyclic_product(a.centered(), b.centered(), bound);
  for (std::size_t i = 0; i < p.n; ++i) r.coeffs[i] = mod(prod[i], p.q);
  return r;
}

// Reduces a polynomial of any degree by X^n = -1 and mod q.
template <class T>
RingPoly reduce_negacyclic(const RingParams& p, const std::vector<T>& big) {
  RingPoly r(p);
  for (std::size_t i = 0; i < big.size(); ++i) {
    const std::size_t wraps = i / p.n;
    BigInt c = BigInt(big[i]);
    r.coeffs[i % p.n] += (wraps % 2 == 0) ? c : BigInt(-c);
  }
  for (auto& c : r.coeffs) c = mod(c, p.q);
  return r;
}

// f * X^e for any integer e; crossing the X^n boundary negates.
inline RingPoly mul_monomial(const RingPoly& f, i64 e) {
  const i64 n = static_cast<i64>(f.params.n);
  const i64 two_n = 2 * n;
  i64 s = ((e % two_n) + two_n) % two_n;
  RingPoly r(f.params);
  for (i64 i = 0; i < n; ++i) {
    i64 j = i + s;
    bool neg = false;
    if (j >= n) {
      j -= n;
      neg = !neg;
    }
    if (j >= n) {
      j -= n;
      neg = !neg;
    }
    const BigInt& c = f.coeffs[static_cast<std::size_t>(i)];
    r.coeffs[static_cast<std::size_t>(j)] = (neg && c != 0) ? f.params.q - c : c;
  }
  return r;
}

// Left rotation by h positions: f * X^(-h).
inline RingPoly rotate_coeffs(const RingPoly& f, i64 h) { return mul_monomial(f, -h); }

// f(X^k) reduced mod X^n + 1; k must be odd.
inline RingPoly apply_automorphism(const RingPoly& f, i64 k) {
  require(k % 2 != 0, ErrorCode::BadExponent, "automorphism exponent must be odd");
  const i64 n = static_cast<i64>(f.params.n), two_n = 2 * n;
  const i64 kk = ((k % two_n) + two_n) % two_n;
  RingPoly r(f.params);
  for (i64 i = 0; i < n; ++i) {
    i64 e = (i * kk) % two_n;
    const BigInt& c = f.coeffs[static_cast<std::size_t>(i)];
    if (e < n)
      r.coeffs[static_cast<std::size_t>(e)] = c;
    else
      r.coeffs[static_cast<std::size_t>(e - n)] = c == 0 ? BigInt(0) : f.params.q - c;
  }
  return r;
}

// Reinterpret centered coefficients modulo a different modulus.
inline RingPoly poly_lift(const RingPoly& f, const BigInt& new_q) {
  RingPoly r(RingParams(f.params.n, new_q));
  for (std::size_t i = 0; i < f.params.n; ++i) r.coeffs[i] = mod(centered_reduce(f.coeffs[i], f.params.q), new_q);
  return r;
}

// Coefficients round(c * num / den) on centered values, then mod new_q.
inline RingPoly poly_rescale(const RingPoly& f, const BigInt& num, const BigInt& den, const BigInt& new_q) {
  RingPoly r(RingParams(f.params.n, new_q));
  for (std::size_t i = 0; i < f.params.n; ++i)
    r.coeffs[i] = mod(round_div(centered_reduce(f.coeffs[i], f.params.q) * num, den), new_q);
  return r;
}

// ---------------------------------------------------------------------------
// Randomness.

// Deterministic stream keyed by arbitrary seed bytes.
class Prng {
 public:
  explicit Prng(std::span<const std::uint8_t> seed) { reseed(seed); }
  explicit Prng(u64 seed) {
    std::array<std::uint8_t, 8> b{};
    for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(seed >> (8 * i));
    reseed(b);
  }
  explicit Prng(const std::string& seed)
      : Prng(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(seed.data()), seed.size())) {}

  u64 next_u64() { return gen_(); }

  u64 uniform_u64(u64 bound) { return std::uniform_int_distribution<u64>(0, bound - 1)(gen_); }

  BigInt uniform(const BigInt& bound) {
    if (fits_word(bound)) return BigInt(uniform_u64(static_cast<u64>(bound)));
    const unsigned bits = bit_length(bound);
    const unsigned words = (bits + 63) / 64;
    const BigInt mask = (BigInt(1) << bits) - 1;
    for (;;) {
      BigInt x = 0;
      for (unsigned w = 0; w < words; ++w) x = (x << 64) | BigInt(gen_());
      x &= mask;
      if (x < bound) return x;
    }
  }

  double normal(double sigma) { return std::normal_distribution<double>(0.0, sigma)(gen_); }

  std::array<std::uint8_t, 32> seed_bytes() {
    std::array<std::uint8_t, 32> s{};
    for (int i = 0; i < 4; ++i) {
      u64 w = gen_();
      for (int j = 0; j < 8; ++j) s[8 * i + j] = static_cast<std::uint8_t>(w >> (8 * j));
    }
    return s;
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  void reseed(std::span<const std::uint8_t> seed) {
    require(!seed.empty(), ErrorCode::IoError, "seed must be nonempty");
    std::vector<std::uint32_t> words(seed.begin(), seed.end());
    words.push_back(static_cast<std::uint32_t>(seed.size()));
    std::seed_seq sq(words.begin(), words.end());
    gen_.seed(sq);
  }
  std::mt19937_64 gen_;
};

// Rounded continuous Gaussian, rejected outside [-bound, bound].
struct NoiseSampler {
  double sigma = 3.2;
  i64 bound = 20;

  NoiseSampler() = default;
  explicit NoiseSampler(double s) : sigma(s), bound(static_cast<i64>(std::ceil(6.0 * s))) {}
  NoiseSampler(double s, i64 b) : sigma(s), bound(b) {}

  i64 sample(Prng& rng) const {
    if (sigma <= 0.0) return 0;
    for (;;) {
      double x = std::round(rng.normal(sigma));
      if (std::fabs(x) <= static_cast<double>(bound)) return static_cast<i64>(x);
    }
  }
};

enum class SampleKind { Uniform, Ternary, Binary, Gaussian };

inline std::vector<i64> sample_small(SampleKind kind, std::size_t n, const NoiseSampler& sampler, Prng& rng) {
  std::vector<i64> v(n);
  for (auto& x : v) {
    switch (kind) {
      case SampleKind::Ternary: x = static_cast<i64>(rng.uniform_u64(3)) - 1; break;
      case SampleKind::Binary: x = static_cast<i64>(rng.uniform_u64(2)); break;
      case SampleKind::Gaussian: x = sampler.sample(rng); break;
      case SampleKind::Uniform: fail(ErrorCode::ParamMismatch, "uniform sampling needs a modulus");
    }
  }
  return v;
}

inline RingPoly sample_poly(SampleKind kind, const RingParams& params, const NoiseSampler& sampler, Prng& rng) {
  if (kind == SampleKind::Uniform) {
    RingPoly f(params);
    for (auto& c : f.coeffs) c = rng.uniform(params.q);
    return f;
  }
  return RingPoly::from_ints(params, sample_small(kind, params.n, sampler, rng));
}

inline RingPoly sample_poly(SampleKind kind, const RingParams& params, const NoiseSampler& sampler,
                            std::span<const std::uint8_t> seed) {
  Prng rng(seed);
  return sample_poly(kind, params, sampler, rng);
}

}  // namespace fhe
