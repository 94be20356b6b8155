#pragma once

// Word-size negacyclic NTT engine (Harvey lazy butterflies, Shoup twiddles).
// Used directly by the ring layer for multiplication; the public transform API
// in transform.hpp wraps it with natural slot ordering.

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "fhe/modular.hpp"

namespace fhe {

inline unsigned log2_exact(u64 n) {
  require(n >= 1 && (n & (n - 1)) == 0, ErrorCode::BadModulus, "size must be a power of two");
  unsigned l = 0;
  while ((u64{1} << l) < n) ++l;
  return l;
}

inline u64 bit_reverse(u64 x, unsigned bits) {
  u64 r = 0;
  for (unsigned i = 0; i < bits; ++i) {
    r = (r << 1) | (x & 1);
    x >>= 1;
  }
  return r;
}

inline u64 shoup_precompute(u64 w, u64 q) { return static_cast<u64>((static_cast<u128>(w) << 64) / q); }

// x * w mod q, result in [0, 2q); any x < 2^64, q < 2^62.
inline u64 mul_shoup_lazy(u64 x, u64 w, u64 w_shoup, u64 q) {
  u64 hi = static_cast<u64>((static_cast<u128>(x) * w_shoup) >> 64);
  return x * w - hi * q;
}
inline u64 mul_shoup(u64 x, u64 w, u64 w_shoup, u64 q) {
  u64 r = mul_shoup_lazy(x, w, w_shoup, q);
  return r >= q ? r - q : r;
}

class NttTables {
 public:
  // q prime, q = 1 mod 2n, q < 2^62. omega = 0 picks the smallest-generator root.
  NttTables(u64 n, u64 q, u64 omega = 0) : n_(n), q_(q), log_n_(log2_exact(n)) {
    require(q < (u64{1} << 62), ErrorCode::BadModulus, "NTT modulus must be below 2^62");
    omega_ = omega ? omega : find_primitive_2nth_root(q, n);
    require(pow_mod(omega_, n, q) == q - 1, ErrorCode::BadModulus, "omega is not a primitive 2n-th root");
    const u64 inv_omega = mod_inverse(omega_, q);
    psi_.resize(n);
    psi_shoup_.resize(n);
    ipsi_.resize(n);
    ipsi_shoup_.resize(n);
    for (u64 i = 0; i < n; ++i) {
      u64 e = bit_reverse(i, log_n_);
      psi_[i] = pow_mod(omega_, e, q);
      ipsi_[i] = pow_mod(inv_omega, e, q);
      psi_shoup_[i] = shoup_precompute(psi_[i], q);
      ipsi_shoup_[i] = shoup_precompute(ipsi_[i], q);
    }
    n_inv_ = mod_inverse(n % q, q);
    n_inv_shoup_ = shoup_precompute(n_inv_, q);
  }

  u64 n() const { return n_; }
  u64 q() const { return q_; }
  u64 omega() const { return omega_; }
  u64 n_inv() const { return n_inv_; }
  unsigned log_n() const { return log_n_; }

  // In: natural order, values < q. Out: bit-reversed order, a[k] = f(omega^(2*brv(k)+1)), values < q.
  void forward(u64* a) const {
    const u64 q = q_, two_q = 2 * q_;
    u64 t = n_;
    for (u64 m = 1; m < n_ / 2; m <<= 1) {
      t >>= 1;
      for (u64 i = 0; i < m; ++i) {
        const u64 w = psi_[m + i], ws = psi_shoup_[m + i];
        u64* x = a + 2 * i * t;
        u64* y = x + t;
        for (u64 j = 0; j < t; ++j) {
          u64 u = x[j];
          if (u >= two_q) u -= two_q;
          u64 v = mul_shoup_lazy(y[j], w, ws, q);
          x[j] = u + v;
          y[j] = u + two_q - v;
        }
      }
    }
    // Last stage pairs neighbours; fold in the final reduction.
    const u64 m = n_ / 2;
    auto reduce = [&](u64 v) {
      if (v >= two_q) v -= two_q;
      return v >= q ? v - q : v;
    };
    for (u64 i = 0; i < m; ++i) {
      const u64 w = psi_[m + i], ws = psi_shoup_[m + i];
      u64 u = a[2 * i];
      if (u >= two_q) u -= two_q;
      u64 v = mul_shoup_lazy(a[2 * i + 1], w, ws, q);
      a[2 * i] = reduce(u + v);
      a[2 * i + 1] = reduce(u + two_q - v);
    }
  }

  // In: bit-reversed order, values < 2q. Out: natural order, values < q.
  void inverse(u64* a) const {
    const u64 q = q_, two_q = 2 * q_;
    // First stage pairs neighbours.
    {
      const u64 h = n_ / 2;
      for (u64 i = 0; i < h; ++i) {
        const u64 w = ipsi_[h + i], ws = ipsi_shoup_[h + i];
        u64 u = a[2 * i], v = a[2 * i + 1];
        u64 s = u + v;
        if (s >= two_q) s -= two_q;
        a[2 * i] = s;
        a[2 * i + 1] = mul_shoup_lazy(u + two_q - v, w, ws, q);
      }
    }
    u64 t = 2;
    for (u64 m = n_ / 2; m > 1; m >>= 1) {
      const u64 h = m >> 1;
      u64 j1 = 0;
      for (u64 i = 0; i < h; ++i) {
        const u64 w = ipsi_[h + i], ws = ipsi_shoup_[h + i];
        u64* x = a + j1;
        u64* y = x + t;
        for (u64 j = 0; j < t; ++j) {
          u64 u = x[j], v = y[j];
          u64 s = u + v;
          if (s >= two_q) s -= two_q;
          x[j] = s;
          y[j] = mul_shoup_lazy(u + two_q - v, w, ws, q);
        }
        j1 += 2 * t;
      }
      t <<= 1;
    }
    for (u64 j = 0; j < n_; ++j) a[j] = mul_shoup(a[j], n_inv_, n_inv_shoup_, q);
  }

 private:
  u64 n_, q_, omega_ = 0, n_inv_ = 0, n_inv_shoup_ = 0;
  unsigned log_n_;
  std::vector<u64> psi_, psi_shoup_, ipsi_, ipsi_shoup_;
};

// Process-wide table cache; tables are immutable once built.
inline std::shared_ptr<const NttTables> ntt_tables_for(u64 n, u64 q) {
  static std::mutex mu;
  static std::map<std::pair<u64, u64>, std::shared_ptr<const NttTables>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(n, q);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto t = std::make_shared<const NttTables>(n, q);
  cache.emplace(key, t);
  return t;
}

inline bool ntt_friendly(u64 n, u64 q) {
  return q > 2 && q < (u64{1} << 62) && (q - 1) % (2 * n) == 0 && is_prime(q);
}

// Auxiliary 61-bit primes supporting transforms up to n = 2^16, used for
// exact integer convolution via CRT.
inline const std::vector<u64>& aux_ntt_primes() {
  static const std::vector<u64> primes =
      gen_ntt_primes(PrimeSpec{61, 1, u64{1} << 17, true}, 16);
  return primes;
}

// Exact negacyclic product of signed integer vectors whose true result has
// magnitude below 2^(bound_bits); reconstructs via CRT over aux primes.
inline std::vector<BigInt> exact_negacyclic_product(const std::vector<BigInt>& a, const std::vector<BigInt>& b,
                                                    unsigned bound_bits) {
  const u64 n = a.size();
  const auto& primes = aux_ntt_primes();
  std::size_t k = 0;
  unsigned bits = 0;
  while (bits < bound_bits + 2) {
    require(k < primes.size(), ErrorCode::BadModulus, "product too large for auxiliary primes");
    bits += 60;
    ++k;
  }
  std::vector<std::vector<u64>> res(k, std::vector<u64>(n));
  std::vector<u64> fa(n), fb(n);
  for (std::size_t i = 0; i < k; ++i) {
    const u64 p = primes[i];
    auto tab = ntt_tables_for(n, p);
    const BigInt P(p);
    for (u64 j = 0; j < n; ++j) {
      fa[j] = static_cast<u64>(mod(a[j], P));
      fb[j] = static_cast<u64>(mod(b[j], P));
    }
    tab->forward(fa.data());
    tab->forward(fb.data());
    for (u64 j = 0; j < n; ++j) res[i][j] = mul_mod(fa[j], fb[j], p);
    tab->inverse(res[i].data());
  }
  // Garner mixed-radix reconstruction.
  std::vector<BigInt> out(n);
  BigInt M = 1;
  for (std::size_t i = 0; i < k; ++i) M *= primes[i];
  std::vector<std::vector<u64>> inv(k, std::vector<u64>(k));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < i; ++j) inv[j][i] = mod_inverse(primes[j] % primes[i], primes[i]);
  std::vector<u64> digit(k);
  for (u64 j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < k; ++i) {
      u64 x = res[i][j];
      for (std::size_t l = 0; l < i; ++l) {
        x = sub_mod(x, digit[l] % primes[i], primes[i]);
        x = mul_mod(x, inv[l][i], primes[i]);
      }
      digit[i] = x;
    }
    BigInt v = digit[k - 1];
    for (std::size_t i = k - 1; i-- > 0;) v = v * primes[i] + digit[i];
    if (2 * v >= M) v -= M;
    out[j] = std::move(v);
  }
  return out;
}

}  // namespace fhe
