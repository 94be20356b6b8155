#pragma once

// TFHE over the generic GLWE layer: lookup tables, sample extraction, blind
// rotation, programmable bootstrapping and tensor-based LWE multiplication.
// LWE ciphertexts are GlweCiphertext with n = 1 under the Plus convention.
// The word-sized engine in tfhe_engine.hpp runs the same algorithms fast.

#include <functional>
#include <vector>

#include "fhe/glwe.hpp"

namespace fhe {

// ---------------------------------------------------------------------------
// Lookup tables.

struct Lut {
  std::vector<i64> v;       // coefficients of V, centered mod t
  u64 t = 8;
  std::size_t n = 0;        // ring degree
  u64 delta_hat = 0;        // 2n / t: positions per plaintext value
  i64 offset = 0;           // phase window of m starts at m * delta_hat - offset
  i64 domain_lo = 0;
  std::size_t domain_size = 0;
};

// Coefficient j of V holds f(m) for phases j in the window of m; phases past
// n land negated on j - n. f must cover at most t/2 contiguous inputs.
inline Lut build_lut(const std::function<i64(i64)>& f, i64 domain_lo, std::size_t domain_size, std::size_t n, u64 t,
                     i64 offset = 0) {
  require(t >= 2 && (2 * n) % t == 0, ErrorCode::BadModulus, "t must divide 2n");
  require(2 * domain_size <= t, ErrorCode::DomainTooLarge, "a negacyclic table covers at most t/2 inputs");
  Lut lut{std::vector<i64>(n, 0), t, n, 2 * n / t, offset, domain_lo, domain_size};
  const i64 two_n = static_cast<i64>(2 * n), dh = static_cast<i64>(lut.delta_hat);
  for (i64 m = domain_lo; m < domain_lo + static_cast<i64>(domain_size); ++m) {
    const i64 val = centered_reduce(static_cast<i128>(f(m)), static_cast<i64>(t));
    for (i64 p = m * dh - offset; p < (m + 1) * dh - offset; ++p) {
      const i64 r = mod(static_cast<i128>(p), two_n);
      if (r < static_cast<i64>(n))
        lut.v[static_cast<std::size_t>(r)] = val;
      else
        lut.v[static_cast<std::size_t>(r) - n] = centered_reduce(static_cast<i128>(-val), static_cast<i64>(t));
    }
  }
  return lut;
}

inline Lut identity_lut(std::size_t n, u64 t, i64 domain_lo = 0, i64 offset = 0) {
  return build_lut([](i64 m) { return m; }, domain_lo, t / 2, n, t, offset);
}

inline Lut constant_lut(i64 c, std::size_t n, u64 t) {
  return build_lut([c](i64) { return c; }, 0, t / 2, n, t, 0);
}

// All-ones table: nonnegative phases give +1, negative phases -1.
inline Lut gate_lut(std::size_t n, u64 t) { return constant_lut(1, n, t); }

// V * X^(-r): the plaintext the accumulator holds after rotating by r.
inline std::vector<i64> lut_rotated(const Lut& lut, i64 r) {
  const i64 n = static_cast<i64>(lut.n);
  std::vector<i64> out(lut.n);
  for (i64 j = 0; j < n; ++j) {
    i64 src = mod(static_cast<i128>(j) + r, 2 * n);
    i64 val = src < n ? lut.v[static_cast<std::size_t>(src)] : -lut.v[static_cast<std::size_t>(src - n)];
    out[static_cast<std::size_t>(j)] = centered_reduce(static_cast<i128>(val), static_cast<i64>(lut.t));
  }
  return out;
}

// Unencrypted replay of blind rotation: the net exponent b - sum(a_i s_i)
// over Z_2n, and the table it selects.
inline i64 shadow_rotation(const std::vector<i64>& switched, const std::vector<i64>& key, std::size_t n) {
  require(switched.size() == key.size() + 1, ErrorCode::KeyMismatch, "switched ciphertext length differs from key");
  i128 r = switched.back();
  for (std::size_t i = 0; i < key.size(); ++i) r -= static_cast<i128>(switched[i]) * key[i];
  return mod(r, static_cast<i64>(2 * n));
}

// ---------------------------------------------------------------------------
// LWE helpers over the generic layer.

inline GlweParams lwe_params(std::size_t dim, const BigInt& q, const BigInt& t, double sigma) {
  return GlweParams::message_scaled(dim, 1, q, t, Sign::Plus, sigma, true);
}

// Coefficient h of a GLWE ciphertext as an LWE ciphertext under the flattened key.
inline GlweCiphertext sample_extract(const GlweCiphertext& ct, std::size_t h) {
  const std::size_t n = ct.params().n;
  require(h < n, ErrorCode::IndexOutOfRange, "extraction index must be below n");
  const RingParams one(1, ct.params().q);
  GlweCiphertext out;
  out.sign = ct.sign;
  for (std::size_t i = 0; i < ct.k(); ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      BigInt c = j <= h ? ct.a[i].coeffs[h - j] : BigInt(-ct.a[i].coeffs[n + h - j]);
      out.a.push_back(RingPoly::constant(one, c));
    }
  }
  out.b = RingPoly::constant(one, ct.b.coeffs[h]);
  return out;
}

// The LWE key seen by extracted ciphertexts.
inline SecretKey extracted_key(const SecretKey& sk) {
  SecretKey out;
  out.binary = sk.binary;
  for (i64 c : sk.flattened()) out.s.push_back({c});
  return out;
}

// Rounds every component to Z_2n, canonical in [0, 2n).
inline std::vector<i64> mod_switch_to_2n(const GlweCiphertext& lwe, std::size_t n) {
  const BigInt two_n(2 * n), q = lwe.params().q;
  std::vector<i64> out;
  for (const auto& a : lwe.a) out.push_back(static_cast<i64>(mod(round_div(a.coeffs[0] * two_n, q), two_n)));
  out.push_back(static_cast<i64>(mod(round_div(lwe.b.coeffs[0] * two_n, q), two_n)));
  return out;
}

// ---------------------------------------------------------------------------
// Bootstrapping over the generic layer.

struct GenericBootstrapKey {
  GlweParams lwe;   // input/output LWE parameters
  GlweParams ring;  // accumulator GLWE parameters (k = 1)
  std::vector<GgswCiphertext> bits;  // GGSW(s_i) under the ring key
  KeySwitchKey ksk;                  // extracted key back to the LWE key
};

inline GenericBootstrapKey generic_bootstrap_keygen(const SecretKey& lwe_sk, const GlweParams& lwe,
                                                    const SecretKey& ring_sk, const GlweParams& ring,
                                                    const GadgetSpec& bsk_gadget, const GadgetSpec& ks_gadget,
                                                    Prng& rng) {
  require(lwe.sign == Sign::Plus && ring.sign == Sign::Plus, ErrorCode::ParamMismatch, "bootstrapping uses the plus sign");
  GenericBootstrapKey bk{lwe, ring, {}, {}};
  for (const auto& s : lwe_sk.s) bk.bits.push_back(ggsw_encrypt(RingPoly::constant(ring.ring, s[0]), ring_sk, ring, bsk_gadget, rng));
  bk.ksk = keyswitch_keygen(extracted_key(ring_sk), lwe_sk, lwe, ks_gadget, rng);
  return bk;
}

// Accumulator holding Delta * V * X^-(b - sum a_i s_i).
inline GlweCiphertext blind_rotate(const Lut& lut, const std::vector<i64>& switched, const GenericBootstrapKey& bk) {
  require(switched.size() == bk.bits.size() + 1, ErrorCode::KeyMismatch, "bootstrapping key size differs from LWE dimension");
  require(lut.n == bk.ring.ring.n, ErrorCode::ParamMismatch, "table degree differs from ring degree");
  RingPoly v(bk.ring.ring);
  for (std::size_t j = 0; j < lut.n; ++j) v.coeffs[j] = mod(BigInt(lut.v[j]) * bk.ring.delta, bk.ring.ring.q);
  GlweCiphertext acc = trivial_ciphertext(mul_monomial(v, -switched.back()), bk.ring.k, Sign::Plus);
  for (std::size_t i = 0; i < bk.bits.size(); ++i) {
    if (switched[i] == 0) continue;
    acc = cmux(bk.bits[i], acc, mul_monomial_ct(acc, switched[i]));
  }
  return acc;
}

inline GlweCiphertext bootstrap(const GlweCiphertext& lwe, const Lut& lut, const GenericBootstrapKey& bk) {
  auto acc = blind_rotate(lut, mod_switch_to_2n(lwe, bk.ring.ring.n), bk);
  return gadget_keyswitch(sample_extract(acc, 0), bk.ksk);
}

// ---------------------------------------------------------------------------
// LWE ciphertext multiplication by tensoring and relinearization.

struct LweRelinKey {
  GlweParams big;      // parameters at Q = q * Delta
  BigInt q, delta;
  std::vector<std::vector<GlevCiphertext>> lev;  // lev[i][j - i] encrypts s_i s_j, i <= j
};

inline LweRelinKey lwe_relin_keygen(const SecretKey& sk, const GlweParams& p, u64 beta, unsigned ell, Prng& rng) {
  LweRelinKey rk;
  rk.q = p.ring.q;
  rk.delta = p.delta;
  rk.big = p.with_modulus(p.ring.q * p.delta);
  rk.big.delta = 1;
  GadgetSpec g(rk.big.ring.q, beta, ell);
  SecretKey big_sk = sk;
  for (std::size_t i = 0; i < sk.k(); ++i) {
    rk.lev.emplace_back();
    for (std::size_t j = i; j < sk.k(); ++j)
      rk.lev[i].push_back(glev_encrypt(RingPoly::constant(rk.big.ring, sk.s[i][0] * sk.s[j][0]), big_sk, rk.big, g, rng));
  }
  return rk;
}

inline GlweCiphertext lwe_tensor_mul(const GlweCiphertext& c1, const GlweCiphertext& c2, const LweRelinKey& rk) {
  require_same_shape(c1, c2);
  require(c1.sign == Sign::Plus && c1.params().n == 1, ErrorCode::ParamMismatch, "expects plus-sign LWE ciphertexts");
  require(rk.lev.size() == c1.k(), ErrorCode::KeyMismatch, "relinearization key size differs from LWE dimension");
  const std::size_t k = c1.k();
  const BigInt& Q = rk.big.ring.q;
  auto lift = [&](const RingPoly& x) { return centered_reduce(x.coeffs[0], rk.q); };
  std::vector<BigInt> a1(k), a2(k);
  for (std::size_t i = 0; i < k; ++i) {
    a1[i] = lift(c1.a[i]);
    a2[i] = lift(c2.a[i]);
  }
  const BigInt b1 = lift(c1.b), b2 = lift(c2.b);
  // phase(c1) * phase(c2) = d0 - d1.s + sum d2_ij s_i s_j
  const RingParams one(1, Q);
  GlweCiphertext acc;
  acc.sign = Sign::Plus;
  for (std::size_t i = 0; i < k; ++i) acc.a.push_back(RingPoly::constant(one, b1 * a2[i] + b2 * a1[i]));
  acc.b = RingPoly::constant(one, b1 * b2);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i; j < k; ++j) {
      BigInt d = i == j ? BigInt(a1[i] * a2[i]) : BigInt(a1[i] * a2[j] + a1[j] * a2[i]);
      acc = add_ct(acc, decomp_product(RingPoly::constant(one, d), rk.lev[i][j - i]));
    }
  return rescale_ct(acc, 1, rk.delta, rk.q);
}

}  // namespace fhe
