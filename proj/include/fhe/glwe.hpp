#pragma once

// GLWE family: LWE is n = 1, RLWE is k = 1. Covers secret/public-key
// encryption, homomorphic add and plaintext ops, GLev/GGSW, external product,
// gadget key switching and modulus switching.

#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "fhe/decomposition.hpp"
#include "fhe/ring.hpp"

namespace fhe {

// Sign of the mask term in the body: Plus means B = sum(A_i S_i) + payload + E,
// Minus means B = -sum(A_i S_i) + payload + E.
enum class Sign { Plus, Minus };

// Message scaling puts the plaintext in the high bits (B holds Delta*M + E);
// noise scaling keeps it in the low bits (B holds M + t*E).
enum class Scaling { Message, Noise };

struct GlweParams {
  std::size_t k = 1;
  RingParams ring;
  BigInt t = 2;
  BigInt delta = 1;
  Sign sign = Sign::Minus;
  Scaling scaling = Scaling::Message;
  NoiseSampler sampler;
  bool binary_key = false;

  static GlweParams message_scaled(std::size_t k, std::size_t n, const BigInt& q, const BigInt& t, Sign sign,
                                   double sigma, bool binary_key = false) {
    GlweParams p;
    p.k = k;
    p.ring = RingParams(n, q);
    p.t = t;
    require(t >= 2 && t <= q, ErrorCode::BadModulus, "need 2 <= t <= q");
    p.delta = q / t;
    p.sign = sign;
    p.scaling = Scaling::Message;
    p.sampler = NoiseSampler(sigma);
    p.binary_key = binary_key;
    return p;
  }

  static GlweParams noise_scaled(std::size_t k, std::size_t n, const BigInt& q, const BigInt& t, double sigma) {
    GlweParams p;
    p.k = k;
    p.ring = RingParams(n, q);
    p.t = t;
    p.delta = t;
    p.sign = Sign::Minus;
    p.scaling = Scaling::Noise;
    p.sampler = NoiseSampler(sigma);
    return p;
  }

  // Same parameters over a different ciphertext modulus.
  GlweParams with_modulus(const BigInt& q) const {
    GlweParams p = *this;
    p.ring = RingParams(ring.n, q);
    if (scaling == Scaling::Message) p.delta = q / t;
    return p;
  }

  BigInt noise_multiplier() const { return scaling == Scaling::Noise ? t : BigInt(1); }
};

struct SecretKey {
  std::vector<std::vector<i64>> s;  // k polynomials, small coefficients
  bool binary = false;

  std::size_t k() const { return s.size(); }
  RingPoly poly(std::size_t i, const RingParams& ring) const { return RingPoly::from_ints(ring, s[i]); }

  // Concatenated coefficients, the LWE key seen by sample extraction.
  std::vector<i64> flattened() const {
    std::vector<i64> out;
    for (const auto& p : s) out.insert(out.end(), p.begin(), p.end());
    return out;
  }
};

struct GlweCiphertext {
  std::vector<RingPoly> a;  // masks A_0..A_{k-1}
  RingPoly b;               // body
  Sign sign = Sign::Minus;
  std::optional<std::array<std::uint8_t, 32>> seed;  // masks are reproducible from it when set

  std::size_t k() const { return a.size(); }
  const RingParams& params() const { return b.params; }
};

struct PublicKey {
  RingPoly pk1;              // +-A.S + E
  std::vector<RingPoly> pk2;  // A
  Sign sign = Sign::Minus;
};

struct KeyPair {
  SecretKey sk;
  PublicKey pk;
};

inline SecretKey secret_keygen(const GlweParams& p, Prng& rng) {
  SecretKey sk;
  sk.binary = p.binary_key;
  for (std::size_t i = 0; i < p.k; ++i)
    sk.s.push_back(sample_small(p.binary_key ? SampleKind::Binary : SampleKind::Ternary, p.ring.n, p.sampler, rng));
  return sk;
}

inline RingPoly mask_dot(const std::vector<RingPoly>& a, const SecretKey& sk) {
  require(a.size() == sk.k(), ErrorCode::KeyMismatch, "mask count differs from key size");
  const RingParams& ring = a.empty() ? RingParams() : a[0].params;
  RingPoly acc(ring);
  for (std::size_t i = 0; i < a.size(); ++i) acc = poly_add(acc, poly_negacyclic_mul(a[i], sk.poly(i, ring)));
  return acc;
}

inline std::vector<RingPoly> expand_masks(const std::array<std::uint8_t, 32>& seed, std::size_t k,
                                          const RingParams& ring) {
  Prng mask_rng(std::span<const std::uint8_t>(seed.data(), seed.size()));
  std::vector<RingPoly> a;
  for (std::size_t i = 0; i < k; ++i) a.push_back(sample_poly(SampleKind::Uniform, ring, NoiseSampler(), mask_rng));
  return a;
}

inline RingPoly sample_noise(const GlweParams& p, Prng& rng) {
  return poly_scalar_mul(sample_poly(SampleKind::Gaussian, p.ring, p.sampler, rng), p.noise_multiplier());
}

// Encrypts an already-scaled payload; the mask comes from a fresh 32-byte seed.
inline GlweCiphertext encrypt_payload(const RingPoly& payload, const SecretKey& sk, const GlweParams& p, Prng& rng) {
  require(payload.params == p.ring, ErrorCode::ParamMismatch, "payload ring differs from parameters");
  require(sk.k() == p.k, ErrorCode::KeyMismatch, "key size differs from k");
  GlweCiphertext ct;
  ct.sign = p.sign;
  ct.seed = rng.seed_bytes();
  ct.a = expand_masks(*ct.seed, p.k, p.ring);
  RingPoly as = mask_dot(ct.a, sk);
  ct.b = poly_add(poly_add(p.sign == Sign::Plus ? as : poly_neg(as), payload), sample_noise(p, rng));
  return ct;
}

// Plaintext m (coefficients read modulo t) to the payload the scheme encrypts.
inline RingPoly scale_plaintext(const std::vector<BigInt>& m, const GlweParams& p) {
  RingPoly r(p.ring);
  require(m.size() == p.ring.n, ErrorCode::LengthMismatch, "plaintext length must equal n");
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (p.scaling == Scaling::Message)
      r.coeffs[i] = mod(p.delta * mod(m[i], p.t), p.ring.q);
    else
      r.coeffs[i] = mod(centered_reduce(m[i], p.t), p.ring.q);
  }
  return r;
}

template <class T>
std::vector<BigInt> to_bigints(const std::vector<T>& v) {
  return std::vector<BigInt>(v.begin(), v.end());
}

inline GlweCiphertext encrypt(const std::vector<BigInt>& m, const SecretKey& sk, const GlweParams& p, Prng& rng) {
  return encrypt_payload(scale_plaintext(m, p), sk, p, rng);
}

inline RingPoly phase(const GlweCiphertext& ct, const SecretKey& sk) {
  RingPoly as = mask_dot(ct.a, sk);
  return ct.sign == Sign::Plus ? poly_sub(ct.b, as) : poly_add(ct.b, as);
}

// Rounded plaintext, coefficients canonical in [0, t).
inline std::vector<BigInt> decode_phase(const RingPoly& ph, const GlweParams& p) {
  std::vector<BigInt> m(ph.params.n);
  for (std::size_t i = 0; i < m.size(); ++i) {
    BigInt c = centered_reduce(ph.coeffs[i], ph.params.q);
    m[i] = p.scaling == Scaling::Message ? mod(round_div(c, p.delta), p.t) : mod(c, p.t);
  }
  return m;
}

inline std::vector<BigInt> decrypt(const GlweCiphertext& ct, const SecretKey& sk, const GlweParams& p) {
  return decode_phase(phase(ct, sk), p.with_modulus(ct.params().q));
}

inline GlweCiphertext trivial_ciphertext(const RingPoly& payload, std::size_t k, Sign sign) {
  GlweCiphertext ct;
  ct.sign = sign;
  ct.a.assign(k, RingPoly(payload.params));
  ct.b = payload;
  return ct;
}

inline void require_same_shape(const GlweCiphertext& x, const GlweCiphertext& y) {
  require(x.k() == y.k() && x.sign == y.sign && x.params() == y.params(), ErrorCode::ParamMismatch,
          "ciphertext shapes differ");
}

inline GlweCiphertext add_ct(const GlweCiphertext& x, const GlweCiphertext& y) {
  require_same_shape(x, y);
  GlweCiphertext r;
  r.sign = x.sign;
  for (std::size_t i = 0; i < x.k(); ++i) r.a.push_back(poly_add(x.a[i], y.a[i]));
  r.b = poly_add(x.b, y.b);
  return r;
}

inline GlweCiphertext sub_ct(const GlweCiphertext& x, const GlweCiphertext& y) {
  require_same_shape(x, y);
  GlweCiphertext r;
  r.sign = x.sign;
  for (std::size_t i = 0; i < x.k(); ++i) r.a.push_back(poly_sub(x.a[i], y.a[i]));
  r.b = poly_sub(x.b, y.b);
  return r;
}

inline GlweCiphertext neg_ct(const GlweCiphertext& x) {
  GlweCiphertext r;
  r.sign = x.sign;
  for (const auto& a : x.a) r.a.push_back(poly_neg(a));
  r.b = poly_neg(x.b);
  return r;
}

inline GlweCiphertext scalar_mul_ct(const GlweCiphertext& x, const BigInt& s) {
  GlweCiphertext r;
  r.sign = x.sign;
  for (const auto& a : x.a) r.a.push_back(poly_scalar_mul(a, s));
  r.b = poly_scalar_mul(x.b, s);
  return r;
}

// Adds a payload already at the ciphertext's scale.
inline GlweCiphertext add_plain(const GlweCiphertext& x, const RingPoly& payload) {
  require(payload.params == x.params(), ErrorCode::ParamMismatch, "plaintext ring differs");
  GlweCiphertext r = x;
  r.seed.reset();
  r.b = poly_add(x.b, payload);
  return r;
}

// Multiplies every component by an unscaled plaintext polynomial.
inline GlweCiphertext mul_plain(const GlweCiphertext& x, const RingPoly& lambda) {
  require(lambda.params == x.params(), ErrorCode::ParamMismatch, "plaintext ring differs");
  GlweCiphertext r;
  r.sign = x.sign;
  for (const auto& a : x.a) r.a.push_back(poly_negacyclic_mul(a, lambda));
  r.b = poly_negacyclic_mul(x.b, lambda);
  return r;
}

inline GlweCiphertext apply_automorphism_ct(const GlweCiphertext& x, i64 k) {
  GlweCiphertext r;
  r.sign = x.sign;
  for (const auto& a : x.a) r.a.push_back(apply_automorphism(a, k));
  r.b = apply_automorphism(x.b, k);
  return r;
}

inline GlweCiphertext mul_monomial_ct(const GlweCiphertext& x, i64 e) {
  GlweCiphertext r;
  r.sign = x.sign;
  for (const auto& a : x.a) r.a.push_back(mul_monomial(a, e));
  r.b = mul_monomial(x.b, e);
  return r;
}

// Centered lift of every component into a new modulus.
inline GlweCiphertext lift_ct(const GlweCiphertext& x, const BigInt& q) {
  GlweCiphertext r;
  r.sign = x.sign;
  for (const auto& a : x.a) r.a.push_back(poly_lift(a, q));
  r.b = poly_lift(x.b, q);
  return r;
}

// Components round(c * num / den) mod new_q.
inline GlweCiphertext rescale_ct(const GlweCiphertext& x, const BigInt& num, const BigInt& den, const BigInt& q) {
  GlweCiphertext r;
  r.sign = x.sign;
  for (const auto& a : x.a) r.a.push_back(poly_rescale(a, num, den, q));
  r.b = poly_rescale(x.b, num, den, q);
  return r;
}

// ---------------------------------------------------------------------------
// GLev and GGSW.

struct GlevCiphertext {
  std::vector<GlweCiphertext> levels;  // level i encrypts g_i * M
  GadgetSpec gadget;
};

struct GgswCiphertext {
  std::vector<GlevCiphertext> rows;  // k rows of -+S_i*M, then one row of M
};

inline void require_glev_gadget(const GadgetSpec& g) {
  require(g.kind == GadgetKind::Power || g.integral(), ErrorCode::InexactGadget,
          "GLev needs a gadget with beta^ell dividing q");
}

inline GlevCiphertext glev_encrypt(const RingPoly& m, const SecretKey& sk, const GlweParams& p, const GadgetSpec& gadget,
                                   Prng& rng) {
  require_glev_gadget(gadget);
  require(gadget.q == p.ring.q, ErrorCode::ParamMismatch, "gadget modulus differs from ring modulus");
  GlevCiphertext out;
  out.gadget = gadget;
  for (const auto& g : gadget.gadget()) out.levels.push_back(encrypt_payload(poly_scalar_mul(m, g), sk, p, rng));
  return out;
}

// sum_i digits_i * level_i
inline GlweCiphertext glev_combine(const std::vector<RingPoly>& digits, const GlevCiphertext& glev) {
  require(digits.size() == glev.levels.size(), ErrorCode::LengthMismatch, "digit count differs from GLev levels");
  GlweCiphertext acc = trivial_ciphertext(RingPoly(glev.levels[0].params()), glev.levels[0].k(), glev.levels[0].sign);
  for (std::size_t i = 0; i < digits.size(); ++i) acc = add_ct(acc, mul_plain(glev.levels[i], digits[i]));
  return acc;
}

// Ciphertext whose phase approximates x * M for the M inside glev.
inline GlweCiphertext decomp_product(const RingPoly& x, const GlevCiphertext& glev) {
  return glev_combine(decompose_poly(x, glev.gadget), glev);
}

inline GgswCiphertext ggsw_encrypt(const RingPoly& m, const SecretKey& sk, const GlweParams& p, const GadgetSpec& gadget,
                                   Prng& rng) {
  require_glev_gadget(gadget);
  GgswCiphertext out;
  for (std::size_t i = 0; i < p.k; ++i) {
    RingPoly sm = poly_negacyclic_mul(sk.poly(i, p.ring), m);
    if (p.sign == Sign::Plus) sm = poly_neg(sm);
    out.rows.push_back(glev_encrypt(sm, sk, p, gadget, rng));
  }
  out.rows.push_back(glev_encrypt(m, sk, p, gadget, rng));
  return out;
}

inline GlweCiphertext external_product(const GlweCiphertext& ct, const GgswCiphertext& ggsw) {
  require(ggsw.rows.size() == ct.k() + 1, ErrorCode::ParamMismatch, "GGSW row count must be k + 1");
  require(ggsw.rows[0].levels[0].params() == ct.params(), ErrorCode::ParamMismatch, "GGSW ring differs");
  GlweCiphertext acc = decomp_product(ct.b, ggsw.rows[ct.k()]);
  for (std::size_t i = 0; i < ct.k(); ++i) acc = add_ct(acc, decomp_product(ct.a[i], ggsw.rows[i]));
  return acc;
}

// sel = 0 keeps ct0, sel = 1 yields ct1.
inline GlweCiphertext cmux(const GgswCiphertext& sel, const GlweCiphertext& ct0, const GlweCiphertext& ct1) {
  return add_ct(ct0, external_product(sub_ct(ct1, ct0), sel));
}

// ---------------------------------------------------------------------------
// Key switching.

struct KeySwitchKey {
  std::vector<GlevCiphertext> keys;  // keys[i] = GLev under the target key of source component S_i
};

inline KeySwitchKey keyswitch_keygen(const SecretKey& from, const SecretKey& to, const GlweParams& to_params,
                                     const GadgetSpec& gadget, Prng& rng) {
  KeySwitchKey ksk;
  for (std::size_t i = 0; i < from.k(); ++i)
    ksk.keys.push_back(glev_encrypt(from.poly(i, to_params.ring), to, to_params, gadget, rng));
  return ksk;
}

inline GlweCiphertext gadget_keyswitch(const GlweCiphertext& ct, const KeySwitchKey& ksk) {
  require(ksk.keys.size() == ct.k(), ErrorCode::KeyMismatch, "key-switching key does not match ciphertext");
  const GlweCiphertext& proto = ksk.keys[0].levels[0];
  GlweCiphertext acc = trivial_ciphertext(RingPoly(proto.params()), proto.k(), proto.sign);
  for (std::size_t i = 0; i < ct.k(); ++i) acc = add_ct(acc, decomp_product(ct.a[i], ksk.keys[i]));
  GlweCiphertext base = trivial_ciphertext(ct.b, proto.k(), proto.sign);
  return ct.sign == Sign::Plus ? sub_ct(base, acc) : add_ct(base, acc);
}

// ---------------------------------------------------------------------------
// Modulus switching.

// Expected rounding drift of the phase for k*n mask terms.
inline double modulus_switch_drift(std::size_t k, std::size_t n) {
  return std::sqrt((1.0 + static_cast<double>(k * n)) / 12.0);
}

// Components round(c * q_hat / q). When delta is nonzero the target scale is
// checked against the expected rounding drift.
inline GlweCiphertext modulus_switch(const GlweCiphertext& ct, const BigInt& q_hat, const BigInt& delta = 0) {
  const BigInt& q = ct.params().q;
  require(q_hat >= 2 && q_hat <= q, ErrorCode::TargetTooSmall, "target modulus must satisfy 2 <= q_hat <= q");
  if (delta != 0) {
    const double scaled = static_cast<double>(delta * q_hat / q);
    require(scaled > 2.0 * modulus_switch_drift(ct.k(), ct.params().n), ErrorCode::TargetTooSmall,
            "scaled delta would drown in rounding drift");
  }
  if (q_hat == q) return ct;
  return rescale_ct(ct, q_hat, q, q_hat);
}

// ---------------------------------------------------------------------------
// Public-key encryption.

inline PublicKey public_keygen(const GlweParams& p, const SecretKey& sk, Prng& rng) {
  PublicKey pk;
  pk.sign = p.sign;
  for (std::size_t i = 0; i < p.k; ++i) pk.pk2.push_back(sample_poly(SampleKind::Uniform, p.ring, p.sampler, rng));
  RingPoly as = mask_dot(pk.pk2, sk);
  pk.pk1 = poly_add(p.sign == Sign::Plus ? as : poly_neg(as), sample_noise(p, rng));
  return pk;
}

inline KeyPair keygen(const GlweParams& p, Prng& rng) {
  KeyPair kp;
  kp.sk = secret_keygen(p, rng);
  kp.pk = public_keygen(p, kp.sk, rng);
  return kp;
}

inline GlweCiphertext pk_encrypt_payload(const RingPoly& payload, const PublicKey& pk, const GlweParams& p, Prng& rng) {
  RingPoly u = sample_poly(p.binary_key ? SampleKind::Binary : SampleKind::Ternary, p.ring, p.sampler, rng);
  GlweCiphertext ct;
  ct.sign = pk.sign;
  for (const auto& a : pk.pk2) ct.a.push_back(poly_add(poly_negacyclic_mul(a, u), sample_noise(p, rng)));
  ct.b = poly_add(poly_add(poly_negacyclic_mul(pk.pk1, u), payload), sample_noise(p, rng));
  return ct;
}

inline GlweCiphertext pk_encrypt(const std::vector<BigInt>& m, const PublicKey& pk, const GlweParams& p, Prng& rng) {
  return pk_encrypt_payload(scale_plaintext(m, p), pk, p, rng);
}

// Infinity norm of phase minus the exact payload: the noise a known plaintext reveals.
inline BigInt measured_noise(const GlweCiphertext& ct, const SecretKey& sk, const RingPoly& payload) {
  return poly_sub(phase(ct, sk), payload).infinity_norm();
}

}  // namespace fhe
