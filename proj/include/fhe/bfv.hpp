#pragma once

// BFV: batch encoding, encryption, ciphertext multiplication (raise to
// Q = q * delta, tensor, relinearize, rescale), slot rotation, plaintext
// matrix-vector products and the digit-extraction polynomials.

#include <map>
#include <vector>

#include "fhe/glwe.hpp"
#include "fhe/transform.hpp"

namespace fhe {

// ---------------------------------------------------------------------------
// Batch encoding over Z_t.

// m = n^-1 * W * I_R * v (mod t).
inline std::vector<u64> batch_encode(const std::vector<u64>& v, const EncodingMatrices& mats) {
  require(v.size() == mats.n, ErrorCode::LengthMismatch, "slot vector length must equal n");
  auto m = mat_vec_mod(mats.w_hat, reverse_vec(v), mats.t);
  const u64 n_inv = mod_inverse(mats.n % mats.t, mats.t);
  for (auto& x : m) x = mul_mod(x, n_inv, mats.t);
  return m;
}

// v = W* * m (mod t).
inline std::vector<u64> batch_decode(const std::vector<u64>& m, const EncodingMatrices& mats) {
  require(m.size() == mats.n, ErrorCode::LengthMismatch, "coefficient vector length must equal n");
  return mat_vec_mod(mats.w_hat_star, m, mats.t);
}

// Binary digits of m as coefficients, so that M(2) = m. Not used by the
// homomorphic pipeline: products overflow the digit range immediately.
inline std::vector<u64> single_value_encode(u64 m, std::size_t n) {
  std::vector<u64> c(n, 0);
  for (std::size_t i = 0; i < n && m; ++i, m >>= 1) c[i] = m & 1;
  require(m == 0, ErrorCode::LengthMismatch, "value needs more than n binary digits");
  return c;
}

inline BigInt single_value_decode(const std::vector<i64>& coeffs) {
  BigInt acc = 0;
  for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * 2 + coeffs[i];
  return acc;
}

// ---------------------------------------------------------------------------
// Context.

struct BfvParams {
  std::size_t n = 16;
  BigInt q = BigInt(97) << 53;
  u64 t = 97;
  double sigma = 3.2;
  u64 omega = 0;               // 0 picks the smallest-generator root
  u64 ks_beta = u64{1} << 12;  // rotation keys, gadget over q
  u64 relin_beta = u64{1} << 16;  // relinearization keys, power gadget over Q

  // n = 16 needs t = 1 mod 32; 97 is the smallest such prime. q = t * 2^53 makes
  // delta = q / t exact, which removes the (q mod t) term from product noise.
  static BfvParams desk() {
    BfvParams p;
    p.q = BigInt(97) << 53;
    return p;
  }
  static BfvParams small(std::size_t n, u64 t, u64 omega = 0) {
    BfvParams p;
    p.n = n;
    p.t = t;
    p.omega = omega;
    return p;
  }
};

class BfvContext {
 public:
  explicit BfvContext(const BfvParams& p)
      : params_(p), mats_(build_matrices(p.n, Field::Ring, p.t, p.omega)) {
    glwe_ = GlweParams::message_scaled(1, p.n, p.q, p.t, Sign::Minus, p.sigma);
    delta_ = glwe_.delta;
    big_q_ = p.q * delta_;
    // Tensor terms of lifted ciphertexts must not wrap twice modulo Q.
    require((p.q - 1) * (p.n + 1) < big_q_, ErrorCode::BadModulus, "Q = q * delta too small for this n; lower t or raise q");
    big_ = glwe_.with_modulus(big_q_);
    big_.delta = 1;
    ks_gadget_ = GadgetSpec::power(p.q, p.ks_beta);
    relin_gadget_ = GadgetSpec::power(big_q_, p.relin_beta);
  }

  const BfvParams& params() const { return params_; }
  const GlweParams& glwe() const { return glwe_; }
  const EncodingMatrices& matrices() const { return mats_; }
  const BigInt& delta() const { return delta_; }
  const BigInt& big_q() const { return big_q_; }
  std::size_t slots() const { return params_.n; }
  std::size_t half() const { return params_.n / 2; }

  // Keys: secret, relinearization and the default rotation set.
  void keygen(Prng& rng) {
    sk_ = secret_keygen(glwe_, rng);
    RingPoly s = sk_.poly(0, big_.ring);
    relin_ = glev_encrypt(poly_negacyclic_mul(s, s), sk_, big_, relin_gadget_, rng);
    galois_.clear();
    has_keys_ = true;
  }

  const SecretKey& secret_key() const { return sk_; }

  // Rotation by h slots per half uses X -> X^(5^h).
  u64 galois_element(std::size_t h) const { return mats_.J[h % half()]; }
  u64 swap_element() const { return 2 * params_.n - 1; }

  void gen_galois_key(u64 k, Prng& rng) {
    require(has_keys_, ErrorCode::KeyMismatch, "generate keys first");
    if (galois_.count(k)) return;
    SecretKey rotated;
    rotated.s.push_back(apply_automorphism(sk_.poly(0, glwe_.ring), static_cast<i64>(k)).centered_i64());
    galois_[k] = keyswitch_keygen(rotated, sk_, glwe_, ks_gadget_, rng);
  }
  void gen_rotation_key(std::size_t h, Prng& rng) { gen_galois_key(galois_element(h), rng); }

  // Power-of-two steps and the half swap, enough for any rotation.
  void gen_rotation_keys(Prng& rng) {
    for (std::size_t h = 1; h < half(); h <<= 1) gen_rotation_key(h, rng);
    gen_galois_key(swap_element(), rng);
  }

  bool has_galois_key(u64 k) const { return galois_.count(k) > 0; }

  // ---- encoding and encryption

  std::vector<u64> encode(const std::vector<u64>& v) const { return batch_encode(v, mats_); }
  std::vector<u64> decode(const std::vector<u64>& m) const { return batch_decode(m, mats_); }

  // Unscaled plaintext in the ciphertext ring, centered mod t.
  RingPoly plain_poly(const std::vector<u64>& slots) const {
    auto m = encode(slots);
    RingPoly r(glwe_.ring);
    for (std::size_t i = 0; i < m.size(); ++i)
      r.coeffs[i] = mod(BigInt(centered_reduce(static_cast<i128>(m[i]), static_cast<i64>(params_.t))), params_.q);
    return r;
  }

  GlweCiphertext encrypt(const std::vector<u64>& slots, Prng& rng) const {
    require(has_keys_, ErrorCode::KeyMismatch, "generate keys first");
    return fhe::encrypt(to_bigints(encode(slots)), sk_, glwe_, rng);
  }

  std::vector<u64> decrypt(const GlweCiphertext& ct) const {
    auto m = fhe::decrypt(ct, sk_, glwe_);
    std::vector<u64> c(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) c[i] = static_cast<u64>(m[i]);
    return decode(c);
  }

  // Infinity norm of the phase minus delta * encode(slots), centered mod q.
  BigInt noise(const GlweCiphertext& ct, const std::vector<u64>& slots) const {
    RingPoly ph = phase(ct, sk_);
    auto m = encode(slots);
    BigInt worst = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      BigInt e = abs(centered_reduce(ph.coeffs[i] - delta_ * m[i], params_.q));
      if (e > worst) worst = e;
    }
    return worst;
  }

  // ---- homomorphic operations

  GlweCiphertext add(const GlweCiphertext& x, const GlweCiphertext& y) const { return add_ct(x, y); }
  GlweCiphertext sub(const GlweCiphertext& x, const GlweCiphertext& y) const { return sub_ct(x, y); }

  GlweCiphertext add_plain_slots(const GlweCiphertext& x, const std::vector<u64>& slots) const {
    return add_plain(x, scale_plaintext(to_bigints(encode(slots)), glwe_));
  }

  GlweCiphertext mul_plain_slots(const GlweCiphertext& x, const std::vector<u64>& slots) const {
    return mul_plain(x, plain_poly(slots));
  }

  // Raise to Q, tensor, relinearize with RLev(S^2), rescale by delta.
  GlweCiphertext mul(const GlweCiphertext& x, const GlweCiphertext& y) const {
    require(has_keys_, ErrorCode::KeyMismatch, "generate keys first");
    require_same_shape(x, y);
    require(x.params() == glwe_.ring && x.k() == 1, ErrorCode::ParamMismatch, "expects ciphertexts of this context");
    auto u = lift_ct(x, big_q_), v = lift_ct(y, big_q_);
    const RingPoly d0 = poly_negacyclic_mul(u.b, v.b);
    const RingPoly d1 = poly_add(poly_negacyclic_mul(u.b, v.a[0]), poly_negacyclic_mul(v.b, u.a[0]));
    const RingPoly d2 = poly_negacyclic_mul(u.a[0], v.a[0]);
    GlweCiphertext acc;
    acc.sign = Sign::Minus;
    acc.a = {d1};
    acc.b = d0;
    acc = add_ct(acc, decomp_product(d2, relin_));
    return rescale_ct(acc, 1, delta_, params_.q);
  }

  // Applies X -> X^k and switches back to the secret key.
  GlweCiphertext apply_galois(const GlweCiphertext& x, u64 k) const {
    auto it = galois_.find(k);
    require(it != galois_.end(), ErrorCode::MissingGaloisKey, "no Galois key for this automorphism");
    return gadget_keyswitch(apply_automorphism_ct(x, static_cast<i64>(k)), it->second);
  }

  // Both slot halves rotated left by h.
  GlweCiphertext rotate(const GlweCiphertext& x, std::size_t h) const {
    h %= half();
    if (h == 0) return x;
    return apply_galois(x, galois_element(h));
  }

  // Rotation composed from the power-of-two keys when no direct key exists.
  GlweCiphertext rotate_composed(const GlweCiphertext& x, std::size_t h) const {
    h %= half();
    if (h == 0) return x;
    if (has_galois_key(galois_element(h))) return rotate(x, h);
    GlweCiphertext r = x;
    for (std::size_t bit = 1; bit < half(); bit <<= 1)
      if (h & bit) r = rotate(r, bit);
    return r;
  }

  GlweCiphertext swap_halves(const GlweCiphertext& x) const { return apply_galois(x, swap_element()); }

  // First rows of A * x for a cleartext matrix with at most n rows and n
  // columns. Per-half rotations cover the diagonal blocks; the swapped copy
  // covers the off-diagonal blocks.
  GlweCiphertext mat_vec(const std::vector<std::vector<u64>>& a, const GlweCiphertext& x) const {
    const std::size_t n = params_.n, h = half();
    require(!a.empty() && a.size() <= n, ErrorCode::LengthMismatch, "matrix needs between 1 and n rows");
    std::vector<std::vector<u64>> full(n, std::vector<u64>(n, 0));
    for (std::size_t r = 0; r < a.size(); ++r) {
      require(a[r].size() == n, ErrorCode::LengthMismatch, "matrix rows must have n entries");
      for (std::size_t c = 0; c < n; ++c) full[r][c] = a[r][c] % params_.t;
    }
    // Row r of half b reads column (r + i) mod h of half b (same) or 1 - b (swapped).
    auto diag = [&](std::size_t i, bool swapped) {
      std::vector<u64> u(n);
      for (std::size_t b = 0; b < 2; ++b)
        for (std::size_t r = 0; r < h; ++r) {
          const std::size_t src = swapped ? 1 - b : b;
          u[b * h + r] = full[b * h + r][src * h + (r + i) % h];
        }
      return u;
    };
    const GlweCiphertext y = swap_halves(x);
    GlweCiphertext acc = trivial_ciphertext(RingPoly(glwe_.ring), 1, Sign::Minus);
    for (std::size_t i = 0; i < h; ++i) {
      acc = add_ct(acc, mul_plain_slots(rotate_composed(x, i), diag(i, false)));
      acc = add_ct(acc, mul_plain_slots(rotate_composed(y, i), diag(i, true)));
    }
    return acc;
  }

  // Noise growth a multiplication may show: 2 n t times the larger input noise.
  BigInt predicted_mul_noise(const BigInt& e1, const BigInt& e2) const {
    return 2 * BigInt(params_.n) * params_.t * (e1 > e2 ? e1 : e2);
  }

 private:
  BfvParams params_;
  EncodingMatrices mats_;
  GlweParams glwe_, big_;
  BigInt delta_, big_q_;
  GadgetSpec ks_gadget_, relin_gadget_;
  SecretKey sk_;
  GlevCiphertext relin_;
  std::map<u64, KeySwitchKey> galois_;
  bool has_keys_ = false;
};

// Cleartext reference for rotate: both halves rotated left by h.
inline std::vector<u64> rotate_halves(const std::vector<u64>& v, std::size_t h) {
  const std::size_t half = v.size() / 2;
  std::vector<u64> out(v.size());
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t r = 0; r < half; ++r) out[b * half + r] = v[b * half + (r + h) % half];
  return out;
}

// ---------------------------------------------------------------------------
// Digit extraction over Z_{p^eps}.

struct DigitExtractor {
  u64 p = 2;
  unsigned eps = 2;
  u64 modulus = 4;  // p^eps
  // digit_polys[j]: f_j of degree < p with f_j(d) = base-p digit j of d^p, j >= 1.
  std::vector<std::vector<u64>> digit_polys;
  // lift[e]: F_e(z) = z^p - sum_{j=1..e} f_j(z) p^j, coefficients mod p^eps, e >= 1.
  std::vector<std::vector<u64>> lift;

  static u64 eval(const std::vector<u64>& c, u64 z, u64 m) {
    u64 acc = 0;
    for (std::size_t i = c.size(); i-- > 0;) acc = (mul_mod(acc, z % m, m) + c[i]) % m;
    return acc;
  }

  std::size_t lift_degree(unsigned e) const {
    std::size_t d = lift[e].size();
    while (d > 0 && lift[e][d - 1] == 0) --d;
    return d == 0 ? 0 : d - 1;
  }

  // F_{e-1} o ... o F_1 (z) mod p^e: keeps only the lowest digit.
  u64 lowest_digit_lift(u64 z, unsigned e) const {
    const u64 m = pow_u(p, e);
    z %= m;
    for (unsigned k = 1; k < e; ++k) z = eval(lift[k], z, m);
    return z;
  }

  // G_e(z) = (z - F_{e-1} o ... o F_1(z)) / p, from Z_{p^e} to Z_{p^(e-1)}.
  u64 remove_lowest_digit(u64 z, unsigned e) const {
    const u64 m = pow_u(p, e);
    z %= m;
    const u64 low = lowest_digit_lift(z, e);
    return ((z + m - low) % m) / p;
  }

  // Top digit of z in Z_{p^eps}, rounding: z = p^(eps-1) m + e with |e| < p^(eps-1) / 2.
  u64 extract(i64 z) const {
    const u64 unit = pow_u(p, eps - 1);
    u64 x = static_cast<u64>(mod(static_cast<i128>(z) + static_cast<i128>(unit / 2), static_cast<i64>(modulus)));
    for (unsigned e = eps; e >= 2; --e) x = remove_lowest_digit(x, e);
    return x % p;
  }

  static u64 pow_u(u64 b, unsigned e) {
    u64 r = 1;
    while (e--) r *= b;
    return r;
  }
};

// Lagrange interpolation through (x, y[x]) for x = 0..p-1, over Z_m with gcd((p-1)!, m) = 1.
inline std::vector<u64> interpolate_mod(const std::vector<u64>& y, u64 m) {
  const std::size_t p = y.size();
  std::vector<u64> out(p, 0);
  for (std::size_t i = 0; i < p; ++i) {
    // Basis prod_{j != i} (X - j) / (i - j).
    std::vector<u64> basis{1};
    u64 denom = 1;
    for (std::size_t j = 0; j < p; ++j) {
      if (j == i) continue;
      std::vector<u64> next(basis.size() + 1, 0);
      const u64 neg_j = (m - j % m) % m;
      for (std::size_t k = 0; k < basis.size(); ++k) {
        next[k + 1] = (next[k + 1] + basis[k]) % m;
        next[k] = (next[k] + mul_mod(basis[k], neg_j, m)) % m;
      }
      basis = next;
      const u64 diff = static_cast<u64>(mod(static_cast<i128>(i) - static_cast<i128>(j), static_cast<i64>(m)));
      denom = mul_mod(denom, diff, m);
    }
    const u64 scale = mul_mod(y[i] % m, mod_inverse(denom, m), m);
    for (std::size_t k = 0; k < p; ++k) out[k] = (out[k] + mul_mod(basis[k], scale, m)) % m;
  }
  return out;
}

inline DigitExtractor build_digit_extraction(u64 p, unsigned eps) {
  require(is_prime(p), ErrorCode::BadModulus, "digit extraction needs a prime base");
  require(eps >= 2, ErrorCode::BadModulus, "digit extraction needs eps >= 2");
  DigitExtractor d;
  d.p = p;
  d.eps = eps;
  d.modulus = DigitExtractor::pow_u(p, eps);
  const u64 m = d.modulus;
  // Base-p digits of x^p mod p^eps for each x in [0, p).
  std::vector<std::vector<u64>> digits(p);
  for (u64 x = 0; x < p; ++x) {
    u64 v = pow_mod(x, p, m);
    for (unsigned j = 0; j < eps; ++j, v /= p) digits[x].push_back(v % p);
  }
  d.digit_polys.assign(eps, {});
  for (unsigned j = 1; j < eps; ++j) {
    std::vector<u64> y(p);
    for (u64 x = 0; x < p; ++x) y[x] = digits[x][j];
    d.digit_polys[j] = interpolate_mod(y, m);
  }
  d.lift.assign(eps, {});
  for (unsigned e = 1; e < eps; ++e) {
    std::vector<u64> f(p + 1, 0);
    f[p] = 1;
    for (unsigned j = 1; j <= e; ++j) {
      const u64 pj = DigitExtractor::pow_u(p, j) % m;
      for (std::size_t k = 0; k < d.digit_polys[j].size(); ++k)
        f[k] = (f[k] + m - mul_mod(d.digit_polys[j][k], pj, m)) % m;
    }
    d.lift[e] = f;
  }
  return d;
}

}  // namespace fhe
