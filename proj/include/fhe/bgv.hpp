#pragma once

// BGV: noise-scaled encryption (B + A.S = M + t.E), exact mod-t decryption,
// the corrected modulus switch, leveled multiplication, ModDrop and slot
// rotation over a prime chain with every prime = 1 mod 2nt.

#include <map>
#include <vector>

#include "fhe/bfv.hpp"
#include "fhe/glwe.hpp"
#include "fhe/rns.hpp"
#include "fhe/transform.hpp"

namespace fhe {

struct BgvParams {
  std::size_t n = 16;
  u64 t = 97;
  double sigma = 3.2;
  u64 omega = 0;
  std::size_t levels = 3;     // rescaling primes above the base prime
  unsigned base_bits = 40;
  unsigned prime_bits = 30;
  u64 relin_beta = u64{1} << 16;
  u64 ks_beta = u64{1} << 16;

  static BgvParams desk() { return BgvParams{}; }
  static BgvParams small(std::size_t n, u64 t, u64 omega = 0) {
    BgvParams p;
    p.n = n;
    p.t = t;
    p.omega = omega;
    return p;
  }
};

struct BgvCiphertext {
  GlweCiphertext ct;
  std::size_t level = 0;
};

// Component-wise switch q -> q_hat with the mod-t correction:
// a' = round(q_hat a / q), eps' = q_hat a - q a', h = q^-1 eps' mod t (centered).
inline RingPoly bgv_switch_poly(const RingPoly& a, const BigInt& q_hat, u64 t, bool correct = true) {
  const BigInt& q = a.params.q;
  const BigInt bt(t);
  const BigInt q_inv = mod_inverse(mod(q, bt), bt);
  RingPoly r(RingParams(a.params.n, q_hat));
  for (std::size_t i = 0; i < a.coeffs.size(); ++i) {
    const BigInt scaled = q_hat * a.coeffs[i];
    const BigInt a1 = round_div(scaled, q);
    BigInt c = a1;
    if (correct) c += centered_reduce(mod(scaled - q * a1, bt) * q_inv, bt);
    r.coeffs[i] = mod(c, q_hat);
  }
  return r;
}

inline GlweCiphertext bgv_mod_switch(const GlweCiphertext& ct, const BigInt& q_hat, u64 t, bool correct = true) {
  const BigInt& q = ct.params().q;
  require(q_hat >= 2 && q_hat <= q, ErrorCode::BadTargetModulus, "target modulus must satisfy 2 <= q_hat <= q");
  require(mod(q_hat, BigInt(t)) == 1 && mod(q, BigInt(t)) == 1, ErrorCode::BadTargetModulus,
          "both moduli must be 1 mod t");
  if (q_hat == q) return ct;
  GlweCiphertext r;
  r.sign = ct.sign;
  for (const auto& a : ct.a) r.a.push_back(bgv_switch_poly(a, q_hat, t, correct));
  r.b = bgv_switch_poly(ct.b, q_hat, t, correct);
  return r;
}

// The same switch in RNS form for dropping the last prime w of the base:
// a_hat = (a - r) / w + [r]_t with r the centered residue mod w. Exact.
inline RnsPoly bgv_drop_prime_rns(const RnsPoly& x, u64 t) {
  const std::size_t k = x.base.size();
  require(k >= 2, ErrorCode::NotSubBase, "need a prime to drop");
  const u64 w = x.base[k - 1];
  require(w % t == 1, ErrorCode::BadTargetModulus, "dropped prime must be 1 mod t");
  const RnsBase keep = x.base.slice(0, k - 1);
  std::vector<u64> w_inv;
  for (std::size_t i = 0; i + 1 < k; ++i) w_inv.push_back(mod_inverse(w % keep[i], keep[i]));
  return map_rns_poly(x, keep, [&](const Residues& c) {
    const i64 r = cmod(c[k - 1], w);
    const i64 h = cmod(r, t);
    Residues out(k - 1);
    for (std::size_t i = 0; i + 1 < k; ++i) {
      const i64 qi = static_cast<i64>(keep[i]);
      const i128 diff = mod(static_cast<i128>(c[i]) - r, qi);
      out[i] = cmod(static_cast<i128>(mod(diff * static_cast<i128>(w_inv[i]), qi)) + h, keep[i]);
    }
    return out;
  });
}

class BgvContext {
 public:
  explicit BgvContext(const BgvParams& p) : params_(p), mats_(build_matrices(p.n, Field::Ring, p.t, p.omega)) {
    require(is_prime(p.t) && p.t % (2 * p.n) == 1, ErrorCode::BadModulus, "t must be a prime = 1 mod 2n");
    require(p.levels >= 1, ErrorCode::BadModulus, "needs at least one rescaling prime");
    const u64 step = 2 * p.n * p.t;
    const u64 w0 = gen_ntt_primes(PrimeSpec{p.base_bits, 1, step, true}, 1).front();
    const auto w = gen_ntt_primes(PrimeSpec{p.prime_bits, 1, step, true}, p.levels, {w0});
    require(w.size() == p.levels, ErrorCode::BadModulus, "not enough chain primes");
    chain_.push_back(w0);
    chain_.insert(chain_.end(), w.begin(), w.end());
    BigInt q = 1;
    for (u64 x : chain_) {
      q *= x;
      moduli_.push_back(q);
      glwe_.push_back(GlweParams::noise_scaled(1, p.n, q, p.t, p.sigma));
    }
  }

  const BgvParams& params() const { return params_; }
  const EncodingMatrices& matrices() const { return mats_; }
  const std::vector<u64>& chain() const { return chain_; }
  const BigInt& modulus(std::size_t level) const { return moduli_.at(level); }
  const GlweParams& glwe(std::size_t level) const { return glwe_.at(level); }
  std::size_t top_level() const { return params_.levels; }
  std::size_t slots() const { return params_.n; }
  std::size_t half() const { return params_.n / 2; }

  void keygen(Prng& rng) {
    const GlweParams& top = glwe_.back();
    sk_ = secret_keygen(top, rng);
    const RingPoly s = sk_.poly(0, top.ring);
    relin_ = per_level(glev_encrypt(poly_negacyclic_mul(s, s), sk_, top, GadgetSpec::power(moduli_.back(), params_.relin_beta), rng));
    galois_.clear();
    has_keys_ = true;
  }

  const SecretKey& secret_key() const { return sk_; }

  u64 galois_element(std::size_t h) const { return mats_.J[h % half()]; }
  u64 swap_element() const { return 2 * params_.n - 1; }

  void gen_galois_key(u64 k, Prng& rng) {
    require(has_keys_, ErrorCode::KeyMismatch, "generate keys first");
    if (galois_.count(k)) return;
    const GlweParams& top = glwe_.back();
    const RingPoly moved = apply_automorphism(sk_.poly(0, top.ring), static_cast<i64>(k));
    galois_[k] = per_level(glev_encrypt(moved, sk_, top, GadgetSpec::power(moduli_.back(), params_.ks_beta), rng));
  }
  void gen_rotation_key(std::size_t h, Prng& rng) { gen_galois_key(galois_element(h), rng); }
  void gen_rotation_keys(Prng& rng) {
    for (std::size_t h = 1; h < half(); h <<= 1) gen_rotation_key(h, rng);
    gen_galois_key(swap_element(), rng);
  }
  bool has_galois_key(u64 k) const { return galois_.count(k) > 0; }

  // ---- encoding and encryption

  std::vector<u64> encode(const std::vector<u64>& v) const { return batch_encode(v, mats_); }
  std::vector<u64> decode(const std::vector<u64>& m) const { return batch_decode(m, mats_); }

  // Plaintext polynomial centered mod t, in the ring of the given level.
  RingPoly plain_poly(const std::vector<u64>& slots, std::size_t level) const {
    auto m = encode(slots);
    RingPoly r(glwe_.at(level).ring);
    for (std::size_t i = 0; i < m.size(); ++i)
      r.coeffs[i] = mod(BigInt(centered_reduce(static_cast<i128>(m[i]), static_cast<i64>(params_.t))), r.params.q);
    return r;
  }

  BgvCiphertext encrypt(const std::vector<u64>& slots, Prng& rng) const { return encrypt_at(slots, top_level(), rng); }

  BgvCiphertext encrypt_at(const std::vector<u64>& slots, std::size_t level, Prng& rng) const {
    require(has_keys_, ErrorCode::KeyMismatch, "generate keys first");
    return {encrypt_payload(plain_poly(slots, level), sk_, glwe_.at(level), rng), level};
  }

  std::vector<u64> decrypt(const BgvCiphertext& c) const { return decrypt_raw(c.ct); }

  // Decrypts a ciphertext under any modulus = 1 mod t, on or off the chain.
  std::vector<u64> decrypt_raw(const GlweCiphertext& ct) const {
    auto m = fhe::decrypt(ct, sk_, glwe_.front());
    std::vector<u64> c(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) c[i] = static_cast<u64>(m[i]);
    return decode(c);
  }

  // Infinity norm of the centered phase minus the centered plaintext.
  BigInt noise(const GlweCiphertext& ct, const std::vector<u64>& slots) const {
    const auto ph = phase(ct, sk_).centered();
    const auto m = encode(slots);
    BigInt worst = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      BigInt e = abs(ph[i] - centered_reduce(static_cast<i128>(m[i]), static_cast<i64>(params_.t)));
      if (e > worst) worst = e;
    }
    return worst;
  }
  BigInt noise(const BgvCiphertext& c, const std::vector<u64>& slots) const { return noise(c.ct, slots); }

  // ---- level management

  GlweCiphertext mod_switch(const BgvCiphertext& c, const BigInt& q_hat, bool correct = true) const {
    return bgv_mod_switch(c.ct, q_hat, params_.t, correct);
  }

  BgvCiphertext rescale(const BgvCiphertext& c, bool correct = true) const {
    require(c.level >= 1, ErrorCode::LevelExhausted, "no prime left to switch away");
    return {mod_switch(c, moduli_[c.level - 1], correct), c.level - 1};
  }

  // Reduces the modulus without scaling; the noise scale stays t.
  BgvCiphertext mod_drop(const BgvCiphertext& c) const {
    require(c.level >= 1, ErrorCode::LevelExhausted, "already at the base level");
    return {lift_ct(c.ct, moduli_[c.level - 1]), c.level - 1};
  }

  BgvCiphertext drop_to(BgvCiphertext c, std::size_t level) const {
    while (c.level > level) c = mod_drop(c);
    return c;
  }

  // ---- arithmetic

  BgvCiphertext add(const BgvCiphertext& x, const BgvCiphertext& y) const {
    check_pair(x, y);
    return {add_ct(x.ct, y.ct), x.level};
  }
  BgvCiphertext sub(const BgvCiphertext& x, const BgvCiphertext& y) const {
    check_pair(x, y);
    return {sub_ct(x.ct, y.ct), x.level};
  }
  BgvCiphertext add_plain_slots(const BgvCiphertext& x, const std::vector<u64>& slots) const {
    return {add_plain(x.ct, plain_poly(slots, x.level)), x.level};
  }
  BgvCiphertext mul_plain_slots(const BgvCiphertext& x, const std::vector<u64>& slots) const {
    return {mul_plain(x.ct, plain_poly(slots, x.level)), x.level};
  }

  // Tensor and relinearize at the current level; optionally switch down one level.
  BgvCiphertext mul(const BgvCiphertext& x, const BgvCiphertext& y, bool rescale_after = true) const {
    require(has_keys_, ErrorCode::KeyMismatch, "generate keys first");
    check_pair(x, y);
    if (rescale_after) require(x.level >= 1, ErrorCode::LevelExhausted, "no level left to rescale");
    const RingPoly& a1 = x.ct.a[0];
    const RingPoly& a2 = y.ct.a[0];
    GlweCiphertext acc;
    acc.sign = Sign::Minus;
    acc.b = poly_negacyclic_mul(x.ct.b, y.ct.b);
    acc.a = {poly_add(poly_negacyclic_mul(x.ct.b, a2), poly_negacyclic_mul(y.ct.b, a1))};
    acc = add_ct(acc, decomp_product(poly_negacyclic_mul(a1, a2), relin_.at(x.level)));
    BgvCiphertext out{acc, x.level};
    return rescale_after ? rescale(out) : out;
  }

  // ---- rotations

  BgvCiphertext apply_galois(const BgvCiphertext& x, u64 k) const {
    auto it = galois_.find(k);
    require(it != galois_.end(), ErrorCode::MissingGaloisKey, "no Galois key for this automorphism");
    const GlweCiphertext moved = apply_automorphism_ct(x.ct, static_cast<i64>(k));
    return {add_ct(trivial_ciphertext(moved.b, 1, Sign::Minus), decomp_product(moved.a[0], it->second.at(x.level))),
            x.level};
  }

  BgvCiphertext rotate(const BgvCiphertext& x, std::size_t h) const {
    h %= half();
    if (h == 0) return x;
    if (has_galois_key(galois_element(h))) return apply_galois(x, galois_element(h));
    BgvCiphertext r = x;
    for (std::size_t bit = 1; bit < half(); bit <<= 1)
      if (h & bit) r = apply_galois(r, galois_element(bit));
    return r;
  }

  BgvCiphertext swap_halves(const BgvCiphertext& x) const { return apply_galois(x, swap_element()); }

 private:
  void check_pair(const BgvCiphertext& x, const BgvCiphertext& y) const {
    require(x.level == y.level, ErrorCode::ParamMismatch, "ciphertexts are at different levels");
    require_same_shape(x.ct, y.ct);
  }

  std::vector<GlevCiphertext> per_level(const GlevCiphertext& top) const {
    std::vector<GlevCiphertext> out;
    for (std::size_t l = 0; l < moduli_.size(); ++l) {
      GlevCiphertext g;
      g.gadget = GadgetSpec(moduli_[l], top.gadget.beta, top.gadget.ell, GadgetKind::Power);
      for (const auto& lv : top.levels) g.levels.push_back(lift_ct(lv, moduli_[l]));
      out.push_back(g);
    }
    return out;
  }

  BgvParams params_;
  EncodingMatrices mats_;
  std::vector<u64> chain_;
  std::vector<BigInt> moduli_;
  std::vector<GlweParams> glwe_;
  SecretKey sk_;
  std::vector<GlevCiphertext> relin_;
  std::map<u64, std::vector<GlevCiphertext>> galois_;
  bool has_keys_ = false;
};

}  // namespace fhe
