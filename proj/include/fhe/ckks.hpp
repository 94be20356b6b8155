#pragma once

// CKKS: approximate complex encoding, leveled multiplication with rescaling
// over a prime chain, both relinearization methods, rotation, conjugation,
// sparse packing, and the plaintext-level bootstrapping maps.

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <vector>

#include "fhe/glwe.hpp"
#include "fhe/transform.hpp"

namespace fhe {

// ---------------------------------------------------------------------------
// Encoding.

inline double to_double(const BigInt& x) { return x.convert_to<double>(); }

// Slots followed by their forward-ordered conjugates.
inline CVector hermitian_extend(const CVector& half) {
  CVector full(half);
  for (const auto& z : half) full.push_back(std::conj(z));
  return full;
}

// Real coefficient vector W * I_R * v' / n before scaling.
inline std::vector<double> ckks_embed(const CVector& v, const EncodingMatrices& mats) {
  require(v.size() * 2 == mats.n, ErrorCode::LengthMismatch, "expects n/2 slots");
  auto m = cmat_vec(mats.cw_hat, reverse_vec(hermitian_extend(v)));
  std::vector<double> out(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = m[i].real() / static_cast<double>(mats.n);
  return out;
}

// round(delta * m).
inline std::vector<i64> ckks_encode(const CVector& v, double delta, const EncodingMatrices& mats) {
  auto m = ckks_embed(v, mats);
  std::vector<i64> out(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double x = delta * m[i];
    require(std::fabs(x) < 9.0e18, ErrorCode::ScaleOverflow, "scaled coefficient exceeds 63 bits");
    out[i] = static_cast<i64>(std::floor(x + 0.5));
  }
  return out;
}

// All n slots W* * m / delta; the second half mirrors the first as conjugates.
inline CVector ckks_decode_full(const std::vector<double>& coeffs, double delta, const EncodingMatrices& mats) {
  require(coeffs.size() == mats.n, ErrorCode::LengthMismatch, "expects n coefficients");
  CVector m(coeffs.begin(), coeffs.end());
  auto v = cmat_vec(mats.cw_hat_star, m);
  for (auto& z : v) z /= delta;
  return v;
}

inline CVector ckks_decode(const std::vector<double>& coeffs, double delta, const EncodingMatrices& mats) {
  auto v = ckks_decode_full(coeffs, delta, mats);
  v.resize(mats.n / 2);
  return v;
}

inline CVector ckks_decode(const std::vector<i64>& coeffs, double delta, const EncodingMatrices& mats) {
  return ckks_decode(std::vector<double>(coeffs.begin(), coeffs.end()), delta, mats);
}

// Slots of a sub-ring of degree sub_n packed into Y = X^(n / sub_n). Decoding at
// degree n shows n / sub_n repetitions of the sub_n / 2 input slots.
inline std::vector<i64> sparse_encode(const CVector& v, double delta, std::size_t n, std::size_t sub_n) {
  require(sub_n >= 2 && (sub_n & (sub_n - 1)) == 0 && sub_n <= n && n % sub_n == 0, ErrorCode::BadSubring,
          "sub-ring degree must be a power of two dividing n");
  auto small = ckks_encode(v, delta, build_matrices(sub_n, Field::Complex));
  std::vector<i64> out(n, 0);
  const std::size_t stride = n / sub_n;
  for (std::size_t i = 0; i < sub_n; ++i) out[i * stride] = small[i];
  return out;
}

inline double max_abs_error(const CVector& a, const CVector& b) {
  require(a.size() == b.size(), ErrorCode::LengthMismatch, "vector lengths differ");
  double e = 0;
  for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b[i]));
  return e;
}

inline double max_abs(const CVector& a) {
  double e = 0;
  for (const auto& z : a) e = std::max(e, std::abs(z));
  return e;
}

// Left rotation of the n/2 slots by h.
inline CVector rotate_slots_clear(const CVector& v, std::size_t h) {
  CVector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[(i + h) % v.size()];
  return out;
}

// ---------------------------------------------------------------------------
// Bootstrapping maps at the plaintext level.

// (q0 / 2pi) sin(2pi x / q0): Taylor series of exp(2pi i x / (2^r q0)) up to
// degree d0, squared r times, then the imaginary part.
struct SineApprox {
  double q0 = 1;
  unsigned r = 6;
  unsigned d0 = 7;
  CVector coeffs;  // coefficients in x of the inner Taylor polynomial

  SineApprox(double q0_, unsigned r_, unsigned d0_) : q0(q0_), r(r_), d0(d0_) {
    require(r >= 1 && d0 >= 3, ErrorCode::BadExponent, "needs r >= 1 and d0 >= 3");
    const std::complex<double> step(0, 2 * std::numbers::pi / (std::ldexp(1.0, static_cast<int>(r)) * q0));
    std::complex<double> c = 1;
    for (unsigned k = 0; k <= d0; ++k) {
      coeffs.push_back(c);
      c *= step / static_cast<double>(k + 1);
    }
  }

  std::complex<double> exp_approx(double x) const {
    std::complex<double> w = 0;
    for (std::size_t k = coeffs.size(); k-- > 0;) w = w * x + coeffs[k];
    for (unsigned i = 0; i < r; ++i) w *= w;
    return w;
  }

  // (-i/2)(w - conj(w)) = Im(w), rescaled by q0 / 2pi.
  double operator()(double x) const { return q0 / (2 * std::numbers::pi) * exp_approx(x).imag(); }
};

// CoeffToSlot (W * I_R / n) and SlotToCoeff (W*) with their half blocks.
struct CoeffSlotMaps {
  std::size_t n = 0;
  CMatrix cts, stc;
  CMatrix cts_blocks[2][2], stc_blocks[2][2];

  // Coefficients m (length n) from slots v (length n/2), split into halves.
  std::pair<CVector, CVector> coeff_to_slot(const CVector& v) const {
    auto m = cmat_vec(cts, reverse_vec(hermitian_extend(v)));
    const std::size_t h = n / 2;
    return {CVector(m.begin(), m.begin() + h), CVector(m.begin() + h, m.end())};
  }

  CVector slot_to_coeff(const CVector& lo, const CVector& hi) const {
    CVector m(lo);
    m.insert(m.end(), hi.begin(), hi.end());
    auto v = cmat_vec(stc, m);
    v.resize(n / 2);
    return v;
  }

  // Slot-domain matrices A, B with half b of m = A v + B conj(v).
  std::pair<CMatrix, CMatrix> cts_slot_maps(std::size_t half) const {
    const std::size_t h = n / 2;
    CMatrix a(h, CVector(h)), b(h, CVector(h));
    // I_R v' puts reversed conj(v) in the top half and reversed v in the bottom.
    for (std::size_t r = 0; r < h; ++r)
      for (std::size_t c = 0; c < h; ++c) {
        b[r][c] = cts_blocks[half][0][r][h - 1 - c];
        a[r][c] = cts_blocks[half][1][r][h - 1 - c];
      }
    return {a, b};
  }
};

inline CoeffSlotMaps coeff_slot_maps(std::size_t n) {
  auto mats = build_matrices(n, Field::Complex);
  CoeffSlotMaps maps;
  maps.n = n;
  maps.stc = mats.cw_hat_star;
  maps.cts.assign(n, CVector(n));
  const std::size_t h = n / 2;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) maps.cts[r][c] = mats.cw_hat[r][c] / static_cast<double>(n);
  for (std::size_t br = 0; br < 2; ++br)
    for (std::size_t bc = 0; bc < 2; ++bc) {
      maps.cts_blocks[br][bc].assign(h, CVector(h));
      maps.stc_blocks[br][bc].assign(h, CVector(h));
      for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < h; ++c) {
          maps.cts_blocks[br][bc][r][c] = maps.cts[br * h + r][bc * h + c];
          maps.stc_blocks[br][bc][r][c] = maps.stc[br * h + r][bc * h + c];
        }
    }
  return maps;
}

// ---------------------------------------------------------------------------
// Context.

enum class RelinMethod { Decomp, EvkG };

struct CkksParams {
  std::size_t n = 64;
  double delta = 1 << 20;
  unsigned base_bits = 40;  // w0, at least 2^10 * delta
  std::size_t levels = 4;   // L: primes w1..wL near delta
  double sigma = 3.2;
  RelinMethod relin = RelinMethod::Decomp;
  // Gadget keys add about beta * sigma * sqrt(ell * n) at scale delta, too much for
  // delta = 2^20; the auxiliary modulus divides key noise away.
  RelinMethod galois = RelinMethod::EvkG;
  u64 beta = u64{1} << 16;

  static CkksParams desk() { return {}; }
};

struct CkksCiphertext {
  GlweCiphertext ct;
  std::size_t level = 0;
  double scale = 1;
};

// Primes = 1 mod 2n ordered by distance from target.
inline std::vector<u64> primes_near(u64 target, std::size_t n, std::size_t count) {
  const u64 step = 2 * n;
  const u64 base = target - target % step + 1;
  std::vector<u64> found;
  std::size_t up = 0, down = 0;
  for (u64 c = base; up < count; c += step)
    if (c > 2 && is_prime(c)) found.push_back(c), ++up;
  for (u64 c = base; down < count && c > step; ) {
    c -= step;
    if (c > 2 && is_prime(c)) found.push_back(c), ++down;
  }
  auto dist = [target](u64 c) { return c > target ? c - target : target - c; };
  std::sort(found.begin(), found.end(), [&](u64 a, u64 b) { return dist(a) < dist(b); });
  found.resize(count);
  return found;
}

class CkksContext {
 public:
  explicit CkksContext(const CkksParams& p) : params_(p), mats_(build_matrices(p.n, Field::Complex)) {
    require(p.levels >= 1, ErrorCode::BadModulus, "needs at least one rescaling prime");
    require(std::ldexp(1.0, static_cast<int>(p.base_bits)) >= 1024.0 * p.delta, ErrorCode::BadModulus,
            "base prime must be at least 2^10 * delta");
    const u64 d = static_cast<u64>(p.delta);
    const auto w = primes_near(d, p.n, p.levels);
    const u64 w0 = gen_ntt_primes(PrimeSpec{p.base_bits, 1, 2 * p.n, true}, 1, w).front();
    // The nearest prime sits on top, where the first rescale happens.
    chain_.push_back(w0);
    chain_.insert(chain_.end(), w.rbegin(), w.rend());
    BigInt q = 1;
    for (u64 x : chain_) {
      q *= x;
      moduli_.push_back(q);
      glwe_.push_back(GlweParams::message_scaled(1, p.n, q, 2, Sign::Minus, p.sigma));
    }
  }

  const CkksParams& params() const { return params_; }
  const EncodingMatrices& matrices() const { return mats_; }
  const std::vector<u64>& chain() const { return chain_; }
  const BigInt& modulus(std::size_t level) const { return moduli_.at(level); }
  std::size_t top_level() const { return params_.levels; }
  std::size_t slots() const { return params_.n / 2; }
  BigInt aux_modulus() const { return moduli_.back() * moduli_.back(); }

  void keygen(Prng& rng) {
    sk_ = secret_keygen(glwe_.back(), rng);
    const RingPoly s2 = poly_negacyclic_mul(sk_.poly(0, glwe_.back().ring), sk_.poly(0, glwe_.back().ring));
    relin_ = per_level(glev_encrypt(s2, sk_, glwe_.back(), GadgetSpec::power(moduli_.back(), params_.beta), rng));
    evk_ = aux_key(s2, rng);
    galois_.clear();
    galois_glev_.clear();
    has_keys_ = true;
  }

  const SecretKey& secret_key() const { return sk_; }

  u64 galois_element(std::size_t h) const { return mats_.J[h % slots()]; }
  u64 conj_element() const { return 2 * params_.n - 1; }

  void gen_galois_key(u64 k, Prng& rng) {
    require(has_keys_, ErrorCode::KeyMismatch, "generate keys first");
    if (galois_.count(k)) return;
    const RingPoly moved = apply_automorphism(sk_.poly(0, glwe_.back().ring), static_cast<i64>(k));
    if (params_.galois == RelinMethod::EvkG) {
      galois_[k] = aux_key(moved, rng);
    } else {
      galois_glev_[k] = per_level(glev_encrypt(moved, sk_, glwe_.back(), GadgetSpec::power(moduli_.back(), params_.beta), rng));
      galois_[k] = {};
    }
  }
  void gen_rotation_key(std::size_t h, Prng& rng) { gen_galois_key(galois_element(h), rng); }
  void gen_conj_key(Prng& rng) { gen_galois_key(conj_element(), rng); }
  void gen_rotation_keys(Prng& rng) {
    for (std::size_t h = 1; h < slots(); h <<= 1) gen_rotation_key(h, rng);
    gen_conj_key(rng);
  }

  // ---- encoding and encryption

  std::vector<i64> encode(const CVector& v, double scale) const {
    auto m = ckks_encode(v, scale, mats_);
    const double limit = to_double(BigInt(chain_[0])) / 2;
    for (i64 c : m) require(std::fabs(static_cast<double>(c)) < limit, ErrorCode::ScaleOverflow, "scaled slots exceed w0/2");
    return m;
  }

  CkksCiphertext encrypt(const CVector& v, Prng& rng) const { return encrypt_at(v, top_level(), rng); }

  CkksCiphertext encrypt_at(const CVector& v, std::size_t level, Prng& rng) const {
    require(has_keys_, ErrorCode::KeyMismatch, "generate keys first");
    const auto& p = glwe_.at(level);
    return {encrypt_payload(RingPoly::from_ints(p.ring, encode(v, params_.delta)), sk_, p, rng), level, params_.delta};
  }

  std::vector<double> decrypt_coeffs(const CkksCiphertext& c) const {
    auto ph = phase(c.ct, sk_).centered();
    std::vector<double> out(ph.size());
    for (std::size_t i = 0; i < ph.size(); ++i) out[i] = to_double(ph[i]);
    return out;
  }

  CVector decrypt(const CkksCiphertext& c) const { return ckks_decode(decrypt_coeffs(c), c.scale, mats_); }
  CVector decrypt_full(const CkksCiphertext& c) const { return ckks_decode_full(decrypt_coeffs(c), c.scale, mats_); }

  // ---- level management

  CkksCiphertext rescale(const CkksCiphertext& c) const {
    require(c.level >= 1, ErrorCode::LevelExhausted, "no prime left to rescale by");
    const u64 w = chain_[c.level];
    return {rescale_ct(c.ct, 1, w, moduli_[c.level - 1]), c.level - 1, c.scale / static_cast<double>(w)};
  }

  CkksCiphertext mod_drop(const CkksCiphertext& c) const {
    require(c.level >= 1, ErrorCode::LevelExhausted, "already at the base level");
    return {lift_ct(c.ct, moduli_[c.level - 1]), c.level - 1, c.scale};
  }

  CkksCiphertext drop_to(CkksCiphertext c, std::size_t level) const {
    while (c.level > level) c = mod_drop(c);
    return c;
  }

  // ---- arithmetic

  CkksCiphertext add(const CkksCiphertext& x, const CkksCiphertext& y) const {
    check_pair(x, y);
    return {add_ct(x.ct, y.ct), x.level, x.scale};
  }

  CkksCiphertext sub(const CkksCiphertext& x, const CkksCiphertext& y) const {
    check_pair(x, y);
    return {sub_ct(x.ct, y.ct), x.level, x.scale};
  }

  CkksCiphertext add_plain(const CkksCiphertext& x, const CVector& v) const {
    const auto& ring = x.ct.params();
    return {fhe::add_plain(x.ct, RingPoly::from_ints(ring, encode(v, x.scale))), x.level, x.scale};
  }

  // Plaintext encoded at delta; consumes one level.
  CkksCiphertext mul_plain(const CkksCiphertext& x, const CVector& v) const {
    require(x.level >= 1, ErrorCode::LevelExhausted, "no level left for a product");
    return rescale(mul_plain_raw(x, v));
  }

  // Tensor, relinearize, rescale by w_level.
  CkksCiphertext mul(const CkksCiphertext& x, const CkksCiphertext& y) const { return mul(x, y, params_.relin); }

  CkksCiphertext mul(const CkksCiphertext& x, const CkksCiphertext& y, RelinMethod method) const {
    require(x.level == y.level, ErrorCode::ParamMismatch, "ciphertexts are at different levels");
    require(x.level >= 1, ErrorCode::LevelExhausted, "no level left for a product");
    const auto& a1 = x.ct.a[0];
    const auto& a2 = y.ct.a[0];
    const RingPoly d0 = poly_negacyclic_mul(x.ct.b, y.ct.b);
    const RingPoly d1 = poly_add(poly_negacyclic_mul(x.ct.b, a2), poly_negacyclic_mul(y.ct.b, a1));
    const RingPoly d2 = poly_negacyclic_mul(a1, a2);
    GlweCiphertext acc;
    acc.sign = Sign::Minus;
    acc.a = {d1};
    acc.b = d0;
    acc = add_ct(acc, relinearize(d2, x.level, method));
    return rescale({acc, x.level, x.scale * y.scale});
  }

  CkksCiphertext square(const CkksCiphertext& x) const { return mul(x, x); }

  // ---- rotations

  CkksCiphertext apply_galois(const CkksCiphertext& x, u64 k) const {
    auto it = galois_.find(k);
    require(it != galois_.end(), ErrorCode::MissingGaloisKey, "no Galois key for this automorphism");
    const GlweCiphertext moved = apply_automorphism_ct(x.ct, static_cast<i64>(k));
    const GlweCiphertext part = params_.galois == RelinMethod::EvkG ? aux_switch(moved.a[0], it->second.at(x.level), x.level)
                                                                    : decomp_product(moved.a[0], galois_glev_.at(k).at(x.level));
    return {add_ct(trivial_ciphertext(moved.b, 1, Sign::Minus), part), x.level, x.scale};
  }

  CkksCiphertext rotate(const CkksCiphertext& x, std::size_t h) const {
    h %= slots();
    if (h == 0) return x;
    if (galois_.count(galois_element(h))) return apply_galois(x, galois_element(h));
    require(galois_.count(galois_element(1)), ErrorCode::MissingGaloisKey, "no Galois key for this rotation");
    CkksCiphertext r = x;
    for (std::size_t bit = 1; bit < slots(); bit <<= 1)
      if (h & bit) r = apply_galois(r, galois_element(bit));
    return r;
  }

  CkksCiphertext conjugate(const CkksCiphertext& x) const { return apply_galois(x, conj_element()); }

  // Slots A v + B conj(v) for (n/2) x (n/2) complex matrices; consumes one level.
  CkksCiphertext linear_transform(const CkksCiphertext& x, const CMatrix& a, const CMatrix& b) const {
    const std::size_t h = slots();
    require(a.size() == h && b.size() == h, ErrorCode::LengthMismatch, "matrices must be n/2 square");
    require(x.level >= 1, ErrorCode::LevelExhausted, "no level left for a product");
    auto diag = [&](const CMatrix& m, std::size_t i) {
      CVector d(h);
      for (std::size_t r = 0; r < h; ++r) d[r] = m[r][(r + i) % h];
      return d;
    };
    const CkksCiphertext y = conjugate(x);
    GlweCiphertext acc = trivial_ciphertext(RingPoly(x.ct.params()), 1, Sign::Minus);
    double scale = x.scale * params_.delta;
    for (std::size_t i = 0; i < h; ++i) {
      acc = add_ct(acc, mul_plain_raw(rotate(x, i), diag(a, i)).ct);
      acc = add_ct(acc, mul_plain_raw(rotate(y, i), diag(b, i)).ct);
    }
    return rescale({acc, x.level, scale});
  }

 private:
  void check_pair(const CkksCiphertext& x, const CkksCiphertext& y) const {
    require(x.level == y.level, ErrorCode::ParamMismatch, "ciphertexts are at different levels");
    require(std::fabs(x.scale / y.scale - 1) < 1e-3, ErrorCode::ParamMismatch, "ciphertext scales differ");
  }

  CkksCiphertext mul_plain_raw(const CkksCiphertext& x, const CVector& v) const {
    const auto& ring = x.ct.params();
    return {fhe::mul_plain(x.ct, RingPoly::from_ints(ring, encode(v, params_.delta))), x.level, x.scale * params_.delta};
  }

  GlweCiphertext relinearize(const RingPoly& d2, std::size_t level, RelinMethod method) const {
    if (method == RelinMethod::Decomp) return decomp_product(d2, relin_.at(level));
    return aux_switch(d2, evk_.at(level), level);
  }

  // Encryptions of g * target at g * q_l for every level, g = q_L^2.
  std::vector<GlweCiphertext> aux_key(const RingPoly& target, Prng& rng) const {
    const BigInt g = aux_modulus();
    const GlweParams big = glwe_.back().with_modulus(g * moduli_.back());
    const GlweCiphertext top = encrypt_payload(poly_scalar_mul(poly_lift(target, big.ring.q), g), sk_, big, rng);
    std::vector<GlweCiphertext> out;
    for (std::size_t l = 0; l <= top_level(); ++l) out.push_back(lift_ct(top, g * moduli_[l]));
    return out;
  }

  // round(d * key / g) mod q_level: phase d * target plus noise divided by g.
  GlweCiphertext aux_switch(const RingPoly& d, const GlweCiphertext& key, std::size_t level) const {
    const RingPoly lifted = poly_lift(d, key.params().q);
    const BigInt g = aux_modulus();
    GlweCiphertext out;
    out.sign = Sign::Minus;
    out.a = {poly_rescale(poly_negacyclic_mul(lifted, key.a[0]), 1, g, moduli_[level])};
    out.b = poly_rescale(poly_negacyclic_mul(lifted, key.b), 1, g, moduli_[level]);
    return out;
  }

  // A top-level GLev reduced to every level; the power gadget keeps its length.
  std::vector<GlevCiphertext> per_level(const GlevCiphertext& top) const {
    std::vector<GlevCiphertext> out;
    for (std::size_t l = 0; l <= top_level(); ++l) {
      GlevCiphertext g;
      g.gadget = GadgetSpec(moduli_[l], top.gadget.beta, top.gadget.ell, GadgetKind::Power);
      for (const auto& lv : top.levels) g.levels.push_back(lift_ct(lv, moduli_[l]));
      out.push_back(g);
    }
    return out;
  }

  CkksParams params_;
  EncodingMatrices mats_;
  std::vector<u64> chain_;
  std::vector<BigInt> moduli_;
  std::vector<GlweParams> glwe_;
  SecretKey sk_;
  std::vector<GlevCiphertext> relin_;
  std::vector<GlweCiphertext> evk_;
  std::map<u64, std::vector<GlweCiphertext>> galois_;
  std::map<u64, std::vector<GlevCiphertext>> galois_glev_;
  bool has_keys_ = false;
};

}  // namespace fhe
