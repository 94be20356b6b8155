#pragma once

// Residue number system engine. Residues are centered: value x mod m is kept
// in [-m/2, m/2). Word moduli stay below 2^62 so products fit in i128.

#include <algorithm>
#include <numeric>
#include <vector>

#include "fhe/glwe.hpp"

namespace fhe {

using Residues = std::vector<i64>;

inline i64 cmod(i128 x, u64 m) { return centered_reduce(x, static_cast<i64>(m)); }

class RnsBase {
 public:
  RnsBase() = default;
  explicit RnsBase(std::vector<u64> moduli) : moduli_(std::move(moduli)) {
    require(!moduli_.empty(), ErrorCode::BadModulus, "RNS base needs at least one modulus");
    product_ = 1;
    for (std::size_t i = 0; i < moduli_.size(); ++i) {
      require(moduli_[i] >= 2 && moduli_[i] < (u64{1} << 62), ErrorCode::BadModulus, "RNS modulus out of range");
      for (std::size_t j = 0; j < i; ++j)
        require(std::gcd(moduli_[i], moduli_[j]) == 1, ErrorCode::BadModulus, "RNS moduli must be pairwise coprime");
      product_ *= moduli_[i];
    }
    for (u64 m : moduli_) {
      BigInt y = product_ / m;
      y_.push_back(y);
      z_.push_back(static_cast<u64>(mod_inverse(mod(y, BigInt(m)), BigInt(m))));
    }
  }

  std::size_t size() const { return moduli_.size(); }
  u64 operator[](std::size_t i) const { return moduli_[i]; }
  const std::vector<u64>& moduli() const { return moduli_; }
  const BigInt& product() const { return product_; }
  const BigInt& y(std::size_t i) const { return y_[i]; }  // q / q_i
  u64 z(std::size_t i) const { return z_[i]; }            // (q / q_i)^-1 mod q_i

  bool contains(u64 m) const { return std::find(moduli_.begin(), moduli_.end(), m) != moduli_.end(); }

  RnsBase concat(const RnsBase& other) const {
    auto m = moduli_;
    m.insert(m.end(), other.moduli_.begin(), other.moduli_.end());
    return RnsBase(m);
  }

  RnsBase slice(std::size_t first, std::size_t count) const {
    require(first + count <= size() && count > 0, ErrorCode::NotSubBase, "slice outside base");
    return RnsBase(std::vector<u64>(moduli_.begin() + static_cast<std::ptrdiff_t>(first),
                                    moduli_.begin() + static_cast<std::ptrdiff_t>(first + count)));
  }

  bool operator==(const RnsBase& o) const { return moduli_ == o.moduli_; }

 private:
  std::vector<u64> moduli_;
  BigInt product_;
  std::vector<BigInt> y_;
  std::vector<u64> z_;
};

inline Residues crt_to_rns(const BigInt& x, const RnsBase& base) {
  Residues r(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) r[i] = static_cast<i64>(centered_reduce(x, BigInt(base[i])));
  return r;
}

// Canonical value in [0, q).
inline BigInt rns_to_int(const Residues& r, const RnsBase& base) {
  require(r.size() == base.size(), ErrorCode::LengthMismatch, "residue count differs from base size");
  BigInt acc = 0;
  for (std::size_t i = 0; i < r.size(); ++i)
    acc += BigInt(cmod(static_cast<i128>(r[i]) * base.z(i), base[i])) * base.y(i);
  return mod(acc, base.product());
}

inline BigInt rns_to_int_centered(const Residues& r, const RnsBase& base) {
  return centered_reduce(rns_to_int(r, base), base.product());
}

// The unreduced CRT sum sum_i |x_i z_i|_{q_i} y_i = x + u q.
inline BigInt fast_bconv_sum(const Residues& x, const RnsBase& from) {
  BigInt acc = 0;
  for (std::size_t i = 0; i < from.size(); ++i)
    acc += BigInt(cmod(static_cast<i128>(x[i]) * from.z(i), from[i])) * from.y(i);
  return acc;
}

// Approximate conversion q -> b: result represents x + u q with |u| <= k/2 + 1.
class FastBConv {
 public:
  FastBConv(const RnsBase& from, const RnsBase& to) : from_(from), to_(to) {
    require(gcd(from.product(), to.product()) == 1, ErrorCode::BaseOverlap, "source and target bases share a factor");
    y_mod_.assign(from.size(), std::vector<u64>(to.size()));
    for (std::size_t i = 0; i < from.size(); ++i)
      for (std::size_t j = 0; j < to.size(); ++j)
        y_mod_[i][j] = static_cast<u64>(mod(from.y(i), BigInt(to[j])));
  }

  Residues operator()(const Residues& x) const {
    require(x.size() == from_.size(), ErrorCode::LengthMismatch, "residue count differs from base size");
    Residues v(from_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = cmod(static_cast<i128>(x[i]) * from_.z(i), from_[i]);
    Residues out(to_.size());
    for (std::size_t j = 0; j < to_.size(); ++j) {
      i128 acc = 0;
      for (std::size_t i = 0; i < v.size(); ++i) acc = (acc + static_cast<i128>(v[i]) * static_cast<i128>(y_mod_[i][j])) % static_cast<i128>(to_[j]);
      out[j] = cmod(acc, to_[j]);
    }
    return out;
  }

  const RnsBase& from() const { return from_; }
  const RnsBase& to() const { return to_; }

 private:
  RnsBase from_, to_;
  std::vector<std::vector<u64>> y_mod_;
};

inline Residues fast_bconv(const Residues& x, const RnsBase& from, const RnsBase& to) { return FastBConv(from, to)(x); }

// Montgomery-style correction: conversion q -> b with overflow u' in {-1, 0, 1}.
class SmallMont {
 public:
  SmallMont(const RnsBase& q, const RnsBase& b, u64 b_alpha)
      : q_(q), b_(b), b_alpha_(check_aux(q, b, b_alpha)), conv_(q, b.concat(RnsBase({b_alpha}))) {
    q_inv_alpha_ = static_cast<u64>(mod_inverse(mod(q.product(), BigInt(b_alpha)), BigInt(b_alpha)));
    for (std::size_t i = 0; i < b.size(); ++i) {
      q_mod_b_.push_back(static_cast<u64>(mod(q.product(), BigInt(b[i]))));
      alpha_inv_.push_back(mod_inverse(b_alpha % b[i], b[i]));
    }
    for (std::size_t i = 0; i < q.size(); ++i) alpha_mod_q_.push_back(b_alpha % q[i]);
  }

  static u64 check_aux(const RnsBase& q, const RnsBase& b, u64 b_alpha) {
    require(is_prime(b_alpha), ErrorCode::BadAuxModulus, "auxiliary modulus must be prime");
    require(!b.contains(b_alpha) && !q.contains(b_alpha), ErrorCode::BadAuxModulus,
            "auxiliary modulus must be outside both bases");
    // |u'| < 2 needs b_alpha above the worst fast-conversion overflow.
    require(b_alpha > q.size() + 4, ErrorCode::BadAuxModulus, "auxiliary modulus too small for the source base");
    return b_alpha;
  }

  // c over b and b_alpha, with c = FastBConv(|b_alpha x|_q).
  Residues reduce(const Residues& c) const {
    require(c.size() == b_.size() + 1, ErrorCode::LengthMismatch, "expected residues over b and b_alpha");
    const i64 cp = cmod(static_cast<i128>(c.back()) * q_inv_alpha_, b_alpha_);
    Residues r(b_.size());
    for (std::size_t i = 0; i < b_.size(); ++i) {
      i128 v = static_cast<i128>(c[i]) - static_cast<i128>(q_mod_b_[i]) * cp;
      r[i] = cmod((v % static_cast<i128>(b_[i])) * static_cast<i128>(alpha_inv_[i]), b_[i]);
    }
    return r;
  }

  // Full pipeline from residues over q.
  Residues operator()(const Residues& x) const {
    require(x.size() == q_.size(), ErrorCode::LengthMismatch, "residue count differs from base size");
    Residues scaled(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) scaled[i] = cmod(static_cast<i128>(x[i]) * alpha_mod_q_[i], q_[i]);
    return reduce(conv_(scaled));
  }

 private:
  RnsBase q_, b_;
  u64 b_alpha_;
  FastBConv conv_;
  u64 q_inv_alpha_ = 0;
  std::vector<u64> q_mod_b_, alpha_inv_, alpha_mod_q_;
};

inline Residues small_mont(const Residues& c, const RnsBase& q, const RnsBase& b, u64 b_alpha) {
  return SmallMont(q, b, b_alpha).reduce(c);
}

// Exact conversion b * b_alpha -> q for inputs with |x|_b = x + mu b, |mu| <= lambda.
class FastBConvEx {
 public:
  FastBConvEx(const RnsBase& b, u64 b_alpha, const RnsBase& q)
      : b_(b), b_alpha_(b_alpha), to_alpha_(b, RnsBase({b_alpha})), to_q_(b, q) {
    require(gcd(q.product(), BigInt(b_alpha)) == 1, ErrorCode::BaseOverlap, "target base shares the auxiliary modulus");
    b_inv_alpha_ = static_cast<u64>(mod_inverse(mod(b.product(), BigInt(b_alpha)), BigInt(b_alpha)));
    for (std::size_t j = 0; j < q.size(); ++j) b_mod_q_.push_back(static_cast<u64>(mod(b.product(), BigInt(q[j]))));
  }

  Residues operator()(const Residues& x, u64 lambda) const {
    require(x.size() == b_.size() + 1, ErrorCode::LengthMismatch, "expected residues over b and b_alpha");
    require(b_alpha_ >= 2 * (b_.size() + lambda), ErrorCode::InputTooLarge, "auxiliary modulus below 2(l + lambda)");
    Residues xb(x.begin(), x.end() - 1);
    const i64 x_alpha = x.back();
    const i64 conv_alpha = to_alpha_(xb)[0];
    const i64 gamma = cmod(static_cast<i128>(conv_alpha - x_alpha) * b_inv_alpha_, b_alpha_);
    Residues out = to_q_(xb);
    for (std::size_t j = 0; j < out.size(); ++j)
      out[j] = cmod(static_cast<i128>(out[j]) - static_cast<i128>(gamma) * b_mod_q_[j], to_q_.to()[j]);
    return out;
  }

  // Smallest lambda covering inputs of magnitude at most bound.
  u64 lambda_for(const BigInt& bound) const { return static_cast<u64>(bound / b_.product()) + 1; }

 private:
  RnsBase b_;
  u64 b_alpha_;
  FastBConv to_alpha_, to_q_;
  u64 b_inv_alpha_ = 0;
  std::vector<u64> b_mod_q_;
};

// q -> q u b; result chi = x + u q mod qb.
inline Residues mod_raise_rns(const Residues& x, const FastBConv& conv) {
  Residues out = x;
  Residues ext = conv(x);
  out.insert(out.end(), ext.begin(), ext.end());
  return out;
}

// Keeps the residues of the moduli in keep; exact.
inline Residues mod_drop_rns(const Residues& x, const RnsBase& from, const RnsBase& keep) {
  require(x.size() == from.size(), ErrorCode::LengthMismatch, "residue count differs from base size");
  Residues out;
  for (u64 m : keep.moduli()) {
    auto it = std::find(from.moduli().begin(), from.moduli().end(), m);
    require(it != from.moduli().end(), ErrorCode::NotSubBase, "modulus not in source base");
    out.push_back(x[static_cast<std::size_t>(it - from.moduli().begin())]);
  }
  return out;
}

// qb -> q: approximately round(chi / b), error below l/2 + 2. The first k
// moduli of the source form q, the rest form b.
class ModSwitchRns {
 public:
  ModSwitchRns(const RnsBase& qb, std::size_t k)
      : q_((require(k > 0 && k < qb.size(), ErrorCode::NotSubBase, "q must be a proper leading sub-base"), qb.slice(0, k))),
        b_(qb.slice(k, qb.size() - k)),
        conv_(b_, q_) {
    for (std::size_t i = 0; i < k; ++i) b_inv_.push_back(mod_inverse(static_cast<u64>(mod(b_.product(), BigInt(q_[i]))), q_[i]));
  }

  Residues operator()(const Residues& chi) const {
    require(chi.size() == q_.size() + b_.size(), ErrorCode::LengthMismatch, "residue count differs from base size");
    Residues xb(chi.begin() + static_cast<std::ptrdiff_t>(q_.size()), chi.end());
    Residues hat = conv_(xb);
    Residues out(q_.size());
    for (std::size_t i = 0; i < q_.size(); ++i)
      out[i] = cmod((static_cast<i128>(chi[i]) - hat[i]) % static_cast<i128>(q_[i]) * static_cast<i128>(b_inv_[i]), q_[i]);
    return out;
  }

  const RnsBase& q() const { return q_; }
  const RnsBase& b() const { return b_; }

 private:
  RnsBase q_, b_;
  FastBConv conv_;
  std::vector<u64> b_inv_;
};

// ---------------------------------------------------------------------------
// Polynomials in RNS form.

struct RnsPoly {
  RnsBase base;
  std::size_t n = 0;
  std::vector<Residues> residues;  // residues[i][j]: coefficient j modulo base[i]

  Residues coeff(std::size_t j) const {
    Residues r(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) r[i] = residues[i][j];
    return r;
  }
  void set_coeff(std::size_t j, const Residues& r) {
    for (std::size_t i = 0; i < base.size(); ++i) residues[i][j] = r[i];
  }
  // Residue polynomial i as a ring element modulo base[i].
  RingPoly residue_poly(std::size_t i) const { return RingPoly::from_ints(RingParams(n, base[i]), residues[i]); }
};

inline RnsPoly to_rns_poly(const RingPoly& f, const RnsBase& base) {
  RnsPoly r{base, f.params.n, std::vector<Residues>(base.size(), Residues(f.params.n))};
  for (std::size_t j = 0; j < f.params.n; ++j) r.set_coeff(j, crt_to_rns(f.coeffs[j], base));
  return r;
}

inline RingPoly from_rns_poly(const RnsPoly& r) {
  RingPoly f(RingParams(r.n, r.base.product()));
  for (std::size_t j = 0; j < r.n; ++j) f.coeffs[j] = rns_to_int(r.coeff(j), r.base);
  return f;
}

// Applies a per-coefficient residue map.
template <class Fn>
RnsPoly map_rns_poly(const RnsPoly& x, const RnsBase& out_base, Fn&& fn) {
  RnsPoly r{out_base, x.n, std::vector<Residues>(out_base.size(), Residues(x.n))};
  for (std::size_t j = 0; j < x.n; ++j) r.set_coeff(j, fn(x.coeff(j)));
  return r;
}

// ---------------------------------------------------------------------------
// Residue-digit key switching: each residue plays the role of a gadget digit.

struct RnsKeySwitchKey {
  RnsBase base;
  std::vector<GlweCiphertext> keys;  // keys[i] encrypts S * (q/q_i) * |(q/q_i)^-1|_{q_i}
};

inline RnsKeySwitchKey rns_keyswitch_keygen(const RingPoly& s_from, const SecretKey& to, const GlweParams& p,
                                            const RnsBase& base, Prng& rng) {
  require(p.ring.q == base.product(), ErrorCode::ParamMismatch, "ciphertext modulus must equal the base product");
  RnsKeySwitchKey ksk{base, {}};
  for (std::size_t i = 0; i < base.size(); ++i)
    ksk.keys.push_back(encrypt_payload(poly_scalar_mul(s_from, base.y(i) * base.z(i)), to, p, rng));
  return ksk;
}

// Encryption of A * S from the residues of A.
inline GlweCiphertext decomp_mult_rns(const RnsPoly& a, const std::vector<GlweCiphertext>& keys) {
  require(keys.size() == a.base.size(), ErrorCode::KeyCountMismatch, "need one key per RNS modulus");
  const RingParams& ring = keys[0].params();
  GlweCiphertext acc = trivial_ciphertext(RingPoly(ring), keys[0].k(), keys[0].sign);
  for (std::size_t i = 0; i < keys.size(); ++i)
    acc = add_ct(acc, mul_plain(keys[i], RingPoly::from_ints(ring, a.residues[i])));
  return acc;
}

// Switches a k = 1 ciphertext to the key inside ksk.
inline GlweCiphertext rns_keyswitch(const GlweCiphertext& ct, const RnsKeySwitchKey& ksk) {
  require(ct.k() == 1, ErrorCode::KeyMismatch, "residue key switching expects one mask");
  GlweCiphertext acc = decomp_mult_rns(to_rns_poly(ct.a[0], ksk.base), ksk.keys);
  GlweCiphertext base = trivial_ciphertext(ct.b, acc.k(), acc.sign);
  return ct.sign == Sign::Plus ? sub_ct(base, acc) : add_ct(base, acc);
}

// ---------------------------------------------------------------------------
// Scale-invariant decryption without big-integer arithmetic.

class BfvRnsDecryptor {
 public:
  BfvRnsDecryptor(const RnsBase& q, u64 t, u64 gamma)
      : q_(q), t_(t), gamma_(check_gamma(q, t, gamma)), conv_(q, RnsBase({gamma, t})) {
    const BigInt gt = BigInt(gamma) * t;
    for (std::size_t i = 0; i < q.size(); ++i) gt_mod_q_.push_back(static_cast<u64>(mod(gt, BigInt(q[i]))));
    neg_qinv_gamma_ = static_cast<u64>(mod_inverse(mod(-q.product(), BigInt(gamma)), BigInt(gamma)));
    neg_qinv_t_ = static_cast<u64>(mod_inverse(mod(-q.product(), BigInt(t)), BigInt(t)));
    gamma_inv_t_ = mod_inverse(gamma % t, t);
  }

  static u64 check_gamma(const RnsBase& q, u64 t, u64 gamma) {
    require(is_prime(gamma), ErrorCode::BadAuxModulus, "gamma must be prime");
    require(std::gcd(gamma, t) == 1 && !q.contains(gamma), ErrorCode::BadAuxModulus,
            "gamma must be coprime to t and q");
    return gamma;
  }

  // Residues over q of one coefficient of ct(s) = Delta m + e + k q.
  u64 operator()(const Residues& phase) const {
    Residues x(phase.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = cmod(static_cast<i128>(phase[i]) * gt_mod_q_[i], q_[i]);
    Residues c = conv_(x);
    const i64 y_gamma = cmod(static_cast<i128>(c[0]) * neg_qinv_gamma_, gamma_);
    const i64 y_t = cmod(static_cast<i128>(c[1]) * neg_qinv_t_, t_);
    return static_cast<u64>(mod(static_cast<i128>(y_t - y_gamma) * gamma_inv_t_, static_cast<i64>(t_)));
  }

  std::vector<u64> decrypt(const RnsPoly& phase) const {
    std::vector<u64> m(phase.n);
    for (std::size_t j = 0; j < phase.n; ++j) m[j] = (*this)(phase.coeff(j));
    return m;
  }

 private:
  RnsBase q_;
  u64 t_, gamma_;
  FastBConv conv_;
  std::vector<u64> gt_mod_q_;
  u64 neg_qinv_gamma_ = 0, neg_qinv_t_ = 0, gamma_inv_t_ = 0;
};

inline u64 bfv_decrypt_rns(const Residues& phase, const RnsBase& q, u64 t, u64 gamma) {
  return BfvRnsDecryptor(q, t, gamma)(phase);
}

}  // namespace fhe
