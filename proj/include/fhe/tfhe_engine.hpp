#pragma once

// Word-sized TFHE: q = 2^w with w <= 32, binary keys, RLWE accumulator.
// External products run through a double FFT when the exact sums fit well
// inside a double mantissa (key entries split into 16-bit halves), otherwise
// through an NTT over a 61-bit prime P. Both give the exact integer product
// before the final reduction mod q.

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "fhe/fft_engine.hpp"
#include "fhe/ntt_engine.hpp"
#include "fhe/tfhe.hpp"

namespace fhe {

struct TfheParams {
  std::string name;
  std::size_t lwe_dim = 0;
  std::size_t ring_dim = 0;
  unsigned log_q = 32;
  u64 t = 8;
  unsigned bsk_log_beta = 7, bsk_ell = 3;
  unsigned ks_log_beta = 7, ks_ell = 3;
  double lwe_sigma = 0.0, ring_sigma = 0.0;

  // Worked walkthrough: n = 16, q = 64, t = 8, eight key bits, exact gadgets, no noise.
  static TfheParams toy() { return {"toy", 8, 16, 6, 8, 1, 6, 1, 6, 0.0, 0.0}; }
  // Gate table: n = 8, q = 32, t = 8 (delta_hat = 2), one key bit keeps rounding within |e| <= 1.
  static TfheParams toy_gate() { return {"toy-gate", 1, 8, 5, 8, 1, 5, 1, 5, 0.0, 0.0}; }
  static TfheParams desk() { return {"desk", 630, 1024, 32, 8, 7, 3, 7, 3, 4096.0, 16.0}; }

  u64 q() const { return u64{1} << log_q; }
  u64 mask() const { return q() - 1; }
  u64 delta() const { return q() / t; }
  u64 two_n() const { return 2 * ring_dim; }
  u64 delta_hat() const { return two_n() / t; }
};

struct LweU {
  std::vector<u64> a;
  u64 b = 0;  // b = <a, s> + payload + e mod q
};

struct RlweU {
  std::vector<u64> a, b;  // b = a * S + payload + E mod q
};

// RGSW in the transform domain, Montgomery form. entry(row, level, comp).
// Transform-domain RGSW: NTT entries, or FFT spectra of the low and high
// 16-bit halves of each centered entry. Only one form is filled.
struct RgswNtt {
  unsigned ell = 0;
  std::vector<std::vector<u64>> entries;
  std::vector<Spectrum> spectra;
  const std::vector<u64>& entry(unsigned row, unsigned level, unsigned comp) const {
    return entries[(row * ell + level) * 2 + comp];
  }
  const Spectrum& spectrum(unsigned row, unsigned level, unsigned comp, unsigned half) const {
    return spectra[((row * ell + level) * 2 + comp) * 2 + half];
  }
};

struct TfheKeys {
  std::vector<i64> lwe;   // binary, lwe_dim entries
  std::vector<i64> ring;  // binary, ring_dim coefficients
};

struct BootstrapKeyU {
  std::vector<RgswNtt> bits;  // RGSW(s_i) under the ring key
  std::vector<LweU> ksk;      // ksk[i * ks_ell + j] = LWE_s(S_i * q / beta^(j+1))
};

enum class Gate { And, Or, Nand, Xor };

inline Gate parse_gate(const std::string& name) {
  if (name == "AND" || name == "and") return Gate::And;
  if (name == "OR" || name == "or") return Gate::Or;
  if (name == "NAND" || name == "nand") return Gate::Nand;
  if (name == "XOR" || name == "xor") return Gate::Xor;
  fail(ErrorCode::UnsupportedGate, "unsupported gate: " + name);
}

class TfheEngine {
 public:
  // allow_fft = false pins the NTT path.
  explicit TfheEngine(TfheParams p, bool allow_fft = true) : p_(std::move(p)) {
    require(p_.log_q >= 2 && p_.log_q <= 32, ErrorCode::BadModulus, "engine needs q = 2^w with 2 <= w <= 32");
    require((p_.t & (p_.t - 1)) == 0 && p_.t >= 2 && p_.t <= p_.q(), ErrorCode::BadModulus, "t must be a power of two");
    require(p_.two_n() % p_.t == 0, ErrorCode::BadModulus, "t must divide 2n");
    require(p_.bsk_log_beta * p_.bsk_ell <= p_.log_q && p_.ks_log_beta * p_.ks_ell <= p_.log_q, ErrorCode::InexactGadget,
            "gadget must satisfy beta^ell | q");
    P_ = aux_ntt_primes()[0];
    tab_ = ntt_tables_for(p_.ring_dim, P_);
    // Montgomery constants for R = 2^64.
    u64 inv = 1;
    for (int i = 0; i < 6; ++i) inv *= 2 - P_ * inv;
    neg_p_inv_ = ~inv + 1;
    r2_ = static_cast<u64>((0 - static_cast<u128>(P_)) % P_);  // 2^128 mod P
    lazy_terms_ = static_cast<unsigned>(~u64{0} / P_) - 1;
    // Output bound: 2 ell terms of n products of a digit (<= beta/2) and a half-entry (<= 2^15).
    const double bound = 2.0 * p_.bsk_ell * static_cast<double>(p_.ring_dim) * std::ldexp(1.0, p_.bsk_log_beta - 1 + 15);
    if (allow_fft && bound <= std::ldexp(1.0, 40)) fft_ = std::make_shared<const NegacyclicFft>(p_.ring_dim);
  }

  bool uses_fft() const { return fft_ != nullptr; }

  const TfheParams& params() const { return p_; }

  TfheKeys keygen(Prng& rng) const {
    NoiseSampler none(0.0);
    return {sample_small(SampleKind::Binary, p_.lwe_dim, none, rng), sample_small(SampleKind::Binary, p_.ring_dim, none, rng)};
  }

  // ---- LWE

  LweU encrypt_payload(u64 payload, const std::vector<i64>& key, double sigma, Prng& rng) const {
    LweU ct;
    ct.a.resize(key.size());
    u64 acc = payload + static_cast<u64>(NoiseSampler(sigma).sample(rng));
    for (std::size_t i = 0; i < key.size(); ++i) {
      ct.a[i] = rng.next_u64() & p_.mask();
      if (key[i]) acc += ct.a[i];
    }
    ct.b = acc & p_.mask();
    return ct;
  }

  LweU encrypt(i64 m, const std::vector<i64>& key, Prng& rng) const {
    return encrypt_payload(static_cast<u64>(m) * p_.delta(), key, p_.lwe_sigma, rng);
  }

  u64 phase(const LweU& ct, const std::vector<i64>& key) const {
    require(ct.a.size() == key.size(), ErrorCode::KeyMismatch, "LWE dimension differs from key");
    u64 acc = ct.b;
    for (std::size_t i = 0; i < key.size(); ++i)
      if (key[i]) acc -= ct.a[i];
    return acc & p_.mask();
  }

  // Signed phase in [-q/2, q/2).
  i64 centered_phase(const LweU& ct, const std::vector<i64>& key) const {
    return centered_reduce(static_cast<i128>(phase(ct, key)), static_cast<i64>(p_.q()));
  }

  // Plaintext in [0, t).
  u64 decrypt(const LweU& ct, const std::vector<i64>& key) const {
    const u64 ph = phase(ct, key);
    return ((ph + p_.delta() / 2) >> (p_.log_q - log2_exact(p_.t))) & (p_.t - 1);
  }

  LweU encrypt_bit(bool bit, const std::vector<i64>& key, Prng& rng) const { return encrypt(bit ? 1 : -1, key, rng); }
  // +1 decodes to 1; anything in the negative half to 0.
  bool decrypt_bit(const LweU& ct, const std::vector<i64>& key) const { return centered_phase(ct, key) > 0; }

  LweU add(const LweU& x, const LweU& y) const { return combine(x, y, 1, 1, 0); }
  LweU sub(const LweU& x, const LweU& y) const { return combine(x, y, 1, static_cast<u64>(-1), 0); }

  // cx * x + cy * y + constant, mod q.
  LweU combine(const LweU& x, const LweU& y, u64 cx, u64 cy, u64 constant) const {
    require(x.a.size() == y.a.size(), ErrorCode::ParamMismatch, "LWE dimensions differ");
    LweU r;
    r.a.resize(x.a.size());
    for (std::size_t i = 0; i < x.a.size(); ++i) r.a[i] = (cx * x.a[i] + cy * y.a[i]) & p_.mask();
    r.b = (cx * x.b + cy * y.b + constant) & p_.mask();
    return r;
  }

  // ---- RLWE and RGSW

  RlweU encrypt_rlwe(const std::vector<u64>& payload, const std::vector<i64>& ring_key, double sigma, Prng& rng) const {
    const std::size_t n = p_.ring_dim;
    RlweU ct{std::vector<u64>(n), std::vector<u64>(n)};
    for (auto& x : ct.a) x = rng.next_u64() & p_.mask();
    auto as = mul_by_key(ct.a, ring_key);
    NoiseSampler noise(sigma);
    for (std::size_t j = 0; j < n; ++j) ct.b[j] = (as[j] + payload[j] + static_cast<u64>(noise.sample(rng))) & p_.mask();
    return ct;
  }

  std::vector<u64> rlwe_phase(const RlweU& ct, const std::vector<i64>& ring_key) const {
    auto as = mul_by_key(ct.a, ring_key);
    std::vector<u64> out(p_.ring_dim);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = (ct.b[j] - as[j]) & p_.mask();
    return out;
  }

  // Rounded plaintext coefficients, centered mod t.
  std::vector<i64> rlwe_decrypt(const RlweU& ct, const std::vector<i64>& ring_key) const {
    auto ph = rlwe_phase(ct, ring_key);
    std::vector<i64> m(ph.size());
    const unsigned shift = p_.log_q - log2_exact(p_.t);
    for (std::size_t j = 0; j < m.size(); ++j)
      m[j] = centered_reduce(static_cast<i128>(((ph[j] + p_.delta() / 2) >> shift) & (p_.t - 1)), static_cast<i64>(p_.t));
    return m;
  }

  RlweU trivial_rlwe(const std::vector<u64>& payload) const {
    RlweU ct{std::vector<u64>(p_.ring_dim, 0), payload};
    for (auto& x : ct.b) x &= p_.mask();
    return ct;
  }

  // Rows: level j of row 0 encrypts -S * m * g_j, of row 1 m * g_j.
  RgswNtt encrypt_rgsw(i64 m, const std::vector<i64>& ring_key, Prng& rng) const {
    const std::size_t n = p_.ring_dim;
    RgswNtt g;
    g.ell = p_.bsk_ell;
    for (unsigned row = 0; row < 2; ++row) {
      for (unsigned lvl = 0; lvl < g.ell; ++lvl) {
        const u64 gj = u64{1} << (p_.log_q - (lvl + 1) * p_.bsk_log_beta);
        std::vector<u64> payload(n, 0);
        if (row == 1) {
          payload[0] = static_cast<u64>(m) * gj;
        } else {
          for (std::size_t j = 0; j < n; ++j) payload[j] = static_cast<u64>(-ring_key[j] * m) * gj;
        }
        append_row(g, encrypt_rlwe(payload, ring_key, p_.ring_sigma, rng));
      }
    }
    return g;
  }

  // Transform-domain copy of 2 * ell RLWE rows, row 0 levels first.
  RgswNtt rgsw_from_rows(const std::vector<RlweU>& rows) const {
    require(rows.size() == 2 * p_.bsk_ell, ErrorCode::ParamMismatch, "RGSW needs 2 * ell rows");
    RgswNtt g;
    g.ell = p_.bsk_ell;
    for (const auto& r : rows) append_row(g, r);
    return g;
  }

  BootstrapKeyU make_bootstrap_key(const TfheKeys& keys, Prng& rng) const {
    BootstrapKeyU bk;
    for (i64 s : keys.lwe) bk.bits.push_back(encrypt_rgsw(s, keys.ring, rng));
    for (std::size_t i = 0; i < p_.ring_dim; ++i)
      for (unsigned j = 0; j < p_.ks_ell; ++j) {
        const u64 gj = u64{1} << (p_.log_q - (j + 1) * p_.ks_log_beta);
        bk.ksk.push_back(encrypt_payload(static_cast<u64>(keys.ring[i]) * gj, keys.lwe, p_.lwe_sigma, rng));
      }
    return bk;
  }

  // Reusable buffers for external products.
  struct Scratch {
    std::vector<std::vector<u64>> digits;
    std::vector<std::vector<i64>> signed_digits;
    std::vector<u128> acc_a, acc_b;
    std::vector<u64> out;
    Spectrum digit_spec;
    std::vector<Spectrum> acc_spec;  // (component, half)
    std::vector<i64> lo, hi;
  };

  Scratch make_scratch() const {
    const std::size_t n = p_.ring_dim, h = n / 2;
    Scratch sc;
    sc.digits.assign(p_.bsk_ell, std::vector<u64>(n));
    sc.signed_digits.assign(p_.bsk_ell, std::vector<i64>(n));
    sc.acc_a.resize(n);
    sc.acc_b.resize(n);
    sc.out.resize(n);
    sc.digit_spec.resize(h);
    sc.acc_spec.assign(4, Spectrum(h));
    sc.lo.resize(n);
    sc.hi.resize(n);
    return sc;
  }

  // target += sum over rows and levels of Decomp(component) * RGSW entry.
  void external_product_add(const RlweU& c, const RgswNtt& g, RlweU& target, Scratch& sc) const {
    if (fft_) return external_product_add_fft(c, g, target, sc);
    const std::size_t n = p_.ring_dim;
    std::fill(sc.acc_a.begin(), sc.acc_a.end(), 0);
    std::fill(sc.acc_b.begin(), sc.acc_b.end(), 0);
    // Products are below P^2; up to lazy_terms_ of them sum below P * 2^64.
    unsigned terms = 0;
    for (unsigned row = 0; row < 2; ++row) {
      decompose_to_ntt(row == 0 ? c.a : c.b, p_.bsk_log_beta, g.ell, sc.signed_digits, sc.digits);
      for (unsigned lvl = 0; lvl < g.ell; ++lvl) {
        if (terms == lazy_terms_) {
          for (std::size_t j = 0; j < n; ++j) {
            sc.acc_a[j] = mont_mul(mont_reduce(sc.acc_a[j]), r2_);
            sc.acc_b[j] = mont_mul(mont_reduce(sc.acc_b[j]), r2_);
          }
          terms = 1;
        }
        ++terms;
        const u64* ea = g.entry(row, lvl, 0).data();
        const u64* eb = g.entry(row, lvl, 1).data();
        const u64* d = sc.digits[lvl].data();
        u128* aa = sc.acc_a.data();
        u128* ab = sc.acc_b.data();
        for (std::size_t j = 0; j < n; ++j) {
          aa[j] += static_cast<u128>(d[j]) * ea[j];
          ab[j] += static_cast<u128>(d[j]) * eb[j];
        }
      }
    }
    for (unsigned comp = 0; comp < 2; ++comp) {
      const auto& acc = comp == 0 ? sc.acc_a : sc.acc_b;
      auto& dst = comp == 0 ? target.a : target.b;
      for (std::size_t j = 0; j < n; ++j) sc.out[j] = mont_reduce(acc[j]);
      tab_->inverse(sc.out.data());
      for (std::size_t j = 0; j < n; ++j) dst[j] = (dst[j] + lift(sc.out[j])) & p_.mask();
    }
  }

  void external_product_add_fft(const RlweU& c, const RgswNtt& g, RlweU& target, Scratch& sc) const {
    using Cplx = std::complex<double>;
    const std::size_t n = p_.ring_dim, h = n / 2;
    for (auto& v : sc.acc_spec) std::fill(v.begin(), v.end(), Cplx{});
    for (unsigned row = 0; row < 2; ++row) {
      decompose_signed(row == 0 ? c.a : c.b, p_.bsk_log_beta, g.ell, sc.signed_digits);
      for (unsigned lvl = 0; lvl < g.ell; ++lvl) {
        fft_->forward(sc.signed_digits[lvl].data(), sc.digit_spec.data());
        const Cplx* d = sc.digit_spec.data();
        for (unsigned k = 0; k < 4; ++k) {
          const Cplx* e = g.spectrum(row, lvl, k / 2, k % 2).data();
          Cplx* acc = sc.acc_spec[k].data();
          // Written out to avoid the NaN-checking complex multiply.
          for (std::size_t j = 0; j < h; ++j) {
            const double re = d[j].real() * e[j].real() - d[j].imag() * e[j].imag();
            const double im = d[j].real() * e[j].imag() + d[j].imag() * e[j].real();
            acc[j] += Cplx(re, im);
          }
        }
      }
    }
    for (unsigned comp = 0; comp < 2; ++comp) {
      auto& dst = comp == 0 ? target.a : target.b;
      fft_->inverse(sc.acc_spec[comp * 2].data(), sc.lo.data());
      fft_->inverse(sc.acc_spec[comp * 2 + 1].data(), sc.hi.data());
      for (std::size_t j = 0; j < n; ++j)
        dst[j] = (dst[j] + static_cast<u64>(sc.lo[j]) + (static_cast<u64>(sc.hi[j]) << 16)) & p_.mask();
    }
  }

  RlweU external_product(const RlweU& c, const RgswNtt& g) const {
    RlweU out{std::vector<u64>(p_.ring_dim, 0), std::vector<u64>(p_.ring_dim, 0)};
    Scratch sc = make_scratch();
    external_product_add(c, g, out, sc);
    return out;
  }

  RlweU cmux(const RgswNtt& sel, const RlweU& c0, const RlweU& c1) const {
    RlweU diff = rlwe_sub(c1, c0);
    return rlwe_add(c0, external_product(diff, sel));
  }

  RlweU rlwe_add(const RlweU& x, const RlweU& y) const {
    RlweU r = x;
    for (std::size_t j = 0; j < r.a.size(); ++j) {
      r.a[j] = (r.a[j] + y.a[j]) & p_.mask();
      r.b[j] = (r.b[j] + y.b[j]) & p_.mask();
    }
    return r;
  }
  RlweU rlwe_sub(const RlweU& x, const RlweU& y) const {
    RlweU r = x;
    for (std::size_t j = 0; j < r.a.size(); ++j) {
      r.a[j] = (r.a[j] - y.a[j]) & p_.mask();
      r.b[j] = (r.b[j] - y.b[j]) & p_.mask();
    }
    return r;
  }

  // f * X^e over Z_q[X]/(X^n + 1).
  std::vector<u64> rotate(const std::vector<u64>& f, i64 e) const {
    const i64 n = static_cast<i64>(p_.ring_dim);
    const i64 s = mod(static_cast<i128>(e), 2 * n);
    std::vector<u64> out(f.size());
    for (i64 j = 0; j < n; ++j) {
      i64 d = j + s;
      bool neg = false;
      if (d >= 2 * n) d -= 2 * n;
      if (d >= n) {
        d -= n;
        neg = true;
      }
      out[static_cast<std::size_t>(d)] = (neg ? 0 - f[static_cast<std::size_t>(j)] : f[static_cast<std::size_t>(j)]) & p_.mask();
    }
    return out;
  }

  // Components rounded to Z_2n, canonical.
  std::vector<i64> mod_switch(const LweU& ct) const {
    const unsigned log2n = log2_exact(p_.two_n());
    std::vector<i64> out;
    auto sw = [&](u64 x) -> i64 {
      if (p_.log_q <= log2n) return static_cast<i64>((x << (log2n - p_.log_q)) & (p_.two_n() - 1));
      const unsigned shift = p_.log_q - log2n;
      return static_cast<i64>(((x + (u64{1} << (shift - 1))) >> shift) & (p_.two_n() - 1));
    };
    for (u64 a : ct.a) out.push_back(sw(a));
    out.push_back(sw(ct.b));
    return out;
  }

  RlweU blind_rotate(const Lut& lut, const std::vector<i64>& switched, const BootstrapKeyU& bk) const {
    require(switched.size() == bk.bits.size() + 1, ErrorCode::KeyMismatch, "bootstrapping key size differs from LWE dimension");
    require(lut.n == p_.ring_dim && lut.t == p_.t, ErrorCode::ParamMismatch, "table shape differs from parameters");
    std::vector<u64> v(p_.ring_dim);
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = (static_cast<u64>(lut.v[j]) * p_.delta()) & p_.mask();
    RlweU acc = trivial_rlwe(rotate(v, -switched.back()));
    RlweU diff{std::vector<u64>(p_.ring_dim), std::vector<u64>(p_.ring_dim)};
    Scratch sc = make_scratch();
    for (std::size_t i = 0; i < bk.bits.size(); ++i) {
      if (switched[i] == 0) continue;
      rotate_minus_self(acc.a, switched[i], diff.a);
      rotate_minus_self(acc.b, switched[i], diff.b);
      external_product_add(diff, bk.bits[i], acc, sc);
    }
    return acc;
  }

  // out = f * X^e - f.
  void rotate_minus_self(const std::vector<u64>& f, i64 e, std::vector<u64>& out) const {
    const std::size_t n = p_.ring_dim;
    const std::size_t s = static_cast<std::size_t>(mod(static_cast<i128>(e), static_cast<i64>(2 * n)));
    const u64 mask = p_.mask();
    // Coefficient j of f * X^s comes from index j - s, negated once per wrap.
    const bool flip = s >= n;
    const std::size_t r = flip ? s - n : s;
    for (std::size_t j = 0; j < r; ++j) {
      const u64 v = flip ? f[j + n - r] : 0 - f[j + n - r];
      out[j] = (v - f[j]) & mask;
    }
    for (std::size_t j = r; j < n; ++j) {
      const u64 v = flip ? 0 - f[j - r] : f[j - r];
      out[j] = (v - f[j]) & mask;
    }
  }

  // Coefficient h under the ring key's coefficients.
  LweU sample_extract(const RlweU& ct, std::size_t h) const {
    const std::size_t n = p_.ring_dim;
    require(h < n, ErrorCode::IndexOutOfRange, "extraction index must be below n");
    LweU out;
    out.a.resize(n);
    for (std::size_t j = 0; j < n; ++j) out.a[j] = j <= h ? ct.a[h - j] : (0 - ct.a[n + h - j]) & p_.mask();
    out.b = ct.b[h];
    return out;
  }

  LweU key_switch(const LweU& ct, const BootstrapKeyU& bk) const {
    require(ct.a.size() == p_.ring_dim && bk.ksk.size() == p_.ring_dim * p_.ks_ell, ErrorCode::KeyMismatch,
            "key-switching key does not match ciphertext");
    const std::size_t dim = p_.lwe_dim;
    std::vector<u64> acc(dim + 1, 0);
    acc[dim] = ct.b;
    std::vector<i64> d(p_.ks_ell);
    for (std::size_t i = 0; i < p_.ring_dim; ++i) {
      signed_digits(ct.a[i], p_.ks_log_beta, p_.ks_ell, d.data());
      for (unsigned j = 0; j < p_.ks_ell; ++j) {
        if (d[j] == 0) continue;
        const LweU& k = bk.ksk[i * p_.ks_ell + j];
        const u64 dj = static_cast<u64>(d[j]);
        for (std::size_t x = 0; x < dim; ++x) acc[x] -= dj * k.a[x];
        acc[dim] -= dj * k.b;
      }
    }
    LweU out;
    out.a.resize(dim);
    for (std::size_t x = 0; x < dim; ++x) out.a[x] = acc[x] & p_.mask();
    out.b = acc[dim] & p_.mask();
    return out;
  }

  LweU bootstrap(const LweU& ct, const Lut& lut, const BootstrapKeyU& bk) const {
    return key_switch(sample_extract(blind_rotate(lut, mod_switch(ct), bk), 0), bk);
  }

  // Linear combination per gate, then bootstrap with the all-ones table.
  LweU gate(Gate g, const LweU& x, const LweU& y, const BootstrapKeyU& bk) const {
    const u64 d = p_.delta();
    LweU lin;
    switch (g) {
      case Gate::And: lin = combine(x, y, 1, 1, 0 - d); break;
      case Gate::Or: lin = combine(x, y, 1, 1, d); break;
      case Gate::Nand: lin = combine(x, y, static_cast<u64>(-1), static_cast<u64>(-1), d); break;
      case Gate::Xor: lin = combine(x, y, 2, 2, 2 * d); break;
    }
    return bootstrap(lin, gate_table(), bk);
  }

  // sel = 0 picks a, sel = 1 picks b; inputs are RLWE encryptions with the bit in the constant term.
  LweU mux(const RgswNtt& sel, const RlweU& a, const RlweU& b, const BootstrapKeyU& bk) const {
    return key_switch(sample_extract(cmux(sel, a, b), 0), bk);
  }

  RlweU encrypt_bit_rlwe(bool bit, const std::vector<i64>& ring_key, Prng& rng) const {
    std::vector<u64> payload(p_.ring_dim, 0);
    payload[0] = static_cast<u64>(bit ? 1 : -1) * p_.delta();
    return encrypt_rlwe(payload, ring_key, p_.ring_sigma, rng);
  }

  // Standard deviation of the rounding drift mod_switch adds, in units of q,
  // for a binary key with about half its bits set.
  double mod_switch_sigma() const {
    const double step = static_cast<double>(p_.q()) / static_cast<double>(p_.two_n());
    return step * std::sqrt((static_cast<double>(p_.lwe_dim) / 2.0 + 1.0) / 12.0);
  }

  // Input phase error a bootstrap tolerates: half a plaintext window less
  // eight standard deviations of rounding drift.
  double noise_budget() const { return static_cast<double>(p_.delta()) / 2.0 - 8.0 * mod_switch_sigma(); }

  // Predicted standard deviation of bootstrap output noise: key switching
  // plus blind rotation (key noise and gadget rounding).
  double output_sigma() const {
    const double bk = static_cast<double>(u64{1} << p_.ks_log_beta), bb = static_cast<double>(u64{1} << p_.bsk_log_beta);
    const double n = static_cast<double>(p_.ring_dim), k = static_cast<double>(p_.lwe_dim);
    const double ks = static_cast<double>(p_.ring_dim * p_.ks_ell) * (bk * bk + 2.0) / 12.0 * p_.lwe_sigma * p_.lwe_sigma;
    const double ks_round = n / 2.0 * std::pow(static_cast<double>(p_.q()) / std::pow(bk, p_.ks_ell), 2) / 12.0;
    const double br = k * 2.0 * p_.bsk_ell * n * (bb * bb + 2.0) / 12.0 * p_.ring_sigma * p_.ring_sigma;
    const double br_round = k * (n / 2.0 + 1.0) * std::pow(static_cast<double>(p_.q()) / std::pow(bb, p_.bsk_ell), 2) / 12.0;
    return std::sqrt(ks + ks_round + br + br_round);
  }

  Lut gate_table() const { return gate_lut(p_.ring_dim, p_.t); }
  // Identity on 0..t/2-1 with phase windows centered on each value.
  Lut identity_table() const { return identity_lut(p_.ring_dim, p_.t, 0, static_cast<i64>(p_.delta_hat() / 2)); }

  // Exact negacyclic product of a mod q with a small signed key.
  std::vector<u64> mul_by_key(const std::vector<u64>& a, const std::vector<i64>& key) const {
    const std::size_t n = p_.ring_dim;
    std::vector<u64> fa(n), fk(n);
    for (std::size_t j = 0; j < n; ++j) {
      fa[j] = a[j] & p_.mask();
      fk[j] = key[j] >= 0 ? static_cast<u64>(key[j]) : P_ - static_cast<u64>(-key[j]);
    }
    tab_->forward(fa.data());
    tab_->forward(fk.data());
    for (std::size_t j = 0; j < n; ++j) fa[j] = static_cast<u64>(static_cast<u128>(fa[j]) * fk[j] % P_);
    tab_->inverse(fa.data());
    for (auto& x : fa) x = lift(x);
    return fa;
  }

  // Balanced digits of round(x * beta^ell / q), most significant first.
  void signed_digits(u64 x, unsigned log_beta, unsigned ell, i64* out) const {
    const unsigned bits = log_beta * ell;
    const unsigned shift = p_.log_q - bits;
    u64 scaled = shift ? ((x + (u64{1} << (shift - 1))) >> shift) : x;
    scaled &= (u64{1} << bits) - 1;
    const i64 beta = i64{1} << log_beta;
    // Largest value whose balanced digits stay within the top position.
    const u64 upper = static_cast<u64>(beta / 2) * (((u64{1} << bits) - 1) / static_cast<u64>(beta - 1));
    i64 v = scaled > upper ? static_cast<i64>(scaled) - (i64{1} << bits) : static_cast<i64>(scaled);
    for (unsigned i = ell; i-- > 0;) {
      i64 r = v & (beta - 1);
      if (2 * r > beta) r -= beta;
      out[i] = r;
      v = (v - r) >> log_beta;
    }
  }

 private:
  // T * 2^-64 mod P for T < P * 2^64.
  u64 mont_reduce(u128 t) const {
    const u64 m = static_cast<u64>(t) * neg_p_inv_;
    const u64 r = static_cast<u64>((t + static_cast<u128>(m) * P_) >> 64);
    return r >= P_ ? r - P_ : r;
  }

  u64 mont_mul(u64 x, u64 y) const {
    const u128 t = static_cast<u128>(x) * y;
    const u64 m = static_cast<u64>(t) * neg_p_inv_;
    const u64 r = static_cast<u64>((t + static_cast<u128>(m) * P_) >> 64);
    return r >= P_ ? r - P_ : r;
  }

  std::vector<u64> to_ntt_mont(const std::vector<u64>& f) const {
    std::vector<u64> out(f.size());
    for (std::size_t j = 0; j < f.size(); ++j) {
      const i64 c = centered_reduce(static_cast<i128>(f[j]), static_cast<i64>(p_.q()));
      out[j] = c >= 0 ? static_cast<u64>(c) : P_ - static_cast<u64>(-c);
    }
    tab_->forward(out.data());
    for (auto& x : out) x = mont_mul(x, r2_);  // into Montgomery form
    return out;
  }

  // Centered lift from Z_P to Z_q.
  u64 lift(u64 x) const {
    return (x > P_ / 2 ? static_cast<u64>(-static_cast<i64>(P_ - x)) : x) & p_.mask();
  }

  std::vector<u64> from_ntt(std::vector<u64>& f) const {
    tab_->inverse(f.data());
    for (auto& x : f) x = lift(x);
    return std::move(f);
  }

  // Appends one RLWE row in the active transform form.
  void append_row(RgswNtt& g, const RlweU& r) const {
    if (!fft_) {
      g.entries.push_back(to_ntt_mont(r.a));
      g.entries.push_back(to_ntt_mont(r.b));
      return;
    }
    const std::size_t n = p_.ring_dim;
    std::vector<i64> lo(n), hi(n);
    for (const auto* comp : {&r.a, &r.b}) {
      for (std::size_t j = 0; j < n; ++j) {
        const i64 c = centered_reduce(static_cast<i128>((*comp)[j] & p_.mask()), static_cast<i64>(p_.q()));
        lo[j] = static_cast<i64>(static_cast<int16_t>(static_cast<uint16_t>(c & 0xFFFF)));
        hi[j] = (c - lo[j]) >> 16;
      }
      for (const auto* part : {&lo, &hi}) {
        Spectrum spec(n / 2);
        fft_->forward(part->data(), spec.data());
        g.spectra.push_back(std::move(spec));
      }
    }
  }

  // Balanced digits of the top log_beta * ell bits, most significant level first.
  void decompose_signed(const std::vector<u64>& f, unsigned log_beta, unsigned ell, std::vector<std::vector<i64>>& out) const {
    const unsigned bits = log_beta * ell;
    const unsigned shift = p_.log_q - bits;
    const u64 half = shift ? u64{1} << (shift - 1) : 0;
    const u64 span_mask = (u64{1} << bits) - 1;
    const i64 beta = i64{1} << log_beta, digit_mask = beta - 1, half_beta = beta / 2;
    const u64 upper = static_cast<u64>(half_beta) * (span_mask / static_cast<u64>(beta - 1));
    for (std::size_t j = 0; j < f.size(); ++j) {
      const u64 scaled = ((f[j] + half) >> shift) & span_mask;
      i64 v = scaled > upper ? static_cast<i64>(scaled) - static_cast<i64>(span_mask) - 1 : static_cast<i64>(scaled);
      for (unsigned l = ell; l-- > 0;) {
        i64 r = v & digit_mask;
        if (r > half_beta) r -= beta;
        v = (v - r) >> log_beta;
        out[l][j] = r;
      }
    }
  }

  void decompose_to_ntt(const std::vector<u64>& f, unsigned log_beta, unsigned ell, std::vector<std::vector<i64>>& tmp,
                        std::vector<std::vector<u64>>& out) const {
    decompose_signed(f, log_beta, ell, tmp);
    for (unsigned l = 0; l < ell; ++l) {
      for (std::size_t j = 0; j < f.size(); ++j) out[l][j] = tmp[l][j] >= 0 ? static_cast<u64>(tmp[l][j]) : P_ - static_cast<u64>(-tmp[l][j]);
      tab_->forward(out[l].data());
    }
  }

  TfheParams p_;
  u64 P_ = 0;
  std::shared_ptr<const NttTables> tab_;
  std::shared_ptr<const NegacyclicFft> fft_;
  u64 neg_p_inv_ = 0, r2_ = 0;
  unsigned lazy_terms_ = 1;
};

}  // namespace fhe
