#include <gtest/gtest.h>

#include <cmath>

#include "fhe/tfhe.hpp"
#include "fhe/tfhe_engine.hpp"
#include "test_util.hpp"

using namespace fhe;

namespace {

const std::vector<i64> kToyKey = {1, 0, 0, 1, 1, 1, 0, 1};
const std::vector<i64> kToyMask = {8, -28, 4, -32, 0, 31, -6, 7};
const i64 kToyBody = 24;
const std::vector<i64> kToySwitched = {4, -14, 2, -16, 0, 16, -3, 4, 12};

std::vector<i64> centered(const std::vector<i64>& v, i64 m) {
  std::vector<i64> out;
  for (i64 x : v) out.push_back(centered_reduce(static_cast<i128>(x), m));
  return out;
}

LweU toy_ciphertext(const TfheEngine& eng) {
  LweU ct;
  for (i64 a : kToyMask) ct.a.push_back(static_cast<u64>(a) & eng.params().mask());
  ct.b = static_cast<u64>(kToyBody);
  return ct;
}

struct EngineSetup {
  TfheEngine eng;
  TfheKeys keys;
  BootstrapKeyU bk;
  Prng rng;
  EngineSetup(const TfheParams& p, u64 seed, const std::vector<i64>* lwe_key = nullptr)
      : eng(p), rng(seed) {
    keys = eng.keygen(rng);
    if (lwe_key) keys.lwe = *lwe_key;
    bk = eng.make_bootstrap_key(keys, rng);
  }
};

EngineSetup& desk() {
  static EngineSetup s(TfheParams::desk(), 2024);
  return s;
}

i64 lwe_error(const TfheEngine& eng, const LweU& ct, const std::vector<i64>& key, i64 m) {
  const i64 q = static_cast<i64>(eng.params().q());
  return centered_reduce(static_cast<i128>(eng.phase(ct, key)) - static_cast<i128>(m) * static_cast<i128>(eng.params().delta()), q);
}

double correlation(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

// ---------------------------------------------------------------------------
// Lookup tables.

TEST(Lut, IdentityToyTable) {
  Lut lut = identity_lut(16, 8, -1, 0);
  EXPECT_EQ(lut.delta_hat, 4u);
  EXPECT_EQ(lut.v, (std::vector<i64>{0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2, 1, 1, 1, 1}));
}

TEST(Lut, ConstantTable) {
  Lut lut = constant_lut(3, 16, 8);
  EXPECT_EQ(lut.v, std::vector<i64>(16, 3));
}

TEST(Lut, GateTableAllOnes) {
  Lut lut = gate_lut(8, 8);
  EXPECT_EQ(lut.delta_hat, 2u);
  EXPECT_EQ(lut.v, std::vector<i64>(8, 1));
  // AND rows: inputs (-1,-1), (-1,1)/(1,-1), (1,1) rotate by -6, -2, 2.
  EXPECT_EQ(lut_rotated(lut, -6)[0], -1);
  EXPECT_EQ(lut_rotated(lut, -2)[0], -1);
  EXPECT_EQ(lut_rotated(lut, 2)[0], 1);
}

TEST(Lut, BlockStructure) {
  auto sq = [](i64 m) { return m * m; };
  Lut lut = build_lut(sq, 0, 4, 32, 8);
  for (std::size_t j = 0; j < 32; ++j) EXPECT_EQ(lut.v[j], centered_reduce(static_cast<i128>((j / 8) * (j / 8)), 8));
}

TEST(Lut, Errors) {
  EXPECT_THROW_CODE(build_lut([](i64 m) { return m; }, 0, 5, 16, 8), ErrorCode::DomainTooLarge);
  EXPECT_THROW_CODE(identity_lut(16, 3), ErrorCode::BadModulus);
}

TEST(Lut, NegacyclicPeriod) {
  Lut lut = identity_lut(16, 8, -1, 0);
  for (i64 r = 0; r < 32; ++r) {
    auto x = lut_rotated(lut, r), y = lut_rotated(lut, r + 16);
    for (std::size_t j = 0; j < 16; ++j) EXPECT_EQ(y[j], centered_reduce(static_cast<i128>(-x[j]), 8));
  }
}

// ---------------------------------------------------------------------------
// Generic path.

TEST(GenericTfhe, SampleExtractEveryIndex) {
  Prng rng(1);
  auto p = GlweParams::message_scaled(2, 16, 1 << 16, 8, Sign::Plus, 2.0, true);
  SecretKey sk = secret_keygen(p, rng);
  std::vector<BigInt> m(16);
  for (auto& x : m) x = rng.uniform_u64(8);
  auto ct = encrypt(m, sk, p, rng);
  auto lwe_p = lwe_params(32, 1 << 16, 8, 2.0);
  SecretKey flat = extracted_key(sk);
  for (std::size_t h = 0; h < 16; ++h) {
    auto lwe = sample_extract(ct, h);
    EXPECT_EQ(decrypt(lwe, flat, lwe_p)[0], m[h]);
    EXPECT_EQ(phase(lwe, flat).coeffs[0], phase(ct, sk).coeffs[h]);
  }
  EXPECT_THROW_CODE(sample_extract(ct, 16), ErrorCode::IndexOutOfRange);
}

TEST(GenericTfhe, ExtractFromTrivial) {
  RingParams r(16, 64);
  RingPoly b(r);
  for (std::size_t j = 0; j < 16; ++j) b.coeffs[j] = j;
  auto lwe = sample_extract(trivial_ciphertext(b, 1, Sign::Plus), 5);
  for (const auto& a : lwe.a) EXPECT_EQ(a.coeffs[0], 0);
  EXPECT_EQ(lwe.b.coeffs[0], 5);
}

struct GenericToy {
  GlweParams lwe = lwe_params(8, 64, 8, 0.0);
  GlweParams ring = GlweParams::message_scaled(1, 16, 64, 8, Sign::Plus, 0.0, true);
  SecretKey lwe_sk, ring_sk;
  GenericBootstrapKey bk;
  explicit GenericToy(Prng& rng) {
    lwe_sk.binary = true;
    for (i64 s : kToyKey) lwe_sk.s.push_back({s});
    ring_sk = secret_keygen(ring, rng);
    GadgetSpec g(64, 2, 6);
    bk = generic_bootstrap_keygen(lwe_sk, lwe, ring_sk, ring, g, g, rng);
  }
};

TEST(GenericTfhe, ToyWalkthrough) {
  Prng rng(7);
  GenericToy toy(rng);
  GlweCiphertext ct;
  ct.sign = Sign::Plus;
  RingParams one(1, 64);
  for (i64 a : kToyMask) ct.a.push_back(RingPoly::constant(one, a));
  ct.b = RingPoly::constant(one, kToyBody);
  EXPECT_EQ(decrypt(ct, toy.lwe_sk, toy.lwe)[0], 1);

  auto sw = mod_switch_to_2n(ct, 16);
  EXPECT_EQ(centered(sw, 32), centered(kToySwitched, 32));
  EXPECT_EQ(shadow_rotation(sw, kToyKey, 16), 4);

  Lut lut = identity_lut(16, 8, -1, 0);
  EXPECT_EQ(lut_rotated(lut, 4)[0], 1);
  auto acc = blind_rotate(lut, sw, toy.bk);
  auto dec = decrypt(acc, toy.ring_sk, toy.ring);
  auto want = lut_rotated(lut, 4);
  for (std::size_t j = 0; j < 16; ++j) EXPECT_EQ(dec[j], mod(BigInt(want[j]), BigInt(8)));

  auto out = bootstrap(ct, lut, toy.bk);
  EXPECT_EQ(decrypt(out, toy.lwe_sk, toy.lwe)[0], 1);
}

TEST(GenericTfhe, ZeroKeyRotatesByBodyOnly) {
  Prng rng(8);
  GenericToy toy(rng);
  SecretKey zero = toy.lwe_sk;
  for (auto& s : zero.s) s[0] = 0;
  GadgetSpec g(64, 2, 6);
  auto bk = generic_bootstrap_keygen(zero, toy.lwe, toy.ring_sk, toy.ring, g, g, rng);
  Lut lut = identity_lut(16, 8, -1, 0);
  std::vector<i64> sw = {5, 9, 1, 3, 7, 2, 11, 30, 6};
  auto dec = decrypt(blind_rotate(lut, sw, bk), toy.ring_sk, toy.ring);
  auto want = lut_rotated(lut, 6);
  for (std::size_t j = 0; j < 16; ++j) EXPECT_EQ(dec[j], mod(BigInt(want[j]), BigInt(8)));
}

TEST(GenericTfhe, KeyMismatch) {
  Prng rng(9);
  GenericToy toy(rng);
  EXPECT_THROW_CODE(blind_rotate(identity_lut(16, 8), {1, 2, 3}, toy.bk), ErrorCode::KeyMismatch);
}

TEST(GenericTfhe, TensorMulBits) {
  Prng rng(10);
  const std::size_t dim = 16;
  auto p = lwe_params(dim, BigInt(1) << 20, 4, 3.2);
  p.binary_key = true;
  SecretKey sk = secret_keygen(p, rng);
  LweRelinKey rk = lwe_relin_keygen(sk, p, 1 << 19, 2, rng);
  for (int trial = 0; trial < 200; ++trial) {
    i64 m1 = static_cast<i64>(rng.uniform_u64(2)), m2 = static_cast<i64>(rng.uniform_u64(2));
    auto c1 = encrypt({BigInt(m1)}, sk, p, rng), c2 = encrypt({BigInt(m2)}, sk, p, rng);
    EXPECT_EQ(decrypt(lwe_tensor_mul(c1, c2, rk), sk, p)[0], m1 * m2);
  }
}

TEST(GenericTfhe, TensorMulIdentities) {
  Prng rng(11);
  auto p = lwe_params(16, BigInt(1) << 20, 4, 3.2);
  SecretKey sk = secret_keygen(p, rng);
  LweRelinKey rk = lwe_relin_keygen(sk, p, 1 << 19, 2, rng);
  for (i64 m1 = 0; m1 < 4; ++m1) {
    auto c1 = encrypt({BigInt(m1)}, sk, p, rng);
    EXPECT_EQ(decrypt(lwe_tensor_mul(c1, encrypt({BigInt(0)}, sk, p, rng), rk), sk, p)[0], 0);
    EXPECT_EQ(decrypt(lwe_tensor_mul(c1, encrypt({BigInt(1)}, sk, p, rng), rk), sk, p)[0], m1);
  }
  LweRelinKey small = lwe_relin_keygen(secret_keygen(lwe_params(4, BigInt(1) << 20, 4, 3.2), rng),
                                       lwe_params(4, BigInt(1) << 20, 4, 3.2), 1 << 19, 2, rng);
  auto c = encrypt({BigInt(1)}, sk, p, rng);
  EXPECT_THROW_CODE(lwe_tensor_mul(c, c, small), ErrorCode::KeyMismatch);
}

// ---------------------------------------------------------------------------
// Engine agrees with the generic path.

TEST(TfheEngine, DigitsMatchGeneric) {
  TfheEngine toy(TfheParams::toy());
  GadgetSpec g6(64, 2, 6);
  i64 d[8];
  for (u64 x = 0; x < 64; ++x) {
    toy.signed_digits(x, 1, 6, d);
    EXPECT_EQ(std::vector<i64>(d, d + 6), decompose_scalar(BigInt(x), g6));
  }
  TfheEngine eng(TfheParams::desk());
  GadgetSpec g3(BigInt(1) << 32, 128, 3);
  Prng rng(3);
  for (int i = 0; i < 5000; ++i) {
    u64 x = rng.next_u64() & 0xffffffffu;
    eng.signed_digits(x, 7, 3, d);
    EXPECT_EQ(std::vector<i64>(d, d + 3), decompose_scalar(BigInt(x), g3));
  }
}

TEST(TfheEngine, ExternalProductMatchesGeneric) {
  TfheParams tp{"dual", 4, 16, 32, 8, 8, 4, 8, 4, 0.0, 3.2};
  TfheEngine eng(tp);
  const BigInt q = BigInt(1) << 32;
  auto p = GlweParams::message_scaled(1, 16, q, 8, Sign::Plus, 3.2, true);
  GadgetSpec g(q, 256, 4);
  Prng rng(12);
  SecretKey sk = secret_keygen(p, rng);
  auto to_u = [](const GlweCiphertext& c) {
    RlweU r;
    for (std::size_t j = 0; j < c.b.coeffs.size(); ++j) {
      r.a.push_back(static_cast<u64>(c.a[0].coeffs[j]));
      r.b.push_back(static_cast<u64>(c.b.coeffs[j]));
    }
    return r;
  };
  for (int trial = 0; trial < 200; ++trial) {
    i64 bit = static_cast<i64>(rng.uniform_u64(2));
    std::vector<BigInt> m(16);
    for (auto& x : m) x = rng.uniform_u64(8);
    auto ct = encrypt(m, sk, p, rng);
    auto ggsw = ggsw_encrypt(RingPoly::constant(p.ring, bit), sk, p, g, rng);
    std::vector<RlweU> rows;
    for (const auto& row : ggsw.rows)
      for (const auto& lvl : row.levels) rows.push_back(to_u(lvl));
    auto generic = external_product(ct, ggsw);
    auto fast = eng.external_product(to_u(ct), eng.rgsw_from_rows(rows));
    ASSERT_EQ(fast.a, to_u(generic).a);
    ASSERT_EQ(fast.b, to_u(generic).b);
    auto dec = decrypt(generic, sk, p);
    for (std::size_t j = 0; j < 16; ++j) EXPECT_EQ(dec[j], bit ? m[j] : BigInt(0));
  }
}

// Same seed, both transform paths: bit-identical external products and blind rotations.
TEST(TfheEngine, FftMatchesNttAtDesk) {
  TfheEngine fft(TfheParams::desk()), ntt(TfheParams::desk(), false);
  ASSERT_TRUE(fft.uses_fft());
  ASSERT_FALSE(ntt.uses_fft());
  Prng ra(77), rb(77), rv(79);
  const TfheKeys keys = fft.keygen(ra);
  ntt.keygen(rb);
  for (int trial = 0; trial < 20; ++trial) {
    const i64 bit = trial % 2;
    const auto ga = fft.encrypt_rgsw(bit, keys.ring, ra);
    const auto gb = ntt.encrypt_rgsw(bit, keys.ring, rb);
    RlweU c{std::vector<u64>(1024), std::vector<u64>(1024)};
    for (std::size_t j = 0; j < 1024; ++j) c.a[j] = rv.uniform_u64(u64{1} << 32), c.b[j] = rv.uniform_u64(u64{1} << 32);
    const auto x = fft.external_product(c, ga), y = ntt.external_product(c, gb);
    ASSERT_EQ(x.a, y.a);
    ASSERT_EQ(x.b, y.b);
  }
  Prng rc(78), rd(78);
  const TfheKeys k = fft.keygen(rc);
  ntt.keygen(rd);
  const auto bka = fft.make_bootstrap_key(k, rc), bkb = ntt.make_bootstrap_key(k, rd);
  const LweU in = fft.encrypt_bit(1, k.lwe, rc);
  const auto sw = fft.mod_switch(in);
  const auto ra_out = fft.blind_rotate(fft.gate_table(), sw, bka), rb_out = ntt.blind_rotate(ntt.gate_table(), sw, bkb);
  EXPECT_EQ(ra_out.a, rb_out.a);
  EXPECT_EQ(ra_out.b, rb_out.b);
}

TEST(TfheEngine, ToyWalkthrough) {
  EngineSetup s(TfheParams::toy(), 21, &kToyKey);
  LweU ct = toy_ciphertext(s.eng);
  EXPECT_EQ(s.eng.decrypt(ct, kToyKey), 1u);
  auto sw = s.eng.mod_switch(ct);
  EXPECT_EQ(centered(sw, 32), centered(kToySwitched, 32));
  EXPECT_EQ(shadow_rotation(sw, kToyKey, 16), 4);
  Lut lut = identity_lut(16, 8, -1, 0);
  EXPECT_EQ(s.eng.rlwe_decrypt(s.eng.blind_rotate(lut, sw, s.bk), s.keys.ring), lut_rotated(lut, 4));
  EXPECT_EQ(s.eng.decrypt(s.eng.bootstrap(ct, lut, s.bk), kToyKey), 1u);
}

TEST(TfheEngine, ShadowOracleToy) {
  TfheParams p = TfheParams::toy();
  p.lwe_dim = 16;
  EngineSetup s(p, 22);
  Lut lut = identity_lut(16, 8, -1, 0);
  for (int trial = 0; trial < 100; ++trial) {
    LweU ct;
    for (std::size_t i = 0; i < 16; ++i) ct.a.push_back(s.rng.next_u64() & 63);
    ct.b = s.rng.next_u64() & 63;
    auto sw = s.eng.mod_switch(ct);
    const i64 r = shadow_rotation(sw, s.keys.lwe, 16);
    auto predicted = lut_rotated(lut, r);
    EXPECT_EQ(s.eng.rlwe_decrypt(s.eng.blind_rotate(lut, sw, s.bk), s.keys.ring), predicted);
    EXPECT_EQ(static_cast<i64>(s.eng.decrypt(s.eng.bootstrap(ct, lut, s.bk), s.keys.lwe)), mod(static_cast<i128>(predicted[0]), 8));
  }
}

TEST(TfheEngine, NegacyclicRotation) {
  EngineSetup s(TfheParams::toy(), 23, &kToyKey);
  Lut lut = identity_lut(16, 8, -1, 0);
  std::vector<i64> sw(9, 0);
  sw[8] = 3;
  auto x = s.eng.rlwe_decrypt(s.eng.blind_rotate(lut, sw, s.bk), s.keys.ring);
  sw[8] = 3 + 16;
  auto y = s.eng.rlwe_decrypt(s.eng.blind_rotate(lut, sw, s.bk), s.keys.ring);
  for (std::size_t j = 0; j < 16; ++j) EXPECT_EQ(y[j], centered_reduce(static_cast<i128>(-x[j]), 8));
}

TEST(TfheEngine, SampleExtractEveryIndex) {
  EngineSetup s(TfheParams::toy(), 24);
  std::vector<u64> payload(16);
  for (std::size_t j = 0; j < 16; ++j) payload[j] = (j % 8) * 8;
  auto ct = s.eng.encrypt_rlwe(payload, s.keys.ring, 0.0, s.rng);
  auto ph = s.eng.rlwe_phase(ct, s.keys.ring);
  for (std::size_t h = 0; h < 16; ++h) EXPECT_EQ(s.eng.phase(s.eng.sample_extract(ct, h), s.keys.ring), ph[h]);
  EXPECT_THROW_CODE(s.eng.sample_extract(ct, 16), ErrorCode::IndexOutOfRange);
}

TEST(TfheEngine, GateTable) {
  EngineSetup s(TfheParams::toy_gate(), 25);
  const auto& eng = s.eng;
  int expected_and[4] = {0, 0, 0, 1};
  for (int trial = 0; trial < 20; ++trial) {
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y) {
        LweU cx = eng.encrypt_bit(x, s.keys.lwe, s.rng), cy = eng.encrypt_bit(y, s.keys.lwe, s.rng);
        LweU lin = eng.combine(cx, cy, 1, 1, 0 - eng.params().delta());
        const i64 r = shadow_rotation(eng.mod_switch(lin), s.keys.lwe, 8);
        const i64 ideal = 2 * ((x ? 1 : -1) + (y ? 1 : -1) - 1);
        EXPECT_LE(std::abs(centered_reduce(static_cast<i128>(r - ideal), 16)), 1);
        EXPECT_EQ(eng.decrypt_bit(eng.gate(Gate::And, cx, cy, s.bk), s.keys.lwe), expected_and[2 * x + y] == 1);
      }
  }
}

TEST(TfheEngine, Errors) {
  EXPECT_THROW_CODE(parse_gate("NOR"), ErrorCode::UnsupportedGate);
  EXPECT_EQ(parse_gate("XOR"), Gate::Xor);
  TfheParams bad = TfheParams::toy();
  bad.t = 6;
  EXPECT_THROW_CODE(TfheEngine{bad}, ErrorCode::BadModulus);
  EngineSetup s(TfheParams::toy(), 26, &kToyKey);
  EXPECT_THROW_CODE(s.eng.blind_rotate(identity_lut(16, 8), {1, 2}, s.bk), ErrorCode::KeyMismatch);
}

// ---------------------------------------------------------------------------
// Desk preset.

TEST(TfheDesk, IdentityBootstrap) {
  auto& s = desk();
  Lut lut = s.eng.identity_table();
  const double bound = 6.0 * s.eng.output_sigma();
  for (int trial = 0; trial < 24; ++trial) {
    i64 m = static_cast<i64>(s.rng.uniform_u64(4));
    auto out = s.eng.bootstrap(s.eng.encrypt(m, s.keys.lwe, s.rng), lut, s.bk);
    EXPECT_EQ(static_cast<i64>(s.eng.decrypt(out, s.keys.lwe)), m);
    EXPECT_LT(std::abs(lwe_error(s.eng, out, s.keys.lwe, m)), bound);
  }
}

TEST(TfheDesk, NoisyInputRefreshed) {
  auto& s = desk();
  Lut lut = s.eng.identity_table();
  const double bound = 6.0 * s.eng.output_sigma();
  const u64 e = static_cast<u64>(0.9 * s.eng.noise_budget());
  for (int trial = 0; trial < 12; ++trial) {
    i64 m = static_cast<i64>(s.rng.uniform_u64(4));
    const u64 err = trial % 2 ? e : 0 - e;
    auto ct = s.eng.encrypt_payload(static_cast<u64>(m) * s.eng.params().delta() + err, s.keys.lwe, 0.0, s.rng);
    auto out = s.eng.bootstrap(ct, lut, s.bk);
    EXPECT_EQ(static_cast<i64>(s.eng.decrypt(out, s.keys.lwe)), m);
    EXPECT_LT(std::abs(lwe_error(s.eng, out, s.keys.lwe, m)), bound);
  }
}

TEST(TfheDesk, GatesAndFullAdder) {
  auto& s = desk();
  auto& eng = s.eng;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      LweU cx = eng.encrypt_bit(x, s.keys.lwe, s.rng), cy = eng.encrypt_bit(y, s.keys.lwe, s.rng);
      EXPECT_EQ(eng.decrypt_bit(eng.gate(Gate::And, cx, cy, s.bk), s.keys.lwe), (x & y) == 1);
      EXPECT_EQ(eng.decrypt_bit(eng.gate(Gate::Or, cx, cy, s.bk), s.keys.lwe), (x | y) == 1);
      EXPECT_EQ(eng.decrypt_bit(eng.gate(Gate::Nand, cx, cy, s.bk), s.keys.lwe), (x & y) == 0);
      EXPECT_EQ(eng.decrypt_bit(eng.gate(Gate::Xor, cx, cy, s.bk), s.keys.lwe), (x ^ y) == 1);
    }
  for (int v = 0; v < 8; ++v) {
    const int a = v & 1, b = (v >> 1) & 1, c = (v >> 2) & 1;
    LweU ca = eng.encrypt_bit(a, s.keys.lwe, s.rng), cb = eng.encrypt_bit(b, s.keys.lwe, s.rng),
         cc = eng.encrypt_bit(c, s.keys.lwe, s.rng);
    LweU ab = eng.gate(Gate::Xor, ca, cb, s.bk);
    LweU sum = eng.gate(Gate::Xor, ab, cc, s.bk);
    LweU carry = eng.gate(Gate::Or, eng.gate(Gate::And, ca, cb, s.bk), eng.gate(Gate::And, ab, cc, s.bk), s.bk);
    EXPECT_EQ(eng.decrypt_bit(sum, s.keys.lwe), ((a + b + c) & 1) == 1) << v;
    EXPECT_EQ(eng.decrypt_bit(carry, s.keys.lwe), a + b + c >= 2) << v;
  }
}

TEST(TfheDesk, Mux) {
  auto& s = desk();
  auto& eng = s.eng;
  for (int v = 0; v < 8; ++v) {
    const int sel = v & 1, a = (v >> 1) & 1, b = (v >> 2) & 1;
    auto g = eng.encrypt_rgsw(sel, s.keys.ring, s.rng);
    auto out = eng.mux(g, eng.encrypt_bit_rlwe(a, s.keys.ring, s.rng), eng.encrypt_bit_rlwe(b, s.keys.ring, s.rng), s.bk);
    EXPECT_EQ(eng.decrypt_bit(out, s.keys.lwe), (sel ? b : a) == 1) << v;
  }
}

// Output noise does not track input noise.
TEST(TfheEngine, NoiseIndependence) {
  TfheParams p{"mid", 64, 256, 32, 8, 7, 3, 7, 3, 4096.0, 16.0};
  EngineSetup s(p, 27);
  Lut lut = s.eng.identity_table();
  const double budget = s.eng.noise_budget();
  std::vector<double> in, out;
  for (int trial = 0; trial < 1000; ++trial) {
    const i64 m = static_cast<i64>(s.rng.uniform_u64(4));
    const i64 e = static_cast<i64>(s.rng.uniform_u64(static_cast<u64>(1.6 * budget))) - static_cast<i64>(0.8 * budget);
    auto ct = s.eng.encrypt_payload(static_cast<u64>(m) * p.delta() + static_cast<u64>(e), s.keys.lwe, 0.0, s.rng);
    auto res = s.eng.bootstrap(ct, lut, s.bk);
    ASSERT_EQ(static_cast<i64>(s.eng.decrypt(res, s.keys.lwe)), m);
    in.push_back(static_cast<double>(e));
    out.push_back(static_cast<double>(lwe_error(s.eng, res, s.keys.lwe, m)));
  }
  EXPECT_LT(std::fabs(correlation(in, out)), 0.1);
  std::vector<double> ain, aout;
  for (std::size_t i = 0; i < in.size(); ++i) {
    ain.push_back(std::fabs(in[i]));
    aout.push_back(std::fabs(out[i]));
  }
  EXPECT_LT(std::fabs(correlation(ain, aout)), 0.1);
}
