#include <gtest/gtest.h>

#include "fhe/glwe.hpp"

using namespace fhe;

namespace {

std::vector<BigInt> random_msg(std::size_t n, const BigInt& t, Prng& rng) {
  std::vector<BigInt> m(n);
  for (auto& x : m) x = rng.uniform(t);
  return m;
}

std::vector<BigInt> add_mod_t(const std::vector<BigInt>& a, const std::vector<BigInt>& b, const BigInt& t) {
  std::vector<BigInt> r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = mod(a[i] + b[i], t);
  return r;
}

GlweParams rlwe_params(Sign sign = Sign::Minus) {
  return GlweParams::message_scaled(2, 8, BigInt(1) << 30, 17, sign, 3.2);
}

}  // namespace

TEST(Keygen, DeterministicAndPublicKeyRelation) {
  auto p = rlwe_params();
  Prng r1(42), r2(42);
  auto k1 = keygen(p, r1), k2 = keygen(p, r2);
  EXPECT_EQ(k1.sk.s, k2.sk.s);
  EXPECT_EQ(k1.pk.pk1, k2.pk.pk1);
  // pk1 + pk2.S is exactly the sampled error under the minus convention.
  RingPoly e = poly_add(k1.pk.pk1, mask_dot(k1.pk.pk2, k1.sk));
  EXPECT_LE(e.infinity_norm(), p.sampler.bound);
}

TEST(Keygen, TernaryHistogramNondegenerate) {
  auto p = rlwe_params();
  Prng rng(1);
  std::array<int, 3> hist{};
  for (int i = 0; i < 1000; ++i) {
    auto sk = secret_keygen(p, rng);
    for (auto& poly : sk.s)
      for (auto c : poly) hist[static_cast<std::size_t>(c + 1)]++;
  }
  const int total = hist[0] + hist[1] + hist[2];
  for (int h : hist) EXPECT_NEAR(static_cast<double>(h) / total, 1.0 / 3.0, 0.02);
}

TEST(Encrypt, ZeroAndRandomRoundTrip) {
  for (Sign sign : {Sign::Plus, Sign::Minus}) {
    auto p = rlwe_params(sign);
    Prng rng(2);
    auto sk = secret_keygen(p, rng);
    std::vector<BigInt> zero(8, BigInt(0));
    EXPECT_EQ(decrypt(encrypt(zero, sk, p, rng), sk, p), zero);
    for (int i = 0; i < 1000; ++i) {
      auto m = random_msg(8, p.t, rng);
      ASSERT_EQ(decrypt(encrypt(m, sk, p, rng), sk, p), m);
    }
  }
}

TEST(Encrypt, SeedReproducesMask) {
  auto p = rlwe_params();
  Prng rng(3);
  auto sk = secret_keygen(p, rng);
  auto ct = encrypt(random_msg(8, p.t, rng), sk, p, rng);
  ASSERT_TRUE(ct.seed.has_value());
  auto masks = expand_masks(*ct.seed, p.k, p.ring);
  for (std::size_t i = 0; i < p.k; ++i) EXPECT_EQ(masks[i], ct.a[i]);
}

TEST(Encrypt, LweMatchesScalarFormula) {
  // n = 1, k = 8: b = sum a_i s_i + Delta m + e under the plus convention.
  auto p = GlweParams::message_scaled(8, 1, 1 << 16, 8, Sign::Plus, 2.0, true);
  Prng rng(4);
  auto sk = secret_keygen(p, rng);
  for (int trial = 0; trial < 200; ++trial) {
    BigInt m = rng.uniform(8);
    auto ct = encrypt({m}, sk, p, rng);
    BigInt acc = ct.b.coeffs[0];
    for (std::size_t i = 0; i < 8; ++i) acc -= ct.a[i].coeffs[0] * sk.s[i][0];
    BigInt e = centered_reduce(acc - p.delta * m, p.ring.q);
    ASSERT_LE(abs(e), p.sampler.bound);
    ASSERT_EQ(decrypt(ct, sk, p)[0], m);
  }
}

TEST(Decrypt, NoiseAtHalfDeltaCorrupts) {
  auto p = rlwe_params();
  Prng rng(5);
  auto sk = secret_keygen(p, rng);
  auto m = random_msg(8, p.t, rng);
  auto ct = encrypt(m, sk, p, rng);
  // Push the phase across the rounding boundary.
  RingPoly bump = RingPoly::constant(p.ring, p.delta / 2 + p.sampler.bound + 1);
  auto bad = add_plain(ct, bump);
  EXPECT_NE(decrypt(bad, sk, p), m);
}

TEST(Decrypt, ZeroKeyZeroMaskIsBody) {
  auto p = rlwe_params();
  SecretKey sk;
  sk.s.assign(2, std::vector<i64>(8, 0));
  Prng rng(6);
  RingPoly body = sample_poly(SampleKind::Uniform, p.ring, p.sampler, rng);
  auto ct = trivial_ciphertext(body, 2, Sign::Minus);
  EXPECT_EQ(phase(ct, sk), body);
}

TEST(AddCt, HomomorphicAndNoiseAdditive) {
  auto p = rlwe_params();
  Prng rng(7);
  auto sk = secret_keygen(p, rng);
  for (int i = 0; i < 1000; ++i) {
    auto m1 = random_msg(8, p.t, rng), m2 = random_msg(8, p.t, rng);
    auto c1 = encrypt(m1, sk, p, rng), c2 = encrypt(m2, sk, p, rng);
    auto sum = add_ct(c1, c2);
    ASSERT_EQ(decrypt(sum, sk, p), add_mod_t(m1, m2, p.t));
    ASSERT_EQ(decrypt(add_ct(c2, c1), sk, p), decrypt(sum, sk, p));
    BigInt e1 = measured_noise(c1, sk, scale_plaintext(m1, p));
    BigInt e2 = measured_noise(c2, sk, scale_plaintext(m2, p));
    RingPoly payload = poly_add(scale_plaintext(m1, p), scale_plaintext(m2, p));
    ASSERT_LE(measured_noise(sum, sk, payload), e1 + e2);
  }
  auto zero = encrypt(std::vector<BigInt>(8, BigInt(0)), sk, p, rng);
  auto m = random_msg(8, p.t, rng);
  EXPECT_EQ(decrypt(add_ct(encrypt(m, sk, p, rng), zero), sk, p), m);
}

TEST(AddCt, ParamMismatch) {
  auto p = rlwe_params();
  Prng rng(8);
  auto sk = secret_keygen(p, rng);
  auto c1 = encrypt(random_msg(8, p.t, rng), sk, p, rng);
  auto c2 = lift_ct(c1, BigInt(1) << 31);
  try {
    add_ct(c1, c2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParamMismatch);
  }
}

TEST(PlainOps, AddAndMultiply) {
  auto p = rlwe_params();
  Prng rng(9);
  auto sk = secret_keygen(p, rng);
  RingParams pt_ring(8, p.t);
  for (int i = 0; i < 1000; ++i) {
    auto m = random_msg(8, p.t, rng);
    auto ct = encrypt(m, sk, p, rng);
    auto lam = random_msg(8, p.t, rng);
    auto sum = decrypt(add_plain(ct, scale_plaintext(lam, p)), sk, p);
    ASSERT_EQ(sum, add_mod_t(m, lam, p.t));
    // Small-norm multiplier: coefficients in {-1, 0, 1}.
    auto small = sample_poly(SampleKind::Ternary, p.ring, p.sampler, rng);
    auto prod = decrypt(mul_plain(ct, small), sk, p);
    auto want = poly_negacyclic_mul(RingPoly::from_ints(pt_ring, m), poly_lift(small, p.t));
    ASSERT_EQ(prod, want.coeffs);
  }
  auto m = random_msg(8, p.t, rng);
  auto ct = encrypt(m, sk, p, rng);
  EXPECT_EQ(decrypt(add_plain(ct, RingPoly(p.ring)), sk, p), m);
  EXPECT_EQ(decrypt(mul_plain(ct, RingPoly::constant(p.ring, 1)), sk, p), m);
}

TEST(Glev, LevelsDecryptAndDecompIdentity) {
  auto p = GlweParams::message_scaled(1, 16, BigInt(1) << 32, 8, Sign::Plus, 3.2, true);
  GadgetSpec g(p.ring.q, 256, 4);
  Prng rng(10);
  auto sk = secret_keygen(p, rng);
  auto m = RingPoly::from_ints(p.ring, std::vector<int>{1, 0, 3, 0, 0, 2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1});
  auto glev = glev_encrypt(m, sk, p, g, rng);
  // Level 1 at scale q / beta.
  auto level1 = glev.levels[0];
  GlweParams p1 = p;
  p1.t = 256;
  p1.delta = p.ring.q / 256;
  auto dec = decrypt(level1, sk, p1);
  EXPECT_EQ(dec, m.coeffs);
  for (int trial = 0; trial < 20; ++trial) {
    auto u = sample_poly(SampleKind::Uniform, p.ring, p.sampler, rng);
    auto ct = decomp_product(u, glev);
    auto want = poly_negacyclic_mul(u, m);
    // Noise: ell * n * beta/2 * bound per coefficient.
    BigInt bound = BigInt(4 * 16 * 128) * p.sampler.bound + p.ring.q / (2 * g.beta_pow(4)) * 16 * 4;
    ASSERT_LE(measured_noise(ct, sk, want), bound);
  }
  auto zero = glev_encrypt(RingPoly(p.ring), sk, p, g, rng);
  for (auto& lvl : zero.levels) EXPECT_LE(phase(lvl, sk).infinity_norm(), p.sampler.bound);
}

TEST(Glev, InexactGadgetRejected) {
  auto p = GlweParams::message_scaled(1, 4, 97, 4, Sign::Plus, 1.0);
  Prng rng(11);
  auto sk = secret_keygen(p, rng);
  try {
    glev_encrypt(RingPoly(p.ring), sk, p, GadgetSpec(97, 4, 2), rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InexactGadget);
  }
}

TEST(Ggsw, RowsDecryptAsDocumented) {
  for (Sign sign : {Sign::Plus, Sign::Minus}) {
    auto p = GlweParams::message_scaled(2, 8, BigInt(1) << 32, 8, sign, 3.2, true);
    GadgetSpec g(p.ring.q, 256, 4);
    Prng rng(12);
    auto sk = secret_keygen(p, rng);
    auto one = RingPoly::constant(p.ring, 1);
    auto ggsw = ggsw_encrypt(one, sk, p, g, rng);
    ASSERT_EQ(ggsw.rows.size(), 3u);
    const BigInt g1 = p.ring.q / 256;
    // Last row, level 1: phase = g1 * 1.
    EXPECT_LE(measured_noise(ggsw.rows[2].levels[0], sk, RingPoly::constant(p.ring, g1)), p.sampler.bound);
    for (std::size_t i = 0; i < 2; ++i) {
      RingPoly want = poly_scalar_mul(sk.poly(i, p.ring), sign == Sign::Plus ? BigInt(-g1) : g1);
      EXPECT_LE(measured_noise(ggsw.rows[i].levels[0], sk, want), p.sampler.bound);
    }
  }
}

TEST(ExternalProduct, SelectsAndPreserves) {
  auto p = GlweParams::message_scaled(1, 16, BigInt(1) << 32, 8, Sign::Plus, 3.2, true);
  GadgetSpec g(p.ring.q, 256, 4);
  Prng rng(13);
  auto sk = secret_keygen(p, rng);
  auto zero = ggsw_encrypt(RingPoly(p.ring), sk, p, g, rng);
  auto one = ggsw_encrypt(RingPoly::constant(p.ring, 1), sk, p, g, rng);
  for (int trial = 0; trial < 200; ++trial) {
    auto m = random_msg(16, 4, rng);
    auto ct = encrypt(m, sk, p, rng);
    EXPECT_EQ(decrypt(external_product(ct, zero), sk, p), std::vector<BigInt>(16, BigInt(0)));
    EXPECT_EQ(decrypt(external_product(ct, one), sk, p), m);
  }
}

TEST(KeySwitch, SameKeyAndRandomKeys) {
  for (Sign sign : {Sign::Plus, Sign::Minus}) {
    auto p = GlweParams::message_scaled(2, 8, BigInt(1) << 40, 17, sign, 3.2);
    GadgetSpec g(p.ring.q, 1 << 10, 4);
    Prng rng(14);
    auto s1 = secret_keygen(p, rng);
    auto p2 = p;
    p2.k = 1;
    auto s2 = secret_keygen(p2, rng);
    auto self = keyswitch_keygen(s1, s1, p, g, rng);
    auto ksk = keyswitch_keygen(s1, s2, p2, g, rng);
    for (int i = 0; i < 200; ++i) {
      auto m = random_msg(8, p.t, rng);
      auto ct = encrypt(m, s1, p, rng);
      ASSERT_EQ(decrypt(gadget_keyswitch(ct, self), s1, p), m);
      auto sw = gadget_keyswitch(ct, ksk);
      ASSERT_EQ(sw.k(), 1u);
      ASSERT_EQ(decrypt(sw, s2, p2), m);
      // Noise ledger: fresh noise + k * ell * n * beta/2 * ksk bound, factor-2 slack.
      BigInt predicted = p.sampler.bound + BigInt(2 * 4 * 8 * 512) * p.sampler.bound;
      ASSERT_LE(measured_noise(sw, s2, scale_plaintext(m, p2)), 2 * predicted);
    }
  }
}

TEST(KeySwitch, LweInstantiation) {
  auto p = GlweParams::message_scaled(16, 1, BigInt(1) << 32, 8, Sign::Plus, 3.2, true);
  auto p2 = p;
  p2.k = 8;
  GadgetSpec g(p.ring.q, 1 << 8, 4);
  Prng rng(15);
  auto s1 = secret_keygen(p, rng), s2 = secret_keygen(p2, rng);
  auto ksk = keyswitch_keygen(s1, s2, p2, g, rng);
  for (int i = 0; i < 200; ++i) {
    BigInt m = rng.uniform(8);
    auto ct = encrypt({m}, s1, p, rng);
    ASSERT_EQ(decrypt(gadget_keyswitch(ct, ksk), s2, p2)[0], m);
  }
}

TEST(KeySwitch, KeyMismatch) {
  auto p = rlwe_params();
  Prng rng(16);
  auto sk = secret_keygen(p, rng);
  auto ct = encrypt(random_msg(8, p.t, rng), sk, p, rng);
  KeySwitchKey empty;
  try {
    gadget_keyswitch(ct, empty);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::KeyMismatch);
  }
}

TEST(ModulusSwitch, LweWalkthrough) {
  auto p = GlweParams::message_scaled(4, 1, 64, 4, Sign::Plus, 0.0);
  SecretKey sk;
  sk.s = {{0}, {1}, {1}, {0}};
  GlweCiphertext ct;
  ct.sign = Sign::Plus;
  for (int a : {-25, 12, -3, 7}) ct.a.push_back(RingPoly::constant(p.ring, a));
  ct.b = RingPoly::constant(p.ring, 26);
  EXPECT_EQ(decrypt(ct, sk, p)[0], 1);
  auto sw = modulus_switch(ct, 32, p.delta);
  std::vector<BigInt> got;
  for (auto& a : sw.a) got.push_back(a.centered()[0]);
  got.push_back(sw.b.centered()[0]);
  EXPECT_EQ(got, (std::vector<BigInt>{-12, 6, -1, 4, 13}));
  EXPECT_EQ(phase(sw, sk).coeffs[0], 8);
  EXPECT_EQ(decrypt(sw, sk, p.with_modulus(32))[0], 1);
  EXPECT_EQ(modulus_switch(ct, 64).b, ct.b);
}

TEST(ModulusSwitch, RlweRoundTripsAndDriftBound) {
  auto p = GlweParams::message_scaled(1, 8, BigInt(1) << 40, 17, Sign::Minus, 3.2);
  Prng rng(17);
  auto sk = secret_keygen(p, rng);
  const BigInt qh = BigInt(1) << 24;
  for (int i = 0; i < 500; ++i) {
    auto m = random_msg(8, p.t, rng);
    auto ct = encrypt(m, sk, p, rng);
    ASSERT_EQ(decrypt(modulus_switch(ct, qh, p.delta), sk, p.with_modulus(qh)), m);
  }
  // LWE drift: |phase_hat - phase * q_hat / q| <= 1 + k/2 for binary keys.
  for (std::size_t k : {4u, 16u}) {
    auto pl = GlweParams::message_scaled(k, 1, BigInt(1) << 32, 8, Sign::Plus, 3.2, true);
    auto skl = secret_keygen(pl, rng);
    double worst = 0;
    for (int i = 0; i < 10000; ++i) {
      auto ct = encrypt({rng.uniform(8)}, skl, pl, rng);
      BigInt before = centered_reduce(phase(ct, skl).coeffs[0], pl.ring.q);
      auto sw = modulus_switch(ct, BigInt(1) << 12);
      BigInt after = centered_reduce(phase(sw, skl).coeffs[0], BigInt(1) << 12);
      double exact = static_cast<double>(before) / static_cast<double>(BigInt(1) << 20);
      // Compare on the circle: the phase may sit at the wrap point.
      double drift = std::fabs(std::remainder(static_cast<double>(after) - exact, 4096.0));
      worst = std::max(worst, drift);
    }
    EXPECT_LE(worst, 1.0 + 0.5 * static_cast<double>(k)) << k;
  }
}

TEST(ModulusSwitch, TargetTooSmall) {
  auto p = GlweParams::message_scaled(1, 64, BigInt(1) << 20, 16, Sign::Minus, 3.2);
  Prng rng(18);
  auto sk = secret_keygen(p, rng);
  auto ct = encrypt(random_msg(64, p.t, rng), sk, p, rng);
  try {
    modulus_switch(ct, 64, p.delta);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TargetTooSmall);
  }
}

TEST(PublicKey, RoundTripAndNoiseComparison) {
  auto p = rlwe_params();
  Prng rng(19);
  auto kp = keygen(p, rng);
  EXPECT_EQ(decrypt(pk_encrypt(std::vector<BigInt>(8, BigInt(0)), kp.pk, p, rng), kp.sk, p),
            std::vector<BigInt>(8, BigInt(0)));
  double pk_noise = 0, sk_noise = 0;
  for (int i = 0; i < 1000; ++i) {
    auto m = random_msg(8, p.t, rng);
    auto c_pk = pk_encrypt(m, kp.pk, p, rng);
    auto c_sk = encrypt(m, kp.sk, p, rng);
    ASSERT_EQ(decrypt(c_pk, kp.sk, p), m);
    pk_noise += static_cast<double>(measured_noise(c_pk, kp.sk, scale_plaintext(m, p)));
    sk_noise += static_cast<double>(measured_noise(c_sk, kp.sk, scale_plaintext(m, p)));
  }
  EXPECT_GT(pk_noise, sk_noise);
}

TEST(SignConvention, Duality) {
  Prng rng(20);
  for (Sign sign : {Sign::Plus, Sign::Minus}) {
    auto p = rlwe_params(sign);
    auto sk = secret_keygen(p, rng);
    auto m = random_msg(8, p.t, rng);
    auto ct = encrypt(m, sk, p, rng);
    EXPECT_EQ(decrypt(ct, sk, p), m);
    // Reading with the opposite convention does not recover the plaintext.
    auto flipped = ct;
    flipped.sign = sign == Sign::Plus ? Sign::Minus : Sign::Plus;
    EXPECT_NE(decrypt(flipped, sk, p), m);
  }
}
