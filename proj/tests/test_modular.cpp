#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "fhe/modular.hpp"

using namespace fhe;

namespace {

bool trial_division_prime(u64 n) {
  if (n < 2) return false;
  for (u64 d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

// Brute-force centered representative: the unique r = x (mod q) in the documented range.
i64 brute_centered(i64 x, i64 q) {
  const i64 lo = (q % 2 == 0) ? -q / 2 : -(q - 1) / 2;
  for (i64 r = lo; r < lo + q; ++r)
    if (((x - r) % q + q) % q == 0) return r;
  return 0;
}

}  // namespace

TEST(CenteredReduce, FixedCases) {
  EXPECT_EQ(centered_reduce(BigInt(7), BigInt(5)), 2);
  EXPECT_EQ(centered_reduce(BigInt(6), BigInt(8)), -2);
  EXPECT_EQ(centered_reduce(BigInt(-4), BigInt(8)), -4);
  EXPECT_EQ(centered_reduce(BigInt(4), BigInt(8)), -4);
  EXPECT_EQ(centered_reduce(BigInt(3), BigInt(8)), 3);
}

TEST(CenteredReduce, MatchesBruteForceAndRoundTrips) {
  for (i64 q = 2; q <= 40; ++q)
    for (i64 x = -100; x <= 100; ++x) {
      BigInt c = centered_reduce(BigInt(x), BigInt(q));
      EXPECT_EQ(c, brute_centered(x, q));
      EXPECT_EQ(mod(c, BigInt(q)), mod(BigInt(x), BigInt(q)));
      EXPECT_EQ(centered_reduce(static_cast<i128>(x), q), brute_centered(x, q));
    }
}

TEST(Rounding, HalfRoundsUp) {
  EXPECT_EQ(round_div(BigInt(-25), BigInt(2)), -12);
  EXPECT_EQ(round_div(BigInt(7), BigInt(2)), 4);
  EXPECT_EQ(round_div(BigInt(-3), BigInt(2)), -1);
  EXPECT_EQ(round_div(BigInt(5), BigInt(3)), 2);
  EXPECT_EQ(round_div(BigInt(-5), BigInt(3)), -2);
  EXPECT_EQ(round_div(static_cast<i128>(-25), 2), -12);
}

TEST(ModInverse, WorkedAndTrivialCases) {
  EXPECT_EQ(mod_inverse(BigInt(3), BigInt(11)), 4);
  EXPECT_EQ(mod_inverse(BigInt(1), BigInt(97)), 1);
  EXPECT_EQ(mod_inverse(BigInt(7), BigInt(16)), 7);
  EXPECT_EQ(mod_inverse(u64{3}, u64{11}), 4u);
}

TEST(ModInverse, ExhaustiveSmall) {
  for (u64 q = 2; q <= 64; ++q)
    for (u64 a = 0; a < q; ++a) {
      u64 brute = 0;
      for (u64 x = 1; x < q; ++x)
        if (a * x % q == 1) brute = x;
      if (brute) {
        EXPECT_EQ(mod_inverse(a, q), brute);
        EXPECT_EQ(mod_inverse(BigInt(a), BigInt(q)), brute);
      } else {
        EXPECT_THROW(mod_inverse(a, q), Error);
      }
    }
}

TEST(ModInverse, RandomCoprimePairs) {
  std::mt19937_64 rng(1);
  int done = 0;
  while (done < 1000) {
    BigInt q = (BigInt(rng()) << 64) | rng();
    BigInt a = (BigInt(rng()) << 32) | rng();
    if (q < 2 || gcd(a, q) != 1) continue;
    EXPECT_EQ(mod(a * mod_inverse(a, q), q), 1);
    ++done;
  }
}

TEST(ModInverse, NotInvertibleCode) {
  try {
    mod_inverse(BigInt(4), BigInt(8));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotInvertible);
  }
}

TEST(Primality, AgreesWithTrialDivision) {
  for (u64 n = 0; n < 20000; ++n) EXPECT_EQ(is_prime(n), trial_division_prime(n)) << n;
  EXPECT_TRUE(is_prime(u64{0xFFFFFFFFFFFFFFC5ull}));  // largest 64-bit prime
  EXPECT_FALSE(is_prime(u64{3215031751ull}));         // strong pseudoprime to bases 2,3,5,7
  EXPECT_TRUE(is_prime((BigInt(1) << 127) - 1));
  EXPECT_FALSE(is_prime((BigInt(1) << 127) + 1));
}

TEST(PrimitiveRoot, WorkedRootSets) {
  const u64 w4 = find_primitive_2nth_root(17, 4);
  EXPECT_TRUE(w4 == 2 || w4 == 8 || w4 == 15 || w4 == 9);
  const u64 w8 = find_primitive_2nth_root(17, 8);
  const std::vector<u64> set8 = {3, 5, 6, 7, 10, 11, 12, 14};
  EXPECT_NE(std::find(set8.begin(), set8.end(), w8), set8.end());
  const u64 w2 = find_primitive_2nth_root(5, 2);
  EXPECT_TRUE(w2 == 2 || w2 == 3);
}

TEST(PrimitiveRoot, OrderIsExactly2n) {
  for (u64 n : {2u, 4u, 8u, 16u, 64u, 256u}) {
    const u64 t = gen_ntt_prime(PrimeSpec{30, 1, 2 * n});
    const u64 w = find_primitive_2nth_root(t, n);
    EXPECT_EQ(pow_mod(w, 2 * n, t), 1u);
    for (u64 d = 1; d < 2 * n; ++d)
      if ((2 * n) % d == 0) {
        EXPECT_NE(pow_mod(w, d, t), 1u);
      }
    EXPECT_EQ(multiplicative_order(w, t), 2 * n);
  }
}

TEST(PrimitiveRoot, RejectsBadModulus) {
  try {
    find_primitive_2nth_root(19, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BadModulus);
  }
}

TEST(PrimeGen, SmallestAndProperties) {
  EXPECT_EQ(gen_ntt_prime(PrimeSpec{5, 1, 8}), 17u);
  EXPECT_EQ(gen_ntt_prime(PrimeSpec{2, 1, 2}), 3u);
  const u64 p = gen_ntt_prime(PrimeSpec{30, 1, 2048});
  EXPECT_TRUE(trial_division_prime(p));
  EXPECT_EQ(p % 2048, 1u);
  EXPECT_EQ(p >> 29, 1u);
  auto many = gen_ntt_primes(PrimeSpec{40, 1, 4096, true}, 5);
  for (std::size_t i = 0; i < many.size(); ++i) {
    EXPECT_TRUE(is_prime(many[i]));
    EXPECT_EQ(many[i] % 4096, 1u);
    for (std::size_t j = 0; j < i; ++j) EXPECT_NE(many[i], many[j]);
  }
}

TEST(PrimeGen, NotFoundAfterBoundedSearch) {
  try {
    gen_ntt_primes(PrimeSpec{4, 1, 8}, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotFound);
  }
}
