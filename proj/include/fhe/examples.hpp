#pragma once

// Worked numeric examples with their published constants. Shared by the
// acceptance binary and the CLI so both run the same manifest.

#include <chrono>
#include <functional>
#include <string>
#include <vector>

#include "fhe/bfv.hpp"
#include "fhe/ckks.hpp"
#include "fhe/glwe.hpp"
#include "fhe/tfhe_engine.hpp"

namespace fhe {

struct ExampleResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double ms = 0.0;
};

struct WorkedExample {
  std::string name;
  // Runs the example; `corrupt` perturbs one expected constant.
  std::function<ExampleResult(bool corrupt)> run;
};

namespace detail {

template <class T>
std::string join(const std::vector<T>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + ")";
}

inline ExampleResult timed(const std::string& name, const std::function<std::pair<bool, std::string>()>& body) {
  const auto start = std::chrono::steady_clock::now();
  auto [ok, detail] = body();
  const auto end = std::chrono::steady_clock::now();
  return {name, ok, detail, std::chrono::duration<double, std::milli>(end - start).count()};
}

inline std::vector<i64> centered_vec(const std::vector<i64>& v, i64 m) {
  std::vector<i64> out;
  for (i64 x : v) out.push_back(centered_reduce(static_cast<i128>(x), m));
  return out;
}

}  // namespace detail

inline ExampleResult example_bfv_encode(bool corrupt = false) {
  return detail::timed("bfv_encode_n4", [&] {
    const auto mats = build_matrices(4, Field::Ring, 17, 9);
    std::vector<u64> want_enc{12, 11, 12, 1}, want_dec{12, 7, 8, 2};
    if (corrupt) want_enc[0] ^= 1;
    const auto enc = batch_encode({10, 3, 5, 13}, mats);
    const auto dec = batch_decode({3, 16, 9, 7}, mats);
    return std::pair{enc == want_enc && dec == want_dec, "encode " + detail::join(enc) + " decode " + detail::join(dec)};
  });
}

inline ExampleResult example_bfv_rotate(bool corrupt = false) {
  return detail::timed("bfv_rotate_n8", [&] {
    BfvContext ctx(BfvParams::small(8, 17, 3));
    Prng rng(2024);
    ctx.keygen(rng);
    ctx.gen_rotation_key(3, rng);
    std::vector<u64> want{4, 1, 2, 3, 8, 5, 6, 7};
    if (corrupt) want[0] ^= 1;
    const auto got = ctx.decrypt(ctx.rotate(ctx.encrypt({1, 2, 3, 4, 5, 6, 7, 8}, rng), 3));
    return std::pair{got == want, "rotate 3 " + detail::join(got)};
  });
}

inline ExampleResult example_ckks_encode(bool corrupt = false) {
  return detail::timed("ckks_encode_n4", [&] {
    const auto mats = build_matrices(4, Field::Complex);
    const CVector v{{1.1, 4.3}, {3.5, -1.4}};
    std::vector<i64> want{2355, 1195, 1485, 2933};
    if (corrupt) want[0] ^= 1;
    const auto m = ckks_encode(v, 1024.0, mats);
    std::vector<double> md(m.begin(), m.end());
    const double err = max_abs_error(ckks_decode(md, 1024.0, mats), v);
    return std::pair{m == want && err <= 1.5e-3, "encode " + detail::join(m) + " max error " + std::to_string(err)};
  });
}

inline ExampleResult example_lwe_mod_switch(bool corrupt = false) {
  return detail::timed("lwe_mod_switch", [&] {
    auto p = GlweParams::message_scaled(4, 1, 64, 4, Sign::Plus, 0.0);
    SecretKey sk;
    sk.s = {{0}, {1}, {1}, {0}};
    GlweCiphertext ct;
    ct.sign = Sign::Plus;
    for (int a : {-25, 12, -3, 7}) ct.a.push_back(RingPoly::constant(p.ring, a));
    ct.b = RingPoly::constant(p.ring, 26);
    const auto sw = modulus_switch(ct, 32, p.delta);
    std::vector<i64> got;
    for (const auto& a : sw.a) got.push_back(static_cast<i64>(a.centered()[0]));
    got.push_back(static_cast<i64>(sw.b.centered()[0]));
    std::vector<i64> want{-12, 6, -1, 4, 13};
    if (corrupt) want[0] ^= 1;
    const BigInt m = decrypt(sw, sk, p.with_modulus(32))[0];
    return std::pair{got == want && m == 1 && decrypt(ct, sk, p)[0] == 1,
                     "switched " + detail::join(got) + " decrypts to " + m.str()};
  });
}

// Toy bootstrap: n = 16, t = 8, q = 64, eight key bits, checked against the
// plaintext shadow of the blind rotation.
inline ExampleResult example_tfhe_walkthrough(bool corrupt = false) {
  return detail::timed("tfhe_toy_bootstrap", [&] {
    const std::vector<i64> key{1, 0, 0, 1, 1, 1, 0, 1};
    const std::vector<i64> mask{8, -28, 4, -32, 0, 31, -6, 7};
    std::vector<i64> want_switch{4, -14, 2, -16, 0, 16, -3, 4, 12};
    if (corrupt) want_switch[0] ^= 1;
    TfheEngine eng(TfheParams::toy());
    Prng rng(21);
    TfheKeys keys = eng.keygen(rng);
    keys.lwe = key;
    const BootstrapKeyU bk = eng.make_bootstrap_key(keys, rng);
    LweU ct;
    for (i64 a : mask) ct.a.push_back(static_cast<u64>(a) & eng.params().mask());
    ct.b = 24;
    const auto sw = eng.mod_switch(ct);
    const i64 shift = shadow_rotation(sw, key, 16);
    const Lut lut = identity_lut(16, 8, -1, 0);
    const bool rotated = eng.rlwe_decrypt(eng.blind_rotate(lut, sw, bk), keys.ring) == lut_rotated(lut, shift);
    const u64 out = eng.decrypt(eng.bootstrap(ct, lut, bk), key);
    const auto got = detail::centered_vec(sw, 32);
    const bool ok = got == detail::centered_vec(want_switch, 32) && shift == 4 && rotated && out == 1;
    return std::pair{ok, "switched " + detail::join(got) + " rotation " + std::to_string(shift) + " plaintext " +
                             std::to_string(out)};
  });
}

// AND truth table at the noiseless gate preset.
inline ExampleResult example_tfhe_and_table(bool corrupt = false) {
  return detail::timed("tfhe_and_table", [&] {
    TfheEngine eng(TfheParams::toy_gate());
    Prng rng(5);
    const TfheKeys keys = eng.keygen(rng);
    const BootstrapKeyU bk = eng.make_bootstrap_key(keys, rng);
    std::vector<int> want{0, 0, 0, 1}, got;
    if (corrupt) want[3] ^= 1;
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y) {
        const auto c = eng.gate(Gate::And, eng.encrypt_bit(x, keys.lwe, rng), eng.encrypt_bit(y, keys.lwe, rng), bk);
        got.push_back(eng.decrypt_bit(c, keys.lwe));
      }
    return std::pair{got == want, "AND " + detail::join(got)};
  });
}

inline std::vector<WorkedExample> worked_examples() {
  return {{"bfv_encode_n4", example_bfv_encode},         {"bfv_rotate_n8", example_bfv_rotate},
          {"ckks_encode_n4", example_ckks_encode},       {"lwe_mod_switch", example_lwe_mod_switch},
          {"tfhe_toy_bootstrap", example_tfhe_walkthrough}, {"tfhe_and_table", example_tfhe_and_table}};
}

}  // namespace fhe
