#pragma once

// JSON forms of polynomials, ciphertexts, keys and slot vectors. Big integers
// travel as decimal strings; CKKS slots as [re, im] pairs.

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "fhe/ckks.hpp"
#include "fhe/glwe.hpp"
#include "fhe/tfhe_engine.hpp"

namespace fhe {

using Json = nlohmann::json;

inline std::string to_json_string(const BigInt& x) { return x.str(); }

inline BigInt bigint_from_json(const Json& j) {
  require(j.is_string() || j.is_number_integer(), ErrorCode::IoError, "expected an integer or decimal string");
  if (j.is_number_integer()) return BigInt(j.get<i64>());
  const auto s = j.get<std::string>();
  require(!s.empty() && s.find_first_not_of("-0123456789") == std::string::npos, ErrorCode::IoError, "bad integer: " + s);
  return BigInt(s);
}

inline Json poly_to_json(const RingPoly& p) {
  Json c = Json::array();
  for (const auto& x : p.coeffs) c.push_back(x.str());
  return {{"n", p.params.n}, {"q", p.params.q.str()}, {"coeffs", c}};
}

inline RingPoly poly_from_json(const Json& j) {
  RingPoly p(RingParams(j.at("n").get<std::size_t>(), bigint_from_json(j.at("q"))));
  const auto& c = j.at("coeffs");
  require(c.size() == p.params.n, ErrorCode::IoError, "coefficient count differs from n");
  for (std::size_t i = 0; i < c.size(); ++i) p.coeffs[i] = mod(bigint_from_json(c[i]), p.params.q);
  return p;
}

inline Json glwe_to_json(const GlweCiphertext& ct) {
  Json a = Json::array();
  for (const auto& x : ct.a) a.push_back(poly_to_json(x));
  return {{"sign", ct.sign == Sign::Plus ? "plus" : "minus"}, {"a", a}, {"b", poly_to_json(ct.b)}};
}

inline GlweCiphertext glwe_from_json(const Json& j) {
  GlweCiphertext ct;
  ct.sign = j.at("sign").get<std::string>() == "plus" ? Sign::Plus : Sign::Minus;
  for (const auto& a : j.at("a")) ct.a.push_back(poly_from_json(a));
  ct.b = poly_from_json(j.at("b"));
  for (const auto& a : ct.a) require(a.params == ct.b.params, ErrorCode::IoError, "ciphertext components disagree");
  return ct;
}

inline Json lwe_to_json(const LweU& ct) { return {{"a", ct.a}, {"b", ct.b}}; }

inline LweU lwe_from_json(const Json& j) { return {j.at("a").get<std::vector<u64>>(), j.at("b").get<u64>()}; }

inline Json secret_to_json(const SecretKey& sk) { return {{"binary", sk.binary}, {"s", sk.s}}; }

inline SecretKey secret_from_json(const Json& j) {
  SecretKey sk;
  sk.binary = j.at("binary").get<bool>();
  sk.s = j.at("s").get<std::vector<std::vector<i64>>>();
  return sk;
}

inline Json slots_to_json(const CVector& v) {
  Json out = Json::array();
  for (const auto& z : v) out.push_back({z.real(), z.imag()});
  return out;
}

// Accepts [re, im] pairs or plain reals.
inline CVector slots_from_json(const Json& j) {
  require(j.is_array(), ErrorCode::IoError, "slot vector must be an array");
  CVector v;
  for (const auto& x : j) {
    if (x.is_array()) {
      require(x.size() == 2, ErrorCode::IoError, "complex slot must be [re, im]");
      v.emplace_back(x[0].get<double>(), x[1].get<double>());
    } else {
      v.emplace_back(x.get<double>(), 0.0);
    }
  }
  return v;
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::IoError, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return Json::parse(buf.str());
  } catch (const Json::exception& e) {
    fail(ErrorCode::IoError, path + ": " + e.what());
  }
}

inline void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::IoError, "cannot write " + path);
  out << j.dump(1) << '\n';
  require(out.good(), ErrorCode::IoError, "write failed for " + path);
}

}  // namespace fhe
