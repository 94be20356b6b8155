// Command-line front end: keygen, encrypt, decrypt, eval, worked examples and
// benchmarks. Exit codes: 0 ok, 1 data error, 2 usage error.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>

#include <CLI11.hpp>

#include "fhe/bfv.hpp"
#include "fhe/bgv.hpp"
#include "fhe/ckks.hpp"
#include "fhe/examples.hpp"
#include "fhe/serialize.hpp"
#include "fhe/tfhe_engine.hpp"

namespace fs = std::filesystem;
using namespace fhe;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const std::vector<std::string> kSchemes{"tfhe", "bfv", "ckks", "bgv"};
const std::vector<std::string> kPresets{"paper-toy", "desk"};

// ---------------------------------------------------------------------------
// Presets: each (scheme, preset) pair fixes every parameter.

BfvParams bfv_preset(const std::string& preset) { return preset == "desk" ? BfvParams::desk() : BfvParams::small(8, 17, 3); }
BgvParams bgv_preset(const std::string& preset) { return preset == "desk" ? BgvParams::desk() : BgvParams::small(8, 17, 3); }
TfheParams tfhe_preset(const std::string& preset) { return preset == "desk" ? TfheParams::desk() : TfheParams::toy_gate(); }

CkksParams ckks_preset(const std::string& preset) {
  if (preset == "desk") return CkksParams::desk();
  CkksParams p;
  p.n = 4;
  p.delta = 1024;
  p.base_bits = 24;
  p.levels = 1;
  return p;
}

// FNV-1a, used to derive per-input encryption streams from the key seed.
u64 fnv1a(const std::string& s) {
  u64 h = 1469598103934665603ull;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ull;
  return h;
}

// ---------------------------------------------------------------------------
// A key directory regenerated from its record.

struct Session {
  std::string scheme, preset;
  u64 seed = 0;
  std::unique_ptr<BfvContext> bfv;
  std::unique_ptr<BgvContext> bgv;
  std::unique_ptr<CkksContext> ckks;
  std::unique_ptr<TfheEngine> tfhe;
  TfheKeys tfhe_keys;
  BootstrapKeyU tfhe_bk;

  Session(std::string s, std::string p, u64 sd) : scheme(std::move(s)), preset(std::move(p)), seed(sd) {
    Prng rng(seed);
    if (scheme == "bfv") {
      bfv = std::make_unique<BfvContext>(bfv_preset(preset));
      bfv->keygen(rng);
      bfv->gen_rotation_keys(rng);
    } else if (scheme == "bgv") {
      bgv = std::make_unique<BgvContext>(bgv_preset(preset));
      bgv->keygen(rng);
      bgv->gen_rotation_keys(rng);
    } else if (scheme == "ckks") {
      ckks = std::make_unique<CkksContext>(ckks_preset(preset));
      ckks->keygen(rng);
      ckks->gen_rotation_keys(rng);
    } else if (scheme == "tfhe") {
      tfhe = std::make_unique<TfheEngine>(tfhe_preset(preset));
      tfhe_keys = tfhe->keygen(rng);
      tfhe_bk = tfhe->make_bootstrap_key(tfhe_keys, rng);
    } else {
      throw UsageError("unknown scheme " + scheme);
    }
  }

  Json secret_json() const {
    if (tfhe) return {{"lwe", tfhe_keys.lwe}, {"ring", tfhe_keys.ring}};
    if (bfv) return secret_to_json(bfv->secret_key());
    if (bgv) return secret_to_json(bgv->secret_key());
    return secret_to_json(ckks->secret_key());
  }

  std::vector<std::string> key_inventory() const {
    if (tfhe) return {"bootstrap", "key_switch"};
    std::vector<std::string> keys{"relin"};
    std::vector<u64> elems;
    if (bfv) {
      for (std::size_t h = 1; h < bfv->half(); h <<= 1) elems.push_back(bfv->galois_element(h));
      elems.push_back(bfv->swap_element());
    } else if (bgv) {
      for (std::size_t h = 1; h < bgv->half(); h <<= 1) elems.push_back(bgv->galois_element(h));
      elems.push_back(bgv->swap_element());
    } else {
      for (std::size_t h = 1; h < ckks->slots(); h <<= 1) elems.push_back(ckks->galois_element(h));
      elems.push_back(ckks->conj_element());
    }
    for (u64 k : elems) keys.push_back("galois:" + std::to_string(k));
    return keys;
  }

  std::size_t slot_count() const {
    if (bfv) return bfv->slots();
    if (bgv) return bgv->slots();
    if (ckks) return ckks->slots();
    return 0;
  }
};

Json record(const Session& s) { return {{"scheme", s.scheme}, {"preset", s.preset}, {"seed", s.seed}}; }

Session load_session(const std::string& dir) {
  const Json sec = read_json_file((fs::path(dir) / "secret.json").string());
  Session s(sec.at("scheme").get<std::string>(), sec.at("preset").get<std::string>(), sec.at("seed").get<u64>());
  require(s.secret_json() == sec.at("secret"), ErrorCode::IoError, "secret key does not match its regeneration record");
  return s;
}

void check_envelope(const Json& ct, const Session& s) {
  require(ct.at("scheme") == s.scheme && ct.at("preset") == s.preset, ErrorCode::ParamMismatch,
          "ciphertext was made for a different scheme or preset");
}

// ---------------------------------------------------------------------------
// Plaintext data files: {"values": [...]} or a bare array.

Json data_values(const Json& data) {
  const Json& v = data.is_object() ? data.at("values") : data;
  require(v.is_array(), ErrorCode::IoError, "input must be an array of values");
  require(!v.empty(), ErrorCode::IoError, "input holds no values");
  return v;
}

std::vector<u64> int_slots(const Json& v, std::size_t n, u64 t) {
  require(v.size() <= n, ErrorCode::LengthMismatch, "more values than slots");
  std::vector<u64> out(n, 0);
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<u64>(mod(static_cast<i128>(v[i].get<i64>()), static_cast<i64>(t)));
  return out;
}

CVector complex_slots(const Json& v, std::size_t n) {
  CVector out = slots_from_json(v);
  require(out.size() <= n, ErrorCode::LengthMismatch, "more values than slots");
  out.resize(n, {0.0, 0.0});
  return out;
}

// ---------------------------------------------------------------------------
// Commands.

int cmd_keygen(const std::string& scheme, const std::string& preset, u64 seed, const std::string& out) {
  Session s(scheme, preset, seed);
  fs::create_directories(out);
  Json sec = record(s);
  sec["secret"] = s.secret_json();
  Json ev = record(s);
  ev["format"] = "regenerate";
  ev["keys"] = s.key_inventory();
  write_json_file((fs::path(out) / "secret.json").string(), sec);
  write_json_file((fs::path(out) / "eval.json").string(), ev);
  std::cout << "wrote " << out << "/secret.json and " << out << "/eval.json\n";
  return 0;
}

Json encrypt_values(Session& s, const Json& values, Prng& rng) {
  Json env = {{"scheme", s.scheme}, {"preset", s.preset}};
  if (s.tfhe) {
    Json cts = Json::array();
    for (const auto& b : values) {
      const i64 bit = b.get<i64>();
      require(bit == 0 || bit == 1, ErrorCode::IoError, "TFHE input bits must be 0 or 1");
      cts.push_back(lwe_to_json(s.tfhe->encrypt_bit(bit == 1, s.tfhe_keys.lwe, rng)));
    }
    env["cts"] = cts;
  } else if (s.bfv) {
    env["ct"] = glwe_to_json(s.bfv->encrypt(int_slots(values, s.slot_count(), s.bfv->params().t), rng));
  } else if (s.bgv) {
    const auto c = s.bgv->encrypt(int_slots(values, s.slot_count(), s.bgv->params().t), rng);
    env["ct"] = glwe_to_json(c.ct);
    env["level"] = c.level;
  } else {
    const auto c = s.ckks->encrypt(complex_slots(values, s.slot_count()), rng);
    env["ct"] = glwe_to_json(c.ct);
    env["level"] = c.level;
    env["scale"] = c.scale;
  }
  return env;
}

Json decrypt_values(const Session& s, const Json& env) {
  check_envelope(env, s);
  if (s.tfhe) {
    Json bits = Json::array();
    for (const auto& c : env.at("cts")) bits.push_back(s.tfhe->decrypt_bit(lwe_from_json(c), s.tfhe_keys.lwe) ? 1 : 0);
    return bits;
  }
  const GlweCiphertext ct = glwe_from_json(env.at("ct"));
  if (s.bfv) return s.bfv->decrypt(ct);
  if (s.bgv) return s.bgv->decrypt({ct, env.at("level").get<std::size_t>()});
  return slots_to_json(s.ckks->decrypt({ct, env.at("level").get<std::size_t>(), env.at("scale").get<double>()}));
}

int cmd_encrypt(const std::string& key, const std::string& in, const std::string& out) {
  Session s = load_session(key);
  const Json data = read_json_file(in);
  Prng rng(s.seed ^ fnv1a(data.dump()));
  write_json_file(out, encrypt_values(s, data_values(data), rng));
  return 0;
}

int cmd_decrypt(const std::string& key, const std::string& in, const std::string& out, const std::string& expect) {
  Session s = load_session(key);
  const Json values = decrypt_values(s, read_json_file(in));
  const Json result = {{"values", values}};
  if (out.empty())
    std::cout << result.dump() << '\n';
  else
    write_json_file(out, result);
  if (!expect.empty()) {
    require(s.ckks != nullptr, ErrorCode::ParamMismatch, "tolerance reports apply to ckks only");
    const CVector want = complex_slots(data_values(read_json_file(expect)), s.slot_count());
    const double err = max_abs_error(slots_from_json(values), want);
    std::cout << "max slot error " << err << '\n';
  }
  return 0;
}

// Envelope for a scheme ciphertext at a level and scale.
Json envelope(const Session& s, const GlweCiphertext& ct, std::size_t level, double scale) {
  Json env = {{"scheme", s.scheme}, {"preset", s.preset}, {"ct", glwe_to_json(ct)}};
  if (s.bgv || s.ckks) env["level"] = level;
  if (s.ckks) env["scale"] = scale;
  return env;
}

LweU tfhe_not(const TfheEngine& eng, const LweU& x) { return eng.combine(x, x, static_cast<u64>(-1), 0, 0); }

Json eval_tfhe(Session& s, const std::string& gate_name, const std::vector<Json>& inputs) {
  const auto& eng = *s.tfhe;
  std::vector<std::vector<LweU>> cols;
  for (const auto& env : inputs) {
    std::vector<LweU> c;
    for (const auto& x : env.at("cts")) c.push_back(lwe_from_json(x));
    cols.push_back(c);
  }
  const std::size_t arity = gate_name == "NOT" ? 1 : gate_name == "MUX" ? 3 : 2;
  if (cols.size() != arity) throw UsageError("gate " + gate_name + " takes " + std::to_string(arity) + " inputs");
  for (const auto& c : cols) require(c.size() == cols[0].size(), ErrorCode::LengthMismatch, "input files hold different bit counts");
  Json out = Json::array();
  for (std::size_t i = 0; i < cols[0].size(); ++i) {
    LweU r;
    if (gate_name == "NOT") {
      r = tfhe_not(eng, cols[0][i]);
    } else if (gate_name == "MUX") {
      // sel ? b : a
      const LweU& sel = cols[0][i];
      r = eng.gate(Gate::Or, eng.gate(Gate::And, sel, cols[2][i], s.tfhe_bk),
                   eng.gate(Gate::And, tfhe_not(eng, sel), cols[1][i], s.tfhe_bk), s.tfhe_bk);
    } else {
      r = eng.gate(parse_gate(gate_name), cols[0][i], cols[1][i], s.tfhe_bk);
    }
    out.push_back(lwe_to_json(r));
  }
  return {{"scheme", s.scheme}, {"preset", s.preset}, {"cts", out}};
}

int cmd_eval(const std::string& key, const std::string& op, const std::vector<std::string>& ins, const std::string& out) {
  Session s = load_session(key);
  std::vector<Json> inputs;
  for (const auto& f : ins) {
    inputs.push_back(read_json_file(f));
    check_envelope(inputs.back(), s);
  }
  auto need = [&](std::size_t k) {
    if (inputs.size() != k) throw UsageError("operation " + op + " takes " + std::to_string(k) + " inputs");
  };
  Json result;
  if (op.rfind("gate:", 0) == 0) {
    if (!s.tfhe) throw UsageError("gates need the tfhe scheme");
    std::string g = op.substr(5);
    for (auto& c : g) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    result = eval_tfhe(s, g, inputs);
  } else {
    if (s.tfhe) throw UsageError("tfhe supports gate:NAME only");
    std::vector<GlweCiphertext> cts;
    std::vector<std::size_t> levels;
    std::vector<double> scales;
    for (const auto& env : inputs) {
      cts.push_back(glwe_from_json(env.at("ct")));
      levels.push_back(env.value("level", std::size_t{0}));
      scales.push_back(env.value("scale", 1.0));
    }
    if (op == "add" || op == "mul") {
      need(2);
      const bool add = op == "add";
      if (s.bfv) {
        result = envelope(s, add ? s.bfv->add(cts[0], cts[1]) : s.bfv->mul(cts[0], cts[1]), 0, 1.0);
      } else if (s.bgv) {
        const BgvCiphertext x{cts[0], levels[0]}, y{cts[1], levels[1]};
        const auto r = add ? s.bgv->add(x, y) : s.bgv->mul(x, y);
        result = envelope(s, r.ct, r.level, 1.0);
      } else {
        const CkksCiphertext x{cts[0], levels[0], scales[0]}, y{cts[1], levels[1], scales[1]};
        const auto r = add ? s.ckks->add(x, y) : s.ckks->mul(x, y);
        result = envelope(s, r.ct, r.level, r.scale);
      }
    } else if (op.rfind("rotate:", 0) == 0) {
      need(1);
      std::size_t h = 0;
      try {
        h = std::stoul(op.substr(7));
      } catch (const std::exception&) {
        throw UsageError("rotate needs a step count, as in rotate:3");
      }
      if (s.bfv) {
        result = envelope(s, s.bfv->rotate_composed(cts[0], h), 0, 1.0);
      } else if (s.bgv) {
        const auto r = s.bgv->rotate({cts[0], levels[0]}, h);
        result = envelope(s, r.ct, r.level, 1.0);
      } else {
        const auto r = s.ckks->rotate({cts[0], levels[0], scales[0]}, h);
        result = envelope(s, r.ct, r.level, r.scale);
      }
    } else {
      throw UsageError("unknown operation " + op);
    }
  }
  write_json_file(out, result);
  return 0;
}

int cmd_examples(bool json, const std::string& corrupt) {
  auto all = worked_examples();
  if (!corrupt.empty()) {
    bool known = false;
    for (const auto& e : all) known |= e.name == corrupt;
    if (!known) throw UsageError("no example named " + corrupt);
  }
  bool ok = true;
  Json rows = Json::array();
  for (const auto& e : all) {
    const ExampleResult r = e.run(e.name == corrupt);
    ok &= r.pass;
    rows.push_back({{"name", r.name}, {"pass", r.pass}, {"detail", r.detail}, {"ms", r.ms}});
    if (!json) std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << "  " << r.detail << '\n';
  }
  if (json) std::cout << rows.dump(1) << '\n';
  return ok ? 0 : 1;
}

template <class Fn>
double time_ns(std::size_t reps, Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < reps; ++i) fn();
  const auto end = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::nano>(end - start).count() / static_cast<double>(reps);
}

int cmd_bench(const std::string& target, std::size_t size, u64 seed) {
  Prng rng(seed);
  if (target == "ntt") {
    require(size >= 2 && (size & (size - 1)) == 0, ErrorCode::BadModulus, "size must be a power of two");
    const u64 p = gen_ntt_prime(PrimeSpec{59, 1, 2 * size, true});
    const auto tab = ntt_tables_for(size, p);
    std::vector<u64> a(size), b(size);
    for (std::size_t i = 0; i < size; ++i) a[i] = rng.uniform_u64(p), b[i] = rng.uniform_u64(p);
    volatile u64 sink = 0;
    const double ns = time_ns(200, [&] { sink = sink + negacyclic_ntt_u64(a, b, *tab)[0]; });
    std::cout << "ntt n=" << size << " negacyclic product " << ns << " ns/op\n";
    return 0;
  }
  if (target == "extprod" || target == "bootstrap") {
    TfheEngine eng(TfheParams::desk());
    const TfheKeys keys = eng.keygen(rng);
    const BootstrapKeyU bk = eng.make_bootstrap_key(keys, rng);
    if (target == "extprod") {
      std::vector<u64> payload(eng.params().ring_dim, 0);
      const RlweU c = eng.encrypt_rlwe(payload, keys.ring, eng.params().ring_sigma, rng);
      const double ns = time_ns(std::max<std::size_t>(size, 1), [&] { (void)eng.external_product(c, bk.bits[0]); });
      std::cout << "external product N=" << eng.params().ring_dim << " " << ns / 1e3 << " us/op\n";
    } else {
      const LweU x = eng.encrypt_bit(true, keys.lwe, rng), y = eng.encrypt_bit(true, keys.lwe, rng);
      const double ns = time_ns(std::max<std::size_t>(size, 1), [&] { (void)eng.gate(Gate::And, x, y, bk); });
      std::cout << "desk gate bootstrap " << ns / 1e6 << " ms/op\n";
    }
    return 0;
  }
  throw UsageError("unknown bench target " + target);
}

u64 default_seed() {
  if (const char* env = std::getenv("FHE_SEED")) return std::stoull(env);
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lattice FHE toolkit: TFHE, BFV, CKKS and BGV at desk scale"};
  app.require_subcommand(1);
  std::string scheme = "bfv", preset = "desk", out, key, in, op, expect, corrupt, target = "ntt";
  std::vector<std::string> ins;
  u64 seed = default_seed();
  bool json = false;
  std::size_t size = 1024;

  auto* keygen = app.add_subcommand("keygen", "generate secret and evaluation key files");
  keygen->add_option("--scheme", scheme)->check(CLI::IsMember(kSchemes))->required();
  keygen->add_option("--preset", preset)->check(CLI::IsMember(kPresets));
  keygen->add_option("--seed", seed, "64-bit seed (default FHE_SEED or 1)");
  keygen->add_option("--out", out, "key directory")->required();

  auto* enc = app.add_subcommand("encrypt", "encrypt a JSON value file");
  enc->add_option("--key", key)->required();
  enc->add_option("--in", in)->required();
  enc->add_option("--out", out)->required();

  auto* dec = app.add_subcommand("decrypt", "decrypt a ciphertext file");
  dec->add_option("--key", key)->required();
  dec->add_option("--in", in)->required();
  dec->add_option("--out", out);
  dec->add_option("--expect", expect, "ckks: reference values for a tolerance report");

  auto* ev = app.add_subcommand("eval", "add, mul, rotate:h or gate:NAME");
  ev->add_option("--key", key)->required();
  ev->add_option("--op", op)->required();
  ev->add_option("--in", ins)->required();
  ev->add_option("--out", out)->required();

  auto* ex = app.add_subcommand("examples", "run the worked numeric examples");
  ex->add_flag("--json", json);
  ex->add_option("--corrupt", corrupt, "perturb one expected constant (harness self-test)");

  auto* bench = app.add_subcommand("bench", "timing report");
  bench->add_option("--target", target)->check(CLI::IsMember({"ntt", "extprod", "bootstrap"}));
  bench->add_option("--size", size);
  bench->add_option("--seed", seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*keygen) return cmd_keygen(scheme, preset, seed, out);
    if (*enc) return cmd_encrypt(key, in, out);
    if (*dec) return cmd_decrypt(key, in, out, expect);
    if (*ev) return cmd_eval(key, op, ins, out);
    if (*ex) return cmd_examples(json, corrupt);
    if (*bench) return cmd_bench(target, size, seed);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const Json::exception& e) {
    std::cerr << "error: malformed input: " << e.what() << '\n';
    return 1;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
