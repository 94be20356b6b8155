#pragma once

// Slot-ordered NTT over RingPoly and the batch-encoding matrices (ring and
// complex variants) whose row/column orderings fix every rotation identity.

#include <algorithm>
#include <complex>
#include <numbers>
#include <vector>

#include "fhe/ntt_engine.hpp"
#include "fhe/ring.hpp"

namespace fhe {

// Evaluation form with slot i = f(omega^(2i+1)).
inline RingPoly ntt_forward(const RingPoly& f, const NttTables& tab) {
  require(f.params.n == tab.n() && f.params.q == tab.q(), ErrorCode::TableMismatch, "tables do not match ring");
  require(f.form == Form::Coefficient, ErrorCode::TableMismatch, "input already in evaluation form");
  const std::size_t n = f.params.n;
  std::vector<u64> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = static_cast<u64>(f.coeffs[i]);
  tab.forward(a.data());
  RingPoly r(f.params);
  r.form = Form::Evaluation;
  for (std::size_t i = 0; i < n; ++i) r.coeffs[i] = a[bit_reverse(i, tab.log_n())];
  return r;
}

inline RingPoly ntt_inverse(const RingPoly& v, const NttTables& tab) {
  require(v.params.n == tab.n() && v.params.q == tab.q(), ErrorCode::TableMismatch, "tables do not match ring");
  require(v.form == Form::Evaluation, ErrorCode::TableMismatch, "input not in evaluation form");
  const std::size_t n = v.params.n;
  std::vector<u64> a(n);
  for (std::size_t i = 0; i < n; ++i) a[bit_reverse(i, tab.log_n())] = static_cast<u64>(v.coeffs[i]);
  tab.inverse(a.data());
  RingPoly r(v.params);
  for (std::size_t i = 0; i < n; ++i) r.coeffs[i] = a[i];
  return r;
}

// J(h) = 5^h mod 2n and J*(h) = -5^h mod 2n for h < n/2.
inline std::vector<u64> j_table(std::size_t n) {
  std::vector<u64> j(n / 2 == 0 ? 1 : n / 2);
  u64 v = 1 % (2 * n);
  for (auto& x : j) {
    x = v;
    v = (v * 5) % (2 * n);
  }
  return j;
}

inline std::vector<u64> j_star_table(std::size_t n) {
  auto j = j_table(n);
  for (auto& x : j) x = (2 * n - x) % (2 * n);
  return j;
}

// Exponent order of the decoding matrix rows, which is also the slot order.
inline std::vector<u64> slot_exponents(std::size_t n) {
  auto j = j_table(n), js = j_star_table(n);
  std::vector<u64> e(j);
  e.insert(e.end(), js.begin(), js.end());
  e.resize(n);
  return e;
}

// Exponent order of the encoding matrix columns: J reversed, then J* reversed.
inline std::vector<u64> encode_column_exponents(std::size_t n) {
  auto j = j_table(n), js = j_star_table(n);
  std::vector<u64> e(j.rbegin(), j.rend());
  e.insert(e.end(), js.rbegin(), js.rend());
  e.resize(n);
  return e;
}

enum class Field { Ring, Complex };

struct EncodingMatrices {
  std::size_t n = 0;
  Field field = Field::Ring;
  u64 t = 0;
  u64 omega = 0;
  std::vector<std::vector<u64>> w_hat, w_hat_star;
  std::vector<std::vector<std::complex<double>>> cw_hat, cw_hat_star;
  std::vector<u64> J, J_star;
};

inline EncodingMatrices build_matrices(std::size_t n, Field field, u64 t = 0, u64 omega = 0) {
  require(n >= 2 && (n & (n - 1)) == 0, ErrorCode::BadModulus, "n must be a power of two >= 2");
  EncodingMatrices m;
  m.n = n;
  m.field = field;
  m.J = j_table(n);
  m.J_star = j_star_table(n);
  const auto cols = encode_column_exponents(n);
  const auto rows = slot_exponents(n);
  if (field == Field::Ring) {
    require(t > 2 && (t - 1) % (2 * n) == 0 && is_prime(t), ErrorCode::BadModulus, "t must be a prime = 1 mod 2n");
    m.t = t;
    m.omega = omega ? omega : find_primitive_2nth_root(t, n);
    require(pow_mod(m.omega, n, t) == t - 1, ErrorCode::BadModulus, "omega is not a primitive 2n-th root");
    m.w_hat.assign(n, std::vector<u64>(n));
    m.w_hat_star.assign(n, std::vector<u64>(n));
    for (std::size_t c = 0; c < n; ++c) {
      const u64 base = pow_mod(m.omega, cols[c], t);
      for (std::size_t r = 0; r < n; ++r) m.w_hat[r][c] = pow_mod(base, r, t);
    }
    for (std::size_t r = 0; r < n; ++r) {
      const u64 base = pow_mod(m.omega, rows[r], t);
      for (std::size_t c = 0; c < n; ++c) m.w_hat_star[r][c] = pow_mod(base, c, t);
    }
  } else {
    auto root_pow = [n](u64 e) {
      const double ang = std::numbers::pi * static_cast<double>(e % (2 * n)) / static_cast<double>(n);
      return std::complex<double>(std::cos(ang), std::sin(ang));
    };
    m.cw_hat.assign(n, std::vector<std::complex<double>>(n));
    m.cw_hat_star.assign(n, std::vector<std::complex<double>>(n));
    for (std::size_t c = 0; c < n; ++c)
      for (std::size_t r = 0; r < n; ++r) m.cw_hat[r][c] = root_pow(cols[c] * r);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) m.cw_hat_star[r][c] = root_pow(rows[r] * c);
  }
  return m;
}

inline std::vector<std::vector<u64>> mat_mul_mod(const std::vector<std::vector<u64>>& a,
                                                 const std::vector<std::vector<u64>>& b, u64 t) {
  const std::size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
  std::vector<std::vector<u64>> c(n, std::vector<u64>(m, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < k; ++l)
      for (std::size_t j = 0; j < m; ++j) c[i][j] = add_mod(c[i][j], mul_mod(a[i][l], b[l][j], t), t);
  return c;
}

inline std::vector<u64> mat_vec_mod(const std::vector<std::vector<u64>>& a, const std::vector<u64>& v, u64 t) {
  std::vector<u64> r(a.size(), 0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) r[i] = add_mod(r[i], mul_mod(a[i][j], v[j] % t, t), t);
  return r;
}

using CMatrix = std::vector<std::vector<std::complex<double>>>;
using CVector = std::vector<std::complex<double>>;

inline CMatrix cmat_mul(const CMatrix& a, const CMatrix& b) {
  const std::size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
  CMatrix c(n, CVector(m));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < k; ++l)
      for (std::size_t j = 0; j < m; ++j) c[i][j] += a[i][l] * b[l][j];
  return c;
}

inline CVector cmat_vec(const CMatrix& a, const CVector& v) {
  CVector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) r[i] += a[i][j] * v[j];
  return r;
}

template <class T>
std::vector<T> reverse_vec(std::vector<T> v) {
  std::reverse(v.begin(), v.end());
  return v;
}

}  // namespace fhe
