#pragma once

// Radix and gadget decomposition. Digits are ordered most significant first,
// matching the gadget vector (q/beta, q/beta^2, ...).

#include <vector>

#include "fhe/ring.hpp"

namespace fhe {

enum class GadgetKind {
  Scaled,  // g_i = q / beta^i, rounding away the low part when beta^ell does not divide q
  Power,   // g_i = beta^(ell-i), ell = ceil(log_beta q); always exact
};

enum class DigitStyle {
  Balanced,  // -beta/2 < d <= beta/2
  Unsigned,  // 0 <= d < beta
};

struct GadgetSpec {
  BigInt q;
  u64 beta = 2;
  unsigned ell = 1;
  GadgetKind kind = GadgetKind::Scaled;
  DigitStyle style = DigitStyle::Balanced;

  GadgetSpec() = default;
  GadgetSpec(BigInt q_, u64 beta_, unsigned ell_, GadgetKind kind_ = GadgetKind::Scaled,
             DigitStyle style_ = DigitStyle::Balanced)
      : q(std::move(q_)), beta(beta_), ell(ell_), kind(kind_), style(style_) {
    require(beta >= 2, ErrorCode::BadModulus, "gadget base must be >= 2");
    require(ell >= 1, ErrorCode::BadModulus, "gadget level must be >= 1");
    require(q >= 2, ErrorCode::BadModulus, "gadget modulus must be >= 2");
    if (kind == GadgetKind::Power) require(BigInt(beta_pow(ell)) >= q, ErrorCode::BadModulus, "beta^ell must cover q");
  }

  // Smallest power gadget covering q.
  static GadgetSpec power(const BigInt& q, u64 beta, DigitStyle style = DigitStyle::Balanced) {
    unsigned ell = 1;
    BigInt p = beta;
    while (p < q) {
      p *= beta;
      ++ell;
    }
    return GadgetSpec(q, beta, ell, GadgetKind::Power, style);
  }

  BigInt beta_pow(unsigned e) const {
    BigInt p = 1;
    for (unsigned i = 0; i < e; ++i) p *= beta;
    return p;
  }

  // beta^ell divides q.
  bool integral() const { return kind == GadgetKind::Scaled && q % beta_pow(ell) == 0; }
  // Recomposition reproduces every residue exactly.
  bool exact() const { return kind == GadgetKind::Power || beta_pow(ell) == q; }

  std::vector<BigInt> gadget() const {
    std::vector<BigInt> g(ell);
    for (unsigned i = 1; i <= ell; ++i) g[i - 1] = kind == GadgetKind::Power ? beta_pow(ell - i) : q / beta_pow(i);
    return g;
  }
};

namespace detail {

// Base-beta digits of x (most significant first); x in the representable range.
inline std::vector<i64> digits_of(BigInt x, u64 beta, unsigned ell, DigitStyle style) {
  std::vector<i64> d(ell);
  const BigInt b(beta);
  for (unsigned i = ell; i-- > 0;) {
    BigInt r = mod(x, b);
    if (style == DigitStyle::Balanced && 2 * r > b) r -= b;
    d[i] = static_cast<i64>(r);
    x = (x - r) / b;
  }
  return d;
}

}  // namespace detail

inline std::vector<i64> decompose_scalar(const BigInt& gamma, const GadgetSpec& spec) {
  const BigInt g = mod(gamma, spec.q);
  const BigInt span = spec.beta_pow(spec.ell);
  if (spec.kind == GadgetKind::Power) {
    BigInt r = g;
    if (spec.style == DigitStyle::Balanced) {
      // Largest value whose balanced digits do not carry past the top position.
      const BigInt upper = BigInt(spec.beta / 2) * (span - 1) / BigInt(spec.beta - 1);
      if (r > upper) r -= spec.q;
    }
    return detail::digits_of(r, spec.beta, spec.ell, spec.style);
  }
  // Scaled gadget: round to the nearest multiple of q / beta^ell, then
  // decompose the quotient; a carry out of the top digit is a multiple of q.
  BigInt scaled = mod(round_div(g * span, spec.q), span);
  if (spec.style == DigitStyle::Balanced) {
    const BigInt upper = BigInt(spec.beta / 2) * (span - 1) / BigInt(spec.beta - 1);
    if (scaled > upper) scaled -= span;
  }
  return detail::digits_of(scaled, spec.beta, spec.ell, spec.style);
}

template <class Digit>
BigInt gadget_recompose(const std::vector<Digit>& digits, const GadgetSpec& spec) {
  require(digits.size() == spec.ell, ErrorCode::LengthMismatch, "digit count must equal ell");
  const auto g = spec.gadget();
  BigInt acc = 0;
  for (unsigned i = 0; i < spec.ell; ++i) acc += BigInt(digits[i]) * g[i];
  return mod(acc, spec.q);
}

// Level i holds digit i of every coefficient.
inline std::vector<RingPoly> decompose_poly(const RingPoly& f, const GadgetSpec& spec) {
  require(f.params.q == spec.q, ErrorCode::ParamMismatch, "gadget modulus differs from ring modulus");
  std::vector<RingPoly> out(spec.ell, RingPoly(f.params));
  for (std::size_t j = 0; j < f.params.n; ++j) {
    auto d = decompose_scalar(f.coeffs[j], spec);
    for (unsigned i = 0; i < spec.ell; ++i) out[i].coeffs[j] = mod(BigInt(d[i]), f.params.q);
  }
  return out;
}

inline RingPoly gadget_recompose_poly(const std::vector<RingPoly>& parts, const GadgetSpec& spec) {
  require(parts.size() == spec.ell, ErrorCode::LengthMismatch, "digit count must equal ell");
  const auto g = spec.gadget();
  RingPoly acc(parts[0].params);
  for (unsigned i = 0; i < spec.ell; ++i) acc = poly_add(acc, poly_scalar_mul(parts[i], g[i]));
  return acc;
}

}  // namespace fhe
