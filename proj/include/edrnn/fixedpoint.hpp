// Copyright 2026 The EdgeDRNN-sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "edrnn/error.hpp"

namespace edrnn::fx {

/// Signed two's complement fixed-point format: raw integer scaled by 2^-frac_bits.
struct QFormat {
  int total_bits = 16;
  int frac_bits = 8;

  constexpr bool valid() const {
    return (total_bits == 8 || total_bits == 16 || total_bits == 32) && frac_bits >= 0 &&
           frac_bits < total_bits;
  }
  constexpr std::int64_t raw_max() const { return (std::int64_t{1} << (total_bits - 1)) - 1; }
  constexpr std::int64_t raw_min() const { return -(std::int64_t{1} << (total_bits - 1)); }
  constexpr int int_bits() const { return total_bits - frac_bits; }
  constexpr int bytes() const { return total_bits / 8; }

  friend constexpr bool operator==(const QFormat&, const QFormat&) = default;
};

inline std::string to_string(const QFormat& f) {
  return "Q" + std::to_string(f.int_bits()) + "." + std::to_string(f.frac_bits);
}

// Datapath defaults: INT16 activations, INT8 weights, 32-bit accumulators.
inline constexpr QFormat kActFormat{16, 8};
inline constexpr QFormat kWgtFormat{8, 7};
inline constexpr QFormat kAccFormat{32, 15};

/// Accumulator format for a weight format: products of weight x activation
/// land on the accumulator grid without any shift.
constexpr QFormat accumulator_format(const QFormat& wgt, const QFormat& act = kActFormat) {
  return QFormat{32, wgt.frac_bits + act.frac_bits};
}

inline constexpr std::int32_t kOneAct = std::int32_t{1} << 8;  // 1.0 in Q8.8

constexpr std::int64_t saturate(std::int64_t v, int total_bits) {
  const std::int64_t hi = (std::int64_t{1} << (total_bits - 1)) - 1;
  const std::int64_t lo = -(std::int64_t{1} << (total_bits - 1));
  return v > hi ? hi : (v < lo ? lo : v);
}

constexpr std::int32_t sat32(std::int64_t v) { return static_cast<std::int32_t>(saturate(v, 32)); }
constexpr std::int16_t sat16(std::int64_t v) { return static_cast<std::int16_t>(saturate(v, 16)); }

/// Arithmetic shift by `shift` bits with round-to-nearest-even on the dropped
/// bits. Negative shifts widen (exact left shift).
constexpr std::int64_t round_shift(std::int64_t v, int shift) {
  if (shift <= 0) return v * (std::int64_t{1} << -shift);
  const std::int64_t q = v >> shift;  // floor
  const std::int64_t rem = v - q * (std::int64_t{1} << shift);
  const std::int64_t half = std::int64_t{1} << (shift - 1);
  if (rem > half || (rem == half && (q & 1) != 0)) return q + 1;
  return q;
}

/// Re-express `raw` from `from` frac bits to `to` frac bits, rounding half to
/// even and saturating to `to_bits`.
constexpr std::int64_t requantize(std::int64_t raw, int from_frac, int to_frac, int to_bits) {
  return saturate(round_shift(raw, from_frac - to_frac), to_bits);
}

/// Round-to-nearest-even of x * 2^frac_bits, saturated. NaN maps to 0.
inline std::int64_t quantize(double x, const QFormat& fmt) {
  if (std::isnan(x)) return 0;
  const double scaled = std::ldexp(x, fmt.frac_bits);
  if (scaled >= static_cast<double>(fmt.raw_max())) return fmt.raw_max();
  if (scaled <= static_cast<double>(fmt.raw_min())) return fmt.raw_min();
  // nearbyint honours the default FE_TONEAREST mode, i.e. ties to even.
  return static_cast<std::int64_t>(std::nearbyint(scaled));
}

constexpr double dequantize(std::int64_t raw, const QFormat& fmt) {
  return static_cast<double>(raw) / static_cast<double>(std::int64_t{1} << fmt.frac_bits);
}

/// acc + w * d with 32-bit saturation. The product of a Q1.7 weight and a Q8.8
/// delta already carries 15 fractional bits, so no alignment shift is needed.
constexpr std::int32_t mac(std::int32_t w, std::int32_t d, std::int32_t acc) {
  return sat32(static_cast<std::int64_t>(acc) + static_cast<std::int64_t>(w) * d);
}

// ---------------------------------------------------------------------------
// Nonlinear unit

enum class NluFunction { Sigmoid, Tanh };

/// Direct-indexed activation table over [-8, 8) with 1024 Q8.8 entries.
///
/// Entry i holds f((i - 512) / 64), i.e. the value at the lower edge of its
/// bin, so x = 0 hits an exact sample and tanh stays odd-symmetric.
class NluLut {
 public:
  static constexpr int kEntries = 1024;
  static constexpr int kCenter = kEntries / 2;
  static constexpr int kIndexShift = 2;  // Q8.8 raw -> bin index (16/1024 = 4 raw steps)
  static constexpr std::int32_t kClipLo = -2048;  // -8.0 in Q8.8
  static constexpr std::int32_t kClipHi = 2047;   // 8.0 - 2^-8
  static constexpr double kInputClip = 8.0;

  explicit NluLut(NluFunction fn) : fn_(fn) {
    for (int i = 0; i < kEntries; ++i) {
      const double x = static_cast<double>(i - kCenter) / 64.0;
      const double y = fn == NluFunction::Sigmoid ? 1.0 / (1.0 + std::exp(-x)) : std::tanh(x);
      entries_[static_cast<std::size_t>(i)] = static_cast<std::int16_t>(quantize(y, kActFormat));
    }
  }

  NluFunction function() const { return fn_; }
  const std::array<std::int16_t, kEntries>& entries() const { return entries_; }

  /// Table lookup for an input already in Q8.8.
  std::int16_t lookup_act(std::int32_t x_act) const {
    const std::int32_t clipped = x_act < kClipLo ? kClipLo : (x_act > kClipHi ? kClipHi : x_act);
    return entries_[static_cast<std::size_t>((clipped - kClipLo) >> kIndexShift)];
  }

 private:
  NluFunction fn_;
  std::array<std::int16_t, kEntries> entries_{};
};

inline const NluLut& sigmoid_lut() {
  static const NluLut lut(NluFunction::Sigmoid);
  return lut;
}

inline const NluLut& tanh_lut() {
  static const NluLut lut(NluFunction::Tanh);
  return lut;
}

/// Requantize an accumulator value (acc_frac fractional bits, Q17.15 by
/// default) to Q8.8, clip to the table domain and look it up.
inline std::int16_t nlu_eval(const NluLut& lut, std::int32_t x_acc, int acc_frac = kAccFormat.frac_bits) {
  const auto x_act = static_cast<std::int32_t>(requantize(x_acc, acc_frac, kActFormat.frac_bits, 16));
  return lut.lookup_act(x_act);
}

// ---------------------------------------------------------------------------
// Integer-backed tensors

/// Flat raw-integer storage with a (rows, cols) or (len,) shape.
template <typename Raw>
struct QTensor {
  std::vector<Raw> data;
  std::size_t rows = 0;
  std::size_t cols = 1;
  QFormat format{};

  QTensor() = default;
  QTensor(std::size_t r, std::size_t c, QFormat fmt) : data(r * c, Raw{0}), rows(r), cols(c), format(fmt) {}

  static QTensor vector(std::size_t len, QFormat fmt) { return QTensor(len, 1, fmt); }

  std::size_t size() const { return data.size(); }

  /// Every raw value fits the declared width and the data matches the shape.
  bool well_formed() const {
    if (data.size() != rows * cols) return false;
    for (Raw v : data) {
      if (v > format.raw_max() || v < format.raw_min()) return false;
    }
    return true;
  }

  friend bool operator==(const QTensor&, const QTensor&) = default;
};

}  // namespace edrnn::fx
