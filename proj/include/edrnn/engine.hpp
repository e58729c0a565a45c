// Copyright 2026 The EdgeDRNN-sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edrnn/error.hpp"
#include "edrnn/fixedpoint.hpp"
#include "edrnn/model.hpp"

// Functional model of the delta datapath: delta unit, column-skipping MxV over
// the packed layout, and the NLU activation stage. Integer-exact.
namespace edrnn::engine {

/// Gate memories and delta references of one layer.
struct LayerState {
  std::vector<std::int32_t> M_r, M_u, M_cx, M_ch;  // accumulator format
  std::vector<std::int16_t> x_ref;                 // last transmitted input, Q8.8
  std::vector<std::int16_t> h_ref;                 // last transmitted hidden state
  std::vector<std::int16_t> h_prev;                // h_{t-1}

  friend bool operator==(const LayerState&, const LayerState&) = default;
};

struct DeltaState {
  std::vector<LayerState> layers;

  friend bool operator==(const DeltaState&, const DeltaState&) = default;
};

struct ColumnEvent {
  std::uint32_t layer = 0;
  ColumnSource source = ColumnSource::Input;
  std::uint32_t col = 0;
  std::int32_t delta_raw = 0;  // Q8.8; can span 17 bits

  friend bool operator==(const ColumnEvent&, const ColumnEvent&) = default;
};

struct StepTrace {
  std::vector<ColumnEvent> events;  // empty unless recording is enabled
  std::vector<std::uint32_t> nz_x;  // fired input columns per layer
  std::vector<std::uint32_t> nz_h;  // fired hidden columns per layer
  std::vector<std::int16_t> h_out;  // last layer output, Q8.8
};

struct StepOptions {
  std::optional<std::int32_t> theta_raw;  // overrides the model threshold
  bool record_events = true;
};

/// Gate memories seeded from the bias column; references and h start at zero.
inline DeltaState reset(const PackedModel& model) {
  DeltaState s;
  for (const auto& layer : model.layers) {
    const std::size_t m = layer.hidden;
    const auto& b = layer.bias.data;
    LayerState ls;
    ls.M_r.assign(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(m));
    ls.M_u.assign(b.begin() + static_cast<std::ptrdiff_t>(m), b.begin() + static_cast<std::ptrdiff_t>(2 * m));
    ls.M_cx.assign(b.begin() + static_cast<std::ptrdiff_t>(2 * m), b.end());
    ls.M_ch.assign(m, 0);
    ls.x_ref.assign(layer.input_width, 0);
    ls.h_ref.assign(m, 0);
    ls.h_prev.assign(m, 0);
    s.layers.push_back(std::move(ls));
  }
  return s;
}

/// Delta unit: compares each element against its reference and calls
/// fire(j, delta) for every |delta| >= theta after updating the reference.
template <typename Fire>
inline std::uint32_t delta_scan(std::span<const std::int16_t> in, std::span<std::int16_t> ref, std::int32_t theta,
                                Fire&& fire) {
  std::uint32_t fired = 0;
  for (std::size_t j = 0; j < in.size(); ++j) {
    const std::int32_t d = static_cast<std::int32_t>(in[j]) - ref[j];
    if (std::abs(d) < theta) continue;
    ref[j] = in[j];
    ++fired;
    fire(j, d);
  }
  return fired;
}

/// Rank-1 update of the gate memories with one weight column.
inline void accumulate_column(const PackedLayer& layer, LayerState& s, ColumnSource src, std::size_t j,
                              std::int32_t delta) {
  const std::size_t m = layer.hidden;
  const std::int16_t* col = layer.column(src, j).data();
  std::int32_t* c_mem = src == ColumnSource::Input ? s.M_cx.data() : s.M_ch.data();
  for (std::size_t i = 0; i < m; ++i) {
    s.M_r[i] = fx::mac(col[i], delta, s.M_r[i]);
    s.M_u[i] = fx::mac(col[m + i], delta, s.M_u[i]);
    c_mem[i] = fx::mac(col[2 * m + i], delta, c_mem[i]);
  }
}

/// Element-wise activation of one neuron, all operands raw.
///
/// M_ch is narrowed to Q8.8 before the reset-gate product so the product fits
/// the 16-bit multiplier. Each product of the final blend is narrowed to Q8.8
/// before the 16-bit add.
inline std::int16_t activate(std::int32_t m_r, std::int32_t m_u, std::int32_t m_cx, std::int32_t m_ch,
                             std::int16_t h_prev, int acc_frac) {
  constexpr int kAct = fx::kActFormat.frac_bits;
  const std::int32_t r = fx::nlu_eval(fx::sigmoid_lut(), m_r, acc_frac);
  const std::int32_t u = fx::nlu_eval(fx::sigmoid_lut(), m_u, acc_frac);
  const auto ch = static_cast<std::int32_t>(fx::requantize(m_ch, acc_frac, kAct, 16));
  const std::int64_t r_ch = fx::requantize(static_cast<std::int64_t>(r) * ch, 2 * kAct, acc_frac, 32);
  const std::int32_t c = fx::nlu_eval(fx::tanh_lut(), fx::sat32(m_cx + r_ch), acc_frac);
  const std::int64_t keep = fx::requantize(static_cast<std::int64_t>(fx::kOneAct - u) * c, 2 * kAct, kAct, 16);
  const std::int64_t carry = fx::requantize(static_cast<std::int64_t>(u) * h_prev, 2 * kAct, kAct, 16);
  return fx::sat16(keep + carry);
}

inline std::vector<std::int16_t> activate_layer(const LayerState& s, int acc_frac) {
  std::vector<std::int16_t> h(s.h_prev.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    h[i] = activate(s.M_r[i], s.M_u[i], s.M_cx[i], s.M_ch[i], s.h_prev[i], acc_frac);
  }
  return h;
}

/// One timestep through every layer. Per layer the input is scanned first,
/// then h_{t-1}; fired columns are accumulated, then the NLU stage produces
/// h_t. Layer l > 0 treats layer l-1's h_t as its input.
inline StepTrace step(const PackedModel& model, DeltaState& state, std::span<const std::int16_t> x,
                      const StepOptions& opts = {}) {
  const auto& cfg = model.config;
  require(x.size() == cfg.N, ErrorCode::DimensionMismatch,
          "input has " + std::to_string(x.size()) + " elements, model expects N=" + std::to_string(cfg.N));
  require(state.layers.size() == model.layers.size(), ErrorCode::DimensionMismatch,
          "state has " + std::to_string(state.layers.size()) + " layers, model has " + std::to_string(model.layers.size()));
  const std::int32_t theta = opts.theta_raw.value_or(cfg.theta_raw);
  require(theta >= 0, ErrorCode::ConfigMismatch, "delta threshold must be >= 0");
  const int acc_frac = cfg.acc_fmt().frac_bits;

  StepTrace trace;
  trace.nz_x.reserve(model.layers.size());
  trace.nz_h.reserve(model.layers.size());
  std::vector<std::int16_t> input(x.begin(), x.end());

  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const PackedLayer& layer = model.layers[l];
    LayerState& s = state.layers[l];
    require(s.x_ref.size() == layer.input_width && s.h_prev.size() == layer.hidden, ErrorCode::DimensionMismatch,
            "state layer " + std::to_string(l) + " does not match model");

    auto fire_into = [&](ColumnSource src) {
      return [&, src](std::size_t j, std::int32_t d) {
        accumulate_column(layer, s, src, j, d);
        if (opts.record_events) {
          trace.events.push_back({static_cast<std::uint32_t>(l), src, static_cast<std::uint32_t>(j), d});
        }
      };
    };
    trace.nz_x.push_back(delta_scan(input, s.x_ref, theta, fire_into(ColumnSource::Input)));
    trace.nz_h.push_back(delta_scan(s.h_prev, s.h_ref, theta, fire_into(ColumnSource::Hidden)));

    s.h_prev = activate_layer(s, acc_frac);
    input = s.h_prev;
  }
  trace.h_out = std::move(input);
  return trace;
}

struct SequenceResult {
  std::vector<std::vector<std::int16_t>> outputs;
  std::vector<StepTrace> traces;
};

/// Runs `features` in order from a freshly reset state.
inline SequenceResult run_sequence(const PackedModel& model, const std::vector<std::vector<std::int16_t>>& features,
                                   const StepOptions& opts = {}) {
  DeltaState state = reset(model);
  SequenceResult result;
  result.outputs.reserve(features.size());
  result.traces.reserve(features.size());
  for (const auto& x : features) {
    StepTrace t = step(model, state, x, opts);
    result.outputs.push_back(t.h_out);
    result.traces.push_back(std::move(t));
  }
  return result;
}

/// Worst-case |gate memory| for a layer, in accumulator raws: bias plus every
/// column at full weight magnitude times the largest possible reference.
/// Hidden states never exceed 1.0, so hidden references are bounded by 256.
/// The Θ=0 telescoping identity is exact whenever this stays below 2^31.
constexpr std::int64_t accumulator_bound(std::int64_t input_width, std::int64_t hidden, const fx::QFormat& wgt,
                                         std::int64_t max_abs_input_raw, std::int64_t max_abs_bias_raw) {
  const std::int64_t w = -wgt.raw_min();
  return max_abs_bias_raw + w * (input_width * max_abs_input_raw + hidden * fx::kOneAct);
}

constexpr bool accumulator_headroom_ok(std::int64_t input_width, std::int64_t hidden, const fx::QFormat& wgt,
                                       std::int64_t max_abs_input_raw, std::int64_t max_abs_bias_raw) {
  return accumulator_bound(input_width, hidden, wgt, max_abs_input_raw, max_abs_bias_raw) <=
         std::int64_t{0x7FFFFFFF};
}

}  // namespace edrnn::engine
