// Copyright 2026 The EdgeDRNN-sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "edrnn/error.hpp"
#include "edrnn/model.hpp"

// Double-precision GRU and DeltaGRU. These are the float oracles the
// quantized engine is checked against.
namespace edrnn::ref {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

namespace detail {

inline void matvec_add(const MatrixF& w, std::span<const double> x, std::vector<double>& acc) {
  for (std::size_t i = 0; i < w.rows; ++i) {
    const double* row = w.data.data() + i * w.cols;
    double s = 0.0;
    for (std::size_t j = 0; j < w.cols; ++j) s += row[j] * x[j];
    acc[i] += s;
  }
}

}  // namespace detail

/// One GRU step: returns h_t.
inline VectorF gru_step_f(const GruLayerParamsF& p, std::span<const double> x, std::span<const double> h_prev) {
  const std::size_t m = p.hidden_size();
  require(x.size() == p.input_size() && h_prev.size() == m, ErrorCode::DimensionMismatch,
          "gru_step_f: input or state length does not match layer");
  VectorF pre_r(p.b_r), pre_u(p.b_u), pre_cx(p.b_c), pre_ch(m, 0.0);
  detail::matvec_add(p.W_ir, x, pre_r);
  detail::matvec_add(p.W_hr, h_prev, pre_r);
  detail::matvec_add(p.W_iu, x, pre_u);
  detail::matvec_add(p.W_hu, h_prev, pre_u);
  detail::matvec_add(p.W_ic, x, pre_cx);
  detail::matvec_add(p.W_hc, h_prev, pre_ch);

  VectorF h(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double r = sigmoid(pre_r[i]);
    const double u = sigmoid(pre_u[i]);
    const double c = std::tanh(pre_cx[i] + r * pre_ch[i]);
    h[i] = (1.0 - u) * c + u * h_prev[i];
  }
  return h;
}

/// Per-layer DeltaGRU state. M_cx carries the input and bias part of the
/// candidate pre-activation, M_ch the hidden part that the reset gate scales.
struct FloatState {
  VectorF h_prev;
  VectorF x_ref, h_ref;
  VectorF M_r, M_u, M_cx, M_ch;

  static FloatState initial(const GruLayerParamsF& p) {
    const std::size_t m = p.hidden_size();
    FloatState s;
    s.h_prev.assign(m, 0.0);
    s.x_ref.assign(p.input_size(), 0.0);
    s.h_ref.assign(m, 0.0);
    s.M_r = p.b_r;
    s.M_u = p.b_u;
    s.M_cx = p.b_c;
    s.M_ch.assign(m, 0.0);
    return s;
  }
};

/// One DeltaGRU step. Elements with |delta| >= theta are transmitted: their
/// reference is updated and their weight column accumulated.
inline VectorF deltagru_step_f(const GruLayerParamsF& p, std::span<const double> x, FloatState& s, double theta) {
  const std::size_t m = p.hidden_size();
  const std::size_t n = p.input_size();
  require(x.size() == n && s.x_ref.size() == n && s.h_prev.size() == m && s.M_r.size() == m,
          ErrorCode::DimensionMismatch, "deltagru_step_f: input or state length does not match layer");

  for (std::size_t j = 0; j < n; ++j) {
    const double d = x[j] - s.x_ref[j];
    if (std::abs(d) < theta) continue;
    s.x_ref[j] = x[j];
    for (std::size_t i = 0; i < m; ++i) {
      s.M_r[i] += p.W_ir(i, j) * d;
      s.M_u[i] += p.W_iu(i, j) * d;
      s.M_cx[i] += p.W_ic(i, j) * d;
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    const double d = s.h_prev[j] - s.h_ref[j];
    if (std::abs(d) < theta) continue;
    s.h_ref[j] = s.h_prev[j];
    for (std::size_t i = 0; i < m; ++i) {
      s.M_r[i] += p.W_hr(i, j) * d;
      s.M_u[i] += p.W_hu(i, j) * d;
      s.M_ch[i] += p.W_hc(i, j) * d;
    }
  }

  VectorF h(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double r = sigmoid(s.M_r[i]);
    const double u = sigmoid(s.M_u[i]);
    const double c = std::tanh(s.M_cx[i] + r * s.M_ch[i]);
    h[i] = (1.0 - u) * c + u * s.h_prev[i];
  }
  s.h_prev = h;
  return h;
}

/// Stacked network helpers; layer l > 0 consumes layer l-1's output.
inline VectorF gru_network_step_f(const std::vector<GruLayerParamsF>& layers, std::span<const double> x,
                                  std::vector<VectorF>& h) {
  VectorF in(x.begin(), x.end());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    h[l] = gru_step_f(layers[l], in, h[l]);
    in = h[l];
  }
  return in;
}

inline VectorF deltagru_network_step_f(const std::vector<GruLayerParamsF>& layers, std::span<const double> x,
                                       std::vector<FloatState>& states, double theta) {
  VectorF in(x.begin(), x.end());
  for (std::size_t l = 0; l < layers.size(); ++l) in = deltagru_step_f(layers[l], in, states[l], theta);
  return in;
}

}  // namespace edrnn::ref
