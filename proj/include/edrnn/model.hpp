// Copyright 2026 The EdgeDRNN-sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "edrnn/error.hpp"
#include "edrnn/fixedpoint.hpp"

namespace edrnn {

/// Dense row-major matrix of doubles.
struct MatrixF {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  MatrixF() = default;
  MatrixF(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  friend bool operator==(const MatrixF&, const MatrixF&) = default;
};

using VectorF = std::vector<double>;

/// Float parameters of one GRU layer with M neurons and N inputs.
struct GruLayerParamsF {
  MatrixF W_ir, W_iu, W_ic;  // M x N
  MatrixF W_hr, W_hu, W_hc;  // M x M
  VectorF b_r, b_u, b_c;     // M

  GruLayerParamsF() = default;
  GruLayerParamsF(std::size_t n, std::size_t m)
      : W_ir(m, n), W_iu(m, n), W_ic(m, n), W_hr(m, m), W_hu(m, m), W_hc(m, m),
        b_r(m, 0.0), b_u(m, 0.0), b_c(m, 0.0) {}

  std::size_t input_size() const { return W_ir.cols; }
  std::size_t hidden_size() const { return W_ir.rows; }

  void validate() const {
    const std::size_t m = hidden_size();
    const std::size_t n = input_size();
    auto check = [&](const MatrixF& w, std::size_t r, std::size_t c, const char* name) {
      require(w.rows == r && w.cols == c && w.data.size() == r * c, ErrorCode::DimensionMismatch,
              std::string(name) + " has shape " + std::to_string(w.rows) + "x" + std::to_string(w.cols) +
                  ", expected " + std::to_string(r) + "x" + std::to_string(c));
    };
    require(m >= 1 && n >= 1, ErrorCode::DimensionMismatch, "empty layer");
    check(W_ir, m, n, "W_ir");
    check(W_iu, m, n, "W_iu");
    check(W_ic, m, n, "W_ic");
    check(W_hr, m, m, "W_hr");
    check(W_hu, m, m, "W_hu");
    check(W_hc, m, m, "W_hc");
    for (const VectorF* b : {&b_r, &b_u, &b_c}) {
      require(b->size() == m, ErrorCode::DimensionMismatch, "bias length differs from hidden size");
    }
  }
};

struct NetworkConfig {
  std::uint32_t L = 1;
  std::uint32_t N = 1;
  std::uint32_t M = 1;
  std::int32_t theta_raw = 0;  // delta threshold, raw Q8.8
  fx::QFormat act_fmt = fx::kActFormat;
  fx::QFormat wgt_fmt = fx::kWgtFormat;

  fx::QFormat acc_fmt() const { return fx::accumulator_format(wgt_fmt, act_fmt); }
  std::size_t layer_input_size(std::size_t layer) const { return layer == 0 ? N : M; }

  void validate() const {
    require(L >= 1 && N >= 1 && M >= 1, ErrorCode::DimensionMismatch, "L, N and M must all be >= 1");
    require(theta_raw >= 0, ErrorCode::ConfigMismatch, "delta threshold must be >= 0");
    require(act_fmt == fx::kActFormat, ErrorCode::FormatUnsupported,
            "activations must be Q8.8, got " + fx::to_string(act_fmt));
    require((wgt_fmt.total_bits == 8 || wgt_fmt.total_bits == 16) && wgt_fmt.valid(), ErrorCode::FormatUnsupported,
            "weights must be 8 or 16 bit, got " + fx::to_string(wgt_fmt));
  }

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

/// Weights only: 3MN + 3M^2 + (L-1) * 6M^2.
constexpr std::uint64_t weight_count(std::uint64_t L, std::uint64_t N, std::uint64_t M) {
  return 3 * M * N + 3 * M * M + (L - 1) * 6 * M * M;
}

enum class ColumnSource : std::uint8_t { Input = 0, Hidden = 1 };

/// One DRAM burst: a contiguous weight column.
struct BurstDescriptor {
  std::uint64_t start_offset = 0;
  std::uint64_t burst_len = 0;

  friend bool operator==(const BurstDescriptor&, const BurstDescriptor&) = default;
};

/// Column-major, bias-appended weights of one layer.
///
/// Column j of a block holds the three gate rows stacked as
/// [W_r[:, j]; W_u[:, j]; W_c[:, j]] (3M raws). The bias column
/// [b_r; b_u; b_c] is kept in accumulator format and addressed as column M of
/// the hidden block. In the packed image a layer is laid out as input block,
/// hidden block, bias column.
struct PackedLayer {
  std::size_t input_width = 0;
  std::size_t hidden = 0;
  fx::QTensor<std::int16_t> input_block;   // (3M, input_width)
  fx::QTensor<std::int16_t> hidden_block;  // (3M, M)
  fx::QTensor<std::int32_t> bias;          // (3M,)
  std::uint64_t base_offset = 0;           // byte offset inside the weight image
  std::uint64_t col_stride_bytes = 0;      // 3M * weight bytes

  std::span<const std::int16_t> column(ColumnSource src, std::size_t j) const {
    const auto& block = src == ColumnSource::Input ? input_block : hidden_block;
    return {block.data.data() + j * 3 * hidden, 3 * hidden};
  }

  std::uint64_t bias_bytes() const { return 3 * hidden * sizeof(std::int32_t); }
  std::uint64_t byte_size() const { return (input_width + hidden) * col_stride_bytes + bias_bytes(); }

  friend bool operator==(const PackedLayer&, const PackedLayer&) = default;
};

struct PackedModel {
  static constexpr char kMagic[4] = {'E', 'D', 'R', 'N'};
  static constexpr std::uint32_t kVersion = 1;

  NetworkConfig config;
  std::vector<PackedLayer> layers;

  std::uint64_t weight_count() const { return edrnn::weight_count(config.L, config.N, config.M); }
  std::uint64_t image_bytes() const {
    std::uint64_t total = 0;
    for (const auto& l : layers) total += l.byte_size();
    return total;
  }

  friend bool operator==(const PackedModel&, const PackedModel&) = default;
};

/// Quantized weights recovered from a packed layer, row-major like the float
/// parameters.
struct QuantizedLayerWeights {
  std::vector<std::int16_t> W_ir, W_iu, W_ic, W_hr, W_hu, W_hc;
  std::vector<std::int32_t> b_r, b_u, b_c;

  friend bool operator==(const QuantizedLayerWeights&, const QuantizedLayerWeights&) = default;
};

namespace detail {

inline void pack_block(fx::QTensor<std::int16_t>& block, const MatrixF& wr, const MatrixF& wu, const MatrixF& wc,
                       const fx::QFormat& fmt) {
  const std::size_t m = wr.rows;
  for (std::size_t j = 0; j < wr.cols; ++j) {
    std::int16_t* col = block.data.data() + j * 3 * m;
    for (std::size_t i = 0; i < m; ++i) {
      col[i] = static_cast<std::int16_t>(fx::quantize(wr(i, j), fmt));
      col[m + i] = static_cast<std::int16_t>(fx::quantize(wu(i, j), fmt));
      col[2 * m + i] = static_cast<std::int16_t>(fx::quantize(wc(i, j), fmt));
    }
  }
}

inline void unpack_block(const fx::QTensor<std::int16_t>& block, std::size_t m, std::vector<std::int16_t>& wr,
                         std::vector<std::int16_t>& wu, std::vector<std::int16_t>& wc) {
  const std::size_t width = block.cols;
  wr.assign(m * width, 0);
  wu.assign(m * width, 0);
  wc.assign(m * width, 0);
  for (std::size_t j = 0; j < width; ++j) {
    const std::int16_t* col = block.data.data() + j * 3 * m;
    for (std::size_t i = 0; i < m; ++i) {
      wr[i * width + j] = col[i];
      wu[i * width + j] = col[m + i];
      wc[i * width + j] = col[2 * m + i];
    }
  }
}

}  // namespace detail

/// Quantize float layers into the packed column-major layout.
///
/// Weights go to cfg.wgt_fmt; biases go straight to the accumulator format
/// since they seed the gate memories.
inline PackedModel convert(const std::vector<GruLayerParamsF>& params, const NetworkConfig& cfg) {
  cfg.validate();
  require(params.size() == cfg.L, ErrorCode::DimensionMismatch,
          "config declares " + std::to_string(cfg.L) + " layers, got " + std::to_string(params.size()));

  PackedModel model;
  model.config = cfg;
  const std::size_t m = cfg.M;
  const fx::QFormat acc = cfg.acc_fmt();
  std::uint64_t offset = 0;

  for (std::size_t l = 0; l < params.size(); ++l) {
    const auto& p = params[l];
    p.validate();
    require(p.hidden_size() == m, ErrorCode::DimensionMismatch,
            "layer " + std::to_string(l) + " has hidden size " + std::to_string(p.hidden_size()) +
                ", expected uniform M=" + std::to_string(m));
    require(p.input_size() == cfg.layer_input_size(l), ErrorCode::DimensionMismatch,
            "layer " + std::to_string(l) + " has input size " + std::to_string(p.input_size()) + ", expected " +
                std::to_string(cfg.layer_input_size(l)));

    PackedLayer layer;
    layer.input_width = p.input_size();
    layer.hidden = m;
    layer.input_block = fx::QTensor<std::int16_t>(3 * m, layer.input_width, cfg.wgt_fmt);
    layer.hidden_block = fx::QTensor<std::int16_t>(3 * m, m, cfg.wgt_fmt);
    layer.bias = fx::QTensor<std::int32_t>::vector(3 * m, acc);
    detail::pack_block(layer.input_block, p.W_ir, p.W_iu, p.W_ic, cfg.wgt_fmt);
    detail::pack_block(layer.hidden_block, p.W_hr, p.W_hu, p.W_hc, cfg.wgt_fmt);
    for (std::size_t i = 0; i < m; ++i) {
      layer.bias.data[i] = static_cast<std::int32_t>(fx::quantize(p.b_r[i], acc));
      layer.bias.data[m + i] = static_cast<std::int32_t>(fx::quantize(p.b_u[i], acc));
      layer.bias.data[2 * m + i] = static_cast<std::int32_t>(fx::quantize(p.b_c[i], acc));
    }
    layer.col_stride_bytes = 3 * m * static_cast<std::uint64_t>(cfg.wgt_fmt.bytes());
    layer.base_offset = offset;
    offset += layer.byte_size();
    model.layers.push_back(std::move(layer));
  }
  return model;
}

/// Byte range of weight column j. Hidden column M is the appended bias column.
inline BurstDescriptor column_descriptor(const PackedLayer& layer, ColumnSource src, std::size_t j) {
  if (src == ColumnSource::Input) {
    require(j < layer.input_width, ErrorCode::IndexOutOfRange,
            "input column " + std::to_string(j) + " >= " + std::to_string(layer.input_width));
    return {layer.base_offset + j * layer.col_stride_bytes, layer.col_stride_bytes};
  }
  require(j <= layer.hidden, ErrorCode::IndexOutOfRange,
          "hidden column " + std::to_string(j) + " > " + std::to_string(layer.hidden));
  const std::uint64_t hidden_base = layer.base_offset + layer.input_width * layer.col_stride_bytes;
  if (j == layer.hidden) return {hidden_base + j * layer.col_stride_bytes, layer.bias_bytes()};
  return {hidden_base + j * layer.col_stride_bytes, layer.col_stride_bytes};
}

/// Inverse layout walk back to row-major quantized matrices.
inline QuantizedLayerWeights unpack(const PackedLayer& layer) {
  QuantizedLayerWeights q;
  const std::size_t m = layer.hidden;
  detail::unpack_block(layer.input_block, m, q.W_ir, q.W_iu, q.W_ic);
  detail::unpack_block(layer.hidden_block, m, q.W_hr, q.W_hu, q.W_hc);
  const auto& b = layer.bias.data;
  q.b_r.assign(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(m));
  q.b_u.assign(b.begin() + static_cast<std::ptrdiff_t>(m), b.begin() + static_cast<std::ptrdiff_t>(2 * m));
  q.b_c.assign(b.begin() + static_cast<std::ptrdiff_t>(2 * m), b.end());
  return q;
}

}  // namespace edrnn
