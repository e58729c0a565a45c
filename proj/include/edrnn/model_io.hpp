// Copyright 2026 The EdgeDRNN-sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <json.hpp>

#include "edrnn/error.hpp"
#include "edrnn/model.hpp"

namespace edrnn {

// Packed model file (little-endian throughout):
//
//   offset  size  field
//        0     4  magic "EDRN"
//        4     4  u32 version (1)
//        8     4  u32 L
//       12     4  u32 N
//       16     4  u32 M
//       20     4  u8 act total/frac bits, u8 weight total/frac bits
//       24     2  u8 accumulator total/frac bits
//       26     2  reserved (0)
//       28     4  i32 theta (raw Q8.8)
//       32     8  u64 payload bytes following the header
//       40    24  reserved (0)
//       64     .  layers in order; per layer: input block columns, hidden
//                 block columns (each 3M weights of 1 or 2 bytes), then the
//                 bias column as 3M i32 accumulator raws.
inline constexpr std::size_t kPackedHeaderBytes = 64;

namespace io {

inline void put_le(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint64_t get_le(const std::uint8_t* p, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path, ErrorCode on_missing = ErrorCode::Io) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(on_missing, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::Io, "short write to " + path.string());
}

}  // namespace io

inline std::vector<std::uint8_t> serialize(const PackedModel& model) {
  const auto& c = model.config;
  const fx::QFormat acc = c.acc_fmt();
  std::vector<std::uint8_t> out;
  out.reserve(kPackedHeaderBytes + model.image_bytes());
  out.insert(out.end(), std::begin(PackedModel::kMagic), std::end(PackedModel::kMagic));
  io::put_le(out, PackedModel::kVersion, 4);
  io::put_le(out, c.L, 4);
  io::put_le(out, c.N, 4);
  io::put_le(out, c.M, 4);
  for (int v : {c.act_fmt.total_bits, c.act_fmt.frac_bits, c.wgt_fmt.total_bits, c.wgt_fmt.frac_bits,
                acc.total_bits, acc.frac_bits}) {
    io::put_le(out, static_cast<std::uint64_t>(v), 1);
  }
  io::put_le(out, 0, 2);
  io::put_le(out, static_cast<std::uint32_t>(c.theta_raw), 4);
  io::put_le(out, model.image_bytes(), 8);
  out.resize(kPackedHeaderBytes, 0);

  const int wb = c.wgt_fmt.bytes();
  for (const auto& layer : model.layers) {
    for (auto v : layer.input_block.data) io::put_le(out, static_cast<std::uint16_t>(v), wb);
    for (auto v : layer.hidden_block.data) io::put_le(out, static_cast<std::uint16_t>(v), wb);
    for (auto v : layer.bias.data) io::put_le(out, static_cast<std::uint32_t>(v), 4);
  }
  return out;
}

inline PackedModel deserialize(const std::vector<std::uint8_t>& bytes) {
  require(bytes.size() >= kPackedHeaderBytes, ErrorCode::CorruptLength,
          "file holds " + std::to_string(bytes.size()) + " bytes, header needs 64");
  require(std::memcmp(bytes.data(), PackedModel::kMagic, 4) == 0, ErrorCode::BadMagic, "not an EDRN file");
  const auto version = static_cast<std::uint32_t>(io::get_le(bytes.data() + 4, 4));
  require(version == PackedModel::kVersion, ErrorCode::VersionMismatch,
          "file version " + std::to_string(version) + ", expected " + std::to_string(PackedModel::kVersion));

  NetworkConfig c;
  c.L = static_cast<std::uint32_t>(io::get_le(bytes.data() + 8, 4));
  c.N = static_cast<std::uint32_t>(io::get_le(bytes.data() + 12, 4));
  c.M = static_cast<std::uint32_t>(io::get_le(bytes.data() + 16, 4));
  c.act_fmt = {bytes[20], bytes[21]};
  c.wgt_fmt = {bytes[22], bytes[23]};
  const fx::QFormat acc{bytes[24], bytes[25]};
  c.theta_raw = static_cast<std::int32_t>(static_cast<std::uint32_t>(io::get_le(bytes.data() + 28, 4)));
  const std::uint64_t payload = io::get_le(bytes.data() + 32, 8);
  c.validate();
  require(acc == c.acc_fmt(), ErrorCode::FormatUnsupported, "accumulator format does not match weight format");
  // Bounds keep the size arithmetic below far from 64-bit overflow.
  require(c.L <= (1u << 12) && c.N <= (1u << 20) && c.M <= (1u << 16), ErrorCode::CorruptLength,
          "implausible network dimensions in header");

  const std::uint64_t wb = static_cast<std::uint64_t>(c.wgt_fmt.bytes());
  std::uint64_t expected = 0;
  for (std::uint64_t l = 0; l < c.L; ++l) {
    expected += (c.layer_input_size(l) + c.M) * 3 * c.M * wb + 3 * c.M * 4;
  }
  require(payload == expected, ErrorCode::CorruptLength,
          "header declares " + std::to_string(payload) + " payload bytes, dimensions imply " + std::to_string(expected));
  require(bytes.size() - kPackedHeaderBytes == expected, ErrorCode::CorruptLength,
          "payload holds " + std::to_string(bytes.size() - kPackedHeaderBytes) + " bytes, expected " +
              std::to_string(expected));

  PackedModel model;
  model.config = c;
  const std::uint8_t* p = bytes.data() + kPackedHeaderBytes;
  const int w = c.wgt_fmt.bytes();
  auto read_weight = [&]() {
    const auto raw = io::get_le(p, w);
    p += w;
    return w == 1 ? static_cast<std::int16_t>(static_cast<std::int8_t>(raw))
                  : static_cast<std::int16_t>(static_cast<std::uint16_t>(raw));
  };
  std::uint64_t offset = 0;
  for (std::size_t l = 0; l < c.L; ++l) {
    PackedLayer layer;
    layer.input_width = c.layer_input_size(l);
    layer.hidden = c.M;
    layer.input_block = fx::QTensor<std::int16_t>(3 * c.M, layer.input_width, c.wgt_fmt);
    layer.hidden_block = fx::QTensor<std::int16_t>(3 * c.M, c.M, c.wgt_fmt);
    layer.bias = fx::QTensor<std::int32_t>::vector(3 * c.M, acc);
    for (auto& v : layer.input_block.data) v = read_weight();
    for (auto& v : layer.hidden_block.data) v = read_weight();
    for (auto& v : layer.bias.data) {
      v = static_cast<std::int32_t>(static_cast<std::uint32_t>(io::get_le(p, 4)));
      p += 4;
    }
    layer.col_stride_bytes = 3 * c.M * wb;
    layer.base_offset = offset;
    offset += layer.byte_size();
    model.layers.push_back(std::move(layer));
  }
  return model;
}

inline void save(const PackedModel& model, const std::filesystem::path& path) { io::write_file(path, serialize(model)); }

inline PackedModel load(const std::filesystem::path& path) { return deserialize(io::read_file(path)); }

// ---------------------------------------------------------------------------
// Float model directory: manifest.json plus one little-endian float32 blob per
// tensor, row-major.
//
//   {"L": 2, "N": 40, "M": 768,
//    "layers": [{"W_ir": "l0_W_ir.bin", ..., "b_c": "l0_b_c.bin"}, ...]}

inline constexpr const char* kTensorNames[9] = {"W_ir", "W_iu", "W_ic", "W_hr", "W_hu", "W_hc", "b_r", "b_u", "b_c"};

namespace detail {

inline std::array<MatrixF*, 6> weight_refs(GruLayerParamsF& p) {
  return {&p.W_ir, &p.W_iu, &p.W_ic, &p.W_hr, &p.W_hu, &p.W_hc};
}
inline std::array<const MatrixF*, 6> weight_refs(const GruLayerParamsF& p) {
  return {&p.W_ir, &p.W_iu, &p.W_ic, &p.W_hr, &p.W_hu, &p.W_hc};
}
inline std::array<VectorF*, 3> bias_refs(GruLayerParamsF& p) { return {&p.b_r, &p.b_u, &p.b_c}; }
inline std::array<const VectorF*, 3> bias_refs(const GruLayerParamsF& p) { return {&p.b_r, &p.b_u, &p.b_c}; }

inline std::vector<double> read_f32_blob(const std::filesystem::path& path, std::size_t count, const std::string& name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "missing tensor " + name + " (" + path.string() + ")");
  std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  require(bytes.size() == count * 4, ErrorCode::DimensionMismatch,
          "tensor " + name + " holds " + std::to_string(bytes.size() / 4) + " floats, expected " + std::to_string(count));
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = static_cast<double>(std::bit_cast<float>(static_cast<std::uint32_t>(io::get_le(&bytes[4 * i], 4))));
  }
  return out;
}

inline void write_f32_blob(const std::filesystem::path& path, const std::vector<double>& values) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(values.size() * 4);
  for (double v : values) io::put_le(bytes, std::bit_cast<std::uint32_t>(static_cast<float>(v)), 4);
  io::write_file(path, bytes);
}

}  // namespace detail

struct FloatModel {
  std::uint32_t L = 0, N = 0, M = 0;
  std::vector<GruLayerParamsF> layers;
};

inline FloatModel load_float_model(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) fail(ErrorCode::Io, "cannot open " + manifest_path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::DataFormat, "manifest is not valid JSON: " + std::string(e.what()));
  }
  FloatModel fm;
  try {
    fm.L = j.at("L").get<std::uint32_t>();
    fm.N = j.at("N").get<std::uint32_t>();
    fm.M = j.at("M").get<std::uint32_t>();
    const auto& layers = j.at("layers");
    require(layers.is_array() && layers.size() == fm.L, ErrorCode::DimensionMismatch,
            "manifest lists " + std::to_string(layers.size()) + " layers, L=" + std::to_string(fm.L));
    for (std::size_t l = 0; l < fm.L; ++l) {
      const std::size_t n = l == 0 ? fm.N : fm.M;
      GruLayerParamsF p(n, fm.M);
      auto w = detail::weight_refs(p);
      auto b = detail::bias_refs(p);
      for (int t = 0; t < 9; ++t) {
        const std::string name = "layers[" + std::to_string(l) + "]." + kTensorNames[t];
        require(layers[l].contains(kTensorNames[t]), ErrorCode::Io, "manifest does not name tensor " + name);
        const auto file = dir / layers[l].at(kTensorNames[t]).get<std::string>();
        if (t < 6) {
          w[static_cast<std::size_t>(t)]->data = detail::read_f32_blob(file, w[static_cast<std::size_t>(t)]->data.size(), name);
        } else {
          *b[static_cast<std::size_t>(t - 6)] = detail::read_f32_blob(file, fm.M, name);
        }
      }
      fm.layers.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::DataFormat, "malformed manifest: " + std::string(e.what()));
  }
  return fm;
}

inline void save_float_model(const std::vector<GruLayerParamsF>& layers, const std::filesystem::path& dir) {
  require(!layers.empty(), ErrorCode::DimensionMismatch, "no layers to save");
  std::filesystem::create_directories(dir);
  nlohmann::json j;
  j["L"] = layers.size();
  j["N"] = layers.front().input_size();
  j["M"] = layers.front().hidden_size();
  j["layers"] = nlohmann::json::array();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    nlohmann::json entry;
    auto w = detail::weight_refs(layers[l]);
    auto b = detail::bias_refs(layers[l]);
    for (int t = 0; t < 9; ++t) {
      const std::string file = "l" + std::to_string(l) + "_" + kTensorNames[t] + ".bin";
      entry[kTensorNames[t]] = file;
      detail::write_f32_blob(dir / file, t < 6 ? w[static_cast<std::size_t>(t)]->data : *b[static_cast<std::size_t>(t - 6)]);
    }
    j["layers"].push_back(entry);
  }
  std::ofstream out(dir / "manifest.json");
  if (!out) fail(ErrorCode::Io, "cannot write manifest in " + dir.string());
  out << j.dump(2) << "\n";
}

}  // namespace edrnn
