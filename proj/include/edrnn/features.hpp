// Copyright 2026 The EdgeDRNN-sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "edrnn/error.hpp"
#include "edrnn/fixedpoint.hpp"
#include "edrnn/model_io.hpp"

// Feature sequence files.
//
// FEAT binary: magic "FEAT", u32 T, u32 N, then T*N little-endian i16 Q8.8
// raws, row-major by timestep. CSV: one timestep per line, comma-separated
// reals; for multi-utterance files an empty line separates utterances.
namespace edrnn::features {

using Frame = std::vector<std::int16_t>;

struct FeatureSeq {
  std::uint32_t dim = 0;
  std::vector<Frame> frames;
};

inline constexpr char kFeatMagic[4] = {'F', 'E', 'A', 'T'};

inline std::vector<std::uint8_t> encode_feat(const FeatureSeq& seq) {
  std::vector<std::uint8_t> out(kFeatMagic, kFeatMagic + 4);
  io::put_le(out, seq.frames.size(), 4);
  io::put_le(out, seq.dim, 4);
  for (const auto& f : seq.frames) {
    require(f.size() == seq.dim, ErrorCode::DimensionMismatch, "frame length differs from feature dim");
    for (auto v : f) io::put_le(out, static_cast<std::uint16_t>(v), 2);
  }
  return out;
}

inline FeatureSeq decode_feat(const std::vector<std::uint8_t>& bytes) {
  require(bytes.size() >= 12, ErrorCode::DataFormat, "FEAT file shorter than its header");
  require(std::memcmp(bytes.data(), kFeatMagic, 4) == 0, ErrorCode::DataFormat, "bad FEAT magic");
  const std::uint64_t t = io::get_le(bytes.data() + 4, 4);
  FeatureSeq seq;
  seq.dim = static_cast<std::uint32_t>(io::get_le(bytes.data() + 8, 4));
  require(bytes.size() - 12 == t * seq.dim * 2, ErrorCode::DataFormat,
          "FEAT payload holds " + std::to_string(bytes.size() - 12) + " bytes, header implies " +
              std::to_string(t * seq.dim * 2));
  seq.frames.assign(t, Frame(seq.dim));
  const std::uint8_t* p = bytes.data() + 12;
  for (auto& f : seq.frames) {
    for (auto& v : f) {
      v = static_cast<std::int16_t>(static_cast<std::uint16_t>(io::get_le(p, 2)));
      p += 2;
    }
  }
  return seq;
}

inline void save_feat(const std::filesystem::path& path, const FeatureSeq& seq) { io::write_file(path, encode_feat(seq)); }

inline FeatureSeq load_feat(const std::filesystem::path& path) {
  return decode_feat(io::read_file(path, ErrorCode::DataFormat));
}

/// Parses CSV rows of reals. Blank lines split utterances.
inline std::vector<std::vector<std::vector<double>>> parse_csv_utterances(std::istream& in) {
  std::vector<std::vector<std::vector<double>>> utts(1);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) {
      if (!utts.back().empty()) utts.emplace_back();
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        require(cell.find_first_not_of(" \t", used) == std::string::npos, ErrorCode::DataFormat, "trailing junk");
      } catch (const std::logic_error&) {
        fail(ErrorCode::DataFormat, "line " + std::to_string(lineno) + ": not a number: '" + cell + "'");
      }
    }
    utts.back().push_back(std::move(row));
  }
  if (utts.back().empty()) utts.pop_back();
  return utts;
}

inline std::vector<std::vector<std::vector<double>>> load_csv_utterances(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::DataFormat, "cannot open " + path.string());
  return parse_csv_utterances(in);
}

/// Quantizes CSV reals to Q8.8 frames; all rows must share one width.
inline FeatureSeq from_rows(const std::vector<std::vector<double>>& rows) {
  FeatureSeq seq;
  if (rows.empty()) return seq;
  seq.dim = static_cast<std::uint32_t>(rows.front().size());
  for (const auto& r : rows) {
    require(r.size() == seq.dim, ErrorCode::DataFormat,
            "ragged CSV: row of " + std::to_string(r.size()) + " values, expected " + std::to_string(seq.dim));
    Frame f(r.size());
    for (std::size_t j = 0; j < r.size(); ++j) f[j] = static_cast<std::int16_t>(fx::quantize(r[j], fx::kActFormat));
    seq.frames.push_back(std::move(f));
  }
  return seq;
}

inline FeatureSeq load_csv(const std::filesystem::path& path) {
  std::vector<std::vector<double>> rows;
  for (auto& utt : load_csv_utterances(path)) rows.insert(rows.end(), utt.begin(), utt.end());
  return from_rows(rows);
}

inline bool is_csv(const std::filesystem::path& path) { return path.extension() == ".csv"; }

/// Picks the loader by extension: ".csv" is text, anything else is FEAT.
inline FeatureSeq load(const std::filesystem::path& path) { return is_csv(path) ? load_csv(path) : load_feat(path); }

inline void save(const std::filesystem::path& path, const FeatureSeq& seq) {
  if (!is_csv(path)) return save_feat(path, seq);
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  for (const auto& f : seq.frames) {
    for (std::size_t j = 0; j < f.size(); ++j) {
      if (j) out << ',';
      out << fx::dequantize(f[j], fx::kActFormat);
    }
    out << '\n';
  }
}

}  // namespace edrnn::features
