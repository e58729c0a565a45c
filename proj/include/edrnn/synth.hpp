// Copyright 2026 The EdgeDRNN-sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "edrnn/error.hpp"
#include "edrnn/features.hpp"
#include "edrnn/fixedpoint.hpp"
#include "edrnn/model.hpp"

// Seeded synthetic models and feature streams. Values are derived from raw
// mt19937_64 output so they are identical across standard libraries.
namespace edrnn::synth {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
  std::uint64_t below(std::uint64_t n) { return gen_() % n; }

 private:
  std::mt19937_64 gen_;
};

struct ModelShape {
  std::uint32_t L = 1, N = 40, M = 256;
};

/// Uniform weights scaled by 1/sqrt(fan-in) so the recurrence stays
/// contractive and hidden states evolve smoothly under smooth input.
inline std::vector<GruLayerParamsF> random_model(const ModelShape& shape, std::uint64_t seed, double scale = 1.0) {
  require(shape.L >= 1 && shape.N >= 1 && shape.M >= 1, ErrorCode::DimensionMismatch, "empty model shape");
  Rng rng(seed);
  std::vector<GruLayerParamsF> layers;
  for (std::uint32_t l = 0; l < shape.L; ++l) {
    const std::size_t n = l == 0 ? shape.N : shape.M;
    GruLayerParamsF p(n, shape.M);
    const double si = scale / std::sqrt(static_cast<double>(n));
    const double sh = scale / std::sqrt(static_cast<double>(shape.M));
    for (MatrixF* w : {&p.W_ir, &p.W_iu, &p.W_ic}) {
      for (double& v : w->data) v = rng.uniform(-si, si);
    }
    for (MatrixF* w : {&p.W_hr, &p.W_hu, &p.W_hc}) {
      for (double& v : w->data) v = rng.uniform(-sh, sh);
    }
    for (VectorF* b : {&p.b_r, &p.b_u, &p.b_c}) {
      for (double& v : *b) v = rng.uniform(-0.25, 0.25);
    }
    layers.push_back(std::move(p));
  }
  return layers;
}

enum class Profile { Iid, Bandlimited };

inline Profile parse_profile(const std::string& s) {
  if (s == "iid") return Profile::Iid;
  if (s == "bandlimited") return Profile::Bandlimited;
  fail(ErrorCode::ConfigMismatch, "unknown feature profile '" + s + "' (iid|bandlimited)");
}

inline constexpr double kFeatureAmplitude = 2.0;

/// iid: independent uniform draws in [-2, 2).
/// bandlimited: per channel, three sinusoids with periods of 50 to 500
/// steps summing to at most +-2, so consecutive frames differ by well under
/// the typical threshold.
inline features::FeatureSeq random_features(std::uint32_t steps, std::uint32_t dim, std::uint64_t seed,
                                            Profile profile) {
  Rng rng(seed);
  features::FeatureSeq seq;
  seq.dim = dim;
  seq.frames.assign(steps, features::Frame(dim));
  auto q = [](double v) { return static_cast<std::int16_t>(fx::quantize(v, fx::kActFormat)); };
  if (profile == Profile::Iid) {
    for (auto& f : seq.frames) {
      for (auto& v : f) v = q(rng.uniform(-kFeatureAmplitude, kFeatureAmplitude));
    }
    return seq;
  }
  constexpr int kTones = 3;
  for (std::uint32_t j = 0; j < dim; ++j) {
    double freq[kTones], phase[kTones], amp[kTones];
    for (int k = 0; k < kTones; ++k) {
      freq[k] = 1.0 / rng.uniform(50.0, 500.0);
      phase[k] = rng.uniform(0.0, 2.0 * std::numbers::pi);
      amp[k] = kFeatureAmplitude / kTones * rng.uniform(0.5, 1.0);
    }
    for (std::uint32_t t = 0; t < steps; ++t) {
      double v = 0.0;
      for (int k = 0; k < kTones; ++k) v += amp[k] * std::sin(2.0 * std::numbers::pi * freq[k] * t + phase[k]);
      seq.frames[t][j] = q(v);
    }
  }
  return seq;
}

}  // namespace edrnn::synth
