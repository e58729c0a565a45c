// Copyright 2026 The EdgeDRNN-sim Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include <gtest/gtest.h>

#include "edrnn/gru_reference.hpp"
#include "edrnn/synth.hpp"

using namespace edrnn;

namespace {

VectorF random_vec(synth::Rng& rng, std::size_t n, double amp) {
  VectorF v(n);
  for (double& x : v) x = rng.uniform(-amp, amp);
  return v;
}

double max_abs_diff(const VectorF& a, const VectorF& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST(GruStep, ZeroNetwork) {
  GruLayerParamsF p(3, 4);
  const VectorF h = ref::gru_step_f(p, VectorF{1.0, -2.0, 0.5}, VectorF(4, 0.0));
  for (double v : h) EXPECT_EQ(v, 0.0);
}

TEST(GruStep, SaturatedUpdateGateHoldsState) {
  synth::Rng rng(3);
  GruLayerParamsF p = synth::random_model({1, 3, 4}, 5)[0];
  p.b_u.assign(4, 50.0);
  const VectorF h_prev = random_vec(rng, 4, 0.9);
  const VectorF h = ref::gru_step_f(p, random_vec(rng, 3, 1.0), h_prev);
  EXPECT_LT(max_abs_diff(h, h_prev), 1e-12);
}

TEST(GruStep, ScalarOracle) {
  GruLayerParamsF p(1, 1);
  p.W_ir(0, 0) = p.W_iu(0, 0) = p.W_ic(0, 0) = 1.0;
  const VectorF h = ref::gru_step_f(p, VectorF{1.0}, VectorF{0.0});
  // (1 - sigmoid(1)) * tanh(1), hand-evaluated in double.
  EXPECT_NEAR(h[0], 0.2048242148, 1e-9);
}

TEST(GruStep, DimensionMismatch) {
  GruLayerParamsF p(3, 2);
  EXPECT_THROW(ref::gru_step_f(p, VectorF{1.0, 2.0}, VectorF(2, 0.0)), Error);
  auto s = ref::FloatState::initial(p);
  EXPECT_THROW(ref::deltagru_step_f(p, VectorF{1.0}, s, 0.0), Error);
}

TEST(DeltaGruStep, ZeroThresholdMatchesGru) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto p = synth::random_model({1, 6, 8}, seed, 2.0)[0];
    synth::Rng rng(seed + 100);
    auto s = ref::FloatState::initial(p);
    VectorF h(8, 0.0);
    for (int t = 0; t < 100; ++t) {
      const VectorF x = random_vec(rng, 6, 2.0);
      h = ref::gru_step_f(p, x, h);
      const VectorF hd = ref::deltagru_step_f(p, x, s, 0.0);
      ASSERT_LT(max_abs_diff(h, hd), 1e-9) << "seed " << seed << " t " << t;
    }
  }
}

TEST(DeltaGruStep, TelescopingMemories) {
  const auto p = synth::random_model({1, 5, 7}, 42, 1.5)[0];
  synth::Rng rng(1);
  auto s = ref::FloatState::initial(p);
  for (int t = 0; t < 50; ++t) {
    const VectorF h_prev = s.h_prev;
    const VectorF x = random_vec(rng, 5, 3.0);
    ref::deltagru_step_f(p, x, s, 0.0);
    for (std::size_t i = 0; i < 7; ++i) {
      double direct_r = p.b_r[i], direct_ch = 0.0, direct_cx = p.b_c[i];
      for (std::size_t j = 0; j < 5; ++j) {
        direct_r += p.W_ir(i, j) * x[j];
        direct_cx += p.W_ic(i, j) * x[j];
      }
      for (std::size_t j = 0; j < 7; ++j) {
        direct_r += p.W_hr(i, j) * h_prev[j];
        direct_ch += p.W_hc(i, j) * h_prev[j];
      }
      ASSERT_NEAR(s.M_r[i], direct_r, 1e-9);
      ASSERT_NEAR(s.M_cx[i], direct_cx, 1e-9);
      ASSERT_NEAR(s.M_ch[i], direct_ch, 1e-9);
    }
  }
}

TEST(DeltaGruStep, ConstantInputAccumulatesNothing) {
  const auto p = synth::random_model({1, 4, 3}, 8)[0];
  auto s = ref::FloatState::initial(p);
  const VectorF x{0.3, -0.7, 1.1, 0.0};
  ref::deltagru_step_f(p, x, s, 0.1);
  const VectorF cx = s.M_cx;
  const VectorF x_ref = s.x_ref;
  ref::deltagru_step_f(p, x, s, 0.1);
  EXPECT_EQ(s.M_cx, cx);
  EXPECT_EQ(s.x_ref, x_ref);
}

TEST(DeltaGruStep, HugeThresholdFollowsBiasOnlyTrace) {
  const auto p = synth::random_model({1, 4, 5}, 12, 2.0)[0];
  synth::Rng rng(4);
  auto s = ref::FloatState::initial(p);
  VectorF h(5, 0.0);
  for (int t = 0; t < 30; ++t) {
    const VectorF out = ref::deltagru_step_f(p, random_vec(rng, 4, 5.0), s, 1e9);
    // Every delta suppressed: memories stay at the biases forever.
    for (std::size_t i = 0; i < 5; ++i) {
      const double r = ref::sigmoid(p.b_r[i]);
      const double u = ref::sigmoid(p.b_u[i]);
      const double c = std::tanh(p.b_c[i] + r * 0.0);
      h[i] = (1.0 - u) * c + u * h[i];
    }
    ASSERT_LT(max_abs_diff(out, h), 1e-15);
    EXPECT_EQ(s.M_r, p.b_r);
    EXPECT_EQ(s.x_ref, VectorF(4, 0.0));
  }
}

TEST(DeltaGruStep, ReferencesHoldLastTransmittedValue) {
  const auto p = synth::random_model({1, 6, 4}, 2)[0];
  synth::Rng rng(9);
  auto s = ref::FloatState::initial(p);
  VectorF expect_ref(6, 0.0);
  const double theta = 0.3;
  for (int t = 0; t < 200; ++t) {
    VectorF x(6);
    for (std::size_t j = 0; j < 6; ++j) x[j] = std::sin(0.05 * t + j) + rng.uniform(-0.1, 0.1);
    for (std::size_t j = 0; j < 6; ++j) {
      if (std::abs(x[j] - expect_ref[j]) >= theta) expect_ref[j] = x[j];
    }
    const VectorF h = ref::deltagru_step_f(p, x, s, theta);
    ASSERT_EQ(s.x_ref, expect_ref);
    for (double v : h) ASSERT_LE(std::abs(v), 1.0);
  }
}

TEST(DeltaGruStep, NetworkZeroThresholdMatchesGru) {
  const auto layers = synth::random_model({2, 5, 6}, 31, 2.0);
  std::vector<ref::FloatState> states = {ref::FloatState::initial(layers[0]), ref::FloatState::initial(layers[1])};
  std::vector<VectorF> h(2, VectorF(6, 0.0));
  synth::Rng rng(17);
  for (int t = 0; t < 100; ++t) {
    const VectorF x = random_vec(rng, 5, 2.0);
    const VectorF a = ref::gru_network_step_f(layers, x, h);
    const VectorF b = ref::deltagru_network_step_f(layers, x, states, 0.0);
    ASSERT_LT(max_abs_diff(a, b), 1e-9);
  }
}
