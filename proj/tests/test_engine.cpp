// Copyright 2026 The EdgeDRNN-sim Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>
#include <unistd.h>

#include "edrnn/engine.hpp"
#include "edrnn/features.hpp"
#include "edrnn/synth.hpp"
#include "oracles.hpp"

using namespace edrnn;

namespace {

NetworkConfig make_config(std::uint32_t L, std::uint32_t N, std::uint32_t M, std::int32_t theta) {
  NetworkConfig c;
  c.L = L;
  c.N = N;
  c.M = M;
  c.theta_raw = theta;
  return c;
}

std::vector<features::Frame> frames(std::uint32_t steps, std::uint32_t dim, std::uint64_t seed,
                                    synth::Profile profile = synth::Profile::Iid) {
  return synth::random_features(steps, dim, seed, profile).frames;
}

}  // namespace

TEST(Reset, SeedsMemoriesFromBias) {
  auto layers = synth::random_model({2, 3, 4}, 1);
  for (auto& p : layers) {
    p.b_r.assign(4, 0.0);
    p.b_u.assign(4, 0.0);
    p.b_c.assign(4, 0.0);
  }
  const PackedModel zero = convert(layers, make_config(2, 3, 4, 0));
  for (const auto& ls : engine::reset(zero).layers) {
    for (const auto* v : {&ls.M_r, &ls.M_u, &ls.M_cx, &ls.M_ch}) {
      EXPECT_TRUE(std::all_of(v->begin(), v->end(), [](auto x) { return x == 0; }));
    }
  }

  layers[0].b_r.assign(4, 0.5);
  const PackedModel half = convert(layers, make_config(2, 3, 4, 0));
  const engine::DeltaState s = engine::reset(half);
  EXPECT_EQ(s.layers[0].M_r, std::vector<std::int32_t>(4, 16384));
  EXPECT_EQ(s.layers[0].x_ref.size(), 3u);
  EXPECT_EQ(s.layers[1].x_ref.size(), 4u);
  EXPECT_EQ(s.layers[0].h_prev, std::vector<std::int16_t>(4, 0));
  EXPECT_EQ(engine::reset(half), s);
}

TEST(Step, AllDeltasZeroGivesNoEvents) {
  const auto layers = synth::random_model({2, 5, 6}, 2);
  const PackedModel m = convert(layers, make_config(2, 5, 6, 0x10));
  engine::DeltaState s = engine::reset(m);
  const engine::StepTrace t = engine::step(m, s, std::vector<std::int16_t>(5, 0));
  EXPECT_EQ(t.nz_x[0], 0u);
  EXPECT_EQ(t.nz_h[0], 0u);
  EXPECT_EQ(t.nz_h[1], 0u);
  for (const auto& e : t.events) EXPECT_EQ(e.layer, 1u);
  // Layer 0 output depends only on the bias-seeded memories.
  const auto& l0 = s.layers[0];
  const int frac = m.config.acc_fmt().frac_bits;
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(l0.h_prev[i], engine::activate(m.layers[0].bias.data[i], m.layers[0].bias.data[6 + i],
                                             m.layers[0].bias.data[12 + i], 0, 0, frac));
  }
  // Layer 1 sees the bias-driven layer 0 state as fresh input.
  std::uint32_t expect_x1 = 0;
  for (std::int16_t v : l0.h_prev) expect_x1 += std::abs(v) >= 0x10;
  EXPECT_EQ(t.nz_x[1], expect_x1);
  EXPECT_EQ(t.events.size(), expect_x1);
}

TEST(Step, ThresholdComparisonIsInclusive) {
  const auto layers = synth::random_model({1, 4, 3}, 3);
  const PackedModel m = convert(layers, make_config(1, 4, 3, 0x40));
  {
    engine::DeltaState s = engine::reset(m);
    const auto t = engine::step(m, s, std::vector<std::int16_t>{0, 0x40, 0, 0});
    ASSERT_EQ(t.events.size(), 1u);
    EXPECT_EQ(t.events[0], (engine::ColumnEvent{0, ColumnSource::Input, 1, 0x40}));
  }
  {
    engine::DeltaState s = engine::reset(m);
    const auto t = engine::step(m, s, std::vector<std::int16_t>{0, 0x3F, 0, -0x3F});
    EXPECT_TRUE(t.events.empty());
  }
  {
    engine::DeltaState s = engine::reset(m);
    const auto t = engine::step(m, s, std::vector<std::int16_t>{-0x40, 0, 0, 0});
    ASSERT_EQ(t.events.size(), 1u);
    EXPECT_EQ(t.events[0].delta_raw, -0x40);
  }
}

TEST(Step, DimensionMismatch) {
  const PackedModel m = convert(synth::random_model({1, 4, 3}, 3), make_config(1, 4, 3, 0));
  engine::DeltaState s = engine::reset(m);
  EXPECT_THROW(engine::step(m, s, std::vector<std::int16_t>(5, 0)), Error);
  engine::DeltaState wrong;
  EXPECT_THROW(engine::step(m, wrong, std::vector<std::int16_t>(4, 0)), Error);
}

TEST(Step, ZeroThresholdBitExactAgainstDenseOracle) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const std::uint32_t L = 1 + seed % 2, M = seed < 3 ? 8 : 32, N = 12;
    const auto layers = synth::random_model({L, N, M}, seed, 1.5);
    const PackedModel m = convert(layers, make_config(L, N, M, 0));
    oracle::DenseQuantizedGru dense(layers, fx::kWgtFormat);
    engine::DeltaState s = engine::reset(m);
    for (const auto& x : frames(300, N, seed + 50)) {
      const auto t = engine::step(m, s, x);
      ASSERT_TRUE(oracle::same_values(t.h_out, dense.step(x))) << "seed " << seed;
    }
  }
}

TEST(Step, SixteenBitWeightsStayBitExact) {
  NetworkConfig c = make_config(2, 6, 10, 0);
  c.wgt_fmt = {16, 12};
  const auto layers = synth::random_model({2, 6, 10}, 77, 1.5);
  const PackedModel m = convert(layers, c);
  EXPECT_EQ(m.config.acc_fmt().frac_bits, 20);
  oracle::DenseQuantizedGru dense(layers, c.wgt_fmt);
  engine::DeltaState s = engine::reset(m);
  for (const auto& x : frames(200, 6, 5)) {
    ASSERT_TRUE(oracle::same_values(engine::step(m, s, x).h_out, dense.step(x)));
  }
}

TEST(Step, ColumnSkipMatchesSparsifiedDense) {
  for (std::int32_t theta : {0x01, 0x08, 0x40, 0x80, 0x200}) {
    const auto layers = synth::random_model({2, 10, 16}, theta, 1.5);
    const PackedModel m = convert(layers, make_config(2, 10, 16, theta));
    oracle::SparsifiedDeltaGru brute(layers, fx::kWgtFormat, theta);
    engine::DeltaState s = engine::reset(m);
    for (const auto& x : frames(300, 10, 9, synth::Profile::Bandlimited)) {
      ASSERT_TRUE(oracle::same_values(engine::step(m, s, x).h_out, brute.step(x))) << "theta " << theta;
    }
  }
}

TEST(Step, EventSoundness) {
  const auto layers = synth::random_model({2, 8, 12}, 4);
  const std::int32_t theta = 0x30;
  const PackedModel m = convert(layers, make_config(2, 8, 12, theta));
  engine::DeltaState s = engine::reset(m);
  for (const auto& x : frames(150, 8, 6, synth::Profile::Bandlimited)) {
    const engine::DeltaState before = s;
    const auto t = engine::step(m, s, x);
    std::vector<std::int16_t> input(x);
    for (std::uint32_t l = 0; l < 2; ++l) {
      const auto& b = before.layers[l];
      const auto& a = s.layers[l];
      std::uint32_t nx = 0, nh = 0;
      for (std::size_t j = 0; j < input.size(); ++j) {
        const bool fires = std::abs(input[j] - b.x_ref[j]) >= theta;
        const bool has_event = std::any_of(t.events.begin(), t.events.end(), [&](const auto& e) {
          return e.layer == l && e.source == ColumnSource::Input && e.col == j && e.delta_raw == input[j] - b.x_ref[j];
        });
        ASSERT_EQ(fires, has_event);
        ASSERT_EQ(fires, a.x_ref[j] != b.x_ref[j]);  // theta > 0
        nx += fires;
      }
      for (std::size_t j = 0; j < 12; ++j) {
        const bool fires = std::abs(b.h_prev[j] - b.h_ref[j]) >= theta;
        const bool has_event = std::any_of(t.events.begin(), t.events.end(), [&](const auto& e) {
          return e.layer == l && e.source == ColumnSource::Hidden && e.col == j;
        });
        ASSERT_EQ(fires, has_event);
        ASSERT_EQ(a.h_ref[j], fires ? b.h_prev[j] : b.h_ref[j]);
        nh += fires;
      }
      ASSERT_EQ(t.nz_x[l], nx);
      ASSERT_EQ(t.nz_h[l], nh);
      input = a.h_prev;
    }
    ASSERT_EQ(t.events.size(), std::size_t(t.nz_x[0] + t.nz_x[1] + t.nz_h[0] + t.nz_h[1]));
  }
}

TEST(Step, FirstStepEventsNonIncreasingInTheta) {
  const auto layers = synth::random_model({2, 20, 16}, 5);
  const PackedModel m = convert(layers, make_config(2, 20, 16, 0));
  const auto x = frames(1, 20, 3)[0];
  std::size_t prev = SIZE_MAX;
  for (std::int32_t theta = 0; theta <= 0x300; theta += 0x10) {
    engine::DeltaState s = engine::reset(m);
    engine::StepOptions opts;
    opts.theta_raw = theta;
    const auto t = engine::step(m, s, x, opts);
    // Layer 0 sees identical deltas for every theta.
    const std::size_t fired = t.nz_x[0];
    EXPECT_LE(fired, prev) << theta;
    prev = fired;
  }
}

TEST(Step, ShuffledColumnOrderIsEquivalent) {
  const auto layers = synth::random_model({1, 10, 12}, 6, 1.5);
  const PackedModel m = convert(layers, make_config(1, 10, 12, 0x20));
  const int frac = m.config.acc_fmt().frac_bits;
  engine::DeltaState a = engine::reset(m), b = engine::reset(m);
  std::mt19937 shuffle_rng(1);
  for (const auto& x : frames(200, 10, 7, synth::Profile::Bandlimited)) {
    const auto t = engine::step(m, a, x);

    auto& ls = b.layers[0];
    std::vector<std::tuple<ColumnSource, std::size_t, std::int32_t>> fired;
    engine::delta_scan(x, ls.x_ref, 0x20, [&](std::size_t j, std::int32_t d) { fired.emplace_back(ColumnSource::Input, j, d); });
    engine::delta_scan(ls.h_prev, ls.h_ref, 0x20, [&](std::size_t j, std::int32_t d) { fired.emplace_back(ColumnSource::Hidden, j, d); });
    std::shuffle(fired.begin(), fired.end(), shuffle_rng);
    for (const auto& [src, j, d] : fired) engine::accumulate_column(m.layers[0], ls, src, j, d);
    ls.h_prev = engine::activate_layer(ls, frac);
    ASSERT_EQ(t.h_out, ls.h_prev);
    ASSERT_EQ(a, b);
  }
}

TEST(Step, OutputStaysWithinUnitRange) {
  const auto layers = synth::random_model({2, 16, 24}, 8, 4.0);
  const PackedModel m = convert(layers, make_config(2, 16, 24, 0x08));
  engine::DeltaState s = engine::reset(m);
  for (const auto& x : frames(300, 16, 1)) {
    const auto t = engine::step(m, s, x);
    for (auto v : t.h_out) ASSERT_LE(std::abs(v), fx::kOneAct);
  }
}

TEST(RunSequence, CompositionAndDeterminism) {
  const auto layers = synth::random_model({2, 6, 8}, 9);
  const PackedModel m = convert(layers, make_config(2, 6, 8, 0x20));
  EXPECT_TRUE(engine::run_sequence(m, {}).outputs.empty());

  const auto seq = frames(60, 6, 2, synth::Profile::Bandlimited);
  engine::DeltaState s = engine::reset(m);
  const auto first = engine::step(m, s, seq[0]);
  const auto one = engine::run_sequence(m, {seq[0]});
  ASSERT_EQ(one.outputs.size(), 1u);
  EXPECT_EQ(one.outputs[0], first.h_out);
  EXPECT_EQ(one.traces[0].events, first.events);

  const auto r1 = engine::run_sequence(m, seq);
  const auto r2 = engine::run_sequence(m, seq);
  EXPECT_EQ(r1.outputs, r2.outputs);

  engine::StepOptions quiet;
  quiet.record_events = false;
  const auto r3 = engine::run_sequence(m, seq, quiet);
  EXPECT_EQ(r3.outputs, r1.outputs);
  EXPECT_TRUE(r3.traces[5].events.empty());
  EXPECT_EQ(r3.traces[5].nz_h, r1.traces[5].nz_h);

  EXPECT_THROW(engine::run_sequence(m, {std::vector<std::int16_t>(7, 0)}), Error);
}

TEST(Accumulator, HeadroomAnalysis) {
  // |x| <= 8.0 keeps any layer up to 1024 x 1024 inside 32 bits.
  EXPECT_TRUE(engine::accumulator_headroom_ok(1024, 1024, fx::kWgtFormat, 2048, 1 << 20));
  EXPECT_EQ(engine::accumulator_bound(1024, 1024, fx::kWgtFormat, 2048, 0), 128ll * (1024 * 2048 + 1024 * 256));
  // Full-range 16-bit inputs on a wide layer do not fit; the mac saturates.
  EXPECT_FALSE(engine::accumulator_headroom_ok(1024, 1024, fx::kWgtFormat, 32768, 0));
  // The synthetic workloads used by the tests and the acceptance suite.
  EXPECT_TRUE(engine::accumulator_headroom_ok(40, 768, fx::kWgtFormat, 512, 1 << 14));
  EXPECT_TRUE(engine::accumulator_headroom_ok(768, 768, fx::kWgtFormat, 256, 1 << 14));
}

TEST(Features, FeatRoundTripAndCsv) {
  const auto dir = std::filesystem::temp_directory_path() / ("edrnn_test_engine_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const auto seq = synth::random_features(17, 5, 3, synth::Profile::Iid);
  features::save(dir / "a.feat", seq);
  const auto back = features::load(dir / "a.feat");
  EXPECT_EQ(back.dim, 5u);
  EXPECT_EQ(back.frames, seq.frames);

  features::save(dir / "a.csv", seq);
  EXPECT_EQ(features::load(dir / "a.csv").frames, seq.frames);

  std::ofstream(dir / "b.csv") << "0.25,-1\n1e-3,200\n";
  const auto csv = features::load(dir / "b.csv");
  ASSERT_EQ(csv.frames.size(), 2u);
  EXPECT_EQ(csv.frames[0], (features::Frame{0x40, -0x100}));
  EXPECT_EQ(csv.frames[1], (features::Frame{0, 0x7FFF}));

  std::ofstream(dir / "ragged.csv") << "1,2\n3\n";
  EXPECT_THROW(features::load(dir / "ragged.csv"), Error);
  auto bytes = features::encode_feat(seq);
  bytes[0] = 'X';
  EXPECT_THROW(features::decode_feat(bytes), Error);
  bytes = features::encode_feat(seq);
  bytes.pop_back();
  EXPECT_THROW(features::decode_feat(bytes), Error);
}
