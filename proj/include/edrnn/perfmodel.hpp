// Copyright 2026 The EdgeDRNN-sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "edrnn/engine.hpp"
#include "edrnn/error.hpp"
#include "edrnn/model.hpp"

namespace edrnn::perf {

struct HwConfig {
  std::uint32_t K = 8;                  // PEs; BW_DRAM / BW_W at the reference design point
  double f_hz = 125e6;
  std::uint32_t bw_dram_bits = 64;
  std::uint32_t bw_w_bits = 8;
  std::uint32_t col_overhead_cycles = 0;  // extra cycles per fetched column burst
  bool overlap_scan = true;               // delta scan hidden behind column fetch

  double peak_ops() const { return 2.0 * K * f_hz; }

  void validate() const {
    require(K >= 1, ErrorCode::ConfigMismatch, "PE count must be >= 1");
    require(f_hz > 0.0, ErrorCode::ConfigMismatch, "clock frequency must be > 0");
  }
};

/// Dense operations per timestep (2 per MAC): 2(3MN + 3M^2(L-1) + 3M^2 L).
constexpr std::uint64_t op_count(std::uint64_t L, std::uint64_t N, std::uint64_t M) {
  return 2 * (3 * M * N + 3 * M * M * (L - 1) + 3 * M * M * L);
}

struct Estimate {
  double cycles = 0.0;
  double latency_s = 0.0;
  double throughput_ops = 0.0;
};

/// Closed-form mean latency and effective throughput from mean sparsities.
///
/// Input columns of every layer share gamma_dx, hidden columns gamma_dh, and
/// the activation stage costs 3M/K cycles once per network step.
inline Estimate estimate(std::uint64_t L, std::uint64_t N, std::uint64_t M, double gamma_dx, double gamma_dh,
                         const HwConfig& hw = {}) {
  hw.validate();
  require(gamma_dx >= 0.0 && gamma_dx <= 1.0 && gamma_dh >= 0.0 && gamma_dh <= 1.0, ErrorCode::ConfigMismatch,
          "sparsity must lie in [0, 1]");
  const double m = static_cast<double>(M);
  const double input_macs = 3.0 * m * static_cast<double>(N) + 3.0 * m * m * static_cast<double>(L - 1);
  const double hidden_macs = 3.0 * m * m * static_cast<double>(L);
  Estimate e;
  e.cycles = (input_macs * (1.0 - gamma_dx) + hidden_macs * (1.0 - gamma_dh) + 3.0 * m) / hw.K;
  e.latency_s = e.cycles / hw.f_hz;
  e.throughput_ops = static_cast<double>(op_count(L, N, M)) / e.latency_s;
  return e;
}

/// Fractions of suppressed delta elements.
struct SparsityStats {
  std::vector<double> gamma_dx_layer;
  std::vector<double> gamma_dh_layer;
  double gamma_dx = 0.0;  // element-weighted over all layers and timesteps
  double gamma_dh = 0.0;
};

inline void check_trace_dims(std::span<const engine::StepTrace> traces, const NetworkConfig& cfg) {
  for (const auto& t : traces) {
    require(t.nz_x.size() == cfg.L && t.nz_h.size() == cfg.L, ErrorCode::ConfigMismatch,
            "trace covers " + std::to_string(t.nz_x.size()) + " layers, config has " + std::to_string(cfg.L));
    for (std::size_t l = 0; l < cfg.L; ++l) {
      require(t.nz_x[l] <= cfg.layer_input_size(l) && t.nz_h[l] <= cfg.M, ErrorCode::ConfigMismatch,
              "trace fires more columns than layer " + std::to_string(l) + " has");
    }
  }
}

inline SparsityStats measure_sparsity(std::span<const engine::StepTrace> traces, const NetworkConfig& cfg) {
  require(!traces.empty(), ErrorCode::EmptyTrace, "no timesteps to measure");
  check_trace_dims(traces, cfg);
  std::vector<std::uint64_t> fired_x(cfg.L, 0), fired_h(cfg.L, 0);
  for (const auto& t : traces) {
    for (std::size_t l = 0; l < cfg.L; ++l) {
      fired_x[l] += t.nz_x[l];
      fired_h[l] += t.nz_h[l];
    }
  }
  const double steps = static_cast<double>(traces.size());
  SparsityStats s;
  double scanned_x = 0.0, scanned_h = 0.0, total_x = 0.0, total_h = 0.0;
  for (std::size_t l = 0; l < cfg.L; ++l) {
    const double sx = steps * static_cast<double>(cfg.layer_input_size(l));
    const double sh = steps * static_cast<double>(cfg.M);
    s.gamma_dx_layer.push_back(1.0 - static_cast<double>(fired_x[l]) / sx);
    s.gamma_dh_layer.push_back(1.0 - static_cast<double>(fired_h[l]) / sh);
    scanned_x += sx;
    scanned_h += sh;
    total_x += static_cast<double>(fired_x[l]);
    total_h += static_cast<double>(fired_h[l]);
  }
  s.gamma_dx = 1.0 - total_x / scanned_x;
  s.gamma_dh = 1.0 - total_h / scanned_h;
  return s;
}

struct PerfReport {
  std::uint64_t op_per_step = 0;
  std::vector<std::uint64_t> cycles;   // per timestep
  std::vector<std::uint64_t> fired_x;  // per timestep, summed over layers
  std::vector<std::uint64_t> fired_h;
  double latency_mean = 0.0, latency_min = 0.0, latency_max = 0.0;  // seconds
  double eff_throughput_mean = 0.0, eff_throughput_min = 0.0, eff_throughput_max = 0.0;  // Op/s
  double peak_throughput = 0.0;
  double mac_efficiency = 0.0;  // may exceed 1: skipped work still counts
  SparsityStats sparsity;
  Estimate est;            // closed form fed with the measured sparsity
  double est_rel_error = 0.0;  // |latency_mean - est.latency_s| / est.latency_s
};

constexpr std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

/// Cycles for one timestep: each fired column streams 3M weights through K
/// PEs, and each layer pays one activation pass.
inline std::uint64_t step_cycles(const engine::StepTrace& t, const NetworkConfig& cfg, const HwConfig& hw) {
  const std::uint64_t col = ceil_div(3ull * cfg.M, hw.K);
  std::uint64_t cycles = 0;
  for (std::size_t l = 0; l < cfg.L; ++l) {
    const std::uint64_t fired = t.nz_x[l] + t.nz_h[l];
    cycles += fired * (col + hw.col_overhead_cycles) + col;
    if (!hw.overlap_scan) cycles += cfg.layer_input_size(l) + cfg.M;
  }
  return cycles;
}

inline PerfReport simulate(std::span<const engine::StepTrace> traces, const NetworkConfig& cfg, const HwConfig& hw = {}) {
  hw.validate();
  cfg.validate();
  PerfReport r;
  r.sparsity = measure_sparsity(traces, cfg);
  r.op_per_step = op_count(cfg.L, cfg.N, cfg.M);
  r.peak_throughput = hw.peak_ops();

  const double ops = static_cast<double>(r.op_per_step);
  double sum_latency = 0.0;
  r.latency_min = std::numeric_limits<double>::infinity();
  r.latency_max = 0.0;
  for (const auto& t : traces) {
    const std::uint64_t c = step_cycles(t, cfg, hw);
    r.cycles.push_back(c);
    r.fired_x.push_back(std::accumulate(t.nz_x.begin(), t.nz_x.end(), std::uint64_t{0}));
    r.fired_h.push_back(std::accumulate(t.nz_h.begin(), t.nz_h.end(), std::uint64_t{0}));
    const double lat = static_cast<double>(c) / hw.f_hz;
    sum_latency += lat;
    r.latency_min = std::min(r.latency_min, lat);
    r.latency_max = std::max(r.latency_max, lat);
  }
  r.latency_mean = sum_latency / static_cast<double>(traces.size());
  r.eff_throughput_mean = ops / r.latency_mean;
  r.eff_throughput_min = ops / r.latency_max;
  r.eff_throughput_max = ops / r.latency_min;
  r.mac_efficiency = r.eff_throughput_mean / r.peak_throughput;
  r.est = estimate(cfg.L, cfg.N, cfg.M, r.sparsity.gamma_dx, r.sparsity.gamma_dh, hw);
  r.est_rel_error = std::abs(r.latency_mean - r.est.latency_s) / r.est.latency_s;
  return r;
}

}  // namespace edrnn::perf
