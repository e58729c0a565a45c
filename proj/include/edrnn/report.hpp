// Copyright 2026 The EdgeDRNN-sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>

#include <json.hpp>

#include "edrnn/model.hpp"
#include "edrnn/perfmodel.hpp"

// CSV and JSON renderings of performance reports. Column sets are fixed;
// README.md documents them.
namespace edrnn::report {

inline std::string fmt_double(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline constexpr const char* kTraceCsvHeader = "t,cycles,latency_us,ops,nz_x,nz_h";

/// One row per timestep. `ops` counts the MAC work actually issued
/// (2 * 3M per fired column), not the dense op count.
inline void write_trace_csv(std::ostream& out, const perf::PerfReport& r, const NetworkConfig& cfg,
                            const perf::HwConfig& hw) {
  out << kTraceCsvHeader << '\n';
  for (std::size_t t = 0; t < r.cycles.size(); ++t) {
    const std::uint64_t ops = 2ull * 3ull * cfg.M * (r.fired_x[t] + r.fired_h[t]);
    out << t << ',' << r.cycles[t] << ',' << fmt_double(static_cast<double>(r.cycles[t]) / hw.f_hz * 1e6, 4) << ','
        << ops << ',' << r.fired_x[t] << ',' << r.fired_h[t] << '\n';
  }
}

inline nlohmann::json summary_json(const perf::PerfReport& r, const NetworkConfig& cfg, const perf::HwConfig& hw,
                                   std::int32_t theta_raw) {
  nlohmann::json j;
  j["network"] = {{"L", cfg.L}, {"N", cfg.N}, {"M", cfg.M}};
  j["theta_raw"] = theta_raw;
  j["hw"] = {{"K", hw.K},
             {"f_hz", hw.f_hz},
             {"col_overhead_cycles", hw.col_overhead_cycles},
             {"overlap_scan", hw.overlap_scan}};
  j["steps"] = r.cycles.size();
  j["op_per_step"] = r.op_per_step;
  j["latency_us"] = {{"mean", r.latency_mean * 1e6}, {"min", r.latency_min * 1e6}, {"max", r.latency_max * 1e6}};
  j["eff_throughput_gops"] = {{"mean", r.eff_throughput_mean * 1e-9},
                              {"min", r.eff_throughput_min * 1e-9},
                              {"max", r.eff_throughput_max * 1e-9}};
  j["peak_throughput_gops"] = r.peak_throughput * 1e-9;
  j["mac_efficiency"] = r.mac_efficiency;
  j["gamma_dx"] = r.sparsity.gamma_dx;
  j["gamma_dh"] = r.sparsity.gamma_dh;
  j["gamma_dx_layer"] = r.sparsity.gamma_dx_layer;
  j["gamma_dh_layer"] = r.sparsity.gamma_dh_layer;
  j["estimate"] = {{"latency_us", r.est.latency_s * 1e6}, {"throughput_gops", r.est.throughput_ops * 1e-9}};
  j["est_rel_error"] = r.est_rel_error;
  return j;
}

inline constexpr const char* kBenchCsvHeader =
    "theta_raw,theta,latency_mean_us,latency_min_us,latency_max_us,throughput_mean_gops,throughput_min_gops,"
    "throughput_max_gops,gamma_dx,gamma_dh,est_latency_us,est_throughput_gops,est_rel_error";

inline void write_bench_row(std::ostream& out, std::int32_t theta_raw, const perf::PerfReport& r) {
  char hex[16];
  std::snprintf(hex, sizeof hex, "0x%02X", static_cast<unsigned>(theta_raw));
  out << hex << ',' << fmt_double(theta_raw / 256.0, 6) << ',' << fmt_double(r.latency_mean * 1e6, 4) << ','
      << fmt_double(r.latency_min * 1e6, 4) << ',' << fmt_double(r.latency_max * 1e6, 4) << ','
      << fmt_double(r.eff_throughput_mean * 1e-9, 6) << ',' << fmt_double(r.eff_throughput_min * 1e-9, 6) << ','
      << fmt_double(r.eff_throughput_max * 1e-9, 6) << ',' << fmt_double(r.sparsity.gamma_dx, 6) << ','
      << fmt_double(r.sparsity.gamma_dh, 6) << ',' << fmt_double(r.est.latency_s * 1e6, 4) << ','
      << fmt_double(r.est.throughput_ops * 1e-9, 6) << ',' << fmt_double(r.est_rel_error, 6) << '\n';
}

}  // namespace edrnn::report
