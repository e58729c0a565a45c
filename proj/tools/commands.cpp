// Copyright 2026 The EdgeDRNN-sim Authors
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "edrnn/edrnn.hpp"

namespace edrnn::cli {
namespace {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io:
    case ErrorCode::BadMagic:
    case ErrorCode::VersionMismatch:
    case ErrorCode::CorruptLength:
    case ErrorCode::FormatUnsupported:
      return kModelError;
    case ErrorCode::DimensionMismatch:
    case ErrorCode::ConfigMismatch:
    case ErrorCode::IndexOutOfRange:
      return kConfigError;
    case ErrorCode::DataFormat:
    case ErrorCode::EmptyReference:
    case ErrorCode::EmptyTrace:
      return kDataError;
  }
  return kDataError;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) fail(ErrorCode::Io, "cannot write " + path.string());
  return f;
}

void add_hw_options(CLI::App& cmd, perf::HwConfig& hw) {
  cmd.add_option("--pes", hw.K, "Number of PEs (K)")->capture_default_str()->check(CLI::PositiveNumber);
  cmd.add_option("--freq", hw.f_hz, "Clock frequency in Hz")->capture_default_str()->check(CLI::PositiveNumber);
  cmd.add_option("--col-overhead", hw.col_overhead_cycles, "Extra cycles per column burst")->capture_default_str();
  cmd.add_flag("!--no-overlap-scan", hw.overlap_scan, "Charge the delta scan as separate cycles");
}

struct LoadedRun {
  PackedModel model;
  std::vector<features::Frame> frames;
  std::int32_t theta = 0;
};

LoadedRun load_run(const RunSpec& spec) {
  LoadedRun r;
  r.model = load(spec.model_path);
  features::FeatureSeq seq = features::load(spec.feature_path);
  require(seq.frames.empty() || seq.dim == r.model.config.N, ErrorCode::DimensionMismatch,
          "features have dim " + std::to_string(seq.dim) + ", model expects N=" + std::to_string(r.model.config.N));
  if (spec.max_steps && seq.frames.size() > *spec.max_steps) seq.frames.resize(*spec.max_steps);
  require(!seq.frames.empty(), ErrorCode::DataFormat, "feature file has no timesteps");
  r.frames = std::move(seq.frames);
  r.theta = spec.theta_raw.value_or(r.model.config.theta_raw);
  return r;
}

perf::PerfReport simulate_at(const LoadedRun& run, std::int32_t theta, const perf::HwConfig& hw,
                             engine::SequenceResult* keep = nullptr) {
  engine::StepOptions opts;
  opts.theta_raw = theta;
  opts.record_events = false;
  engine::SequenceResult res = engine::run_sequence(run.model, run.frames, opts);
  perf::PerfReport rep = perf::simulate(res.traces, run.model.config, hw);
  if (keep) *keep = std::move(res);
  return rep;
}

int cmd_convert(const std::filesystem::path& dir, const std::filesystem::path& out_path, std::int32_t theta,
                int weight_bits, int weight_frac, std::ostream& out) {
  FloatModel fm = load_float_model(dir);
  NetworkConfig cfg;
  cfg.L = fm.L;
  cfg.N = fm.N;
  cfg.M = fm.M;
  cfg.theta_raw = theta;
  cfg.wgt_fmt = {weight_bits, weight_frac};
  PackedModel model = convert(fm.layers, cfg);
  save(model, out_path);
  out << "layers: " << cfg.L << "  N: " << cfg.N << "  M: " << cfg.M << "\n";
  out << "weights: " << model.weight_count() << "\n";
  out << "bytes: " << kPackedHeaderBytes + model.image_bytes() << "\n";
  return kOk;
}

int cmd_run(const RunSpec& spec, std::ostream& out) {
  LoadedRun run = load_run(spec);
  engine::SequenceResult res;
  perf::PerfReport rep = simulate_at(run, run.theta, spec.hw, &res);

  if (spec.logits_out) {
    auto f = open_out(*spec.logits_out);
    for (const auto& h : res.outputs) {
      for (std::size_t i = 0; i < h.size(); ++i) {
        if (i) f << ',';
        f << report::fmt_double(fx::dequantize(h[i], fx::kActFormat), 8);
      }
      f << '\n';
    }
  }
  if (spec.trace_out) {
    auto f = open_out(*spec.trace_out);
    report::write_trace_csv(f, rep, run.model.config, spec.hw);
  }
  const auto summary = report::summary_json(rep, run.model.config, spec.hw, run.theta);
  if (spec.summary_out) open_out(*spec.summary_out) << summary.dump(2) << '\n';
  out << summary.dump(2) << '\n';
  return kOk;
}

int cmd_bench(const RunSpec& spec, const std::vector<std::string>& sweep, unsigned jobs,
              const std::optional<std::filesystem::path>& csv_out, std::ostream& out) {
  LoadedRun run = load_run(spec);
  std::vector<std::int32_t> thetas;
  for (const auto& s : sweep) thetas.push_back(parse_theta(s));
  if (thetas.empty()) thetas.push_back(run.theta);
  std::sort(thetas.begin(), thetas.end());

  // Sweep points share the read-only model; each gets its own engine state.
  std::vector<perf::PerfReport> reports(thetas.size());
  std::vector<std::exception_ptr> errors(thetas.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < thetas.size(); i = next++) {
      try {
        reports[i] = simulate_at(run, thetas[i], spec.hw);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(thetas.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::ostringstream csv;
  csv << report::kBenchCsvHeader << '\n';
  for (std::size_t i = 0; i < thetas.size(); ++i) report::write_bench_row(csv, thetas[i], reports[i]);
  if (csv_out) open_out(*csv_out) << csv.str();
  out << csv.str();
  return kOk;
}

std::vector<decode::LabelSeq> read_refs(const std::filesystem::path& path, int blank) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::DataFormat, "cannot open " + path.string());
  std::vector<decode::LabelSeq> refs;
  std::string line;
  while (std::getline(in, line)) {
    decode::LabelSeq seq;
    seq.blank_index = blank;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) {
      int v = 0;
      try {
        std::size_t used = 0;
        v = std::stoi(tok, &used);
        require(used == tok.size(), ErrorCode::DataFormat, "bad token");
      } catch (const std::logic_error&) {
        fail(ErrorCode::DataFormat, "reference line " + std::to_string(refs.size() + 1) + ": bad token '" + tok + "'");
      }
      require(v != blank, ErrorCode::DataFormat, "reference contains the blank index");
      seq.tokens.push_back(v);
    }
    require(!seq.tokens.empty(), ErrorCode::EmptyReference, "reference line " + std::to_string(refs.size() + 1) + " is empty");
    refs.push_back(std::move(seq));
  }
  return refs;
}

int cmd_decode(const std::vector<std::filesystem::path>& logit_files, const std::filesystem::path& refs_path, int blank,
               std::ostream& out) {
  std::vector<std::vector<std::vector<double>>> utterances;
  for (const auto& p : logit_files) {
    if (features::is_csv(p)) {
      for (auto& u : features::load_csv_utterances(p)) utterances.push_back(std::move(u));
    } else {
      features::FeatureSeq seq = features::load_feat(p);
      std::vector<std::vector<double>> rows;
      for (const auto& f : seq.frames) {
        std::vector<double> row(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) row[i] = fx::dequantize(f[i], fx::kActFormat);
        rows.push_back(std::move(row));
      }
      utterances.push_back(std::move(rows));
    }
  }
  const auto refs = read_refs(refs_path, blank);
  require(utterances.size() == refs.size(), ErrorCode::DataFormat,
          std::to_string(utterances.size()) + " logit utterances but " + std::to_string(refs.size()) + " references");
  std::vector<decode::LabelSeq> hyps;
  for (const auto& u : utterances) hyps.push_back(decode::greedy_decode(u, blank));
  const auto score = decode::score_corpus(hyps, refs);
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    out << "utt " << i << " wer " << report::fmt_double(score.per_utterance[i], 3) << " hyp";
    for (int t : hyps[i].tokens) out << ' ' << t;
    out << '\n';
  }
  out << "aggregate wer " << report::fmt_double(score.aggregate(), 3) << " (" << score.edits << " edits / "
      << score.ref_tokens << " ref tokens)\n";
  return kOk;
}

}  // namespace

std::int32_t parse_theta(const std::string& text) {
  std::size_t used = 0;
  long long v = 0;
  try {
    const bool hex = text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X');
    v = std::stoll(hex ? text.substr(2) : text, &used, hex ? 16 : 10);
    if (hex) used += 2;
  } catch (const std::logic_error&) {
    fail(ErrorCode::ConfigMismatch, "bad threshold '" + text + "'");
  }
  require(used == text.size(), ErrorCode::ConfigMismatch, "bad threshold '" + text + "'");
  require(v >= 0 && v <= 0x7FFF, ErrorCode::ConfigMismatch, "threshold '" + text + "' outside [0, 0x7FFF]");
  return static_cast<std::int32_t>(v);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Delta GRU fixed-point engine, performance simulator and tooling", "edrnn"};
  app.require_subcommand(1);

  // convert
  auto* convert_cmd = app.add_subcommand("convert", "Quantize a float model directory into a packed .edrn file");
  std::filesystem::path model_dir, convert_out;
  std::string convert_theta = "0x40";
  int weight_bits = 8, weight_frac = 7;
  convert_cmd->add_option("--model-dir", model_dir, "Directory holding manifest.json")->required();
  convert_cmd->add_option("--out", convert_out, "Packed model to write")->required();
  convert_cmd->add_option("--theta", convert_theta, "Delta threshold, raw Q8.8 (hex or decimal)")->capture_default_str();
  convert_cmd->add_option("--weight-bits", weight_bits, "Weight width (8 or 16)")->capture_default_str();
  convert_cmd->add_option("--weight-frac", weight_frac, "Weight fractional bits")->capture_default_str();

  // run
  auto* run_cmd = app.add_subcommand("run", "Run a feature sequence and report sparsity and latency");
  RunSpec run_spec;
  std::string run_theta;
  std::size_t run_steps = 0;
  std::filesystem::path logits_path, trace_path, summary_path;
  run_cmd->add_option("--model", run_spec.model_path, "Packed .edrn model")->required();
  run_cmd->add_option("--features", run_spec.feature_path, "FEAT binary or .csv features")->required();
  run_cmd->add_option("--theta", run_theta, "Override the model threshold (hex or decimal raw Q8.8)");
  run_cmd->add_option("--steps", run_steps, "Process at most this many timesteps");
  run_cmd->add_option("--logits", logits_path, "Write per-timestep outputs as CSV");
  run_cmd->add_option("--trace", trace_path, "Write per-timestep cycle trace as CSV");
  run_cmd->add_option("--summary", summary_path, "Write the JSON summary to a file");
  add_hw_options(*run_cmd, run_spec.hw);

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Sweep delta thresholds and tabulate throughput");
  RunSpec bench_spec;
  std::vector<std::string> sweep;
  std::size_t bench_steps = 0;
  unsigned jobs = 1;
  std::filesystem::path bench_out;
  bench_cmd->add_option("--model", bench_spec.model_path, "Packed .edrn model")->required();
  bench_cmd->add_option("--features", bench_spec.feature_path, "FEAT binary or .csv features")->required();
  bench_cmd->add_option("--sweep", sweep, "Thresholds, e.g. 0x00,0x20,0x40")->delimiter(',');
  bench_cmd->add_option("--steps", bench_steps, "Process at most this many timesteps");
  bench_cmd->add_option("--jobs", jobs, "Sweep points evaluated in parallel")->capture_default_str();
  bench_cmd->add_option("--out", bench_out, "Also write the CSV to a file");
  add_hw_options(*bench_cmd, bench_spec.hw);

  // decode
  auto* decode_cmd = app.add_subcommand("decode", "Greedy CTC decode logits and score WER");
  std::vector<std::filesystem::path> logit_files;
  std::filesystem::path refs_path;
  int blank = 0;
  decode_cmd->add_option("--logits", logit_files, "Logit files (CSV, blank line between utterances; or FEAT)")
      ->required();
  decode_cmd->add_option("--refs", refs_path, "One whitespace-separated token sequence per line")->required();
  decode_cmd->add_option("--blank", blank, "Blank label index")->capture_default_str();

  // generators
  auto* gen_model_cmd = app.add_subcommand("gen-model", "Write a seeded random float model directory");
  synth::ModelShape shape;
  std::uint64_t model_seed = 1;
  double scale = 1.0;
  std::filesystem::path gen_model_out;
  gen_model_cmd->add_option("--layers", shape.L, "Layer count L")->capture_default_str();
  gen_model_cmd->add_option("--input", shape.N, "Input size N")->capture_default_str();
  gen_model_cmd->add_option("--hidden", shape.M, "Hidden size M")->capture_default_str();
  gen_model_cmd->add_option("--seed", model_seed, "RNG seed")->capture_default_str();
  gen_model_cmd->add_option("--scale", scale, "Weight scale multiplier")->capture_default_str();
  gen_model_cmd->add_option("--out", gen_model_out, "Output directory")->required();

  auto* gen_feat_cmd = app.add_subcommand("gen-features", "Write a seeded synthetic feature sequence");
  std::uint32_t feat_steps = 1000, feat_dim = 40;
  std::uint64_t feat_seed = 1;
  std::string profile = "bandlimited";
  std::filesystem::path gen_feat_out;
  gen_feat_cmd->add_option("--steps", feat_steps, "Timesteps T")->capture_default_str();
  gen_feat_cmd->add_option("--dim", feat_dim, "Feature dim N")->capture_default_str();
  gen_feat_cmd->add_option("--seed", feat_seed, "RNG seed")->capture_default_str();
  gen_feat_cmd->add_option("--profile", profile, "iid or bandlimited")
      ->capture_default_str()
      ->check(CLI::IsMember({"iid", "bandlimited"}));
  gen_feat_cmd->add_option("--out", gen_feat_out, "Output file (.csv for text, otherwise FEAT)")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  auto finish_spec = [](RunSpec& spec, const std::string& theta, std::size_t steps) {
    if (!theta.empty()) spec.theta_raw = parse_theta(theta);
    if (steps > 0) spec.max_steps = steps;
  };

  // Decode and convert report every failure with their own code.
  int forced_code = 0;
  try {
    if (*convert_cmd) {
      forced_code = kModelError;
      return cmd_convert(model_dir, convert_out, parse_theta(convert_theta), weight_bits, weight_frac, out);
    }
    if (*run_cmd) {
      finish_spec(run_spec, run_theta, run_steps);
      if (!logits_path.empty()) run_spec.logits_out = logits_path;
      if (!trace_path.empty()) run_spec.trace_out = trace_path;
      if (!summary_path.empty()) run_spec.summary_out = summary_path;
      return cmd_run(run_spec, out);
    }
    if (*bench_cmd) {
      finish_spec(bench_spec, "", bench_steps);
      std::optional<std::filesystem::path> csv_out;
      if (!bench_out.empty()) csv_out = bench_out;
      return cmd_bench(bench_spec, sweep, jobs, csv_out, out);
    }
    if (*decode_cmd) {
      forced_code = kDataError;
      return cmd_decode(logit_files, refs_path, blank, out);
    }
    if (*gen_model_cmd) {
      save_float_model(synth::random_model(shape, model_seed, scale), gen_model_out);
      out << "wrote " << gen_model_out.string() << " (" << weight_count(shape.L, shape.N, shape.M) << " weights)\n";
      return kOk;
    }
    if (*gen_feat_cmd) {
      features::save(gen_feat_out, synth::random_features(feat_steps, feat_dim, feat_seed, synth::parse_profile(profile)));
      out << "wrote " << gen_feat_out.string() << " (" << feat_steps << " x " << feat_dim << ")\n";
      return kOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return forced_code ? forced_code : exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return forced_code ? forced_code : kDataError;
  }
  return kOk;
}

}  // namespace edrnn::cli
