// Copyright 2026 The EdgeDRNN-sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "edrnn/error.hpp"

namespace edrnn::decode {

struct LabelSeq {
  std::vector<int> tokens;  // never contains blank_index
  int blank_index = 0;

  friend bool operator==(const LabelSeq&, const LabelSeq&) = default;
};

/// Greedy CTC: per-frame argmax (lowest index wins ties), collapse repeats,
/// drop blanks.
inline LabelSeq greedy_decode(const std::vector<std::vector<double>>& logits, int blank_index = 0) {
  LabelSeq out;
  out.blank_index = blank_index;
  if (logits.empty()) return out;
  const std::size_t classes = logits.front().size();
  require(classes >= 2, ErrorCode::DimensionMismatch, "need at least 2 classes");
  require(blank_index >= 0 && static_cast<std::size_t>(blank_index) < classes, ErrorCode::DimensionMismatch,
          "blank index " + std::to_string(blank_index) + " outside " + std::to_string(classes) + " classes");
  int prev = -1;
  for (const auto& row : logits) {
    require(row.size() == classes, ErrorCode::DimensionMismatch,
            "frame has " + std::to_string(row.size()) + " classes, expected " + std::to_string(classes));
    const int best = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    if (best != prev && best != blank_index) out.tokens.push_back(best);
    prev = best;
  }
  return out;
}

/// Token-level Levenshtein distance, two-row DP.
inline std::size_t edit_distance(std::span<const int> a, std::span<const int> b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

/// Edits / reference length. Not clamped: insertions can push it above 1.
inline double wer(const LabelSeq& hyp, const LabelSeq& ref) {
  require(!ref.tokens.empty(), ErrorCode::EmptyReference, "reference has no tokens");
  return static_cast<double>(edit_distance(hyp.tokens, ref.tokens)) / static_cast<double>(ref.tokens.size());
}

struct CorpusScore {
  std::vector<double> per_utterance;
  std::size_t edits = 0;
  std::size_t ref_tokens = 0;
  double aggregate() const { return ref_tokens ? static_cast<double>(edits) / static_cast<double>(ref_tokens) : 0.0; }
};

/// Aggregate WER is total edits over total reference tokens, not the mean of
/// per-utterance rates.
inline CorpusScore score_corpus(const std::vector<LabelSeq>& hyps, const std::vector<LabelSeq>& refs) {
  require(hyps.size() == refs.size(), ErrorCode::DataFormat,
          std::to_string(hyps.size()) + " hypotheses for " + std::to_string(refs.size()) + " references");
  CorpusScore s;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    require(!refs[i].tokens.empty(), ErrorCode::EmptyReference, "reference " + std::to_string(i) + " is empty");
    const std::size_t e = edit_distance(hyps[i].tokens, refs[i].tokens);
    s.edits += e;
    s.ref_tokens += refs[i].tokens.size();
    s.per_utterance.push_back(static_cast<double>(e) / static_cast<double>(refs[i].tokens.size()));
  }
  return s;
}

}  // namespace edrnn::decode
