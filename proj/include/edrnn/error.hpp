// Copyright 2026 The EdgeDRNN-sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace edrnn {

enum class ErrorCode {
  DimensionMismatch,
  FormatUnsupported,
  IndexOutOfRange,
  Io,
  BadMagic,
  VersionMismatch,
  CorruptLength,
  EmptyTrace,
  ConfigMismatch,
  EmptyReference,
  DataFormat,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::FormatUnsupported: return "FormatUnsupported";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::Io: return "Io";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::CorruptLength: return "CorruptLength";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    case ErrorCode::ConfigMismatch: return "ConfigMismatch";
    case ErrorCode::EmptyReference: return "EmptyReference";
    case ErrorCode::DataFormat: return "DataFormat";
  }
  return "Unknown";
}

/// Exception carrying a machine-checkable code next to the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace edrnn
