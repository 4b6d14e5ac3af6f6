// Copyright 2026 The voxaug Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace voxaug {

/// Filesystem-level failure: missing file, unreadable path, short write.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Structurally malformed input: wrong magic, unknown schema version,
/// non-finite payload values.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

/// Payload shorter than its header promises.
class TruncationError : public std::runtime_error {
 public:
  explicit TruncationError(const std::string& what) : std::runtime_error(what) {}
};

/// Well-formed input that violates a documented invariant, or inconsistent
/// arguments (dimension mismatch, degenerate bbox, missing frame index).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace voxaug
