// Copyright 2026 The vixml Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vixml {

/// Failure classes. The numeric value doubles as the CLI exit code.
enum class ErrorKind : int {
  kUsage = 1,
  kData = 2,
  kNumeric = 3,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void usage_error(const std::string& msg) { throw Error(ErrorKind::kUsage, msg); }
[[noreturn]] inline void data_error(const std::string& msg) { throw Error(ErrorKind::kData, msg); }
[[noreturn]] inline void numeric_error(const std::string& msg) { throw Error(ErrorKind::kNumeric, msg); }

using LabelId = std::uint32_t;
using TokenId = std::uint32_t;

/// Query-index -> ascending, duplicate-free list of positive label ids.
using GroundTruth = std::vector<std::vector<LabelId>>;

/// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
  bool operator==(const Matrix&) const = default;
};

/// Left-to-right dot product; every score in the library goes through this so
/// the reduction order is fixed.
inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l2_norm(std::span<const double> v);

/// Scales v to unit length in place; returns the original norm.
double normalize_in_place(std::span<double> v);

bool all_finite(std::span<const double> v);

/// Writes `bytes` to `path` via a temporary file and rename.
void write_file_atomic(const std::string& path, const std::string& bytes);

std::string read_file(const std::string& path);

}  // namespace vixml
