#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "climctl/core/state_space.hpp"

namespace climctl::ebm {

/// Row-major m x n cell field. Cell (i, j) lives at i * n + j.
struct GridField2d {
  std::size_t m = 0;
  std::size_t n = 0;
  std::vector<double> values;

  GridField2d() = default;
  GridField2d(std::size_t rows, std::size_t cols, double fill = 0.0)
      : m(rows), n(cols), values(rows * cols, fill) {}
  GridField2d(std::size_t rows, std::size_t cols, std::vector<double> v)
      : m(rows), n(cols), values(std::move(v)) {
    validate("GridField2d");
  }

  std::size_t size() const { return values.size(); }
  std::size_t index(std::size_t i, std::size_t j) const { return i * n + j; }
  double& operator()(std::size_t i, std::size_t j) { return values[index(i, j)]; }
  double operator()(std::size_t i, std::size_t j) const { return values[index(i, j)]; }

  bool same_shape(const GridField2d& o) const { return m == o.m && n == o.n; }

  void validate(const std::string& name) const {
    if (m == 0 || n == 0) throw DomainError(name + ": grid dimensions must be positive");
    if (values.size() != m * n)
      throw DomainError(name + ": expected " + std::to_string(m * n) + " values, got " +
                        std::to_string(values.size()));
    for (double v : values)
      if (!std::isfinite(v)) throw DomainError(name + ": non-finite value");
  }

  Vector to_vector() const {
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
  }

  static GridField2d from_vector(std::size_t rows, std::size_t cols, const Vector& v) {
    if (static_cast<std::size_t>(v.size()) != rows * cols)
      throw DomainError("GridField2d: vector length does not match grid");
    return GridField2d(rows, cols, std::vector<double>(v.data(), v.data() + v.size()));
  }
};

}  // namespace climctl::ebm
