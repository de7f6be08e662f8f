#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "satire/error.hpp"

namespace satire {

// Dense row-major array of 64-bit floats. Rank is arbitrary but the toolkit
// only ever builds vectors, matrices, and scalar-as-[1] shapes.
struct NDArray {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  NDArray() = default;
  NDArray(std::vector<std::size_t> s, std::vector<double> d);

  static NDArray zeros(std::vector<std::size_t> shape);
  static NDArray scalar(double v) { return NDArray({1}, {v}); }
  static NDArray vector(std::vector<double> v);

  std::size_t numel() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  std::size_t rows() const { return shape.at(0); }
  std::size_t cols() const { return shape.at(1); }

  double& at(std::size_t i) { return data[i]; }
  double at(std::size_t i) const { return data[i]; }
  double& at(std::size_t i, std::size_t j) { return data[i * shape[1] + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * shape[1] + j]; }

  bool same_shape(const NDArray& o) const { return shape == o.shape; }
  void fill(double v);
  bool all_finite() const;
};

std::string shape_str(const std::vector<std::size_t>& shape);

inline void require_shape(bool ok, const NDArray& a, const NDArray& b,
                          const char* op) {
  if (!ok)
    throw DataError(std::string(op) + ": shape mismatch " + shape_str(a.shape) +
                    " vs " + shape_str(b.shape));
}

}  // namespace satire
