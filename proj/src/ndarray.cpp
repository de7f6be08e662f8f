#include "satire/ndarray.hpp"

#include <cmath>
#include <numeric>

namespace satire {

NDArray::NDArray(std::vector<std::size_t> s, std::vector<double> d)
    : shape(std::move(s)), data(std::move(d)) {
  std::size_t n = 1;
  for (std::size_t x : shape) n *= x;
  if (n != data.size())
    throw DataError("NDArray: shape " + shape_str(shape) + " needs " +
                    std::to_string(n) + " values, got " +
                    std::to_string(data.size()));
}

NDArray NDArray::zeros(std::vector<std::size_t> shape) {
  std::size_t n = 1;
  for (std::size_t x : shape) n *= x;
  NDArray a;
  a.shape = std::move(shape);
  a.data.assign(n, 0.0);
  return a;
}

NDArray NDArray::vector(std::vector<double> v) {
  NDArray a;
  a.shape = {v.size()};
  a.data = std::move(v);
  return a;
}

void NDArray::fill(double v) {
  for (double& x : data) x = v;
}

bool NDArray::all_finite() const {
  for (double x : data)
    if (!std::isfinite(x)) return false;
  return true;
}

std::string shape_str(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

}  // namespace satire
