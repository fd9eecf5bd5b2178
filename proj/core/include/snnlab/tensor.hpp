#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "snnlab/errors.hpp"

namespace snnlab {

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& s);

// Dense n-dimensional array of doubles, row-major. The universal value
// carrier of the library.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);  // zero-filled
  Tensor(Shape shape, std::vector<double> data);
  Tensor(Shape shape, std::initializer_list<double> data);

  // Rejects NaN/Inf entries. Use at trust boundaries (file loads, user input).
  static Tensor checked(Shape shape, std::vector<double> data);

  const Shape& shape() const { return shape_; }
  std::size_t ndim() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t dim(std::size_t i) const { return shape_[i]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  // Row-major offset accessors for the common ranks.
  double& at2(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  double at2(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }
  double& at4(std::size_t b, std::size_t c, std::size_t y, std::size_t x) {
    return data_[((b * shape_[1] + c) * shape_[2] + y) * shape_[3] + x];
  }
  double at4(std::size_t b, std::size_t c, std::size_t y, std::size_t x) const {
    return data_[((b * shape_[1] + c) * shape_[2] + y) * shape_[3] + x];
  }

  // Same data, new shape; element count must match.
  Tensor reshaped(Shape new_shape) const;

  void fill(double v);
  bool all_finite() const;

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

 private:
  Shape shape_;
  std::vector<double> data_;
};

std::size_t shape_numel(const Shape& s);

// Throws ShapeError naming both shapes unless they match.
void require_same_shape(const Tensor& a, const Tensor& b, const char* where);

// Elementwise helpers used across the library; all allocate-free on `out`
// when shapes already match.
Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);
Tensor operator*(double s, const Tensor& a);

double mean(const Tensor& t);
double variance(const Tensor& t);  // population variance

}  // namespace snnlab
