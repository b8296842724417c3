#ifndef AELOC_TENSOR_HPP
#define AELOC_TENSOR_HPP

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace aeloc {

// Dense row-major n-dimensional array of doubles. The numeric substrate for
// scalograms, network activations and parameters.
class TensorGrid {
 public:
  TensorGrid() = default;

  explicit TensorGrid(std::vector<std::size_t> shape)
      : shape_(std::move(shape)), data_(count(shape_), 0.0) {}

  TensorGrid(std::initializer_list<std::size_t> shape)
      : TensorGrid(std::vector<std::size_t>(shape)) {}

  TensorGrid(std::vector<std::size_t> shape, std::vector<double> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != count(shape_))
      throw std::invalid_argument("TensorGrid: data length does not match shape");
  }

  static std::size_t count(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t e : shape) n *= e;
    return n;
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& at2(std::size_t i, std::size_t j) {
    return data_[i * shape_[1] + j];
  }
  double at2(std::size_t i, std::size_t j) const {
    return data_[i * shape_[1] + j];
  }

  void fill(double v) { data_.assign(data_.size(), v); }

  void reshape(std::vector<std::size_t> shape) {
    if (count(shape) != data_.size())
      throw std::invalid_argument("TensorGrid: reshape changes element count");
    shape_ = std::move(shape);
  }

  // True when every element is finite.
  bool all_finite() const;

  // Throws std::runtime_error naming `what` if a non-finite value is present.
  void check_finite(const std::string& what) const;

  std::string shape_str() const;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

}  // namespace aeloc

#endif  // AELOC_TENSOR_HPP
