#include "aeloc/tensor.hpp"

#include <cmath>
#include <sstream>

namespace aeloc {

bool TensorGrid::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

void TensorGrid::check_finite(const std::string& what) const {
  if (!all_finite())
    throw std::runtime_error("non-finite value in " + what);
}

std::string TensorGrid::shape_str() const {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) os << "x";
    os << shape_[i];
  }
  os << ")";
  return os.str();
}

}  // namespace aeloc
