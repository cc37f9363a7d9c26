#include "ratiolab/param_vector.hpp"

#include <stdexcept>

namespace ratiolab {

ParamLayout ParamLayout::build(
    std::vector<std::pair<std::string, std::pair<Eigen::Index, Eigen::Index>>> shapes) {
  ParamLayout layout;
  Eigen::Index offset = 0;
  for (auto& [name, shape] : shapes) {
    auto [rows, cols] = shape;
    if (rows < 1 || cols < 1) {
      throw std::invalid_argument("ParamLayout: slice '" + name + "' must be nonempty");
    }
    layout.slices_.push_back({name, rows, cols, offset});
    offset += rows * cols;
  }
  layout.total_ = offset;
  return layout;
}

ParamVector::ParamVector(ParamLayout layout)
    : layout_(std::move(layout)), values_(Eigen::VectorXd::Zero(layout_.total())) {}

ParamVector::ParamVector(ParamLayout layout, Eigen::VectorXd values)
    : layout_(std::move(layout)), values_(std::move(values)) {
  if (values_.size() != layout_.total()) {
    throw std::invalid_argument("ParamVector: values do not match layout total size");
  }
}

Eigen::Map<Eigen::MatrixXd> ParamVector::matrix(std::size_t slice_idx) {
  const ParamSlice& s = layout_.slice(slice_idx);
  return {values_.data() + s.offset, s.rows, s.cols};
}

Eigen::Map<const Eigen::MatrixXd> ParamVector::matrix(std::size_t slice_idx) const {
  const ParamSlice& s = layout_.slice(slice_idx);
  return {values_.data() + s.offset, s.rows, s.cols};
}

}  // namespace ratiolab
