// Flat parameter storage with a named-slice layout. Slices partition the
// vector exactly; matrix views are column-major maps into the flat storage.

#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace ratiolab {

struct ParamSlice {
  std::string name;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  Eigen::Index offset = 0;

  Eigen::Index size() const { return rows * cols; }
};

class ParamLayout {
 public:
  ParamLayout() = default;
  // Offsets are assigned contiguously in the order given.
  static ParamLayout build(std::vector<std::pair<std::string, std::pair<Eigen::Index, Eigen::Index>>> shapes);

  Eigen::Index total() const { return total_; }
  const std::vector<ParamSlice>& slices() const { return slices_; }
  const ParamSlice& slice(std::size_t i) const { return slices_.at(i); }
  std::size_t count() const { return slices_.size(); }

 private:
  std::vector<ParamSlice> slices_;
  Eigen::Index total_ = 0;
};

class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(ParamLayout layout);
  ParamVector(ParamLayout layout, Eigen::VectorXd values);

  const ParamLayout& layout() const { return layout_; }
  Eigen::VectorXd& values() { return values_; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::Index size() const { return values_.size(); }

  Eigen::Map<Eigen::MatrixXd> matrix(std::size_t slice_idx);
  Eigen::Map<const Eigen::MatrixXd> matrix(std::size_t slice_idx) const;

 private:
  ParamLayout layout_;
  Eigen::VectorXd values_;
};

}  // namespace ratiolab
