#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fatiguescope/matrix.hpp"

namespace fatiguescope::model {

struct TreeNode {
  int feature = -1;  // < 0 marks a leaf
  double threshold = 0.0;  // samples with x[feature] <= threshold go left
  int left = -1;
  int right = -1;
  double value = 0.0;  // mean target of the samples that reached the node
  std::size_t samples = 0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct TreeParams {
  std::size_t min_leaf_size = 1;
  int max_depth = 0;  // 0 = unlimited
};

// Least-squares regression tree stored as a flat node array, root at 0.
class RegressionTree {
 public:
  RegressionTree() = default;
  RegressionTree(std::vector<TreeNode> nodes, std::size_t feature_dimension);

  double predict(std::span<const double> x) const;

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t feature_dimension() const { return feature_dimension_; }
  std::size_t leaf_count() const;
  int depth() const;

  bool operator==(const RegressionTree&) const = default;

 private:
  std::vector<TreeNode> nodes_;
  std::size_t feature_dimension_ = 0;
};

// Greedy variance-reduction fit. Every feature is scanned over midpoints of
// consecutive distinct sorted values; a split is admissible when both sides
// keep at least min_leaf_size samples and it lowers the squared error. Equal
// gains go to the smallest feature index, then the smallest threshold.
// Throws Error(input_mismatch) on empty input or |X| != |y|.
RegressionTree fit_tree(const FeatureMatrix& x, std::span<const double> y, const TreeParams& params);

}  // namespace fatiguescope::model
