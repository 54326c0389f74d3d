#include "fatiguescope/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fatiguescope/error.hpp"

namespace fatiguescope::model {

RegressionTree::RegressionTree(std::vector<TreeNode> nodes, std::size_t feature_dimension)
    : nodes_(std::move(nodes)), feature_dimension_(feature_dimension) {
  if (nodes_.empty()) throw Error(ErrorCategory::validation, "tree without nodes");
  for (const auto& n : nodes_) {
    if (n.is_leaf()) continue;
    const auto count = static_cast<int>(nodes_.size());
    if (static_cast<std::size_t>(n.feature) >= feature_dimension_ || n.left <= 0 || n.right <= 0 ||
        n.left >= count || n.right >= count) {
      throw Error(ErrorCategory::validation, "malformed tree node");
    }
  }
}

double RegressionTree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const auto& n = nodes_[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes_[i].value;
}

std::size_t RegressionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

int RegressionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<int> d(nodes_.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    best = std::max(best, d[i]);
    if (!nodes_[i].is_leaf()) {
      d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
    }
  }
  return best;
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& x, std::span<const double> y, const TreeParams& params)
      : x_(x), y_(y), params_(params) {}

  std::vector<TreeNode> build() {
    std::vector<std::size_t> all(x_.rows());
    std::iota(all.begin(), all.end(), 0);
    grow(all, 0);
    return std::move(nodes_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
  };

  // Orders samples by (feature value, target). Samples equal in both are
  // interchangeable, so every sum below is independent of input row order.
  void sort_by_feature(std::vector<std::size_t>& order, std::size_t f) const {
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double xa = x_(a, f);
      const double xb = x_(b, f);
      if (xa != xb) return xa < xb;
      return y_[a] < y_[b];
    });
  }

  int grow(std::vector<std::size_t> idx, int depth) {
    const std::size_t n = idx.size();
    const int self = static_cast<int>(nodes_.size());
    nodes_.emplace_back();

    std::vector<std::size_t> order = idx;
    sort_by_feature(order, 0);
    double total = 0.0;
    for (auto i : order) total += y_[i];
    const double mean = total / static_cast<double>(n);
    double sse = 0.0;
    for (auto i : order) sse += (y_[i] - mean) * (y_[i] - mean);
    nodes_[self].value = mean;
    nodes_[self].samples = n;

    const bool depth_ok = params_.max_depth <= 0 || depth < params_.max_depth;
    if (!depth_ok || n < 2 * params_.min_leaf_size || !(sse > 0.0)) return self;

    const Split best = find_split(order, mean, sse);
    if (best.feature < 0) return self;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    const auto f = static_cast<std::size_t>(best.feature);
    for (auto i : idx) (x_(i, f) <= best.threshold ? left : right).push_back(i);

    nodes_[self].feature = best.feature;
    nodes_[self].threshold = best.threshold;
    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    nodes_[self].left = l;
    nodes_[self].right = r;
    return self;
  }

  Split find_split(std::vector<std::size_t>& order, double mean, double sse) const {
    const std::size_t n = order.size();
    const std::size_t min_leaf = std::max<std::size_t>(1, params_.min_leaf_size);
    // Gains within this margin of each other count as ties.
    const double eps = 1e-12 * sse;
    Split best;
    best.gain = eps;
    std::vector<double> centered(n);
    for (std::size_t f = 0; f < x_.cols(); ++f) {
      if (f > 0) sort_by_feature(order, f);
      double total = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        centered[k] = y_[order[k]] - mean;
        total += centered[k];
      }
      double left = 0.0;
      for (std::size_t k = 1; k < n; ++k) {
        left += centered[k - 1];
        const double a = x_(order[k - 1], f);
        const double b = x_(order[k], f);
        if (a == b) continue;
        if (k < min_leaf || n - k < min_leaf) continue;
        const double right = total - left;
        const auto nl = static_cast<double>(k);
        const auto nr = static_cast<double>(n - k);
        const double gain = left * left / nl + right * right / nr - total * total / static_cast<double>(n);
        if (gain > best.gain + (best.feature < 0 ? 0.0 : eps)) {
          double mid = a + (b - a) / 2.0;
          if (!(mid < b)) mid = a;
          best = {static_cast<int>(f), mid, gain};
        }
      }
    }
    return best;
  }

  const FeatureMatrix& x_;
  std::span<const double> y_;
  TreeParams params_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

RegressionTree fit_tree(const FeatureMatrix& x, std::span<const double> y, const TreeParams& params) {
  if (x.rows() == 0 || y.empty()) throw Error(ErrorCategory::input_mismatch, "fit_tree on empty input");
  if (x.rows() != y.size()) {
    throw Error(ErrorCategory::input_mismatch, "fit_tree: " + std::to_string(x.rows()) +
                                                   " rows but " + std::to_string(y.size()) + " targets");
  }
  if (x.cols() == 0) throw Error(ErrorCategory::input_mismatch, "fit_tree: zero-dimensional features");
  if (params.min_leaf_size < 1) throw Error(ErrorCategory::invalid_config, "min_leaf_size must be >= 1");
  TreeBuilder builder(x, y, params);
  return RegressionTree(builder.build(), x.cols());
}

}  // namespace fatiguescope::model
