#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace pvedge {

/// Read-only feature vector; also binds rows of a column-major matrix.
using FeatureRef = Eigen::Ref<const Eigen::VectorXd, 0, Eigen::InnerStride<>>;

/// Regression tree flattened into five parallel arrays and evaluated by
/// iterative descent from the root (node 1; ids are 1-based, 0 = none).
///
/// Invariants (checked by validate_tree):
///   - all arrays describe the same n_nodes >= 1 (children holds 2*n_nodes)
///   - internal node i: 1 <= cut_predictor_index <= n_features, both child
///     ids strictly greater than i, cut_point finite unless nan_cut_points
///   - leaf node i: cut_predictor_index = 0 and children = (0, 0)
///   - every non-root node is referenced exactly once as a child
struct CompactRegressionTree {
  std::vector<std::uint32_t> cut_predictor_index;  ///< 1-based feature id, 0 at leaves
  std::vector<std::uint32_t> children;             ///< left at 2i, right at 2i+1
  std::vector<double> cut_point;                   ///< threshold in feature units
  std::vector<std::uint8_t> nan_cut_points;        ///< nonzero: stop descent here
  std::vector<double> node_mean;                   ///< response when descent stops here

  std::size_t node_count() const { return node_mean.size(); }

  /// Degenerate single-node tree predicting a constant.
  static CompactRegressionTree leaf(double mean);
};

struct Violation {
  std::size_t tree = 0;  ///< tree index within an ensemble (validate_model only)
  std::size_t node = 0;  ///< 1-based node id, 0 for whole-structure findings
  std::string message;
};

std::string to_string(const Violation& violation);

std::vector<Violation> validate_tree(const CompactRegressionTree& tree,
                                     std::uint32_t n_features);

/// Descends from the root: stop at a leaf, on a NaN feature value, or when
/// nan_cut_points is set; otherwise go left iff x[feature] < cut_point
/// (ties go right). Returns node_mean of the stopping node.
///
/// Throws ModelCorruptionError if the descent hits an out-of-range index;
/// never throws on a tree accepted by validate_tree.
double predict_tree(const CompactRegressionTree& tree, const FeatureRef& x);

/// Row-wise predict_tree over a sample matrix (one row per sample).
Eigen::VectorXd predict_tree_rows(const CompactRegressionTree& tree,
                                  const Eigen::MatrixXd& X);

}  // namespace pvedge
