#include "pvedge/tree.hpp"

#include <cmath>
#include <cstdio>

#include "pvedge/errors.hpp"

namespace pvedge {

CompactRegressionTree CompactRegressionTree::leaf(double mean) {
  CompactRegressionTree tree;
  tree.cut_predictor_index = {0};
  tree.children = {0, 0};
  tree.cut_point = {0.0};
  tree.nan_cut_points = {0};
  tree.node_mean = {mean};
  return tree;
}

std::string to_string(const Violation& v) {
  char buf[64];
  std::string out;
  if (v.tree != static_cast<std::size_t>(-1)) {
    std::snprintf(buf, sizeof(buf), "tree %zu", v.tree);
    out += buf;
  }
  if (v.node != 0) {
    std::snprintf(buf, sizeof(buf), "%snode %zu", out.empty() ? "" : ", ", v.node);
    out += buf;
  }
  if (!out.empty()) out += ": ";
  return out + v.message;
}

std::vector<Violation> validate_tree(const CompactRegressionTree& tree,
                                     std::uint32_t n_features) {
  std::vector<Violation> out;
  const auto add = [&out](std::size_t node, std::string message) {
    out.push_back(Violation{static_cast<std::size_t>(-1), node, std::move(message)});
  };

  const std::size_t n = tree.node_mean.size();
  if (n == 0) {
    add(0, "tree has no nodes");
    return out;
  }
  if (tree.cut_predictor_index.size() != n || tree.children.size() != 2 * n ||
      tree.cut_point.size() != n || tree.nan_cut_points.size() != n) {
    add(0, "parallel arrays disagree on node count");
    return out;  // indices below would be unsafe
  }

  std::vector<std::uint32_t> in_degree(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t feature = tree.cut_predictor_index[i];
    const std::uint32_t left = tree.children[2 * i];
    const std::uint32_t right = tree.children[2 * i + 1];
    const std::size_t id = i + 1;  // 1-based

    if (!std::isfinite(tree.node_mean[i])) {
      add(id, "node_mean is not finite");
    }
    if (feature == 0) {
      if (left != 0 || right != 0) {
        add(id, "leaf has child indices");
      }
      continue;
    }
    if (feature > n_features) {
      add(id, "feature index out of range");
    }
    if (!tree.nan_cut_points[i] && !std::isfinite(tree.cut_point[i])) {
      add(id, "cut_point is not finite");
    }
    for (const std::uint32_t child : {left, right}) {
      if (child == 0 || child > n) {
        add(id, "child index out of range");
      } else if (child <= id) {
        add(id, "child index not greater than parent");
      } else {
        ++in_degree[child - 1];
      }
    }
  }

  if (in_degree[0] != 0) {
    add(1, "root is referenced as a child");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (in_degree[i] == 0) {
      add(i + 1, "node unreachable from root");
    } else if (in_degree[i] > 1) {
      add(i + 1, "node referenced by more than one parent");
    }
  }
  return out;
}

double predict_tree(const CompactRegressionTree& tree, const FeatureRef& x) {
  const std::size_t n = tree.node_count();
  std::size_t m = 0;
  // A well-formed tree only ever descends to strictly larger node ids, so
  // n visits is a hard ceiling; the guard catches cyclic corrupted arrays.
  for (std::size_t visits = 0;; ++visits) {
    if (visits >= n) {
      throw ModelCorruptionError("predict: descent did not terminate");
    }
    const std::uint32_t feature = tree.cut_predictor_index[m];
    if (feature == 0) break;  // leaf
    if (static_cast<Eigen::Index>(feature) > x.size()) {
      throw ModelCorruptionError("predict: feature index out of range");
    }
    const double d = x[static_cast<Eigen::Index>(feature) - 1];
    if (std::isnan(d) || tree.nan_cut_points[m]) break;
    const std::uint32_t next =
        d < tree.cut_point[m] ? tree.children[2 * m] : tree.children[2 * m + 1];
    if (next == 0 || next > n) {
      throw ModelCorruptionError("predict: child index out of range");
    }
    m = next - 1;
  }
  return tree.node_mean[m];
}

Eigen::VectorXd predict_tree_rows(const CompactRegressionTree& tree,
                                  const Eigen::MatrixXd& X) {
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    out[i] = predict_tree(tree, X.row(i).transpose());
  }
  return out;
}

}  // namespace pvedge
