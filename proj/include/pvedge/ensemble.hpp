#pragma once

#include <cstdint>
#include <vector>

#include "pvedge/tree.hpp"

namespace pvedge {

/// Boosted ensemble: bias + sum of weighted compact trees. With bias = 0
/// and unit weights this is a plain unweighted tree sum; the LSBoost
/// trainer stores the shrinkage factor as each tree's weight.
struct GBTEnsemble {
  std::uint32_t n_features = 0;
  double bias = 0.0;
  std::vector<double> weights;             ///< per-tree multipliers, > 0
  std::vector<CompactRegressionTree> trees;

  std::size_t tree_count() const { return trees.size(); }
};

/// Every invariant violation with tree/node coordinates; empty means valid.
std::vector<Violation> validate_model(const GBTEnsemble& model);

/// Throws ModelCorruptionError listing the violations, if any.
void require_valid(const GBTEnsemble& model);

/// bias + sum_k weights[k] * predict_tree(trees[k], x).
/// Throws DimensionError unless x has exactly n_features entries.
double predict_ensemble(const GBTEnsemble& model, const FeatureRef& x);

/// Row-wise ensemble prediction (one row of X per sample).
Eigen::VectorXd predict_ensemble_rows(const GBTEnsemble& model,
                                      const Eigen::MatrixXd& X);

}  // namespace pvedge
