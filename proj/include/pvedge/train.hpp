#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pvedge/ensemble.hpp"

namespace pvedge {

/// Least-squares boosting knobs. Tree structure caps (max_depth, min_leaf)
/// and shrinkage are the regularizers; the loss is fixed to squared error.
struct TrainConfig {
  int n_trees = 100;        ///< boosting rounds K
  double learn_rate = 0.1;  ///< shrinkage in (0, 1]
  int max_depth = 5;        ///< root has depth 0
  int min_leaf = 5;         ///< minimum samples per leaf
  std::uint64_t seed = 0;   ///< hook for randomized subsampling; the exact
                            ///< trainer is deterministic and ignores it
};

/// Throws ConfigError on out-of-range values.
void validate(const TrainConfig& config);

/// One greedy CART regression tree on the residuals. Every feature and
/// every midpoint between consecutive distinct sorted values is evaluated;
/// the split minimizing the children's total squared error wins, ties
/// resolved by lowest feature index then smallest threshold. Recursion
/// stops at max_depth, min_leaf, or when no split improves the SSE. Leaf
/// value = mean residual. NaN feature values route right at every split.
///
/// The emitted tree is laid out breadth-first, so child ids always exceed
/// their parent's.
CompactRegressionTree fit_tree(const Eigen::Ref<const Eigen::MatrixXd>& features,
                               const Eigen::Ref<const Eigen::VectorXd>& residuals,
                               const TrainConfig& config);

/// LSBoost: bias = mean(targets), then n_trees rounds of fitting a tree to
/// the running residuals and subtracting learn_rate times its predictions.
/// Each stored tree carries weight = learn_rate. When round_rmse is given
/// it receives the training RMSE measured after every round (one entry per
/// round, non-increasing).
GBTEnsemble fit_lsboost(const Eigen::Ref<const Eigen::MatrixXd>& features,
                        const Eigen::Ref<const Eigen::VectorXd>& targets,
                        const TrainConfig& config,
                        std::vector<double>* round_rmse = nullptr);

/// Plain-text log: one "round rmse" row per boosting round.
void write_training_log(const std::vector<double>& round_rmse,
                        const std::string& path);

}  // namespace pvedge
