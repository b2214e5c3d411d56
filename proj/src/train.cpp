#include "pvedge/train.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>

#include "pvedge/errors.hpp"
#include "pvedge/textio.hpp"

namespace pvedge {

void validate(const TrainConfig& c) {
  if (c.n_trees < 1) throw ConfigError("train: n_trees must be at least 1");
  if (!(c.learn_rate > 0.0 && c.learn_rate <= 1.0)) {
    throw ConfigError("train: learn_rate must lie in (0, 1]");
  }
  if (c.max_depth < 1) throw ConfigError("train: max_depth must be at least 1");
  if (c.min_leaf < 1) throw ConfigError("train: min_leaf must be at least 1");
}

namespace {

struct SplitChoice {
  bool found = false;
  int feature = 0;          // 0-based
  double threshold = 0.0;
  double children_sse = std::numeric_limits<double>::infinity();
};

// Canonical children SSE of one candidate: partition in row order, then a
// two-pass sum of squares per side. This is the arithmetic the tie-break
// contract (lowest feature, smallest threshold on equal SSE) is defined
// on; identical partitions produce identical doubles here, which the fast
// prefix-sum scan cannot guarantee.
double canonical_children_sse(const Eigen::Ref<const Eigen::MatrixXd>& X,
                              const Eigen::Ref<const Eigen::VectorXd>& r,
                              const std::vector<std::uint32_t>& rows, int feature,
                              double threshold) {
  double sum_left = 0.0, sum_right = 0.0;
  std::size_t n_left = 0, n_right = 0;
  for (const auto row : rows) {
    if (X(row, feature) < threshold) {
      sum_left += r[row];
      ++n_left;
    } else {
      sum_right += r[row];  // NaN compares false and lands here
      ++n_right;
    }
  }
  const double mean_left = sum_left / static_cast<double>(n_left);
  const double mean_right = sum_right / static_cast<double>(n_right);
  double sse_left = 0.0, sse_right = 0.0;
  for (const auto row : rows) {
    if (X(row, feature) < threshold) {
      const double d = r[row] - mean_left;
      sse_left += d * d;
    } else {
      const double d = r[row] - mean_right;
      sse_right += d * d;
    }
  }
  return sse_left + sse_right;
}

// Exhaustive best split over all features and all midpoints between
// consecutive distinct sorted values. NaN rows are fixed members of the
// right child for every candidate; candidates leaving either child below
// min_leaf are skipped. A prefix-sum scan locates the minimum, then every
// candidate within a rounding-error window of it is re-evaluated with the
// canonical two-pass SSE so that equal-SSE ties resolve by lowest feature
// index, then smallest threshold, independent of summation noise.
SplitChoice best_split(const Eigen::Ref<const Eigen::MatrixXd>& X,
                       const Eigen::Ref<const Eigen::VectorXd>& r,
                       const std::vector<std::uint32_t>& rows, int min_leaf,
                       std::vector<std::vector<std::pair<double, double>>>& sorted) {
  const auto n = static_cast<std::ptrdiff_t>(rows.size());
  const auto p = static_cast<std::size_t>(X.cols());
  sorted.resize(p);

  double node_sum_sq = 0.0;
  for (const auto row : rows) node_sum_sq += r[row] * r[row];

  for (std::size_t j = 0; j < p; ++j) {
    auto& column = sorted[j];
    column.clear();
    for (const auto row : rows) {
      const double v = X(row, static_cast<Eigen::Index>(j));
      if (!std::isnan(v)) column.emplace_back(v, r[row]);
    }
    std::sort(column.begin(), column.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
  }

  // Feeds every admissible (feature, threshold, prefix SSE) to the sink,
  // features ascending, thresholds ascending within each feature.
  const auto scan = [&](auto&& sink) {
    for (std::size_t j = 0; j < p; ++j) {
      const auto& column = sorted[j];
      const auto m = static_cast<std::ptrdiff_t>(column.size());
      if (m < 2) continue;

      double finite_sum = 0.0, finite_sum_sq = 0.0;
      for (const auto& [v, res] : column) {
        finite_sum += res;
        finite_sum_sq += res * res;
      }
      double nan_sum = 0.0, nan_sum_sq = 0.0;
      for (const auto row : rows) {
        if (std::isnan(X(row, static_cast<Eigen::Index>(j)))) {
          nan_sum += r[row];
          nan_sum_sq += r[row] * r[row];
        }
      }
      const double total_sum = finite_sum + nan_sum;
      const double total_sum_sq = finite_sum_sq + nan_sum_sq;

      double left_sum = 0.0, left_sum_sq = 0.0;
      for (std::ptrdiff_t k = 1; k < m; ++k) {
        const double res = column[k - 1].second;
        left_sum += res;
        left_sum_sq += res * res;

        const double lo = column[k - 1].first;
        const double hi = column[k].first;
        if (!(lo < hi)) continue;  // duplicate value, no boundary here
        const double threshold = lo + (hi - lo) / 2;
        if (!(threshold > lo)) continue;  // midpoint rounded onto lo

        const std::ptrdiff_t left_n = k;
        const std::ptrdiff_t right_n = n - k;  // includes the NaN rows
        if (left_n < min_leaf || right_n < min_leaf) continue;

        const double right_sum = total_sum - left_sum;
        const double right_sum_sq = total_sum_sq - left_sum_sq;
        const double prefix_sse =
            (left_sum_sq - left_sum * left_sum / static_cast<double>(left_n)) +
            (right_sum_sq -
             right_sum * right_sum / static_cast<double>(right_n));
        sink(static_cast<int>(j), threshold, prefix_sse);
      }
    }
  };

  double min_prefix = std::numeric_limits<double>::infinity();
  scan([&](int, double, double prefix_sse) {
    min_prefix = std::min(min_prefix, prefix_sse);
  });

  SplitChoice best;
  if (!std::isfinite(min_prefix)) return best;  // no admissible candidate

  const double window = 64.0 * static_cast<double>(n) *
                        std::numeric_limits<double>::epsilon() * node_sum_sq;
  scan([&](int feature, double threshold, double prefix_sse) {
    if (prefix_sse > min_prefix + window) return;
    const double sse = canonical_children_sse(X, r, rows, feature, threshold);
    if (sse < best.children_sse) {
      best.found = true;
      best.feature = feature;
      best.threshold = threshold;
      best.children_sse = sse;
    }
  });
  return best;
}

struct BuildItem {
  std::vector<std::uint32_t> rows;
  int depth;
  std::size_t slot;
};

}  // namespace

CompactRegressionTree fit_tree(const Eigen::Ref<const Eigen::MatrixXd>& X,
                               const Eigen::Ref<const Eigen::VectorXd>& residuals,
                               const TrainConfig& config) {
  validate(config);
  if (X.rows() < 1) throw DataError("fit_tree: empty input");
  if (X.cols() < 1) throw DataError("fit_tree: no feature columns");
  if (X.rows() != residuals.size()) {
    throw DimensionError("fit_tree: features and residuals disagree on rows");
  }

  CompactRegressionTree tree;
  const auto add_node = [&tree]() {
    tree.cut_predictor_index.push_back(0);
    tree.children.push_back(0);
    tree.children.push_back(0);
    tree.cut_point.push_back(0.0);
    tree.nan_cut_points.push_back(0);
    tree.node_mean.push_back(0.0);
    return tree.node_count() - 1;
  };

  std::vector<std::uint32_t> all_rows(static_cast<std::size_t>(X.rows()));
  for (std::size_t i = 0; i < all_rows.size(); ++i) {
    all_rows[i] = static_cast<std::uint32_t>(i);
  }

  std::deque<BuildItem> frontier;
  frontier.push_back(BuildItem{std::move(all_rows), 0, add_node()});
  std::vector<std::vector<std::pair<double, double>>> scratch;

  while (!frontier.empty()) {
    BuildItem item = std::move(frontier.front());
    frontier.pop_front();

    const auto n = static_cast<double>(item.rows.size());
    double sum = 0.0;
    for (const auto row : item.rows) sum += residuals[row];
    const double mean = sum / n;
    tree.node_mean[item.slot] = mean;

    if (item.depth >= config.max_depth ||
        item.rows.size() < 2 * static_cast<std::size_t>(config.min_leaf)) {
      continue;
    }
    // Identical residuals cannot be improved on; skip the search entirely
    // rather than comparing rounding dust against rounding dust.
    bool constant = true;
    for (const auto row : item.rows) {
      constant = constant && residuals[row] == residuals[item.rows.front()];
    }
    if (constant) continue;

    const SplitChoice choice =
        best_split(X, residuals, item.rows, config.min_leaf, scratch);
    if (!choice.found) continue;
    double parent_sse = 0.0;
    for (const auto row : item.rows) {
      const double d = residuals[row] - mean;
      parent_sse += d * d;
    }
    if (!(choice.children_sse < parent_sse)) continue;  // zero improvement

    std::vector<std::uint32_t> left_rows;
    std::vector<std::uint32_t> right_rows;
    for (const auto row : item.rows) {
      const double v = X(row, choice.feature);
      // NaN fails v < threshold and lands right, like ties.
      if (v < choice.threshold) {
        left_rows.push_back(row);
      } else {
        right_rows.push_back(row);
      }
    }

    const std::size_t left_slot = add_node();
    const std::size_t right_slot = add_node();
    tree.cut_predictor_index[item.slot] =
        static_cast<std::uint32_t>(choice.feature + 1);
    tree.cut_point[item.slot] = choice.threshold;
    tree.children[2 * item.slot] = static_cast<std::uint32_t>(left_slot + 1);
    tree.children[2 * item.slot + 1] = static_cast<std::uint32_t>(right_slot + 1);
    frontier.push_back(BuildItem{std::move(left_rows), item.depth + 1, left_slot});
    frontier.push_back(BuildItem{std::move(right_rows), item.depth + 1, right_slot});
  }
  return tree;
}

GBTEnsemble fit_lsboost(const Eigen::Ref<const Eigen::MatrixXd>& X,
                        const Eigen::Ref<const Eigen::VectorXd>& targets,
                        const TrainConfig& config,
                        std::vector<double>* round_rmse) {
  validate(config);
  if (X.rows() < 1) throw DataError("fit_lsboost: empty input");
  if (X.cols() < 1) throw DataError("fit_lsboost: no feature columns");
  if (X.rows() != targets.size()) {
    throw DimensionError("fit_lsboost: features and targets disagree on rows");
  }
  if (!targets.allFinite()) {
    throw DataError("fit_lsboost: targets must be finite");
  }

  GBTEnsemble model;
  model.n_features = static_cast<std::uint32_t>(X.cols());
  model.bias = targets.mean();
  model.trees.reserve(static_cast<std::size_t>(config.n_trees));
  model.weights.reserve(static_cast<std::size_t>(config.n_trees));

  Eigen::VectorXd residual = targets.array() - model.bias;
  for (int k = 0; k < config.n_trees; ++k) {
    CompactRegressionTree tree = fit_tree(X, residual, config);
    residual -= config.learn_rate * predict_tree_rows(tree, X);
    if (round_rmse) {
      round_rmse->push_back(
          std::sqrt(residual.squaredNorm() / static_cast<double>(X.rows())));
    }
    model.trees.push_back(std::move(tree));
    model.weights.push_back(config.learn_rate);
  }
  return model;
}

void write_training_log(const std::vector<double>& round_rmse,
                        const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot open training log for writing: " + path);
  out << "round rmse\n";
  for (std::size_t k = 0; k < round_rmse.size(); ++k) {
    out << (k + 1) << ' ' << format_double(round_rmse[k]) << '\n';
  }
  if (!out) throw ConfigError("failed to write training log: " + path);
}

}  // namespace pvedge
