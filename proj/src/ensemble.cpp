#include "pvedge/ensemble.hpp"

#include <cmath>

#include "pvedge/errors.hpp"

namespace pvedge {

std::vector<Violation> validate_model(const GBTEnsemble& model) {
  std::vector<Violation> out;
  if (model.n_features == 0) {
    out.push_back({static_cast<std::size_t>(-1), 0, "n_features must be positive"});
  }
  if (!std::isfinite(model.bias)) {
    out.push_back({static_cast<std::size_t>(-1), 0, "bias is not finite"});
  }
  if (model.weights.size() != model.trees.size()) {
    out.push_back({static_cast<std::size_t>(-1), 0,
                   "weights and trees differ in length"});
  }
  for (std::size_t k = 0; k < model.trees.size(); ++k) {
    if (k < model.weights.size() &&
        !(std::isfinite(model.weights[k]) && model.weights[k] > 0.0)) {
      out.push_back({k, 0, "weight must be finite and positive"});
    }
    for (Violation v : validate_tree(model.trees[k], model.n_features)) {
      v.tree = k;
      out.push_back(std::move(v));
    }
  }
  return out;
}

void require_valid(const GBTEnsemble& model) {
  const auto violations = validate_model(model);
  if (violations.empty()) return;
  std::string message = "invalid model:";
  std::size_t listed = 0;
  for (const auto& v : violations) {
    if (listed++ == 8) {
      message += " ...";
      break;
    }
    message += "\n  " + to_string(v);
  }
  throw ModelCorruptionError(message);
}

double predict_ensemble(const GBTEnsemble& model, const FeatureRef& x) {
  if (x.size() != static_cast<Eigen::Index>(model.n_features)) {
    throw DimensionError("predict: expected " + std::to_string(model.n_features) +
                         " features, got " + std::to_string(x.size()));
  }
  double acc = model.bias;
  for (std::size_t k = 0; k < model.trees.size(); ++k) {
    acc += model.weights[k] * predict_tree(model.trees[k], x);
  }
  return acc;
}

Eigen::VectorXd predict_ensemble_rows(const GBTEnsemble& model,
                                      const Eigen::MatrixXd& X) {
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    out[i] = predict_ensemble(model, X.row(i).transpose());
  }
  return out;
}

}  // namespace pvedge
