#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <variant>
#include <vector>

#include "fhb/preprocess.hpp"

namespace fhb {

// Defaults standing in for the unreported "kept default" hyperparameters.
struct ClassifierParams {
  std::size_t rounds = 100;      // boosted
  double learning_rate = 0.1;    // boosted
  std::size_t max_depth = 3;     // boosted
  std::size_t epochs = 50;       // svm
  double reg = 1e-3;             // svm
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf logit contribution
};

struct RegressionTree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> row) const {
    int at = 0;
    while (nodes[at].feature >= 0)
      at = row[static_cast<std::size_t>(nodes[at].feature)] <= nodes[at].threshold
               ? nodes[at].left
               : nodes[at].right;
    return nodes[at].value;
  }
};

struct BoostedTreesModel {
  std::vector<RegressionTree> trees;
  double learning_rate = 0.1;
  double base_score = 0.0;  // log-odds of the class balance
  std::size_t max_depth = 3;
  std::size_t dimension = 0;
  std::uint64_t seed = 0;
  std::vector<double> train_logloss;  // entry 0 at base, then one per round

  double decision_margin(std::span<const double> row) const {
    double f = base_score;
    for (const RegressionTree& tree : trees) f += learning_rate * tree.predict(row);
    return f;
  }
};

struct LinearSvmModel {
  std::vector<double> weights;
  double bias = 0.0;
  std::size_t epochs = 0;
  double reg = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> objective_history;  // regularized objective after each epoch

  double decision_margin(std::span<const double> row) const {
    double m = bias;
    for (std::size_t i = 0; i < weights.size(); ++i) m += weights[i] * row[i];
    return m;
  }
};

struct ConfusionMatrix {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;  // Serious is the positive class
  std::size_t total() const { return tp + tn + fp + fn; }
};

// Seeded uniform shuffle then split: train gets the first n - val_count
// entries of the shuffled order, val the rest.
std::pair<Dataset, Dataset> train_val_split(const Dataset& dataset, std::size_t val_count,
                                            std::uint64_t seed);
// Same split on bare indices, for callers holding matrices.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t n, std::size_t val_count, std::uint64_t seed);

// Gradient boosting on logistic loss. Each round fits a depth-limited
// regression tree to the residuals (exhaustive threshold search) and sets
// leaf values by a damped Newton step: sum(residual) / (sum(hessian) + 1e-9).
BoostedTreesModel train_boosted(const FeatureMatrix& features,
                                const std::vector<ClassLabel>& labels, std::size_t rounds,
                                double learning_rate, std::size_t max_depth, std::uint64_t seed);

// Primal hinge loss + L2 via seeded stochastic subgradient descent with
// step 1/(reg * t) (Pegasos-style); the bias is unregularized.
LinearSvmModel train_svm(const FeatureMatrix& features, const std::vector<ClassLabel>& labels,
                         std::size_t epochs, double reg, std::uint64_t seed);

// Regularized SVM objective: reg/2 * |w|^2 + mean hinge loss.
double svm_objective(const FeatureMatrix& features, const std::vector<ClassLabel>& labels,
                     double reg, const std::vector<double>& weights, double bias);

// Positive decision margin -> Serious; zero or negative -> Mild.
std::vector<ClassLabel> predict(const BoostedTreesModel& model, const FeatureMatrix& features);
std::vector<ClassLabel> predict(const LinearSvmModel& model, const FeatureMatrix& features);

// Eq.-style accuracy: (TP + TN) / (TP + TN + FP + FN), Serious positive.
std::pair<ConfusionMatrix, double> evaluate(const std::vector<ClassLabel>& predictions,
                                            const std::vector<ClassLabel>& truth);

using AnyModel = std::variant<BoostedTreesModel, LinearSvmModel>;

std::vector<ClassLabel> predict(const AnyModel& model, const FeatureMatrix& features);

// Self-describing JSON document; every numeric parameter is decimal text
// with 17 significant digits, so reloading reproduces predictions bitwise.
void save_model(const AnyModel& model, const std::filesystem::path& path);
AnyModel load_model(const std::filesystem::path& path);

}  // namespace fhb
