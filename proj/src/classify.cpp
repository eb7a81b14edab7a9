#include "fhb/classify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "fhb/rng.hpp"
#include "fhb/textio.hpp"

namespace fhb {

namespace {

using ordered_json = nlohmann::ordered_json;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void require_both_classes(const std::vector<ClassLabel>& labels) {
  bool mild = false, serious = false;
  for (ClassLabel l : labels) (l == ClassLabel::Mild ? mild : serious) = true;
  if (!mild || !serious) throw InvalidArgument("training labels contain a single class");
}

void require_labels_match(const FeatureMatrix& features, const std::vector<ClassLabel>& labels) {
  features.validate();
  if (labels.size() != features.rows)
    throw InvalidArgument("label count does not match row count");
  if (features.rows == 0) throw InvalidArgument("no training samples");
}

}  // namespace

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t n, std::size_t val_count, std::uint64_t seed) {
  if (val_count == 0 || val_count >= n)
    throw InvalidArgument("split: val_count must satisfy 0 < val_count < samples");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n - val_count));
  std::vector<std::size_t> val(order.begin() + static_cast<std::ptrdiff_t>(n - val_count), order.end());
  return {std::move(train), std::move(val)};
}

std::pair<Dataset, Dataset> train_val_split(const Dataset& dataset, std::size_t val_count,
                                            std::uint64_t seed) {
  dataset.validate();
  auto [train_idx, val_idx] = split_indices(dataset.samples.size(), val_count, seed);
  Dataset train, val;
  train.band_count = val.band_count = dataset.band_count;
  for (std::size_t i : train_idx) train.samples.push_back(dataset.samples[i]);
  for (std::size_t i : val_idx) val.samples.push_back(dataset.samples[i]);
  return {std::move(train), std::move(val)};
}

// ---------------------------------------------------------------------------
// Gradient-boosted trees
// ---------------------------------------------------------------------------

namespace {

struct TreeBuilder {
  const FeatureMatrix& features;
  const std::vector<double>& residual;
  const std::vector<double>& hessian;
  std::size_t max_depth;
  RegressionTree tree;

  double leaf_value(const std::vector<std::size_t>& idx) const {
    double num = 0.0, den = 0.0;
    for (std::size_t i : idx) {
      num += residual[i];
      den += hessian[i];
    }
    return num / (den + 1e-9);
  }

  int build(std::vector<std::size_t> idx, std::size_t depth) {
    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();

    double sum_r = 0.0, sum_r2 = 0.0;
    for (std::size_t i : idx) {
      sum_r += residual[i];
      sum_r2 += residual[i] * residual[i];
    }
    const double n = static_cast<double>(idx.size());
    const double parent_sse = sum_r2 - sum_r * sum_r / n;

    int best_feature = -1;
    double best_threshold = 0.0, best_gain = 0.0;
    if (depth < max_depth && idx.size() >= 2) {
      std::vector<std::pair<double, double>> pairs(idx.size());  // (value, residual)
      for (std::size_t f = 0; f < features.cols; ++f) {
        for (std::size_t j = 0; j < idx.size(); ++j)
          pairs[j] = {features.at(idx[j], f), residual[idx[j]]};
        std::sort(pairs.begin(), pairs.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        double left_sum = 0.0, left_sum2 = 0.0;
        for (std::size_t j = 0; j + 1 < pairs.size(); ++j) {
          left_sum += pairs[j].second;
          left_sum2 += pairs[j].second * pairs[j].second;
          if (pairs[j].first == pairs[j + 1].first) continue;
          const double nl = static_cast<double>(j + 1);
          const double nr = n - nl;
          const double right_sum = sum_r - left_sum;
          const double right_sum2 = sum_r2 - left_sum2;
          const double sse = (left_sum2 - left_sum * left_sum / nl) +
                             (right_sum2 - right_sum * right_sum / nr);
          const double gain = parent_sse - sse;
          if (gain > best_gain) {
            best_gain = gain;
            best_feature = static_cast<int>(f);
            best_threshold = pairs[j].first + 0.5 * (pairs[j + 1].first - pairs[j].first);
          }
        }
      }
    }

    if (best_feature < 0) {
      tree.nodes[static_cast<std::size_t>(node_id)].value = leaf_value(idx);
      return node_id;
    }

    std::vector<std::size_t> left, right;
    for (std::size_t i : idx)
      (features.at(i, static_cast<std::size_t>(best_feature)) <= best_threshold ? left : right)
          .push_back(i);
    idx.clear();
    idx.shrink_to_fit();

    const int left_id = build(std::move(left), depth + 1);
    const int right_id = build(std::move(right), depth + 1);
    TreeNode& node = tree.nodes[static_cast<std::size_t>(node_id)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = left_id;
    node.right = right_id;
    return node_id;
  }
};

double logloss(const std::vector<double>& margin, const std::vector<double>& y) {
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double p = std::clamp(sigmoid(margin[i]), 1e-15, 1.0 - 1e-15);
    total -= y[i] * std::log(p) + (1.0 - y[i]) * std::log(1.0 - p);
  }
  return total / static_cast<double>(y.size());
}

}  // namespace

BoostedTreesModel train_boosted(const FeatureMatrix& features,
                                const std::vector<ClassLabel>& labels, std::size_t rounds,
                                double learning_rate, std::size_t max_depth, std::uint64_t seed) {
  require_labels_match(features, labels);
  require_both_classes(labels);
  if (rounds == 0) throw InvalidArgument("train_boosted: rounds must be positive");
  if (!(learning_rate > 0.0) || learning_rate > 1.0)
    throw InvalidArgument("train_boosted: learning_rate must be in (0, 1]");
  if (max_depth == 0) throw InvalidArgument("train_boosted: max_depth must be positive");

  const std::size_t n = features.rows;
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = labels[i] == ClassLabel::Serious ? 1.0 : 0.0;
  const double positive = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);

  BoostedTreesModel model;
  model.learning_rate = learning_rate;
  model.max_depth = max_depth;
  model.dimension = features.cols;
  model.seed = seed;
  model.base_score = std::log(positive / (1.0 - positive));

  std::vector<double> margin(n, model.base_score);
  model.train_logloss.push_back(logloss(margin, y));

  std::vector<double> residual(n), hessian(n);
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  for (std::size_t round = 0; round < rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(margin[i]);
      residual[i] = y[i] - p;
      hessian[i] = p * (1.0 - p);
    }
    TreeBuilder builder{features, residual, hessian, max_depth, {}};
    builder.build(all, 0);
    for (std::size_t i = 0; i < n; ++i)
      margin[i] += learning_rate * builder.tree.predict(features.row(i));
    model.trees.push_back(std::move(builder.tree));
    model.train_logloss.push_back(logloss(margin, y));
  }
  return model;
}

// ---------------------------------------------------------------------------
// Linear SVM
// ---------------------------------------------------------------------------

double svm_objective(const FeatureMatrix& features, const std::vector<ClassLabel>& labels,
                     double reg, const std::vector<double>& weights, double bias) {
  require_labels_match(features, labels);
  if (weights.size() != features.cols)
    throw InvalidArgument("svm_objective: weight dimension mismatch");
  double w2 = 0.0;
  for (double w : weights) w2 += w * w;
  double hinge = 0.0;
  for (std::size_t i = 0; i < features.rows; ++i) {
    const double yi = labels[i] == ClassLabel::Serious ? 1.0 : -1.0;
    double m = bias;
    auto row = features.row(i);
    for (std::size_t c = 0; c < weights.size(); ++c) m += weights[c] * row[c];
    hinge += std::max(0.0, 1.0 - yi * m);
  }
  return 0.5 * reg * w2 + hinge / static_cast<double>(features.rows);
}

LinearSvmModel train_svm(const FeatureMatrix& features, const std::vector<ClassLabel>& labels,
                         std::size_t epochs, double reg, std::uint64_t seed) {
  require_labels_match(features, labels);
  require_both_classes(labels);
  if (epochs == 0) throw InvalidArgument("train_svm: epochs must be positive");
  if (!(reg > 0.0)) throw InvalidArgument("train_svm: reg must be positive");

  const std::size_t n = features.rows;
  LinearSvmModel model;
  model.weights.assign(features.cols, 0.0);
  model.bias = 0.0;
  model.epochs = epochs;
  model.reg = reg;
  model.seed = seed;

  Rng rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t t = 0;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t i : order) {
      ++t;
      const double eta = 1.0 / (reg * static_cast<double>(t));
      const double yi = labels[i] == ClassLabel::Serious ? 1.0 : -1.0;
      const double m = yi * model.decision_margin(features.row(i));
      const double shrink = 1.0 - eta * reg;
      for (double& w : model.weights) w *= shrink;
      if (m < 1.0) {
        auto row = features.row(i);
        for (std::size_t c = 0; c < model.weights.size(); ++c)
          model.weights[c] += eta * yi * row[c];
        model.bias += eta * yi;
      }
    }
    model.objective_history.push_back(
        svm_objective(features, labels, reg, model.weights, model.bias));
  }
  return model;
}

// ---------------------------------------------------------------------------
// Prediction and evaluation
// ---------------------------------------------------------------------------

namespace {

template <class Model>
std::vector<ClassLabel> predict_by_margin(const Model& model, const FeatureMatrix& features,
                                          std::size_t dimension) {
  features.validate();
  if (features.cols != dimension)
    throw InvalidArgument("predict: feature width does not match model dimension");
  std::vector<ClassLabel> out(features.rows);
  for (std::size_t i = 0; i < features.rows; ++i)
    out[i] = model.decision_margin(features.row(i)) > 0.0 ? ClassLabel::Serious
                                                          : ClassLabel::Mild;
  return out;
}

}  // namespace

std::vector<ClassLabel> predict(const BoostedTreesModel& model, const FeatureMatrix& features) {
  return predict_by_margin(model, features, model.dimension);
}

std::vector<ClassLabel> predict(const LinearSvmModel& model, const FeatureMatrix& features) {
  return predict_by_margin(model, features, model.weights.size());
}

std::vector<ClassLabel> predict(const AnyModel& model, const FeatureMatrix& features) {
  return std::visit([&](const auto& m) { return predict(m, features); }, model);
}

std::pair<ConfusionMatrix, double> evaluate(const std::vector<ClassLabel>& predictions,
                                            const std::vector<ClassLabel>& truth) {
  if (predictions.size() != truth.size())
    throw InvalidArgument("evaluate: prediction and truth counts differ");
  if (predictions.empty()) throw InvalidArgument("evaluate: empty input");

  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool pred_serious = predictions[i] == ClassLabel::Serious;
    const bool true_serious = truth[i] == ClassLabel::Serious;
    if (pred_serious && true_serious) ++cm.tp;
    else if (!pred_serious && !true_serious) ++cm.tn;
    else if (pred_serious) ++cm.fp;
    else ++cm.fn;
  }
  const double accuracy =
      static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
  return {cm, accuracy};
}

// ---------------------------------------------------------------------------
// Model persistence
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kModelFormat = "fhb-model";
constexpr int kModelVersion = 1;

double parse_number_field(const ordered_json& j, const std::string& key) {
  const auto& field = j.at(key);
  if (!field.is_string()) throw InvalidArgument("model field " + key + " must be decimal text");
  double v;
  if (!try_parse_double(field.get<std::string>(), v))
    throw InvalidArgument("model field " + key + " is not a number");
  return v;
}

ordered_json boosted_to_json(const BoostedTreesModel& model) {
  ordered_json j;
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  j["kind"] = "boosted";
  j["seed"] = model.seed;
  j["max_depth"] = model.max_depth;
  j["dimension"] = model.dimension;
  j["learning_rate"] = format_g17(model.learning_rate);
  j["base_score"] = format_g17(model.base_score);
  ordered_json trees = ordered_json::array();
  for (const RegressionTree& tree : model.trees) {
    ordered_json nodes = ordered_json::array();
    for (const TreeNode& node : tree.nodes) {
      ordered_json n;
      n["feature"] = node.feature;
      n["threshold"] = format_g17(node.threshold);
      n["left"] = node.left;
      n["right"] = node.right;
      n["value"] = format_g17(node.value);
      nodes.push_back(std::move(n));
    }
    trees.push_back(ordered_json{{"nodes", std::move(nodes)}});
  }
  j["trees"] = std::move(trees);
  return j;
}

ordered_json svm_to_json(const LinearSvmModel& model) {
  ordered_json j;
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  j["kind"] = "svm";
  j["seed"] = model.seed;
  j["epochs"] = model.epochs;
  j["reg"] = format_g17(model.reg);
  j["bias"] = format_g17(model.bias);
  ordered_json weights = ordered_json::array();
  for (double w : model.weights) weights.push_back(format_g17(w));
  j["weights"] = std::move(weights);
  return j;
}

BoostedTreesModel boosted_from_json(const ordered_json& j) {
  BoostedTreesModel model;
  model.seed = j.at("seed").get<std::uint64_t>();
  model.max_depth = j.at("max_depth").get<std::size_t>();
  model.dimension = j.at("dimension").get<std::size_t>();
  model.learning_rate = parse_number_field(j, "learning_rate");
  model.base_score = parse_number_field(j, "base_score");
  for (const auto& jt : j.at("trees")) {
    RegressionTree tree;
    for (const auto& jn : jt.at("nodes")) {
      TreeNode node;
      node.feature = jn.at("feature").get<int>();
      node.threshold = parse_number_field(jn, "threshold");
      node.left = jn.at("left").get<int>();
      node.right = jn.at("right").get<int>();
      node.value = parse_number_field(jn, "value");
      if (node.feature >= static_cast<int>(model.dimension))
        throw InvalidArgument("model tree references an out-of-range feature");
      tree.nodes.push_back(node);
    }
    if (tree.nodes.empty()) throw InvalidArgument("model tree has no nodes");
    model.trees.push_back(std::move(tree));
  }
  return model;
}

LinearSvmModel svm_from_json(const ordered_json& j) {
  LinearSvmModel model;
  model.seed = j.at("seed").get<std::uint64_t>();
  model.epochs = j.at("epochs").get<std::size_t>();
  model.reg = parse_number_field(j, "reg");
  model.bias = parse_number_field(j, "bias");
  for (const auto& jw : j.at("weights")) {
    double w;
    if (!jw.is_string() || !try_parse_double(jw.get<std::string>(), w))
      throw InvalidArgument("model weight is not decimal text");
    model.weights.push_back(w);
  }
  return model;
}

}  // namespace

void save_model(const AnyModel& model, const std::filesystem::path& path) {
  const ordered_json j = std::holds_alternative<BoostedTreesModel>(model)
                             ? boosted_to_json(std::get<BoostedTreesModel>(model))
                             : svm_to_json(std::get<LinearSvmModel>(model));
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << "\n";
  out.flush();
  if (!out) throw IoError("write failed on " + path.string());
}

AnyModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("model file is not valid JSON: " + std::string(e.what()));
  }
  try {
    if (j.at("format").get<std::string>() != kModelFormat)
      throw InvalidArgument("not a model file");
    if (j.at("version").get<int>() != kModelVersion)
      throw InvalidArgument("unsupported model version");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "boosted") return boosted_from_json(j);
    if (kind == "svm") return svm_from_json(j);
    throw InvalidArgument("unknown model kind \"" + kind + "\"");
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("malformed model file: " + std::string(e.what()));
  }
}

}  // namespace fhb
