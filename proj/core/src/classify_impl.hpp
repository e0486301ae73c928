#pragma once

// Internal: concrete classifier types shared by classify.cpp, trees.cpp and
// ensemble.cpp. Not installed.

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sentinel/classify.hpp"

namespace sentinel::classify::detail {

using nlohmann::json;

class SerializableClassifier : public TrainedClassifier {
 public:
  virtual json to_json() const = 0;
};

std::unique_ptr<TrainedClassifier> classifier_from_json(const json& doc);

class LinearModel : public SerializableClassifier {
 public:
  LinearModel(std::vector<double> weights, double bias)
      : weights_(std::move(weights)), bias_(bias) {}

  std::size_t dim() const override { return weights_.size(); }
  double predict_proba(std::span<const float> x) const override;

  json to_json() const override;

 protected:
  std::vector<double> weights_;
  double bias_;
};

class LogisticRegression final : public LinearModel {
 public:
  using LinearModel::LinearModel;
  std::string name() const override { return "logreg"; }
  static std::unique_ptr<TrainedClassifier> fit(const Hyperparameters& p, const TrainingSet& data);
  static std::unique_ptr<TrainedClassifier> from_json(const json& doc);
};

class LinearSvm final : public LinearModel {
 public:
  using LinearModel::LinearModel;
  std::string name() const override { return "linear_svm"; }
  static std::unique_ptr<TrainedClassifier> fit(const Hyperparameters& p, const TrainingSet& data);
  static std::unique_ptr<TrainedClassifier> from_json(const json& doc);
};

class Lda final : public LinearModel {
 public:
  using LinearModel::LinearModel;
  std::string name() const override { return "lda"; }
  static std::unique_ptr<TrainedClassifier> fit(const Hyperparameters& p, const TrainingSet& data);
  static std::unique_ptr<TrainedClassifier> from_json(const json& doc);
};

class GaussianNaiveBayes final : public SerializableClassifier {
 public:
  GaussianNaiveBayes(std::array<double, 2> log_prior, std::array<std::vector<double>, 2> mean,
                     std::array<std::vector<double>, 2> var)
      : log_prior_(log_prior), mean_(std::move(mean)), var_(std::move(var)) {}

  std::string name() const override { return "gaussian_nb"; }
  std::size_t dim() const override { return mean_[0].size(); }
  double predict_proba(std::span<const float> x) const override;
  json to_json() const override;

  static std::unique_ptr<TrainedClassifier> fit(const Hyperparameters& p, const TrainingSet& data);
  static std::unique_ptr<TrainedClassifier> from_json(const json& doc);

 private:
  std::array<double, 2> log_prior_;
  std::array<std::vector<double>, 2> mean_;
  std::array<std::vector<double>, 2> var_;
};

class Knn final : public SerializableClassifier {
 public:
  Knn(int k, std::vector<std::vector<float>> x, std::vector<int> y)
      : k_(k), x_(std::move(x)), y_(std::move(y)) {}

  std::string name() const override { return "knn"; }
  std::size_t dim() const override { return x_.empty() ? 0 : x_.front().size(); }
  double predict_proba(std::span<const float> x) const override;
  json to_json() const override;

  static std::unique_ptr<TrainedClassifier> fit(const Hyperparameters& p, const TrainingSet& data);
  static std::unique_ptr<TrainedClassifier> from_json(const json& doc);

 private:
  int k_;
  std::vector<std::vector<float>> x_;
  std::vector<int> y_;
};

// CART nodes; feature < 0 marks a leaf carrying the accept fraction.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double proba = 0.0;
};

struct TreeBuildOptions {
  int max_depth = 0;  // 0 = unlimited
  int min_samples_split = 2;
  int max_features = 0;  // 0 = all features at every split
  std::uint64_t seed = 0;
};

std::vector<TreeNode> build_tree(const TrainingSet& data, std::span<const int> sample_indices,
                                 const TreeBuildOptions& options);
double tree_proba(std::span<const TreeNode> nodes, std::span<const float> x);
json tree_to_json(std::span<const TreeNode> nodes);
std::vector<TreeNode> tree_from_json(const json& doc);

class DecisionTree final : public SerializableClassifier {
 public:
  DecisionTree(std::vector<TreeNode> nodes, std::size_t dim)
      : nodes_(std::move(nodes)), dim_(dim) {}

  std::string name() const override { return "decision_tree"; }
  std::size_t dim() const override { return dim_; }
  double predict_proba(std::span<const float> x) const override;
  json to_json() const override;

  static std::unique_ptr<TrainedClassifier> fit(const Hyperparameters& p, const TrainingSet& data);
  static std::unique_ptr<TrainedClassifier> from_json(const json& doc);

 private:
  std::vector<TreeNode> nodes_;
  std::size_t dim_;
};

class RandomForest final : public SerializableClassifier {
 public:
  RandomForest(std::vector<std::vector<TreeNode>> trees, std::size_t dim)
      : trees_(std::move(trees)), dim_(dim) {}

  std::string name() const override { return "random_forest"; }
  std::size_t dim() const override { return dim_; }
  double predict_proba(std::span<const float> x) const override;
  json to_json() const override;

  static std::unique_ptr<TrainedClassifier> fit(const Hyperparameters& p, const TrainingSet& data);
  static std::unique_ptr<TrainedClassifier> from_json(const json& doc);

 private:
  std::vector<std::vector<TreeNode>> trees_;
  std::size_t dim_;
};

class AdaBoost final : public SerializableClassifier {
 public:
  struct Stump {
    int feature = 0;
    double threshold = 0.0;
    // +1: predict accept when x[feature] > threshold; -1: flipped.
    int polarity = 1;
    double alpha = 0.0;

    int predict(std::span<const float> x) const {
      const int raw = x[feature] > threshold ? 1 : 0;
      return polarity > 0 ? raw : 1 - raw;
    }
  };

  AdaBoost(std::vector<Stump> stumps, std::size_t dim) : stumps_(std::move(stumps)), dim_(dim) {}

  std::string name() const override { return "adaboost"; }
  std::size_t dim() const override { return dim_; }
  double predict_proba(std::span<const float> x) const override;
  json to_json() const override;

  static std::unique_ptr<TrainedClassifier> fit(const Hyperparameters& p, const TrainingSet& data);
  static std::unique_ptr<TrainedClassifier> from_json(const json& doc);

 private:
  std::vector<Stump> stumps_;
  std::size_t dim_;
};

class VotingEnsemble final : public SerializableClassifier {
 public:
  explicit VotingEnsemble(std::vector<std::unique_ptr<TrainedClassifier>> members)
      : members_(std::move(members)) {}

  std::string name() const override { return "voting"; }
  std::size_t dim() const override { return members_.front()->dim(); }
  double predict_proba(std::span<const float> x) const override;
  // Hard majority vote; even-count ties resolve to reject.
  int predict(std::span<const float> x) const override;
  json to_json() const override;

  static std::unique_ptr<TrainedClassifier> from_json(const json& doc);

 private:
  std::vector<std::unique_ptr<TrainedClassifier>> members_;
};

class StackingEnsemble final : public SerializableClassifier {
 public:
  StackingEnsemble(std::vector<std::unique_ptr<TrainedClassifier>> members,
                   std::unique_ptr<TrainedClassifier> final_estimator)
      : members_(std::move(members)), final_estimator_(std::move(final_estimator)) {}

  std::string name() const override { return "stacking"; }
  std::size_t dim() const override { return members_.front()->dim(); }
  double predict_proba(std::span<const float> x) const override;
  json to_json() const override;

  static std::unique_ptr<TrainedClassifier> from_json(const json& doc);

 private:
  std::vector<float> meta_features(std::span<const float> x) const;

  std::vector<std::unique_ptr<TrainedClassifier>> members_;
  std::unique_ptr<TrainedClassifier> final_estimator_;
};

double sigmoid(double x);

}  // namespace sentinel::classify::detail
