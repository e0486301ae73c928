#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sentinel::classify {

enum class Algorithm {
  logreg,
  linear_svm,
  gaussian_nb,
  knn,
  decision_tree,
  random_forest,
  adaboost,
  lda,
};

std::string_view to_string(Algorithm algorithm);
std::optional<Algorithm> algorithm_from_string(std::string_view name);
const std::vector<std::string>& algorithm_names();

struct TrainingSet {
  std::vector<std::vector<float>> x;
  std::vector<int> y;  // labels in {0, 1}
  std::vector<std::string> ids;

  std::size_t size() const { return x.size(); }
  std::size_t dim() const { return x.empty() ? 0 : x.front().size(); }
  // Throws Error("data") on: size mismatches, zero-dimensional or ragged
  // vectors, non-finite features, labels outside {0,1}, single-class data.
  void validate() const;
};

// One flat bag of per-algorithm settings; every field is config-exposed.
struct Hyperparameters {
  double logreg_lr = 0.5;
  int logreg_iterations = 500;
  double logreg_l2 = 1e-4;

  double svm_lr = 0.05;
  int svm_epochs = 200;
  double svm_l2 = 1e-3;

  int knn_k = 5;

  int tree_max_depth = 0;  // 0 = unlimited
  int tree_min_samples_split = 2;

  int forest_trees = 100;
  int forest_max_features = 0;  // 0 = round(sqrt(dim))

  int adaboost_rounds = 50;

  double lda_ridge = 1e-6;

  std::uint64_t seed = 1;
};

// A fitted, immutable decision function. predict follows the strict
// probability threshold: exactly 0.5 predicts reject (0). Safe for
// concurrent prediction.
class TrainedClassifier {
 public:
  virtual ~TrainedClassifier() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dim() const = 0;
  // eta(x) in [0, 1]; margin-only algorithms squash their signed margin
  // through the logistic function.
  virtual double predict_proba(std::span<const float> x) const = 0;
  virtual int predict(std::span<const float> x) const { return predict_proba(x) > 0.5 ? 1 : 0; }

  double fit_seconds() const { return fit_seconds_; }
  void set_fit_seconds(double s) { fit_seconds_ = s; }

 protected:
  void check_input(std::span<const float> x) const;

 private:
  double fit_seconds_ = 0.0;
};

std::unique_ptr<TrainedClassifier> fit(Algorithm algorithm, const Hyperparameters& params,
                                       const TrainingSet& data);

struct EnsembleSpec {
  enum class Kind { voting, stacking };
  Kind kind = Kind::voting;
  std::vector<Algorithm> members;
  Hyperparameters member_params;
  Algorithm final_estimator = Algorithm::decision_tree;  // stacking only
  int cv_folds = 5;                                      // stacking only

  // Five members: an odd count cannot tie under hard voting.
  static EnsembleSpec default_voting();
  static EnsembleSpec default_stacking();
};

// Hard-majority vote for predict; mean member probability for
// predict_proba. With an even member count, ties resolve to reject.
std::unique_ptr<TrainedClassifier> fit_voting(const EnsembleSpec& spec, const TrainingSet& data);

// Out-of-fold member probabilities (seeded stratified k-fold) feed the
// final estimator; members are refit on the full data for inference.
std::unique_ptr<TrainedClassifier> fit_stacking(const EnsembleSpec& spec, const TrainingSet& data);

// Classifier files are versioned JSON documents; the fingerprint ties a
// classifier to the embedding model that produced its features.
struct ModelFingerprint {
  std::uint32_t crc32c = 0;
  int dim = 0;
};

void save_classifier(const TrainedClassifier& model, const std::filesystem::path& path,
                     const ModelFingerprint& embedding);

struct LoadedClassifier {
  std::unique_ptr<TrainedClassifier> model;
  ModelFingerprint embedding;
};
LoadedClassifier load_classifier(const std::filesystem::path& path);

}  // namespace sentinel::classify
