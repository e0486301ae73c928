#include "sentinel/classify.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "classify_impl.hpp"
#include "sentinel/error.hpp"

namespace sentinel::classify {

namespace {

constexpr std::array<std::pair<Algorithm, std::string_view>, 8> kAlgorithms{{
    {Algorithm::logreg, "logreg"},
    {Algorithm::linear_svm, "linear_svm"},
    {Algorithm::gaussian_nb, "gaussian_nb"},
    {Algorithm::knn, "knn"},
    {Algorithm::decision_tree, "decision_tree"},
    {Algorithm::random_forest, "random_forest"},
    {Algorithm::adaboost, "adaboost"},
    {Algorithm::lda, "lda"},
}};

}  // namespace

std::string_view to_string(Algorithm algorithm) {
  for (const auto& [algo, name] : kAlgorithms) {
    if (algo == algorithm) return name;
  }
  return "unknown";
}

std::optional<Algorithm> algorithm_from_string(std::string_view name) {
  for (const auto& [algo, algo_name] : kAlgorithms) {
    if (algo_name == name) return algo;
  }
  return std::nullopt;
}

const std::vector<std::string>& algorithm_names() {
  static const std::vector<std::string> kNames = [] {
    std::vector<std::string> names;
    for (const auto& [algo, name] : kAlgorithms) names.emplace_back(name);
    return names;
  }();
  return kNames;
}

void TrainingSet::validate() const {
  if (x.size() != y.size() || (!ids.empty() && ids.size() != x.size())) {
    throw Error("data", "training set fields have mismatched lengths");
  }
  if (x.empty()) throw Error("data", "training set is empty");
  const std::size_t d = x.front().size();
  if (d == 0) throw Error("data", "training vectors have dimension 0");
  bool has_pos = false;
  bool has_neg = false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i].size() != d) throw Error("data", "training vectors have inconsistent dimensions");
    for (float v : x[i]) {
      if (!std::isfinite(v)) throw Error("data", "non-finite feature value in training set");
    }
    if (y[i] == 1) {
      has_pos = true;
    } else if (y[i] == 0) {
      has_neg = true;
    } else {
      throw Error("data", "labels must be 0 or 1");
    }
  }
  if (!has_pos || !has_neg) {
    throw Error("data", "training set contains a single class; both classes are required");
  }
}

void TrainedClassifier::check_input(std::span<const float> x) const {
  if (x.size() != dim()) {
    throw Error("data", "input dimension " + std::to_string(x.size()) +
                            " does not match model dimension " + std::to_string(dim()));
  }
}

namespace detail {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double LinearModel::predict_proba(std::span<const float> x) const {
  check_input(x);
  double z = bias_;
  for (std::size_t i = 0; i < weights_.size(); ++i) z += weights_[i] * x[i];
  return sigmoid(z);
}

json LinearModel::to_json() const {
  return json{{"weights", weights_}, {"bias", bias_}};
}

// --- logistic regression: full-batch gradient descent with L2 ---

std::unique_ptr<TrainedClassifier> LogisticRegression::fit(const Hyperparameters& p,
                                                           const TrainingSet& data) {
  const std::size_t n = data.size();
  const std::size_t d = data.dim();
  std::vector<double> w(d, 0.0);
  double b = 0.0;
  std::vector<double> grad(d);
  for (int it = 0; it < p.logreg_iterations; ++it) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double z = b;
      for (std::size_t j = 0; j < d; ++j) z += w[j] * data.x[i][j];
      const double delta = sigmoid(z) - data.y[i];
      for (std::size_t j = 0; j < d; ++j) grad[j] += delta * data.x[i][j];
      grad_b += delta;
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < d; ++j) {
      w[j] -= p.logreg_lr * (grad[j] * inv_n + p.logreg_l2 * w[j]);
    }
    b -= p.logreg_lr * grad_b * inv_n;
  }
  return std::make_unique<LogisticRegression>(std::move(w), b);
}

std::unique_ptr<TrainedClassifier> LogisticRegression::from_json(const json& doc) {
  return std::make_unique<LogisticRegression>(doc.at("weights").get<std::vector<double>>(),
                                              doc.at("bias").get<double>());
}

// --- linear SVM: hinge-loss SGD, logistic-calibrated scores ---

std::unique_ptr<TrainedClassifier> LinearSvm::fit(const Hyperparameters& p,
                                                  const TrainingSet& data) {
  const std::size_t n = data.size();
  const std::size_t d = data.dim();
  std::vector<double> w(d, 0.0);
  double b = 0.0;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(p.seed);
  for (int epoch = 0; epoch < p.svm_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const double lr = p.svm_lr / (1.0 + static_cast<double>(epoch) * 0.1);
    for (int i : order) {
      const double target = data.y[i] == 1 ? 1.0 : -1.0;
      double z = b;
      for (std::size_t j = 0; j < d; ++j) z += w[j] * data.x[i][j];
      const double decay = 1.0 - lr * p.svm_l2;
      if (target * z < 1.0) {
        for (std::size_t j = 0; j < d; ++j) {
          w[j] = w[j] * decay + lr * target * data.x[i][j];
        }
        b += lr * target;
      } else {
        for (double& wj : w) wj *= decay;
      }
    }
  }
  return std::make_unique<LinearSvm>(std::move(w), b);
}

std::unique_ptr<TrainedClassifier> LinearSvm::from_json(const json& doc) {
  return std::make_unique<LinearSvm>(doc.at("weights").get<std::vector<double>>(),
                                     doc.at("bias").get<double>());
}

// --- LDA: closed form, shared covariance with ridge ---

namespace {

// Solves A x = rhs for symmetric positive definite A via Cholesky.
std::vector<double> cholesky_solve(std::vector<double> a, std::vector<double> rhs, std::size_t d) {
  for (std::size_t j = 0; j < d; ++j) {
    double diag = a[j * d + j];
    for (std::size_t k = 0; k < j; ++k) diag -= a[j * d + k] * a[j * d + k];
    if (diag <= 0.0) throw Error("train", "covariance matrix is not positive definite");
    const double l = std::sqrt(diag);
    a[j * d + j] = l;
    for (std::size_t i = j + 1; i < d; ++i) {
      double v = a[i * d + j];
      for (std::size_t k = 0; k < j; ++k) v -= a[i * d + k] * a[j * d + k];
      a[i * d + j] = v / l;
    }
  }
  // forward: L z = rhs
  for (std::size_t i = 0; i < d; ++i) {
    double v = rhs[i];
    for (std::size_t k = 0; k < i; ++k) v -= a[i * d + k] * rhs[k];
    rhs[i] = v / a[i * d + i];
  }
  // backward: L^T x = z
  for (std::size_t i = d; i-- > 0;) {
    double v = rhs[i];
    for (std::size_t k = i + 1; k < d; ++k) v -= a[k * d + i] * rhs[k];
    rhs[i] = v / a[i * d + i];
  }
  return rhs;
}

}  // namespace

std::unique_ptr<TrainedClassifier> Lda::fit(const Hyperparameters& p, const TrainingSet& data) {
  const std::size_t n = data.size();
  const std::size_t d = data.dim();
  std::array<std::vector<double>, 2> mean{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  std::array<std::size_t, 2> count{0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    const int c = data.y[i];
    ++count[c];
    for (std::size_t j = 0; j < d; ++j) mean[c][j] += data.x[i][j];
  }
  for (int c = 0; c < 2; ++c) {
    for (double& v : mean[c]) v /= static_cast<double>(count[c]);
  }

  std::vector<double> cov(d * d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<double>& mu = mean[data.y[i]];
    for (std::size_t j = 0; j < d; ++j) {
      const double dj = data.x[i][j] - mu[j];
      for (std::size_t k = j; k < d; ++k) {
        cov[j * d + k] += dj * (data.x[i][k] - mu[k]);
      }
    }
  }
  const double denom = n > 2 ? static_cast<double>(n - 2) : 1.0;
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t k = j; k < d; ++k) {
      const double v = cov[j * d + k] / denom;
      cov[j * d + k] = v;
      cov[k * d + j] = v;
    }
    cov[j * d + j] += p.lda_ridge;
  }

  std::vector<double> diff(d);
  for (std::size_t j = 0; j < d; ++j) diff[j] = mean[1][j] - mean[0][j];
  std::vector<double> w = cholesky_solve(std::move(cov), std::move(diff), d);

  double midpoint = 0.0;
  for (std::size_t j = 0; j < d; ++j) midpoint += w[j] * (mean[0][j] + mean[1][j]);
  const double bias = -0.5 * midpoint +
                      std::log(static_cast<double>(count[1]) / static_cast<double>(count[0]));
  return std::make_unique<Lda>(std::move(w), bias);
}

std::unique_ptr<TrainedClassifier> Lda::from_json(const json& doc) {
  return std::make_unique<Lda>(doc.at("weights").get<std::vector<double>>(),
                               doc.at("bias").get<double>());
}

// --- Gaussian naive Bayes ---

double GaussianNaiveBayes::predict_proba(std::span<const float> x) const {
  check_input(x);
  std::array<double, 2> log_post{log_prior_[0], log_prior_[1]};
  for (int c = 0; c < 2; ++c) {
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double v = var_[c][j];
      const double diff = x[j] - mean_[c][j];
      log_post[c] += -0.5 * (std::log(2.0 * M_PI * v) + diff * diff / v);
    }
  }
  const double m = std::max(log_post[0], log_post[1]);
  const double e0 = std::exp(log_post[0] - m);
  const double e1 = std::exp(log_post[1] - m);
  return e1 / (e0 + e1);
}

json GaussianNaiveBayes::to_json() const {
  return json{{"log_prior", log_prior_},
              {"mean0", mean_[0]},
              {"mean1", mean_[1]},
              {"var0", var_[0]},
              {"var1", var_[1]}};
}

std::unique_ptr<TrainedClassifier> GaussianNaiveBayes::fit(const Hyperparameters&,
                                                           const TrainingSet& data) {
  const std::size_t n = data.size();
  const std::size_t d = data.dim();
  std::array<std::vector<double>, 2> mean{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  std::array<std::vector<double>, 2> var{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  std::array<std::size_t, 2> count{0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    const int c = data.y[i];
    ++count[c];
    for (std::size_t j = 0; j < d; ++j) mean[c][j] += data.x[i][j];
  }
  for (int c = 0; c < 2; ++c) {
    for (double& v : mean[c]) v /= static_cast<double>(count[c]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const int c = data.y[i];
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = data.x[i][j] - mean[c][j];
      var[c][j] += diff * diff;
    }
  }
  // Variance floor follows the common var_smoothing treatment: a fraction
  // of the largest overall feature variance, with an absolute floor.
  double max_var = 0.0;
  {
    std::vector<double> overall_mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) overall_mean[j] += data.x[i][j];
    }
    for (double& v : overall_mean) v /= static_cast<double>(n);
    for (std::size_t j = 0; j < d; ++j) {
      double v = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double diff = data.x[i][j] - overall_mean[j];
        v += diff * diff;
      }
      max_var = std::max(max_var, v / static_cast<double>(n));
    }
  }
  const double smoothing = std::max(1e-9 * max_var, 1e-12);
  for (int c = 0; c < 2; ++c) {
    for (std::size_t j = 0; j < d; ++j) {
      var[c][j] = var[c][j] / static_cast<double>(count[c]) + smoothing;
    }
  }
  std::array<double, 2> log_prior{
      std::log(static_cast<double>(count[0]) / static_cast<double>(n)),
      std::log(static_cast<double>(count[1]) / static_cast<double>(n))};
  return std::make_unique<GaussianNaiveBayes>(log_prior, std::move(mean), std::move(var));
}

std::unique_ptr<TrainedClassifier> GaussianNaiveBayes::from_json(const json& doc) {
  return std::make_unique<GaussianNaiveBayes>(
      doc.at("log_prior").get<std::array<double, 2>>(),
      std::array<std::vector<double>, 2>{doc.at("mean0").get<std::vector<double>>(),
                                         doc.at("mean1").get<std::vector<double>>()},
      std::array<std::vector<double>, 2>{doc.at("var0").get<std::vector<double>>(),
                                         doc.at("var1").get<std::vector<double>>()});
}

// --- k nearest neighbours ---

double Knn::predict_proba(std::span<const float> x) const {
  check_input(x);
  std::vector<std::pair<double, int>> distances;
  distances.reserve(x_.size());
  for (std::size_t i = 0; i < x_.size(); ++i) {
    double d2 = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double diff = static_cast<double>(x_[i][j]) - static_cast<double>(x[j]);
      d2 += diff * diff;
    }
    distances.emplace_back(d2, static_cast<int>(i));
  }
  const std::size_t k = static_cast<std::size_t>(k_);
  std::partial_sort(distances.begin(), distances.begin() + k, distances.end());
  int accepts = 0;
  for (std::size_t i = 0; i < k; ++i) accepts += y_[distances[i].second];
  return static_cast<double>(accepts) / static_cast<double>(k);
}

json Knn::to_json() const {
  return json{{"k", k_}, {"x", x_}, {"y", y_}};
}

std::unique_ptr<TrainedClassifier> Knn::fit(const Hyperparameters& p, const TrainingSet& data) {
  if (p.knn_k < 1 || static_cast<std::size_t>(p.knn_k) > data.size()) {
    throw Error("config", "knn_k must be in [1, n_samples]");
  }
  return std::make_unique<Knn>(p.knn_k, data.x, data.y);
}

std::unique_ptr<TrainedClassifier> Knn::from_json(const json& doc) {
  return std::make_unique<Knn>(doc.at("k").get<int>(),
                               doc.at("x").get<std::vector<std::vector<float>>>(),
                               doc.at("y").get<std::vector<int>>());
}

std::unique_ptr<TrainedClassifier> classifier_from_json(const json& doc) {
  const std::string name = doc.at("algorithm").get<std::string>();
  const json& params = doc.at("model");
  if (name == "logreg") return LogisticRegression::from_json(params);
  if (name == "linear_svm") return LinearSvm::from_json(params);
  if (name == "lda") return Lda::from_json(params);
  if (name == "gaussian_nb") return GaussianNaiveBayes::from_json(params);
  if (name == "knn") return Knn::from_json(params);
  if (name == "decision_tree") return DecisionTree::from_json(params);
  if (name == "random_forest") return RandomForest::from_json(params);
  if (name == "adaboost") return AdaBoost::from_json(params);
  if (name == "voting") return VotingEnsemble::from_json(params);
  if (name == "stacking") return StackingEnsemble::from_json(params);
  throw Error("format", "unknown classifier algorithm '" + name + "'");
}

}  // namespace detail

std::unique_ptr<TrainedClassifier> fit(Algorithm algorithm, const Hyperparameters& params,
                                       const TrainingSet& data) {
  data.validate();
  const auto started = std::chrono::steady_clock::now();
  std::unique_ptr<TrainedClassifier> model;
  switch (algorithm) {
    case Algorithm::logreg: model = detail::LogisticRegression::fit(params, data); break;
    case Algorithm::linear_svm: model = detail::LinearSvm::fit(params, data); break;
    case Algorithm::gaussian_nb: model = detail::GaussianNaiveBayes::fit(params, data); break;
    case Algorithm::knn: model = detail::Knn::fit(params, data); break;
    case Algorithm::decision_tree: model = detail::DecisionTree::fit(params, data); break;
    case Algorithm::random_forest: model = detail::RandomForest::fit(params, data); break;
    case Algorithm::adaboost: model = detail::AdaBoost::fit(params, data); break;
    case Algorithm::lda: model = detail::Lda::fit(params, data); break;
  }
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
  model->set_fit_seconds(elapsed.count());
  return model;
}

}  // namespace sentinel::classify
