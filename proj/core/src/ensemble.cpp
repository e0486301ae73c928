#include <algorithm>
#include <chrono>
#include <numeric>
#include <random>

#include "classify_impl.hpp"
#include "sentinel/error.hpp"
#include "sentinel/util.hpp"

namespace sentinel::classify {

namespace detail {

double VotingEnsemble::predict_proba(std::span<const float> x) const {
  double sum = 0.0;
  for (const auto& member : members_) sum += member->predict_proba(x);
  return sum / static_cast<double>(members_.size());
}

int VotingEnsemble::predict(std::span<const float> x) const {
  std::size_t accepts = 0;
  for (const auto& member : members_) {
    accepts += static_cast<std::size_t>(member->predict(x));
  }
  return 2 * accepts > members_.size() ? 1 : 0;
}

json VotingEnsemble::to_json() const {
  json members = json::array();
  for (const auto& member : members_) {
    const auto* serializable = dynamic_cast<const SerializableClassifier*>(member.get());
    members.push_back({{"algorithm", member->name()}, {"model", serializable->to_json()}});
  }
  return json{{"members", std::move(members)}};
}

std::unique_ptr<TrainedClassifier> VotingEnsemble::from_json(const json& doc) {
  std::vector<std::unique_ptr<TrainedClassifier>> members;
  for (const json& member : doc.at("members")) {
    members.push_back(classifier_from_json(member));
  }
  return std::make_unique<VotingEnsemble>(std::move(members));
}

std::vector<float> StackingEnsemble::meta_features(std::span<const float> x) const {
  std::vector<float> meta(members_.size());
  for (std::size_t i = 0; i < members_.size(); ++i) {
    meta[i] = static_cast<float>(members_[i]->predict_proba(x));
  }
  return meta;
}

double StackingEnsemble::predict_proba(std::span<const float> x) const {
  check_input(x);
  return final_estimator_->predict_proba(meta_features(x));
}

json StackingEnsemble::to_json() const {
  json members = json::array();
  for (const auto& member : members_) {
    const auto* serializable = dynamic_cast<const SerializableClassifier*>(member.get());
    members.push_back({{"algorithm", member->name()}, {"model", serializable->to_json()}});
  }
  const auto* final_serializable =
      dynamic_cast<const SerializableClassifier*>(final_estimator_.get());
  return json{{"members", std::move(members)},
              {"final", {{"algorithm", final_estimator_->name()},
                         {"model", final_serializable->to_json()}}}};
}

std::unique_ptr<TrainedClassifier> StackingEnsemble::from_json(const json& doc) {
  std::vector<std::unique_ptr<TrainedClassifier>> members;
  for (const json& member : doc.at("members")) {
    members.push_back(classifier_from_json(member));
  }
  return std::make_unique<StackingEnsemble>(std::move(members),
                                            classifier_from_json(doc.at("final")));
}

}  // namespace detail

EnsembleSpec EnsembleSpec::default_voting() {
  EnsembleSpec spec;
  spec.kind = Kind::voting;
  spec.members = {Algorithm::logreg, Algorithm::linear_svm, Algorithm::adaboost, Algorithm::lda,
                  Algorithm::random_forest};
  return spec;
}

EnsembleSpec EnsembleSpec::default_stacking() {
  EnsembleSpec spec = default_voting();
  spec.kind = Kind::stacking;
  spec.final_estimator = Algorithm::decision_tree;
  spec.cv_folds = 5;
  return spec;
}

std::unique_ptr<TrainedClassifier> fit_voting(const EnsembleSpec& spec, const TrainingSet& data) {
  if (spec.kind != EnsembleSpec::Kind::voting) throw Error("config", "spec kind is not voting");
  if (spec.members.empty()) throw Error("config", "voting ensemble needs at least one member");
  data.validate();
  const auto started = std::chrono::steady_clock::now();
  std::vector<std::unique_ptr<TrainedClassifier>> members;
  members.reserve(spec.members.size());
  for (Algorithm algorithm : spec.members) {
    members.push_back(fit(algorithm, spec.member_params, data));
  }
  auto model = std::make_unique<detail::VotingEnsemble>(std::move(members));
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
  model->set_fit_seconds(elapsed.count());
  return model;
}

namespace {

// Seeded stratified fold assignment: indices of each class are shuffled and
// dealt round-robin across folds.
std::vector<int> stratified_folds(const TrainingSet& data, int folds, std::uint64_t seed) {
  std::vector<int> assignment(data.size(), 0);
  std::mt19937_64 rng(seed);
  for (int label : {0, 1}) {
    std::vector<int> indices;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data.y[i] == label) indices.push_back(static_cast<int>(i));
    }
    std::shuffle(indices.begin(), indices.end(), rng);
    for (std::size_t i = 0; i < indices.size(); ++i) {
      assignment[static_cast<std::size_t>(indices[i])] = static_cast<int>(i) % folds;
    }
  }
  return assignment;
}

}  // namespace

std::unique_ptr<TrainedClassifier> fit_stacking(const EnsembleSpec& spec,
                                                const TrainingSet& data) {
  if (spec.kind != EnsembleSpec::Kind::stacking) throw Error("config", "spec kind is not stacking");
  if (spec.members.empty()) throw Error("config", "stacking ensemble needs at least one member");
  if (spec.cv_folds < 2) throw Error("config", "stacking requires cv_folds >= 2");
  data.validate();
  const auto started = std::chrono::steady_clock::now();

  const std::vector<int> folds = stratified_folds(data, spec.cv_folds, spec.member_params.seed);

  // Out-of-fold probabilities become the meta-features.
  TrainingSet meta;
  meta.x.assign(data.size(), std::vector<float>(spec.members.size(), 0.0f));
  meta.y = data.y;
  meta.ids = data.ids;
  for (int fold = 0; fold < spec.cv_folds; ++fold) {
    TrainingSet train_fold;
    std::vector<std::size_t> holdout;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (folds[i] == fold) {
        holdout.push_back(i);
      } else {
        train_fold.x.push_back(data.x[i]);
        train_fold.y.push_back(data.y[i]);
      }
    }
    if (holdout.empty()) continue;
    const bool has_both =
        std::find(train_fold.y.begin(), train_fold.y.end(), 0) != train_fold.y.end() &&
        std::find(train_fold.y.begin(), train_fold.y.end(), 1) != train_fold.y.end();
    if (!has_both) {
      throw Error("data", "stacking fold " + std::to_string(fold) +
                              " leaves a single-class training set; reduce cv_folds");
    }
    for (std::size_t m = 0; m < spec.members.size(); ++m) {
      const auto member = fit(spec.members[m], spec.member_params, train_fold);
      for (std::size_t i : holdout) {
        meta.x[i][m] = static_cast<float>(member->predict_proba(data.x[i]));
      }
    }
  }

  auto final_estimator = fit(spec.final_estimator, spec.member_params, meta);

  // Refit members on the full data for inference.
  std::vector<std::unique_ptr<TrainedClassifier>> members;
  members.reserve(spec.members.size());
  for (Algorithm algorithm : spec.members) {
    members.push_back(fit(algorithm, spec.member_params, data));
  }
  auto model =
      std::make_unique<detail::StackingEnsemble>(std::move(members), std::move(final_estimator));
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
  model->set_fit_seconds(elapsed.count());
  return model;
}

namespace {

constexpr int kClassifierFormatVersion = 1;

}  // namespace

void save_classifier(const TrainedClassifier& model, const std::filesystem::path& path,
                     const ModelFingerprint& embedding) {
  const auto* serializable = dynamic_cast<const detail::SerializableClassifier*>(&model);
  if (serializable == nullptr) {
    throw Error("model", "classifier type '" + model.name() + "' is not serializable");
  }
  nlohmann::ordered_json doc;
  doc["format_version"] = kClassifierFormatVersion;
  doc["algorithm"] = model.name();
  doc["embedding"] = {{"crc32c", embedding.crc32c}, {"dim", embedding.dim}};
  doc["fit_seconds"] = model.fit_seconds();
  doc["model"] = serializable->to_json();
  util::write_file(path, doc.dump(2) + "\n");
}

LoadedClassifier load_classifier(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(util::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error("parse", "classifier file " + path.string() + ": " + e.what());
  }
  const int version = doc.at("format_version").get<int>();
  if (version > kClassifierFormatVersion) {
    throw Error("format", "classifier format version " + std::to_string(version) +
                              " is newer than supported version " +
                              std::to_string(kClassifierFormatVersion));
  }
  LoadedClassifier loaded;
  loaded.embedding.crc32c = doc.at("embedding").at("crc32c").get<std::uint32_t>();
  loaded.embedding.dim = doc.at("embedding").at("dim").get<int>();
  loaded.model = detail::classifier_from_json(
      nlohmann::json{{"algorithm", doc.at("algorithm")}, {"model", doc.at("model")}});
  return loaded;
}

}  // namespace sentinel::classify
