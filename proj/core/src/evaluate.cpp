#include "sentinel/evaluate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <unordered_map>

#include <json.hpp>

#include "sentinel/error.hpp"
#include "sentinel/util.hpp"

namespace sentinel::evaluate {

namespace {

using nlohmann::ordered_json;

ordered_json report_to_json(const EvalReport& report) {
  ordered_json doc;
  doc["algorithm"] = report.algorithm;
  doc["accuracy"] = report.accuracy;
  doc["f1"] = report.f1;
  if (report.auc.has_value()) {
    doc["auc"] = *report.auc;
  } else {
    doc["auc"] = nullptr;
  }
  doc["confusion"] = {{"tp", report.confusion.tp},
                      {"fp", report.confusion.fp},
                      {"fn", report.confusion.fn},
                      {"tn", report.confusion.tn}};
  doc["train_time_s"] = report.train_time_s;
  doc["test_time_s"] = report.test_time_s;
  doc["per_slice"] = report.per_slice;
  return doc;
}

EvalReport report_from_json(const nlohmann::json& doc) {
  EvalReport report;
  report.algorithm = doc.at("algorithm").get<std::string>();
  report.accuracy = doc.at("accuracy").get<double>();
  report.f1 = doc.at("f1").get<double>();
  if (!doc.at("auc").is_null()) report.auc = doc.at("auc").get<double>();
  const auto& confusion = doc.at("confusion");
  report.confusion.tp = confusion.at("tp").get<std::int64_t>();
  report.confusion.fp = confusion.at("fp").get<std::int64_t>();
  report.confusion.fn = confusion.at("fn").get<std::int64_t>();
  report.confusion.tn = confusion.at("tn").get<std::int64_t>();
  report.train_time_s = doc.at("train_time_s").get<double>();
  report.test_time_s = doc.at("test_time_s").get<double>();
  report.per_slice = doc.at("per_slice").get<std::map<std::string, double>>();
  return report;
}

}  // namespace

std::string EvalReport::to_json_string() const { return report_to_json(*this).dump(); }

EvalReport EvalReport::from_json_string(std::string_view text) {
  try {
    return report_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw Error("parse", std::string("report: ") + e.what());
  }
}

bool EvalReport::deterministic_equal(const EvalReport& other) const {
  return algorithm == other.algorithm && accuracy == other.accuracy && f1 == other.f1 &&
         auc == other.auc && confusion == other.confusion && per_slice == other.per_slice;
}

EvalReport compute_metrics(std::span<const int> y_true, std::span<const int> y_pred,
                           std::span<const double> scores) {
  if (y_true.empty()) throw Error("data", "compute_metrics: empty input");
  if (y_true.size() != y_pred.size()) {
    throw Error("data", "compute_metrics: y_true and y_pred lengths differ");
  }
  if (!scores.empty() && scores.size() != y_true.size()) {
    throw Error("data", "compute_metrics: scores length differs from labels");
  }

  EvalReport report;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if ((y_true[i] != 0 && y_true[i] != 1) || (y_pred[i] != 0 && y_pred[i] != 1)) {
      throw Error("data", "compute_metrics: labels must be 0 or 1");
    }
    if (y_true[i] == 1) {
      y_pred[i] == 1 ? ++report.confusion.tp : ++report.confusion.fn;
    } else {
      y_pred[i] == 1 ? ++report.confusion.fp : ++report.confusion.tn;
    }
  }
  const auto& c = report.confusion;
  const double total = static_cast<double>(c.tp + c.fp + c.fn + c.tn);
  report.accuracy = static_cast<double>(c.tp + c.tn) / total;
  const double precision =
      c.tp + c.fp > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
  const double recall =
      c.tp + c.fn > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
  report.f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;

  const std::int64_t n_pos = c.tp + c.fn;
  const std::int64_t n_neg = c.fp + c.tn;
  if (!scores.empty() && n_pos > 0 && n_neg > 0) {
    // Mann-Whitney rank statistic with tie-averaged ranks.
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::vector<double> ranks(scores.size());
    std::size_t i = 0;
    while (i < order.size()) {
      std::size_t j = i;
      while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
      const double mean_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
      i = j + 1;
    }
    double pos_rank_sum = 0.0;
    for (std::size_t k = 0; k < scores.size(); ++k) {
      if (y_true[k] == 1) pos_rank_sum += ranks[k];
    }
    const double np = static_cast<double>(n_pos);
    const double nn = static_cast<double>(n_neg);
    report.auc = (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
  }
  return report;
}

SplitResult split(std::span<const int> labels, const SplitSpec& spec) {
  if (spec.train_fraction <= 0.0 || spec.train_fraction >= 1.0) {
    throw Error("config", "train_fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    (labels[i] == 1 ? pos : neg).push_back(i);
  }
  if (pos.empty() || neg.empty()) {
    throw Error("data", "split requires both classes to be present");
  }

  std::mt19937_64 rng(spec.seed);
  SplitResult result;
  auto assign = [&](std::vector<std::size_t>& group) {
    std::shuffle(group.begin(), group.end(), rng);
    std::size_t train_count = static_cast<std::size_t>(
        std::llround(spec.train_fraction * static_cast<double>(group.size())));
    if (group.size() >= 2) {
      train_count = std::clamp<std::size_t>(train_count, 1, group.size() - 1);
    } else {
      throw Error("data", "a class has fewer than 2 samples; cannot stratify");
    }
    for (std::size_t i = 0; i < group.size(); ++i) {
      (i < train_count ? result.train : result.test).push_back(group[i]);
    }
  };
  if (spec.stratified) {
    assign(pos);
    assign(neg);
  } else {
    std::vector<std::size_t> all(labels.size());
    std::iota(all.begin(), all.end(), 0);
    assign(all);
  }
  std::sort(result.train.begin(), result.train.end());
  std::sort(result.test.begin(), result.test.end());
  return result;
}

namespace {

// Per-document inference seed: stable under subsetting and reordering.
std::uint64_t doc_seed(std::uint64_t base, const std::string& id) {
  return base ^ util::fnv1a64(id);
}

struct EmbeddedData {
  classify::TrainingSet train;
  classify::TrainingSet test;
  std::vector<std::size_t> test_doc_indices;
};

EmbeddedData embed_documents(std::span<const EvalDocument> documents,
                             const embedding::EmbeddingModel& model,
                             const SplitResult& indices, std::uint64_t seed) {
  std::unordered_map<std::string_view, int> doc_rows;
  for (std::size_t i = 0; i < model.doc_ids.size(); ++i) {
    doc_rows.emplace(model.doc_ids[i], static_cast<int>(i));
  }

  EmbeddedData out;
  for (std::size_t i : indices.train) {
    const EvalDocument& doc = documents[i];
    std::vector<float> vec;
    if (const auto it = doc_rows.find(doc.id); it != doc_rows.end()) {
      const std::span<const float> row = model.doc_row(it->second);
      vec.assign(row.begin(), row.end());
    } else {
      vec = infer_vector(model, doc.tokens, doc_seed(seed, doc.id)).values;
    }
    out.train.x.push_back(std::move(vec));
    out.train.y.push_back(doc.label);
    out.train.ids.push_back(doc.id);
  }
  // Test vectors always come from the inference path, never from trained
  // rows, to keep the evaluation free of target leakage.
  for (std::size_t i : indices.test) {
    const EvalDocument& doc = documents[i];
    out.test.x.push_back(infer_vector(model, doc.tokens, doc_seed(seed, doc.id)).values);
    out.test.y.push_back(doc.label);
    out.test.ids.push_back(doc.id);
    out.test_doc_indices.push_back(i);
  }
  return out;
}

struct FittedModel {
  std::unique_ptr<classify::TrainedClassifier> model;
  bool eq1_consistent = true;  // voting's hard vote is not proba-thresholded
};

FittedModel fit_by_name(const std::string& name, const ExperimentSpec& spec,
                        const classify::TrainingSet& train) {
  if (name == "voting") {
    classify::EnsembleSpec ensemble = classify::EnsembleSpec::default_voting();
    ensemble.member_params = spec.params;
    return {fit_voting(ensemble, train), false};
  }
  if (name == "stacking") {
    classify::EnsembleSpec ensemble = classify::EnsembleSpec::default_stacking();
    ensemble.member_params = spec.params;
    ensemble.cv_folds = spec.stacking_folds;
    return {fit_stacking(ensemble, train), true};
  }
  const auto algorithm = classify::algorithm_from_string(name);
  if (!algorithm.has_value()) {
    throw Error("config", "unknown algorithm '" + name + "'; valid: logreg, linear_svm, "
                          "gaussian_nb, knn, decision_tree, random_forest, adaboost, lda, "
                          "voting, stacking");
  }
  return {fit(*algorithm, spec.params, train), true};
}

}  // namespace

std::vector<EvalReport> run_experiment(const ExperimentSpec& spec,
                                       std::span<const EvalDocument> documents,
                                       const embedding::EmbeddingModel& model) {
  std::vector<EvalReport> reports;
  if (spec.algorithms.empty()) return reports;

  std::vector<int> labels;
  labels.reserve(documents.size());
  for (const EvalDocument& doc : documents) labels.push_back(doc.label);
  SplitSpec split_spec = spec.split;
  split_spec.seed = split_spec.seed ^ spec.seed;
  const SplitResult indices = split(labels, split_spec);

  // The harness invariant: no document may appear on both sides.
  {
    std::vector<std::size_t> overlap;
    std::set_intersection(indices.train.begin(), indices.train.end(), indices.test.begin(),
                          indices.test.end(), std::back_inserter(overlap));
    if (!overlap.empty()) throw Error("data", "train/test split overlaps");
  }

  const EmbeddedData embedded = embed_documents(documents, model, indices, spec.seed);

  for (const std::string& name : spec.algorithms) {
    const auto train_started = std::chrono::steady_clock::now();
    FittedModel fitted = fit_by_name(name, spec, embedded.train);
    const std::chrono::duration<double> train_elapsed =
        std::chrono::steady_clock::now() - train_started;

    const auto test_started = std::chrono::steady_clock::now();
    std::vector<int> predictions;
    std::vector<double> scores;
    predictions.reserve(embedded.test.size());
    scores.reserve(embedded.test.size());
    for (const std::vector<float>& x : embedded.test.x) {
      predictions.push_back(fitted.model->predict(x));
      scores.push_back(fitted.model->predict_proba(x));
    }
    const std::chrono::duration<double> test_elapsed =
        std::chrono::steady_clock::now() - test_started;

    EvalReport report =
        fitted.eq1_consistent
            ? compute_metrics(embedded.test.y, predictions, scores)
            : compute_metrics(embedded.test.y, predictions);
    report.algorithm = name;
    report.train_time_s = train_elapsed.count();
    report.test_time_s = test_elapsed.count();

    // Per-slice accuracies over the test set.
    std::map<std::string, std::pair<std::int64_t, std::int64_t>> slices;  // correct, total
    for (std::size_t i = 0; i < embedded.test_doc_indices.size(); ++i) {
      const EvalDocument& doc = documents[embedded.test_doc_indices[i]];
      const bool correct = predictions[i] == doc.label;
      for (const std::string& key :
           {"year=" + std::to_string(doc.year), "source=" + doc.source}) {
        auto& [num_correct, total] = slices[key];
        num_correct += correct ? 1 : 0;
        ++total;
      }
    }
    for (const auto& [key, counts] : slices) {
      report.per_slice[key] =
          static_cast<double>(counts.first) / static_cast<double>(counts.second);
    }
    reports.push_back(std::move(report));
  }
  return reports;
}

std::map<std::string, std::map<int, double>> year_holdout(
    std::span<const EvalDocument> documents, int train_before_year,
    std::span<const std::string> algorithms, const embedding::EmbeddingModel& model,
    const classify::Hyperparameters& params, std::uint64_t seed) {
  SplitResult indices;
  std::map<int, std::vector<std::size_t>> test_by_year;
  for (std::size_t i = 0; i < documents.size(); ++i) {
    if (documents[i].year < train_before_year) {
      indices.train.push_back(i);
    } else {
      indices.test.push_back(i);
      test_by_year[documents[i].year].push_back(i);
    }
  }
  if (test_by_year.empty()) {
    throw Error("data", "year holdout: no test records at or after year " +
                            std::to_string(train_before_year));
  }
  if (indices.train.empty()) {
    throw Error("data", "year holdout: no training records before year " +
                            std::to_string(train_before_year));
  }

  const EmbeddedData embedded = embed_documents(documents, model, indices, seed);
  std::unordered_map<std::size_t, std::size_t> test_pos;  // doc index -> row in test set
  for (std::size_t i = 0; i < embedded.test_doc_indices.size(); ++i) {
    test_pos.emplace(embedded.test_doc_indices[i], i);
  }

  ExperimentSpec spec;
  spec.params = params;
  spec.seed = seed;

  std::map<std::string, std::map<int, double>> out;
  for (const std::string& name : algorithms) {
    FittedModel fitted = fit_by_name(name, spec, embedded.train);
    std::map<int, double> per_year;
    for (const auto& [year, doc_indices] : test_by_year) {
      std::int64_t correct = 0;
      for (std::size_t doc_index : doc_indices) {
        const std::size_t row = test_pos.at(doc_index);
        if (fitted.model->predict(embedded.test.x[row]) == documents[doc_index].label) {
          ++correct;
        }
      }
      per_year[year] = static_cast<double>(correct) / static_cast<double>(doc_indices.size());
    }
    out[name] = std::move(per_year);
  }
  return out;
}

std::string reports_to_json(std::span<const EvalReport> reports) {
  ordered_json doc = ordered_json::array();
  for (const EvalReport& report : reports) doc.push_back(report_to_json(report));
  return doc.dump(2) + "\n";
}

std::vector<EvalReport> reports_from_json(std::string_view text) {
  std::vector<EvalReport> reports;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error("parse", std::string("report file: ") + e.what());
  }
  for (const auto& item : doc) reports.push_back(report_from_json(item));
  return reports;
}

std::string reports_to_csv(std::span<const EvalReport> reports) {
  std::string out = "algorithm,accuracy,f1,auc,time_s\n";
  char buf[160];
  for (const EvalReport& report : reports) {
    std::string auc = "-";
    if (report.auc.has_value()) {
      std::snprintf(buf, sizeof(buf), "%.4f", *report.auc);
      auc = buf;
    }
    std::snprintf(buf, sizeof(buf), "%s,%.4f,%.4f,%s,%.2f", report.algorithm.c_str(),
                  report.accuracy, report.f1, auc.c_str(),
                  report.train_time_s + report.test_time_s);
    out += buf;
    out += '\n';
  }
  return out;
}

}  // namespace sentinel::evaluate
