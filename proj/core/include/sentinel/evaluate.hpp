#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sentinel/classify.hpp"
#include "sentinel/embedding.hpp"

namespace sentinel::evaluate {

struct ConfusionMatrix {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct EvalReport {
  std::string algorithm;
  double accuracy = 0.0;
  double f1 = 0.0;
  std::optional<double> auc;  // absent for score-free models
  ConfusionMatrix confusion;
  double train_time_s = 0.0;
  double test_time_s = 0.0;
  std::map<std::string, double> per_slice;  // e.g. "year=2021" -> accuracy

  std::string to_json_string() const;
  static EvalReport from_json_string(std::string_view text);

  // Everything except wall-clock timing.
  bool deterministic_equal(const EvalReport& other) const;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

// Accuracy, F1 (0/0 -> 0), confusion matrix, and rank-statistic
// (Mann-Whitney, tie-averaged) AUC when scores are present.
EvalReport compute_metrics(std::span<const int> y_true, std::span<const int> y_pred,
                           std::span<const double> scores = {});

struct SplitSpec {
  double train_fraction = 0.8;
  bool stratified = true;
  std::uint64_t seed = 0;
};

struct SplitResult {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Seeded stratified split preserving the class ratio within +-1 sample per
// class; train and test are disjoint and cover the input.
SplitResult split(std::span<const int> labels, const SplitSpec& spec);

// A document ready for an experiment: label, slice keys and tokens.
struct EvalDocument {
  std::string id;
  int label = 0;
  int year = 0;
  std::string source;  // "proceedings" | "arxiv"
  std::vector<std::string> tokens;
};

struct ExperimentSpec {
  enum class InputMode { full_text, abstract_only };
  InputMode input_mode = InputMode::full_text;
  SplitSpec split;
  std::vector<std::string> algorithms;  // classifier names plus "voting"/"stacking"
  classify::Hyperparameters params;
  int stacking_folds = 5;
  std::uint64_t seed = 0;
};

// Embeds documents (train docs use their trained row when the model has
// one, otherwise inference; test docs always use inference), fits each
// algorithm, and reports metrics, timing and per-year/per-source slices.
std::vector<EvalReport> run_experiment(const ExperimentSpec& spec,
                                       std::span<const EvalDocument> documents,
                                       const embedding::EmbeddingModel& model);

// Trains on documents with year < train_before_year and reports accuracy
// for each later year separately.
std::map<std::string, std::map<int, double>> year_holdout(
    std::span<const EvalDocument> documents, int train_before_year,
    std::span<const std::string> algorithms, const embedding::EmbeddingModel& model,
    const classify::Hyperparameters& params, std::uint64_t seed);

// Table-style report files: a JSON document with one entry per algorithm,
// and an optional CSV export mirroring the Algorithm/Accuracy/F1/AUC/Time
// columns ("-" for absent AUC, time with two decimals).
std::string reports_to_json(std::span<const EvalReport> reports);
std::vector<EvalReport> reports_from_json(std::string_view text);
std::string reports_to_csv(std::span<const EvalReport> reports);

}  // namespace sentinel::evaluate
