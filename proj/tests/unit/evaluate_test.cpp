#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "sentinel/error.hpp"
#include "sentinel/evaluate.hpp"
#include "synthetic.hpp"

using namespace sentinel;
using namespace sentinel::evaluate;

TEST_CASE("stratified split arithmetic") {
  std::vector<int> labels(200);
  for (std::size_t i = 0; i < 100; ++i) labels[i] = 1;

  SplitSpec spec;
  spec.train_fraction = 0.8;
  spec.seed = 3;
  const SplitResult result = split(labels, spec);
  CHECK(result.train.size() == 160);
  CHECK(result.test.size() == 40);

  std::size_t train_pos = 0;
  for (std::size_t i : result.train) train_pos += labels[i];
  CHECK(train_pos == 80);

  // disjoint and covering
  std::set<std::size_t> all(result.train.begin(), result.train.end());
  for (std::size_t i : result.test) CHECK(all.insert(i).second);
  CHECK(all.size() == labels.size());
}

TEST_CASE("split determinism and class-ratio bound") {
  std::vector<int> labels = {1, 1, 1, 0, 0, 0};
  SplitSpec spec;
  spec.train_fraction = 0.5;
  spec.seed = 17;
  const SplitResult a = split(labels, spec);
  const SplitResult b = split(labels, spec);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);

  // 3 samples per class at 0.5: 1 or 2 in train per class (+-1 contract)
  std::size_t train_pos = 0;
  std::size_t train_neg = 0;
  for (std::size_t i : a.train) (labels[i] == 1 ? train_pos : train_neg) += 1;
  CHECK(train_pos >= 1);
  CHECK(train_pos <= 2);
  CHECK(train_neg >= 1);
  CHECK(train_neg <= 2);
}

TEST_CASE("split error cases") {
  SplitSpec spec;
  CHECK_THROWS_AS(split(std::vector<int>{1, 1}, spec), Error);  // one class
  std::vector<int> tiny = {1, 0};  // a class with a single sample cannot stratify
  CHECK_THROWS_AS(split(tiny, spec), Error);
  spec.train_fraction = 1.5;
  CHECK_THROWS_AS(split(std::vector<int>{1, 1, 0, 0}, spec), Error);
}

TEST_CASE("compute_metrics closed-form example") {
  // tp=2 fp=1 fn=1 tn=2
  const std::vector<int> y_true = {1, 1, 1, 0, 0, 0};
  const std::vector<int> y_pred = {1, 1, 0, 1, 0, 0};
  const EvalReport report = compute_metrics(y_true, y_pred);
  CHECK(report.confusion.tp == 2);
  CHECK(report.confusion.fp == 1);
  CHECK(report.confusion.fn == 1);
  CHECK(report.confusion.tn == 2);
  CHECK(report.accuracy == doctest::Approx(4.0 / 6.0));
  CHECK(report.f1 == doctest::Approx(2.0 / 3.0));
  CHECK_FALSE(report.auc.has_value());
}

TEST_CASE("f1 conventions") {
  // all-negative predictions: precision 0/0 -> 0, f1 -> 0
  const std::vector<int> y_true = {1, 0};
  const std::vector<int> y_pred = {0, 0};
  const EvalReport report = compute_metrics(y_true, y_pred);
  CHECK(report.f1 == 0.0);
}

TEST_CASE("auc boundary values") {
  const std::vector<int> y_true = {1, 1, 0, 0};
  const std::vector<int> y_pred = {1, 1, 0, 0};
  SUBCASE("perfect ranking") {
    const std::vector<double> scores = {0.9, 0.8, 0.2, 0.1};
    const EvalReport report = compute_metrics(y_true, y_pred, scores);
    REQUIRE(report.auc.has_value());
    CHECK(*report.auc == doctest::Approx(1.0));
  }
  SUBCASE("all scores identical: tie-averaging gives one half") {
    const std::vector<double> scores = {0.5, 0.5, 0.5, 0.5};
    const EvalReport report = compute_metrics(y_true, y_pred, scores);
    REQUIRE(report.auc.has_value());
    CHECK(*report.auc == doctest::Approx(0.5));
  }
}

TEST_CASE("metrics match a naive recount on 100 random cases") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 60;
    std::vector<int> y_true(n);
    std::vector<int> y_pred(n);
    bool pos = false;
    bool neg = false;
    for (std::size_t i = 0; i < n; ++i) {
      y_true[i] = static_cast<int>(rng() % 2);
      y_pred[i] = static_cast<int>(rng() % 2);
      (y_true[i] == 1 ? pos : neg) = true;
    }
    if (!pos || !neg) continue;

    std::int64_t tp = 0, fp = 0, fn = 0, tn = 0, correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
      correct += y_true[i] == y_pred[i];
      if (y_true[i] == 1 && y_pred[i] == 1) ++tp;
      if (y_true[i] == 0 && y_pred[i] == 1) ++fp;
      if (y_true[i] == 1 && y_pred[i] == 0) ++fn;
      if (y_true[i] == 0 && y_pred[i] == 0) ++tn;
    }
    const EvalReport report = compute_metrics(y_true, y_pred);
    CHECK(report.confusion.tp == tp);
    CHECK(report.confusion.fp == fp);
    CHECK(report.confusion.fn == fn);
    CHECK(report.confusion.tn == tn);
    CHECK(report.accuracy == static_cast<double>(correct) / static_cast<double>(n));
  }
}

TEST_CASE("rank-statistic auc equals trapezoidal roc integration") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 10 + rng() % 80;
    std::vector<int> y_true(n);
    std::vector<int> y_pred(n, 0);
    std::vector<double> scores(n);
    bool pos = false;
    bool neg = false;
    for (std::size_t i = 0; i < n; ++i) {
      y_true[i] = static_cast<int>(rng() % 2);
      (y_true[i] == 1 ? pos : neg) = true;
      // quantized scores force ties regularly
      scores[i] = std::round(dist(rng) * 10.0) / 10.0;
    }
    if (!pos || !neg) continue;

    // trapezoidal ROC oracle over distinct thresholds
    std::vector<double> thresholds = scores;
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    const double total_pos = std::count(y_true.begin(), y_true.end(), 1);
    const double total_neg = static_cast<double>(n) - total_pos;
    double auc = 0.0;
    double prev_tpr = 0.0;
    double prev_fpr = 0.0;
    for (double threshold : thresholds) {
      double tp = 0.0;
      double fp = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (scores[i] >= threshold) (y_true[i] == 1 ? tp : fp) += 1.0;
      }
      const double tpr = tp / total_pos;
      const double fpr = fp / total_neg;
      auc += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
      prev_tpr = tpr;
      prev_fpr = fpr;
    }
    auc += (1.0 - prev_fpr) * (1.0 + prev_tpr) / 2.0;

    const EvalReport report = compute_metrics(y_true, y_pred, scores);
    REQUIRE(report.auc.has_value());
    CHECK(std::fabs(*report.auc - auc) <= 1e-9);
  }
}

TEST_CASE("report serialization round-trips losslessly") {
  EvalReport report;
  report.algorithm = "logreg";
  report.accuracy = 1.0 / 3.0;
  report.f1 = 0.123456789012345678;
  report.auc = 0.9876543210987654;
  report.confusion = {10, 2, 3, 15};
  report.train_time_s = 1.25;
  report.test_time_s = 0.03;
  report.per_slice = {{"year=2021", 0.875}, {"source=arxiv", 1.0 / 7.0}};

  const EvalReport back = EvalReport::from_json_string(report.to_json_string());
  CHECK(back == report);

  const std::vector<EvalReport> reports = {report};
  const auto parsed = reports_from_json(reports_to_json(reports));
  REQUIRE(parsed.size() == 1);
  CHECK(parsed[0] == report);

  const std::string csv = reports_to_csv(reports);
  CHECK(csv.find("algorithm,accuracy,f1,auc,time_s") == 0);
  CHECK(csv.find("logreg") != std::string::npos);
  CHECK(csv.find("1.28") != std::string::npos);  // train+test with two decimals
}

TEST_CASE("csv shows a dash for missing auc") {
  EvalReport report;
  report.algorithm = "voting";
  const std::string csv = reports_to_csv(std::vector<EvalReport>{report});
  CHECK(csv.find("voting,0.0000,0.0000,-,") != std::string::npos);
}

namespace {

embedding::Hyperparameters small_embedding_params() {
  embedding::Hyperparameters params;
  params.dim = 24;
  params.window = 3;
  params.epochs = 8;
  params.negative_samples = 5;
  params.min_count = 2;
  params.inference_epochs = 30;
  params.seed = 91;
  return params;
}

}  // namespace

TEST_CASE("end-to-end experiment on the two-topic corpus") {
  const testing::SynthCorpus synth = testing::make_two_topic_corpus(50, 101);
  const auto docs = testing::tokenize_corpus(synth);
  const embedding::EmbeddingModel model =
      embedding::train(docs, small_embedding_params(), embedding::Phase::pretrain);

  ExperimentSpec spec;
  spec.algorithms = {"logreg"};
  spec.split.train_fraction = 0.8;
  spec.seed = 7;
  spec.params.seed = 7;

  const auto documents = testing::eval_documents(synth);
  const auto reports = run_experiment(spec, documents, model);
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].algorithm == "logreg");
  CHECK(reports[0].accuracy > 0.9);
  CHECK(reports[0].auc.has_value());
  CHECK(reports[0].per_slice.count("source=proceedings") == 1);
  CHECK(reports[0].per_slice.count("source=arxiv") == 1);

  // abstract-only mode carries less signal but stays comparable
  const auto abstract_documents = testing::eval_documents(synth, /*abstract_only=*/true);
  const auto abstract_reports = run_experiment(spec, abstract_documents, model);
  REQUIRE(abstract_reports.size() == 1);
  CHECK(abstract_reports[0].accuracy <= reports[0].accuracy + 0.05);
}

TEST_CASE("empty algorithm list yields no reports") {
  const testing::SynthCorpus synth = testing::make_two_topic_corpus(10, 103);
  const auto docs = testing::tokenize_corpus(synth);
  embedding::Hyperparameters params = small_embedding_params();
  params.epochs = 1;
  const embedding::EmbeddingModel model =
      embedding::train(docs, params, embedding::Phase::pretrain);
  const ExperimentSpec spec;  // no algorithms
  CHECK(run_experiment(spec, testing::eval_documents(synth), model).empty());
}

TEST_CASE("year holdout reports a weakly declining trend on drifting data") {
  const testing::SynthCorpus synth = testing::make_drift_corpus(18, 2016, 2022, 107);
  const auto docs = testing::tokenize_corpus(synth);
  const embedding::EmbeddingModel model =
      embedding::train(docs, small_embedding_params(), embedding::Phase::pretrain);

  const std::vector<std::string> algorithms = {"logreg"};
  const auto results = year_holdout(testing::eval_documents(synth), 2019, algorithms, model,
                                    classify::Hyperparameters{}, 3);
  REQUIRE(results.count("logreg") == 1);
  const auto& per_year = results.at("logreg");
  REQUIRE(per_year.size() == 4);  // 2019..2022
  double prev = 1.0;
  for (const auto& [year, accuracy] : per_year) {
    CHECK(accuracy <= prev + 0.05);
    prev = accuracy;
  }
}

TEST_CASE("year holdout with no test years is an error") {
  const testing::SynthCorpus synth = testing::make_two_topic_corpus(10, 109);
  const auto docs = testing::tokenize_corpus(synth);
  embedding::Hyperparameters params = small_embedding_params();
  params.epochs = 1;
  const embedding::EmbeddingModel model =
      embedding::train(docs, params, embedding::Phase::pretrain);
  const std::vector<std::string> algorithms = {"logreg"};
  try {
    year_holdout(testing::eval_documents(synth), 2030, algorithms, model,
                 classify::Hyperparameters{}, 3);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("2030") != std::string::npos);
  }
}
