#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <map>
#include <random>

#include "sentinel/embedding.hpp"
#include "sentinel/error.hpp"
#include "sentinel/util.hpp"
#include "synthetic.hpp"
#include "tempdir.hpp"

using namespace sentinel;
using namespace sentinel::embedding;

namespace {

// Tiny model for the gradient oracle: 5-word vocabulary, dimension 4.
EmbeddingModel tiny_model(int negative_samples, std::uint64_t seed) {
  Hyperparameters params;
  params.dim = 4;
  params.window = 1;
  params.negative_samples = negative_samples;
  params.min_count = 1;
  params.seed = seed;
  params.epochs = 0;

  std::vector<DocTokens> corpus = {{"doc0", {"alpha", "beta", "gamma", "delta", "eps",
                                             "alpha", "gamma", "beta", "eps", "delta"}}};
  return train(corpus, params, Phase::pretrain);
}

// Central finite difference with the exactly-representable step around a
// float32 parameter; all loss evaluations run in double.
double finite_difference(EmbeddingModel& model, float* parameter,
                         const std::vector<int>& words, int position,
                         const std::vector<int>& negatives,
                         std::span<const float> doc_vector) {
  const float original = *parameter;
  const double step = 1e-5;
  const float plus = static_cast<float>(static_cast<double>(original) + step);
  const float minus = static_cast<float>(static_cast<double>(original) - step);

  *parameter = plus;
  const double loss_plus = window_loss(model, doc_vector, words, position, negatives);
  *parameter = minus;
  const double loss_minus = window_loss(model, doc_vector, words, position, negatives);
  *parameter = original;

  const double delta = static_cast<double>(plus) - static_cast<double>(minus);
  return (loss_plus - loss_minus) / delta;
}

double relative_error(double a, double b) {
  const double scale = std::max({std::fabs(a), std::fabs(b), 1e-8});
  return std::fabs(a - b) / scale;
}

// Checks every touched parameter of 20 random windows; returns the largest
// relative error between analytic and finite-difference gradients.
double max_gradient_error(int negative_samples, std::uint64_t seed) {
  EmbeddingModel model = tiny_model(negative_samples, seed);
  std::mt19937_64 rng(seed);
  const std::vector<int> words = {0, 1, 2, 3, 4, 0, 2, 1, 4, 3};
  const int dim = model.params.dim;

  double worst = 0.0;
  for (int sample = 0; sample < 20; ++sample) {
    const int position =
        1 + static_cast<int>(rng() % (words.size() - 2));  // full window fits
    std::vector<int> negatives;
    if (negative_samples > 0) {
      while (static_cast<int>(negatives.size()) < negative_samples) {
        const int candidate = static_cast<int>(rng() % model.vocab.size());
        if (candidate != words[static_cast<std::size_t>(position)]) {
          negatives.push_back(candidate);
        }
      }
    }
    // A fresh doc vector per sample exercises different geometry.
    std::vector<float> doc_vec(static_cast<std::size_t>(dim));
    std::uniform_real_distribution<float> dist(-0.2f, 0.2f);
    for (float& v : doc_vec) v = dist(rng);

    WindowGradients grads;
    loss_and_gradients(model, doc_vec, words, position, negatives, grads);

    for (int d = 0; d < dim; ++d) {
      const double fd =
          finite_difference(model, &doc_vec[static_cast<std::size_t>(d)], words, position,
                            negatives, doc_vec);
      worst = std::max(worst, relative_error(grads.doc[static_cast<std::size_t>(d)], fd));
    }
    for (const auto& [row, grad] : grads.words) {
      for (int d = 0; d < dim; ++d) {
        float* parameter = &model.word_vectors[static_cast<std::size_t>(row) * dim + d];
        const double fd = finite_difference(model, parameter, words, position, negatives, doc_vec);
        worst = std::max(worst, relative_error(grad[static_cast<std::size_t>(d)], fd));
      }
    }
    for (const auto& [row, grad] : grads.outputs) {
      for (int d = 0; d < dim; ++d) {
        float* parameter = &model.output_weights[static_cast<std::size_t>(row) * dim + d];
        const double fd = finite_difference(model, parameter, words, position, negatives, doc_vec);
        worst = std::max(worst, relative_error(grad[static_cast<std::size_t>(d)], fd));
      }
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("build_vocab thresholds and determinism") {
  const std::vector<std::vector<std::string>> corpus = {{"a", "a", "b"}};
  const Vocabulary vocab = build_vocab(corpus, 2);
  CHECK(vocab.size() == 1);
  CHECK(vocab.lookup("a") == 0);
  CHECK(vocab.lookup("b") == -1);

  const std::vector<std::vector<std::string>> two = {{"x", "y"}, {"y", "x"}};
  const Vocabulary v1 = build_vocab(two, 1);
  const Vocabulary v2 = build_vocab(two, 1);
  CHECK(v1.tokens == v2.tokens);  // tie broken lexicographically
  CHECK(v1.tokens == std::vector<std::string>{"x", "y"});

  CHECK_THROWS_AS(build_vocab(corpus, 10), Error);
}

TEST_CASE("build_vocab orders by frequency (independent recount)") {
  std::mt19937_64 rng(3);
  std::vector<std::vector<std::string>> corpus;
  std::map<std::string, std::uint64_t> expected_counts;
  for (int d = 0; d < 1000; ++d) {
    std::vector<std::string> doc;
    const int len = 5 + static_cast<int>(rng() % 10);
    for (int i = 0; i < len; ++i) {
      // Zipf-ish skew: low word ids occur more often.
      const int word = static_cast<int>(rng() % (1 + rng() % 20));
      doc.push_back("w" + std::to_string(word));
    }
    for (const std::string& token : doc) ++expected_counts[token];
    corpus.push_back(std::move(doc));
  }
  const Vocabulary vocab = build_vocab(corpus, 1);
  std::uint64_t best = 0;
  for (const auto& [token, count] : expected_counts) best = std::max(best, count);
  CHECK(vocab.counts[0] == best);
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    CHECK(vocab.counts[i] == expected_counts.at(vocab.tokens[i]));
    if (i > 0) CHECK(vocab.counts[i] <= vocab.counts[i - 1]);
  }
}

TEST_CASE("softmax of equal logits is uniform") {
  const std::vector<double> logits = {0.0, 0.0};
  const std::vector<double> p = softmax(logits);
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-12));

  // loss at the uniform point is ln 2
  EmbeddingModel model = tiny_model(0, 7);
  CHECK(std::log(2.0) == doctest::Approx(0.6931471805599453));
}

TEST_CASE("softmax outputs sum to one within 1e-12") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> dist(-20.0, 20.0);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> logits(2 + rng() % 50);
    for (double& v : logits) v = dist(rng);
    const std::vector<double> p = softmax(logits);
    double sum = 0.0;
    for (double v : p) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(std::fabs(sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("analytic gradients match finite differences (softmax path)") {
  CHECK(max_gradient_error(0, 42) < 1e-4);
}

TEST_CASE("analytic gradients match finite differences (negative sampling path)") {
  CHECK(max_gradient_error(3, 43) < 1e-4);
}

TEST_CASE("zero epochs returns the initialization") {
  Hyperparameters params;
  params.dim = 8;
  params.window = 2;
  params.epochs = 0;
  params.min_count = 1;
  params.seed = 5;

  const std::vector<DocTokens> corpus = {{"a", {"x", "y", "z", "x", "y"}},
                                         {"b", {"z", "y", "x", "z", "y"}}};
  const EmbeddingModel first = train(corpus, params, Phase::pretrain);
  const EmbeddingModel second = train(corpus, params, Phase::pretrain);
  CHECK(first == second);
  CHECK(first.doc_vectors.size() == 2 * 8);
}

TEST_CASE("training separates a two-topic corpus and loss decreases") {
  const testing::SynthCorpus synth = testing::make_two_topic_corpus(40, 11);
  const auto docs = testing::tokenize_corpus(synth);

  Hyperparameters params;
  params.dim = 24;
  params.window = 3;
  params.epochs = 8;
  params.negative_samples = 5;
  params.min_count = 2;
  params.seed = 9;

  std::vector<EpochStats> log;
  const EmbeddingModel model = train(docs, params, Phase::pretrain, nullptr, 1, &log);
  REQUIRE(log.size() == 8);
  for (std::size_t e = 1; e < 5; ++e) {
    CHECK(log[e].mean_loss <= log[e - 1].mean_loss + 1e-9);
  }

  // mean within-topic cosine similarity must exceed the cross-topic mean
  const int dim = params.dim;
  auto cosine = [&](int i, int j) {
    double dot = 0.0;
    double ni = 0.0;
    double nj = 0.0;
    for (int d = 0; d < dim; ++d) {
      const double a = model.doc_vectors[static_cast<std::size_t>(i) * dim + d];
      const double b = model.doc_vectors[static_cast<std::size_t>(j) * dim + d];
      dot += a * b;
      ni += a * a;
      nj += b * b;
    }
    return dot / std::sqrt(ni * nj);
  };
  double within = 0.0;
  double across = 0.0;
  int within_n = 0;
  int across_n = 0;
  const int n = static_cast<int>(model.doc_ids.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const bool same = (model.doc_ids[i][0] == model.doc_ids[j][0]);
      (same ? within : across) += cosine(i, j);
      (same ? within_n : across_n) += 1;
    }
  }
  CHECK(within / within_n > across / across_n);
}

TEST_CASE("inference matches training rows and is deterministic") {
  const testing::SynthCorpus synth = testing::make_two_topic_corpus(30, 21);
  const auto docs = testing::tokenize_corpus(synth);

  Hyperparameters params;
  params.dim = 24;
  params.window = 3;
  params.epochs = 10;
  params.negative_samples = 5;
  params.min_count = 2;
  params.inference_epochs = 30;
  params.seed = 31;

  const EmbeddingModel model = train(docs, params, Phase::pretrain);

  // Inferring a training document lands near its trained row.
  const DocVector inferred = infer_vector(model, docs[0].tokens, 77);
  const std::span<const float> trained = model.doc_row(0);
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (int d = 0; d < params.dim; ++d) {
    dot += static_cast<double>(inferred.values[d]) * trained[d];
    na += static_cast<double>(inferred.values[d]) * inferred.values[d];
    nb += static_cast<double>(trained[d]) * trained[d];
  }
  CHECK(dot / std::sqrt(na * nb) > 0.5);
  CHECK(inferred.source == DocVector::Source::inferred);

  // Determinism given the seed.
  const DocVector again = infer_vector(model, docs[0].tokens, 77);
  CHECK(inferred.values == again.values);

  // Zero inference epochs returns the seeded initialization.
  EmbeddingModel frozen = model;
  frozen.params.inference_epochs = 0;
  const DocVector init1 = infer_vector(frozen, docs[0].tokens, 5);
  const DocVector init2 = infer_vector(frozen, docs[1].tokens, 5);
  CHECK(init1.values == init2.values);  // tokens don't matter at 0 epochs

  // All tokens out of vocabulary is an error.
  const std::vector<std::string> oov = {"zzzunknownzzz"};
  CHECK_THROWS_AS(infer_vector(model, oov, 1), Error);
}

TEST_CASE("single-worker training is bit-reproducible") {
  const testing::SynthCorpus synth = testing::make_two_topic_corpus(20, 33);
  const auto docs = testing::tokenize_corpus(synth);

  Hyperparameters params;
  params.dim = 16;
  params.window = 2;
  params.epochs = 4;
  params.negative_samples = 5;
  params.min_count = 2;
  params.seed = 13;

  const EmbeddingModel a = train(docs, params, Phase::pretrain);
  const EmbeddingModel b = train(docs, params, Phase::pretrain);
  CHECK(a == b);
}

TEST_CASE("finetune copies the base and never mutates it") {
  const testing::SynthCorpus synth = testing::make_two_topic_corpus(20, 51);
  const auto docs = testing::tokenize_corpus(synth);

  Hyperparameters params;
  params.dim = 16;
  params.window = 2;
  params.epochs = 3;
  params.negative_samples = 5;
  params.min_count = 2;
  params.seed = 3;

  const EmbeddingModel base = train(docs, params, Phase::pretrain);
  const EmbeddingModel base_copy = base;

  Hyperparameters finetune_params = params;
  finetune_params.epochs = 2;
  finetune_params.seed = 4;
  const EmbeddingModel tuned = train(docs, finetune_params, Phase::finetune, &base);

  CHECK(base == base_copy);                 // untouched
  CHECK(tuned.vocab.tokens == base.vocab.tokens);
  CHECK(tuned.word_vectors != base.word_vectors);  // training moved the weights
  CHECK(tuned.doc_vectors.size() == base.doc_vectors.size());

  // Unknown fine-tune tokens are dropped rather than grown into the vocab.
  std::vector<DocTokens> extended = docs;
  extended[0].tokens.push_back("brandnewtoken");
  const EmbeddingModel tuned2 = train(extended, finetune_params, Phase::finetune, &base);
  CHECK(tuned2.vocab.lookup("brandnewtoken") == -1);

  CHECK_THROWS_AS(train(docs, finetune_params, Phase::finetune, nullptr), Error);
}

TEST_CASE("multi-worker training reaches similar quality") {
  const testing::SynthCorpus synth = testing::make_two_topic_corpus(20, 61);
  const auto docs = testing::tokenize_corpus(synth);

  Hyperparameters params;
  params.dim = 16;
  params.window = 2;
  params.epochs = 3;
  params.negative_samples = 5;
  params.min_count = 2;
  params.seed = 3;

  std::vector<EpochStats> log;
  const EmbeddingModel model = train(docs, params, Phase::pretrain, nullptr, 4, &log);
  CHECK(model.doc_vectors.size() == docs.size() * 16);
  for (float v : model.doc_vectors) CHECK(std::isfinite(v));
}

TEST_CASE("model save/load round-trips bitwise") {
  testing::TempDir dir("embed-io");
  const testing::SynthCorpus synth = testing::make_two_topic_corpus(10, 71);
  const auto docs = testing::tokenize_corpus(synth);

  Hyperparameters params;
  params.dim = 12;
  params.window = 2;
  params.epochs = 2;
  params.negative_samples = 5;
  params.min_count = 2;
  params.seed = 23;

  const EmbeddingModel model = train(docs, params, Phase::pretrain);
  const auto path = dir.path() / "model.sntl";
  save_model(model, path);
  const EmbeddingModel loaded = load_model(path);
  CHECK(loaded == model);

  // Saving the loaded model reproduces the file byte for byte.
  const auto path2 = dir.path() / "model2.sntl";
  save_model(loaded, path2);
  CHECK(util::read_file(path) == util::read_file(path2));
}

TEST_CASE("model file corruption and version errors") {
  testing::TempDir dir("embed-io");
  const testing::SynthCorpus synth = testing::make_two_topic_corpus(6, 81);
  const auto docs = testing::tokenize_corpus(synth);

  Hyperparameters params;
  params.dim = 8;
  params.window = 2;
  params.epochs = 1;
  params.negative_samples = 5;
  params.min_count = 2;
  params.seed = 29;

  const EmbeddingModel model = train(docs, params, Phase::pretrain);
  const auto path = dir.path() / "model.sntl";
  save_model(model, path);
  const std::string bytes = util::read_file(path);

  SUBCASE("corrupted checksum") {
    std::string corrupt = bytes;
    corrupt[corrupt.size() / 2] ^= 0x01;
    util::write_file(path, corrupt);
    try {
      load_model(path);
      FAIL("expected checksum error");
    } catch (const Error& e) {
      CHECK(e.category() == "checksum");
    }
  }

  SUBCASE("newer format version names both versions") {
    std::string newer = bytes;
    newer[4] = 2;  // format version field
    // keep the trailing CRC consistent so the version check is what fires
    const std::string payload = newer.substr(0, newer.size() - 4);
    const std::uint32_t crc = util::crc32c(payload);
    std::memcpy(newer.data() + newer.size() - 4, &crc, 4);
    util::write_file(path, newer);
    try {
      load_model(path);
      FAIL("expected version error");
    } catch (const Error& e) {
      CHECK(e.category() == "format");
      CHECK(std::string(e.what()).find("2") != std::string::npos);
      CHECK(std::string(e.what()).find("1") != std::string::npos);
    }
  }

  SUBCASE("truncated file") {
    util::write_file(path, bytes.substr(0, 6));
    try {
      load_model(path);
      FAIL("expected truncation error");
    } catch (const Error& e) {
      CHECK(e.category() == "format");
    }
  }

  SUBCASE("bad magic") {
    std::string bad = bytes;
    bad[0] = 'X';
    util::write_file(path, bad);
    CHECK_THROWS_AS(load_model(path), Error);
  }
}
