#include "sentinel/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <thread>

#include "sentinel/error.hpp"

namespace sentinel::embedding {

namespace {

constexpr double kNoisePower = 0.75;

std::span<const float> row(const std::vector<float>& m, int i, int dim) {
  return {m.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)};
}

std::span<float> mutable_row(std::vector<float>& m, int i, int dim) {
  return {m.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)};
}

double dot(std::span<const float> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
  return s;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Cumulative unigram^0.75 noise distribution for negative sampling.
std::vector<double> build_noise_cdf(const Vocabulary& vocab) {
  std::vector<double> cdf(vocab.size());
  double total = 0.0;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    total += std::pow(static_cast<double>(vocab.counts[i]), kNoisePower);
    cdf[i] = total;
  }
  for (double& v : cdf) v /= total;
  return cdf;
}

int sample_noise(const std::vector<double>& cdf, std::mt19937_64& rng) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
  return static_cast<int>(std::min<std::ptrdiff_t>(it - cdf.begin(),
                                                   static_cast<std::ptrdiff_t>(cdf.size()) - 1));
}

void sample_negatives(const std::vector<double>& cdf, int count, int center,
                      std::mt19937_64& rng, std::vector<int>& out) {
  out.clear();
  while (static_cast<int>(out.size()) < count) {
    const int candidate = sample_noise(cdf, rng);
    if (candidate != center) out.push_back(candidate);
  }
}

// Average of the document vector and the 2*window context word vectors.
void context_mean(const EmbeddingModel& model, std::span<const float> doc_vector,
                  std::span<const int> doc_words, int position, std::vector<double>& h,
                  std::vector<int>& context) {
  const int dim = model.params.dim;
  const int k = model.params.window;
  h.assign(dim, 0.0);
  context.clear();
  for (int offset = -k; offset <= k; ++offset) {
    if (offset == 0) continue;
    context.push_back(doc_words[position + offset]);
  }
  for (int d = 0; d < dim; ++d) h[d] = doc_vector[d];
  for (int word : context) {
    const std::span<const float> w = row(model.word_vectors, word, dim);
    for (int d = 0; d < dim; ++d) h[d] += w[d];
  }
  const double scale = 1.0 / (2.0 * k + 1.0);
  for (double& v : h) v *= scale;
}

struct ForwardScratch {
  std::vector<double> h;
  std::vector<int> context;
  std::vector<double> logits;
  std::vector<double> probs;
};

// Loss plus, optionally, dL/dh and the touched output-row gradients.
// grad_h and the output gradient callback share the forward pass so the
// analytic path and the loss-only path cannot drift apart.
template <bool WithGradients>
double window_core(const EmbeddingModel& model, std::span<const float> doc_vector,
                   std::span<const int> doc_words, int position, std::span<const int> negatives,
                   ForwardScratch& scratch, std::vector<double>* grad_h,
                   std::vector<std::pair<int, std::vector<double>>>* output_grads) {
  const int dim = model.params.dim;
  const int k = model.params.window;
  const int length = static_cast<int>(doc_words.size());
  if (position < k || position > length - 1 - k) {
    throw Error("train", "window position " + std::to_string(position) +
                             " out of range for document of length " + std::to_string(length));
  }
  const int center = doc_words[position];
  context_mean(model, doc_vector, doc_words, position, scratch.h, scratch.context);
  const std::vector<double>& h = scratch.h;

  if constexpr (WithGradients) {
    grad_h->assign(dim, 0.0);
    output_grads->clear();
  }

  if (model.params.negative_samples == 0) {
    // Full softmax over the vocabulary.
    const int vocab_size = static_cast<int>(model.vocab.size());
    scratch.logits.resize(vocab_size);
    for (int j = 0; j < vocab_size; ++j) {
      scratch.logits[j] = dot(row(model.output_weights, j, dim), h);
    }
    scratch.probs = softmax(scratch.logits);
    const double loss = -std::log(std::max(scratch.probs[center], 1e-300));
    if constexpr (WithGradients) {
      for (int j = 0; j < vocab_size; ++j) {
        const double delta = scratch.probs[j] - (j == center ? 1.0 : 0.0);
        const std::span<const float> out_row = row(model.output_weights, j, dim);
        std::vector<double> g(dim);
        for (int d = 0; d < dim; ++d) {
          g[d] = delta * h[d];
          (*grad_h)[d] += delta * static_cast<double>(out_row[d]);
        }
        output_grads->emplace_back(j, std::move(g));
      }
    }
    return loss;
  }

  // Negative-sampling surrogate.
  double loss = 0.0;
  auto accumulate = [&](int word, double target) {
    const std::span<const float> out_row = row(model.output_weights, word, dim);
    const double score = sigmoid(dot(out_row, h));
    loss -= std::log(std::max(target > 0.5 ? score : 1.0 - score, 1e-300));
    if constexpr (WithGradients) {
      const double delta = score - target;
      std::vector<double> g(dim);
      for (int d = 0; d < dim; ++d) {
        g[d] = delta * h[d];
        (*grad_h)[d] += delta * static_cast<double>(out_row[d]);
      }
      // The same output row may appear as several negatives; accumulate.
      for (auto& [idx, grad] : *output_grads) {
        if (idx == word) {
          for (int d = 0; d < dim; ++d) grad[d] += g[d];
          return;
        }
      }
      output_grads->emplace_back(word, std::move(g));
    }
  };
  accumulate(center, 1.0);
  for (int negative : negatives) accumulate(negative, 0.0);
  return loss;
}

std::vector<float> uniform_matrix(std::size_t rows, int dim, std::mt19937_64& rng) {
  const float bound = 0.5f / static_cast<float>(dim);
  std::uniform_real_distribution<float> dist(-bound, bound);
  std::vector<float> m(rows * static_cast<std::size_t>(dim));
  for (float& v : m) v = dist(rng);
  return m;
}

std::vector<std::vector<int>> map_corpus(std::span<const DocTokens> corpus,
                                         const Vocabulary& vocab) {
  std::vector<std::vector<int>> indexed(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    indexed[i].reserve(corpus[i].tokens.size());
    for (const std::string& token : corpus[i].tokens) {
      const int id = vocab.lookup(token);
      if (id >= 0) indexed[i].push_back(id);
    }
  }
  return indexed;
}

void check_finite(const std::vector<float>& m, std::string_view name, int epoch) {
  for (float v : m) {
    if (!std::isfinite(v)) {
      throw Error("train", "non-finite value in " + std::string(name) + " after epoch " +
                               std::to_string(epoch));
    }
  }
}

}  // namespace

int Vocabulary::lookup(std::string_view token) const {
  const auto it = index.find(std::string(token));
  return it == index.end() ? -1 : it->second;
}

Vocabulary build_vocab(std::span<const std::vector<std::string>> corpus, int min_count) {
  if (corpus.empty()) throw Error("data", "cannot build vocabulary from an empty corpus");
  std::map<std::string, std::uint64_t> counts;
  for (const std::vector<std::string>& doc : corpus) {
    for (const std::string& token : doc) ++counts[token];
  }
  std::vector<std::pair<std::string, std::uint64_t>> retained;
  for (auto& [token, count] : counts) {
    if (count >= static_cast<std::uint64_t>(min_count)) retained.emplace_back(token, count);
  }
  if (retained.empty()) {
    throw Error("data", "vocabulary is empty after applying min_count=" + std::to_string(min_count));
  }
  std::sort(retained.begin(), retained.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocabulary vocab;
  vocab.min_count = min_count;
  vocab.tokens.reserve(retained.size());
  vocab.counts.reserve(retained.size());
  for (std::size_t i = 0; i < retained.size(); ++i) {
    vocab.index.emplace(retained[i].first, static_cast<int>(i));
    vocab.tokens.push_back(retained[i].first);
    vocab.counts.push_back(retained[i].second);
  }
  return vocab;
}

std::span<const float> EmbeddingModel::word_row(int i) const {
  return row(word_vectors, i, params.dim);
}
std::span<const float> EmbeddingModel::doc_row(int i) const {
  return row(doc_vectors, i, params.dim);
}
std::span<const float> EmbeddingModel::output_row(int i) const {
  return row(output_weights, i, params.dim);
}

std::optional<int> EmbeddingModel::doc_row_index(std::string_view id) const {
  for (std::size_t i = 0; i < doc_ids.size(); ++i) {
    if (doc_ids[i] == id) return static_cast<int>(i);
  }
  return std::nullopt;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  const double max_logit = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - max_logit);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

void WindowGradients::clear() {
  doc.clear();
  words.clear();
  outputs.clear();
}

double loss_and_gradients(const EmbeddingModel& model, std::span<const float> doc_vector,
                          std::span<const int> doc_words, int position,
                          std::span<const int> negatives, WindowGradients& gradients) {
  gradients.clear();
  ForwardScratch scratch;
  std::vector<double> grad_h;
  const double loss = window_core<true>(model, doc_vector, doc_words, position, negatives,
                                        scratch, &grad_h, &gradients.outputs);

  // h averages the document vector and every context word vector, so each
  // input receives grad_h / (2k + 1).
  const int dim = model.params.dim;
  const double scale = 1.0 / (2.0 * model.params.window + 1.0);
  gradients.doc.assign(dim, 0.0);
  for (int d = 0; d < dim; ++d) gradients.doc[d] = grad_h[d] * scale;

  for (int word : scratch.context) {
    auto it = std::find_if(gradients.words.begin(), gradients.words.end(),
                           [&](const auto& p) { return p.first == word; });
    if (it == gradients.words.end()) {
      gradients.words.emplace_back(word, gradients.doc);
    } else {
      for (int d = 0; d < dim; ++d) it->second[d] += gradients.doc[d];
    }
  }
  return loss;
}

double window_loss(const EmbeddingModel& model, std::span<const float> doc_vector,
                   std::span<const int> doc_words, int position, std::span<const int> negatives) {
  ForwardScratch scratch;
  return window_core<false>(model, doc_vector, doc_words, position, negatives, scratch, nullptr,
                            nullptr);
}

namespace {

struct TrainContext {
  EmbeddingModel* model;
  const std::vector<std::vector<int>>* docs;
  const std::vector<double>* noise_cdf;
  double lr = 0.0;
};

// Runs every window of `doc_order[begin, end)` once, applying updates in
// place. Returns (loss sum, window count).
std::pair<double, std::uint64_t> train_slice(TrainContext ctx, std::span<const int> doc_order,
                                             std::mt19937_64 rng) {
  EmbeddingModel& model = *ctx.model;
  const int dim = model.params.dim;
  const int k = model.params.window;
  const int ns = model.params.negative_samples;

  ForwardScratch scratch;
  std::vector<double> grad_h(dim);
  std::vector<std::pair<int, std::vector<double>>> output_grads;
  std::vector<int> negatives;

  double loss_sum = 0.0;
  std::uint64_t windows = 0;
  for (int doc_index : doc_order) {
    const std::vector<int>& words = (*ctx.docs)[doc_index];
    const int length = static_cast<int>(words.size());
    std::span<float> doc_row = mutable_row(model.doc_vectors, doc_index, dim);
    double doc_loss = 0.0;
    for (int t = k; t <= length - 1 - k; ++t) {
      if (ns > 0) sample_negatives(*ctx.noise_cdf, ns, words[t], rng, negatives);
      const double loss = window_core<true>(model, std::span<const float>(doc_row), words, t,
                                            negatives, scratch, &grad_h, &output_grads);
      doc_loss += loss;
      ++windows;

      const double input_scale = ctx.lr / (2.0 * k + 1.0);
      for (int d = 0; d < dim; ++d) {
        doc_row[d] -= static_cast<float>(grad_h[d] * input_scale);
      }
      for (int word : scratch.context) {
        std::span<float> w = mutable_row(model.word_vectors, word, dim);
        for (int d = 0; d < dim; ++d) {
          w[d] -= static_cast<float>(grad_h[d] * input_scale);
        }
      }
      for (const auto& [idx, grad] : output_grads) {
        std::span<float> out_row = mutable_row(model.output_weights, idx, dim);
        for (int d = 0; d < dim; ++d) {
          out_row[d] -= static_cast<float>(grad[d] * ctx.lr);
        }
      }
    }
    if (!std::isfinite(doc_loss)) {
      throw Error("train", "non-finite loss at doc index " + std::to_string(doc_index));
    }
    loss_sum += doc_loss;
  }
  return {loss_sum, windows};
}

double epoch_learning_rate(const Hyperparameters& params, int epoch, int total_epochs) {
  if (total_epochs <= 1) return params.lr_start;
  const double t = static_cast<double>(epoch) / static_cast<double>(total_epochs - 1);
  return params.lr_start + (params.lr_end - params.lr_start) * t;
}

}  // namespace

EmbeddingModel train(std::span<const DocTokens> corpus, const Hyperparameters& params,
                     Phase phase, const EmbeddingModel* base, int workers,
                     std::vector<EpochStats>* epoch_log) {
  if (corpus.empty()) throw Error("data", "training corpus is empty");
  if (workers < 1) throw Error("config", "workers must be >= 1");

  EmbeddingModel model;
  model.params = params;
  if (phase == Phase::finetune) {
    if (base == nullptr) throw Error("config", "finetune requires a base model");
    if (params.dim != base->params.dim) {
      throw Error("config", "finetune dim " + std::to_string(params.dim) +
                                " does not match base dim " + std::to_string(base->params.dim));
    }
    // The base model is copied, never mutated; fine-tune tokens missing
    // from the base vocabulary are dropped.
    model.vocab = base->vocab;
    model.word_vectors = base->word_vectors;
    model.output_weights = base->output_weights;
  } else {
    std::vector<std::vector<std::string>> token_streams;
    token_streams.reserve(corpus.size());
    for (const DocTokens& doc : corpus) token_streams.push_back(doc.tokens);
    model.vocab = build_vocab(token_streams, params.min_count);
  }

  const int dim = params.dim;
  std::mt19937_64 init_rng(params.seed);
  if (phase == Phase::pretrain) {
    model.word_vectors = uniform_matrix(model.vocab.size(), dim, init_rng);
    model.output_weights = uniform_matrix(model.vocab.size(), dim, init_rng);
  }
  model.doc_vectors = uniform_matrix(corpus.size(), dim, init_rng);
  model.doc_ids.reserve(corpus.size());
  for (const DocTokens& doc : corpus) model.doc_ids.push_back(doc.id);

  const std::vector<std::vector<int>> docs = map_corpus(corpus, model.vocab);
  const std::vector<double> noise_cdf =
      params.negative_samples > 0 ? build_noise_cdf(model.vocab) : std::vector<double>{};

  std::vector<int> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 shuffle_rng(params.seed ^ 0x9E3779B97F4A7C15ull);

  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    TrainContext ctx{&model, &docs, &noise_cdf, epoch_learning_rate(params, epoch, params.epochs)};

    double loss_sum = 0.0;
    std::uint64_t windows = 0;
    if (workers == 1) {
      std::mt19937_64 rng(params.seed ^ (0xA0761D6478BD642Full + static_cast<std::uint64_t>(epoch)));
      const auto [slice_loss, slice_windows] = train_slice(ctx, order, std::move(rng));
      loss_sum = slice_loss;
      windows = slice_windows;
    } else {
      // Hogwild-style: contiguous slices of the shuffled order share the
      // matrices without locks; races are tolerated and results are
      // nondeterministic.
      const int n = static_cast<int>(order.size());
      const int slice = (n + workers - 1) / workers;
      std::vector<std::thread> threads;
      std::vector<std::pair<double, std::uint64_t>> results(workers);
      std::vector<std::exception_ptr> errors(workers);
      for (int w = 0; w < workers; ++w) {
        const int begin = std::min(w * slice, n);
        const int end = std::min(begin + slice, n);
        threads.emplace_back([&, w, begin, end] {
          try {
            std::mt19937_64 rng(params.seed ^ (0xA0761D6478BD642Full +
                                               static_cast<std::uint64_t>(epoch) * 1000 +
                                               static_cast<std::uint64_t>(w)));
            results[w] = train_slice(ctx, std::span<const int>(order).subspan(begin, end - begin),
                                     std::move(rng));
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
      for (std::thread& t : threads) t.join();
      for (const std::exception_ptr& e : errors) {
        if (e) std::rethrow_exception(e);
      }
      for (const auto& [slice_loss, slice_windows] : results) {
        loss_sum += slice_loss;
        windows += slice_windows;
      }
    }

    check_finite(model.word_vectors, "word vectors", epoch);
    check_finite(model.doc_vectors, "document vectors", epoch);
    check_finite(model.output_weights, "output weights", epoch);
    if (epoch_log) {
      epoch_log->push_back({epoch, windows > 0 ? loss_sum / static_cast<double>(windows) : 0.0,
                            windows});
    }
  }
  return model;
}

DocVector infer_vector(const EmbeddingModel& model, std::span<const std::string> tokens,
                       std::uint64_t seed) {
  std::vector<int> words;
  words.reserve(tokens.size());
  for (const std::string& token : tokens) {
    const int id = model.vocab.lookup(token);
    if (id >= 0) words.push_back(id);
  }
  if (words.empty()) {
    throw Error("data", "cannot infer a vector: every token is out of vocabulary");
  }

  const int dim = model.params.dim;
  const int k = model.params.window;
  const int ns = model.params.negative_samples;
  std::mt19937_64 rng(seed);
  std::vector<float> vec = uniform_matrix(1, dim, rng);

  const std::vector<double> noise_cdf =
      ns > 0 ? build_noise_cdf(model.vocab) : std::vector<double>{};
  ForwardScratch scratch;
  std::vector<double> grad_h(dim);
  std::vector<std::pair<int, std::vector<double>>> output_grads;
  std::vector<int> negatives;

  const int epochs = model.params.inference_epochs;
  const int length = static_cast<int>(words.size());
  for (int epoch = 0; epoch < epochs; ++epoch) {
    const double lr = epoch_learning_rate(model.params, epoch, epochs);
    const double input_scale = lr / (2.0 * k + 1.0);
    for (int t = k; t <= length - 1 - k; ++t) {
      if (ns > 0) sample_negatives(noise_cdf, ns, words[t], rng, negatives);
      window_core<true>(model, vec, words, t, negatives, scratch, &grad_h, &output_grads);
      for (int d = 0; d < dim; ++d) {
        vec[d] -= static_cast<float>(grad_h[d] * input_scale);
      }
    }
  }
  for (float v : vec) {
    if (!std::isfinite(v)) throw Error("train", "non-finite inferred vector");
  }
  return DocVector{std::move(vec), DocVector::Source::inferred};
}

}  // namespace sentinel::embedding
