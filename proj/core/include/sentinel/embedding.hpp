#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sentinel::embedding {

struct Vocabulary {
  std::unordered_map<std::string, int> index;  // token -> id
  std::vector<std::string> tokens;             // id -> token
  std::vector<std::uint64_t> counts;           // id -> corpus frequency
  int min_count = 1;

  std::size_t size() const { return tokens.size(); }
  // -1 when the token was filtered or never seen.
  int lookup(std::string_view token) const;

  friend bool operator==(const Vocabulary&, const Vocabulary&) = default;
};

// Tokens with frequency >= min_count, ids assigned by descending frequency
// with lexicographic tie-break.
Vocabulary build_vocab(std::span<const std::vector<std::string>> corpus, int min_count);

struct Hyperparameters {
  int dim = 100;
  int window = 5;  // context words on each side of the center word
  int epochs = 20;
  double lr_start = 0.025;
  double lr_end = 0.0001;
  int negative_samples = 5;  // 0 selects the full-softmax reference path
  int min_count = 5;
  int inference_epochs = 50;
  std::uint64_t seed = 1;

  friend bool operator==(const Hyperparameters&, const Hyperparameters&) = default;
};

// PV-DM paragraph-vector model: the center word of each sliding window is
// predicted from the average of the document vector and the 2*window
// context word vectors. Matrices are row-major float32.
struct EmbeddingModel {
  Hyperparameters params;
  Vocabulary vocab;
  std::vector<std::string> doc_ids;   // row i of doc_vectors
  std::vector<float> word_vectors;    // |V| x dim
  std::vector<float> doc_vectors;     // N x dim
  std::vector<float> output_weights;  // |V| x dim (prediction layer)

  std::span<const float> word_row(int i) const;
  std::span<const float> doc_row(int i) const;
  std::span<const float> output_row(int i) const;
  std::optional<int> doc_row_index(std::string_view id) const;

  friend bool operator==(const EmbeddingModel&, const EmbeddingModel&) = default;
};

struct DocVector {
  enum class Source { trained, inferred };
  std::vector<float> values;
  Source source = Source::inferred;
};

struct DocTokens {
  std::string id;
  std::vector<std::string> tokens;
};

enum class Phase { pretrain, finetune };

struct EpochStats {
  int epoch = 0;
  double mean_loss = 0.0;
  std::uint64_t windows = 0;
};

// Numerically stable softmax; output sums to 1.
std::vector<double> softmax(std::span<const double> logits);

// Sparse gradients of one window's loss with respect to the document
// vector, the context word rows and the touched output rows.
struct WindowGradients {
  std::vector<double> doc;
  std::vector<std::pair<int, std::vector<double>>> words;
  std::vector<std::pair<int, std::vector<double>>> outputs;

  void clear();
};

// Negative log probability of the center word at `position` given the
// document vector and the surrounding 2*window words, with exact analytic
// gradients. Full softmax when params.negative_samples == 0, otherwise the
// negative-sampling surrogate over `negatives` (which must not contain the
// center word). `doc_words` holds in-vocabulary token ids; windows exist
// only where the full context fits.
double loss_and_gradients(const EmbeddingModel& model, std::span<const float> doc_vector,
                          std::span<const int> doc_words, int position,
                          std::span<const int> negatives, WindowGradients& gradients);

// Same forward computation without gradients (finite-difference oracles
// perturb parameters and call this).
double window_loss(const EmbeddingModel& model, std::span<const float> doc_vector,
                   std::span<const int> doc_words, int position,
                   std::span<const int> negatives);

// SGD training. Pretrain builds the vocabulary and seeds all matrices from
// uniform(-0.5/dim, 0.5/dim); finetune copies word/output weights from
// `base` (which is never mutated), maps the corpus onto the base
// vocabulary (out-of-vocabulary tokens dropped) and allocates fresh
// document rows. Single-worker runs are bit-reproducible given (corpus,
// params, seed); workers > 1 uses lock-free shared updates and is
// nondeterministic.
EmbeddingModel train(std::span<const DocTokens> corpus, const Hyperparameters& params,
                     Phase phase, const EmbeddingModel* base = nullptr, int workers = 1,
                     std::vector<EpochStats>* epoch_log = nullptr);

// Optimizes a fresh document vector against frozen word/output weights for
// params.inference_epochs epochs. Deterministic given the seed.
DocVector infer_vector(const EmbeddingModel& model, std::span<const std::string> tokens,
                       std::uint64_t seed);

// Model file: magic "SNTL", format version u32, hyperparameters,
// vocabulary, doc ids, then the three matrices as little-endian float32
// row-major, with a trailing CRC-32C.
void save_model(const EmbeddingModel& model, const std::filesystem::path& path);
EmbeddingModel load_model(const std::filesystem::path& path);

inline constexpr std::uint32_t kModelFormatVersion = 1;

}  // namespace sentinel::embedding
