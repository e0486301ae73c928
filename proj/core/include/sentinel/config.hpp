#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sentinel/classify.hpp"
#include "sentinel/embedding.hpp"

namespace sentinel::config {

inline constexpr std::string_view kVersion = "0.1.0";

struct Paths {
  std::string corpus_dir;
  std::string manifest;
  std::string model_dir;
  std::string report_dir;
};

struct ExperimentConfig {
  double train_fraction = 0.8;
  bool stratified = true;
  std::string input_mode = "full_text";  // "full_text" | "abstract_only"
  std::vector<std::string> algorithms = {"logreg", "voting"};
  int stacking_folds = 5;
};

struct LlmConfig {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model = "gpt-3.5-turbo";
  int max_chunk_tokens = 3000;
  double chars_per_token = 4.0;
  double temperature = 0.0;
  double rate_limit_per_s = 1.0;
  int max_retries = 3;
  int parallelism = 1;
};

struct CorpusConfig {
  std::vector<std::string> big4_venues;        // empty = built-in defaults
  std::vector<std::string> lower_tier_venues;  // empty = built-in defaults
  int rule3_year_cutoff = 2018;
  int rule1_min_gap_days = 365;
};

struct PrepConfig {
  std::string stop_words_path;
  std::string contractions_path;
  std::vector<std::string> footer_patterns;  // empty = built-in defaults
};

// The shared config document: every block is overridable from the command
// line; the global seed propagates to every seeded component.
struct PipelineConfig {
  Paths paths;
  embedding::Hyperparameters embedding;
  classify::Hyperparameters classifier;
  ExperimentConfig experiment;
  LlmConfig llm;
  CorpusConfig corpus;
  PrepConfig prep;
  std::uint64_t seed = 42;

  static PipelineConfig from_file(const std::filesystem::path& path);
  static PipelineConfig from_json_string(std::string_view text);
  std::string to_json_string() const;

  // Stable fingerprint of the canonical JSON form.
  std::uint64_t hash() const;
};

// "<output>.stamp.json": config hash, seed and artifact version, written
// next to every produced artifact. Byte-identical across reruns of the
// same configuration.
void write_stamp(const std::filesystem::path& output_path, const PipelineConfig& config);

}  // namespace sentinel::config
