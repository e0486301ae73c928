#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sentinel/config.hpp"
#include "sentinel/corpus.hpp"
#include "sentinel/evaluate.hpp"

namespace sentinel::cli {

// Shared state resolved from --config/--seed/--workers/--json-logs before
// any subcommand runs.
struct Context {
  config::PipelineConfig config;
  int workers = 1;
  bool json_logs = false;

  void log(const std::string& message) const;
};

struct FetchMetaArgs {
  std::string arxiv_dump;
  std::string venue_map;
  std::string out;
  std::string texts_dir = "texts";
  bool dblp_lookup = false;
  std::string dblp_endpoint;
  std::string cache_dir;
};
int cmd_fetch_meta(const Context& ctx, const FetchMetaArgs& args);

struct PrepArgs {
  std::string in_dir;
  std::string out_dir;
};
int cmd_prep(const Context& ctx, const PrepArgs& args);

struct EmbedArgs {
  std::string phase;  // "pretrain" | "finetune"
  std::string data_dir;
  std::string base_model;
  std::string out;
};
int cmd_embed_train(const Context& ctx, const EmbedArgs& args);

struct InferArgs {
  std::string model;
  std::string doc;
  std::string out;  // empty = stdout
};
int cmd_embed_infer(const Context& ctx, const InferArgs& args);

struct TrainArgs {
  std::string algo;
  std::string data_dir;
  std::string embedding;
  std::string out;
  std::string mode;  // "" = config default
  bool allow_unbalanced = false;
};
int cmd_train(const Context& ctx, const TrainArgs& args);

struct PredictArgs {
  std::string model;
  std::string embedding;
  std::string doc;
  bool allow_embedding_mismatch = false;
};
int cmd_predict(const Context& ctx, const PredictArgs& args);

struct EvaluateArgs {
  std::string data_dir;
  std::string embedding;
  std::string report;
  std::string csv;
  std::vector<std::string> algos;  // empty = config default
  std::string mode;                // "" = config default
  std::optional<double> train_fraction;
  std::optional<int> year_holdout;
  bool allow_unbalanced = false;
};
int cmd_evaluate(const Context& ctx, const EvaluateArgs& args);

struct LlmReviewArgs {
  std::string in_path;  // directory of .txt files or a single file
  std::string log_path;
  std::string endpoint;  // empty = config default
  std::string model;     // empty = config default
  std::optional<double> rate_limit;
  std::optional<int> parallel;
  std::optional<int> max_chunk_tokens;
};
int cmd_llm_review(const Context& ctx, const LlmReviewArgs& args);

struct LlmScoreArgs {
  std::string log_path;
  std::string truth_path;
  std::string published_after;  // RFC 3339; empty = no filter
  std::string out;              // empty = stdout
};
int cmd_llm_score(const Context& ctx, const LlmScoreArgs& args);

// Helpers shared by train/evaluate.
corpus::DatasetManifest load_manifest_with_config(const Context& ctx,
                                                  const std::filesystem::path& manifest_path);
std::vector<evaluate::EvalDocument> load_eval_documents(
    const Context& ctx, const std::filesystem::path& data_dir, const std::string& input_mode,
    bool allow_unbalanced);

}  // namespace sentinel::cli
