#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "commands.hpp"
#include "sentinel/classify.hpp"
#include "sentinel/error.hpp"

namespace {

using sentinel::cli::Context;

void print_error(const Context& ctx, const std::string& category, const std::string& detail) {
  if (ctx.json_logs) {
    std::cerr << "{\"level\":\"error\",\"category\":\"" << category << "\",\"msg\":"
              << nlohmann::json(detail).dump() << "}\n";
  } else {
    std::cerr << "error: " << category << ": " << detail << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sentinel - peer-review outcome prediction pipeline"};
  app.require_subcommand(0, 1);

  std::string config_path;
  std::uint64_t seed_override = 0;
  bool seed_given = false;
  Context ctx;

  app.add_option("--config", config_path, "pipeline config file (JSON)");
  app.add_option("--seed", seed_override, "override the config seed")
      ->each([&](const std::string&) { seed_given = true; });
  app.add_option("--workers", ctx.workers, "worker threads for training")
      ->check(CLI::PositiveNumber);
  app.add_flag("--json-logs", ctx.json_logs, "emit JSON log lines on stderr");

  // fetch-meta
  auto* fetch = app.add_subcommand("fetch-meta",
                                   "build a manifest from an arXiv metadata dump and venue map");
  sentinel::cli::FetchMetaArgs fetch_args;
  fetch->add_option("--arxiv", fetch_args.arxiv_dump, "arXiv metadata dump (JSON lines)")
      ->required();
  fetch->add_option("--venues", fetch_args.venue_map, "venue map (JSON lines of {id,venue,year})");
  fetch->add_option("--out", fetch_args.out, "output manifest path")->required();
  fetch->add_option("--texts-dir", fetch_args.texts_dir, "directory recorded as text_path root");
  fetch->add_flag("--dblp-lookup", fetch_args.dblp_lookup, "resolve venues via a DBLP endpoint");
  fetch->add_option("--dblp-endpoint", fetch_args.dblp_endpoint,
                    "DBLP search endpoint URL (required with --dblp-lookup)");
  fetch->add_option("--cache-dir", fetch_args.cache_dir, "on-disk cache for DBLP responses");

  // prep
  auto* prep = app.add_subcommand("prep", "normalize raw .txt documents into token files");
  sentinel::cli::PrepArgs prep_args;
  prep->add_option("--in", prep_args.in_dir, "directory of raw .txt documents")->required();
  prep->add_option("--out", prep_args.out_dir, "output directory for token files")->required();

  // embed
  auto* embed = app.add_subcommand("embed", "train or apply the document embedding model");
  embed->require_subcommand(1);
  sentinel::cli::EmbedArgs embed_args;
  sentinel::cli::InferArgs infer_args;
  auto* pretrain = embed->add_subcommand("pretrain", "train embeddings on the full corpus");
  pretrain->add_option("--data", embed_args.data_dir,
                       "data directory (manifest.jsonl + tokens/)")
      ->required();
  pretrain->add_option("--out", embed_args.out, "output model file")->required();
  auto* finetune = embed->add_subcommand("finetune", "fine-tune embeddings on security papers");
  finetune->add_option("--data", embed_args.data_dir,
                       "data directory (manifest.jsonl + tokens/)")
      ->required();
  finetune->add_option("--base", embed_args.base_model, "pretrained base model")->required();
  finetune->add_option("--out", embed_args.out, "output model file")->required();
  auto* infer = embed->add_subcommand("infer", "infer a vector for one document");
  infer->add_option("--model", infer_args.model, "trained model file")->required();
  infer->add_option("--doc", infer_args.doc, "document (.txt raw or .tokens.txt)")->required();
  infer->add_option("--out", infer_args.out, "output JSON path (default stdout)");

  // train
  auto* train = app.add_subcommand("train", "fit a classifier on a labeled dataset");
  sentinel::cli::TrainArgs train_args;
  train->add_option("--algo", train_args.algo, "algorithm name, or voting/stacking")->required();
  train->add_option("--data", train_args.data_dir, "data directory (manifest.jsonl + tokens/)")
      ->required();
  train->add_option("--embedding", train_args.embedding, "trained embedding model")->required();
  train->add_option("--out", train_args.out, "output classifier file")->required();
  train->add_option("--mode", train_args.mode, "full_text or abstract_only");
  train->add_flag("--unbalanced", train_args.allow_unbalanced,
                  "proceed when the dataset cannot be balanced");

  // predict
  auto* predict = app.add_subcommand("predict", "predict accept/reject for one document");
  sentinel::cli::PredictArgs predict_args;
  predict->add_option("--model", predict_args.model, "classifier file")->required();
  predict->add_option("--embedding", predict_args.embedding, "embedding model file")->required();
  predict->add_option("--doc", predict_args.doc, "document (.txt raw or .tokens.txt)")
      ->required();
  predict->add_flag("--allow-embedding-mismatch", predict_args.allow_embedding_mismatch,
                    "skip the embedding fingerprint check");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "run a split experiment and report metrics");
  sentinel::cli::EvaluateArgs eval_args;
  double train_fraction = 0.0;
  int year_holdout = 0;
  evaluate->add_option("--data", eval_args.data_dir, "data directory (manifest.jsonl + tokens/)")
      ->required();
  evaluate->add_option("--embedding", eval_args.embedding, "embedding model file")->required();
  evaluate->add_option("--report", eval_args.report, "write the JSON report here");
  evaluate->add_option("--csv", eval_args.csv, "also export a CSV table");
  evaluate->add_option("--algos", eval_args.algos, "algorithms to evaluate")->delimiter(',');
  evaluate->add_option("--mode", eval_args.mode, "full_text or abstract_only");
  auto* fraction_opt =
      evaluate->add_option("--train-fraction", train_fraction, "train split fraction in (0,1)");
  auto* holdout_opt = evaluate->add_option(
      "--year-holdout", year_holdout, "train on years before this; report accuracy per year");
  evaluate->add_flag("--unbalanced", eval_args.allow_unbalanced,
                     "proceed when the dataset cannot be balanced");

  // llm-review
  auto* review = app.add_subcommand("llm-review", "review papers through a chat endpoint");
  sentinel::cli::LlmReviewArgs review_args;
  double rate_limit = 0.0;
  int parallel = 0;
  int max_chunk_tokens = 0;
  review->add_option("--in", review_args.in_path, "paper .txt file or directory")->required();
  review->add_option("--log", review_args.log_path, "append-only verdict log (JSON lines)")
      ->required();
  review->add_option("--endpoint", review_args.endpoint, "chat-completions endpoint URL");
  review->add_option("--model", review_args.model, "model name");
  auto* rate_opt = review->add_option("--rate-limit", rate_limit, "max requests per second");
  auto* parallel_opt = review->add_option("--parallel", parallel, "concurrent reviews");
  auto* chunk_opt =
      review->add_option("--max-chunk-tokens", max_chunk_tokens, "token budget per chunk");

  // llm-score
  auto* score = app.add_subcommand("llm-score", "score a verdict log against ground truth");
  sentinel::cli::LlmScoreArgs score_args;
  score->add_option("--log", score_args.log_path, "verdict log (JSON lines)")->required();
  score->add_option("--truth", score_args.truth_path,
                    "ground truth (JSON lines of {id,label,source,published_at})")
      ->required();
  score->add_option("--published-after", score_args.published_after,
                    "only score papers published after this RFC 3339 timestamp");
  score->add_option("--out", score_args.out, "write the score report here (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << "\n";
    return 2;
  }

  try {
    if (!config_path.empty()) {
      ctx.config = sentinel::config::PipelineConfig::from_file(config_path);
    }
    if (seed_given) ctx.config.seed = seed_override;

    if (fetch->parsed()) return sentinel::cli::cmd_fetch_meta(ctx, fetch_args);
    if (prep->parsed()) return sentinel::cli::cmd_prep(ctx, prep_args);
    if (embed->parsed()) {
      if (pretrain->parsed()) {
        embed_args.phase = "pretrain";
        return sentinel::cli::cmd_embed_train(ctx, embed_args);
      }
      if (finetune->parsed()) {
        embed_args.phase = "finetune";
        return sentinel::cli::cmd_embed_train(ctx, embed_args);
      }
      if (infer->parsed()) return sentinel::cli::cmd_embed_infer(ctx, infer_args);
    }
    if (train->parsed()) return sentinel::cli::cmd_train(ctx, train_args);
    if (predict->parsed()) return sentinel::cli::cmd_predict(ctx, predict_args);
    if (evaluate->parsed()) {
      if (fraction_opt->count() > 0) eval_args.train_fraction = train_fraction;
      if (holdout_opt->count() > 0) eval_args.year_holdout = year_holdout;
      return sentinel::cli::cmd_evaluate(ctx, eval_args);
    }
    if (review->parsed()) {
      if (rate_opt->count() > 0) review_args.rate_limit = rate_limit;
      if (parallel_opt->count() > 0) review_args.parallel = parallel;
      if (chunk_opt->count() > 0) review_args.max_chunk_tokens = max_chunk_tokens;
      return sentinel::cli::cmd_llm_review(ctx, review_args);
    }
    if (score->parsed()) return sentinel::cli::cmd_llm_score(ctx, score_args);

    std::cout << app.help();
    return 0;
  } catch (const sentinel::Error& e) {
    print_error(ctx, e.category(), e.what());
    const std::string& category = e.category();
    const bool usage_class = category == "usage" || category == "config" ||
                             category == "parse" || category == "validate";
    return usage_class ? 2 : 1;
  } catch (const std::exception& e) {
    print_error(ctx, "internal", e.what());
    return 1;
  }
}
