#include "sentinel/config.hpp"

#include <cstdio>

#include <json.hpp>

#include "sentinel/error.hpp"
#include "sentinel/util.hpp"

namespace sentinel::config {

namespace {

using nlohmann::json;

template <typename T>
void read_if(const json& doc, const char* key, T& out) {
  if (doc.contains(key)) out = doc.at(key).get<T>();
}

}  // namespace

PipelineConfig PipelineConfig::from_file(const std::filesystem::path& path) {
  return from_json_string(util::read_file(path));
}

PipelineConfig PipelineConfig::from_json_string(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error("config", std::string("config parse failure: ") + e.what());
  }
  if (!doc.is_object()) throw Error("config", "config root must be an object");

  PipelineConfig cfg;
  if (doc.contains("paths")) {
    const json& p = doc["paths"];
    read_if(p, "corpus_dir", cfg.paths.corpus_dir);
    read_if(p, "manifest", cfg.paths.manifest);
    read_if(p, "model_dir", cfg.paths.model_dir);
    read_if(p, "report_dir", cfg.paths.report_dir);
  }
  if (doc.contains("embedding")) {
    const json& e = doc["embedding"];
    read_if(e, "dim", cfg.embedding.dim);
    read_if(e, "window", cfg.embedding.window);
    read_if(e, "epochs", cfg.embedding.epochs);
    read_if(e, "lr_start", cfg.embedding.lr_start);
    read_if(e, "lr_end", cfg.embedding.lr_end);
    read_if(e, "negative_samples", cfg.embedding.negative_samples);
    read_if(e, "min_count", cfg.embedding.min_count);
    read_if(e, "inference_epochs", cfg.embedding.inference_epochs);
  }
  if (doc.contains("classifier")) {
    const json& c = doc["classifier"];
    read_if(c, "logreg_lr", cfg.classifier.logreg_lr);
    read_if(c, "logreg_iterations", cfg.classifier.logreg_iterations);
    read_if(c, "logreg_l2", cfg.classifier.logreg_l2);
    read_if(c, "svm_lr", cfg.classifier.svm_lr);
    read_if(c, "svm_epochs", cfg.classifier.svm_epochs);
    read_if(c, "svm_l2", cfg.classifier.svm_l2);
    read_if(c, "knn_k", cfg.classifier.knn_k);
    read_if(c, "tree_max_depth", cfg.classifier.tree_max_depth);
    read_if(c, "tree_min_samples_split", cfg.classifier.tree_min_samples_split);
    read_if(c, "forest_trees", cfg.classifier.forest_trees);
    read_if(c, "forest_max_features", cfg.classifier.forest_max_features);
    read_if(c, "adaboost_rounds", cfg.classifier.adaboost_rounds);
    read_if(c, "lda_ridge", cfg.classifier.lda_ridge);
  }
  if (doc.contains("experiment")) {
    const json& e = doc["experiment"];
    read_if(e, "train_fraction", cfg.experiment.train_fraction);
    read_if(e, "stratified", cfg.experiment.stratified);
    read_if(e, "input_mode", cfg.experiment.input_mode);
    read_if(e, "algorithms", cfg.experiment.algorithms);
    read_if(e, "stacking_folds", cfg.experiment.stacking_folds);
  }
  if (doc.contains("llm")) {
    const json& l = doc["llm"];
    read_if(l, "endpoint", cfg.llm.endpoint);
    read_if(l, "model", cfg.llm.model);
    read_if(l, "max_chunk_tokens", cfg.llm.max_chunk_tokens);
    read_if(l, "chars_per_token", cfg.llm.chars_per_token);
    read_if(l, "temperature", cfg.llm.temperature);
    read_if(l, "rate_limit_per_s", cfg.llm.rate_limit_per_s);
    read_if(l, "max_retries", cfg.llm.max_retries);
    read_if(l, "parallelism", cfg.llm.parallelism);
  }
  if (doc.contains("corpus")) {
    const json& c = doc["corpus"];
    read_if(c, "big4_venues", cfg.corpus.big4_venues);
    read_if(c, "lower_tier_venues", cfg.corpus.lower_tier_venues);
    read_if(c, "rule3_year_cutoff", cfg.corpus.rule3_year_cutoff);
    read_if(c, "rule1_min_gap_days", cfg.corpus.rule1_min_gap_days);
  }
  if (doc.contains("prep")) {
    const json& p = doc["prep"];
    read_if(p, "stop_words_path", cfg.prep.stop_words_path);
    read_if(p, "contractions_path", cfg.prep.contractions_path);
    read_if(p, "footer_patterns", cfg.prep.footer_patterns);
  }
  read_if(doc, "seed", cfg.seed);

  if (cfg.experiment.input_mode != "full_text" && cfg.experiment.input_mode != "abstract_only") {
    throw Error("config", "experiment.input_mode must be full_text or abstract_only");
  }
  if (cfg.experiment.train_fraction <= 0.0 || cfg.experiment.train_fraction >= 1.0) {
    throw Error("config", "experiment.train_fraction must lie in (0, 1)");
  }
  return cfg;
}

std::string PipelineConfig::to_json_string() const {
  json doc;
  doc["paths"] = {{"corpus_dir", paths.corpus_dir},
                  {"manifest", paths.manifest},
                  {"model_dir", paths.model_dir},
                  {"report_dir", paths.report_dir}};
  doc["embedding"] = {{"dim", embedding.dim},
                      {"window", embedding.window},
                      {"epochs", embedding.epochs},
                      {"lr_start", embedding.lr_start},
                      {"lr_end", embedding.lr_end},
                      {"negative_samples", embedding.negative_samples},
                      {"min_count", embedding.min_count},
                      {"inference_epochs", embedding.inference_epochs}};
  doc["classifier"] = {{"logreg_lr", classifier.logreg_lr},
                       {"logreg_iterations", classifier.logreg_iterations},
                       {"logreg_l2", classifier.logreg_l2},
                       {"svm_lr", classifier.svm_lr},
                       {"svm_epochs", classifier.svm_epochs},
                       {"svm_l2", classifier.svm_l2},
                       {"knn_k", classifier.knn_k},
                       {"tree_max_depth", classifier.tree_max_depth},
                       {"tree_min_samples_split", classifier.tree_min_samples_split},
                       {"forest_trees", classifier.forest_trees},
                       {"forest_max_features", classifier.forest_max_features},
                       {"adaboost_rounds", classifier.adaboost_rounds},
                       {"lda_ridge", classifier.lda_ridge}};
  doc["experiment"] = {{"train_fraction", experiment.train_fraction},
                       {"stratified", experiment.stratified},
                       {"input_mode", experiment.input_mode},
                       {"algorithms", experiment.algorithms},
                       {"stacking_folds", experiment.stacking_folds}};
  doc["llm"] = {{"endpoint", llm.endpoint},
                {"model", llm.model},
                {"max_chunk_tokens", llm.max_chunk_tokens},
                {"chars_per_token", llm.chars_per_token},
                {"temperature", llm.temperature},
                {"rate_limit_per_s", llm.rate_limit_per_s},
                {"max_retries", llm.max_retries},
                {"parallelism", llm.parallelism}};
  doc["corpus"] = {{"big4_venues", corpus.big4_venues},
                   {"lower_tier_venues", corpus.lower_tier_venues},
                   {"rule3_year_cutoff", corpus.rule3_year_cutoff},
                   {"rule1_min_gap_days", corpus.rule1_min_gap_days}};
  doc["prep"] = {{"stop_words_path", prep.stop_words_path},
                 {"contractions_path", prep.contractions_path},
                 {"footer_patterns", prep.footer_patterns}};
  doc["seed"] = seed;
  return doc.dump(2) + "\n";
}

std::uint64_t PipelineConfig::hash() const {
  // json::dump() emits object keys sorted, so the form is canonical.
  return util::fnv1a64(to_json_string());
}

void write_stamp(const std::filesystem::path& output_path, const PipelineConfig& config) {
  nlohmann::ordered_json stamp;
  char hex[32];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(config.hash()));
  stamp["config_hash"] = hex;
  stamp["seed"] = config.seed;
  stamp["version"] = std::string(kVersion);
  std::filesystem::path stamp_path = output_path;
  stamp_path += ".stamp.json";
  util::write_file(stamp_path, stamp.dump(2) + "\n");
}

}  // namespace sentinel::config
