#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "sentinel/classify.hpp"
#include "sentinel/embedding.hpp"
#include "sentinel/error.hpp"
#include "sentinel/llm.hpp"
#include "sentinel/textprep.hpp"
#include "sentinel/util.hpp"

namespace sentinel::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

void Context::log(const std::string& message) const {
  if (json_logs) {
    ordered_json line;
    line["level"] = "info";
    line["msg"] = message;
    std::cerr << line.dump() << "\n";
  } else {
    std::cerr << "[sentinel] " << message << "\n";
  }
}

namespace {

textprep::AnonymizeConfig anonymize_config(const Context& ctx) {
  textprep::AnonymizeConfig cfg = textprep::AnonymizeConfig::defaults();
  if (!ctx.config.prep.footer_patterns.empty()) {
    cfg.footer_patterns = ctx.config.prep.footer_patterns;
  }
  return cfg;
}

textprep::NormalizeConfig normalize_config(const Context& ctx) {
  return textprep::NormalizeConfig::from_files(ctx.config.prep.stop_words_path,
                                               ctx.config.prep.contractions_path);
}

std::vector<std::string> read_token_file(const fs::path& path) {
  std::istringstream in(util::read_file(path));
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) tokens.push_back(line);
  }
  return tokens;
}

void write_token_file(const fs::path& path, const std::vector<std::string>& tokens) {
  std::string out;
  for (const std::string& token : tokens) {
    out += token;
    out += '\n';
  }
  util::write_file(path, out);
}

fs::path tokens_dir(const fs::path& data_dir) { return data_dir / "tokens"; }

std::vector<std::string> tokens_for(const fs::path& data_dir, const std::string& id,
                                    const std::string& input_mode) {
  const char* suffix = input_mode == "abstract_only" ? ".abstract.txt" : ".tokens.txt";
  return read_token_file(tokens_dir(data_dir) / (id + suffix));
}

embedding::Hyperparameters embedding_params(const Context& ctx) {
  embedding::Hyperparameters params = ctx.config.embedding;
  params.seed = ctx.config.seed;
  return params;
}

classify::Hyperparameters classifier_params(const Context& ctx) {
  classify::Hyperparameters params = ctx.config.classifier;
  params.seed = ctx.config.seed;
  return params;
}

}  // namespace

corpus::DatasetManifest load_manifest_with_config(const Context& ctx,
                                                  const fs::path& manifest_path) {
  corpus::DatasetManifest manifest = corpus::load_manifest(manifest_path);
  manifest.rule3_year_cutoff = ctx.config.corpus.rule3_year_cutoff;
  manifest.rule1_min_gap_days = ctx.config.corpus.rule1_min_gap_days;
  manifest.seed = ctx.config.seed;
  if (!ctx.config.corpus.big4_venues.empty()) {
    manifest.big4_venues.clear();
    for (const std::string& v : ctx.config.corpus.big4_venues) {
      manifest.big4_venues.insert(corpus::normalize_venue(v));
    }
  }
  if (!ctx.config.corpus.lower_tier_venues.empty()) {
    manifest.lower_tier_venues.clear();
    for (const std::string& v : ctx.config.corpus.lower_tier_venues) {
      manifest.lower_tier_venues.insert(corpus::normalize_venue(v));
    }
  }
  for (const std::string& big4 : manifest.big4_venues) {
    if (manifest.lower_tier_venues.contains(big4)) {
      throw Error("config", "venue '" + big4 + "' appears in both venue tiers");
    }
  }
  return manifest;
}

std::vector<evaluate::EvalDocument> load_eval_documents(const Context& ctx,
                                                        const fs::path& data_dir,
                                                        const std::string& input_mode,
                                                        bool allow_unbalanced) {
  const corpus::DatasetManifest manifest =
      load_manifest_with_config(ctx, data_dir / "manifest.jsonl");
  corpus::BalanceOptions options;
  options.allow_unbalanced = allow_unbalanced;
  const std::vector<corpus::LabeledDocument> labeled =
      corpus::build_balanced_dataset(manifest, options);

  std::vector<evaluate::EvalDocument> documents;
  documents.reserve(labeled.size());
  for (const corpus::LabeledDocument& doc : labeled) {
    evaluate::EvalDocument out;
    out.id = doc.id;
    out.label = static_cast<int>(doc.label);
    out.year = doc.year;
    out.source =
        doc.provenance == corpus::LabelProvenance::published_big4 ? "proceedings" : "arxiv";
    out.tokens = tokens_for(data_dir, doc.id, input_mode);
    documents.push_back(std::move(out));
  }
  return documents;
}

// --- fetch-meta ---

namespace {

// "Mon, 2 Apr 2007 19:18:42 GMT" (the arXiv metadata dump's version dates).
std::int64_t parse_rfc1123(const std::string& text) {
  static const std::map<std::string, int> kMonths = {
      {"Jan", 1}, {"Feb", 2}, {"Mar", 3}, {"Apr", 4},  {"May", 5},  {"Jun", 6},
      {"Jul", 7}, {"Aug", 8}, {"Sep", 9}, {"Oct", 10}, {"Nov", 11}, {"Dec", 12}};
  char month_name[4] = {0};
  int day = 0, year = 0, hour = 0, minute = 0, second = 0;
  const char* start = text.c_str();
  const char* comma = std::strchr(start, ',');
  if (comma != nullptr) start = comma + 1;
  if (std::sscanf(start, " %d %3s %d %d:%d:%d", &day, month_name, &year, &hour, &minute,
                  &second) != 6) {
    throw Error("parse", "unrecognized version date: '" + text + "'");
  }
  const auto it = kMonths.find(month_name);
  if (it == kMonths.end()) throw Error("parse", "unrecognized month in date: '" + text + "'");
  char rfc3339[32];
  std::snprintf(rfc3339, sizeof(rfc3339), "%04d-%02d-%02dT%02d:%02d:%02dZ", year, it->second, day,
                hour, minute, second);
  return util::parse_rfc3339(rfc3339);
}

std::string percent_encode(std::string_view text) {
  std::string out;
  for (unsigned char c : text) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      char buf[4];
      std::snprintf(buf, sizeof(buf), "%%%02X", c);
      out += buf;
    }
  }
  return out;
}

struct DblpClient {
  std::string endpoint;
  fs::path cache_dir;

  // Returns the response body for a title query, served from the on-disk
  // cache when possible.
  std::string query(const Context& ctx, const std::string& title) {
    fs::path cache_file;
    if (!cache_dir.empty()) {
      char name[32];
      std::snprintf(name, sizeof(name), "%016llx.json",
                    static_cast<unsigned long long>(util::fnv1a64(title)));
      cache_file = cache_dir / name;
      if (fs::exists(cache_file)) return util::read_file(cache_file);
    }
    const std::size_t scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos) {
      throw Error("config", "DBLP endpoint must include a scheme: " + endpoint);
    }
    const std::size_t path_start = endpoint.find('/', scheme_end + 3);
    const std::string base =
        path_start == std::string::npos ? endpoint : endpoint.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : endpoint.substr(path_start);

    httplib::Client client(base);
    client.set_read_timeout(30);
    const std::string url = path + "?q=" + percent_encode(title) + "&format=json&h=1";
    httplib::Result result = client.Get(url);
    if (!result || result->status != 200) {
      throw Error("http", "DBLP lookup failed for '" + title + "'" +
                              (result ? " (HTTP " + std::to_string(result->status) + ")" : ""));
    }
    if (!cache_file.empty()) {
      fs::create_directories(cache_dir);
      util::write_file(cache_file, result->body);
    }
    ctx.log("dblp lookup: " + title);
    return result->body;
  }

  // venue/year from the first hit, when present.
  static std::pair<std::optional<std::string>, std::optional<int>> parse_hit(
      const std::string& body) {
    json doc;
    try {
      doc = json::parse(body);
    } catch (const json::exception&) {
      return {std::nullopt, std::nullopt};
    }
    try {
      const json& hits = doc.at("result").at("hits");
      if (hits.value("@total", std::string("0")) == "0") return {std::nullopt, std::nullopt};
      const json& info = hits.at("hit").at(0).at("info");
      std::optional<std::string> venue;
      std::optional<int> year;
      if (info.contains("venue")) {
        if (info["venue"].is_array()) {
          venue = info["venue"].at(0).get<std::string>();
        } else {
          venue = info["venue"].get<std::string>();
        }
      }
      if (info.contains("year")) year = std::stoi(info["year"].get<std::string>());
      return {venue, year};
    } catch (const std::exception&) {
      return {std::nullopt, std::nullopt};
    }
  }
};

}  // namespace

int cmd_fetch_meta(const Context& ctx, const FetchMetaArgs& args) {
  // Venue map: JSONL of {id, venue, year?}.
  std::map<std::string, std::pair<std::string, std::optional<int>>> venue_map;
  if (!args.venue_map.empty()) {
    std::istringstream in(util::read_file(args.venue_map));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      json doc;
      try {
        doc = json::parse(line);
      } catch (const json::exception& e) {
        throw Error("parse", args.venue_map + ":" + std::to_string(line_no) + ": " + e.what());
      }
      std::optional<int> year;
      if (doc.contains("year")) year = doc["year"].get<int>();
      venue_map[doc.at("id").get<std::string>()] = {doc.at("venue").get<std::string>(), year};
    }
  }

  std::optional<DblpClient> dblp;
  if (args.dblp_lookup) {
    if (args.dblp_endpoint.empty()) {
      throw Error("usage", "--dblp-lookup requires --dblp-endpoint");
    }
    dblp = DblpClient{args.dblp_endpoint, fs::path(args.cache_dir)};
  }

  corpus::DatasetManifest manifest;
  std::istringstream in(util::read_file(args.arxiv_dump));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::exception& e) {
      throw Error("parse", args.arxiv_dump + ":" + std::to_string(line_no) + ": " + e.what());
    }

    corpus::ManifestRecord record;
    record.id = doc.at("id").get<std::string>();
    record.title = doc.value("title", std::string{});
    // Titles in the dump wrap lines; normalize whitespace.
    std::replace(record.title.begin(), record.title.end(), '\n', ' ');
    record.source = corpus::Source::preprint;
    record.text_path = (fs::path(args.texts_dir) / (record.id + ".txt")).string();

    if (doc.contains("categories")) {
      std::istringstream cats(doc["categories"].get<std::string>());
      std::string tag;
      while (cats >> tag) record.category_tags.push_back(tag);
    }
    if (doc.contains("versions")) {
      for (const json& v : doc["versions"]) {
        corpus::ArxivVersion version;
        std::string number = v.value("version", std::string("v0"));
        version.number = std::atoi(number.c_str() + (number.empty() || number[0] != 'v' ? 0 : 1));
        version.timestamp = parse_rfc1123(v.at("created").get<std::string>());
        record.arxiv_versions.push_back(version);
      }
      std::sort(record.arxiv_versions.begin(), record.arxiv_versions.end(),
                [](const corpus::ArxivVersion& a, const corpus::ArxivVersion& b) {
                  return a.timestamp < b.timestamp;
                });
    }
    if (!record.arxiv_versions.empty()) {
      record.year = util::utc_year(record.arxiv_versions.front().timestamp);
    }

    if (const auto it = venue_map.find(record.id); it != venue_map.end()) {
      record.venue = it->second.first;
      if (it->second.second.has_value()) record.year = *it->second.second;
    } else if (dblp.has_value() && !record.title.empty()) {
      const auto [venue, year] = DblpClient::parse_hit(dblp->query(ctx, record.title));
      if (venue.has_value()) record.venue = venue;
      if (year.has_value()) record.year = *year;
    }
    if (record.venue.has_value()) {
      const std::string key = corpus::normalize_venue(*record.venue);
      if (corpus::default_big4_venues().contains(key)) {
        record.venue_tier = corpus::VenueTier::big4;
      } else if (corpus::default_lower_tier_venues().contains(key)) {
        record.venue_tier = corpus::VenueTier::lower_tier;
      }
    }
    manifest.records.push_back(std::move(record));
  }

  corpus::save_manifest(manifest, args.out);
  config::write_stamp(args.out, ctx.config);
  ctx.log("fetch-meta: wrote " + std::to_string(manifest.records.size()) + " records to " +
          args.out);
  return 0;
}

// --- prep ---

int cmd_prep(const Context& ctx, const PrepArgs& args) {
  const fs::path in_dir(args.in_dir);
  const fs::path out_dir(args.out_dir);
  if (!fs::is_directory(in_dir)) throw Error("usage", "--in is not a directory: " + args.in_dir);
  fs::create_directories(out_dir);

  const textprep::AnonymizeConfig anon_cfg = anonymize_config(ctx);
  const textprep::NormalizeConfig norm_cfg = normalize_config(ctx);

  std::vector<fs::path> inputs;
  for (const auto& entry : fs::directory_iterator(in_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      inputs.push_back(entry.path());
    }
  }
  std::sort(inputs.begin(), inputs.end());

  std::string log_lines;
  for (const fs::path& path : inputs) {
    textprep::RawDocument raw{path.stem().string(), util::read_file(path)};
    textprep::AnonymizeResult anon_log;
    const textprep::NormalizedDocument doc =
        textprep::prepare(raw, anon_cfg, norm_cfg, &anon_log);
    write_token_file(out_dir / (doc.id + ".tokens.txt"), doc.tokens);
    write_token_file(out_dir / (doc.id + ".abstract.txt"), doc.abstract_tokens);

    ordered_json entry;
    entry["id"] = doc.id;
    entry["tokens"] = doc.tokens.size();
    entry["abstract_tokens"] = doc.abstract_tokens.size();
    entry["header_removed"] = anon_log.header_removed;
    entry["bibliography_removed"] = anon_log.bibliography_removed;
    entry["footer_lines_removed"] = anon_log.footer_lines_removed;
    log_lines += entry.dump();
    log_lines += '\n';
  }
  util::write_file(out_dir / "prep_log.jsonl", log_lines);
  ctx.log("prep: processed " + std::to_string(inputs.size()) + " documents into " + args.out_dir);
  return 0;
}

// --- embed ---

namespace {

std::vector<embedding::DocTokens> collect_doc_tokens(
    const fs::path& data_dir, const std::vector<const corpus::ManifestRecord*>& pool) {
  std::vector<embedding::DocTokens> docs;
  docs.reserve(pool.size());
  for (const corpus::ManifestRecord* record : pool) {
    docs.push_back({record->id, tokens_for(data_dir, record->id, "full_text")});
  }
  return docs;
}

}  // namespace

int cmd_embed_train(const Context& ctx, const EmbedArgs& args) {
  const fs::path data_dir(args.data_dir);
  const corpus::DatasetManifest manifest =
      load_manifest_with_config(ctx, data_dir / "manifest.jsonl");

  embedding::Hyperparameters params = embedding_params(ctx);
  std::vector<embedding::EpochStats> epoch_log;
  embedding::EmbeddingModel model;

  if (args.phase == "pretrain") {
    const auto docs = collect_doc_tokens(data_dir, corpus::pretrain_pool(manifest));
    model = embedding::train(docs, params, embedding::Phase::pretrain, nullptr, ctx.workers,
                             &epoch_log);
  } else {
    if (args.base_model.empty()) throw Error("usage", "finetune requires --base");
    const embedding::EmbeddingModel base = embedding::load_model(args.base_model);
    params.dim = base.params.dim;
    const auto docs = collect_doc_tokens(data_dir, corpus::security_pool(manifest));
    model =
        embedding::train(docs, params, embedding::Phase::finetune, &base, ctx.workers, &epoch_log);
  }

  embedding::save_model(model, args.out);
  config::write_stamp(args.out, ctx.config);
  for (const embedding::EpochStats& stats : epoch_log) {
    char line[128];
    std::snprintf(line, sizeof(line), "%s epoch %d: mean loss %.6f over %llu windows",
                  args.phase.c_str(), stats.epoch, stats.mean_loss,
                  static_cast<unsigned long long>(stats.windows));
    ctx.log(line);
  }
  ctx.log("embed " + args.phase + ": wrote " + args.out);
  return 0;
}

int cmd_embed_infer(const Context& ctx, const InferArgs& args) {
  const embedding::EmbeddingModel model = embedding::load_model(args.model);
  const fs::path doc_path(args.doc);

  std::vector<std::string> tokens;
  if (doc_path.string().ends_with(".tokens.txt") || doc_path.string().ends_with(".abstract.txt")) {
    tokens = read_token_file(doc_path);
  } else {
    textprep::RawDocument raw{doc_path.stem().string(), util::read_file(doc_path)};
    tokens = textprep::normalize(raw.text, normalize_config(ctx));
  }

  const embedding::DocVector vec = embedding::infer_vector(model, tokens, ctx.config.seed);
  ordered_json doc;
  doc["id"] = doc_path.stem().string();
  doc["dim"] = model.params.dim;
  doc["values"] = vec.values;
  const std::string out = doc.dump() + "\n";
  if (args.out.empty()) {
    std::cout << out;
  } else {
    util::write_file(args.out, out);
  }
  return 0;
}

// --- train / predict ---

namespace {

classify::TrainingSet embed_training_set(const Context& ctx,
                                         const std::vector<evaluate::EvalDocument>& documents,
                                         const embedding::EmbeddingModel& model) {
  classify::TrainingSet data;
  for (const evaluate::EvalDocument& doc : documents) {
    std::vector<float> vec;
    if (const auto row = model.doc_row_index(doc.id); row.has_value()) {
      const std::span<const float> values = model.doc_row(*row);
      vec.assign(values.begin(), values.end());
    } else {
      vec = embedding::infer_vector(model, doc.tokens,
                                    ctx.config.seed ^ util::fnv1a64(doc.id))
                .values;
    }
    data.x.push_back(std::move(vec));
    data.y.push_back(doc.label);
    data.ids.push_back(doc.id);
  }
  return data;
}

}  // namespace

int cmd_train(const Context& ctx, const TrainArgs& args) {
  if (args.algo != "voting" && args.algo != "stacking" &&
      !classify::algorithm_from_string(args.algo).has_value()) {
    std::string names = "voting, stacking";
    for (const std::string& name : classify::algorithm_names()) names += ", " + name;
    throw Error("usage", "unknown algorithm '" + args.algo + "'; valid algorithms: " + names);
  }
  const std::string mode = args.mode.empty() ? ctx.config.experiment.input_mode : args.mode;
  const auto documents =
      load_eval_documents(ctx, args.data_dir, mode, args.allow_unbalanced);
  const embedding::EmbeddingModel model = embedding::load_model(args.embedding);
  const classify::TrainingSet data = embed_training_set(ctx, documents, model);

  std::unique_ptr<classify::TrainedClassifier> classifier;
  if (args.algo == "voting") {
    classify::EnsembleSpec spec = classify::EnsembleSpec::default_voting();
    spec.member_params = classifier_params(ctx);
    classifier = classify::fit_voting(spec, data);
  } else if (args.algo == "stacking") {
    classify::EnsembleSpec spec = classify::EnsembleSpec::default_stacking();
    spec.member_params = classifier_params(ctx);
    spec.cv_folds = ctx.config.experiment.stacking_folds;
    classifier = classify::fit_stacking(spec, data);
  } else {
    classifier =
        classify::fit(*classify::algorithm_from_string(args.algo), classifier_params(ctx), data);
  }

  classify::ModelFingerprint fingerprint{util::crc32c_file(args.embedding), model.params.dim};
  classify::save_classifier(*classifier, args.out, fingerprint);
  config::write_stamp(args.out, ctx.config);
  char line[128];
  std::snprintf(line, sizeof(line), "train %s: fit %zu samples in %.2fs", args.algo.c_str(),
                data.size(), classifier->fit_seconds());
  ctx.log(line);
  return 0;
}

int cmd_predict(const Context& ctx, const PredictArgs& args) {
  const classify::LoadedClassifier loaded = classify::load_classifier(args.model);
  const embedding::EmbeddingModel model = embedding::load_model(args.embedding);

  if (model.params.dim != loaded.embedding.dim) {
    throw Error("model", "embedding dimension " + std::to_string(model.params.dim) +
                             " does not match the classifier's recorded dimension " +
                             std::to_string(loaded.embedding.dim));
  }
  if (util::crc32c_file(args.embedding) != loaded.embedding.crc32c &&
      !args.allow_embedding_mismatch) {
    throw Error("model",
                "embedding model fingerprint differs from the one the classifier was trained "
                "with; pass --allow-embedding-mismatch to override");
  }

  const fs::path doc_path(args.doc);
  std::vector<std::string> tokens;
  if (doc_path.string().ends_with(".tokens.txt") || doc_path.string().ends_with(".abstract.txt")) {
    tokens = read_token_file(doc_path);
  } else {
    textprep::RawDocument raw{doc_path.stem().string(), util::read_file(doc_path)};
    const textprep::NormalizedDocument doc =
        textprep::prepare(raw, anonymize_config(ctx), normalize_config(ctx));
    tokens = ctx.config.experiment.input_mode == "abstract_only" ? doc.abstract_tokens
                                                                 : doc.tokens;
  }

  const embedding::DocVector vec = embedding::infer_vector(model, tokens, ctx.config.seed);
  const double probability = loaded.model->predict_proba(vec.values);
  const int label = loaded.model->predict(vec.values);

  ordered_json out;
  out["id"] = doc_path.stem().string();
  out["algorithm"] = loaded.model->name();
  out["probability"] = probability;
  out["label"] = label;
  out["decision"] = label == 1 ? "accept" : "reject";
  std::cout << out.dump() << "\n";
  return 0;
}

// --- evaluate ---

int cmd_evaluate(const Context& ctx, const EvaluateArgs& args) {
  const std::string mode = args.mode.empty() ? ctx.config.experiment.input_mode : args.mode;
  const auto documents =
      load_eval_documents(ctx, args.data_dir, mode, args.allow_unbalanced);
  const embedding::EmbeddingModel model = embedding::load_model(args.embedding);

  const std::vector<std::string> algorithms =
      args.algos.empty() ? ctx.config.experiment.algorithms : args.algos;

  if (args.year_holdout.has_value()) {
    const auto results =
        evaluate::year_holdout(documents, *args.year_holdout, algorithms, model,
                               classifier_params(ctx), ctx.config.seed);
    ordered_json doc;
    for (const auto& [algo, per_year] : results) {
      ordered_json years;
      for (const auto& [year, accuracy] : per_year) {
        years[std::to_string(year)] = accuracy;
      }
      doc[algo] = std::move(years);
    }
    const std::string out = doc.dump(2) + "\n";
    if (args.report.empty()) {
      std::cout << out;
    } else {
      util::write_file(args.report, out);
      config::write_stamp(args.report, ctx.config);
    }
    return 0;
  }

  evaluate::ExperimentSpec spec;
  spec.input_mode = mode == "abstract_only" ? evaluate::ExperimentSpec::InputMode::abstract_only
                                            : evaluate::ExperimentSpec::InputMode::full_text;
  spec.split.train_fraction =
      args.train_fraction.value_or(ctx.config.experiment.train_fraction);
  spec.split.stratified = ctx.config.experiment.stratified;
  spec.split.seed = ctx.config.seed;
  spec.algorithms = algorithms;
  spec.params = classifier_params(ctx);
  spec.stacking_folds = ctx.config.experiment.stacking_folds;
  spec.seed = ctx.config.seed;

  const std::vector<evaluate::EvalReport> reports =
      evaluate::run_experiment(spec, documents, model);

  if (!args.report.empty()) {
    util::write_file(args.report, evaluate::reports_to_json(reports));
    config::write_stamp(args.report, ctx.config);
  }
  if (!args.csv.empty()) {
    util::write_file(args.csv, evaluate::reports_to_csv(reports));
  }
  // Human-readable table on stdout.
  std::printf("%-16s %9s %9s %9s %12s\n", "algorithm", "accuracy", "f1", "auc", "time_s");
  for (const evaluate::EvalReport& report : reports) {
    char auc[16] = "-";
    if (report.auc.has_value()) std::snprintf(auc, sizeof(auc), "%.4f", *report.auc);
    std::printf("%-16s %9.4f %9.4f %9s %12.2f\n", report.algorithm.c_str(), report.accuracy,
                report.f1, auc, report.train_time_s + report.test_time_s);
  }
  return 0;
}

// --- llm-review / llm-score ---

namespace {

struct RateLimiter {
  std::chrono::steady_clock::duration min_interval;
  std::mutex mutex;
  std::chrono::steady_clock::time_point next = std::chrono::steady_clock::now();

  void acquire() {
    std::unique_lock lock(mutex);
    const auto now = std::chrono::steady_clock::now();
    const auto scheduled = std::max(next, now);
    next = scheduled + min_interval;
    lock.unlock();
    std::this_thread::sleep_until(scheduled);
  }
};

}  // namespace

int cmd_llm_review(const Context& ctx, const LlmReviewArgs& args) {
  llm::EndpointConfig endpoint;
  endpoint.url = args.endpoint.empty() ? ctx.config.llm.endpoint : args.endpoint;
  endpoint.model = args.model.empty() ? ctx.config.llm.model : args.model;
  endpoint.temperature = ctx.config.llm.temperature;
  endpoint.max_retries = ctx.config.llm.max_retries;
  if (const char* key = std::getenv(std::string(llm::kApiKeyEnvVar).c_str())) {
    endpoint.api_key = key;
  }
  const int max_chunk_tokens = args.max_chunk_tokens.value_or(ctx.config.llm.max_chunk_tokens);
  const double rate = args.rate_limit.value_or(ctx.config.llm.rate_limit_per_s);
  const int parallel = std::max(1, args.parallel.value_or(ctx.config.llm.parallelism));

  // The verdict log is append-only; ids already present are not re-reviewed.
  std::set<std::string> done;
  if (fs::exists(args.log_path)) {
    std::istringstream in(util::read_file(args.log_path));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        done.insert(json::parse(line).at("id").get<std::string>());
      } catch (const json::exception&) {
        throw Error("parse", "corrupt verdict log line: " + line);
      }
    }
  }

  std::vector<fs::path> papers;
  const fs::path in_path(args.in_path);
  if (fs::is_directory(in_path)) {
    for (const auto& entry : fs::directory_iterator(in_path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".txt") {
        papers.push_back(entry.path());
      }
    }
    std::sort(papers.begin(), papers.end());
  } else {
    papers.push_back(in_path);
  }
  std::erase_if(papers, [&](const fs::path& p) { return done.contains(p.stem().string()); });
  ctx.log("llm-review: " + std::to_string(papers.size()) + " papers to review, " +
          std::to_string(done.size()) + " already in log");

  RateLimiter limiter{
      std::chrono::duration_cast<std::chrono::steady_clock::duration>(
          std::chrono::duration<double>(rate > 0 ? 1.0 / rate : 0.0)),
      {}, std::chrono::steady_clock::now()};

  std::ofstream log_out(args.log_path, std::ios::app);
  if (!log_out) throw Error("io", "cannot open verdict log: " + args.log_path);
  std::mutex log_mutex;
  std::atomic<std::size_t> next_index{0};
  std::vector<std::exception_ptr> failures;
  std::mutex failure_mutex;

  auto worker = [&] {
    while (true) {
      const std::size_t index = next_index.fetch_add(1);
      if (index >= papers.size()) return;
      const fs::path& path = papers[index];
      try {
        limiter.acquire();
        const std::string text = util::read_file(path);
        const llm::ReviewVerdict verdict = llm::review_paper(text, endpoint, max_chunk_tokens,
                                                             ctx.config.llm.chars_per_token);
        ordered_json record;
        record["id"] = path.stem().string();
        record["decision"] = std::string(llm::to_string(verdict.decision));
        record["attempts"] = verdict.attempts;
        record["started_at"] = util::format_rfc3339(verdict.started_at);
        record["finished_at"] = util::format_rfc3339(verdict.finished_at);
        record["response_crc32c"] = util::crc32c(verdict.raw_response);
        record["model"] = verdict.model;
        std::scoped_lock lock(log_mutex);
        log_out << record.dump() << "\n";
        log_out.flush();
      } catch (...) {
        std::scoped_lock lock(failure_mutex);
        failures.push_back(std::current_exception());
        return;
      }
    }
  };

  std::vector<std::thread> threads;
  for (int i = 0; i < parallel; ++i) threads.emplace_back(worker);
  for (std::thread& t : threads) t.join();
  if (!failures.empty()) std::rethrow_exception(failures.front());
  return 0;
}

int cmd_llm_score(const Context& ctx, const LlmScoreArgs& args) {
  std::optional<std::int64_t> published_after;
  if (!args.published_after.empty()) {
    published_after = util::parse_rfc3339(args.published_after);
  }

  // Truth: JSONL of {id, label, source, published_at?}.
  std::vector<llm::GroundTruth> truth;
  std::set<std::string> admitted;
  {
    std::istringstream in(util::read_file(args.truth_path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      json doc;
      try {
        doc = json::parse(line);
      } catch (const json::exception& e) {
        throw Error("parse", args.truth_path + ":" + std::to_string(line_no) + ": " + e.what());
      }
      if (published_after.has_value() && doc.contains("published_at")) {
        if (util::parse_rfc3339(doc["published_at"].get<std::string>()) < *published_after) {
          continue;
        }
      }
      llm::GroundTruth g;
      g.id = doc.at("id").get<std::string>();
      g.label = doc.at("label").get<int>();
      g.source = doc.at("source").get<std::string>();
      truth.push_back(g);
      admitted.insert(g.id);
    }
  }

  std::vector<llm::VerdictRecord> verdicts;
  {
    std::istringstream in(util::read_file(args.log_path));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json doc = json::parse(line);
      llm::VerdictRecord v;
      v.id = doc.at("id").get<std::string>();
      const auto decision = llm::decision_from_string(doc.at("decision").get<std::string>());
      if (!decision.has_value()) throw Error("parse", "bad decision in verdict log");
      v.decision = *decision;
      if (admitted.contains(v.id)) verdicts.push_back(std::move(v));
    }
  }

  const llm::LlmScoreReport report = llm::score(verdicts, truth);
  const std::string out = report.to_json_string() + "\n";
  if (args.out.empty()) {
    std::cout << out;
  } else {
    util::write_file(args.out, out);
    config::write_stamp(args.out, ctx.config);
  }
  return 0;
}

}  // namespace sentinel::cli
