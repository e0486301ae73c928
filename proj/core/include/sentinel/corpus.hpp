#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace sentinel::corpus {

enum class Source { proceedings, preprint };
enum class VenueTier { big4, lower_tier, none };
enum class Label { reject = 0, accept = 1 };
enum class LabelProvenance { published_big4, rule1, rule2, rule3 };

std::string_view to_string(Source);
std::string_view to_string(VenueTier);
std::string_view to_string(LabelProvenance);

struct ArxivVersion {
  int number = 0;
  std::int64_t timestamp = 0;  // unix seconds, UTC

  friend bool operator==(const ArxivVersion&, const ArxivVersion&) = default;
};

struct ManifestRecord {
  std::string id;
  std::string title;
  Source source = Source::preprint;
  std::optional<std::string> venue;
  VenueTier venue_tier = VenueTier::none;
  int year = 0;
  std::vector<ArxivVersion> arxiv_versions;  // timestamps strictly increasing
  std::vector<std::string> category_tags;
  std::string text_path;

  bool has_tag(std::string_view tag) const;
  friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

struct LabeledDocument {
  std::string id;
  Label label = Label::reject;
  LabelProvenance provenance = LabelProvenance::rule3;
  std::string text_path;
  int year = 0;

  friend bool operator==(const LabeledDocument&, const LabeledDocument&) = default;
};

struct DatasetManifest {
  std::vector<ManifestRecord> records;
  // Venue sets hold normalized keys (see normalize_venue).
  std::set<std::string> big4_venues;
  std::set<std::string> lower_tier_venues;
  int rule3_year_cutoff = 2018;
  int rule1_min_gap_days = 365;
  std::uint64_t seed = 0;
};

// Case-folds, strips punctuation, collapses whitespace: "IEEE S&P" -> "ieee sp".
std::string normalize_venue(std::string_view venue);

const std::set<std::string>& default_big4_venues();
// The 21 lower-ranked security venues used by rule 2.
const std::set<std::string>& default_lower_tier_venues();

// Resolves a record's tier: an explicit venue is matched against the
// manifest's venue sets first, then the record's declared tier applies.
VenueTier effective_tier(const ManifestRecord& record, const DatasetManifest& manifest);

// Manifest file: UTF-8 JSON lines, one record per line, RFC 3339 version
// timestamps, unknown fields ignored. Venue sets and thresholds are not
// stored in the file; load_manifest fills them with defaults.
DatasetManifest load_manifest(const std::filesystem::path& path);
DatasetManifest parse_manifest(std::string_view text, const std::string& origin = "<string>");
std::string manifest_to_string(const DatasetManifest& manifest);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

// Rule 1: cs.CR preprints that ultimately appeared at a big-4 venue with at
// least rule1_min_gap_days between first and last arXiv version; the first
// version is the reject sample.
std::vector<LabeledDocument> apply_rule1(const DatasetManifest& manifest);
// Rule 2: cs.CR preprints published at a lower-tier venue.
std::vector<LabeledDocument> apply_rule2(const DatasetManifest& manifest);
// Rule 3: never-published cs.CR preprints whose first version predates
// rule3_year_cutoff.
std::vector<LabeledDocument> apply_rule3(const DatasetManifest& manifest);

enum class PositivePool {
  big4_only,        // classification dataset
  all_proceedings,  // embedding pretraining pool
};

struct BalanceOptions {
  PositivePool pool = PositivePool::big4_only;
  // When balancing is impossible (too few rule-3 candidates, or rule-1/2
  // alone exceed the positives), keep everything instead of failing.
  bool allow_unbalanced = false;
};

// Positives plus rule negatives with rule-3 candidates randomly downsampled
// (seeded) until |neg| == |pos|; rule-1/2 samples are never dropped. Output
// is sorted (positives then negatives, by id) and deterministic given the
// seed; rule-3 retention depends only on the candidate id set and seed.
std::vector<LabeledDocument> build_balanced_dataset(const DatasetManifest& manifest,
                                                    const BalanceOptions& options = {});

// Records for the two embedding-training phases: every record for
// pretraining, security records (cs.CR tag or security venue) for
// fine-tuning.
std::vector<const ManifestRecord*> pretrain_pool(const DatasetManifest& manifest);
std::vector<const ManifestRecord*> security_pool(const DatasetManifest& manifest);

}  // namespace sentinel::corpus
