#include "sentinel/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <random>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "sentinel/error.hpp"
#include "sentinel/util.hpp"

namespace sentinel::corpus {

namespace {

using nlohmann::ordered_json;

constexpr std::string_view kSecurityTag = "cs.CR";

Source parse_source(const std::string& s, const std::string& where) {
  if (s == "proceedings") return Source::proceedings;
  if (s == "preprint") return Source::preprint;
  throw Error("parse", where + ": unknown source '" + s + "'");
}

VenueTier parse_tier(const std::string& s, const std::string& where) {
  if (s == "big4") return VenueTier::big4;
  if (s == "lower_tier") return VenueTier::lower_tier;
  if (s == "none") return VenueTier::none;
  throw Error("parse", where + ": unknown venue_tier '" + s + "'");
}

}  // namespace

std::string_view to_string(Source s) {
  return s == Source::proceedings ? "proceedings" : "preprint";
}

std::string_view to_string(VenueTier t) {
  switch (t) {
    case VenueTier::big4: return "big4";
    case VenueTier::lower_tier: return "lower_tier";
    case VenueTier::none: return "none";
  }
  return "none";
}

std::string_view to_string(LabelProvenance p) {
  switch (p) {
    case LabelProvenance::published_big4: return "published_big4";
    case LabelProvenance::rule1: return "rule1";
    case LabelProvenance::rule2: return "rule2";
    case LabelProvenance::rule3: return "rule3";
  }
  return "rule3";
}

bool ManifestRecord::has_tag(std::string_view tag) const {
  return std::find(category_tags.begin(), category_tags.end(), tag) != category_tags.end();
}

std::string normalize_venue(std::string_view venue) {
  std::string out;
  out.reserve(venue.size());
  bool pending_space = false;
  for (char c : venue) {
    const unsigned char uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc)) {
      if (pending_space && !out.empty()) out.push_back(' ');
      pending_space = false;
      out.push_back(static_cast<char>(std::tolower(uc)));
    } else if (std::isspace(uc)) {
      pending_space = true;
    }
    // punctuation is dropped without forcing a word break: "S&P" -> "sp"
  }
  return out;
}

const std::set<std::string>& default_big4_venues() {
  static const std::set<std::string> kSet = {
      normalize_venue("CCS"),
      normalize_venue("ACM CCS"),
      normalize_venue("IEEE S&P"),
      normalize_venue("S&P"),
      normalize_venue("NDSS"),
      normalize_venue("ISOC NDSS"),
      normalize_venue("USENIX Security"),
  };
  return kSet;
}

const std::set<std::string>& default_lower_tier_venues() {
  static const std::set<std::string> kSet = [] {
    std::set<std::string> s;
    for (std::string_view v :
         {"ESORICS", "RAID", "ACSAC", "DSN", "CSFW", "ASIACRYPT", "SecureComm",
          "AsiaCCS", "ACNS", "SAC", "ACISP", "ICICS", "ICISC", "ISC", "FSE",
          "WiSec", "SEC", "SACMAT", "CT-RSA", "DIMVA", "ISPEC"}) {
      s.insert(normalize_venue(v));
    }
    return s;
  }();
  return kSet;
}

VenueTier effective_tier(const ManifestRecord& record, const DatasetManifest& manifest) {
  if (!record.venue.has_value()) return VenueTier::none;
  const std::string key = normalize_venue(*record.venue);
  if (manifest.big4_venues.contains(key)) return VenueTier::big4;
  if (manifest.lower_tier_venues.contains(key)) return VenueTier::lower_tier;
  return record.venue_tier;
}

DatasetManifest parse_manifest(std::string_view text, const std::string& origin) {
  DatasetManifest manifest;
  manifest.big4_venues = default_big4_venues();
  manifest.lower_tier_venues = default_lower_tier_venues();

  std::unordered_set<std::string> seen_ids;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    // allow a trailing newline / blank lines
    bool blank = true;
    for (char c : line) {
      if (!std::isspace(static_cast<unsigned char>(c))) {
        blank = false;
        break;
      }
    }
    if (blank) {
      if (end == text.size()) break;
      continue;
    }

    const std::string where = origin + ":" + std::to_string(line_no);
    ordered_json doc;
    try {
      doc = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error("parse", where + ": malformed record: " + e.what());
    }
    if (!doc.is_object()) throw Error("parse", where + ": record is not an object");

    ManifestRecord record;
    try {
      record.id = doc.at("id").get<std::string>();
      record.title = doc.value("title", std::string{});
      record.source = parse_source(doc.at("source").get<std::string>(), where);
      if (doc.contains("venue") && !doc["venue"].is_null()) {
        record.venue = doc["venue"].get<std::string>();
      }
      if (doc.contains("venue_tier")) {
        record.venue_tier = parse_tier(doc["venue_tier"].get<std::string>(), where);
      }
      record.year = doc.at("year").get<int>();
      record.text_path = doc.at("text_path").get<std::string>();
      if (doc.contains("category_tags")) {
        record.category_tags = doc["category_tags"].get<std::vector<std::string>>();
      }
      if (doc.contains("arxiv_versions")) {
        for (const auto& v : doc["arxiv_versions"]) {
          ArxivVersion version;
          version.number = v.at("version").get<int>();
          version.timestamp = util::parse_rfc3339(v.at("timestamp").get<std::string>());
          record.arxiv_versions.push_back(version);
        }
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error("parse", where + ": " + e.what());
    }

    for (std::size_t i = 1; i < record.arxiv_versions.size(); ++i) {
      if (record.arxiv_versions[i].timestamp <= record.arxiv_versions[i - 1].timestamp) {
        throw Error("validate", where + ": record '" + record.id +
                                     "': version timestamps not strictly increasing");
      }
    }
    if (record.source == Source::proceedings && !record.venue.has_value()) {
      throw Error("validate", where + ": record '" + record.id +
                                   "': proceedings record without venue");
    }
    if (!seen_ids.insert(record.id).second) {
      throw Error("validate", where + ": duplicate record id '" + record.id + "'");
    }
    manifest.records.push_back(std::move(record));
  }
  return manifest;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(util::read_file(path), path.string());
}

std::string manifest_to_string(const DatasetManifest& manifest) {
  std::string out;
  for (const ManifestRecord& record : manifest.records) {
    ordered_json doc;
    doc["id"] = record.id;
    doc["title"] = record.title;
    doc["source"] = std::string(to_string(record.source));
    if (record.venue.has_value()) doc["venue"] = *record.venue;
    doc["venue_tier"] = std::string(to_string(record.venue_tier));
    doc["year"] = record.year;
    if (!record.arxiv_versions.empty()) {
      ordered_json versions = ordered_json::array();
      for (const ArxivVersion& v : record.arxiv_versions) {
        versions.push_back({{"version", v.number}, {"timestamp", util::format_rfc3339(v.timestamp)}});
      }
      doc["arxiv_versions"] = std::move(versions);
    }
    if (!record.category_tags.empty()) doc["category_tags"] = record.category_tags;
    doc["text_path"] = record.text_path;
    out += doc.dump();
    out += '\n';
  }
  return out;
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  util::write_file(path, manifest_to_string(manifest));
}

namespace {

int first_version_year(const ManifestRecord& record) {
  if (record.arxiv_versions.empty()) return record.year;
  return util::utc_year(record.arxiv_versions.front().timestamp);
}

LabeledDocument make_reject(const ManifestRecord& record, LabelProvenance provenance) {
  return LabeledDocument{record.id, Label::reject, provenance, record.text_path,
                         first_version_year(record)};
}

bool is_cscr_preprint(const ManifestRecord& record) {
  return record.source == Source::preprint && record.has_tag(kSecurityTag);
}

}  // namespace

std::vector<LabeledDocument> apply_rule1(const DatasetManifest& manifest) {
  std::vector<LabeledDocument> out;
  const std::int64_t min_gap_seconds =
      static_cast<std::int64_t>(manifest.rule1_min_gap_days) * 86400;
  for (const ManifestRecord& record : manifest.records) {
    if (!is_cscr_preprint(record)) continue;
    if (effective_tier(record, manifest) != VenueTier::big4) continue;
    if (record.arxiv_versions.size() < 2) continue;
    const std::int64_t gap =
        record.arxiv_versions.back().timestamp - record.arxiv_versions.front().timestamp;
    if (gap < min_gap_seconds) continue;
    out.push_back(make_reject(record, LabelProvenance::rule1));
  }
  return out;
}

std::vector<LabeledDocument> apply_rule2(const DatasetManifest& manifest) {
  std::vector<LabeledDocument> out;
  for (const ManifestRecord& record : manifest.records) {
    if (!is_cscr_preprint(record)) continue;
    if (effective_tier(record, manifest) != VenueTier::lower_tier) continue;
    out.push_back(make_reject(record, LabelProvenance::rule2));
  }
  return out;
}

std::vector<LabeledDocument> apply_rule3(const DatasetManifest& manifest) {
  std::vector<LabeledDocument> out;
  for (const ManifestRecord& record : manifest.records) {
    if (!is_cscr_preprint(record)) continue;
    if (effective_tier(record, manifest) != VenueTier::none) continue;
    if (first_version_year(record) >= manifest.rule3_year_cutoff) continue;
    out.push_back(make_reject(record, LabelProvenance::rule3));
  }
  return out;
}

std::vector<LabeledDocument> build_balanced_dataset(const DatasetManifest& manifest,
                                                    const BalanceOptions& options) {
  std::vector<LabeledDocument> positives;
  for (const ManifestRecord& record : manifest.records) {
    if (record.source != Source::proceedings) continue;
    if (options.pool == PositivePool::big4_only &&
        effective_tier(record, manifest) != VenueTier::big4) {
      continue;
    }
    positives.push_back(LabeledDocument{record.id, Label::accept,
                                        LabelProvenance::published_big4, record.text_path,
                                        record.year});
  }
  if (positives.empty()) {
    throw Error("data", "no positive (proceedings) records in manifest");
  }

  // Rule priority 1 > 2 > 3; the tier conditions make the rules disjoint,
  // but ids are tracked so a record is never labeled twice.
  std::vector<LabeledDocument> negatives;
  std::unordered_set<std::string> taken;
  for (const LabeledDocument& d : apply_rule1(manifest)) {
    if (taken.insert(d.id).second) negatives.push_back(d);
  }
  for (const LabeledDocument& d : apply_rule2(manifest)) {
    if (taken.insert(d.id).second) negatives.push_back(d);
  }
  std::vector<LabeledDocument> rule3 = apply_rule3(manifest);
  std::erase_if(rule3, [&](const LabeledDocument& d) { return taken.contains(d.id); });

  const std::size_t target = positives.size();
  if (negatives.size() > target && !options.allow_unbalanced) {
    throw Error("data", "cannot balance: rule-1/2 negatives (" +
                            std::to_string(negatives.size()) + ") already exceed positives (" +
                            std::to_string(target) + "); pass the unbalanced flag to proceed");
  }

  std::size_t rule3_keep = negatives.size() >= target ? 0 : target - negatives.size();
  if (rule3.size() < rule3_keep) {
    if (!options.allow_unbalanced) {
      throw Error("data", "insufficient negatives: positives=" + std::to_string(target) +
                              " rule1+rule2=" + std::to_string(negatives.size()) +
                              " rule3=" + std::to_string(rule3.size()) +
                              "; pass the unbalanced flag to proceed");
    }
    rule3_keep = rule3.size();
  }

  // Retention depends only on the candidate id set and the seed: candidates
  // are ranked in id order, then shuffled by a seeded generator.
  std::sort(rule3.begin(), rule3.end(),
            [](const LabeledDocument& a, const LabeledDocument& b) { return a.id < b.id; });
  std::mt19937_64 rng(manifest.seed);
  std::shuffle(rule3.begin(), rule3.end(), rng);
  rule3.resize(std::min(rule3_keep, rule3.size()));
  negatives.insert(negatives.end(), rule3.begin(), rule3.end());

  auto by_id = [](const LabeledDocument& a, const LabeledDocument& b) { return a.id < b.id; };
  std::sort(positives.begin(), positives.end(), by_id);
  std::sort(negatives.begin(), negatives.end(), by_id);

  std::vector<LabeledDocument> out;
  out.reserve(positives.size() + negatives.size());
  out.insert(out.end(), positives.begin(), positives.end());
  out.insert(out.end(), negatives.begin(), negatives.end());
  return out;
}

std::vector<const ManifestRecord*> pretrain_pool(const DatasetManifest& manifest) {
  std::vector<const ManifestRecord*> out;
  out.reserve(manifest.records.size());
  for (const ManifestRecord& record : manifest.records) out.push_back(&record);
  return out;
}

std::vector<const ManifestRecord*> security_pool(const DatasetManifest& manifest) {
  std::vector<const ManifestRecord*> out;
  for (const ManifestRecord& record : manifest.records) {
    if (record.has_tag(kSecurityTag) || effective_tier(record, manifest) != VenueTier::none) {
      out.push_back(&record);
    }
  }
  return out;
}

}  // namespace sentinel::corpus
