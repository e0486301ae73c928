#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace sentinel::textprep {

struct RawDocument {
  std::string id;
  std::string text;
};

struct NormalizedDocument {
  std::string id;
  std::vector<std::string> tokens;
  std::vector<std::string> abstract_tokens;
};

// Line-level removal patterns applied by anonymize(). Matched
// case-insensitively anywhere in a line.
struct AnonymizeConfig {
  std::vector<std::string> footer_patterns;

  static AnonymizeConfig defaults();
};

struct AnonymizeResult {
  RawDocument doc;
  // Per-document log of which removals ran; absent markers skip the
  // corresponding removal instead of failing.
  bool header_removed = false;
  bool bibliography_removed = false;
  std::size_t footer_lines_removed = 0;
};

// Strips the author/affiliation block between the title line and the
// Abstract marker, everything from the last line-anchored bibliography
// marker ("references"/"bibliography" on its own line) to the end, and any
// line matching a footer pattern. Never grows the document.
AnonymizeResult anonymize(const RawDocument& doc, const AnonymizeConfig& cfg = AnonymizeConfig::defaults());

// Text between the first "abstract" marker and the following
// "introduction" heading; falls back to the first 2,000 characters (or the
// whole document if shorter) when either marker is missing. The result is
// always a substring of the input text.
std::string extract_abstract(std::string_view text);

inline constexpr std::size_t kAbstractFallbackChars = 2000;

struct NormalizeConfig {
  std::unordered_set<std::string> stop_words;
  std::unordered_map<std::string, std::string> contractions;

  static NormalizeConfig defaults();
  // Overrides: stop-word file has one word per line ('#' comments); the
  // contraction file is a JSON object mapping contraction -> expansion.
  static NormalizeConfig from_files(const std::filesystem::path& stop_words_path,
                                    const std::filesystem::path& contractions_path);
};

// Contraction expansion, lowercasing, punctuation/digit-boundary
// tokenization, stop-word removal, then suffix-stripping stemming.
// Deterministic; emitted tokens match [a-z0-9-]+ and are never stop words.
std::vector<std::string> normalize(std::string_view text, const NormalizeConfig& cfg);

// Full per-document pipeline: anonymize, normalize body, extract and
// normalize the abstract.
NormalizedDocument prepare(const RawDocument& doc, const AnonymizeConfig& anon_cfg,
                           const NormalizeConfig& norm_cfg, AnonymizeResult* log = nullptr);

// Built-in word lists (exposed for tests and docs).
const std::vector<std::string_view>& default_stop_word_list();
const std::vector<std::pair<std::string_view, std::string_view>>& default_contraction_list();

}  // namespace sentinel::textprep
