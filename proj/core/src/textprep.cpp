#include "sentinel/textprep.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sentinel/error.hpp"
#include "sentinel/stemmer.hpp"
#include "sentinel/util.hpp"

namespace sentinel::textprep {

namespace {

bool is_alpha(char c) { return c >= 'a' && c <= 'z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

struct Line {
  std::size_t begin;  // offset of first char
  std::size_t end;    // offset one past last char, excluding the newline
};

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == '\n') {
      lines.push_back({start, i});
      start = i + 1;
    }
  }
  return lines;
}

std::string_view trimmed(std::string_view text, const Line& line) {
  std::size_t b = line.begin;
  std::size_t e = line.end;
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  return text.substr(b, e - b);
}

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (lower(a[i]) != lower(b[i])) return false;
  }
  return true;
}

bool istarts_with(std::string_view text, std::string_view prefix) {
  if (text.size() < prefix.size()) return false;
  return iequals(text.substr(0, prefix.size()), prefix);
}

// Strips an optional section number prefix ("1", "1.", "IV)") from a
// heading candidate.
std::string_view strip_numbering(std::string_view line) {
  std::size_t i = 0;
  auto is_numbering = [](char c) {
    return is_digit(c) || c == 'i' || c == 'v' || c == 'x' || c == 'I' || c == 'V' || c == 'X';
  };
  std::size_t count = 0;
  while (i < line.size() && is_numbering(line[i]) && count < 4) {
    ++i;
    ++count;
  }
  if (count == 0) return line;
  if (i < line.size() && (line[i] == '.' || line[i] == ')')) ++i;
  if (i >= line.size() || !std::isspace(static_cast<unsigned char>(line[i]))) return line;
  while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
  return line.substr(i);
}

// A heading line: optional section number, then the keyword at a word
// boundary.
bool is_heading(std::string_view line, std::string_view keyword) {
  std::string_view rest = strip_numbering(line);
  if (!istarts_with(rest, keyword)) return false;
  return rest.size() == keyword.size() || !std::isalpha(static_cast<unsigned char>(rest[keyword.size()]));
}

bool line_matches_pattern(std::string_view line, std::string_view pattern) {
  if (pattern.empty()) return false;
  if (line.size() < pattern.size()) return false;
  for (std::size_t i = 0; i + pattern.size() <= line.size(); ++i) {
    if (iequals(line.substr(i, pattern.size()), pattern)) return true;
  }
  return false;
}

std::size_t find_word_ci(std::string_view text, std::string_view word, std::size_t from = 0) {
  if (word.empty() || text.size() < word.size()) return std::string_view::npos;
  for (std::size_t i = from; i + word.size() <= text.size(); ++i) {
    if (!iequals(text.substr(i, word.size()), word)) continue;
    const bool left_ok = i == 0 || !std::isalpha(static_cast<unsigned char>(text[i - 1]));
    const std::size_t after = i + word.size();
    const bool right_ok = after >= text.size() || !std::isalpha(static_cast<unsigned char>(text[after]));
    if (left_ok && right_ok) return i;
  }
  return std::string_view::npos;
}

}  // namespace

AnonymizeConfig AnonymizeConfig::defaults() {
  AnonymizeConfig cfg;
  cfg.footer_patterns = {
      "copyright", "doi:", "doi.org", "isbn", "issn",
      "permission to make digital or hard copies", "all rights reserved",
      "creative commons attribution",
  };
  return cfg;
}

AnonymizeResult anonymize(const RawDocument& doc, const AnonymizeConfig& cfg) {
  const std::string& text = doc.text;
  const std::vector<Line> lines = split_lines(text);

  // Title = first non-empty line; header block = lines strictly between the
  // title and the abstract marker line.
  std::size_t title_idx = lines.size();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!trimmed(text, lines[i]).empty()) {
      title_idx = i;
      break;
    }
  }
  std::size_t abstract_idx = lines.size();
  if (title_idx < lines.size()) {
    for (std::size_t i = title_idx + 1; i < lines.size(); ++i) {
      if (is_heading(trimmed(text, lines[i]), "abstract")) {
        abstract_idx = i;
        break;
      }
    }
  }

  // Bibliography marker: a line that is exactly "references" or
  // "bibliography" (optionally section-numbered); the last one wins.
  std::size_t bib_idx = lines.size();
  for (std::size_t i = lines.size(); i-- > 0;) {
    std::string_view t = strip_numbering(trimmed(text, lines[i]));
    if (iequals(t, "references") || iequals(t, "bibliography")) {
      bib_idx = i;
      break;
    }
  }

  AnonymizeResult result;
  result.doc.id = doc.id;
  result.header_removed = abstract_idx < lines.size() && abstract_idx > title_idx + 1;
  result.bibliography_removed = bib_idx < lines.size();

  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (result.bibliography_removed && i >= bib_idx) break;
    if (result.header_removed && i > title_idx && i < abstract_idx) continue;
    std::string_view line = text.substr(lines[i].begin, lines[i].end - lines[i].begin);
    bool footer = false;
    for (const std::string& pattern : cfg.footer_patterns) {
      if (line_matches_pattern(line, pattern)) {
        footer = true;
        break;
      }
    }
    if (footer) {
      ++result.footer_lines_removed;
      continue;
    }
    out.append(line);
    if (lines[i].end < text.size()) out.push_back('\n');
  }
  result.doc.text = std::move(out);
  return result;
}

std::string extract_abstract(std::string_view text) {
  const std::size_t abs_pos = find_word_ci(text, "abstract");
  if (abs_pos != std::string_view::npos) {
    // The introduction marker is a heading line following the abstract.
    const std::vector<Line> lines = split_lines(text);
    const std::size_t content_begin = abs_pos + std::string_view("abstract").size();
    for (const Line& line : lines) {
      if (line.begin <= abs_pos) continue;
      if (is_heading(trimmed(text, line), "introduction")) {
        std::string_view body = text.substr(content_begin, line.begin - content_begin);
        // Trim whitespace and leading marker punctuation (e.g. "Abstract—").
        while (!body.empty() && (std::isspace(static_cast<unsigned char>(body.front())) ||
                                 body.front() == ':' || body.front() == '-' || body.front() == '.' ||
                                 body.front() == ',')) {
          body.remove_prefix(1);
        }
        while (!body.empty() && std::isspace(static_cast<unsigned char>(body.back()))) {
          body.remove_suffix(1);
        }
        return std::string(body);
      }
    }
  }
  return std::string(text.substr(0, std::min(text.size(), kAbstractFallbackChars)));
}

NormalizeConfig NormalizeConfig::defaults() {
  NormalizeConfig cfg;
  for (std::string_view w : default_stop_word_list()) cfg.stop_words.emplace(w);
  for (const auto& [from, to] : default_contraction_list()) cfg.contractions.emplace(from, to);
  return cfg;
}

NormalizeConfig NormalizeConfig::from_files(const std::filesystem::path& stop_words_path,
                                            const std::filesystem::path& contractions_path) {
  NormalizeConfig cfg;
  if (stop_words_path.empty()) {
    for (std::string_view w : default_stop_word_list()) cfg.stop_words.emplace(w);
  } else {
    std::istringstream in(util::read_file(stop_words_path));
    std::string line;
    while (std::getline(in, line)) {
      std::string_view v = line;
      while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.remove_suffix(1);
      while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.remove_prefix(1);
      if (v.empty() || v.front() == '#') continue;
      cfg.stop_words.emplace(util::to_lower(v));
    }
  }
  if (contractions_path.empty()) {
    for (const auto& [from, to] : default_contraction_list()) cfg.contractions.emplace(from, to);
  } else {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(util::read_file(contractions_path));
    } catch (const nlohmann::json::exception& e) {
      throw Error("parse", "contraction table " + contractions_path.string() + ": " + e.what());
    }
    if (!doc.is_object()) throw Error("parse", "contraction table must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
      cfg.contractions.emplace(util::to_lower(key), util::to_lower(value.get<std::string>()));
    }
  }
  return cfg;
}

namespace {

// Replaces every case-insensitive occurrence of a table contraction
// (matched as a standalone [a-z']+ run) with its expansion.
std::string expand_contractions(std::string_view text, const NormalizeConfig& cfg) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '\'') {
      std::size_t j = i;
      while (j < text.size() &&
             (std::isalpha(static_cast<unsigned char>(text[j])) || text[j] == '\'')) {
        ++j;
      }
      std::string run = util::to_lower(text.substr(i, j - i));
      if (auto it = cfg.contractions.find(run); it != cfg.contractions.end()) {
        out.append(it->second);
      } else {
        out.append(text.substr(i, j - i));
      }
      i = j;
    } else {
      out.push_back(c);
      ++i;
    }
  }
  return out;
}

// Tokens are maximal runs over [a-z0-9-] split at letter/digit boundaries;
// hyphens survive only between two letters.
std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) tokens.push_back(std::move(cur));
    cur.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (is_alpha(c)) {
      if (!cur.empty() && is_digit(cur.back())) flush();
      cur.push_back(c);
    } else if (is_digit(c)) {
      if (!cur.empty() && !is_digit(cur.back())) flush();
      cur.push_back(c);
    } else if (c == '-') {
      const bool prev_alpha = !cur.empty() && is_alpha(cur.back());
      const bool next_alpha = i + 1 < text.size() && is_alpha(text[i + 1]);
      if (prev_alpha && next_alpha) {
        cur.push_back('-');
      } else {
        flush();
      }
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

bool all_alpha(std::string_view token) {
  return std::all_of(token.begin(), token.end(), is_alpha);
}

}  // namespace

std::vector<std::string> normalize(std::string_view text, const NormalizeConfig& cfg) {
  const std::string expanded = expand_contractions(text, cfg);
  const std::string lowered = util::to_lower(expanded);
  std::vector<std::string> tokens = tokenize(lowered);

  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (std::string& token : tokens) {
    if (cfg.stop_words.contains(token)) continue;
    std::string final_token = all_alpha(token) ? stem(token) : std::move(token);
    if (final_token.empty() || cfg.stop_words.contains(final_token)) continue;
    out.push_back(std::move(final_token));
  }
  return out;
}

NormalizedDocument prepare(const RawDocument& doc, const AnonymizeConfig& anon_cfg,
                           const NormalizeConfig& norm_cfg, AnonymizeResult* log) {
  AnonymizeResult anon = anonymize(doc, anon_cfg);
  NormalizedDocument out;
  out.id = doc.id;
  out.tokens = normalize(anon.doc.text, norm_cfg);
  out.abstract_tokens = normalize(extract_abstract(doc.text), norm_cfg);
  if (log) *log = std::move(anon);
  return out;
}

}  // namespace sentinel::textprep
