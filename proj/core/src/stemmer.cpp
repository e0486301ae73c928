#include "sentinel/stemmer.hpp"

#include <algorithm>
#include <array>
#include <span>
#include <unordered_map>
#include <unordered_set>

namespace sentinel::textprep {

namespace {

// 'y' here is the vowel form; consonant y is marked as 'Y' internally.
bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

bool ends_with(const std::string& w, std::string_view suffix) {
  return w.size() >= suffix.size() &&
         w.compare(w.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool contains_vowel(const std::string& w, std::size_t begin, std::size_t end) {
  for (std::size_t i = begin; i < end && i < w.size(); ++i) {
    if (is_vowel(w[i])) return true;
  }
  return false;
}

bool ends_double(const std::string& w) {
  static constexpr std::string_view kDoubles = "bdfgmnprt";
  const std::size_t n = w.size();
  return n >= 2 && w[n - 1] == w[n - 2] &&
         kDoubles.find(w[n - 1]) != std::string_view::npos;
}

// Short syllable at the end of the word: either non-vowel, vowel, non-vowel
// (last not w/x/Y), or a vowel at the start of the word followed by a
// non-vowel making up the whole word.
bool short_syllable_at_end(const std::string& w) {
  const std::size_t n = w.size();
  if (n >= 3 && !is_vowel(w[n - 3]) && is_vowel(w[n - 2]) && !is_vowel(w[n - 1]) &&
      w[n - 1] != 'w' && w[n - 1] != 'x' && w[n - 1] != 'Y') {
    return true;
  }
  return n == 2 && is_vowel(w[0]) && !is_vowel(w[1]);
}

struct Regions {
  std::size_t r1;
  std::size_t r2;
};

std::size_t region_after_first_nonvowel_following_vowel(const std::string& w, std::size_t from) {
  for (std::size_t i = from + 1; i < w.size(); ++i) {
    if (!is_vowel(w[i]) && is_vowel(w[i - 1])) return i + 1;
  }
  return w.size();
}

Regions mark_regions(const std::string& w) {
  std::size_t r1;
  if (w.rfind("gener", 0) == 0) {
    r1 = 5;
  } else if (w.rfind("commun", 0) == 0) {
    r1 = 6;
  } else if (w.rfind("arsen", 0) == 0) {
    r1 = 5;
  } else {
    r1 = region_after_first_nonvowel_following_vowel(w, 0);
  }
  const std::size_t r2 = r1 >= w.size() ? w.size() : region_after_first_nonvowel_following_vowel(w, r1);
  return {r1, r2};
}

void mark_consonant_y(std::string& w) {
  if (!w.empty() && w[0] == 'y') w[0] = 'Y';
  for (std::size_t i = 1; i < w.size(); ++i) {
    if (w[i] == 'y' && is_vowel(w[i - 1])) w[i] = 'Y';
  }
}

const std::unordered_map<std::string_view, std::string_view>& special_forms() {
  static const std::unordered_map<std::string_view, std::string_view> kMap = {
      {"skis", "ski"},     {"skies", "sky"},   {"dying", "die"},   {"lying", "lie"},
      {"tying", "tie"},    {"idly", "idl"},    {"gently", "gentl"}, {"ugly", "ugli"},
      {"early", "earli"},  {"only", "onli"},   {"singly", "singl"}, {"sky", "sky"},
      {"news", "news"},    {"howe", "howe"},   {"atlas", "atlas"},  {"cosmos", "cosmos"},
      {"bias", "bias"},    {"andes", "andes"},
  };
  return kMap;
}

bool invariant_after_1a(const std::string& w) {
  static const std::unordered_set<std::string_view> kSet = {
      "inning", "outing", "canning", "herring", "earring", "proceed", "exceed", "succeed",
  };
  return kSet.contains(std::string_view(w));
}

void step0(std::string& w) {
  for (std::string_view suffix : {"'s'", "'s", "'"}) {
    if (ends_with(w, suffix)) {
      w.erase(w.size() - suffix.size());
      return;
    }
  }
}

void step1a(std::string& w) {
  if (ends_with(w, "sses")) {
    w.erase(w.size() - 2);
    return;
  }
  if (ends_with(w, "ied") || ends_with(w, "ies")) {
    w.erase(w.size() - 3);
    w += w.size() > 1 ? "i" : "ie";
    return;
  }
  if (ends_with(w, "us") || ends_with(w, "ss")) return;
  if (ends_with(w, "s")) {
    // Delete only if a vowel occurs before the character preceding the s.
    if (w.size() >= 3 && contains_vowel(w, 0, w.size() - 2)) w.pop_back();
  }
}

void step1b(std::string& w, const Regions& r) {
  if (ends_with(w, "eedly")) {
    if (w.size() - 5 >= r.r1) w.erase(w.size() - 3);
    return;
  }
  if (ends_with(w, "eed")) {
    if (w.size() - 3 >= r.r1) w.erase(w.size() - 1);
    return;
  }
  std::size_t len = 0;
  if (ends_with(w, "ingly") || ends_with(w, "edly")) len = ends_with(w, "ingly") ? 5 : 4;
  else if (ends_with(w, "ing")) len = 3;
  else if (ends_with(w, "ed")) len = 2;
  if (len == 0) return;
  if (!contains_vowel(w, 0, w.size() - len)) return;
  w.erase(w.size() - len);
  if (ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz")) {
    w += 'e';
  } else if (ends_double(w)) {
    w.pop_back();
  } else if (r.r1 >= w.size() && short_syllable_at_end(w)) {
    w += 'e';
  }
}

void step1c(std::string& w) {
  const std::size_t n = w.size();
  if (n >= 3 && (w[n - 1] == 'y' || w[n - 1] == 'Y') && !is_vowel(w[n - 2])) {
    w[n - 1] = 'i';
  }
}

struct Mapping {
  std::string_view suffix;
  std::string_view replacement;
};

// Longest suffix present on the word is selected first; its condition is then
// tested and, on failure, no shorter suffix is tried.
const Mapping* longest_match(const std::string& w, std::span<const Mapping> table) {
  const Mapping* best = nullptr;
  for (const Mapping& m : table) {
    if (ends_with(w, m.suffix) && (!best || m.suffix.size() > best->suffix.size())) {
      best = &m;
    }
  }
  return best;
}

void step2(std::string& w, const Regions& r) {
  static constexpr std::array<Mapping, 24> kTable{{
      {"ization", "ize"}, {"ational", "ate"}, {"fulness", "ful"}, {"ousness", "ous"},
      {"iveness", "ive"}, {"tional", "tion"}, {"biliti", "ble"},  {"lessli", "less"},
      {"entli", "ent"},   {"ation", "ate"},   {"alism", "al"},    {"aliti", "al"},
      {"ousli", "ous"},   {"iviti", "ive"},   {"fulli", "ful"},   {"enci", "ence"},
      {"anci", "ance"},   {"abli", "able"},   {"izer", "ize"},    {"ator", "ate"},
      {"alli", "al"},     {"bli", "ble"},     {"ogi", "og"},      {"li", ""},
  }};
  const Mapping* m = longest_match(w, kTable);
  if (!m) return;
  const std::size_t start = w.size() - m->suffix.size();
  if (start < r.r1) return;
  if (m->suffix == "ogi") {
    if (start == 0 || w[start - 1] != 'l') return;
  } else if (m->suffix == "li") {
    static constexpr std::string_view kValidLiEnding = "cdeghkmnrt";
    if (start == 0 || kValidLiEnding.find(w[start - 1]) == std::string_view::npos) return;
  }
  w.replace(start, m->suffix.size(), m->replacement);
}

void step3(std::string& w, const Regions& r) {
  static constexpr std::array<Mapping, 9> kTable{{
      {"ational", "ate"}, {"tional", "tion"}, {"alize", "al"}, {"icate", "ic"},
      {"iciti", "ic"},    {"ative", ""},      {"ical", "ic"},  {"ness", ""},
      {"ful", ""},
  }};
  const Mapping* m = longest_match(w, kTable);
  if (!m) return;
  const std::size_t start = w.size() - m->suffix.size();
  if (start < r.r1) return;
  if (m->suffix == "ative" && start < r.r2) return;
  w.replace(start, m->suffix.size(), m->replacement);
}

void step4(std::string& w, const Regions& r) {
  static constexpr std::array<std::string_view, 18> kSuffixes{
      "ement", "ance", "ence", "able", "ible", "ment", "ant", "ent", "ism",
      "ate",   "iti",  "ous",  "ive",  "ize",  "ion",  "al",  "er",  "ic",
  };
  std::string_view best;
  for (std::string_view s : kSuffixes) {
    if (ends_with(w, s) && s.size() > best.size()) best = s;
  }
  if (best.empty()) return;
  const std::size_t start = w.size() - best.size();
  if (start < r.r2) return;
  if (best == "ion") {
    if (start == 0 || (w[start - 1] != 's' && w[start - 1] != 't')) return;
  }
  w.erase(start);
}

void step5(std::string& w, const Regions& r) {
  const std::size_t n = w.size();
  if (n == 0) return;
  if (w[n - 1] == 'e') {
    if (n - 1 >= r.r2) {
      w.pop_back();
    } else if (n - 1 >= r.r1) {
      std::string head = w.substr(0, n - 1);
      if (!short_syllable_at_end(head)) w.pop_back();
    }
    return;
  }
  if (w[n - 1] == 'l' && n - 1 >= r.r2 && n >= 2 && w[n - 2] == 'l') {
    w.pop_back();
  }
}

}  // namespace

std::string stem(std::string_view word) {
  for (char c : word) {
    if (!((c >= 'a' && c <= 'z') || c == '\'')) return std::string(word);
  }

  if (auto it = special_forms().find(word); it != special_forms().end()) {
    return std::string(it->second);
  }
  std::string w(word);
  if (!w.empty() && w[0] == '\'') w.erase(0, 1);
  if (w.size() <= 2) return w;

  mark_consonant_y(w);
  const Regions regions = mark_regions(w);

  step0(w);
  step1a(w);
  if (invariant_after_1a(w)) {
    std::replace(w.begin(), w.end(), 'Y', 'y');
    return w;
  }
  step1b(w, regions);
  step1c(w);
  step2(w, regions);
  step3(w, regions);
  step4(w, regions);
  step5(w, regions);

  std::replace(w.begin(), w.end(), 'Y', 'y');
  return w;
}

}  // namespace sentinel::textprep
