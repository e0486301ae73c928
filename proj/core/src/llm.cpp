#include "sentinel/llm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_map>

#include <json.hpp>

#include "sentinel/error.hpp"

namespace sentinel::llm {

const std::string& reviewer_prompt() {
  static const std::string kPrompt =
      "You are an experienced and fair reviewer from top cybersecurity conferences (NDSS, "
      "IEEE S&P, CCS and USENIX Security). I will give you a paper for you to read and "
      "review. Due to the token limitation, I will split the paper content into some chunks "
      "and I will let you read the entire paper chunk by chunk. Please only reply with \"OK\" "
      "if the text does not contain \"<|end_of_paper|>\". Once you receive it, please merge "
      "the previous messages together into a full paper for you to review. I want you to "
      "decide whether this paper should be accepted or not. You must first tell me your "
      "decision with \"Accept\" or \"Reject\", and then explain your reasons in concise "
      "language.";
  return kPrompt;
}

std::size_t estimate_tokens(std::string_view text, double chars_per_token) {
  return static_cast<std::size_t>(
      std::ceil(static_cast<double>(text.size()) / chars_per_token));
}

namespace {

// Pieces split after runs of two or more newlines; concatenation of the
// returned views equals the input.
std::vector<std::string_view> split_paragraphs(std::string_view text) {
  std::vector<std::string_view> units;
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '\n') {
      std::size_t j = i;
      while (j < text.size() && text[j] == '\n') ++j;
      if (j - i >= 2) {
        units.push_back(text.substr(start, j - start));
        start = j;
      }
      i = j;
    } else {
      ++i;
    }
  }
  if (start < text.size()) units.push_back(text.substr(start));
  return units;
}

std::vector<std::string_view> split_sentences(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i + 1 < text.size(); ++i) {
    const char c = text[i];
    if ((c == '.' || c == '!' || c == '?') &&
        std::isspace(static_cast<unsigned char>(text[i + 1]))) {
      out.push_back(text.substr(start, i + 1 - start));
      start = i + 1;
    }
  }
  if (start < text.size()) out.push_back(text.substr(start));
  return out;
}

// Atomic pieces no longer than the budget: whole paragraphs where they
// fit, then sentences, then raw character slices.
void atomize(std::string_view text, std::size_t budget, std::vector<std::string_view>& out) {
  for (std::string_view paragraph : split_paragraphs(text)) {
    if (paragraph.size() <= budget) {
      out.push_back(paragraph);
      continue;
    }
    for (std::string_view sentence : split_sentences(paragraph)) {
      if (sentence.size() <= budget) {
        out.push_back(sentence);
        continue;
      }
      for (std::size_t pos = 0; pos < sentence.size(); pos += budget) {
        out.push_back(sentence.substr(pos, std::min(budget, sentence.size() - pos)));
      }
    }
  }
}

}  // namespace

ChunkPlan plan_chunks(std::string_view text, int max_chunk_tokens, double chars_per_token) {
  if (text.empty()) throw Error("data", "plan_chunks: text is empty");
  if (max_chunk_tokens <= 0) throw Error("config", "max_chunk_tokens must be positive");
  if (chars_per_token <= 0.0) throw Error("config", "chars_per_token must be positive");

  const std::size_t budget =
      std::max<std::size_t>(1, static_cast<std::size_t>(
                                   static_cast<double>(max_chunk_tokens) * chars_per_token));

  std::vector<std::string_view> atoms;
  atomize(text, budget, atoms);

  ChunkPlan plan;
  plan.max_chunk_tokens = max_chunk_tokens;
  plan.chars_per_token = chars_per_token;
  std::string current;
  for (std::string_view atom : atoms) {
    if (!current.empty() && current.size() + atom.size() > budget) {
      plan.chunks.push_back(std::move(current));
      current.clear();
    }
    current.append(atom);
  }
  if (!current.empty()) plan.chunks.push_back(std::move(current));
  return plan;
}

std::vector<Message> build_messages(const ChunkPlan& plan) {
  std::vector<Message> messages;
  messages.reserve(plan.chunks.size() + 1);
  messages.push_back({"user", reviewer_prompt()});
  for (std::size_t i = 0; i < plan.chunks.size(); ++i) {
    std::string content = plan.chunks[i];
    if (i + 1 == plan.chunks.size()) {
      content += '\n';
      content += plan.terminator;
    }
    messages.push_back({"user", std::move(content)});
  }
  return messages;
}

std::string_view to_string(Decision decision) {
  switch (decision) {
    case Decision::accept: return "accept";
    case Decision::reject: return "reject";
    case Decision::invalid: return "invalid";
  }
  return "invalid";
}

std::optional<Decision> decision_from_string(std::string_view name) {
  if (name == "accept") return Decision::accept;
  if (name == "reject") return Decision::reject;
  if (name == "invalid") return Decision::invalid;
  return std::nullopt;
}

namespace {

bool istarts_with(std::string_view text, std::string_view prefix) {
  if (text.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(text[i])) != prefix[i]) return false;
  }
  return true;
}

std::string_view strip_markup(std::string_view text) {
  constexpr std::string_view kMarkup = "*#\"'`>()[]";
  std::size_t i = 0;
  while (i < text.size() && (std::isspace(static_cast<unsigned char>(text[i])) ||
                             kMarkup.find(text[i]) != std::string_view::npos)) {
    ++i;
  }
  return text.substr(i);
}

std::string trim_explanation(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size() && (std::isspace(static_cast<unsigned char>(text[i])) ||
                             std::ispunct(static_cast<unsigned char>(text[i])))) {
    ++i;
  }
  return std::string(text.substr(i));
}

}  // namespace

ReviewVerdict parse_verdict(std::string_view response) {
  ReviewVerdict verdict;
  verdict.raw_response = std::string(response);

  const std::string_view stripped = strip_markup(response);
  if (istarts_with(stripped, "accept") || istarts_with(stripped, "reject")) {
    verdict.decision = istarts_with(stripped, "accept") ? Decision::accept : Decision::reject;
    verdict.explanation = trim_explanation(stripped.substr(6));
    return verdict;
  }

  // Opening clause: up to the first sentence or line break.
  std::size_t clause_end = stripped.size();
  for (std::size_t i = 0; i < stripped.size(); ++i) {
    const char c = stripped[i];
    if (c == '.' || c == '!' || c == '?' || c == ';' || c == '\n') {
      clause_end = i;
      break;
    }
  }
  const std::string_view clause = stripped.substr(0, clause_end);

  std::size_t accept_pos = std::string_view::npos;
  std::size_t reject_pos = std::string_view::npos;
  for (std::size_t i = 0; i < clause.size(); ++i) {
    const bool word_start =
        std::isalpha(static_cast<unsigned char>(clause[i])) &&
        (i == 0 || !std::isalpha(static_cast<unsigned char>(clause[i - 1])));
    if (!word_start) continue;
    if (accept_pos == std::string_view::npos && istarts_with(clause.substr(i), "accept")) {
      accept_pos = i;
    }
    if (reject_pos == std::string_view::npos && istarts_with(clause.substr(i), "reject")) {
      reject_pos = i;
    }
  }

  const bool has_accept = accept_pos != std::string_view::npos;
  const bool has_reject = reject_pos != std::string_view::npos;
  if (has_accept == has_reject) {
    verdict.decision = Decision::invalid;
    return verdict;
  }
  verdict.decision = has_accept ? Decision::accept : Decision::reject;
  const std::size_t token_pos = has_accept ? accept_pos : reject_pos;
  verdict.explanation = trim_explanation(stripped.substr(token_pos + 6));
  return verdict;
}

std::string LlmScoreReport::to_json_string() const {
  nlohmann::ordered_json doc;
  doc["answers"] = answers;
  doc["correct"] = correct;
  doc["accuracy"] = accuracy;
  doc["accept_count"] = accept_count;
  doc["reject_count"] = reject_count;
  doc["accuracy_big4"] = accuracy_big4.has_value() ? nlohmann::ordered_json(*accuracy_big4)
                                                   : nlohmann::ordered_json(nullptr);
  doc["accuracy_arxiv"] = accuracy_arxiv.has_value() ? nlohmann::ordered_json(*accuracy_arxiv)
                                                     : nlohmann::ordered_json(nullptr);
  return doc.dump();
}

LlmScoreReport score(const std::vector<VerdictRecord>& verdicts,
                     const std::vector<GroundTruth>& truth) {
  std::unordered_map<std::string_view, const GroundTruth*> by_id;
  for (const GroundTruth& g : truth) by_id.emplace(g.id, &g);

  LlmScoreReport report;
  struct SourceCounts {
    int answers = 0;
    int correct = 0;
  };
  SourceCounts big4;
  SourceCounts arxiv;

  for (const VerdictRecord& v : verdicts) {
    if (v.decision == Decision::invalid) continue;  // filtered out of "answers"
    const auto it = by_id.find(v.id);
    if (it == by_id.end()) {
      throw Error("data", "no ground truth for verdict id '" + v.id + "'");
    }
    const GroundTruth& g = *it->second;
    const int predicted = v.decision == Decision::accept ? 1 : 0;
    const bool correct = predicted == g.label;

    ++report.answers;
    report.correct += correct ? 1 : 0;
    predicted == 1 ? ++report.accept_count : ++report.reject_count;

    SourceCounts& counts = g.source == "big4" ? big4 : arxiv;
    ++counts.answers;
    counts.correct += correct ? 1 : 0;
  }
  if (report.answers == 0) {
    throw Error("data", "no valid verdicts to score (all were invalid)");
  }
  report.accuracy = static_cast<double>(report.correct) / static_cast<double>(report.answers);
  if (big4.answers > 0) {
    report.accuracy_big4 = static_cast<double>(big4.correct) / static_cast<double>(big4.answers);
  }
  if (arxiv.answers > 0) {
    report.accuracy_arxiv =
        static_cast<double>(arxiv.correct) / static_cast<double>(arxiv.answers);
  }
  return report;
}

}  // namespace sentinel::llm
