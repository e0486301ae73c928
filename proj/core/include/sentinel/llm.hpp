#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sentinel::llm {

inline constexpr std::string_view kPaperTerminator = "<|end_of_paper|>";

// The reviewer instruction sent as the first message of every
// conversation. Byte-stable; covered by a golden-file test.
const std::string& reviewer_prompt();

struct ChunkPlan {
  std::vector<std::string> chunks;  // concatenation equals the input text
  std::string terminator = std::string(kPaperTerminator);
  int max_chunk_tokens = 0;
  double chars_per_token = 4.0;
};

// Greedy split on paragraph boundaries, falling back to sentence and then
// character boundaries; every chunk's estimated token count stays within
// the budget. Token counts are estimated as ceil(chars / chars_per_token).
ChunkPlan plan_chunks(std::string_view text, int max_chunk_tokens, double chars_per_token = 4.0);

std::size_t estimate_tokens(std::string_view text, double chars_per_token);

struct Message {
  std::string role;
  std::string content;
};

// The prompt, then one message per chunk; the final chunk carries the
// terminator.
std::vector<Message> build_messages(const ChunkPlan& plan);

enum class Decision { accept, reject, invalid };
std::string_view to_string(Decision decision);
std::optional<Decision> decision_from_string(std::string_view name);

struct ReviewVerdict {
  Decision decision = Decision::invalid;
  std::string explanation;
  std::string raw_response;
  std::string model;
  // 1 + the number of failed transport attempts over the conversation.
  int attempts = 1;
  std::int64_t started_at = 0;
  std::int64_t finished_at = 0;
};

// Leading "Accept"/"Reject" token wins (markup and whitespace stripped);
// otherwise the opening clause must contain exactly one decision word, and
// anything else is invalid.
ReviewVerdict parse_verdict(std::string_view response);

struct EndpointConfig {
  std::string url;  // chat-completions compatible endpoint
  std::string model = "gpt-3.5-turbo";
  std::string api_key;  // usually from SENTINEL_LLM_KEY
  double temperature = 0.0;
  int max_retries = 3;
  double backoff_initial_s = 1.0;
  int timeout_s = 120;
};

inline constexpr std::string_view kApiKeyEnvVar = "SENTINEL_LLM_KEY";

// Runs the full chunked conversation against the endpoint. Transient
// transport failures are retried with exponential backoff; a reply that
// parses to any verdict (including invalid) is final and never retried.
ReviewVerdict review_paper(std::string_view text, const EndpointConfig& config,
                           int max_chunk_tokens = 3000, double chars_per_token = 4.0);

struct GroundTruth {
  std::string id;
  int label = 0;          // 1 = accepted (big4), 0 = rejected proxy
  std::string source;     // "big4" | "arxiv"
};

struct VerdictRecord {
  std::string id;
  Decision decision = Decision::invalid;
};

struct LlmScoreReport {
  int answers = 0;  // valid verdicts only
  int correct = 0;
  double accuracy = 0.0;
  int accept_count = 0;
  int reject_count = 0;
  std::optional<double> accuracy_big4;
  std::optional<double> accuracy_arxiv;

  std::string to_json_string() const;
};

// Invalid verdicts are filtered out before scoring; per-source accuracies
// cover each source's valid verdicts.
LlmScoreReport score(const std::vector<VerdictRecord>& verdicts,
                     const std::vector<GroundTruth>& truth);

}  // namespace sentinel::llm
