#include <chrono>
#include <cmath>
#include <ctime>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "sentinel/error.hpp"
#include "sentinel/llm.hpp"

namespace sentinel::llm {

namespace {

struct ParsedUrl {
  std::string base;  // scheme://host[:port]
  std::string path;
};

ParsedUrl parse_url(const std::string& url) {
  const std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error("config", "endpoint URL must include a scheme: " + url);
  }
  const std::size_t path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::string extract_reply(const std::string& body) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw Error("http", std::string("malformed endpoint response: ") + e.what());
  }
  try {
    return doc.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw Error("http", "endpoint response carries no message content");
  }
}

bool mentions_context_length(const std::string& body) {
  return body.find("context_length") != std::string::npos ||
         body.find("context length") != std::string::npos ||
         body.find("maximum context") != std::string::npos;
}

}  // namespace

ReviewVerdict review_paper(std::string_view text, const EndpointConfig& config,
                           int max_chunk_tokens, double chars_per_token) {
  const ParsedUrl url = parse_url(config.url);
  httplib::Client client(url.base);
  client.set_connection_timeout(config.timeout_s);
  client.set_read_timeout(config.timeout_s);
  client.set_write_timeout(config.timeout_s);

  httplib::Headers headers;
  if (!config.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config.api_key);
  }

  const ChunkPlan plan = plan_chunks(text, max_chunk_tokens, chars_per_token);
  const std::vector<Message> outgoing = build_messages(plan);

  ReviewVerdict verdict;
  verdict.model = config.model;
  verdict.started_at = static_cast<std::int64_t>(std::time(nullptr));

  nlohmann::json messages = nlohmann::json::array();
  std::string last_reply;
  int failed_attempts = 0;

  for (const Message& message : outgoing) {
    messages.push_back({{"role", message.role}, {"content", message.content}});
    const nlohmann::json request = {
        {"model", config.model},
        {"temperature", config.temperature},
        {"messages", messages},
    };
    const std::string body = request.dump();

    bool delivered = false;
    for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
      if (attempt > 0) {
        const double backoff = config.backoff_initial_s * std::pow(2.0, attempt - 1);
        std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
      }
      httplib::Result result = client.Post(url.path, headers, body, "application/json");
      if (!result) {
        ++failed_attempts;
        continue;  // transport failure
      }
      const int status = result->status;
      if (status == 401 || status == 403) {
        throw Error("auth", "endpoint rejected credentials (HTTP " + std::to_string(status) + ")");
      }
      if (status == 400 && mentions_context_length(result->body)) {
        throw Error("http", "endpoint rejected the request for context length");
      }
      if (status == 429 || status >= 500) {
        ++failed_attempts;
        continue;  // transient; retry with backoff
      }
      if (status != 200) {
        throw Error("http", "endpoint returned HTTP " + std::to_string(status));
      }
      last_reply = extract_reply(result->body);
      delivered = true;
      break;
    }
    if (!delivered) {
      throw Error("http", "transport failure after " + std::to_string(config.max_retries + 1) +
                              " attempts");
    }
    messages.push_back({{"role", "assistant"}, {"content", last_reply}});
  }

  // The final reply is the verdict; a parsed reply (even an invalid
  // decision) is never retried.
  ReviewVerdict parsed = parse_verdict(last_reply);
  parsed.model = config.model;
  parsed.attempts = 1 + failed_attempts;
  parsed.started_at = verdict.started_at;
  parsed.finished_at = static_cast<std::int64_t>(std::time(nullptr));
  return parsed;
}

}  // namespace sentinel::llm
