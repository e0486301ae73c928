#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace sentinel {

// All recoverable failures surface as Error. The category is a short
// machine-parseable token ("io", "parse", "validate", "config", "usage",
// "data", "train", "model", "format", "checksum", "http", "auth"); the CLI
// prints errors as "error: <category>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& detail)
      : std::runtime_error(detail), category_(std::move(category)) {}

  const std::string& category() const noexcept { return category_; }

 private:
  std::string category_;
};

}  // namespace sentinel
