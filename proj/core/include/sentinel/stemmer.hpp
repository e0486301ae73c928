#pragma once

#include <string>
#include <string_view>

namespace sentinel::textprep {

// English suffix-stripping stemmer (the Porter2 / Snowball English
// algorithm). Expects a lowercase ASCII word; words containing characters
// outside [a-z'] are returned unchanged.
std::string stem(std::string_view word);

}  // namespace sentinel::textprep
