#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "sentinel/textprep.hpp"

using namespace sentinel::textprep;

namespace {

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (const std::string& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

}  // namespace

TEST_CASE("anonymize removes header block and reference list") {
  RawDocument doc{"d1",
                  "A Study of Things\n"
                  "Alice Author\n"
                  "Example University\n"
                  "ABSTRACT\n"
                  "We study things.\n"
                  "1 Introduction\n"
                  "Things are studied here.\n"
                  "REFERENCES\n"
                  "[1] Prior work.\n"};
  const AnonymizeResult result = anonymize(doc);
  CHECK(result.header_removed);
  CHECK(result.bibliography_removed);
  CHECK(result.doc.text.find("Alice Author") == std::string::npos);
  CHECK(result.doc.text.find("Example University") == std::string::npos);
  CHECK(result.doc.text.find("[1] Prior work") == std::string::npos);
  CHECK(result.doc.text.find("A Study of Things") != std::string::npos);  // title kept
  CHECK(result.doc.text.find("We study things.") != std::string::npos);
  CHECK(result.doc.text.find("Things are studied here.") != std::string::npos);
}

TEST_CASE("anonymize with markers absent only strips footer lines") {
  RawDocument doc{"d2",
                  "Some text without structure.\n"
                  "Copyright 2020 Someone. DOI: 10.1000/xyz\n"
                  "More text.\n"};
  const AnonymizeResult result = anonymize(doc);
  CHECK_FALSE(result.header_removed);
  CHECK_FALSE(result.bibliography_removed);
  CHECK(result.footer_lines_removed == 1);
  CHECK(result.doc.text.find("Copyright") == std::string::npos);
  CHECK(result.doc.text.find("Some text without structure.") != std::string::npos);
  CHECK(result.doc.text.find("More text.") != std::string::npos);
}

TEST_CASE("anonymize keeps inline mentions of the references section") {
  RawDocument doc{"d3",
                  "Title Line\n"
                  "Abstract\n"
                  "As noted in the references section of prior work.\n"
                  "References\n"
                  "[1] gone\n"};
  const AnonymizeResult result = anonymize(doc);
  CHECK(result.doc.text.find("the references section of prior work") != std::string::npos);
  CHECK(result.doc.text.find("[1] gone") == std::string::npos);
}

TEST_CASE("anonymize never grows the document") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 50; ++i) {
    std::string text;
    const int lines = static_cast<int>(rng() % 20) + 1;
    for (int l = 0; l < lines; ++l) {
      switch (rng() % 5) {
        case 0: text += "Abstract\n"; break;
        case 1: text += "References\n"; break;
        case 2: text += "Copyright 2020\n"; break;
        default: text += "word another line of text\n"; break;
      }
    }
    const AnonymizeResult result = anonymize(RawDocument{"r", text});
    CHECK(result.doc.text.size() <= text.size());
  }
}

TEST_CASE("extract_abstract between markers") {
  CHECK(extract_abstract("Abstract\nX Y Z\n1 Introduction\nBody.") == "X Y Z");
  CHECK(extract_abstract("ABSTRACT: first claim.\nIntroduction\nBody.") == "first claim.");
}

TEST_CASE("extract_abstract falls back to the first 2000 characters") {
  std::string text(5000, 'a');
  for (std::size_t i = 0; i < text.size(); i += 97) text[i] = ' ';
  const std::string abstract = extract_abstract(text);
  CHECK(abstract.size() == 2000);
  CHECK(abstract == text.substr(0, 2000));

  // marker present but no introduction heading -> still the fallback
  std::string with_marker = "Abstract " + text;
  CHECK(extract_abstract(with_marker) == with_marker.substr(0, 2000));
}

TEST_CASE("extract_abstract short document without markers") {
  const std::string text = "just one hundred characters of text";
  CHECK(extract_abstract(text) == text);
}

TEST_CASE("extract_abstract is always a substring of the input") {
  std::mt19937_64 rng(11);
  const std::vector<std::string> pieces = {"Abstract", "Introduction", "1 Introduction\n",
                                           "plain text ", "\n", "ABSTRACT\n", "more words "};
  for (int i = 0; i < 100; ++i) {
    std::string text;
    const int n = static_cast<int>(rng() % 12) + 1;
    for (int j = 0; j < n; ++j) text += pieces[rng() % pieces.size()];
    if (text.empty()) continue;
    const std::string abstract = extract_abstract(text);
    CHECK(text.find(abstract) != std::string::npos);
  }
}

TEST_CASE("normalize matches the documented pipeline") {
  const NormalizeConfig cfg = NormalizeConfig::defaults();
  CHECK(normalize("Don't run quickly", cfg) ==
        std::vector<std::string>{"do", "not", "run", "quick"});
  CHECK(normalize("", cfg).empty());
  CHECK(normalize("the a an", cfg).empty());
}

TEST_CASE("normalize tokenization rules") {
  const NormalizeConfig cfg = NormalizeConfig::defaults();
  CHECK(normalize("covid-19 x86 state-of-the-art", cfg) ==
        std::vector<std::string>{"covid", "19", "x", "86", "state-of-the-art"});
  CHECK(normalize("Paper's results!", cfg) == std::vector<std::string>{"paper", "result"});
  CHECK(normalize("abc123def", cfg) == std::vector<std::string>{"abc", "123", "def"});
}

TEST_CASE("normalized tokens satisfy the charset and stop-word invariants") {
  const NormalizeConfig cfg = NormalizeConfig::defaults();
  const std::string text =
      "The QUICK brown-fox jumps over 42 lazy dogs; it's truly unstoppable, isn't it? "
      "Training embeddings efficiently requires care.";
  for (const std::string& token : normalize(text, cfg)) {
    CHECK_FALSE(token.empty());
    for (char c : token) {
      const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-';
      CHECK(ok);
    }
    CHECK_FALSE(cfg.stop_words.contains(token));
  }
}

TEST_CASE("normalize is idempotent on corpus fixtures") {
  const NormalizeConfig cfg = NormalizeConfig::defaults();
  const std::vector<std::string> fixtures = {
      "Don't run quickly through the consolidated experiments",
      "We train a pipeline for document embeddings and classifiers.",
      "Paragraph vectors capture topics; classifiers decide outcomes.",
      "state-of-the-art x86 systems with 42 cores running efficiently",
  };
  for (const std::string& text : fixtures) {
    const std::vector<std::string> once = normalize(text, cfg);
    CHECK(normalize(join(once), cfg) == once);
  }
}

TEST_CASE("pipeline determinism") {
  const NormalizeConfig cfg = NormalizeConfig::defaults();
  const std::string text = "Deterministic pipelines produce identical token streams, always.";
  CHECK(normalize(text, cfg) == normalize(text, cfg));
}

TEST_CASE("prepare fills tokens and abstract tokens") {
  RawDocument doc{"p1",
                  "A Title\n"
                  "Author Name\n"
                  "Abstract\n"
                  "embedding training works\n"
                  "1 Introduction\n"
                  "embedding training works in the body too\n"};
  AnonymizeResult log;
  const NormalizedDocument prepared =
      prepare(doc, AnonymizeConfig::defaults(), NormalizeConfig::defaults(), &log);
  CHECK(prepared.id == "p1");
  CHECK(prepared.abstract_tokens == std::vector<std::string>{"embed", "train", "work"});
  CHECK(!prepared.tokens.empty());
  CHECK(log.header_removed);
}

TEST_CASE("config overrides from files") {
  // stop words: only "foo"; contractions: custom mapping
  const auto dir = std::filesystem::temp_directory_path() / "sentinel-textprep-test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream stop(dir / "stop.txt");
    stop << "# comment\nfoo\n";
    std::ofstream contr(dir / "contr.json");
    contr << R"({"won't": "will not"})";
  }
  const NormalizeConfig cfg =
      NormalizeConfig::from_files(dir / "stop.txt", dir / "contr.json");
  CHECK(normalize("foo won't bar the", cfg) ==
        std::vector<std::string>{"will", "not", "bar", "the"});
  std::filesystem::remove_all(dir);
}
