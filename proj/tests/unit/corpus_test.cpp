#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "sentinel/corpus.hpp"
#include "sentinel/error.hpp"
#include "sentinel/util.hpp"
#include "tempdir.hpp"

using namespace sentinel;
using namespace sentinel::corpus;

namespace {

std::int64_t ts(const char* rfc3339) { return util::parse_rfc3339(rfc3339); }

ManifestRecord preprint(const std::string& id, std::vector<ArxivVersion> versions,
                        std::optional<std::string> venue = std::nullopt,
                        VenueTier tier = VenueTier::none) {
  ManifestRecord r;
  r.id = id;
  r.title = "title " + id;
  r.source = Source::preprint;
  r.venue = std::move(venue);
  r.venue_tier = tier;
  r.arxiv_versions = std::move(versions);
  r.year = r.arxiv_versions.empty() ? 2017 : util::utc_year(r.arxiv_versions.front().timestamp);
  r.category_tags = {"cs.CR"};
  r.text_path = id + ".txt";
  return r;
}

ManifestRecord proceedings(const std::string& id, const std::string& venue, int year) {
  ManifestRecord r;
  r.id = id;
  r.title = "title " + id;
  r.source = Source::proceedings;
  r.venue = venue;
  r.year = year;
  r.text_path = id + ".txt";
  return r;
}

DatasetManifest with_defaults(std::vector<ManifestRecord> records, std::uint64_t seed = 1) {
  DatasetManifest m;
  m.records = std::move(records);
  m.big4_venues = default_big4_venues();
  m.lower_tier_venues = default_lower_tier_venues();
  m.seed = seed;
  return m;
}

}  // namespace

TEST_CASE("venue normalization") {
  CHECK(normalize_venue("IEEE S&P") == "ieee sp");
  CHECK(normalize_venue("  USENIX   Security ") == "usenix security");
  CHECK(normalize_venue("CT-RSA") == "ctrsa");
  CHECK(normalize_venue("AsiaCCS") == "asiaccs");
  CHECK(default_lower_tier_venues().size() == 21);
}

TEST_CASE("load_manifest on an empty file") {
  testing::TempDir dir("corpus-test");
  util::write_file(dir.path() / "empty.jsonl", "");
  const DatasetManifest m = load_manifest(dir.path() / "empty.jsonl");
  CHECK(m.records.empty());
}

TEST_CASE("manifest round-trips byte-identically") {
  testing::TempDir dir("corpus-test");
  const std::string canonical =
      R"({"id":"a1","title":"First","source":"preprint","venue_tier":"none","year":2016,"arxiv_versions":[{"version":1,"timestamp":"2016-03-01T00:00:00Z"}],"category_tags":["cs.CR"],"text_path":"a1.txt"})"
      "\n"
      R"({"id":"p1","title":"Second","source":"proceedings","venue":"CCS","venue_tier":"big4","year":2018,"text_path":"p1.txt"})"
      "\n";
  util::write_file(dir.path() / "m.jsonl", canonical);
  const DatasetManifest m = load_manifest(dir.path() / "m.jsonl");
  REQUIRE(m.records.size() == 2);
  CHECK(manifest_to_string(m) == canonical);
}

TEST_CASE("non-monotone version timestamps name the record") {
  testing::TempDir dir("corpus-test");
  util::write_file(
      dir.path() / "bad.jsonl",
      R"({"id":"x9","title":"t","source":"preprint","year":2020,"arxiv_versions":[{"version":1,"timestamp":"2020-01-01T00:00:00Z"},{"version":2,"timestamp":"2019-01-01T00:00:00Z"}],"text_path":"x9.txt"})"
      "\n");
  try {
    load_manifest(dir.path() / "bad.jsonl");
    FAIL("expected validation error");
  } catch (const Error& e) {
    CHECK(e.category() == "validate");
    CHECK(std::string(e.what()).find("x9") != std::string::npos);
  }
}

TEST_CASE("parse errors carry line numbers; duplicate ids rejected") {
  testing::TempDir dir("corpus-test");
  util::write_file(dir.path() / "bad.jsonl", "{\"id\": \"a\"\n");
  try {
    load_manifest(dir.path() / "bad.jsonl");
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.category() == "parse");
    CHECK(std::string(e.what()).find(":1") != std::string::npos);
  }

  const std::string dup =
      R"({"id":"d","title":"t","source":"preprint","year":2017,"text_path":"d.txt"})" "\n"
      R"({"id":"d","title":"t","source":"preprint","year":2017,"text_path":"d.txt"})" "\n";
  util::write_file(dir.path() / "dup.jsonl", dup);
  CHECK_THROWS_AS(load_manifest(dir.path() / "dup.jsonl"), Error);

  // proceedings records must carry a venue
  util::write_file(dir.path() / "noven.jsonl",
                   R"({"id":"p","title":"t","source":"proceedings","year":2017,"text_path":"p.txt"})"
                   "\n");
  CHECK_THROWS_AS(load_manifest(dir.path() / "noven.jsonl"), Error);
}

TEST_CASE("rule 1 selects big4 preprints with a year gap") {
  const auto big4_gap = preprint(
      "r1a", {{1, ts("2019-01-01T00:00:00Z")}, {2, ts("2020-02-05T00:00:00Z")}}, "CCS");
  const auto big4_small_gap = preprint(
      "r1b", {{1, ts("2019-01-01T00:00:00Z")}, {2, ts("2019-07-20T00:00:00Z")}}, "CCS");
  const auto manifest = with_defaults({big4_gap, big4_small_gap});

  const auto rejected = apply_rule1(manifest);
  REQUIRE(rejected.size() == 1);
  CHECK(rejected[0].id == "r1a");
  CHECK(rejected[0].label == Label::reject);
  CHECK(rejected[0].provenance == LabelProvenance::rule1);
  CHECK(rejected[0].year == 2019);  // the first version's year
}

TEST_CASE("rule 1 gap threshold is measured in days") {
  // 365 days exactly -> included; 364 -> excluded.
  const auto exactly = preprint(
      "e", {{1, ts("2019-01-01T00:00:00Z")}, {2, ts("2020-01-01T00:00:00Z")}}, "NDSS");
  const auto under = preprint(
      "u", {{1, ts("2019-01-01T00:00:00Z")}, {2, ts("2019-12-31T00:00:00Z")}}, "NDSS");
  const auto manifest = with_defaults({exactly, under});
  const auto rejected = apply_rule1(manifest);
  REQUIRE(rejected.size() == 1);
  CHECK(rejected[0].id == "e");
}

TEST_CASE("rule 2 selects lower-tier venues only") {
  const auto lower = preprint("r2a", {{1, ts("2019-03-01T00:00:00Z")}}, "ESORICS");
  // big4 with a small gap is not lower tier and stays excluded
  const auto big4_small = preprint(
      "r2b", {{1, ts("2019-01-01T00:00:00Z")}, {2, ts("2019-06-01T00:00:00Z")}}, "CCS");
  const auto non_cscr = [] {
    auto r = preprint("r2c", {{1, ts("2019-03-01T00:00:00Z")}}, "ESORICS");
    r.category_tags = {"cs.LG"};
    return r;
  }();
  const auto manifest = with_defaults({lower, big4_small, non_cscr});

  const auto rejected = apply_rule2(manifest);
  REQUIRE(rejected.size() == 1);
  CHECK(rejected[0].id == "r2a");
  CHECK(rejected[0].provenance == LabelProvenance::rule2);
}

TEST_CASE("rule 3 takes unpublished preprints before the cutoff") {
  const auto old_unpublished = preprint("r3a", {{1, ts("2016-05-01T00:00:00Z")}});
  const auto new_unpublished = preprint("r3b", {{1, ts("2019-05-01T00:00:00Z")}});
  const auto manifest = with_defaults({old_unpublished, new_unpublished});

  const auto rejected = apply_rule3(manifest);
  REQUIRE(rejected.size() == 1);
  CHECK(rejected[0].id == "r3a");
  CHECK(rejected[0].provenance == LabelProvenance::rule3);
}

TEST_CASE("rules are disjoint by venue tier") {
  std::vector<ManifestRecord> records = {
      preprint("q1", {{1, ts("2016-01-01T00:00:00Z")}, {2, ts("2017-06-01T00:00:00Z")}}, "CCS"),
      preprint("q2", {{1, ts("2016-01-01T00:00:00Z")}}, "RAID"),
      preprint("q3", {{1, ts("2016-01-01T00:00:00Z")}}),
  };
  const auto manifest = with_defaults(records);
  const auto r1 = apply_rule1(manifest);
  const auto r2 = apply_rule2(manifest);
  const auto r3 = apply_rule3(manifest);
  std::set<std::string> seen;
  for (const auto* rule_output : {&r1, &r2, &r3}) {
    for (const LabeledDocument& doc : *rule_output) {
      CHECK(seen.insert(doc.id).second);
    }
  }
  CHECK(seen.size() == 3);
}

TEST_CASE("balanced dataset drops only rule-3 samples") {
  std::vector<ManifestRecord> records;
  for (int i = 0; i < 10; ++i) {
    records.push_back(proceedings("pos" + std::to_string(i), "CCS", 2018));
  }
  for (int i = 0; i < 4; ++i) {
    records.push_back(preprint(
        "g1_" + std::to_string(i),
        {{1, ts("2016-01-01T00:00:00Z")}, {2, ts("2017-06-01T00:00:00Z")}}, "USENIX Security"));
  }
  for (int i = 0; i < 20; ++i) {
    records.push_back(preprint("g3_" + std::to_string(i), {{1, ts("2016-03-01T00:00:00Z")}}));
  }
  const auto manifest = with_defaults(records, 99);

  const auto dataset = build_balanced_dataset(manifest);
  std::size_t accepts = 0;
  std::size_t rule1 = 0;
  std::size_t rule3 = 0;
  for (const LabeledDocument& doc : dataset) {
    if (doc.label == Label::accept) {
      ++accepts;
      CHECK(doc.provenance == LabelProvenance::published_big4);
    } else if (doc.provenance == LabelProvenance::rule1) {
      ++rule1;
    } else if (doc.provenance == LabelProvenance::rule3) {
      ++rule3;
    }
  }
  CHECK(accepts == 10);
  CHECK(rule1 == 4);   // never dropped
  CHECK(rule3 == 6);   // downsampled from 20
  CHECK(dataset.size() == 20);
}

TEST_CASE("balancing is deterministic and order-invariant") {
  std::vector<ManifestRecord> records;
  for (int i = 0; i < 5; ++i) records.push_back(proceedings("p" + std::to_string(i), "CCS", 2018));
  for (int i = 0; i < 12; ++i) {
    records.push_back(preprint("n" + std::to_string(i), {{1, ts("2016-03-01T00:00:00Z")}}));
  }
  auto manifest = with_defaults(records, 1234);

  const auto first = build_balanced_dataset(manifest);
  const auto second = build_balanced_dataset(manifest);
  CHECK(first == second);

  // Reordering records keeps the same retained id set.
  std::reverse(manifest.records.begin(), manifest.records.end());
  const auto reordered = build_balanced_dataset(manifest);
  auto ids = [](const std::vector<LabeledDocument>& docs) {
    std::set<std::string> out;
    for (const auto& d : docs) out.insert(d.id);
    return out;
  };
  CHECK(ids(first) == ids(reordered));
}

TEST_CASE("balanced dataset counts match per class") {
  std::vector<ManifestRecord> records;
  for (int i = 0; i < 7; ++i) records.push_back(proceedings("p" + std::to_string(i), "NDSS", 2018));
  for (int i = 0; i < 30; ++i) {
    records.push_back(preprint("n" + std::to_string(i), {{1, ts("2015-03-01T00:00:00Z")}}));
  }
  const auto dataset = build_balanced_dataset(with_defaults(records, 5));
  const auto accepts = std::count_if(dataset.begin(), dataset.end(), [](const auto& d) {
    return d.label == Label::accept;
  });
  CHECK(accepts * 2 == static_cast<std::ptrdiff_t>(dataset.size()));
}

TEST_CASE("insufficient negatives error and the unbalanced escape hatch") {
  std::vector<ManifestRecord> records;
  for (int i = 0; i < 8; ++i) records.push_back(proceedings("p" + std::to_string(i), "CCS", 2018));
  records.push_back(preprint("n0", {{1, ts("2016-03-01T00:00:00Z")}}));

  const auto manifest = with_defaults(records);
  try {
    build_balanced_dataset(manifest);
    FAIL("expected data error");
  } catch (const Error& e) {
    CHECK(e.category() == "data");
    CHECK(std::string(e.what()).find("positives=8") != std::string::npos);
  }

  BalanceOptions options;
  options.allow_unbalanced = true;
  const auto dataset = build_balanced_dataset(manifest, options);
  CHECK(dataset.size() == 9);
}

TEST_CASE("no positives is an error") {
  const auto manifest = with_defaults({preprint("n0", {{1, ts("2016-03-01T00:00:00Z")}})});
  CHECK_THROWS_AS(build_balanced_dataset(manifest), Error);
}

TEST_CASE("positive pool selection") {
  std::vector<ManifestRecord> records = {
      proceedings("big", "CCS", 2018),
      proceedings("vision", "CVPR", 2018),
      preprint("n0", {{1, ts("2016-03-01T00:00:00Z")}}),
      preprint("n1", {{1, ts("2016-04-01T00:00:00Z")}}),
  };
  const auto manifest = with_defaults(records);

  const auto big4_only = build_balanced_dataset(manifest);
  CHECK(std::count_if(big4_only.begin(), big4_only.end(),
                      [](const auto& d) { return d.label == Label::accept; }) == 1);

  BalanceOptions options;
  options.pool = PositivePool::all_proceedings;
  const auto all = build_balanced_dataset(manifest, options);
  CHECK(std::count_if(all.begin(), all.end(),
                      [](const auto& d) { return d.label == Label::accept; }) == 2);

  CHECK(pretrain_pool(manifest).size() == 4);
  CHECK(security_pool(manifest).size() == 3);  // big4 venue + the two cs.CR preprints
}
