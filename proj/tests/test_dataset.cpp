#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <regex>
#include <sstream>

#include "philoscope/dataset.hpp"
#include "philoscope/error.hpp"
#include "philoscope/sha256.hpp"
#include "test_support.hpp"

namespace philoscope {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;
using testing::fixture_dir;
using testing::fixtures;

std::vector<fs::path> fixture_csvs() {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(fixture_dir())) {
    if (e.path().extension() == ".csv") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

// Copies the fixture CSVs (no manifest) into `dir`.
void copy_csvs(const fs::path& dir) {
  for (const auto& f : fixture_csvs()) fs::copy_file(f, dir / f.filename());
}

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Load, FixtureIntegrity) {
  const auto& d = fixtures();
  EXPECT_EQ(d.translations.size(), 60u);
  EXPECT_EQ(d.metric_table_tqs.size(), 60u);
  EXPECT_EQ(d.profiles.size(), 20u);
  EXPECT_EQ(d.row_counts.at("table_s1.csv"), 60u);
  EXPECT_EQ(d.row_counts.at("table_s2.csv"), 60u);
  EXPECT_EQ(d.row_counts.at("table_s6.csv"), 20u);
  EXPECT_EQ(d.version, "philoscope-fixtures 1.0.0");
  EXPECT_EQ(d.texts(), (std::vector<std::string>{"Mix", "Comp"}));
  for (const auto& m : d.metric_scores) EXPECT_NE(d.find(m.key), nullptr);
}

TEST(Load, CanonicalRecomputation) {
  const auto* t = fixtures().find({"Comp", 9, "ChatGPT"});
  ASSERT_NE(t, nullptr);
  EXPECT_DOUBLE_EQ(t->tqs, 82.8);
  EXPECT_EQ(t->scheme1(), Rating::Fail);
  EXPECT_EQ(*t->stored_rating, Rating::Fail);
}

TEST(Load, EveryStoredRatingMatchesSchemeOne) {
  for (const auto& t : fixtures().translations) {
    ASSERT_TRUE(t.stored_rating.has_value());
    EXPECT_EQ(t.scheme1(), *t.stored_rating) << to_string(t.key);
  }
}

TEST(Load, KnownDisagreementsAreWarningsEvenWhenStrict) {
  const std::vector<fs::path> paths{fixture_dir()};
  LoadOptions strict;
  strict.strict = true;
  const auto r = load(paths, strict);
  EXPECT_EQ(r.warnings.size(), 5u);
  for (const auto& w : r.warnings) EXPECT_NE(w.find("known discrepancy"), std::string::npos);
  // S2 stays canonical
  EXPECT_DOUBLE_EQ(r.dataset.find({"Mix", 4, "Claude"})->tqs, 96.1);
}

TEST(Load, UnexplainedDisagreementFailsOnlyWhenStrict) {
  TempDir dir("unexplained");
  copy_csvs(dir.path());
  fs::remove(dir / "known_discrepancies.csv");
  const std::vector<fs::path> paths{dir.path()};
  const auto lenient = load(paths);
  EXPECT_EQ(lenient.warnings.size(), 5u);
  LoadOptions strict;
  strict.strict = true;
  try {
    load(paths, strict);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("Mix:4:Claude"), std::string::npos);
  }
}

TEST(Load, OrderIndependentAndIdempotent) {
  auto files = fixture_csvs();
  const auto a = load(files).dataset;
  std::reverse(files.begin(), files.end());
  const auto b = load(files).dataset;
  EXPECT_EQ(a, b);
  EXPECT_EQ(load(files).dataset, b);
}

TEST(Load, SaveRoundTripIsLossless) {
  TempDir dir("roundtrip");
  save(fixtures(), dir.path());
  const std::vector<fs::path> paths{dir.path()};
  LoadOptions strict;
  strict.strict = true;
  const auto back = load(paths, strict).dataset;
  EXPECT_EQ(back, fixtures());

  TempDir again("roundtrip2");
  save(back, again.path());
  for (const auto& e : fs::directory_iterator(dir.path())) {
    EXPECT_EQ(slurp(e.path()), slurp(again / e.path().filename().string())) << e.path();
  }
}

TEST(Load, DuplicateKeyIsAnError) {
  TempDir dir("dupe");
  std::string s2 = slurp(fixture_dir() / "table_s2.csv");
  s2 += "Mix,1,Claude,96.7,HP,0,4,1,0\n";
  spit(dir / "table_s2.csv", s2);
  const std::vector<fs::path> paths{dir / "table_s2.csv"};
  try {
    load(paths);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("Mix:1:Claude"), std::string::npos);
  }
}

TEST(Load, JoinFailureListsUnmatchedKeys) {
  TempDir dir("join");
  spit(dir / "table_s2.csv", "text,passage,model,tqs,rating,neutral,minor,major,critical\n"
                             "Mix,1,Claude,96.7,HP,0,4,1,0\n");
  spit(dir / "metrics.csv", "text,passage,model,metric,reference_id,value\n"
                            "Mix,1,Claude,COMET,,0.8\nMix,2,Gemini,COMET,,0.7\n");
  const std::vector<fs::path> paths{dir.path()};
  try {
    load(paths);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("Mix:2:Gemini"), std::string::npos);
  }
}

TEST(Load, SchemaErrorsCarryFileLineAndColumn) {
  TempDir dir("schema");
  spit(dir / "bad.csv", "text,passage,model,tqs,rating,neutral,minor,major,critical\n"
                        "Mix,1,Claude,96.7,HP,0,4,1,0\nMix,x,Claude,96.7,HP,0,4,1,0\n");
  const std::vector<fs::path> paths{dir / "bad.csv"};
  try {
    load(paths);
    FAIL();
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("bad.csv:3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("passage"), std::string::npos) << msg;
  }
  spit(dir / "odd.csv", "foo,bar\n1,2\n");
  const std::vector<fs::path> odd{dir / "odd.csv"};
  EXPECT_THROW(load(odd), Error);
  const std::vector<fs::path> none{};
  EXPECT_THROW(load(none), Error);
}

TEST(Load, ManifestMismatch) {
  TempDir dir("manifest");
  copy_csvs(dir.path());
  const std::vector<std::string> names{"table_s2.csv"};
  write_manifest(dir.path(), names);
  EXPECT_EQ(read_manifest(dir / "fixtures.sha256").at("table_s2.csv"),
            sha256_file(dir / "table_s2.csv"));
  spit(dir / "table_s2.csv", slurp(dir / "table_s2.csv") + "\n");
  const std::vector<fs::path> paths{dir.path()};
  const auto lenient = load(paths);
  EXPECT_TRUE(std::any_of(lenient.warnings.begin(), lenient.warnings.end(),
                          [](const std::string& w) { return w.find("checksum") != std::string::npos; }));
  LoadOptions strict;
  strict.strict = true;
  EXPECT_THROW(load(paths, strict), Error);
}

TEST(Load, BundledManifestMatches) {
  for (const auto& [name, digest] : read_manifest(fixture_dir() / "fixtures.sha256")) {
    EXPECT_EQ(sha256_file(fixture_dir() / name), digest) << name;
  }
}

TEST(Verify, BundledFixturesHaveNoUnexplainedDiffs) {
  const auto rep = verify_fixtures(fixtures());
  EXPECT_GT(rep.checks, 200u);
  EXPECT_EQ(rep.unexplained(), 0u);
  EXPECT_EQ(rep.diffs.size(), 8u);
}

TEST(Verify, FlippedCriticalCountIsReported) {
  TempDir dir("flip");
  copy_csvs(dir.path());
  // Mix 6 Gemini: critical 1 -> 0
  std::string s2 = slurp(dir / "table_s2.csv");
  const std::regex row("(Mix,6,Gemini,[^\\n]*),1\\n");
  ASSERT_TRUE(std::regex_search(s2, row));
  s2 = std::regex_replace(s2, row, "$1,0\n");
  spit(dir / "table_s2.csv", s2);
  const std::vector<fs::path> paths{dir.path()};
  const auto rep = verify_fixtures(load(paths).dataset);
  EXPECT_GE(rep.unexplained(), 1u);
  EXPECT_TRUE(std::any_of(rep.diffs.begin(), rep.diffs.end(), [](const FixtureDiff& d) {
    return d.location == "Mix/Gemini critical" && !d.known;
  }));
}

TEST(Verify, RowCountMismatch) {
  TempDir dir("rows");
  copy_csvs(dir.path());
  spit(dir / "VERSION", "v-test\nrows table_s2.csv 61\n");
  const std::vector<fs::path> paths{dir.path()};
  const auto rep = verify_fixtures(load(paths).dataset);
  EXPECT_TRUE(std::any_of(rep.diffs.begin(), rep.diffs.end(), [](const FixtureDiff& d) {
    return d.check == "row count" && d.location == "table_s2.csv";
  }));
}

TEST(Load, AnnotationsBecomeTranslations) {
  const std::vector<fs::path> paths{testing::sample_dir() / "annotations.csv"};
  const auto d = load(paths).dataset;
  EXPECT_EQ(d.annotations.size(), 8u);
  EXPECT_EQ(d.translations.size(), 8u);
  const auto* t = d.find({"Mix", 1, "ChatGPT"});
  ASSERT_NE(t, nullptr);
  EXPECT_DOUBLE_EQ(t->tqs, 95.0);
  EXPECT_EQ(t->word_count, 120);
}

}  // namespace
}  // namespace philoscope
