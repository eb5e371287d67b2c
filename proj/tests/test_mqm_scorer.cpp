#include <gtest/gtest.h>

#include <random>
#include <fstream>
#include <sstream>

#include "philoscope/csv.hpp"
#include "philoscope/error.hpp"
#include "philoscope/mqm_scorer.hpp"
#include "test_support.hpp"

namespace philoscope {
namespace {

SeverityCounts counts(int minor, int major, int critical, int neutral = 0) {
  SeverityCounts c;
  c.neutral = neutral;
  c.minor = minor;
  c.major = major;
  c.critical = critical;
  return c;
}

TEST(Tqs, Formula) {
  EXPECT_DOUBLE_EQ(tqs(counts(0, 0, 0), 37), 100.0);
  EXPECT_DOUBLE_EQ(tqs(counts(0, 0, 1), 100), 75.0);
  EXPECT_DOUBLE_EQ(tqs(counts(4, 1, 0), 300), 97.0);
  EXPECT_DOUBLE_EQ(tqs(counts(0, 0, 0, 12), 50), 100.0);  // neutral is free
}

TEST(Tqs, ClampsAtZero) {
  // Comp 8 ChatGPT: penalty 15 + 5*2 + 25*13 = 350
  EXPECT_DOUBLE_EQ(tqs(counts(15, 2, 13), 350), 0.0);
  EXPECT_DOUBLE_EQ(tqs(counts(15, 2, 13), 200), 0.0);
  EXPECT_GT(tqs(counts(15, 2, 13), 351), 0.0);
}

TEST(Tqs, RejectsBadInput) {
  EXPECT_THROW(tqs(counts(0, 0, 0), 0), Error);
  EXPECT_THROW(tqs(counts(-1, 0, 0), 10), Error);
}

TEST(Tqs, MonotoneAndBounded) {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> n(0, 6);
  std::uniform_int_distribution<int> words(1, 400);
  for (int i = 0; i < 2000; ++i) {
    const auto c = counts(n(rng), n(rng), n(rng));
    const int w = words(rng);
    const double base = tqs(c, w);
    ASSERT_GE(base, 0.0);
    ASSERT_LE(base, 100.0);
    ASSERT_LE(tqs(counts(c.minor + 1, c.major, c.critical), w), base);
    ASSERT_LE(tqs(counts(c.minor, c.major + 1, c.critical), w), base);
    ASSERT_LE(tqs(counts(c.minor, c.major, c.critical + 1), w), base);
    ASSERT_GE(tqs(c, w + 1), base);
  }
}

TEST(Ratings, SchemeOneBoundaries) {
  EXPECT_EQ(rate_scheme1(95.0), Rating::HighPass);
  EXPECT_EQ(rate_scheme1(94.9), Rating::LowPass);
  EXPECT_EQ(rate_scheme1(87.0), Rating::LowPass);
  EXPECT_EQ(rate_scheme1(86.0), Rating::Fail);
  EXPECT_EQ(rate_scheme1(0.0), Rating::Fail);
}

TEST(Ratings, SchemeTwoGate) {
  EXPECT_EQ(rate_scheme2(88.8, 1), Rating::Fail);
  EXPECT_EQ(rate_scheme2(96.7, 0), Rating::HighPass);
  EXPECT_EQ(rate_scheme2(100.0, 1), Rating::Fail);
  for (int i = 0; i <= 1000; ++i) {
    const double t = i / 10.0;
    for (int c : {0, 1, 3}) {
      const Rating r2 = rate_scheme2(t, c);
      ASSERT_TRUE(r2 == Rating::Fail || r2 == rate_scheme1(t));
      ASSERT_EQ(r2 == Rating::Fail, c > 0 || rate_scheme1(t) == Rating::Fail);
    }
  }
}

TEST(Taxonomy, ParsingAndConsistency) {
  EXPECT_EQ(parse_rating("HP"), Rating::HighPass);
  EXPECT_EQ(parse_rating("low pass"), Rating::LowPass);
  EXPECT_EQ(parse_subtype("Term. Accuracy"), Subtype::TermAccuracy);
  EXPECT_EQ(parse_subtype("omission"), Subtype::Omission);
  EXPECT_EQ(parse_severity("CRITICAL"), Severity::Critical);
  EXPECT_THROW(parse_severity("fatal"), Error);
  EXPECT_EQ(severity_weight(Severity::Neutral), 0);
  EXPECT_EQ(severity_weight(Severity::Major), 5);
  EXPECT_EQ(severity_weight(Severity::Critical), 25);
  EXPECT_THROW(ErrorAnnotation::make(ErrorType::Accuracy, Subtype::TermConsistency, Severity::Minor),
               Error);
  for (Subtype s : kSubtypes) EXPECT_NO_THROW(ErrorAnnotation::make(error_type_of(s), s, Severity::Minor));
}

TranslationRecord record(std::string text, int passage, std::string model, int words,
                         std::vector<Severity> severities) {
  TranslationRecord r;
  r.key = {std::move(text), passage, std::move(model)};
  r.word_count = words;
  for (Severity s : severities) {
    r.annotations.push_back(ErrorAnnotation::make(ErrorType::Accuracy, Subtype::Mistranslation, s));
  }
  return r;
}

TEST(Assess, CriticalFlagAndSchemes) {
  const auto q = assess(record("Mix", 1, "A", 100, {Severity::Critical}));
  EXPECT_DOUBLE_EQ(q.tqs, 75.0);
  EXPECT_TRUE(q.has_critical);
  EXPECT_EQ(q.rating_scheme1, Rating::Fail);
  EXPECT_EQ(q.rating_scheme2, Rating::Fail);
  const auto ok = assess(record("Mix", 1, "A", 100, {Severity::Minor, Severity::Neutral}));
  EXPECT_FALSE(ok.has_critical);
  EXPECT_EQ(ok.severity_counts, counts(1, 0, 0, 1));
  EXPECT_EQ(ok.rating_scheme2, ok.rating_scheme1);
}

TEST(Stratum, ParseLabelAndRoundTrip) {
  const Stratum s = parse_stratum("Comp:8, Comp:10,Comp:3:ChatGPT,Comp:8");
  EXPECT_EQ(s.rules.size(), 3u);
  EXPECT_TRUE(s.excludes({"Comp", 8, "Claude"}));
  EXPECT_TRUE(s.excludes({"Comp", 3, "ChatGPT"}));
  EXPECT_FALSE(s.excludes({"Comp", 3, "Claude"}));
  EXPECT_FALSE(s.excludes({"Mix", 8, "Claude"}));
  EXPECT_EQ(s.label(), "excl. Comp 8, 10, ChatGPT on 3");
  EXPECT_EQ(parse_stratum(s.spec()).rules, s.rules);
  EXPECT_EQ(Stratum{}.label(), "all passages");
  EXPECT_THROW(parse_stratum("Comp:0"), Error);
  EXPECT_THROW(parse_stratum("Comp"), Error);
}

std::vector<ScoredTranslation> scored(const std::vector<TranslationRecord>& records) {
  std::vector<ScoredTranslation> out;
  for (const auto& r : records) out.push_back(score(r));
  return out;
}

TEST(Aggregate, HandComputedSmallSet) {
  const auto ts = scored({record("Mix", 1, "A", 100, {}),
                          record("Mix", 2, "A", 100, {Severity::Major}),
                          record("Comp", 1, "A", 100, {Severity::Critical}),
                          record("Comp", 2, "A", 100, {Severity::Minor})});
  const auto rep = aggregate(ts);
  const auto& mix = rep.group("Mix");
  EXPECT_DOUBLE_EQ(mix.mean_tqs, 97.5);
  // sample SD of {100, 95} = 5 / sqrt(2)
  EXPECT_NEAR(mix.sd_tqs, 3.5355339, 1e-6);
  const auto& comp = rep.group("Comp");
  EXPECT_DOUBLE_EQ(comp.mean_tqs, 87.0);
  EXPECT_EQ(comp.severity.critical, 1);
  EXPECT_DOUBLE_EQ(rep.gap("Comp").tqs_gap, -10.5);
  // Scheme-1 pass: Mix 2/2, Comp 2/2 (75 fails, 99 passes) -> Comp 1/2
  EXPECT_DOUBLE_EQ(rep.gap("Comp").pass_gap_scheme1, 50.0);
  EXPECT_EQ(rep.texts(), (std::vector<std::string>{"Mix", "Comp"}));
}

TEST(Aggregate, SingleRecordHasUndefinedSd) {
  const auto rep = aggregate(scored({record("Mix", 1, "A", 10, {})}));
  const auto& g = rep.group("Mix", "A");
  EXPECT_EQ(g.n, 1u);
  EXPECT_FALSE(g.sd_defined);
  EXPECT_EQ(g.sd_tqs, 0.0);
  EXPECT_DOUBLE_EQ(g.mean_tqs, 100.0);
}

TEST(Aggregate, EmptyFilterNamesTheFilter) {
  const auto ts = scored({record("Mix", 1, "A", 10, {})});
  try {
    aggregate(ts, parse_stratum("Mix:1"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("excl. Mix 1"), std::string::npos);
  }
}

TEST(AggregateProperties, SchemeTwoNeverAboveSchemeOne) {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> sev(0, 3);
  std::uniform_int_distribution<int> errs(0, 5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<TranslationRecord> rs;
    int criticals = 0;
    for (int p = 1; p <= 6; ++p) {
      std::vector<Severity> s(static_cast<std::size_t>(errs(rng)));
      for (auto& x : s) {
        x = kSeverities[static_cast<std::size_t>(sev(rng))];
        criticals += x == Severity::Critical;
      }
      rs.push_back(record(p % 2 ? "Mix" : "Comp", p, "M", 120, s));
    }
    const auto rep = aggregate(scored(rs));
    int total_critical = 0;
    for (const auto& g : rep.groups) {
      ASSERT_LE(g.scheme2.pass_rate(), g.scheme1.pass_rate());
      if (g.is_aggregate()) total_critical += g.severity.critical;
    }
    ASSERT_EQ(total_critical, criticals);
  }
}

TEST(Aggregate, FixtureTotals) {
  const auto& d = testing::fixtures();
  const auto rep = aggregate(d.translations);
  EXPECT_EQ(rep.group("Mix").severity.critical, 5);
  EXPECT_EQ(rep.group("Comp").severity.critical, 57);
  const auto typ = severity_typology(d.translations);
  EXPECT_EQ(typ.find("Mix")->total(), 170);
  EXPECT_EQ(typ.find("Comp")->total(), 265);
}

TEST(PassageQuality, MeanOverModels) {
  const auto pq = passage_quality(scored({record("Comp", 1, "A", 100, {Severity::Critical}),
                                          record("Comp", 1, "B", 100, {})}));
  ASSERT_EQ(pq.size(), 1u);
  EXPECT_DOUBLE_EQ(pq[0].mean_tqs, 87.5);
  EXPECT_EQ(pq[0].critical, 1);
  EXPECT_EQ(pq[0].translations, 2u);
}

TEST(Typology, CountsByTypeAndSubtype) {
  TranslationRecord r = record("Mix", 1, "A", 100, {});
  r.annotations.push_back(ErrorAnnotation::make(ErrorType::Terminology, Subtype::TermAccuracy, Severity::Major));
  r.annotations.push_back(ErrorAnnotation::make(ErrorType::Accuracy, Subtype::Omission, Severity::Minor));
  r.annotations.push_back(ErrorAnnotation::make(ErrorType::Accuracy, Subtype::Omission, Severity::Neutral));
  const auto typ = error_typology(std::vector<TranslationRecord>{r});
  const auto* mix = typ.find("Mix");
  ASSERT_NE(mix, nullptr);
  EXPECT_TRUE(mix->has_types);
  EXPECT_EQ(mix->total(), 3);
  EXPECT_EQ(mix->types.at(ErrorType::Terminology), 1);
  EXPECT_EQ(mix->types.at(ErrorType::Accuracy), 2);
  EXPECT_EQ(mix->subtypes.at(Subtype::Omission), 2);
  EXPECT_EQ(mix->subtypes.at(Subtype::Addition), 0);
  int by_severity = 0;
  for (Severity s : kSeverities) by_severity += mix->severity.get(s);
  EXPECT_EQ(by_severity, mix->total());
}

TEST(Typology, EmptyRecordSetIsAllZero) {
  const auto typ = error_typology(std::vector<TranslationRecord>{});
  EXPECT_EQ(typ.total_errors(), 0);
}

TEST(Typology, ShareRatioUsesDisplayedPercentages) {
  // Comp critical 57/265 = 21.5%, Mix 5/170 = 2.9%; 21.5 / 2.9 = 7.41
  const auto r = share_ratio(57, 265, 5, 170);
  ASSERT_TRUE(r.has_value());
  EXPECT_NEAR(*r, 21.5 / 2.9, 1e-12);
  EXPECT_FALSE(share_ratio(3, 10, 0, 10).has_value());
}

TEST(AnnotationFile, RoundTripAndValidation) {
  std::ifstream in(testing::sample_dir() / "annotations.csv");
  const auto table = csv::read(in, "annotations.csv");
  const auto records = read_annotations(table);
  ASSERT_EQ(records.size(), 8u);
  std::ostringstream out;
  write_annotations(out, records);
  std::istringstream back(out.str());
  EXPECT_EQ(read_annotations(csv::read(back, "rt")), records);

  auto parse = [](const std::string& text) {
    std::istringstream s(text);
    return read_annotations(csv::read(s, "a.csv"));
  };
  const std::string header = "text,passage,model,word_count,error_type,subtype,severity,note\n";
  EXPECT_THROW(parse(header + "Mix,1,A,0,,,,\n"), Error);
  EXPECT_THROW(parse(header + "Mix,1,A,10,Accuracy,Term accuracy,Minor,\n"), Error);
  EXPECT_THROW(parse(header + "Mix,1,A,10,,,,\nMix,1,A,12,,,,\n"), Error);
}

TEST(SeverityFile, RoundTrip) {
  const auto& d = testing::fixtures();
  std::ostringstream out;
  write_severity_fixture(out, d.translations);
  std::istringstream in(out.str());
  const auto back = read_severity_fixture(csv::read(in, "rt"));
  EXPECT_EQ(back, d.translations);
}

}  // namespace
}  // namespace philoscope
