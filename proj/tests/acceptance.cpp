// Acceptance gate: one PASS/FAIL line per criterion. Tolerances are pinned
// below; published values are the oracle and are written out literally.
//
// Exit status is 0 when every failing clause is a documented unattainable
// one (still reported as FAIL); any other failure exits 1.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "philoscope/dataset.hpp"
#include "philoscope/error.hpp"
#include "philoscope/lexical_metrics.hpp"
#include "philoscope/mqm_scorer.hpp"
#include "philoscope/numeric_format.hpp"
#include "philoscope/stats_engine.hpp"
#include "test_support.hpp"

namespace ps = philoscope;

namespace {

struct Check {
  bool ok = true;
  bool undocumented = false;
  std::vector<std::string> failures;
  std::vector<std::string> notes;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      undocumented = true;
      failures.push_back(what);
    }
  }
  // Known unattainable: fails the criterion but not the gate.
  void expect_documented(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      failures.push_back(what + " [documented]");
    }
  }
  void near(double got, double want, double tol, const std::string& what) {
    const bool good = std::isfinite(got) && std::abs(got - want) <= tol + 1e-12;
    std::ostringstream s;
    s << what << ": got " << got << ", want " << want << " +/- " << tol;
    expect(good, s.str());
  }
  void equal(const std::string& got, const std::string& want, const std::string& what) {
    expect(got == want, what + ": got " + got + ", want " + want);
  }
  void note(const std::string& text) { notes.push_back(text); }
};

struct Criterion {
  std::string id;
  std::string title;
  std::function<void(Check&)> body;
};

const ps::Dataset& data() { return ps::testing::fixtures(); }

// ---------------------------------------------------------------- A1

void a1(Check& c) {
  int checked = 0;
  for (const auto& t : data().translations) {
    ++checked;
    const std::string key = ps::to_string(t.key);
    if (!t.stored_rating) {
      c.expect(false, key + ": no stored rating");
      continue;
    }
    if (t.scheme1() != *t.stored_rating && !data().known(t.key, "rating")) {
      c.expect(false, key + ": scheme 1 " + std::string(ps::to_string(t.scheme1())) + " vs stored " +
                          std::string(ps::to_string(*t.stored_rating)));
    }
    const bool gate_fail = t.counts.critical >= 1 || ps::rate_scheme1(t.tqs) == ps::Rating::Fail;
    c.expect((t.scheme2() == ps::Rating::Fail) == gate_fail, key + ": scheme 2 gating");
    c.expect(t.scheme2() == ps::Rating::Fail || t.scheme2() == t.scheme1(), key + ": scheme 2 consistency");
  }
  c.expect(checked == 60, "expected 60 rows, found " + std::to_string(checked));
  c.note(std::to_string(checked) + " rows");
}

// ---------------------------------------------------------------- A2

void a2(Check& c) {
  const auto rep = ps::aggregate(data().translations);
  struct Row {
    const char* text;
    const char* model;
    double mean;
    double sd;
    int critical;
  };
  // Table 2
  const Row rows[] = {
      {"Mix", "ChatGPT", 92.3, 6.6, 4}, {"Mix", "Claude", 96.2, 2.3, 0}, {"Mix", "Gemini", 97.1, 3.3, 1},
      {"Mix", "", 95.2, 4.8, 5},         {"Comp", "ChatGPT", 74.9, 32.7, 24},
      {"Comp", "Claude", 81.2, 24.5, 18}, {"Comp", "Gemini", 83.4, 22.5, 15}, {"Comp", "", 79.9, 26.2, 57},
  };
  for (const auto& r : rows) {
    const auto& g = rep.group(r.text, r.model);
    const std::string where = std::string(r.text) + "/" + (*r.model ? r.model : "Aggregate");
    c.near(g.mean_tqs, r.mean, 0.05, where + " mean");
    c.near(g.sd_tqs, r.sd, 0.1, where + " SD");
    c.expect(g.severity.critical == r.critical,
             where + " critical " + std::to_string(g.severity.critical) + " vs " + std::to_string(r.critical));
  }
}

// ---------------------------------------------------------------- A3

void a3(Check& c) {
  const auto all = ps::aggregate(data().translations);
  const auto ex_8_10 = ps::aggregate(data().translations, ps::parse_stratum("Comp:8,Comp:10"));
  c.near(ex_8_10.group("Comp").mean_tqs, 91.4, 0.05, "Comp excl. 8, 10 mean");
  c.near(ex_8_10.gap("Comp").tqs_gap, -3.8, 0.1, "Comp excl. 8, 10 gap");
  const auto ex_3_8_10 = ps::aggregate(data().translations, ps::parse_stratum("Comp:3,Comp:8,Comp:10"));
  c.near(ex_3_8_10.group("Comp").mean_tqs, 93.1, 0.05, "Comp excl. 3, 8, 10 mean");
  const auto ex_gpt3 = ps::aggregate(data().translations, ps::parse_stratum("Comp:8,Comp:10,Comp:3:ChatGPT"));
  c.near(ex_gpt3.group("Comp").mean_tqs, 92.5, 0.05, "Comp excl. 8, 10, ChatGPT on 3 mean");
  c.near(all.group("Mix").mean_tqs, 95.2, 0.05, "Mix baseline mean");
}

// ---------------------------------------------------------------- A4

std::string pct(const ps::RatingTally& t, ps::Rating r) { return ps::format_percent(t.count(r), t.total()); }

void a4(Check& c) {
  const auto rep = ps::aggregate(data().translations);
  struct Row {
    const char* text;
    const char* model;
    const char* s1[3];
    const char* s2[3];
  };
  // Table 5 (whole-number cells have n = 10, so ".0" is exact)
  const Row rows[] = {
      {"Mix", "Claude", {"70.0", "30.0", "0.0"}, {"70.0", "30.0", "0.0"}},
      {"Mix", "Gemini", {"80.0", "20.0", "0.0"}, {"80.0", "10.0", "10.0"}},
      {"Mix", "ChatGPT", {"50.0", "40.0", "10.0"}, {"50.0", "20.0", "30.0"}},
      {"Mix", "", {"66.7", "30.0", "3.3"}, {"66.7", "20.0", "13.3"}},
      {"Comp", "Claude", {"20.0", "50.0", "30.0"}, {"20.0", "20.0", "60.0"}},
      {"Comp", "Gemini", {"30.0", "40.0", "30.0"}, {"30.0", "20.0", "50.0"}},
      {"Comp", "ChatGPT", {"40.0", "10.0", "50.0"}, {"40.0", "0.0", "60.0"}},
      {"Comp", "", {"30.0", "33.3", "36.7"}, {"30.0", "13.3", "56.7"}},
  };
  const ps::Rating order[] = {ps::Rating::HighPass, ps::Rating::LowPass, ps::Rating::Fail};
  for (const auto& r : rows) {
    const auto& g = rep.group(r.text, r.model);
    const std::string where = std::string(r.text) + "/" + (*r.model ? r.model : "Aggregate");
    for (int i = 0; i < 3; ++i) {
      const std::string rating(ps::to_string(order[i]));
      c.equal(pct(g.scheme1, order[i]), r.s1[i], where + " S1 " + rating);
      c.equal(pct(g.scheme2, order[i]), r.s2[i], where + " S2 " + rating);
    }
  }
  // Table S4
  struct Strat {
    const char* spec;
    const char* s1;
    const char* s2;
    const char* gap1;
    const char* gap2;
  };
  const Strat strata[] = {
      {"", "63.3", "43.3", "33.3", "43.3"},
      {"Comp:8,Comp:10", "79.2", "54.2", "17.5", "32.5"},
      {"Comp:3,Comp:8,Comp:10", "85.7", "61.9", "11.0", "24.8"},
  };
  for (const auto& s : strata) {
    const ps::Stratum st = *s.spec ? ps::parse_stratum(s.spec) : ps::Stratum{};
    const auto a = ps::aggregate(data().translations, st);
    const auto& mix = a.group("Mix");
    const auto& comp = a.group("Comp");
    c.equal(pct(mix.scheme1, ps::Rating::Fail), "3.3", "Mix stays all passages (" + st.label() + ")");
    c.equal(ps::format_fixed(comp.scheme1.pass_rate(), 1), s.s1, "Comp S1 pass (" + st.label() + ")");
    c.equal(ps::format_fixed(comp.scheme2.pass_rate(), 1), s.s2, "Comp S2 pass (" + st.label() + ")");
    c.equal(ps::format_fixed(a.gap("Comp").pass_gap_scheme1, 1), s.gap1, "S1 gap (" + st.label() + ")");
    c.equal(ps::format_fixed(a.gap("Comp").pass_gap_scheme2, 1), s.gap2, "S2 gap (" + st.label() + ")");
  }
}

// ---------------------------------------------------------------- A5

void a5(Check& c) {
  const auto typ = ps::severity_typology(data().translations);
  struct Row {
    const char* text;
    int counts[4];
    const char* pcts[4];
    int total;
  };
  // Table 6 severity block
  const Row rows[] = {
      {"Mix", {29, 103, 33, 5}, {"17.1", "60.6", "19.4", "2.9"}, 170},
      {"Comp", {45, 105, 58, 57}, {"17.0", "39.6", "21.9", "21.5"}, 265},
  };
  for (const auto& r : rows) {
    const auto* t = typ.find(r.text);
    if (!t) {
      c.expect(false, std::string(r.text) + " missing");
      continue;
    }
    c.expect(t->total() == r.total, std::string(r.text) + " total " + std::to_string(t->total()));
    for (std::size_t i = 0; i < 4; ++i) {
      const auto sev = ps::kSeverities[i];
      const std::string where = std::string(r.text) + " " + std::string(ps::to_string(sev));
      c.expect(t->severity.get(sev) == r.counts[i], where + " count " + std::to_string(t->severity.get(sev)));
      c.equal(ps::format_percent(t->severity.get(sev), t->total()), r.pcts[i], where + " %");
    }
  }
  const auto ratio = ps::share_ratio(57, 265, 5, 170);
  c.expect(ratio.has_value(), "critical ratio undefined");
  if (ratio) c.equal(ps::format_fixed(*ratio, 1), "7.4", "critical share ratio");
  c.note("type/subtype rows are schema-tested only");
}

// ---------------------------------------------------------------- A6

ps::PairedSeries metric_series(ps::Metric metric, const std::string& text) {
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& m : data().metric_scores) {
    if (m.score.metric != metric || m.score.reference_id) continue;
    if (!text.empty() && m.key.text != text) continue;
    const auto* t = data().find(m.key);
    if (!t) continue;
    x.push_back(m.score.value);
    y.push_back(t->tqs);
  }
  return ps::PairedSeries::make(std::move(x), std::move(y));
}

void a6(Check& c) {
  struct T4 {
    ps::Metric metric;
    double r, lo, hi, rho, rlo, rhi;
  };
  // Table 4
  const T4 t4[] = {
      {ps::Metric::BERTScore, 0.75, 0.62, 0.85, 0.43, 0.20, 0.62},
      {ps::Metric::COMET, 0.60, 0.41, 0.74, 0.51, 0.30, 0.68},
      {ps::Metric::BLEU4, 0.45, 0.22, 0.63, 0.42, 0.18, 0.61},
  };
  for (const auto& row : t4) {
    const std::string name(ps::to_string(row.metric));
    const auto s = metric_series(row.metric, "");
    c.expect(s.size() == 60, name + " joins " + std::to_string(s.size()) + " translations");
    const auto p = ps::pearson(s);
    const auto sp = ps::spearman(s);
    c.near(p.r, row.r, 0.02, name + " Pearson r");
    c.near(p.ci->low, row.lo, 0.02, name + " Pearson CI low");
    c.near(p.ci->high, row.hi, 0.02, name + " Pearson CI high");
    c.near(sp.r, row.rho, 0.02, name + " Spearman rho");
    c.near(sp.ci->low, row.rlo, 0.02, name + " Spearman CI low");
    c.near(sp.ci->high, row.rhi, 0.02, name + " Spearman CI high");
  }
  struct T8 {
    ps::Metric metric;
    double mix, comp;
  };
  // Table 8
  const T8 t8[] = {
      {ps::Metric::BERTScore, -0.10, 0.85},
      {ps::Metric::COMET, -0.07, 0.62},
      {ps::Metric::BLEU4, -0.08, 0.42},
  };
  for (const auto& row : t8) {
    const std::string name(ps::to_string(row.metric));
    c.near(ps::pearson(metric_series(row.metric, "Mix")).r, row.mix, 0.02, name + " Mix r");
    c.near(ps::pearson(metric_series(row.metric, "Comp")).r, row.comp, 0.02, name + " Comp r");
  }
  std::vector<std::string> missing;
  for (ps::Metric m : ps::kMetrics) {
    const bool present = std::any_of(data().metric_scores.begin(), data().metric_scores.end(),
                                     [&](const auto& s) { return s.score.metric == m; });
    if (!present) missing.emplace_back(ps::to_string(m));
  }
  std::string list;
  for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
  c.note("not reproducible (no per-translation values): " + list);
}

// ---------------------------------------------------------------- A7

struct PassagePoint {
  std::string text;
  int passage;
  double rare_ratio;
  double nf_ratio;
  double avg_zipf;
  double tqs;
};

std::vector<PassagePoint> passage_points() {
  const auto pq = ps::passage_quality(data().translations);
  std::vector<PassagePoint> out;
  for (const auto& p : data().passage_profiles()) {
    for (const auto& q : pq) {
      if (q.text == p.text_id && std::to_string(q.passage) == p.passage_id) {
        out.push_back({p.text_id, q.passage, p.rare_ratio, p.nf_ratio, p.avg_zipf, q.mean_tqs});
      }
    }
  }
  return out;
}

ps::PairedSeries series_of(const std::vector<PassagePoint>& pts, const std::string& text,
                           double PassagePoint::*predictor) {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<std::string> labels;
  for (const auto& p : pts) {
    if (!text.empty() && p.text != text) continue;
    x.push_back(p.*predictor);
    y.push_back(p.tqs);
    labels.push_back(p.text + ":" + std::to_string(p.passage));
  }
  return ps::PairedSeries::make(std::move(x), std::move(y), std::move(labels));
}

void a7(Check& c) {
  const auto pts = passage_points();
  c.expect(pts.size() == 20, "expected 20 passages, found " + std::to_string(pts.size()));
  const auto comp = series_of(pts, "Comp", &PassagePoint::rare_ratio);
  ps::BootstrapOptions boot;
  boot.resamples = 10000;
  boot.seed = 42;
  const auto fit = ps::simple_regression(comp, boot);
  c.near(fit.correlation.r, -0.97, 0.01, "Comp r");
  c.near(fit.r_squared, 0.94, 0.01, "Comp R^2");
  c.near(fit.influence_threshold, 0.40, 1e-12, "Cook's D threshold");
  std::map<std::string, double> cooks;
  for (std::size_t i = 0; i < comp.size(); ++i) cooks[comp.labels[i]] = fit.cooks_d[i];
  c.near(cooks["Comp:8"], 1.50, 0.02, "Cook's D passage 8");
  c.near(cooks["Comp:10"], 2.03, 0.02, "Cook's D passage 10");
  std::set<std::string> flagged;
  std::string flagged_list;
  for (std::size_t i : fit.influential()) {
    flagged.insert(comp.labels[i]);
    flagged_list += " " + comp.labels[i];
  }
  c.expect(flagged == std::set<std::string>{"Comp:8", "Comp:10"}, "influential set:" + flagged_list);

  const auto reduced = comp.without(fit.influential());
  const auto rfit = ps::simple_regression(reduced);
  c.near(rfit.correlation.r, -0.71, 0.02, "excl. 8, 10 r");
  c.near(rfit.correlation.p, 0.051, 0.005, "excl. 8, 10 p");
  c.near(rfit.r_squared, 0.50, 0.02, "excl. 8, 10 R^2");
  c.near(ps::spearman(comp).r, -0.88, 0.02, "Comp Spearman rho");

  // Table 7 "All" column
  c.near(ps::pearson(series_of(pts, "", &PassagePoint::rare_ratio)).r, -0.93, 0.02, "All rare ratio r");
  c.near(ps::pearson(series_of(pts, "", &PassagePoint::nf_ratio)).r, -0.94, 0.02, "All NF ratio r");
  c.near(ps::pearson(series_of(pts, "", &PassagePoint::avg_zipf)).r, 0.95, 0.02, "All avg Zipf r");

  if (!fit.bootstrap_ci) {
    c.expect(false, "no bootstrap CI");
  } else {
    c.near(fit.bootstrap_ci->low, 0.42, 0.05, "bootstrap CI low");
    c.near(fit.bootstrap_ci->high, 0.99, 0.05, "bootstrap CI high");
    c.note("bootstrap B=10000 seed=42: [" + ps::format_fixed(fit.bootstrap_ci->low, 3) + ", " +
           ps::format_fixed(fit.bootstrap_ci->high, 3) + "]");
  }
}

// ---------------------------------------------------------------- A8

void a8(Check& c) {
  const auto pts = passage_points();
  int low = 0;
  for (const auto& p : pts) {
    const auto risk = ps::risk_flag(p.rare_ratio);
    const std::string where = p.text + ":" + std::to_string(p.passage);
    if (risk == ps::Risk::Low) {
      ++low;
      c.expect(ps::rate_scheme1(p.tqs) != ps::Rating::Fail, where + " Low risk but mean TQS fails");
    }
    const bool should_be_critical = p.text == "Comp" && (p.passage == 8 || p.passage == 10);
    c.expect((risk == ps::Risk::Critical) == should_be_critical, where + " critical flag");
    if (should_be_critical) c.expect(p.tqs < 66.0, where + " mean TQS " + ps::format_fixed(p.tqs, 1));
  }
  c.note(std::to_string(low) + " Low-risk passages");
}

// ---------------------------------------------------------------- A9

std::string random_sentence(std::mt19937_64& rng, std::size_t min_len, std::size_t max_len,
                            std::size_t vocab) {
  static const char* words[] = {"the", "soul", "body", "form", "λόγος", "ψυχή", "is", "of", "first", "nature"};
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, std::min<std::size_t>(vocab, 10) - 1);
  std::string s;
  const std::size_t n = len(rng);
  for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + std::string(words[pick(rng)]);
  return s;
}

std::size_t lcs_brute(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::size_t best = 0;
  for (unsigned mask = 0; mask < (1U << a.size()); ++mask) {
    std::size_t j = 0;
    std::size_t len = 0;
    bool ok = true;
    for (std::size_t i = 0; i < a.size() && ok; ++i) {
      if (!(mask & (1U << i))) continue;
      while (j < b.size() && b[j] != a[i]) ++j;
      ok = j < b.size();
      if (ok) {
        ++j;
        ++len;
      }
    }
    if (ok) best = std::max(best, len);
  }
  return best;
}

void a9(Check& c) {
  std::mt19937_64 rng(2024);
  int identity_bad = 0;
  int range_bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto s = ps::Segment::from_text(random_sentence(rng, 4, 20, 10));
    const std::vector<ps::Segment> refs{s};
    identity_bad += ps::bleu4(s, refs) != 1.0;
    identity_bad += ps::chrf_pp(s, refs) != 1.0;
    identity_bad += ps::rouge_l(s, refs) != 1.0;
  }
  c.expect(identity_bad == 0, std::to_string(identity_bad) + " identity cases not 1.0");

  int lcs_bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto a = ps::tokenize(random_sentence(rng, 0, 8, 4));
    const auto b = ps::tokenize(random_sentence(rng, 0, 8, 4));
    lcs_bad += ps::lcs_length(a, b) != lcs_brute(a, b);
  }
  c.expect(lcs_bad == 0, std::to_string(lcs_bad) + " LCS mismatches");

  int multi_bad = 0;
  for (int i = 0; i < 1000; ++i) {
    std::uniform_int_distribution<std::size_t> len(4, 15);
    const std::size_t ref_len = len(rng);
    const auto h = ps::Segment::from_text(random_sentence(rng, 4, 15, 5));
    std::vector<ps::Segment> refs;
    for (int k = 0; k < 3; ++k) refs.push_back(ps::Segment::from_text(random_sentence(rng, ref_len, ref_len, 5)));
    for (auto sm : {ps::BleuSmoothing::None, ps::BleuSmoothing::AddOne}) {
      const double multi = ps::bleu4(h, refs, sm);
      for (const auto& r : refs) {
        const std::vector<ps::Segment> one{r};
        const double single = ps::bleu4(h, one, sm);
        multi_bad += multi < single - 1e-15;
        range_bad += single < 0.0 || single > 1.0;
        range_bad += ps::chrf_pp(h, r) < 0.0 || ps::chrf_pp(h, r) > 1.0;
        range_bad += ps::rouge_l_single(h, r).f1 < 0.0 || ps::rouge_l_single(h, r).f1 > 1.0;
      }
      range_bad += multi < 0.0 || multi > 1.0;
    }
  }
  c.expect(multi_bad == 0, std::to_string(multi_bad) + " multi-reference BLEU below a single reference");
  c.expect(range_bad == 0, std::to_string(range_bad) + " scores outside [0,1]");
}

// ---------------------------------------------------------------- A10

ps::PairedSeries random_series(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> coupling(-1.5, 1.5);
  const double k = coupling(rng);
  std::vector<double> x(n);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = z(rng);
    y[i] = k * x[i] + z(rng);
  }
  return ps::PairedSeries::make(std::move(x), std::move(y));
}

void a10(Check& c) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  std::uniform_real_distribution<double> shift(-100.0, 100.0);
  double worst_affine = 0;
  double worst_monotone = 0;
  double worst_r2 = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto s = random_series(rng, 5 + rng() % 40);
    const double a = scale(rng);
    const double b = shift(rng);
    std::vector<double> x2 = s.x;
    std::vector<double> y2 = s.y;
    for (auto& v : x2) v = a * v + b;
    for (auto& v : y2) v = std::exp(v / 2) + v;  // strictly increasing
    const auto affine = ps::PairedSeries::make(x2, s.y);
    worst_affine = std::max(worst_affine, std::abs(ps::pearson(affine).r - ps::pearson(s).r));
    const auto mono = ps::PairedSeries::make(x2, y2);
    worst_monotone = std::max(worst_monotone, std::abs(ps::spearman(mono).r - ps::spearman(s).r));
    const double r = ps::pearson(s).r;
    worst_r2 = std::max(worst_r2, std::abs(ps::simple_regression(s).r_squared - r * r));
  }
  c.expect(worst_affine < 1e-9, "Pearson affine |dr| " + ps::format_exact(worst_affine));
  c.expect(worst_monotone < 1e-9, "Spearman monotone |dr| " + ps::format_exact(worst_monotone));
  c.expect(worst_r2 < 1e-10, "R^2 vs r^2 " + ps::format_exact(worst_r2));

  const auto s = random_series(rng, 10);
  ps::BootstrapOptions o;
  o.resamples = 5000;
  o.seed = 7;
  o.threads = 1;
  const auto first = ps::bootstrap_r_squared(s, o);
  o.threads = 0;
  const auto second = ps::bootstrap_r_squared(s, o);
  c.expect(first == second, "bootstrap not bit-reproducible");

  double worst_p = 0;
  double sum_p = 0;
  int outside = 0;
  for (int i = 0; i < 200; ++i) {
    const auto series = random_series(rng, 8);
    const double diff = std::abs(ps::pearson(series).p -
                                 ps::exact_permutation_p(series, ps::CorrelationKind::Pearson));
    worst_p = std::max(worst_p, diff);
    sum_p += diff;
    outside += diff > 0.02;
  }
  c.expect_documented(outside == 0, std::to_string(outside) + "/200 series with |p_t - p_perm| > 0.02 (max " +
                             ps::format_fixed(worst_p, 4) + ")");
  c.note("n=8 |p_t - p_perm|: mean " + ps::format_fixed(sum_p / 200, 4) + ", max " + ps::format_fixed(worst_p, 4));
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"A1", "TQS formula and ratings", a1},
      {"A2", "aggregate TQS means, SDs and critical totals", a2},
      {"A3", "stratified means", a3},
      {"A4", "pass-rate percentages and stratified gaps", a4},
      {"A5", "severity counts and within-text shares", a5},
      {"A6", "metric correlations overall and by text", a6},
      {"A7", "rarity regression and influence diagnostics", a7},
      {"A8", "risk flag against passage quality", a8},
      {"A9", "native metric properties", a9},
      {"A10", "statistics properties", a10},
  };
  int passed = 0;
  std::vector<std::string> unexpected;
  std::vector<std::string> documented;
  for (const auto& cr : criteria) {
    Check check;
    try {
      cr.body(check);
    } catch (const std::exception& e) {
      check.expect(false, std::string("exception: ") + e.what());
    }
    std::cout << (check.ok ? "PASS " : "FAIL ") << cr.id << "  " << cr.title;
    for (const auto& n : check.notes) std::cout << " | " << n;
    std::cout << '\n';
    for (const auto& f : check.failures) std::cout << "       - " << f << '\n';
    if (check.ok) {
      ++passed;
    } else if (check.undocumented) {
      unexpected.push_back(cr.id);
    } else {
      documented.push_back(cr.id);
    }
  }
  std::cout << "acceptance: " << passed << "/" << criteria.size() << " PASS";
  if (!documented.empty()) {
    std::cout << "; documented FAIL:";
    for (const auto& id : documented) std::cout << ' ' << id;
  }
  if (!unexpected.empty()) {
    std::cout << "; unexpected FAIL:";
    for (const auto& id : unexpected) std::cout << ' ' << id;
  }
  std::cout << '\n';
  return unexpected.empty() ? 0 : 1;
}
