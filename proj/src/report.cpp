#include "philoscope/report.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "philoscope/csv.hpp"
#include "philoscope/error.hpp"
#include "philoscope/numeric_format.hpp"
#include "philoscope/stats_engine.hpp"

namespace philoscope::report {
namespace {

constexpr const char* kDash = "n/a";

Cell label(std::string text) { return Cell{std::move(text), {}}; }
Cell value(std::string text, std::string explain) { return Cell{std::move(text), std::move(explain)}; }

std::string model_name(const std::string& model) { return model.empty() ? "Aggregate" : model; }

std::string pct(long long k, long long n) { return format_percent(k, n) + "%"; }

std::string signed_bound(double v) {
  const std::string body = format_bound(std::abs(v));
  if (round_half_up(std::abs(v), 2) == 0.0) return v < 0 ? "-" + body : "+" + body;
  return (v < 0 ? "-" : "+") + body;
}

std::string describe(const CorrelationResult& c) {
  std::ostringstream out;
  out << to_string(c.kind) << " r=" << format_exact(c.r) << ", n=" << c.n
      << ", p=" << format_exact(c.p) << " (Student t, df=" << c.n - 2 << ")";
  if (c.ci) {
    out << ", 95% CI=[" << format_exact(c.ci->low) << ", " << format_exact(c.ci->high)
        << "] (Fisher z" << (c.ci_approximate ? ", approximate for ranks" : "") << ")";
  }
  return out.str();
}

std::string describe_inputs(std::span<const std::string> labels, std::span<const double> values) {
  std::string out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out += (i ? "; " : "") + labels[i] + "=" + format_exact(values[i]);
  }
  return out;
}

class Builder {
 public:
  Builder(const Spec& spec, const Dataset& d) : spec_(spec), d_(d) {
    for (const auto& s : spec.strata) {
      if (!s.empty()) strata_.push_back(s);
    }
    for (const auto& t : d.texts()) {
      if (t != spec.baseline_text) others_.push_back(t);
    }
  }

  std::vector<Table> build(const std::string& id) {
    if (id == "T1") return {t1()};
    if (id == "T2") return {t2()};
    if (id == "T3") return {t3()};
    if (id == "T4") return {t4()};
    if (id == "T5") return {t5()};
    if (id == "T6") return {t6()};
    if (id == "T7") return t7();
    if (id == "T8") return {t8()};
    if (id == "S3") return {s3()};
    if (id == "S4") return {s4()};
    if (id == "S5") return {s5()};
    if (id == "S6") return {s6()};
    throw Error("unknown table '" + id + "'");
  }

 private:
  const Spec& spec_;
  const Dataset& d_;
  std::vector<Stratum> strata_;
  std::vector<std::string> others_;

  void need_translations(const std::string& id) const {
    if (d_.translations.empty()) throw Error(id + " needs MQM translation scores (severity or annotation file)");
  }

  void need_baseline(const std::string& id) const {
    need_translations(id);
    const auto texts = d_.texts();
    if (std::find(texts.begin(), texts.end(), spec_.baseline_text) == texts.end()) {
      throw Error(id + " needs translations of the baseline text '" + spec_.baseline_text + "'");
    }
  }

  // Multi-reference metric values per metric, joined to translations.
  std::map<Metric, std::vector<std::pair<const ScoredTranslation*, double>>> metric_values() const {
    std::map<Metric, std::vector<std::pair<const ScoredTranslation*, double>>> out;
    for (const auto& s : d_.metric_scores) {
      if (s.score.reference_id) continue;
      if (const auto* t = d_.find(s.key)) out[s.score.metric].emplace_back(t, s.score.value);
    }
    return out;
  }

  std::vector<Metric> present_metrics(const std::string& id) const {
    const auto values = metric_values();
    std::vector<Metric> out;
    for (Metric m : kMetrics) {
      if (values.count(m)) out.push_back(m);
    }
    if (out.empty()) throw Error(id + " needs automated metric scores (metric table or long metric file)");
    return out;
  }

  std::string missing_metrics_note(const std::vector<Metric>& present) const {
    std::string missing;
    for (Metric m : kMetrics) {
      if (std::find(present.begin(), present.end(), m) == present.end()) {
        missing += (missing.empty() ? "" : ", ") + std::string(to_string(m));
      }
    }
    if (missing.empty()) return {};
    return "Not computed (no per-translation scores loaded): " + missing + ".";
  }

  std::string stratum_row(const std::string& text, const Stratum& s) const {
    return text + " (" + (s.empty() ? std::string("all passages") : s.label()) + ")";
  }

  // ------------------------------------------------------------ T1

  Table t1() {
    need_translations("T1");
    const auto metrics = present_metrics("T1");
    const auto values = metric_values();
    Table t{"T1", "Aggregate automated metric scores", {"Text", "Model"}, {}, {}};
    for (Metric m : metrics) t.columns.emplace_back(to_string(m));

    const AggregateReport agg = aggregate(d_.translations, {}, spec_.baseline_text);
    for (const auto& g : agg.groups) {
      std::vector<Cell> row{label(g.text), label(model_name(g.model))};
      for (Metric m : metrics) {
        std::vector<double> v;
        std::vector<std::string> ids;
        for (const auto& [tr, x] : values.at(m)) {
          if (tr->key.text == g.text && (g.model.empty() || tr->key.model == g.model)) {
            v.push_back(x);
            ids.push_back(to_string(tr->key));
          }
        }
        if (v.empty()) {
          row.push_back(label(kDash));
          continue;
        }
        const double mu = mean(v) * 100.0;
        const double sd = v.size() > 1 ? sample_sd(v) * 100.0 : 0.0;
        row.push_back(value(format_fixed(mu, 1) + " (± " + format_fixed(sd, 1) + ")",
                            "mean and sample SD x 100 of " + std::string(to_string(m)) + " over " +
                                std::to_string(v.size()) + " translations: mean=" +
                                format_exact(mu) + ", sd=" + format_exact(sd) + "; inputs " +
                                describe_inputs(ids, v)));
      }
      t.rows.push_back(std::move(row));
    }
    t.notes.push_back("Scores are mean (± sample SD) x 100 of multi-reference values.");
    if (auto note = missing_metrics_note(metrics); !note.empty()) t.notes.push_back(note);
    return t;
  }

  // ------------------------------------------------------------ T2

  Table t2() {
    need_translations("T2");
    const AggregateReport agg = aggregate(d_.translations, {}, spec_.baseline_text);
    Table t{"T2", "Aggregate MQM translation quality scores",
            {"Text", "Model", "TQS Mean", "TQS SD", "Critical Errors"}, {}, {}};
    for (const auto& g : agg.groups) {
      const std::string scope = "aggregate(all passages).group(" + g.text + ", " + model_name(g.model) + ")";
      t.rows.push_back(
          {label(g.text), label(model_name(g.model)),
           value(format_fixed(g.mean_tqs, 1), scope + ".mean_tqs = " + format_exact(g.mean_tqs) +
                                                  " over n=" + std::to_string(g.n)),
           value(g.sd_defined ? format_fixed(g.sd_tqs, 1) : kDash,
                 scope + ".sd_tqs (sample, n-1) = " + format_exact(g.sd_tqs)),
           value(std::to_string(g.severity.critical),
                 scope + ".severity.critical: sum of critical counts over n=" + std::to_string(g.n))});
    }
    t.notes.push_back("TQS = 100 - 100 (minor + 5 major + 25 critical) / words, floored at 0. SD is the sample SD.");
    return t;
  }

  // ------------------------------------------------------------ T3

  Table t3() {
    need_baseline("T3");
    Table t{"T3", "MQM translation quality scores stratified by passage exclusion",
            {"Stratification", "Mean TQS", "SD", "Gap vs " + spec_.baseline_text}, {}, {}};
    std::vector<Stratum> all{Stratum{}};
    all.insert(all.end(), strata_.begin(), strata_.end());
    bool first = true;
    for (const auto& s : all) {
      const AggregateReport agg = aggregate(d_.translations, s, spec_.baseline_text);
      const std::string op = "aggregate(" + (s.empty() ? std::string("all passages") : s.label()) + ")";
      if (first) {
        const auto& b = agg.group(spec_.baseline_text);
        t.rows.push_back({label(stratum_row(spec_.baseline_text, s)),
                          value(format_fixed(b.mean_tqs, 1), op + ".group(" + b.text + ").mean_tqs = " + format_exact(b.mean_tqs)),
                          value(format_fixed(b.sd_tqs, 1), op + ".group(" + b.text + ").sd_tqs = " + format_exact(b.sd_tqs)),
                          label(kDash)});
        first = false;
      }
      for (const auto& text : others_) {
        const auto texts = agg.texts();
        if (std::find(texts.begin(), texts.end(), text) == texts.end()) continue;
        const auto& g = agg.group(text);
        const auto& gap = agg.gap(text);
        t.rows.push_back({label(stratum_row(text, s)),
                          value(format_fixed(g.mean_tqs, 1), op + ".group(" + text + ").mean_tqs = " +
                                                                 format_exact(g.mean_tqs) + " over n=" + std::to_string(g.n)),
                          value(format_fixed(g.sd_tqs, 1), op + ".group(" + text + ").sd_tqs = " + format_exact(g.sd_tqs)),
                          value(format_signed(gap.tqs_gap, 1),
                                op + ".gap(" + text + ").tqs_gap = mean(" + text + ") - mean(" +
                                    spec_.baseline_text + ") = " + format_exact(gap.tqs_gap))});
      }
    }
    t.notes.push_back("Gap = text mean TQS minus " + spec_.baseline_text + " mean TQS under the same stratification.");
    return t;
  }

  // ------------------------------------------------------------ T4 / T8

  struct MetricCorrelation {
    Metric metric;
    std::vector<CorrelationRow> rows;  // per group, then combined
  };

  std::vector<MetricCorrelation> correlations(const std::string& id, bool with_spearman) const {
    need_translations(id);
    const auto metrics = present_metrics(id);
    const auto values = metric_values();
    const auto texts = d_.texts();
    std::vector<MetricCorrelation> out;
    for (Metric m : metrics) {
      std::vector<MetricObservation> obs;
      for (const auto& [tr, x] : values.at(m)) {
        obs.push_back({to_string(tr->key), tr->key.text, std::string(to_string(m)), x, tr->tqs});
      }
      out.push_back({m, correlation_table(obs, texts, with_spearman)});
    }
    auto combined_r = [](const MetricCorrelation& mc) {
      const auto& last = mc.rows.back();
      return last.pearson ? last.pearson->r : -2.0;
    };
    std::stable_sort(out.begin(), out.end(),
                     [&](const auto& a, const auto& b) { return combined_r(a) > combined_r(b); });
    return out;
  }

  static Cell coefficient_cell(const CorrelationRow& row, const std::optional<CorrelationResult>& c,
                               bool with_ci, const std::string& what) {
    if (!c) return value(kDash, what + ": " + (row.note.empty() ? "not computed" : row.note));
    std::string text = format_coefficient(c->r) + significance_stars(c->p);
    if (with_ci && c->ci) text += " [" + format_bound(c->ci->low) + ", " + format_bound(c->ci->high) + "]";
    return value(text, what + ": " + describe(*c));
  }

  static Cell p_cell(const std::optional<CorrelationResult>& c, const std::string& what) {
    if (!c) return value(kDash, what + ": not computed");
    return value(format_p(c->p), what + ": two-tailed p = " + format_exact(c->p) + " from t = r sqrt((n-2)/(1-r^2)), df = " +
                                     std::to_string(c->n - 2));
  }

  Table t4() {
    const auto corr = correlations("T4", true);
    Table t{"T4", "Correlations between automated metrics and MQM TQS",
            {"Metric", "Pearson r [95% CI]", "p", "Spearman ρ [95% CI]", "p"}, {}, {}};
    std::size_t n = 0;
    for (const auto& mc : corr) {
      const auto& row = mc.rows.back();
      n = std::max(n, row.n);
      const std::string name(to_string(mc.metric));
      t.rows.push_back({label(name),
                        coefficient_cell(row, row.pearson, true, "pearson(" + name + ", TQS)"),
                        p_cell(row.pearson, "pearson(" + name + ", TQS)"),
                        coefficient_cell(row, row.spearman, true, "spearman(" + name + ", TQS)"),
                        p_cell(row.spearman, "spearman(" + name + ", TQS)")});
    }
    t.notes.push_back("* p < .05, ** p < .01, *** p < .001. N = " + std::to_string(n) +
                      " translations. CIs via Fisher's z; Spearman CIs apply the same transform to rho and are approximate.");
    std::vector<Metric> present;
    for (const auto& mc : corr) present.push_back(mc.metric);
    if (auto note = missing_metrics_note(present); !note.empty()) t.notes.push_back(note);
    return t;
  }

  Table t8() {
    const auto corr = correlations("T8", false);
    const auto texts = d_.texts();
    Table t{"T8", "Correlations between automated metrics and MQM TQS by text", {"Metric"}, {}, {}};
    if (!corr.empty()) {
      for (const auto& row : corr.front().rows) {
        t.columns.push_back((row.group.empty() ? std::string("Combined") : row.group) + " (n=" + std::to_string(row.n) + ")");
      }
    }
    for (const auto& mc : corr) {
      const std::string name(to_string(mc.metric));
      std::vector<Cell> cells{label(name)};
      for (const auto& row : mc.rows) {
        const std::string scope = row.group.empty() ? "all texts" : row.group;
        cells.push_back(coefficient_cell(row, row.pearson, false, "pearson(" + name + ", TQS) over " + scope));
      }
      t.rows.push_back(std::move(cells));
    }
    t.notes.push_back("Pearson r values. * p < .05, ** p < .01, *** p < .001.");
    std::vector<Metric> present;
    for (const auto& mc : corr) present.push_back(mc.metric);
    if (auto note = missing_metrics_note(present); !note.empty()) t.notes.push_back(note);
    return t;
  }

  // ------------------------------------------------------------ T5

  Table t5() {
    need_translations("T5");
    const AggregateReport agg = aggregate(d_.translations, {}, spec_.baseline_text);
    Table t{"T5", "Quality ratings by text and model",
            {"Text", "Model", "S1 High Pass", "S1 Low Pass", "S1 Fail", "S2 High Pass", "S2 Low Pass", "S2 Fail"},
            {},
            {}};
    for (const auto& g : agg.groups) {
      std::vector<Cell> row{label(g.text), label(model_name(g.model))};
      const std::string scope = "aggregate(all passages).group(" + g.text + ", " + model_name(g.model) + ")";
      for (const auto* tally : {&g.scheme1, &g.scheme2}) {
        const std::string scheme = tally == &g.scheme1 ? "scheme1" : "scheme2";
        for (Rating r : kRatings) {
          row.push_back(value(pct(tally->count(r), tally->total()),
                              scope + "." + scheme + ": " + std::to_string(tally->count(r)) + " of " +
                                  std::to_string(tally->total()) + " rated " + std::string(display_name(r))));
        }
      }
      t.rows.push_back(std::move(row));
    }
    t.notes.push_back("Scheme 1: High Pass >= 95, Low Pass 87 to < 95, Fail < 87. Scheme 2: any critical error is a Fail.");
    return t;
  }

  // ------------------------------------------------------------ T6

  Table t6() {
    need_baseline("T6");
    const bool typed = !d_.annotations.empty() && d_.annotations.size() == d_.translations.size();
    const TypologyReport typ =
        typed ? error_typology(d_.annotations, spec_.baseline_text) : severity_typology(d_.translations, spec_.baseline_text);
    const TextTypology* base = typ.find(spec_.baseline_text);

    Table t{"T6", "MQM error typology by text", {""}, {}, {}};
    for (const auto& tt : typ.texts) t.columns.push_back(tt.text);
    for (const auto& tt : typ.texts) {
      if (&tt != base) t.columns.push_back(tt.text + "/" + base->text + " Ratio");
    }

    auto ratio_text = [](std::optional<double> r) {
      return r ? format_fixed(*r, 1) + "×" : std::string(kDash);
    };
    auto count_row = [&](const std::string& name, auto get) {
      std::vector<Cell> row{label(name)};
      for (const auto& tt : typ.texts) {
        const int k = get(tt);
        row.push_back(value(std::to_string(k) + " (" + pct(k, std::max(tt.total(), 1)) + ")",
                            name + " count for " + tt.text + " = " + std::to_string(k) + " of " +
                                std::to_string(tt.total()) + " errors; share rounded to one decimal"));
      }
      for (const auto& tt : typ.texts) {
        if (&tt == base) continue;
        const auto r = share_ratio(get(tt), tt.total(), get(*base), base->total());
        row.push_back(value(ratio_text(r), "share_ratio: rounded share in " + tt.text +
                                               " / rounded share in " + base->text + " = " +
                                               (r ? format_exact(*r) : std::string("undefined"))));
      }
      t.rows.push_back(std::move(row));
    };

    {
      std::vector<Cell> total{label("Total errors")};
      std::vector<Cell> per{label("Errors per translation")};
      for (const auto& tt : typ.texts) {
        total.push_back(value(std::to_string(tt.total()), "sum of severity counts over " +
                                                              std::to_string(tt.translations) + " " + tt.text + " translations"));
        per.push_back(value(format_fixed(tt.errors_per_translation(), 1),
                            std::to_string(tt.total()) + " / " + std::to_string(tt.translations) + " = " +
                                format_exact(tt.errors_per_translation())));
      }
      for (const auto& tt : typ.texts) {
        if (&tt == base) continue;
        const double rt = base->total() ? static_cast<double>(tt.total()) / base->total() : NAN;
        const double rp = base->errors_per_translation() ? tt.errors_per_translation() / base->errors_per_translation() : NAN;
        total.push_back(value(std::isfinite(rt) ? ratio_text(rt) : kDash, "raw count ratio = " + format_exact(rt)));
        per.push_back(value(std::isfinite(rp) ? ratio_text(rp) : kDash, "raw rate ratio = " + format_exact(rp)));
      }
      t.rows.push_back(std::move(total));
      t.rows.push_back(std::move(per));
    }
    for (Severity s : kSeverities) {
      count_row(std::string(to_string(s)), [s](const TextTypology& tt) { return tt.severity.get(s); });
    }
    if (typed) {
      for (ErrorType e : kErrorTypes) {
        count_row(std::string(to_string(e)), [e](const TextTypology& tt) { return tt.types.at(e); });
      }
      for (Subtype s : kSubtypes) {
        count_row(std::string(display_name(s)), [s](const TextTypology& tt) { return tt.subtypes.at(s); });
      }
    } else {
      t.notes.push_back("Error type and subtype rows need per-error annotations; only severity counts are loaded.");
    }
    t.notes.push_back("Percentages are of total errors within each text. Share ratios divide the displayed (rounded) percentages; count ratios divide raw counts.");
    return t;
  }

  // ------------------------------------------------------------ T7

  struct PassageRow {
    std::string text;
    int passage = 0;
    PassageProfile profile;
    PassageQuality quality;
  };

  std::vector<PassageRow> passage_rows() const {
    need_translations("T7");
    if (d_.profiles.empty()) throw Error("T7 needs rarity profiles (profile CSV)");
    std::map<std::pair<std::string, int>, PassageQuality> quality;
    for (const auto& q : passage_quality(d_.translations)) quality[{q.text, q.passage}] = q;
    std::vector<PassageRow> rows;
    for (const auto& rec : d_.profiles) {
      const auto& p = rec.profile;
      int passage = 0;
      const auto [ptr, ec] = std::from_chars(p.passage_id.data(), p.passage_id.data() + p.passage_id.size(), passage);
      if (ec != std::errc() || ptr != p.passage_id.data() + p.passage_id.size()) {
        throw Error("profile passage id '" + p.passage_id + "' is not an integer");
      }
      const auto it = quality.find({p.text_id, passage});
      if (it == quality.end()) continue;
      rows.push_back({p.text_id, passage, p, it->second});
    }
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
      return std::tie(a.text, a.passage) < std::tie(b.text, b.passage);
    });
    if (rows.size() < 3) throw Error("T7 needs at least 3 passages with both a profile and translations");
    return rows;
  }

  std::vector<Table> t7() {
    const auto rows = passage_rows();
    struct Predictor {
      std::string name;
      double (*get)(const PassageProfile&);
    };
    const std::vector<Predictor> predictors{
        {"Rare term ratio", [](const PassageProfile& p) { return p.rare_ratio; }},
        {"Not-found ratio", [](const PassageProfile& p) { return p.nf_ratio; }},
        {"Average Zipf frequency", [](const PassageProfile& p) { return p.avg_zipf; }},
    };
    std::vector<std::string> scopes;
    for (const auto& text : others_) {
      if (std::any_of(rows.begin(), rows.end(), [&](const auto& r) { return r.text == text; })) scopes.push_back(text);
    }
    scopes.push_back("");

    auto series = [&](const std::string& scope, const Predictor& pr, bool critical) {
      std::vector<double> x;
      std::vector<double> y;
      std::vector<std::string> labels;
      for (const auto& r : rows) {
        if (!scope.empty() && r.text != scope) continue;
        x.push_back(pr.get(r.profile));
        y.push_back(critical ? r.quality.critical : r.quality.mean_tqs);
        labels.push_back(r.text + ":" + std::to_string(r.passage));
      }
      return PairedSeries::make(std::move(x), std::move(y), std::move(labels));
    };

    Table t{"T7", "Correlations between terminology rarity and translation quality", {"Predictor"}, {}, {}};
    for (bool critical : {false, true}) {
      for (const auto& scope : scopes) {
        t.columns.push_back(std::string(critical ? "Critical" : "TQS") + " (" + (scope.empty() ? "All" : scope) + ")");
      }
    }
    for (const auto& pr : predictors) {
      std::vector<Cell> cells{label(pr.name)};
      for (bool critical : {false, true}) {
        for (const auto& scope : scopes) {
          const std::string what = "pearson(" + pr.name + ", passage " + (critical ? "critical count" : "mean TQS") +
                                   ") over " + (scope.empty() ? "all" : scope) + " passages";
          try {
            const auto s = series(scope, pr, critical);
            const auto c = pearson(s);
            cells.push_back(value(signed_bound(c.r) + significance_stars(c.p),
                                  what + ": " + describe(c) + "; inputs x/y " + describe_inputs(s.labels, s.x) +
                                      " / " + describe_inputs(s.labels, s.y)));
          } catch (const Error& e) {
            cells.push_back(value(kDash, what + ": " + e.what()));
          }
        }
      }
      t.rows.push_back(std::move(cells));
    }
    t.notes.push_back("Pearson r. Passage TQS is the mean over models; critical is the summed count. *** p < .001, ** p < .01, * p < .05.");

    std::vector<Table> out{t};
    for (const auto& scope : scopes) {
      if (scope.empty()) continue;
      out.push_back(regression_table(series(scope, predictors[0], false), scope));
    }
    return out;
  }

  Table regression_table(const PairedSeries& s, const std::string& scope) const {
    std::optional<BootstrapOptions> boot;
    if (spec_.seed) boot = BootstrapOptions{spec_.resamples, *spec_.seed, 0};
    const RegressionResult fit = simple_regression(s, boot);
    const std::string op = "simple_regression(rare ratio -> mean TQS, " + scope + " passages, n=" + std::to_string(s.size()) + ")";

    Table t{"T7-" + scope, "Rarity regression diagnostics (" + scope + ")", {"Quantity", "Value"}, {}, {}};
    auto add = [&](std::string name, std::string text, std::string explain) {
      t.rows.push_back({label(std::move(name)), value(std::move(text), std::move(explain))});
    };
    add("n", std::to_string(s.size()), op);
    add("Pearson r", format_coefficient(fit.correlation.r, 3), op + ": " + describe(fit.correlation));
    add("p", format_p(fit.correlation.p), op + ": " + describe(fit.correlation));
    add("R²", format_fixed(fit.r_squared, 3), op + ".r_squared = " + format_exact(fit.r_squared));
    add("Slope", format_fixed(fit.slope, 2), op + ".slope = " + format_exact(fit.slope));
    add("Intercept", format_fixed(fit.intercept, 2), op + ".intercept = " + format_exact(fit.intercept));
    if (fit.bootstrap_ci) {
      add("Bootstrap 95% CI for R²", "[" + format_bound(fit.bootstrap_ci->low) + ", " + format_bound(fit.bootstrap_ci->high) + "]",
          op + ": percentile CI over " + std::to_string(spec_.resamples) + " resamples, seed " +
              std::to_string(*spec_.seed) + ", low=" + format_exact(fit.bootstrap_ci->low) +
              ", high=" + format_exact(fit.bootstrap_ci->high));
    } else {
      add("Bootstrap 95% CI for R²", "not run", "bootstrap requires an explicit seed");
    }
    add("Cook's D threshold (4/n)", format_fixed(fit.influence_threshold, 2), "4 / " + std::to_string(s.size()));
    for (std::size_t i = 0; i < s.size(); ++i) {
      const bool hot = fit.cooks_d[i] > fit.influence_threshold;
      add("Cook's D " + s.labels[i], format_fixed(fit.cooks_d[i], 2) + (hot ? " (influential)" : ""),
          op + ".cooks_d[" + s.labels[i] + "] = e^2/(2 s^2) h/(1-h)^2 with e=" + format_exact(fit.residuals[i]) +
              ", h=" + format_exact(fit.leverage[i]) + " -> " + format_exact(fit.cooks_d[i]));
    }
    const auto influential = fit.influential();
    if (!influential.empty() && s.size() - influential.size() >= 3) {
      std::string names;
      for (auto i : influential) names += (names.empty() ? "" : ", ") + s.labels[i];
      try {
        const auto rest = s.without(influential);
        const RegressionResult refit = simple_regression(rest);
        const std::string rop = "simple_regression excluding " + names;
        add("Excluding " + names + ": r", format_coefficient(refit.correlation.r, 3), rop + ": " + describe(refit.correlation));
        add("Excluding " + names + ": p", format_p(refit.correlation.p), rop + ": " + describe(refit.correlation));
        add("Excluding " + names + ": R²", format_fixed(refit.r_squared, 3), rop + ".r_squared = " + format_exact(refit.r_squared));
      } catch (const Error& e) {
        add("Excluding " + names, kDash, e.what());
      }
    }
    const auto rho = spearman(s);
    add("Spearman ρ", format_coefficient(rho.r, 3), "spearman(rare ratio, mean TQS): " + describe(rho));
    add("Spearman p", format_p(rho.p), "spearman(rare ratio, mean TQS): " + describe(rho));
    t.notes.push_back("Rare ratio recomputed as rare / terms. Passage TQS is the mean over models.");
    return t;
  }

  // ------------------------------------------------------------ S3

  Table s3() {
    need_baseline("S3");
    const auto metrics = present_metrics("S3");
    const auto values = metric_values();
    Table t{"S3", "Gap on automated metrics under stratification", {"Metric"}, {}, {}};
    std::vector<Stratum> all{Stratum{}};
    all.insert(all.end(), strata_.begin(), strata_.end());
    for (const auto& text : others_) {
      for (const auto& s : all) t.columns.push_back(stratum_row(text, s));
      t.columns.push_back("Cohen's d (" + text + ", all passages)");
    }
    for (Metric m : metrics) {
      const std::string name(to_string(m));
      std::vector<Cell> cells{label(name)};
      for (const auto& text : others_) {
        for (const auto& s : all) {
          std::vector<double> base;
          std::vector<double> other;
          for (const auto& [tr, x] : values.at(m)) {
            if (s.excludes(tr->key)) continue;
            if (tr->key.text == spec_.baseline_text) base.push_back(x);
            if (tr->key.text == text) other.push_back(x);
          }
          if (base.empty() || other.empty()) {
            cells.push_back(value(kDash, "no " + name + " scores in this stratum"));
            continue;
          }
          const double mb = mean(base);
          const double mo = mean(other);
          const double rel = (mo - mb) / mb * 100.0;
          cells.push_back(value(format_signed(rel, 1) + "%",
                                "(mean " + text + " - mean " + spec_.baseline_text + ") / mean " + spec_.baseline_text +
                                    " x 100 = (" + format_exact(mo) + " - " + format_exact(mb) + ") / " +
                                    format_exact(mb) + " x 100, n=" + std::to_string(other.size()) + "/" +
                                    std::to_string(base.size())));
        }
        std::vector<double> base;
        std::vector<double> other;
        for (const auto& [tr, x] : values.at(m)) {
          if (tr->key.text == spec_.baseline_text) base.push_back(x);
          if (tr->key.text == text) other.push_back(x);
        }
        try {
          const double dv = cohens_d(base, other);
          cells.push_back(value(format_fixed(dv, 2), "cohens_d(" + spec_.baseline_text + ", " + text +
                                                         ") with pooled sample SD = " + format_exact(dv)));
        } catch (const Error& e) {
          cells.push_back(value(kDash, e.what()));
        }
      }
      t.rows.push_back(std::move(cells));
    }
    t.notes.push_back("Relative change from " + spec_.baseline_text + " to each text (negative = lower). The baseline keeps all passages unless a stratum names it.");
    if (auto note = missing_metrics_note(metrics); !note.empty()) t.notes.push_back(note);
    return t;
  }

  // ------------------------------------------------------------ S4

  Table s4() {
    need_baseline("S4");
    Table t{"S4", "Quality ratings under stratification",
            {"Stratification", "Scheme 1 Pass Rate", "Scheme 2 Pass Rate", "Scheme 1 Gap", "Scheme 2 Gap"}, {}, {}};
    std::vector<Stratum> all{Stratum{}};
    all.insert(all.end(), strata_.begin(), strata_.end());
    bool first = true;
    for (const auto& s : all) {
      const AggregateReport agg = aggregate(d_.translations, s, spec_.baseline_text);
      const std::string op = "aggregate(" + (s.empty() ? std::string("all passages") : s.label()) + ")";
      auto rate = [&](const GroupSummary& g, const RatingTally& tally, const char* scheme) {
        return value(pct(tally.passed(), tally.total()),
                     op + ".group(" + g.text + ")." + scheme + ": " + std::to_string(tally.passed()) + " of " +
                         std::to_string(tally.total()) + " passed");
      };
      if (first) {
        const auto& b = agg.group(spec_.baseline_text);
        t.rows.push_back({label(stratum_row(spec_.baseline_text, s)), rate(b, b.scheme1, "scheme1"),
                          rate(b, b.scheme2, "scheme2"), label(kDash), label(kDash)});
        first = false;
      }
      const auto texts = agg.texts();
      for (const auto& text : others_) {
        if (std::find(texts.begin(), texts.end(), text) == texts.end()) continue;
        const auto& g = agg.group(text);
        const auto& gap = agg.gap(text);
        t.rows.push_back({label(stratum_row(text, s)), rate(g, g.scheme1, "scheme1"), rate(g, g.scheme2, "scheme2"),
                          value(format_fixed(gap.pass_gap_scheme1, 1),
                                op + ".gap(" + text + ").pass_gap_scheme1 = baseline - text = " + format_exact(gap.pass_gap_scheme1)),
                          value(format_fixed(gap.pass_gap_scheme2, 1),
                                op + ".gap(" + text + ").pass_gap_scheme2 = baseline - text = " + format_exact(gap.pass_gap_scheme2))});
      }
    }
    t.notes.push_back("Pass = High Pass + Low Pass. Gap = baseline pass rate minus text pass rate, in percentage points.");
    return t;
  }

  // ------------------------------------------------------------ S5

  Table s5() {
    const auto prefs = reference_preferences(d_.metric_scores);
    if (prefs.empty()) throw Error("S5 needs per-reference metric scores (reference_id column)");
    std::set<std::string> refs;
    for (const auto& [m, tally] : prefs) {
      for (const auto& [id, n] : tally) refs.insert(id);
    }
    Table t{"S5", "Reference translation preferences", {"Metric"}, {}, {}};
    for (const auto& r : refs) {
      t.columns.push_back(r + " preference");
      t.columns.push_back(r + " %");
    }
    t.columns.push_back("Total");
    for (Metric m : kMetrics) {
      const auto it = prefs.find(m);
      if (it == prefs.end()) continue;
      int total = 0;
      for (const auto& [id, n] : it->second) total += n;
      std::vector<Cell> cells{label(std::string(to_string(m)))};
      for (const auto& r : refs) {
        const int n = it->second.count(r) ? it->second.at(r) : 0;
        const std::string op = "reference_preferences(" + std::string(to_string(m)) + ")[" + r + "]";
        cells.push_back(value(std::to_string(n), op + ": translations where " + r + " scored highest (ties to the smallest id)"));
        cells.push_back(value(pct(n, total), op + ": " + std::to_string(n) + " of " + std::to_string(total)));
      }
      cells.push_back(value(std::to_string(total), "translations with per-reference " + std::string(to_string(m)) + " scores"));
      t.rows.push_back(std::move(cells));
    }
    return t;
  }

  // ------------------------------------------------------------ S6

  Table s6() {
    if (d_.profiles.empty()) throw Error("S6 needs rarity profiles (profile CSV)");
    Table t{"S6", "Terminology rarity by passage",
            {"Text", "Passage", "Terms", "Avg. Zipf", "Rare Ratio", "Rare", "Not Found", "NF Ratio", "Risk"}, {}, {}};
    std::vector<const PassageProfile*> sorted;
    for (const auto& r : d_.profiles) sorted.push_back(&r.profile);
    auto text_rank = [&](const std::string& text) { return text == spec_.baseline_text ? 0 : 1; };
    auto passage_num = [](const std::string& id) {
      int n = 0;
      const auto [ptr, ec] = std::from_chars(id.data(), id.data() + id.size(), n);
      return (ec == std::errc() && ptr == id.data() + id.size()) ? n : 0;
    };
    std::stable_sort(sorted.begin(), sorted.end(), [&](const auto* a, const auto* b) {
      return std::make_tuple(text_rank(a->text_id), a->text_id, passage_num(a->passage_id), a->passage_id) <
             std::make_tuple(text_rank(b->text_id), b->text_id, passage_num(b->passage_id), b->passage_id);
    });
    std::map<std::string, std::vector<const PassageProfile*>> by_text;
    std::vector<std::string> order;
    for (const auto* p : sorted) {
      if (!by_text.count(p->text_id)) order.push_back(p->text_id);
      by_text[p->text_id].push_back(p);
      const Risk risk = risk_flag(p->rare_ratio, spec_.profile.bands);
      const std::string id = p->text_id + ":" + p->passage_id;
      t.rows.push_back({label(p->text_id), label(p->passage_id),
                        value(std::to_string(p->term_count), id + ": lemma tokens in passage"),
                        value(format_fixed(p->avg_zipf, 2), id + ": mean Zipf over tokens, absent lemmas 0 = " + format_exact(p->avg_zipf)),
                        value(pct(static_cast<long long>(p->rare_count), static_cast<long long>(p->term_count)),
                              id + ": rare / terms = " + std::to_string(p->rare_count) + " / " + std::to_string(p->term_count)),
                        value(std::to_string(p->rare_count), id + ": lemmas with frequency below the threshold or absent"),
                        value(std::to_string(p->not_found_count), id + ": lemmas absent from the index"),
                        value(pct(static_cast<long long>(p->not_found_count), static_cast<long long>(p->term_count)),
                              id + ": not_found / terms = " + std::to_string(p->not_found_count) + " / " + std::to_string(p->term_count)),
                        value(std::string(to_string(risk)), id + ": risk_flag(" + format_exact(p->rare_ratio) + ")")});
    }
    for (const auto& text : order) {
      std::vector<double> zipf;
      std::vector<double> rare;
      std::vector<double> nf;
      for (const auto* p : by_text[text]) {
        zipf.push_back(p->avg_zipf);
        rare.push_back(p->rare_ratio);
        nf.push_back(p->nf_ratio);
      }
      const std::string op = "mean over " + std::to_string(zipf.size()) + " " + text + " passages";
      t.rows.push_back({label(text), label("Mean"), label(kDash),
                        value(format_fixed(mean(zipf), 2), op + " = " + format_exact(mean(zipf))),
                        value(format_fixed(mean(rare) * 100.0, 1) + "%", op + " = " + format_exact(mean(rare))),
                        label(kDash), label(kDash),
                        value(format_fixed(mean(nf) * 100.0, 1) + "%", op + " = " + format_exact(mean(nf))),
                        label(kDash)});
    }
    t.notes.push_back("Ratios are recomputed from the counts. Rare = frequency below " +
                      std::to_string(spec_.profile.rare_threshold) + " or absent; absent lemmas score Zipf 0.");
    return t;
  }
};

std::string markdown_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    if (c == '|') out += "\\";
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::string_view to_string(Format f) { return f == Format::Markdown ? "markdown" : "csv"; }

Format parse_format(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "markdown" || lower == "md") return Format::Markdown;
  if (lower == "csv") return Format::Csv;
  throw Error("unknown format '" + std::string(text) + "' (expected markdown or csv)");
}

std::string format_coefficient(double r, int decimals) {
  const std::string body = format_fixed(std::abs(r), decimals);
  return (r < 0 ? "-" : "+") + body;
}

std::string format_bound(double v) {
  std::string text = format_fixed(v, 2);
  if (text.starts_with("0.")) return text.substr(1);
  if (text.starts_with("-0.")) return "-" + text.substr(2);
  return text;
}

std::string format_p(double p) {
  if (p < 0.001) return "< .001";
  const std::string text = format_fixed(p, 3);
  return text.starts_with("0.") ? text.substr(1) : text;
}

const Table* Report::find(std::string_view id) const {
  for (const auto& t : tables) {
    if (t.id == id) return &t;
  }
  return nullptr;
}

Report build(const Spec& spec, const Dataset& dataset) {
  std::vector<std::string> ids;
  for (const auto& requested : spec.tables) {
    std::string id(requested);
    std::transform(id.begin(), id.end(), id.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (id == "ALL") {
      for (const auto& k : kTableIds) ids.push_back(k);
      continue;
    }
    if (std::find(kTableIds.begin(), kTableIds.end(), id) == kTableIds.end()) {
      throw Error("unknown table '" + requested + "'");
    }
    ids.push_back(id);
  }
  std::vector<std::string> unique;
  for (const auto& k : kTableIds) {
    if (std::find(ids.begin(), ids.end(), k) != ids.end()) unique.push_back(k);
  }
  const bool all = std::any_of(spec.tables.begin(), spec.tables.end(), [](const std::string& t) {
    std::string u(t);
    std::transform(u.begin(), u.end(), u.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return u == "ALL";
  });

  Report report;
  report.header.push_back("fixture version: " + (dataset.version.empty() ? std::string("unversioned") : dataset.version));
  report.header.push_back("baseline text: " + spec.baseline_text);
  std::string strata = "all passages";
  for (const auto& s : spec.strata) {
    if (!s.empty()) strata += "; " + s.label();
  }
  report.header.push_back("strata: " + strata);
  report.header.push_back("BLEU smoothing: " + std::string(to_string(spec.smoothing)));
  report.header.push_back("rare threshold: frequency < " + std::to_string(spec.profile.rare_threshold));
  report.header.push_back("risk bands: Low < " + format_exact(spec.profile.bands.elevated_from) + " <= Elevated <= " +
                          format_exact(spec.profile.bands.critical_above) + " < Critical");
  report.header.push_back(spec.seed ? "bootstrap: " + std::to_string(spec.resamples) + " resamples, percentile 95% CI, seed " +
                                          std::to_string(*spec.seed)
                                    : std::string("bootstrap: off (no seed)"));
  report.header.push_back("correlation: 95% CI via Fisher z, two-tailed p from Student t");

  Builder builder(spec, dataset);
  for (const auto& id : unique) {
    try {
      for (auto& t : builder.build(id)) report.tables.push_back(std::move(t));
    } catch (const Error& e) {
      // "all" quietly skips tables whose inputs are missing.
      if (!all || std::find(spec.tables.begin(), spec.tables.end(), id) != spec.tables.end()) throw;
      report.header.push_back("skipped " + id + ": " + e.what());
    }
  }
  return report;
}

std::string render(const Report& report, Format format) {
  std::ostringstream out;
  if (format == Format::Markdown) {
    out << "# philoscope report\n\n";
    for (const auto& h : report.header) out << "- " << h << '\n';
    for (const auto& t : report.tables) {
      out << "\n## " << t.id << ". " << t.title << "\n\n|";
      for (const auto& c : t.columns) out << ' ' << markdown_escape(c) << " |";
      out << "\n|";
      for (std::size_t i = 0; i < t.columns.size(); ++i) out << "---|";
      out << '\n';
      for (const auto& row : t.rows) {
        out << '|';
        for (const auto& c : row) out << ' ' << markdown_escape(c.text) << " |";
        out << '\n';
      }
      for (const auto& n : t.notes) out << "\n" << n << '\n';
    }
  } else {
    for (const auto& h : report.header) out << "# " << h << '\n';
    for (const auto& t : report.tables) {
      out << "\n# " << t.id << ". " << t.title << '\n';
      csv::write_row(out, t.columns);
      for (const auto& row : t.rows) {
        std::vector<std::string> fields;
        for (const auto& c : row) fields.push_back(c.text);
        csv::write_row(out, fields);
      }
      for (const auto& n : t.notes) out << "# " << n << '\n';
    }
  }
  return out.str();
}

std::string explain(const Report& report, std::string_view reference) {
  const auto first = reference.find(':');
  const auto second = first == std::string_view::npos ? first : reference.find(':', first + 1);
  if (second == std::string_view::npos) {
    throw Error("cell reference '" + std::string(reference) + "': expected <table>:<row>:<column>");
  }
  const std::string id(reference.substr(0, first));
  const std::string row_text(reference.substr(first + 1, second - first - 1));
  const std::string col_text(reference.substr(second + 1));
  const Table* t = report.find(id);
  if (!t) throw Error("cell reference '" + std::string(reference) + "': table " + id + " not in this report");

  std::size_t row = 0;
  const auto [rp, rec] = std::from_chars(row_text.data(), row_text.data() + row_text.size(), row);
  if (rec != std::errc() || rp != row_text.data() + row_text.size() || row < 1 || row > t->rows.size()) {
    throw Error("cell reference '" + std::string(reference) + "': row must be 1.." + std::to_string(t->rows.size()));
  }
  std::size_t col = 0;
  const auto [cp, cec] = std::from_chars(col_text.data(), col_text.data() + col_text.size(), col);
  if (cec != std::errc() || cp != col_text.data() + col_text.size()) {
    col = 0;
    for (std::size_t i = 0; i < t->columns.size(); ++i) {
      if (t->columns[i] == col_text) col = i + 1;
    }
  }
  if (col < 1 || col > t->columns.size()) {
    throw Error("cell reference '" + std::string(reference) + "': no such column");
  }
  const Cell& cell = t->rows[row - 1][col - 1];
  std::string out = t->id + " row " + std::to_string(row) + " (" + t->rows[row - 1][0].text + "), column '" +
                    t->columns[col - 1] + "': " + cell.text + "\n";
  out += cell.explain.empty() ? "label cell; not computed\n" : cell.explain + "\n";
  return out;
}

}  // namespace philoscope::report
