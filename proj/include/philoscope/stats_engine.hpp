#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace philoscope {

struct PairedSeries {
  std::vector<std::string> labels;
  std::vector<double> x;
  std::vector<double> y;

  // Equal lengths >= 3, all values finite; labels default to "1".."n".
  static PairedSeries make(std::vector<double> x, std::vector<double> y,
                           std::vector<std::string> labels = {});
  std::size_t size() const { return x.size(); }
  PairedSeries without(std::span<const std::size_t> indices) const;
};

enum class CorrelationKind { Pearson, Spearman };

std::string_view to_string(CorrelationKind kind);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

struct CorrelationResult {
  CorrelationKind kind = CorrelationKind::Pearson;
  double r = 0.0;
  std::optional<Interval> ci;  // Fisher z, 95%; needs n >= 4
  double p = 1.0;              // two-tailed, Student t with n - 2 df
  std::size_t n = 0;
  bool ci_approximate = false;  // set for Spearman
};

CorrelationResult pearson(const PairedSeries& series);
CorrelationResult spearman(const PairedSeries& series);

// Ranks from 1, ties share their average rank.
std::vector<double> average_ranks(std::span<const double> values);

// Two-tailed permutation p over all n! pairings (n <= 10).
double exact_permutation_p(const PairedSeries& series, CorrelationKind kind);

// I_x(a, b) by Lentz's continued fraction, relative tolerance 1e-10.
double regularized_incomplete_beta(double a, double b, double x);
double student_t_two_tailed_p(double t, double df);

struct BootstrapOptions {
  std::size_t resamples = 10000;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0 = hardware concurrency
};

struct RegressionResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<double> residuals;
  std::vector<double> leverage;
  std::vector<double> cooks_d;
  double influence_threshold = 0.0;  // 4 / n
  std::optional<Interval> bootstrap_ci;
  CorrelationResult correlation;

  std::vector<std::size_t> influential() const;  // indices with D > 4/n
};

// OLS of y on x. Constant x or constant y is an error. Bootstrap resamples
// observations with replacement, redrawing resamples whose x or y is
// constant, and reports the percentile 95% CI of R^2.
RegressionResult simple_regression(const PairedSeries& series,
                                   const std::optional<BootstrapOptions>& bootstrap = {});

// The R^2 of every bootstrap resample, in resample order.
std::vector<double> bootstrap_r_squared(const PairedSeries& series, const BootstrapOptions& options);

// Linear interpolation between order statistics (Hyndman-Fan type 7).
double quantile(std::vector<double> values, double q);

double mean(std::span<const double> values);
double sample_sd(std::span<const double> values);

// (mean_a - mean_b) / pooled sample SD.
double cohens_d(std::span<const double> group_a, std::span<const double> group_b);

// "***" p < .001, "**" p < .01, "*" p < .05.
std::string significance_stars(double p);

struct MetricObservation {
  std::string id;
  std::string group;
  std::string metric;
  double metric_value = 0.0;
  double human_score = 0.0;
};

struct CorrelationRow {
  std::string metric;
  std::string group;  // empty for all groups combined
  std::size_t n = 0;
  std::optional<CorrelationResult> pearson;
  std::optional<CorrelationResult> spearman;
  std::string note;  // why a coefficient is missing
};

// Per metric (first-appearance order): each group in `groups`, then combined.
std::vector<CorrelationRow> correlation_table(std::span<const MetricObservation> observations,
                                              std::span<const std::string> groups,
                                              bool with_spearman);

}  // namespace philoscope
