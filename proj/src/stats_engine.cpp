#include "philoscope/stats_engine.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <map>
#include <numeric>
#include <thread>

#include "philoscope/error.hpp"
#include "philoscope/rng.hpp"

namespace philoscope {
namespace {

constexpr double kZ975 = 1.959963984540054;

struct Moments {
  double mean_x = 0.0;
  double mean_y = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
};

Moments moments(std::span<const double> x, std::span<const double> y) {
  Moments m;
  const auto n = static_cast<double>(x.size());
  m.mean_x = std::accumulate(x.begin(), x.end(), 0.0) / n;
  m.mean_y = std::accumulate(y.begin(), y.end(), 0.0) / n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - m.mean_x;
    const double dy = y[i] - m.mean_y;
    m.sxx += dx * dx;
    m.syy += dy * dy;
    m.sxy += dx * dy;
  }
  return m;
}

bool constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double d) { return d == v.front(); });
}

double correlation_of(std::span<const double> x, std::span<const double> y) {
  const Moments m = moments(x, y);
  return std::clamp(m.sxy / std::sqrt(m.sxx * m.syy), -1.0, 1.0);
}

CorrelationResult finish(CorrelationKind kind, double r, std::size_t n) {
  CorrelationResult out;
  out.kind = kind;
  out.r = r;
  out.n = n;
  out.ci_approximate = kind == CorrelationKind::Spearman;
  const double df = static_cast<double>(n) - 2.0;
  if (std::abs(r) >= 1.0) {
    out.p = 0.0;
    if (n >= 4) out.ci = Interval{r, r};
    return out;
  }
  out.p = student_t_two_tailed_p(r * std::sqrt(df / (1.0 - r * r)), df);
  if (n >= 4) {
    const double z = std::atanh(r);
    const double half = kZ975 / std::sqrt(static_cast<double>(n) - 3.0);
    out.ci = Interval{std::tanh(z - half), std::tanh(z + half)};
  }
  return out;
}

void require_variance(const PairedSeries& s) {
  if (constant(s.x) || constant(s.y)) throw Error("zero variance");
}

double r_squared_of(std::span<const double> x, std::span<const double> y) {
  const Moments m = moments(x, y);
  return std::clamp(m.sxy * m.sxy / (m.sxx * m.syy), 0.0, 1.0);
}

}  // namespace

PairedSeries PairedSeries::make(std::vector<double> x, std::vector<double> y,
                                std::vector<std::string> labels) {
  if (x.size() != y.size()) throw Error("paired series: x and y differ in length");
  if (x.size() < 3) throw Error("paired series: need at least 3 observations");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw Error("paired series: non-finite value at observation " + std::to_string(i + 1));
    }
  }
  if (labels.empty()) {
    for (std::size_t i = 0; i < x.size(); ++i) labels.push_back(std::to_string(i + 1));
  } else if (labels.size() != x.size()) {
    throw Error("paired series: label count differs from observation count");
  }
  return PairedSeries{std::move(labels), std::move(x), std::move(y)};
}

PairedSeries PairedSeries::without(std::span<const std::size_t> indices) const {
  std::vector<double> nx;
  std::vector<double> ny;
  std::vector<std::string> nl;
  for (std::size_t i = 0; i < size(); ++i) {
    if (std::find(indices.begin(), indices.end(), i) != indices.end()) continue;
    nx.push_back(x[i]);
    ny.push_back(y[i]);
    nl.push_back(labels[i]);
  }
  return make(std::move(nx), std::move(ny), std::move(nl));
}

std::string_view to_string(CorrelationKind kind) {
  return kind == CorrelationKind::Pearson ? "Pearson" : "Spearman";
}

CorrelationResult pearson(const PairedSeries& series) {
  require_variance(series);
  return finish(CorrelationKind::Pearson, correlation_of(series.x, series.y), series.size());
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i + j) + 2.0) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

CorrelationResult spearman(const PairedSeries& series) {
  require_variance(series);
  const auto rx = average_ranks(series.x);
  const auto ry = average_ranks(series.y);
  return finish(CorrelationKind::Spearman, correlation_of(rx, ry), series.size());
}

double exact_permutation_p(const PairedSeries& series, CorrelationKind kind) {
  const std::size_t n = series.size();
  if (n > 10) throw Error("exact permutation p needs n <= 10");
  require_variance(series);
  std::vector<double> x = series.x;
  std::vector<double> y = series.y;
  if (kind == CorrelationKind::Spearman) {
    x = average_ranks(series.x);
    y = average_ranks(series.y);
  }
  // With both margins fixed, r is an affine function of sum x_i y_pi(i).
  const Moments m = moments(x, y);
  const double scale = std::sqrt(m.sxx * m.syy);
  for (auto& v : x) v -= m.mean_x;
  for (auto& v : y) v -= m.mean_y;
  const double observed = std::abs(m.sxy / scale);
  const double eps = 1e-12;

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t extreme = 0;
  std::size_t total = 0;
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[perm[i]];
    if (std::abs(s / scale) >= observed - eps) ++extreme;
    ++total;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(extreme) / static_cast<double>(total);
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw Error("incomplete beta: a and b must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw Error("incomplete beta: x outside [0,1]");
  if (x == 0.0 || x == 1.0) return x;
  if (x > (a + 1.0) / (a + b + 2.0)) return 1.0 - regularized_incomplete_beta(b, a, 1.0 - x);

  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  constexpr double kTiny = 1e-300;
  constexpr double kTolerance = 1e-10;
  double c = 1.0;
  double d = 1.0 - (a + b) * x / (a + 1.0);
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double f = d;
  for (int m = 1; m <= 10000; ++m) {
    const double dm = m;
    double num = dm * (b - dm) * x / ((a + 2.0 * dm - 1.0) * (a + 2.0 * dm));
    d = 1.0 + num * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + num / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    f *= d * c;

    num = -(a + dm) * (a + b + dm) * x / ((a + 2.0 * dm) * (a + 2.0 * dm + 1.0));
    d = 1.0 + num * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + num / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    f *= delta;
    if (std::abs(delta - 1.0) < kTolerance) return std::exp(log_front) * f / a;
  }
  throw Error("incomplete beta: continued fraction did not converge");
}

double student_t_two_tailed_p(double t, double df) {
  if (!(df > 0.0)) throw Error("t distribution: df must be positive");
  if (std::isinf(t)) return 0.0;
  if (std::isnan(t)) throw Error("t distribution: t is NaN");
  return std::clamp(regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t)), 0.0, 1.0);
}

// ---------------------------------------------------------------- regression

std::vector<std::size_t> RegressionResult::influential() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < cooks_d.size(); ++i) {
    if (cooks_d[i] > influence_threshold) out.push_back(i);
  }
  return out;
}

std::vector<double> bootstrap_r_squared(const PairedSeries& series, const BootstrapOptions& options) {
  require_variance(series);
  if (options.resamples < 2) throw Error("bootstrap: need at least 2 resamples");
  const std::size_t n = series.size();
  std::vector<double> out(options.resamples);

  auto one = [&](std::size_t b) {
    CounterRng rng(options.seed, b);
    std::vector<double> x(n);
    std::vector<double> y(n);
    for (int attempt = 0; attempt < 100000; ++attempt) {
      for (std::size_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(rng.below(n));
        x[i] = series.x[k];
        y[i] = series.y[k];
      }
      if (!constant(x) && !constant(y)) return r_squared_of(x, y);
    }
    throw Error("bootstrap: could not draw a non-degenerate resample");
  };

  unsigned workers = options.threads ? options.threads : std::thread::hardware_concurrency();
  workers = std::clamp<unsigned>(workers, 1, 64);
  std::vector<std::future<void>> running;
  for (unsigned w = 0; w < workers; ++w) {
    running.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t b = w; b < out.size(); b += workers) out[b] = one(b);
    }));
  }
  for (auto& f : running) f.get();
  return out;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw Error("quantile: q outside [0,1]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

RegressionResult simple_regression(const PairedSeries& series,
                                   const std::optional<BootstrapOptions>& bootstrap) {
  if (constant(series.x)) throw Error("regression: x has zero variance");
  if (constant(series.y)) throw Error("regression: y has zero variance");
  const std::size_t n = series.size();
  const Moments m = moments(series.x, series.y);

  RegressionResult out;
  out.slope = m.sxy / m.sxx;
  out.intercept = m.mean_y - out.slope * m.mean_x;
  out.r_squared = std::clamp(m.sxy * m.sxy / (m.sxx * m.syy), 0.0, 1.0);
  out.influence_threshold = 4.0 / static_cast<double>(n);
  out.correlation = pearson(series);

  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = series.y[i] - (out.intercept + out.slope * series.x[i]);
    out.residuals.push_back(e);
    sse += e * e;
    const double dx = series.x[i] - m.mean_x;
    out.leverage.push_back(1.0 / static_cast<double>(n) + dx * dx / m.sxx);
  }
  // An exact fit leaves only rounding noise in the residuals.
  const bool exact_fit = sse <= 1e-24 * m.syy;
  const double s2 = sse / (static_cast<double>(n) - 2.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double h = out.leverage[i];
    if (exact_fit) {
      out.cooks_d.push_back(0.0);
    } else if (h >= 1.0) {
      out.cooks_d.push_back(std::numeric_limits<double>::infinity());
    } else {
      const double e = out.residuals[i];
      out.cooks_d.push_back(e * e / (2.0 * s2) * h / ((1.0 - h) * (1.0 - h)));
    }
  }

  if (bootstrap) {
    const auto samples = bootstrap_r_squared(series, *bootstrap);
    out.bootstrap_ci = Interval{quantile(samples, 0.025), quantile(samples, 0.975)};
  }
  return out;
}

// ---------------------------------------------------------------- descriptives

double mean(std::span<const double> values) {
  if (values.empty()) throw Error("mean of an empty sample");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values) {
  if (values.size() < 2) throw Error("sample SD needs at least 2 values");
  const double mu = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - mu) * (v - mu);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double cohens_d(std::span<const double> group_a, std::span<const double> group_b) {
  if (group_a.size() < 2 || group_b.size() < 2) throw Error("Cohen's d: each group needs 2 values");
  const double na = static_cast<double>(group_a.size());
  const double nb = static_cast<double>(group_b.size());
  const double sa = sample_sd(group_a);
  const double sb = sample_sd(group_b);
  const double pooled = std::sqrt(((na - 1.0) * sa * sa + (nb - 1.0) * sb * sb) / (na + nb - 2.0));
  if (pooled == 0.0) throw Error("Cohen's d: zero pooled SD");
  return (mean(group_a) - mean(group_b)) / pooled;
}

std::string significance_stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "";
}

std::vector<CorrelationRow> correlation_table(std::span<const MetricObservation> observations,
                                              std::span<const std::string> groups,
                                              bool with_spearman) {
  std::vector<std::string> metrics;
  for (const auto& o : observations) {
    if (std::find(metrics.begin(), metrics.end(), o.metric) == metrics.end()) {
      metrics.push_back(o.metric);
    }
  }
  std::vector<std::string> scopes(groups.begin(), groups.end());
  scopes.push_back("");

  std::vector<CorrelationRow> rows;
  for (const auto& metric : metrics) {
    for (const auto& scope : scopes) {
      std::vector<double> x;
      std::vector<double> y;
      std::vector<std::string> ids;
      for (const auto& o : observations) {
        if (o.metric != metric || (!scope.empty() && o.group != scope)) continue;
        x.push_back(o.metric_value);
        y.push_back(o.human_score);
        ids.push_back(o.id);
      }
      CorrelationRow row;
      row.metric = metric;
      row.group = scope;
      row.n = x.size();
      if (x.empty()) continue;
      try {
        const auto series = PairedSeries::make(std::move(x), std::move(y), std::move(ids));
        row.pearson = pearson(series);
        if (with_spearman) row.spearman = spearman(series);
      } catch (const Error& e) {
        row.note = e.what();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace philoscope
