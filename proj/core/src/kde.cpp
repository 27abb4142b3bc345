#include "scoped/kde.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <numeric>
#include <string>

#include "scoped/errors.hpp"

namespace scoped {
namespace {

double sample_std(std::span<const double> v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (n - 1.0));
}

double log_sum_gauss(std::span<const double> pts, double x, double h, std::size_t skip) {
  double max_term = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i == skip) continue;
    const double z = (x - pts[i]) / h;
    max_term = std::max(max_term, -0.5 * z * z);
  }
  if (!std::isfinite(max_term)) return max_term;
  double acc = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i == skip) continue;
    const double z = (x - pts[i]) / h;
    acc += std::exp(-0.5 * z * z - max_term);
  }
  return max_term + std::log(acc);
}

}  // namespace

BandwidthRule parse_bandwidth_rule(std::string_view text) {
  if (text == "silverman") return BandwidthRule::silverman();
  if (text == "scott") return BandwidthRule::scott();
  double b = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), b);
  if (ec != std::errc() || ptr != text.data() + text.size() || !(b > 0.0))
    throw InputError("bandwidth rule must be silverman, scott or a positive number, got \"" +
                     std::string(text) + "\"");
  return BandwidthRule::fixed(b);
}

KdeModel::KdeModel(std::vector<double> points, double bandwidth, double log_floor)
    : points_(std::move(points)), bandwidth_(bandwidth), log_floor_(log_floor) {
  if (points_.size() < 2) throw InputError("kde needs at least 2 points");
  if (!(bandwidth_ > 0.0) || !std::isfinite(bandwidth_)) throw InputError("kde bandwidth must be positive");
  for (double p : points_)
    if (!std::isfinite(p)) throw NumericError("kde points must be finite");
  sorted_ = points_;
  std::sort(sorted_.begin(), sorted_.end());
  median_ = empirical_quantile(sorted_, 0.5);
}

double KdeModel::log_density(double x) const {
  const double n = static_cast<double>(sorted_.size());
  return log_sum_gauss(sorted_, x, bandwidth_, sorted_.size()) -
         std::log(n * bandwidth_ * std::sqrt(2.0 * M_PI));
}

double KdeModel::log_density_excluding(double x, std::size_t skip) const {
  const double n = static_cast<double>(points_.size() - 1);
  return log_sum_gauss(points_, x, bandwidth_, skip) - std::log(n * bandwidth_ * std::sqrt(2.0 * M_PI));
}

double rule_bandwidth(std::span<const double> values, BandwidthRule rule) {
  if (rule.kind == BandwidthRule::Kind::kFixed) return rule.value;
  // Summing in sorted order makes the bandwidth independent of input order.
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  values = sorted;
  const double n = static_cast<double>(values.size());
  const double sd = sample_std(values);
  if (rule.kind == BandwidthRule::Kind::kScott) return 1.06 * sd * std::pow(n, -0.2);
  const double iqr = empirical_quantile(values, 0.75) - empirical_quantile(values, 0.25);
  const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  return 0.9 * spread * std::pow(n, -0.2);
}

KdeModel fit_kde(std::span<const double> values, BandwidthRule rule) {
  if (values.size() < 2) throw InputError("fit_kde needs at least 2 values");
  for (double v : values)
    if (!std::isfinite(v)) throw InputError("fit_kde values must be finite");
  double h = rule_bandwidth(values, rule);
  bool fallback = false;
  if (!(h > 0.0) || !std::isfinite(h)) {
    h = 1e-3 * std::max(std::abs(values.front()), 1.0);
    fallback = true;
  }
  KdeModel kde(std::vector<double>(values.begin(), values.end()), h);
  if (fallback) kde.mark_fallback();
  return kde;
}

double kde_nll(const KdeModel& kde, double value) {
  if (!std::isfinite(value)) return -kde.log_floor();
  return std::min(-kde.log_density(value), -kde.log_floor());
}

double empirical_quantile(std::span<const double> values, double q) {
  if (values.empty()) throw InputError("quantile of an empty batch");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * std::clamp(q, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace scoped
