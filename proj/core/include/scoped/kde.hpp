#pragma once

#include <cmath>
#include <span>
#include <string_view>
#include <vector>

namespace scoped {

struct BandwidthRule {
  enum class Kind { kSilverman, kScott, kFixed };
  Kind kind = Kind::kSilverman;
  double value = 0.0;  // bandwidth for kFixed

  static BandwidthRule silverman() { return {Kind::kSilverman, 0.0}; }
  static BandwidthRule scott() { return {Kind::kScott, 0.0}; }
  static BandwidthRule fixed(double b) { return {Kind::kFixed, b}; }
};

// "silverman", "scott", or a positive number for a fixed bandwidth.
BandwidthRule parse_bandwidth_rule(std::string_view text);

inline const double kDefaultLogFloor = std::log(1e-300);

// One-dimensional Gaussian-kernel density estimate.
class KdeModel {
 public:
  KdeModel(std::vector<double> points, double bandwidth, double log_floor = kDefaultLogFloor);

  const std::vector<double>& points() const { return points_; }
  double bandwidth() const { return bandwidth_; }
  double log_floor() const { return log_floor_; }
  // Set when the rule collapsed on identical values and a fixed fallback was used.
  bool fallback() const { return fallback_; }
  void mark_fallback() { fallback_ = true; }

  // Unfloored log density (finite wherever exp underflows, via log-sum-exp).
  double log_density(double x) const;
  double density(double x) const { return std::exp(log_density(x)); }
  // Same, with the point at `skip` (index into points()) left out.
  double log_density_excluding(double x, std::size_t skip) const;
  double median() const { return median_; }

 private:
  std::vector<double> points_;
  std::vector<double> sorted_;  // evaluation order, independent of input order
  double bandwidth_;
  double log_floor_;
  double median_ = 0.0;
  bool fallback_ = false;
};

// Silverman: 0.9 * min(std, IQR/1.34) * n^(-1/5); Scott: 1.06 * std * n^(-1/5).
double rule_bandwidth(std::span<const double> values, BandwidthRule rule);

KdeModel fit_kde(std::span<const double> values, BandwidthRule rule = BandwidthRule::silverman());

// -log h(value), capped at -log_floor.
double kde_nll(const KdeModel& kde, double value);

// Linear-interpolated empirical quantile (order statistics at (n-1) q).
double empirical_quantile(std::span<const double> values, double q);

}  // namespace scoped
