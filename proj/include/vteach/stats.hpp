#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "vteach/core.hpp"

namespace vteach {

// Evaluation similarity of one repetition after one game unit, in one arm.
struct GameUnitResult {
  int repetition = 0;
  int unit = 1;  // 1-based
  bool connected = false;
  Task task = Task::fc;
  double similarity = 0.0;
};

namespace stats {

inline constexpr double kAlpha = 0.05;
inline constexpr double kThetaFc = 0.9;
inline constexpr double kThetaWesl = 0.75;
inline constexpr int kConvergenceUnitFc = 4;
inline constexpr int kConvergenceUnitWesl = 3;

double mean(std::span<const double> v);
double median(std::span<const double> v);
// Population (divide by n) standard deviation.
double population_sd(std::span<const double> v);
// Sample (divide by n - 1) variance.
double sample_variance(std::span<const double> v);

// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);
// CDF of Student's t distribution with `df` degrees of freedom.
double student_t_cdf(double t, double df);

struct TTest {
  double t = 0.0;
  double p = 1.0;
  double df = 0.0;
};

// Two-sided Welch (unequal variance) t-test of mean(a) - mean(b). When both
// samples have zero variance: p = 1 for equal means, p = 0 otherwise.
TTest welch_t_test(std::span<const double> a, std::span<const double> b);

// Linear-interpolation quantiles (min, Q1, median, Q3, max).
struct Quartiles {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};
Quartiles quartiles(std::span<const double> v);

// Trapezoidal area under a per-unit curve with unit spacing 1.
double trapezoid_auc(std::span<const double> values);

// 1-based index of the first value strictly above theta, or values.size() + 1.
int first_crossing(std::span<const double> values, double theta);

struct Comparison {
  std::string label;
  double mean_not_connected = 0.0;
  double mean_connected = 0.0;
  double median_not_connected = 0.0;
  double median_connected = 0.0;
  TTest test;  // connected minus not-connected
};

struct HypothesisReport {
  std::string id;
  std::vector<Comparison> comparisons;
  bool verdict = false;
};

HypothesisReport h1_per_unit(const std::vector<GameUnitResult>& rows);
HypothesisReport h2_auc(const std::vector<GameUnitResult>& rows);
HypothesisReport h3_time_to_threshold(const std::vector<GameUnitResult>& rows, double theta);
HypothesisReport h4_variance(const std::vector<GameUnitResult>& rows, int convergence_unit);

// All four reports with the per-task thresholds.
std::vector<HypothesisReport> all_reports(const std::vector<GameUnitResult>& rows, Task task);

// Drops rows whose similarity is more than `threshold` scaled MADs from the
// median of their (unit, arm) group.
std::vector<GameUnitResult> filter_outliers_mad(const std::vector<GameUnitResult>& rows,
                                                double threshold);

void write_report(std::ostream& out, const HypothesisReport& r);

}  // namespace stats

using stats::Quartiles;

}  // namespace vteach
