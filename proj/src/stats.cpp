#include "vteach/stats.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <utility>

#include "vteach/error.hpp"

namespace vteach::stats {

namespace {

void require_non_empty(std::span<const double> v, const char* what) {
  if (v.empty()) throw InvalidArgument(std::string(what) + " needs a non-empty sample");
}

// Continued fraction for I_x(a, b) by the modified Lentz method.
double beta_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

// Rows grouped by arm then unit.
using Grouped = std::map<std::pair<bool, int>, std::vector<const GameUnitResult*>>;

Grouped group(const std::vector<GameUnitResult>& rows) {
  if (rows.empty()) throw IncompleteData("no results to analyse");
  Grouped g;
  for (const auto& r : rows) g[{r.connected, r.unit}].push_back(&r);
  return g;
}

std::vector<int> units_of(const std::vector<GameUnitResult>& rows) {
  std::set<int> s;
  for (const auto& r : rows) s.insert(r.unit);
  return {s.begin(), s.end()};
}

// Per-repetition curves for one arm, indexed by unit order. Every repetition
// must report every unit.
std::map<int, std::vector<double>> curves(const std::vector<GameUnitResult>& rows, bool connected,
                                          const std::vector<int>& units) {
  std::map<int, std::map<int, double>> by_rep;
  for (const auto& r : rows) {
    if (r.connected == connected) by_rep[r.repetition][r.unit] = r.similarity;
  }
  if (by_rep.empty()) {
    throw IncompleteData(std::string("no results for the ") +
                         (connected ? "connected" : "not-connected") + " arm");
  }
  std::map<int, std::vector<double>> out;
  for (const auto& [rep, m] : by_rep) {
    std::vector<double> curve;
    for (int u : units) {
      const auto it = m.find(u);
      if (it == m.end()) {
        throw IncompleteData("repetition " + std::to_string(rep) + " has no result for unit " +
                             std::to_string(u));
      }
      curve.push_back(it->second);
    }
    out[rep] = std::move(curve);
  }
  return out;
}

Comparison compare(std::string label, std::span<const double> not_connected,
                   std::span<const double> connected) {
  Comparison c;
  c.label = std::move(label);
  c.mean_not_connected = mean(not_connected);
  c.mean_connected = mean(connected);
  c.median_not_connected = median(not_connected);
  c.median_connected = median(connected);
  c.test = welch_t_test(connected, not_connected);
  return c;
}

std::string format_unit(int u) { return "unit " + std::to_string(u); }

}  // namespace

double mean(std::span<const double> v) {
  require_non_empty(v, "mean");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median(std::span<const double> v) { return quartiles(v).median; }

double population_sd(std::span<const double> v) {
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

double sample_variance(std::span<const double> v) {
  if (v.size() < 2) throw InvalidArgument("sample variance needs at least 2 values");
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw InvalidArgument("incomplete_beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw InvalidArgument("incomplete_beta needs x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_fraction(a, b, x) / a;
  return 1.0 - front * beta_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
  if (!(df > 0.0)) throw InvalidArgument("student_t_cdf needs df > 0");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double tail = 0.5 * incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
  return t > 0 ? 1.0 - tail : tail;
}

TTest welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw InvalidArgument("welch_t_test needs at least 2 values per sample");
  const double ma = mean(a);
  const double mb = mean(b);
  const double va = sample_variance(a) / static_cast<double>(a.size());
  const double vb = sample_variance(b) / static_cast<double>(b.size());
  const double se2 = va + vb;
  TTest r;
  if (se2 == 0.0) {
    const double diff = ma - mb;
    if (diff == 0.0) return {0.0, 1.0, static_cast<double>(a.size() + b.size() - 2)};
    return {diff > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity(),
            0.0, static_cast<double>(a.size() + b.size() - 2)};
  }
  r.t = (ma - mb) / std::sqrt(se2);
  const double na1 = static_cast<double>(a.size() - 1);
  const double nb1 = static_cast<double>(b.size() - 1);
  r.df = se2 * se2 / (va * va / na1 + vb * vb / nb1);
  r.p = incomplete_beta(r.df / 2.0, 0.5, r.df / (r.df + r.t * r.t));
  return r;
}

Quartiles quartiles(std::span<const double> v) {
  require_non_empty(v, "quartiles");
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  const auto at = [&](double q) {
    const double pos = q * static_cast<double>(s.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, s.size() - 1);
    return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
  };
  return {s.front(), at(0.25), at(0.5), at(0.75), s.back()};
}

double trapezoid_auc(std::span<const double> values) {
  if (values.size() < 2) throw InvalidArgument("trapezoid_auc needs at least 2 values");
  double area = 0.0;
  for (std::size_t i = 1; i < values.size(); ++i) area += 0.5 * (values[i - 1] + values[i]);
  return area;
}

int first_crossing(std::span<const double> values, double theta) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > theta) return static_cast<int>(i) + 1;
  }
  return static_cast<int>(values.size()) + 1;
}

HypothesisReport h1_per_unit(const std::vector<GameUnitResult>& rows) {
  const Grouped g = group(rows);
  const std::vector<int> units = units_of(rows);
  HypothesisReport r{"H1", {}, true};
  const bool has_later = units.back() >= 2;
  for (int u : units) {
    const auto nc = g.find({false, u});
    const auto c = g.find({true, u});
    if (nc == g.end() || c == g.end()) {
      throw IncompleteData("unit " + std::to_string(u) + " is missing an arm");
    }
    std::vector<double> a;
    std::vector<double> b;
    for (const auto* x : nc->second) a.push_back(x->similarity);
    for (const auto* x : c->second) b.push_back(x->similarity);
    Comparison cmp = compare(format_unit(u), a, b);
    if (u >= 2 || !has_later) {
      r.verdict = r.verdict && cmp.test.p < kAlpha && cmp.test.t > 0;
    }
    r.comparisons.push_back(std::move(cmp));
  }
  return r;
}

HypothesisReport h2_auc(const std::vector<GameUnitResult>& rows) {
  const std::vector<int> units = units_of(rows);
  std::vector<double> a;
  std::vector<double> b;
  for (const auto& [rep, curve] : curves(rows, false, units)) a.push_back(trapezoid_auc(curve));
  for (const auto& [rep, curve] : curves(rows, true, units)) b.push_back(trapezoid_auc(curve));
  Comparison cmp = compare("AUC", a, b);
  const bool verdict = cmp.test.p < kAlpha && cmp.test.t > 0;
  return {"H2", {std::move(cmp)}, verdict};
}

HypothesisReport h3_time_to_threshold(const std::vector<GameUnitResult>& rows, double theta) {
  const std::vector<int> units = units_of(rows);
  std::vector<double> a;
  std::vector<double> b;
  for (const auto& [rep, curve] : curves(rows, false, units)) a.push_back(first_crossing(curve, theta));
  for (const auto& [rep, curve] : curves(rows, true, units)) b.push_back(first_crossing(curve, theta));
  Comparison cmp = compare("time to threshold", a, b);
  const bool verdict = cmp.test.p < kAlpha && cmp.test.t < 0;
  return {"H3", {std::move(cmp)}, verdict};
}

HypothesisReport h4_variance(const std::vector<GameUnitResult>& rows, int convergence_unit) {
  const Grouped g = group(rows);
  std::vector<int> late;
  for (int u : units_of(rows)) {
    if (u >= convergence_unit) late.push_back(u);
  }
  if (late.size() < 2) {
    throw IncompleteData("variance comparison needs at least 2 units from unit " +
                         std::to_string(convergence_unit));
  }
  std::vector<double> a;
  std::vector<double> b;
  for (int u : late) {
    for (bool connected : {false, true}) {
      const auto it = g.find({connected, u});
      if (it == g.end()) throw IncompleteData("unit " + std::to_string(u) + " is missing an arm");
      std::vector<double> v;
      for (const auto* x : it->second) v.push_back(x->similarity);
      (connected ? b : a).push_back(population_sd(v));
    }
  }
  Comparison cmp = compare("per-unit SD", a, b);
  const bool verdict = cmp.test.p < kAlpha && cmp.test.t < 0;
  return {"H4", {std::move(cmp)}, verdict};
}

std::vector<HypothesisReport> all_reports(const std::vector<GameUnitResult>& rows, Task task) {
  const bool fc = task == Task::fc;
  return {h1_per_unit(rows), h2_auc(rows), h3_time_to_threshold(rows, fc ? kThetaFc : kThetaWesl),
          h4_variance(rows, fc ? kConvergenceUnitFc : kConvergenceUnitWesl)};
}

std::vector<GameUnitResult> filter_outliers_mad(const std::vector<GameUnitResult>& rows,
                                                double threshold) {
  if (!(threshold > 0.0)) throw InvalidArgument("MAD threshold must be positive");
  // 1.4826 makes the MAD a consistent estimator of a normal SD.
  constexpr double kNormalScale = 1.4826;
  const Grouped g = group(rows);
  std::map<std::pair<bool, int>, std::pair<double, double>> centre;
  for (const auto& [key, members] : g) {
    std::vector<double> v;
    for (const auto* x : members) v.push_back(x->similarity);
    const double med = median(v);
    for (double& x : v) x = std::abs(x - med);
    centre[key] = {med, kNormalScale * median(v)};
  }
  std::vector<GameUnitResult> out;
  for (const auto& r : rows) {
    const auto [med, mad] = centre.at({r.connected, r.unit});
    if (mad == 0.0 || std::abs(r.similarity - med) <= threshold * mad) out.push_back(r);
  }
  return out;
}

void write_report(std::ostream& out, const HypothesisReport& r) {
  out << r.id << ": " << (r.verdict ? "supported" : "not supported") << '\n';
  out << std::left << std::setw(20) << "comparison" << std::right << std::setw(18) << "mean not-connected"
      << std::setw(16) << "mean connected" << std::setw(12) << "t" << std::setw(12) << "p-value" << '\n';
  const auto flags = out.flags();
  for (const auto& c : r.comparisons) {
    out << std::left << std::setw(20) << c.label << std::right << std::fixed << std::setprecision(4)
        << std::setw(18) << c.mean_not_connected << std::setw(16) << c.mean_connected << std::setw(12)
        << c.test.t << std::setw(12) << std::scientific << std::setprecision(3) << c.test.p << '\n';
    out.flags(flags);
  }
}

}  // namespace vteach::stats
