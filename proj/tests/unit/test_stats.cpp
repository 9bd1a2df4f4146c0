#include <algorithm>
#include <functional>
#include <random>
#include <sstream>

#include "doctest.h"
#include "vteach/stats.hpp"

using namespace vteach;
using namespace vteach::stats;

namespace {

std::vector<GameUnitResult> synthetic(int reps, int units, const std::function<double(int, int, bool)>& f) {
  std::vector<GameUnitResult> rows;
  for (int r = 0; r < reps; ++r)
    for (int u = 1; u <= units; ++u)
      for (bool c : {false, true}) rows.push_back({r, u, c, Task::fc, f(r, u, c)});
  return rows;
}

}  // namespace

TEST_CASE("descriptive statistics") {
  std::vector<double> v{1, 2, 3, 4, 5};
  CHECK(mean(v) == 3.0);
  CHECK(median(v) == 3.0);
  CHECK(population_sd(v) == doctest::Approx(std::sqrt(2.0)));
  CHECK(sample_variance(v) == doctest::Approx(2.5));
  std::vector<double> even{4, 1, 3, 2};
  CHECK(median(even) == 2.5);
  auto q = quartiles(v);
  CHECK(q.min == 1);
  CHECK(q.q1 == 2);
  CHECK(q.median == 3);
  CHECK(q.q3 == 4);
  CHECK(q.max == 5);
  std::vector<double> one{0.7};
  auto s = quartiles(one);
  CHECK((s.min == 0.7 && s.q1 == 0.7 && s.median == 0.7 && s.q3 == 0.7 && s.max == 0.7));
}

TEST_CASE("incomplete beta and t distribution against reference values") {
  CHECK(incomplete_beta(2.5, 0.5, 0.3) == doctest::Approx(0.018927124071945658).epsilon(1e-12));
  CHECK(incomplete_beta(10, 3, 0.9) == doctest::Approx(0.889130022255).epsilon(1e-10));
  CHECK(incomplete_beta(0.5, 0.5, 0.01) == doctest::Approx(0.06376856085851985).epsilon(1e-12));
  CHECK(incomplete_beta(2, 3, 0.0) == 0.0);
  CHECK(incomplete_beta(2, 3, 1.0) == 1.0);
  CHECK(student_t_cdf(1.5, 3.2) == doctest::Approx(0.887477734079134).epsilon(1e-12));
  CHECK(student_t_cdf(-2.2, 17.0) == doctest::Approx(0.0209623282080312).epsilon(1e-12));
  CHECK(student_t_cdf(0.0, 5.0) == doctest::Approx(0.5));
}

TEST_CASE("welch t-test examples") {
  std::vector<double> a{1, 2, 3, 4, 5}, b{2, 3, 4, 5, 6};
  auto t = welch_t_test(a, b);
  // Reference values from an independent statistics package.
  CHECK(t.t == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(t.p == doctest::Approx(0.34659350708733416).epsilon(1e-12));
  CHECK(t.df == doctest::Approx(8.0).epsilon(1e-12));

  std::vector<double> c{0.91, 0.88, 0.95, 0.9}, d{0.5, 0.61, 0.45, 0.52, 0.58, 0.49};
  auto u = welch_t_test(c, d);
  CHECK(u.t == doctest::Approx(13.541459818668692).epsilon(1e-10));
  CHECK(u.p == doctest::Approx(1.3163021465142464e-06).epsilon(1e-8));
  CHECK(u.df == doctest::Approx(7.627681997513914).epsilon(1e-10));

  auto same = welch_t_test(a, a);
  CHECK(same.t == 0.0);
  CHECK(same.p == 1.0);

  std::vector<double> zeros{0, 0, 0}, ones{1, 1, 1};
  CHECK(welch_t_test(zeros, ones).p == 0.0);
  CHECK(welch_t_test(zeros, zeros).p == 1.0);
  std::vector<double> single{1};
  CHECK_THROWS_AS(welch_t_test(single, a), InvalidArgument);
}

TEST_CASE("t-test symmetry and monotonicity") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0, 1);
  for (int k = 0; k < 200; ++k) {
    std::vector<double> a(3 + k % 7), b(2 + k % 5);
    for (auto& x : a) x = n(rng);
    for (auto& x : b) x = n(rng) + 0.5;
    auto ab = welch_t_test(a, b), ba = welch_t_test(b, a);
    CHECK(ab.t == -ba.t);
    CHECK(ab.p == ba.p);
    CHECK(ab.p >= 0.0);
    CHECK(ab.p <= 1.0);
  }
  double prev = 1.0;
  for (double t = 0.1; t < 10; t += 0.1) {
    const double p = 2.0 * student_t_cdf(-t, 6.5);
    CHECK(p < prev);
    prev = p;
  }
}

TEST_CASE("AUC and threshold crossing") {
  std::vector<double> two{0, 1};
  CHECK(trapezoid_auc(two) == 0.5);
  std::vector<double> flat(7, 0.4);
  CHECK(trapezoid_auc(flat) == doctest::Approx(0.4 * 6));
  std::vector<double> series{0.5, 0.8, 0.92, 0.95};
  CHECK(first_crossing(series, 0.9) == 3);
  std::vector<double> never(7, 0.5);
  CHECK(first_crossing(never, 0.9) == 8);
  std::vector<double> exactly{0.9, 0.91};
  CHECK(first_crossing(exactly, 0.9) == 2);
}

TEST_CASE("h1 on separated groups") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> jitter(0, 1e-3);
  auto rows = synthetic(10, 7, [&](int, int, bool c) { return (c ? 0.9 : 0.5) + jitter(rng); });
  auto r = h1_per_unit(rows);
  CHECK(r.id == "H1");
  REQUIRE(r.comparisons.size() == 7);
  for (const auto& c : r.comparisons) {
    CHECK(c.test.p < 1e-6);
    CHECK(c.mean_connected > c.mean_not_connected);
  }
  CHECK(r.verdict);
}

TEST_CASE("h1 exempts unit 1 and needs the connected arm ahead") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> jitter(0, 1e-3);
  auto rows = synthetic(10, 4, [&](int, int u, bool c) { return (u == 1 ? 0.5 : (c ? 0.9 : 0.5)) + jitter(rng); });
  CHECK(h1_per_unit(rows).verdict);
  auto reversed = synthetic(10, 4, [&](int, int, bool c) { return (c ? 0.5 : 0.9) + jitter(rng); });
  CHECK_FALSE(h1_per_unit(reversed).verdict);
}

TEST_CASE("h1 null case is rarely supported") {
  int supported = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.6, 0.1);
    supported += h1_per_unit(synthetic(10, 7, [&](int, int, bool) { return n(rng); })).verdict;
  }
  CHECK(supported <= 2);
}

TEST_CASE("h1 requires both arms at every unit") {
  auto rows = synthetic(3, 3, [](int r, int, bool) { return 0.1 * r; });
  rows.erase(std::remove_if(rows.begin(), rows.end(), [](const auto& x) { return x.unit == 2 && x.connected; }),
             rows.end());
  CHECK_THROWS_AS(h1_per_unit(rows), IncompleteData);
}

TEST_CASE("h2 AUC") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> jitter(0, 0.02);
  auto rows = synthetic(10, 7, [&](int, int u, bool c) { return (c ? 0.6 + 0.05 * u : 0.4 + 0.02 * u) + jitter(rng); });
  auto r = h2_auc(rows);
  CHECK(r.verdict);
  REQUIRE(r.comparisons.size() == 1);

  // Scaling every similarity scales the AUC means and leaves t unchanged.
  auto scaled = rows;
  for (auto& x : scaled) x.similarity *= 0.5;
  auto s = h2_auc(scaled);
  CHECK(s.comparisons[0].mean_connected == doctest::Approx(0.5 * r.comparisons[0].mean_connected));
  CHECK(s.comparisons[0].mean_not_connected == doctest::Approx(0.5 * r.comparisons[0].mean_not_connected));
  CHECK(s.comparisons[0].test.t == doctest::Approx(r.comparisons[0].test.t).epsilon(1e-12));
}

TEST_CASE("h3 time to threshold with censoring") {
  // Connected crosses at unit 2 or 3, not-connected never crosses.
  auto rows = synthetic(10, 7, [](int r, int u, bool c) { return c ? (u >= 2 + r % 2 ? 0.95 : 0.5) : 0.5; });
  auto h = h3_time_to_threshold(rows, 0.9);
  REQUIRE(h.comparisons.size() == 1);
  CHECK(h.comparisons[0].mean_connected == doctest::Approx(2.5));
  CHECK(h.comparisons[0].mean_not_connected == 8.0);
  CHECK(h.verdict);
}

TEST_CASE("h4 variance") {
  auto constant = synthetic(10, 7, [](int r, int, bool c) { return c ? 0.8 : 0.3 + 0.05 * r; });
  auto h = h4_variance(constant, 4);
  CHECK(h.comparisons[0].mean_connected < 1e-12);
  CHECK(h.verdict);

  // Arms with SD 0.05 vs 0.25 over 4 post-convergence units.
  std::mt19937_64 rng(5);
  std::normal_distribution<double> tight(0.8, 0.05), wide(0.5, 0.25);
  auto rows = synthetic(10, 7, [&](int, int, bool c) { return c ? tight(rng) : wide(rng); });
  auto v = h4_variance(rows, 4);
  CHECK(v.comparisons[0].test.p < 0.05);
  CHECK(v.verdict);
  CHECK_THROWS_AS(h4_variance(synthetic(10, 4, [](int, int, bool) { return 0.5; }), 4), IncompleteData);
}

TEST_CASE("reports are deterministic and thresholds are per task") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n(0.6, 0.2);
  auto rows = synthetic(10, 7, [&](int, int, bool) { return n(rng); });
  auto a = all_reports(rows, Task::fc);
  auto b = all_reports(rows, Task::fc);
  REQUIRE(a.size() == 4);
  std::ostringstream sa, sb;
  for (const auto& r : a) write_report(sa, r);
  for (const auto& r : b) write_report(sb, r);
  CHECK(sa.str() == sb.str());
  CHECK(sa.str().find("p-value") != std::string::npos);

  // Shuffling the input rows does not change the reports.
  auto shuffled = rows;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  std::ostringstream sc;
  for (const auto& r : all_reports(shuffled, Task::fc)) write_report(sc, r);
  CHECK(sc.str() == sa.str());
}

TEST_CASE("MAD outlier filter") {
  auto rows = synthetic(10, 2, [](int r, int, bool) { return 0.5 + 0.01 * r; });
  rows.push_back({10, 1, true, Task::fc, 0.0});
  auto kept = filter_outliers_mad(rows, 3.5);
  CHECK(kept.size() == rows.size() - 1);
  auto flat = synthetic(5, 2, [](int, int, bool) { return 0.5; });
  CHECK(filter_outliers_mad(flat, 3.5).size() == flat.size());
}
