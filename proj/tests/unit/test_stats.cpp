#include <doctest.h>

#include <cmath>
#include <random>

#include "linkcloze/errors.hpp"
#include "linkcloze/stats.hpp"

using namespace linkcloze;

namespace {

// Full 2^n sign enumeration with ranks computed by counting.
double enumerated_p(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) d.push_back(a[i] - b[i]);
  }
  const std::size_t n = d.size();
  if (n == 0) return 1.0;
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    double less = 0, equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      less += std::abs(d[j]) < std::abs(d[i]);
      equal += std::abs(d[j]) == std::abs(d[i]);
    }
    rank[i] = less + (equal + 1) / 2;
  }
  double observed = 0;
  for (std::size_t i = 0; i < n; ++i) observed += d[i] > 0 ? rank[i] : 0.0;
  double le = 0, ge = 0;
  const std::uint64_t outcomes = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < outcomes; ++mask) {
    double w = 0;
    for (std::size_t i = 0; i < n; ++i) w += (mask >> i & 1U) ? rank[i] : 0.0;
    le += w <= observed + 1e-9;
    ge += w >= observed - 1e-9;
  }
  return std::min(1.0, 2.0 * std::min(le, ge) / static_cast<double>(outcomes));
}

ReportRow row(std::string project, double value) {
  ReportRow r;
  r.project = std::move(project);
  r.architecture = "multi";
  for (Metric* m : {&r.report.f1, &r.report.precision, &r.report.recall, &r.report.mcc, &r.report.auc, &r.report.acc}) {
    *m = {value, true};
  }
  return r;
}

}  // namespace

TEST_CASE("wilcoxon exact small-sample values") {
  const std::vector<double> a6{0.91, 0.95, 0.88, 0.97, 0.93, 0.90};
  const std::vector<double> b6{0.80, 0.81, 0.79, 0.70, 0.85, 0.60};
  CHECK(wilcoxon_signed_rank(a6, b6) == doctest::Approx(0.03125).epsilon(1e-12));
  const std::vector<double> a5{5, 6, 7, 8, 9};
  const std::vector<double> b5{4, 4, 4, 4, 4};
  CHECK(wilcoxon_signed_rank(a5, b5) == doctest::Approx(0.0625).epsilon(1e-12));
  CHECK(wilcoxon_signed_rank(a6, a6) == 1.0);
}

TEST_CASE("wilcoxon drops zero differences") {
  const std::vector<double> a{1, 2, 3, 4, 5, 6, 7, 8};
  const std::vector<double> b{1, 2, 2, 3, 4, 5, 6, 7};
  // Six positive differences remain after dropping two zeros.
  CHECK(wilcoxon_signed_rank(a, b) == doctest::Approx(0.03125).epsilon(1e-12));
}

TEST_CASE("wilcoxon exact path equals 2^n enumeration") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + gen() % 10;
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = static_cast<double>(gen() % 7);  // small integers force ties and zeros
      b[i] = static_cast<double>(gen() % 7);
    }
    CHECK(std::abs(wilcoxon_signed_rank(a, b) - enumerated_p(a, b)) <= 1e-12);
  }
}

TEST_CASE("wilcoxon normal approximation stays close to the exact tail") {
  std::mt19937_64 gen(9);
  std::normal_distribution<double> noise(0.3, 1.0);
  std::vector<double> a(26), b(26, 0.0);
  for (auto& x : a) x = noise(gen);
  const double approx = wilcoxon_signed_rank(a, b);
  std::vector<double> a25(a.begin(), a.begin() + 25), b25(25, 0.0);
  const double exact = wilcoxon_signed_rank(a25, b25);
  CHECK(approx > 0.0);
  CHECK(approx <= 1.0);
  CHECK(std::abs(approx - exact) < 0.1);
}

TEST_CASE("wilcoxon is unchanged by a shared increasing affine map") {
  std::mt19937_64 gen(13);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + gen() % 12;
    std::vector<double> a(n), b(n), ta(n), tb(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = std::round(u(gen) * 64) / 64;
      b[i] = std::round(u(gen) * 64) / 64;
      ta[i] = 4 * a[i] + 0.5;
      tb[i] = 4 * b[i] + 0.5;
    }
    CHECK(wilcoxon_signed_rank(a, b) == doctest::Approx(wilcoxon_signed_rank(ta, tb)).epsilon(1e-12));
  }
}

TEST_CASE("wilcoxon input validation") {
  const std::vector<double> a{1, 2};
  const std::vector<double> b{1};
  const std::vector<double> empty;
  const std::vector<double> nan{1, std::nan("")};
  CHECK_THROWS_AS(wilcoxon_signed_rank(a, b), ShapeError);
  CHECK_THROWS_AS(wilcoxon_signed_rank(empty, empty), ShapeError);
  CHECK_THROWS_AS(wilcoxon_signed_rank(a, nan), NumericError);
}

TEST_CASE("cliffs delta") {
  const std::vector<double> hi{0.9, 0.91, 0.92, 0.93, 0.94, 0.95};
  const std::vector<double> lo{0.5, 0.6, 0.7, 0.8, 0.85, 0.89};
  CHECK(cliffs_delta(hi, lo) == 1.0);
  CHECK(cliffs_delta(hi, hi) == 0.0);
  const std::vector<double> a{1, 2};
  const std::vector<double> b{1.5};
  CHECK(cliffs_delta(a, b) == 0.0);
  CHECK(is_notable(0.33));
  CHECK_FALSE(is_notable(0.3299));
  CHECK_THROWS_AS(cliffs_delta(a, std::vector<double>{}), ShapeError);

  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(1 + gen() % 9), y(1 + gen() % 9);
    for (auto& v : x) v = static_cast<double>(gen() % 5);
    for (auto& v : y) v = static_cast<double>(gen() % 5);
    CHECK(cliffs_delta(x, y) == -cliffs_delta(y, x));
  }
}

TEST_CASE("compare_reports pairs projects and flags significance") {
  const char* names[] = {"p1", "p2", "p3", "p4", "p5", "p6"};
  std::vector<ReportRow> strong, weak;
  for (int i = 0; i < 6; ++i) {
    strong.push_back(row(names[i], 0.90 + 0.01 * i));
    weak.push_back(row(names[5 - i], 0.50 + 0.02 * i));
  }
  const auto cmp = compare_reports(strong, weak);
  REQUIRE(cmp.size() == 6);
  for (const auto& c : cmp) {
    CHECK(c.p_value == doctest::Approx(0.03125).epsilon(1e-12));
    CHECK(c.significant);
    CHECK(c.cliffs_delta == 1.0);
    CHECK(c.notable);
  }
  const auto self = compare_reports(strong, strong);
  for (const auto& c : self) {
    CHECK(c.p_value == 1.0);
    CHECK(c.cliffs_delta == 0.0);
    CHECK_FALSE(c.significant);
  }
  auto missing = weak;
  missing.pop_back();
  CHECK_THROWS_AS(compare_reports(strong, missing), ReportMismatchError);
  auto duplicated = weak;
  duplicated.back().project = duplicated.front().project;
  CHECK_THROWS_AS(compare_reports(strong, duplicated), ReportMismatchError);
}
