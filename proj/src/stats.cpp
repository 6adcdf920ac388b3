#include "linkcloze/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <ostream>

#include "linkcloze/errors.hpp"

namespace linkcloze {

namespace {

void check_finite(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) throw NumericError("sample contains a non-finite value");
  }
}

// Exact upper and lower tail probabilities of the signed-rank statistic,
// working on doubled ranks so midranks stay integral.
double exact_p(const std::vector<long>& doubled_ranks, long observed) {
  const long total = std::accumulate(doubled_ranks.begin(), doubled_ranks.end(), 0L);
  std::vector<double> counts(static_cast<std::size_t>(total) + 1, 0.0);
  counts[0] = 1.0;
  long reach = 0;
  for (long r : doubled_ranks) {
    for (long s = reach; s >= 0; --s) {
      if (counts[static_cast<std::size_t>(s)] != 0.0) counts[static_cast<std::size_t>(s + r)] += counts[static_cast<std::size_t>(s)];
    }
    reach += r;
  }
  const double outcomes = std::ldexp(1.0, static_cast<int>(doubled_ranks.size()));
  double lower = 0.0;
  double upper = 0.0;
  for (long s = 0; s <= total; ++s) {
    if (s <= observed) lower += counts[static_cast<std::size_t>(s)];
    if (s >= observed) upper += counts[static_cast<std::size_t>(s)];
  }
  return std::min(1.0, 2.0 * std::min(lower, upper) / outcomes);
}

}  // namespace

double wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("paired samples differ in length");
  if (a.empty()) throw ShapeError("paired samples are empty");
  check_finite(a);
  check_finite(b);

  std::vector<double> diffs;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (d != 0.0) diffs.push_back(d);
  }
  const std::size_t n = diffs.size();
  if (n == 0) return 1.0;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return std::abs(diffs[x]) < std::abs(diffs[y]); });
  std::vector<long> doubled(n);
  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && std::abs(diffs[order[j]]) == std::abs(diffs[order[i]])) ++j;
    const long midrank2 = static_cast<long>(i + 1 + j);  // 2 * (i+1 + j) / 2
    for (std::size_t k = i; k < j; ++k) doubled[order[k]] = midrank2;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }
  long w_plus2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (diffs[i] > 0.0) w_plus2 += doubled[i];
  }

  if (n <= kExactWilcoxonLimit) return exact_p(doubled, w_plus2);

  const double nn = static_cast<double>(n);
  const double mean = nn * (nn + 1.0) / 4.0;
  const double variance = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
  if (variance <= 0.0) return 1.0;
  const double deviation = std::max(0.0, std::abs(static_cast<double>(w_plus2) / 2.0 - mean) - 0.5);
  return std::min(1.0, std::erfc(deviation / std::sqrt(variance) / std::sqrt(2.0)));
}

double cliffs_delta(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ShapeError("Cliff's delta needs two non-empty groups");
  check_finite(a);
  check_finite(b);
  long balance = 0;
  for (double x : a) {
    for (double y : b) balance += (x > y) - (x < y);
  }
  return static_cast<double>(balance) / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

std::vector<MetricComparison> compare_reports(std::span<const ReportRow> a, std::span<const ReportRow> b) {
  auto index = [](std::span<const ReportRow> rows, const char* which) {
    std::map<std::string, const ReportRow*> out;
    for (const auto& r : rows) {
      if (!out.emplace(r.project, &r).second) {
        throw ReportMismatchError(std::string(which) + " report lists project '" + r.project + "' twice");
      }
    }
    return out;
  };
  const auto left = index(a, "first");
  const auto right = index(b, "second");
  if (a.empty()) throw ReportMismatchError("reports have no rows");
  for (const auto& [project, row] : left) {
    if (!right.contains(project)) throw ReportMismatchError("project '" + project + "' missing from second report");
  }
  for (const auto& [project, row] : right) {
    if (!left.contains(project)) throw ReportMismatchError("project '" + project + "' missing from first report");
  }

  using Field = Metric MetricReport::*;
  const std::pair<const char*, Field> fields[] = {{"f1", &MetricReport::f1},         {"precision", &MetricReport::precision},
                                                  {"recall", &MetricReport::recall}, {"mcc", &MetricReport::mcc},
                                                  {"auc", &MetricReport::auc},       {"acc", &MetricReport::acc}};
  std::vector<MetricComparison> out;
  for (const auto& [name, field] : fields) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& r : a) {
      xs.push_back((r.report.*field).value);
      ys.push_back((right.at(r.project)->report.*field).value);
    }
    MetricComparison c;
    c.metric = name;
    c.p_value = wilcoxon_signed_rank(xs, ys);
    c.significant = c.p_value < kSignificanceLevel;
    c.cliffs_delta = cliffs_delta(xs, ys);
    c.notable = is_notable(c.cliffs_delta);
    out.push_back(c);
  }
  return out;
}

namespace {

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

void write_comparison_csv(std::ostream& out, std::span<const MetricComparison> rows) {
  out << kComparisonHeader << '\n';
  for (const auto& r : rows) {
    out << r.metric << ',' << fixed4(r.p_value) << ',' << (r.significant ? "true" : "false") << ','
        << fixed4(r.cliffs_delta) << ',' << (r.notable ? "true" : "false") << '\n';
  }
}

void write_comparison_table(std::ostream& out, std::span<const MetricComparison> rows) {
  char line[96];
  std::snprintf(line, sizeof line, "%-10s  %-8s  %-13s\n", "Metric", "p-value", "Cliff's delta");
  out << line << std::string(35, '-') << '\n';
  for (const auto& r : rows) {
    const std::string p = fixed4(r.p_value) + (r.significant ? "*" : "");
    std::snprintf(line, sizeof line, "%-10s  %-8s  %13s\n", r.metric.c_str(), p.c_str(), fixed4(r.cliffs_delta).c_str());
    out << line;
  }
}

}  // namespace linkcloze
