#pragma once

#include <cmath>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "linkcloze/evaluation.hpp"

namespace linkcloze {

inline constexpr std::size_t kExactWilcoxonLimit = 25;
inline constexpr double kSignificanceLevel = 0.05;
inline constexpr double kNotableDelta = 0.33;

// Two-sided Wilcoxon signed-rank p-value for paired samples. Zero
// differences are dropped and tied magnitudes share midranks; the null
// distribution is enumerated exactly up to kExactWilcoxonLimit pairs and
// approximated by a tie- and continuity-corrected normal above. Returns 1
// when every difference is zero. Throws ShapeError on unequal or empty
// samples and NumericError on non-finite entries.
double wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

// (#{a_i > b_j} - #{a_i < b_j}) / (|a| |b|). Throws ShapeError on an empty group.
double cliffs_delta(std::span<const double> a, std::span<const double> b);

inline bool is_notable(double delta) { return std::abs(delta) >= kNotableDelta; }

struct MetricComparison {
  std::string metric;
  double p_value = 1.0;
  bool significant = false;
  double cliffs_delta = 0.0;
  bool notable = false;
};

// Pairs rows by project; every metric column becomes one comparison.
// Throws ReportMismatchError unless both reports list the same projects once each.
std::vector<MetricComparison> compare_reports(std::span<const ReportRow> a, std::span<const ReportRow> b);

inline constexpr const char* kComparisonHeader = "metric,p_value,significant,cliffs_delta,notable";

void write_comparison_csv(std::ostream& out, std::span<const MetricComparison> rows);
void write_comparison_table(std::ostream& out, std::span<const MetricComparison> rows);

}  // namespace linkcloze
