#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "linkcloze/linker.hpp"

namespace linkcloze {

struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const noexcept { return tp + fp + fn + tn; }
  void add(int predicted, int gold);

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

// A metric whose denominator vanished reports 0 with `defined` false.
struct Metric {
  double value = 0.0;
  bool defined = false;

  friend bool operator==(const Metric&, const Metric&) = default;
};

struct MetricReport {
  Metric precision;
  Metric recall;
  Metric f1;
  Metric mcc;
  Metric acc;
  Metric auc;
};

// Precision, recall, F1, MCC and accuracy; auc is left undefined.
MetricReport metrics(const ConfusionMatrix& cm);

// Mann-Whitney AUC with midranks for tied scores. Undefined unless both
// classes occur. Throws ShapeError on a length mismatch.
Metric auc(std::span<const double> scores, std::span<const int> labels);

// Throws ShapeError on a length mismatch.
ConfusionMatrix confusion(std::span<const LinkPrediction> predictions, std::span<const int> gold,
                          double threshold = 0.5);
MetricReport evaluate(std::span<const LinkPrediction> predictions, std::span<const int> gold,
                      double threshold = 0.5);

// One row of a results table.
struct ReportRow {
  std::string project;
  std::string architecture;
  bool adversarial = false;
  MetricReport report;
};

inline constexpr const char* kReportHeader = "project,architecture,adv,f1,precision,recall,mcc,auc,acc";

// Metrics as percentages with two decimals.
std::string format_report_row(const ReportRow& row);
void write_report_csv(std::ostream& out, std::span<const ReportRow> rows);
void write_report_table(std::ostream& out, std::span<const ReportRow> rows);

// Parses a report CSV written by write_report_csv (percent values kept as-is).
std::vector<ReportRow> parse_report_csv(std::istream& in);

}  // namespace linkcloze
