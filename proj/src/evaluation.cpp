#include "linkcloze/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>

#include "linkcloze/errors.hpp"
#include "linkcloze/kvconfig.hpp"

namespace linkcloze {

void ConfusionMatrix::add(int predicted, int gold) {
  if (predicted == 1) {
    ++(gold == 1 ? tp : fp);
  } else {
    ++(gold == 1 ? fn : tn);
  }
}

namespace {

Metric ratio(double num, double den) {
  if (den == 0.0) return {};
  return {num / den, true};
}

}  // namespace

MetricReport metrics(const ConfusionMatrix& cm) {
  const double tp = static_cast<double>(cm.tp);
  const double fp = static_cast<double>(cm.fp);
  const double fn = static_cast<double>(cm.fn);
  const double tn = static_cast<double>(cm.tn);
  MetricReport r;
  r.precision = ratio(tp, tp + fp);
  r.recall = ratio(tp, tp + fn);
  if (r.precision.defined && r.recall.defined) {
    const double p = r.precision.value;
    const double q = r.recall.value;
    r.f1 = {p + q == 0.0 ? 0.0 : 2.0 * p * q / (p + q), true};
  }
  const double den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  r.mcc = ratio(tp * tn - fp * fn, std::sqrt(den));
  r.acc = ratio(tp + tn, tp + fp + fn + tn);
  return r;
}

Metric auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ShapeError("scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) {
        positive_rank_sum += midrank;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) return {};
  const double p = static_cast<double>(positives);
  const double u = positive_rank_sum - p * (p + 1.0) / 2.0;
  return {u / (p * static_cast<double>(negatives)), true};
}

ConfusionMatrix confusion(std::span<const LinkPrediction> predictions, std::span<const int> gold, double threshold) {
  if (predictions.size() != gold.size()) throw ShapeError("predictions and gold labels differ in length");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < gold.size(); ++i) cm.add(classify(predictions[i], threshold), gold[i]);
  return cm;
}

MetricReport evaluate(std::span<const LinkPrediction> predictions, std::span<const int> gold, double threshold) {
  MetricReport report = metrics(confusion(predictions, gold, threshold));
  std::vector<double> scores;
  scores.reserve(predictions.size());
  for (const auto& p : predictions) scores.push_back(p.probability);
  report.auc = auc(scores, gold);
  return report;
}

std::string format_report_row(const ReportRow& row) {
  auto pct = [](const Metric& m) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", 100.0 * m.value);
    return std::string(buf);
  };
  const auto& r = row.report;
  return row.project + ',' + row.architecture + ',' + (row.adversarial ? "on" : "off") + ',' + pct(r.f1) + ',' +
         pct(r.precision) + ',' + pct(r.recall) + ',' + pct(r.mcc) + ',' + pct(r.auc) + ',' + pct(r.acc);
}

void write_report_csv(std::ostream& out, std::span<const ReportRow> rows) {
  out << kReportHeader << '\n';
  for (const auto& row : rows) out << format_report_row(row) << '\n';
}

void write_report_table(std::ostream& out, std::span<const ReportRow> rows) {
  const std::vector<std::string> header{"Project", "Architecture", "Adv", "F1", "Precision",
                                        "Recall",  "MCC",          "AUC", "ACC"};
  std::vector<std::vector<std::string>> cells{header};
  for (const auto& row : rows) cells.push_back(split_list(format_report_row(row), ','));
  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size() && c < widths.size(); ++c) widths[c] = std::max(widths[c], line[c].size());
  }
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t c = 0; c < cells[r].size(); ++c) {
      const auto& cell = cells[r][c];
      const std::string pad(widths[c] - cell.size(), ' ');
      out << (c == 0 ? "" : "  ") << (c < 3 ? cell + pad : pad + cell);
    }
    out << '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : widths) total += w;
      out << std::string(total + 2 * (widths.size() - 1), '-') << '\n';
    }
  }
}

std::vector<ReportRow> parse_report_csv(std::istream& in) {
  std::vector<ReportRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (line_no == 1) {
      if (line != kReportHeader) throw ParseError("unexpected report header", line_no);
      continue;
    }
    const auto fields = split_list(line, ',');
    if (fields.size() != 9) throw ParseError("report row needs 9 fields", line_no);
    ReportRow row;
    row.project = fields[0];
    row.architecture = fields[1];
    if (fields[2] != "on" && fields[2] != "off") throw ParseError("adv must be on or off", line_no);
    row.adversarial = fields[2] == "on";
    Metric* targets[] = {&row.report.f1, &row.report.precision, &row.report.recall,
                         &row.report.mcc, &row.report.auc, &row.report.acc};
    for (std::size_t k = 0; k < 6; ++k) {
      try {
        std::size_t used = 0;
        const double v = std::stod(fields[3 + k], &used);
        if (used != fields[3 + k].size()) throw std::invalid_argument("trailing");
        *targets[k] = {v / 100.0, true};
      } catch (const std::logic_error&) {
        throw ParseError("non-numeric metric '" + fields[3 + k] + "'", line_no);
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace linkcloze
