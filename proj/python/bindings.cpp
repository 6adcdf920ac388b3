#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "linkcloze/adversarial.hpp"
#include "linkcloze/cli.hpp"
#include "linkcloze/corpus.hpp"
#include "linkcloze/evaluation.hpp"
#include "linkcloze/objective.hpp"
#include "linkcloze/prompting.hpp"
#include "linkcloze/stats.hpp"
#include "linkcloze/synthetic.hpp"

namespace py = pybind11;
using namespace linkcloze;

namespace {

py::object metric_value(const Metric& m) { return m.defined ? py::cast(m.value) : py::none(); }

py::dict report_dict(const MetricReport& r) {
  py::dict d;
  d["precision"] = metric_value(r.precision);
  d["recall"] = metric_value(r.recall);
  d["f1"] = metric_value(r.f1);
  d["mcc"] = metric_value(r.mcc);
  d["acc"] = metric_value(r.acc);
  d["auc"] = metric_value(r.auc);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Prompt-based issue-commit link recovery";

  m.def(
      "metrics",
      [](std::uint64_t tp, std::uint64_t fp, std::uint64_t fn, std::uint64_t tn) {
        return report_dict(metrics({tp, fp, fn, tn}));
      },
      py::arg("tp"), py::arg("fp"), py::arg("fn"), py::arg("tn"),
      "Threshold metrics of a confusion matrix; undefined entries are None.");

  m.def(
      "auc",
      [](const std::vector<double>& scores, const std::vector<int>& labels) {
        return metric_value(auc(scores, labels));
      },
      py::arg("scores"), py::arg("labels"));

  m.def(
      "wilcoxon",
      [](const std::vector<double>& a, const std::vector<double>& b) { return wilcoxon_signed_rank(a, b); },
      py::arg("a"), py::arg("b"), "Two-sided Wilcoxon signed-rank p-value.");

  m.def(
      "cliffs_delta", [](const std::vector<double>& a, const std::vector<double>& b) { return cliffs_delta(a, b); },
      py::arg("a"), py::arg("b"));

  m.def(
      "label_probability",
      [](const Vector& probs, const std::vector<int>& positive, const std::vector<int>& negative) {
        return label_probability(probs, VerbalizerIds{positive, negative});
      },
      py::arg("probs"), py::arg("positive"), py::arg("negative"));

  m.def(
      "pgd_step",
      [](const Matrix& delta, const Matrix& grad, double alpha, double epsilon) {
        return pgd_step(delta, grad, alpha, epsilon);
      },
      py::arg("delta"), py::arg("grad"), py::arg("alpha"), py::arg("epsilon"));

  m.def(
      "default_templates",
      [] {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& t : default_templates()) out.emplace_back(t.id(), t.text());
        return out;
      },
      "(id, text) pairs of the built-in templates.");

  m.def(
      "render",
      [](const std::string& description, const std::string& message, const std::string& code,
         const std::string& template_text) {
        return render({"issue", description}, {"commit", message, code}, PromptTemplate("t", template_text));
      },
      py::arg("description"), py::arg("message"), py::arg("code"), py::arg("template"));

  m.def(
      "synth_overlap",
      [](std::size_t true_links, double negative_ratio, std::uint64_t seed) {
        OverlapCorpusSpec spec;
        spec.true_links = true_links;
        spec.negative_ratio = negative_ratio;
        spec.seed = seed;
        std::ostringstream out;
        write_corpus(make_overlap_corpus(spec), out);
        return out.str();
      },
      py::arg("true_links") = 500, py::arg("negative_ratio") = 3.0, py::arg("seed") = 0,
      "Synthetic corpus as JSON lines.");

  m.def(
      "split_sizes",
      [](const std::string& corpus_jsonl, std::uint64_t seed) {
        std::istringstream in(corpus_jsonl);
        const Corpus c = parse_corpus(in);
        const auto s = split(c.links(), seed);
        return py::make_tuple(s.train.size(), s.valid.size(), s.test.size());
      },
      py::arg("corpus_jsonl"), py::arg("seed"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command line in-process; returns (exit_code, stdout, stderr).");
}
