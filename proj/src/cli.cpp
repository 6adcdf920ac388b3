#include "linkcloze/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "linkcloze/corpus.hpp"
#include "linkcloze/errors.hpp"
#include "linkcloze/evaluation.hpp"
#include "linkcloze/stats.hpp"
#include "linkcloze/synthetic.hpp"
#include "linkcloze/trainer.hpp"

namespace linkcloze {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kSeedVariable = "MPLINKER_SEED";

std::uint64_t effective_seed(std::uint64_t flag) {
  const char* env = std::getenv(kSeedVariable);
  if (env == nullptr || *env == '\0') return flag;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(env, &used);
    if (used != std::string_view(env).size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError(std::string(kSeedVariable) + " is not an unsigned integer: '" + env + "'");
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error("cannot create directory '" + dir.string() + "'");
}

// A prepared directory or a single JSON-Lines split.
fs::path split_file(const fs::path& corpus, const char* name) {
  return fs::is_directory(corpus) ? corpus / (std::string(name) + ".jsonl") : corpus;
}

Corpus merge(const Corpus& a, const Corpus& b) {
  Corpus out;
  for (const Corpus* c : {&a, &b}) {
    for (const auto& i : c->issues()) {
      if (!out.has_issue(i.issue_id)) out.add_issue(i);
    }
    for (const auto& m : c->commits()) {
      if (!out.has_commit(m.commit_id)) out.add_commit(m);
    }
    for (const auto& l : c->links()) out.add_link(l);
  }
  return out;
}

json templates_json(std::span<const PromptTemplate> templates) {
  json out = json::array();
  for (const auto& t : templates) out.push_back({{"id", t.id()}, {"text", t.text()}});
  return out;
}

std::string project_name(const fs::path& corpus) {
  const fs::path dir = fs::is_directory(corpus) ? corpus : corpus.parent_path();
  const fs::path manifest = dir / "manifest.json";
  if (fs::exists(manifest)) {
    const auto j = json::parse(read_text(manifest), nullptr, false);
    if (j.is_object() && j.contains("project") && j["project"].is_string()) return j["project"].get<std::string>();
  }
  const auto name = (fs::is_directory(corpus) ? corpus : corpus.parent_path()).filename().string();
  return name.empty() ? "project" : name;
}

// --- synth ---------------------------------------------------------------

struct SynthArgs {
  std::string out;
  std::string shape = "overlap";
  std::uint64_t seed = 0;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  const auto seed = effective_seed(a.seed);
  Corpus corpus;
  if (a.shape == "overlap") {
    OverlapCorpusSpec spec;
    spec.seed = seed;
    corpus = make_overlap_corpus(spec);
  } else if (a.shape == "log4net") {
    ShapedCorpusSpec spec;
    spec.seed = seed;
    corpus = make_shaped_corpus(spec);
  } else {
    throw ConfigError("unknown corpus shape '" + a.shape + "' (overlap or log4net)");
  }
  if (fs::path(a.out).has_parent_path()) ensure_directory(fs::path(a.out).parent_path());
  save_corpus(corpus, a.out);
  out << "wrote " << corpus.issues().size() << " issues, " << corpus.commits().size() << " commits, "
      << corpus.true_link_count() << " true and " << corpus.false_link_count() << " false links to " << a.out
      << '\n';
  return kExitOk;
}

// --- prepare -------------------------------------------------------------

struct PrepareArgs {
  std::string corpus;
  std::string out;
  std::uint64_t seed = 0;
  double neg_ratio = 0.0;
  bool group_by_issue = false;
  std::string project;
};

int cmd_prepare(const PrepareArgs& a, std::ostream& out) {
  const auto seed = effective_seed(a.seed);
  if (!fs::exists(a.corpus)) throw Error("corpus not found: '" + a.corpus + "'");
  Corpus corpus = load_corpus(a.corpus);
  std::size_t generated = 0;
  if (a.neg_ratio > 0.0) {
    auto negatives = generate_negatives(corpus, a.neg_ratio, seed);
    generated = negatives.size();
    for (auto& n : negatives) corpus.add_link(std::move(n));
  }
  const auto parts = split(corpus.links(), seed, {a.group_by_issue});
  ensure_directory(a.out);

  json counts = json::object();
  const std::pair<const char*, const std::vector<LinkExample>*> files[] = {
      {"train", &parts.train}, {"valid", &parts.valid}, {"test", &parts.test}};
  for (const auto& [name, links] : files) {
    const Corpus piece = restrict_to(corpus, *links);
    save_corpus(piece, fs::path(a.out) / (std::string(name) + ".jsonl"));
    counts[name] = {{"examples", links->size()}, {"true_links", piece.true_link_count()},
                    {"false_links", piece.false_link_count()}};
  }
  json manifest = {{"project", a.project.empty() ? fs::path(a.corpus).stem().string() : a.project},
                   {"source", fs::path(a.corpus).filename().string()},
                   {"seed", seed},
                   {"negative_ratio", a.neg_ratio},
                   {"generated_negatives", generated},
                   {"group_by_issue", a.group_by_issue},
                   {"counts", counts}};
  write_text(fs::path(a.out) / "manifest.json", manifest.dump(2) + "\n");
  out << "train " << parts.train.size() << ", valid " << parts.valid.size() << ", test " << parts.test.size()
      << " examples written to " << a.out << '\n';
  return kExitOk;
}

// --- train ---------------------------------------------------------------

struct TrainArgs {
  std::string corpus;
  std::string out;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> architecture;
  std::optional<std::string> adv;
  std::optional<long long> epochs, batch_size, max_len, steps, pretrain_epochs;
  std::optional<double> lr, weight_decay, epsilon, alpha;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  KeyValueConfig kv = a.config.empty() ? KeyValueConfig{} : KeyValueConfig::load(a.config);
  auto set = [&kv](const char* key, const auto& value) {
    if (!value) return;
    std::ostringstream s;
    s.precision(17);
    s << *value;
    kv.set(key, s.str());
  };
  set("architecture", a.architecture);
  set("epochs", a.epochs);
  set("batch_size", a.batch_size);
  set("max_len", a.max_len);
  set("learning_rate", a.lr);
  set("weight_decay", a.weight_decay);
  set("adv.epsilon", a.epsilon);
  set("adv.alpha", a.alpha);
  set("adv.steps", a.steps);
  set("pretrain_epochs", a.pretrain_epochs);
  if (a.adv) {
    if (*a.adv != "on" && *a.adv != "off") throw ConfigError("--adv must be on or off");
    kv.set("adv.enabled", *a.adv == "on" ? "true" : "false");
  }
  const std::uint64_t seed = effective_seed(a.seed.value_or(static_cast<std::uint64_t>(kv.get_int("seed").value_or(0))));
  kv.set("seed", std::to_string(seed));
  if (!kv.get("adv.seed")) kv.set("adv.seed", std::to_string(seed));

  const TrainConfig config = train_config_from(kv);
  ReferenceConfig model = reference_config_from(kv);
  model.seed = seed;
  model.max_length = std::max<std::size_t>(model.max_length, config.max_len);
  const PromptConfig prompts = a.config.empty() ? PromptConfig{} : load_prompt_config(a.config);

  const fs::path corpus_path(a.corpus);
  if (!fs::exists(corpus_path)) throw Error("corpus not found: '" + a.corpus + "'");
  if (!fs::is_directory(corpus_path)) throw ConfigError("--corpus must name a prepared directory");
  const Corpus train = load_corpus(split_file(corpus_path, "train"));
  const Corpus valid = load_corpus(split_file(corpus_path, "valid"));
  const Corpus both = merge(train, valid);

  const auto vocab = build_vocabulary(both, prompts.templates, prompts.verbalizer);
  ReferenceBackend backend(vocab, model);
  Trainer trainer(backend, config, prompts.templates, prompts.verbalizer);
  DatasetSplit parts;
  parts.train = train.links();
  parts.valid = valid.links();
  parts.seed = seed;
  const auto pretrain_losses = trainer.pretrain(trainer.encode(both, parts.train), config.pretrain_epochs);
  const TrainResult result = trainer.fit(both, parts);

  ensure_directory(a.out);
  json meta = {{"architecture", config.architecture.name()},
               {"adv", config.adversarial},
               {"templates", templates_json(prompts.templates)},
               {"verbalizer",
                {{"positive", prompts.verbalizer.positive_words()}, {"negative", prompts.verbalizer.negative_words()}}},
               {"max_len", config.max_len},
               {"threshold", config.threshold},
               {"seed", seed},
               {"best_epoch", result.best_epoch},
               {"project", project_name(corpus_path)}};
  save_checkpoint(fs::path(a.out) / "checkpoint.bin", backend, meta);
  std::ostringstream log;
  write_training_log(log, result.per_epoch_log);
  write_text(fs::path(a.out) / "train_log.csv", log.str());
  if (!pretrain_losses.empty()) {
    std::ostringstream pre;
    pre << "epoch,mlm_loss\n";
    for (std::size_t i = 0; i < pretrain_losses.size(); ++i) pre << i + 1 << ',' << pretrain_losses[i] << '\n';
    write_text(fs::path(a.out) / "pretrain_log.csv", pre.str());
  }
  const auto& best = result.per_epoch_log[result.best_epoch - 1];
  out << config.architecture.name() << " adv=" << (config.adversarial ? "on" : "off") << " best epoch "
      << result.best_epoch << " valid acc " << best.valid_accuracy << '\n';
  return kExitOk;
}

// --- evaluate ------------------------------------------------------------

struct EvaluateArgs {
  std::vector<std::string> checkpoints;
  std::string corpus;
  std::string out;
  std::string project;
};

ReportRow evaluate_checkpoint(const fs::path& path, const Corpus& test, const std::string& project) {
  const auto loaded = load_checkpoint(path);
  const auto& meta = loaded.metadata;
  std::vector<PromptTemplate> templates;
  for (const auto& t : meta.at("templates")) templates.emplace_back(t.at("id").get<std::string>(), t.at("text").get<std::string>());
  const Verbalizer verbalizer(meta.at("verbalizer").at("positive").get<std::vector<std::string>>(),
                              meta.at("verbalizer").at("negative").get<std::vector<std::string>>());
  const auto architecture = Architecture::parse(meta.at("architecture").get<std::string>());
  const auto active = active_templates(architecture, templates);
  const auto ids = resolve(verbalizer, loaded.backend.vocabulary());
  const auto encoded =
      encode_examples(loaded.backend, test, test.links(), active, meta.at("max_len").get<std::size_t>());
  std::vector<LinkPrediction> predictions;
  std::vector<int> gold;
  for (const auto& ex : encoded) {
    predictions.push_back(predict_encoded(loaded.backend, architecture.kind, ids, ex));
    gold.push_back(ex.label);
  }
  ReportRow row;
  row.project = project.empty() ? meta.value("project", std::string("project")) : project;
  row.architecture = architecture.name();
  row.adversarial = meta.at("adv").get<bool>();
  row.report = evaluate(predictions, gold, meta.at("threshold").get<double>());
  return row;
}

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  if (!fs::exists(a.corpus)) throw Error("corpus not found: '" + a.corpus + "'");
  const Corpus test = load_corpus(split_file(a.corpus, "test"));
  std::vector<ReportRow> rows;
  for (const auto& c : a.checkpoints) {
    if (!fs::exists(c)) throw Error("checkpoint not found: '" + c + "'");
    rows.push_back(evaluate_checkpoint(c, test, a.project));
  }
  std::ostringstream csv;
  write_report_csv(csv, rows);
  if (!a.out.empty()) {
    if (fs::path(a.out).has_parent_path()) ensure_directory(fs::path(a.out).parent_path());
    write_text(a.out, csv.str());
    write_report_table(out, rows);
  } else {
    out << csv.str();
  }
  return kExitOk;
}

// --- compare -------------------------------------------------------------

struct CompareArgs {
  std::vector<std::string> reports;
  std::string out;
};

int cmd_compare(const CompareArgs& a, std::ostream& out) {
  if (a.reports.size() != 2) throw ConfigError("compare needs exactly two --report files");
  std::vector<std::vector<ReportRow>> parsed;
  for (const auto& r : a.reports) {
    std::ifstream in(r, std::ios::binary);
    if (!in) throw Error("cannot open report '" + r + "'");
    parsed.push_back(parse_report_csv(in));
  }
  const auto rows = compare_reports(parsed[0], parsed[1]);
  std::ostringstream csv;
  write_comparison_csv(csv, rows);
  if (!a.out.empty()) {
    write_text(a.out, csv.str());
    write_comparison_table(out, rows);
  } else {
    out << csv.str();
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Issue-commit link recovery with prompt-tuned masked language models", "linkcloze"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Write a synthetic corpus");
  s->add_option("--out", synth.out, "Output JSON-Lines file")->required();
  s->add_option("--shape", synth.shape, "overlap (lexical-overlap links) or log4net (239/115/266/866 shape)");
  s->add_option("--seed", synth.seed, "Random seed");

  PrepareArgs prepare;
  auto* p = app.add_subcommand("prepare", "Split a corpus into train/valid/test files");
  p->add_option("--corpus", prepare.corpus, "Corpus JSON-Lines file")->required();
  p->add_option("--out", prepare.out, "Output directory")->required();
  p->add_option("--seed", prepare.seed, "Split and sampling seed");
  p->add_option("--neg-ratio", prepare.neg_ratio, "Sample this many negatives per true link (0 keeps the corpus links)");
  p->add_flag("--group-by-issue", prepare.group_by_issue, "Keep all links of an issue in one split");
  p->add_option("--project", prepare.project, "Project name recorded in the manifest");

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Fine-tune the reference backend on a prepared corpus");
  t->add_option("--corpus", train.corpus, "Prepared corpus directory")->required();
  t->add_option("--out", train.out, "Run directory for checkpoint.bin and train_log.csv")->required();
  t->add_option("--config", train.config, "Key-value configuration file");
  t->add_option("--seed", train.seed, "Seed for initialisation, batching and perturbations");
  t->add_option("--architecture", train.architecture, "single1|single2|single3|multi|cls");
  t->add_option("--adv", train.adv, "Adversarial training: on|off");
  t->add_option("--epochs", train.epochs, "Fine-tuning epochs (default 20)");
  t->add_option("--batch-size", train.batch_size, "Examples per update (default 8)");
  t->add_option("--max-len", train.max_len, "Token budget per input (default 512)");
  t->add_option("--lr", train.lr, "Learning rate (default 0.01)");
  t->add_option("--weight-decay", train.weight_decay, "Decoupled weight decay (default 0.01)");
  t->add_option("--epsilon", train.epsilon, "L-infinity perturbation radius");
  t->add_option("--alpha", train.alpha, "Perturbation step size");
  t->add_option("--steps", train.steps, "Perturbation steps");
  t->add_option("--pretrain-epochs", train.pretrain_epochs, "Masked-token warm-up epochs before fine-tuning");

  EvaluateArgs evaluate_args;
  auto* e = app.add_subcommand("evaluate", "Score checkpoints on a test split");
  e->add_option("--checkpoint", evaluate_args.checkpoints, "Checkpoint file (repeatable)")->required();
  e->add_option("--corpus", evaluate_args.corpus, "Prepared directory or test JSON-Lines file")->required();
  e->add_option("--out", evaluate_args.out, "Write the CSV report here and print a table");
  e->add_option("--project", evaluate_args.project, "Project column value");

  CompareArgs compare;
  auto* c = app.add_subcommand("compare", "Wilcoxon signed-rank and Cliff's delta between two reports");
  c->add_option("--report", compare.reports, "Report CSV (give twice)")->required();
  c->add_option("--out", compare.out, "Write the CSV here and print a table");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitInput;
  }

  try {
    if (s->parsed()) return cmd_synth(synth, out);
    if (p->parsed()) return cmd_prepare(prepare, out);
    if (t->parsed()) return cmd_train(train, out);
    if (e->parsed()) return cmd_evaluate(evaluate_args, out);
    if (c->parsed()) return cmd_compare(compare, out);
  } catch (const NumericError& ex) {
    err << "numeric error: " << ex.what() << '\n';
    return kExitNumeric;
  } catch (const ReportMismatchError& ex) {
    err << "report mismatch: " << ex.what() << '\n';
    return kExitMismatch;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitInput;
  } catch (const nlohmann::json::exception& ex) {
    err << "error: malformed JSON: " << ex.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace linkcloze
