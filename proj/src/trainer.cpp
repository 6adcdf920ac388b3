#include "linkcloze/trainer.hpp"

#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "linkcloze/errors.hpp"

namespace linkcloze {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be non-negative");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (epochs == 0) throw ConfigError("epochs must be positive");
  if (max_len == 0) throw ConfigError("max_len must be positive");
  if (!(grad_clip > 0.0)) throw ConfigError("grad_clip must be positive");
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("threshold must lie in (0, 1)");
  if (adversarial) perturbation.validate();
}

TrainConfig train_config_from(const KeyValueConfig& config, TrainConfig d) {
  auto positive_size = [&config](std::string_view key, std::size_t fallback) {
    auto v = config.get_int(key);
    if (!v) return fallback;
    if (*v <= 0) throw ConfigError(std::string(key) + " must be positive");
    return static_cast<std::size_t>(*v);
  };
  if (auto v = config.get_double("learning_rate")) d.learning_rate = *v;
  if (auto v = config.get_double("weight_decay")) d.weight_decay = *v;
  d.batch_size = positive_size("batch_size", d.batch_size);
  d.epochs = positive_size("epochs", d.epochs);
  d.max_len = positive_size("max_len", d.max_len);
  if (auto v = config.get("architecture")) d.architecture = Architecture::parse(*v);
  if (auto v = config.get_int("seed")) d.seed = static_cast<std::uint64_t>(*v);
  if (auto v = config.get_double("grad_clip")) d.grad_clip = *v;
  if (auto v = config.get("optimizer")) {
    if (*v == "sgd") {
      d.optimizer = OptimizerKind::sgd;
    } else if (*v == "adamw") {
      d.optimizer = OptimizerKind::adamw;
    } else {
      throw ConfigError("optimizer must be sgd or adamw, got '" + *v + "'");
    }
  }
  if (auto v = config.get_double("threshold")) d.threshold = *v;
  if (auto v = config.get_int("pretrain_epochs")) {
    if (*v < 0) throw ConfigError("pretrain_epochs must be non-negative");
    d.pretrain_epochs = static_cast<std::size_t>(*v);
  }
  if (auto v = config.get_bool("adv.enabled")) d.adversarial = *v;
  if (auto v = config.get_bool("adv.combine")) d.adversarial_combine = *v;
  d.perturbation = perturbation_from(config, d.perturbation);
  d.validate();
  return d;
}

ReferenceConfig reference_config_from(const KeyValueConfig& config, ReferenceConfig d) {
  if (auto v = config.get_int("model.width")) d.width = static_cast<std::size_t>(*v);
  if (auto v = config.get_int("model.layers")) d.layers = static_cast<std::size_t>(*v);
  if (auto v = config.get_int("model.heads")) d.heads = static_cast<std::size_t>(*v);
  if (auto v = config.get_int("model.ff_width")) d.ff_width = static_cast<std::size_t>(*v);
  if (auto v = config.get_double("model.init_range")) d.init_range = *v;
  return d;
}

std::vector<PromptTemplate> active_templates(const Architecture& architecture,
                                             std::span<const PromptTemplate> templates) {
  if (templates.empty()) throw ConfigError("no prompt templates configured");
  switch (architecture.kind) {
    case ArchitectureKind::multi:
      return {templates.begin(), templates.end()};
    case ArchitectureKind::cls:
      return {templates.front()};
    case ArchitectureKind::single:
      if (architecture.template_index >= templates.size()) {
        throw ConfigError("architecture " + architecture.name() + " needs " +
                          std::to_string(architecture.template_index + 1) + " templates");
      }
      return {templates[architecture.template_index]};
  }
  throw ConfigError("unknown architecture");
}

std::vector<EncodedExample> encode_examples(const MaskedLanguageModel& backend, const Corpus& corpus,
                                            std::span<const LinkExample> links,
                                            std::span<const PromptTemplate> active, std::size_t max_len) {
  std::vector<EncodedExample> out;
  out.reserve(links.size());
  for (const auto& link : links) {
    EncodedExample ex;
    ex.label = link.label;
    const auto& issue = corpus.issue(link.issue_id);
    const auto& commit = corpus.commit(link.commit_id);
    for (const auto& t : active) ex.prompts.push_back(backend.encode(issue, commit, t, max_len));
    out.push_back(std::move(ex));
  }
  return out;
}

LinkPrediction predict_encoded(const MaskedLanguageModel& backend, ArchitectureKind kind, const VerbalizerIds& ids,
                               const EncodedExample& example) {
  LinkPrediction out;
  out.architecture = kind;
  if (kind == ArchitectureKind::cls) {
    out.probability = cls_probability(backend, example.prompts.front());
    return out;
  }
  for (const auto& p : example.prompts) out.per_template_probabilities.push_back(cloze_probability(backend, p, ids));
  out.probability = std::accumulate(out.per_template_probabilities.begin(), out.per_template_probabilities.end(), 0.0) /
                    static_cast<double>(out.per_template_probabilities.size());
  return out;
}

void write_training_log(std::ostream& out, std::span<const EpochLog> log) {
  out << "epoch,train_loss,valid_acc\n";
  for (const auto& e : log) {
    out << e.epoch << ',' << std::fixed << std::setprecision(6) << e.train_loss << ',' << e.valid_accuracy << '\n';
  }
}

Trainer::Trainer(ReferenceBackend& backend, TrainConfig config, std::span<const PromptTemplate> templates,
                 Verbalizer verbalizer)
    : backend_(backend),
      config_(std::move(config)),
      active_(active_templates(config_.architecture, templates)),
      verbalizer_(std::move(verbalizer)),
      ids_(resolve(verbalizer_, backend_.vocabulary())),
      adversarial_rng_(config_.perturbation.seed),
      first_moment_(backend_.parameters().zeros_like()),
      second_moment_(backend_.parameters().zeros_like()) {
  config_.validate();
#ifdef LINKCLOZE_WITHOUT_ADVERSARIAL
  if (config_.adversarial) throw ConfigError("this build has no adversarial training");
#endif
}

std::vector<EncodedExample> Trainer::encode(const Corpus& corpus, std::span<const LinkExample> links) const {
  return encode_examples(backend_, corpus, links, active_, config_.max_len);
}

LossTarget Trainer::target_for(const PromptedInput& prompt, int label) const {
  if (config_.architecture.kind == ArchitectureKind::cls) return ClsTarget{label};
  return MlmTarget{prompt.mask_position, &ids_, label};
}

double Trainer::train_step(std::span<const EncodedExample> batch) {
  std::vector<const EncodedExample*> ptrs;
  ptrs.reserve(batch.size());
  for (const auto& ex : batch) ptrs.push_back(&ex);
  return train_step(std::span<const EncodedExample* const>(ptrs));
}

double Trainer::train_step(std::span<const EncodedExample* const> batch) {
  if (batch.empty()) throw SizeError("empty training batch");
  auto gradients = backend_.parameters().zeros_like();
  double total = 0.0;
  std::size_t terms = 0;
  for (const auto* ex : batch) {
    for (const auto& prompt : ex->prompts) {
      const auto target = target_for(prompt, ex->label);
#ifndef LINKCLOZE_WITHOUT_ADVERSARIAL
      if (config_.adversarial) {
        const Matrix clean = backend_.embed(prompt);
        std::vector<bool> padding(prompt.token_ids.size());
        for (std::size_t i = 0; i < padding.size(); ++i) padding[i] = prompt.token_ids[i] == Vocabulary::kPad;
        const Matrix adversarial = adversarial_example(
            clean, [&](const Matrix& e) { return backend_.loss_gradient_wrt_embeddings(e, target); },
            config_.perturbation, adversarial_rng_, padding);
        const Matrix delta = adversarial - clean;
        total += backend_.accumulate_gradients(prompt, &delta, target, gradients);
        if (config_.adversarial_combine) total += backend_.accumulate_gradients(prompt, nullptr, target, gradients);
        ++terms;
        continue;
      }
#endif
      total += backend_.accumulate_gradients(prompt, nullptr, target, gradients);
      ++terms;
    }
  }
  const double loss = total / static_cast<double>(terms);
  if (!std::isfinite(loss)) {
    std::ostringstream msg;
    msg << "non-finite training loss " << loss << " at epoch " << epoch_ << ", batch " << batch_;
    throw NumericError(msg.str());
  }
  const double scale = 1.0 / static_cast<double>(terms);
  for (auto t : gradients.tensors()) {
    for (auto& g : t) g *= scale;
  }
  apply_update(gradients);
  return loss;
}

void Trainer::apply_update(ReferenceParameters& gradients) {
  auto grads = gradients.tensors();
  double norm_sq = 0.0;
  for (auto t : grads) {
    for (double g : t) norm_sq += g * g;
  }
  const double norm = std::sqrt(norm_sq);
  if (!std::isfinite(norm)) {
    throw NumericError("non-finite gradient norm at epoch " + std::to_string(epoch_) + ", batch " +
                       std::to_string(batch_));
  }
  const double clip = norm > config_.grad_clip ? config_.grad_clip / norm : 1.0;

  auto params = backend_.parameters().tensors();
  const double lr = config_.learning_rate;
  const double decay = lr * config_.weight_decay;
  if (config_.optimizer == OptimizerKind::sgd) {
    for (std::size_t t = 0; t < params.size(); ++t) {
      for (std::size_t i = 0; i < params[t].size(); ++i) {
        params[t][i] -= decay * params[t][i] + lr * grads[t][i] * clip;
      }
    }
    return;
  }

  // AdamW: decoupled weight decay, bias-corrected moments.
  constexpr double beta1 = 0.9;
  constexpr double beta2 = 0.999;
  constexpr double eps = 1e-8;
  ++updates_;
  const double correction1 = 1.0 - std::pow(beta1, static_cast<double>(updates_));
  const double correction2 = 1.0 - std::pow(beta2, static_cast<double>(updates_));
  auto m = first_moment_.tensors();
  auto v = second_moment_.tensors();
  for (std::size_t t = 0; t < params.size(); ++t) {
    for (std::size_t i = 0; i < params[t].size(); ++i) {
      const double g = grads[t][i] * clip;
      m[t][i] = beta1 * m[t][i] + (1.0 - beta1) * g;
      v[t][i] = beta2 * v[t][i] + (1.0 - beta2) * g * g;
      const double step = (m[t][i] / correction1) / (std::sqrt(v[t][i] / correction2) + eps);
      params[t][i] -= decay * params[t][i] + lr * step;
    }
  }
}

namespace {

// Positions of description and message tokens in an assembled prompt.
std::vector<std::size_t> content_positions(const PromptedInput& prompt) {
  const auto& ids = prompt.token_ids;
  std::vector<std::size_t> out;
  std::size_t i = 3;  // [CLS] issue :
  for (; i < ids.size() && ids[i] != Vocabulary::kSep; ++i) out.push_back(i);
  for (i += 3; i < ids.size() && ids[i] != Vocabulary::kSpe; ++i) out.push_back(i);
  return out;
}

}  // namespace

std::vector<double> Trainer::pretrain(std::span<const EncodedExample> examples, std::size_t epochs) {
  std::vector<double> losses;
  if (examples.empty() || epochs == 0) return losses;
  Rng rng(config_.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t e = 0; e < epochs; ++e) {
    rng.shuffle(std::span(order));
    double total = 0.0;
    std::size_t counted = 0;
    for (std::size_t start = 0; start < order.size(); start += config_.batch_size) {
      const std::size_t end = std::min(order.size(), start + config_.batch_size);
      auto gradients = backend_.parameters().zeros_like();
      double batch_loss = 0.0;
      std::size_t terms = 0;
      for (std::size_t k = start; k < end; ++k) {
        const auto& prompt = examples[order[k]].prompts.front();
        const auto positions = content_positions(prompt);
        if (positions.empty()) continue;
        const std::size_t pos = positions[static_cast<std::size_t>(rng.below(positions.size()))];
        PromptedInput masked = prompt;
        masked.token_ids[pos] = Vocabulary::kMask;
        batch_loss += backend_.accumulate_gradients(masked, nullptr, TokenTarget{pos, prompt.token_ids[pos]}, gradients);
        ++terms;
      }
      if (terms == 0) continue;
      const double scale = 1.0 / static_cast<double>(terms);
      for (auto t : gradients.tensors()) {
        for (auto& g : t) g *= scale;
      }
      apply_update(gradients);
      total += batch_loss;
      counted += terms;
    }
    losses.push_back(counted == 0 ? 0.0 : total / static_cast<double>(counted));
  }
  return losses;
}

double Trainer::mean_loss(std::span<const EncodedExample> examples) const {
  double total = 0.0;
  std::size_t terms = 0;
  for (const auto& ex : examples) {
    for (const auto& prompt : ex.prompts) {
      total += backend_.loss(backend_.embed(prompt), target_for(prompt, ex.label));
      ++terms;
    }
  }
  return terms == 0 ? 0.0 : total / static_cast<double>(terms);
}

std::vector<LinkPrediction> Trainer::predict(std::span<const EncodedExample> examples) const {
  std::vector<LinkPrediction> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) out.push_back(predict_encoded(backend_, config_.architecture.kind, ids_, ex));
  return out;
}

double Trainer::accuracy(std::span<const EncodedExample> examples) const {
  if (examples.empty()) return 0.0;
  std::size_t correct = 0;
  const auto predictions = predict(examples);
  for (std::size_t i = 0; i < examples.size(); ++i) {
    correct += classify(predictions[i], config_.threshold) == examples[i].label ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(examples.size());
}

TrainResult Trainer::fit(const Corpus& corpus, const DatasetSplit& splits) {
  if (splits.train.empty()) throw SizeError("empty training split");
  const auto train = encode(corpus, splits.train);
  const auto valid = encode(corpus, splits.valid);

  Rng order_rng(config_.seed);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  double best_accuracy = -1.0;
  for (epoch_ = 1; epoch_ <= config_.epochs; ++epoch_) {
    order_rng.shuffle(std::span(order));
    double loss_sum = 0.0;
    batch_ = 0;
    for (std::size_t start = 0; start < order.size(); start += config_.batch_size) {
      ++batch_;
      const std::size_t end = std::min(order.size(), start + config_.batch_size);
      std::vector<const EncodedExample*> batch;
      for (std::size_t k = start; k < end; ++k) batch.push_back(&train[order[k]]);
      loss_sum += train_step(batch) * static_cast<double>(batch.size());
    }
    const double valid_accuracy = accuracy(valid);
    result.per_epoch_log.push_back({epoch_, loss_sum / static_cast<double>(train.size()), valid_accuracy});
    if (valid_accuracy > best_accuracy) {
      best_accuracy = valid_accuracy;
      result.best_epoch = epoch_;
      result.best_parameters = backend_.parameters();
    }
  }
  backend_.parameters() = result.best_parameters;
  return result;
}

}  // namespace linkcloze
