#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "linkcloze/adversarial.hpp"
#include "linkcloze/backend.hpp"
#include "linkcloze/corpus.hpp"
#include "linkcloze/kvconfig.hpp"
#include "linkcloze/linker.hpp"
#include "linkcloze/objective.hpp"

namespace linkcloze {

enum class OptimizerKind { sgd, adamw };

struct TrainConfig {
  double learning_rate = 0.01;
  double weight_decay = 0.01;
  std::size_t batch_size = 8;
  std::size_t epochs = 20;
  std::size_t max_len = kDefaultMaxLength;
  Architecture architecture;
  bool adversarial = false;
  // Adds the clean loss to the adversarial one instead of replacing it.
  bool adversarial_combine = false;
  PerturbationConfig perturbation;
  double grad_clip = 1.0;
  OptimizerKind optimizer = OptimizerKind::adamw;
  double threshold = 0.5;
  std::uint64_t seed = 0;
  // Masked-token warm-up epochs run by the CLI before fine-tuning.
  std::size_t pretrain_epochs = 0;

  // Throws ConfigError on a non-positive field or invalid threshold.
  void validate() const;
};

// Overlays the recognised keys of `config` on `defaults`: learning_rate,
// weight_decay, batch_size, epochs, max_len, architecture, seed, grad_clip,
// threshold, pretrain_epochs, adv.enabled, adv.combine, adv.epsilon, adv.alpha, adv.steps, adv.seed.
TrainConfig train_config_from(const KeyValueConfig& config, TrainConfig defaults = {});

// model.width, model.layers, model.heads, model.ff_width, model.init_range.
ReferenceConfig reference_config_from(const KeyValueConfig& config, ReferenceConfig defaults = {});

// One link tokenised under every template the architecture reads.
struct EncodedExample {
  std::vector<PromptedInput> prompts;
  int label = 0;
};

// Templates an architecture consumes, in order.
std::vector<PromptTemplate> active_templates(const Architecture& architecture,
                                             std::span<const PromptTemplate> templates);

std::vector<EncodedExample> encode_examples(const MaskedLanguageModel& backend, const Corpus& corpus,
                                            std::span<const LinkExample> links,
                                            std::span<const PromptTemplate> active, std::size_t max_len);

LinkPrediction predict_encoded(const MaskedLanguageModel& backend, ArchitectureKind kind, const VerbalizerIds& ids,
                               const EncodedExample& example);

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double valid_accuracy = 0.0;

  friend bool operator==(const EpochLog&, const EpochLog&) = default;
};

struct TrainResult {
  ReferenceParameters best_parameters;
  std::size_t best_epoch = 0;  // 1-based
  std::vector<EpochLog> per_epoch_log;
};

// "epoch,train_loss,valid_acc" CSV.
void write_training_log(std::ostream& out, std::span<const EpochLog> log);

// Fine-tunes a reference backend (and its class-token head) with AdamW,
// global-norm gradient clipping and optional PGD adversarial inputs.
class Trainer {
 public:
  Trainer(ReferenceBackend& backend, TrainConfig config, std::span<const PromptTemplate> templates,
          Verbalizer verbalizer);

  std::vector<EncodedExample> encode(const Corpus& corpus, std::span<const LinkExample> links) const;

  // One optimizer update on the mean loss of the batch (and, for multi,
  // of its templates). Returns that mean loss. Throws NumericError on a
  // non-finite loss.
  double train_step(std::span<const EncodedExample* const> batch);
  double train_step(std::span<const EncodedExample> batch);

  // Warm-up on plain masked-token prediction: each epoch masks one random
  // description or message token per example and trains the backend to
  // recover it. Returns the mean loss of each epoch.
  std::vector<double> pretrain(std::span<const EncodedExample> examples, std::size_t epochs);

  // Mean clean loss without updating anything.
  double mean_loss(std::span<const EncodedExample> examples) const;

  std::vector<LinkPrediction> predict(std::span<const EncodedExample> examples) const;
  double accuracy(std::span<const EncodedExample> examples) const;

  // Runs config.epochs epochs, scoring validation accuracy after each, and
  // leaves the backend holding the best epoch's parameters (earliest on ties).
  TrainResult fit(const Corpus& corpus, const DatasetSplit& splits);

  const TrainConfig& config() const noexcept { return config_; }
  const std::vector<PromptTemplate>& templates() const noexcept { return active_; }
  const VerbalizerIds& verbalizer_ids() const noexcept { return ids_; }

 private:
  LossTarget target_for(const PromptedInput& prompt, int label) const;
  void apply_update(ReferenceParameters& gradients);

  ReferenceBackend& backend_;
  TrainConfig config_;
  std::vector<PromptTemplate> active_;
  Verbalizer verbalizer_;
  VerbalizerIds ids_;
  Rng adversarial_rng_;
  ReferenceParameters first_moment_;
  ReferenceParameters second_moment_;
  std::uint64_t updates_ = 0;
  std::size_t epoch_ = 0;
  std::size_t batch_ = 0;
};

}  // namespace linkcloze
