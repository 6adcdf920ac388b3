#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include <json.hpp>

#include "linkcloze/prompting.hpp"
#include "linkcloze/tensor.hpp"
#include "linkcloze/vocabulary.hpp"

namespace linkcloze {

struct BackendOutput {
  Matrix vocab_logits;  // L x |V|
  Vector cls_hidden;    // d
};

// Two-class affine head on the class-token state; column 1 is "linked".
struct ClsHead {
  Matrix weight;  // d x 2
  Vector bias;    // 2

  static ClsHead zeros(std::size_t width);
  Vector logits(const Eigen::Ref<const Vector>& hidden) const;
};

// Verbalized cloze objective at the mask position.
struct MlmTarget {
  std::size_t mask_position = 0;
  const VerbalizerIds* verbalizer = nullptr;
  int label = 0;
};

// Two-class objective on the class-token state.
struct ClsTarget {
  int label = 0;
};

// Plain masked-language-model objective: recover `token` at `position`.
struct TokenTarget {
  std::size_t position = 0;
  int token = 0;
};

using LossTarget = std::variant<MlmTarget, ClsTarget, TokenTarget>;

// Masked-LM contract. Any backend (the reference encoder here, or a wrapper
// around a pre-trained model) exposes embeddings and a forward pass that
// starts from them, which is what embedding-space perturbation needs.
class MaskedLanguageModel {
 public:
  virtual ~MaskedLanguageModel() = default;

  virtual const Vocabulary& vocabulary() const = 0;
  virtual std::size_t width() const = 0;
  virtual std::size_t max_length() const = 0;

  // Tokenisation is the backend's business; the default uses the
  // reference tokenizer over vocabulary().
  virtual PromptedInput encode(const IssueArtifact& issue, const CommitArtifact& commit,
                               const PromptTemplate& prompt, std::size_t max_len) const;

  // Throws VocabularyError on an out-of-range id.
  virtual Matrix embed(const PromptedInput& input) const = 0;

  // Throws NumericError on non-finite input, ShapeError on a width mismatch.
  virtual BackendOutput forward_from_embeddings(const Matrix& embeddings) const = 0;

  // Logits of a single position; backends may skip the other rows.
  virtual Vector mask_logits(const Matrix& embeddings, std::size_t position) const;

  virtual const ClsHead& cls_head() const = 0;
  virtual Vector cls_logits(const Matrix& embeddings) const;

  virtual Matrix loss_gradient_wrt_embeddings(const Matrix& embeddings, const LossTarget& target) const = 0;

  double loss(const Matrix& embeddings, const LossTarget& target) const;
  BackendOutput forward(const PromptedInput& input) const { return forward_from_embeddings(embed(input)); }
};

struct ReferenceConfig {
  std::size_t width = 32;
  std::size_t layers = 2;
  std::size_t heads = 2;
  std::size_t ff_width = 64;
  std::size_t max_length = kDefaultMaxLength;
  double init_range = 0.1;
  std::uint64_t seed = 0;

  friend bool operator==(const ReferenceConfig&, const ReferenceConfig&) = default;
};

struct EncoderLayer {
  Vector ln1_gain, ln1_bias;
  Matrix wq, wk, wv, wo;  // d x d, applied as x * W
  Vector bq, bk, bv, bo;
  Vector ln2_gain, ln2_bias;
  Matrix w1;  // d x ff
  Vector b1;
  Matrix w2;  // ff x d
  Vector b2;
};

struct ReferenceParameters {
  Matrix token_embedding;     // |V| x d, also the output projection
  Matrix position_embedding;  // max_length x d
  std::vector<EncoderLayer> layers;
  Vector final_gain, final_bias;
  Vector output_bias;  // |V|
  ClsHead cls_head;

  // Views over every tensor in a fixed order (optimizer, checkpoint, hashing).
  std::vector<std::span<double>> tensors();
  std::vector<std::span<const double>> tensors() const;

  ReferenceParameters zeros_like() const;
  std::size_t size() const;
};

// Pre-norm transformer encoder: token + learned position embeddings,
// multi-head self-attention and GELU feed-forward blocks, a final layer norm,
// an MLM head tied to the token embeddings and a two-class head on [CLS].
class ReferenceBackend final : public MaskedLanguageModel {
 public:
  // Weights ~ U(-init_range, init_range); layer-norm gains 1, biases 0.
  ReferenceBackend(Vocabulary vocab, ReferenceConfig config);
  ReferenceBackend(Vocabulary vocab, ReferenceConfig config, ReferenceParameters parameters);

  const Vocabulary& vocabulary() const override { return vocab_; }
  std::size_t width() const override { return config_.width; }
  std::size_t max_length() const override { return config_.max_length; }

  Matrix embed(const PromptedInput& input) const override;
  BackendOutput forward_from_embeddings(const Matrix& embeddings) const override;
  Vector mask_logits(const Matrix& embeddings, std::size_t position) const override;
  const ClsHead& cls_head() const override { return params_.cls_head; }
  Vector cls_logits(const Matrix& embeddings) const override;
  Matrix loss_gradient_wrt_embeddings(const Matrix& embeddings, const LossTarget& target) const override;

  // Forward + backward on embed(input) + perturbation; adds d loss / d theta
  // into `gradients` and returns the loss.
  double accumulate_gradients(const PromptedInput& input, const Matrix* perturbation, const LossTarget& target,
                              ReferenceParameters& gradients) const;

  const ReferenceConfig& config() const noexcept { return config_; }
  const ReferenceParameters& parameters() const noexcept { return params_; }
  ReferenceParameters& parameters() noexcept { return params_; }

 private:
  struct Cache;
  void check_input(const Matrix& embeddings) const;
  const Matrix& encode(const Matrix& embeddings, Cache& cache) const;
  Matrix backward(const Cache& cache, Matrix grad_hidden, ReferenceParameters* gradients) const;
  double head_backward(const Cache& cache, const LossTarget& target, Matrix& grad_hidden,
                       ReferenceParameters* gradients) const;

  Vocabulary vocab_;
  ReferenceConfig config_;
  ReferenceParameters params_;
};

// Self-describing checkpoint: a text header line with a JSON document
// (config, vocabulary, tensor shapes, caller metadata) followed by the raw
// little-endian float64 parameter payload.
void save_checkpoint(const std::filesystem::path& path, const ReferenceBackend& backend,
                     const nlohmann::json& metadata);

struct LoadedCheckpoint {
  ReferenceBackend backend;
  nlohmann::json metadata;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

// FNV-1a over the parameter payload.
std::uint64_t parameter_hash(const ReferenceParameters& parameters);

}  // namespace linkcloze
