#include "linkcloze/backend.hpp"

#include <bit>
#include <cmath>
#include <fstream>

#include "linkcloze/errors.hpp"
#include "linkcloze/objective.hpp"
#include "linkcloze/random.hpp"

namespace linkcloze {

static_assert(std::endian::native == std::endian::little, "checkpoint payload assumes a little-endian host");

// ---------------------------------------------------------------------------
// Contract defaults

PromptedInput MaskedLanguageModel::encode(const IssueArtifact& issue, const CommitArtifact& commit,
                                          const PromptTemplate& prompt, std::size_t max_len) const {
  return build_prompt(issue, commit, prompt, vocabulary(), std::min(max_len, max_length()));
}

Vector MaskedLanguageModel::mask_logits(const Matrix& embeddings, std::size_t position) const {
  const auto out = forward_from_embeddings(embeddings);
  if (position >= static_cast<std::size_t>(out.vocab_logits.rows())) {
    throw ShapeError("mask position outside the sequence");
  }
  return out.vocab_logits.row(static_cast<Eigen::Index>(position)).transpose();
}

Vector MaskedLanguageModel::cls_logits(const Matrix& embeddings) const {
  return cls_head().logits(forward_from_embeddings(embeddings).cls_hidden);
}

double MaskedLanguageModel::loss(const Matrix& embeddings, const LossTarget& target) const {
  if (const auto* mlm = std::get_if<MlmTarget>(&target)) {
    return mlm_head_gradient(mask_logits(embeddings, mlm->mask_position), *mlm->verbalizer, mlm->label).loss;
  }
  if (const auto* tok = std::get_if<TokenTarget>(&target)) {
    return token_head_gradient(mask_logits(embeddings, tok->position), tok->token).loss;
  }
  return cls_head_gradient(cls_logits(embeddings), std::get<ClsTarget>(target).label).loss;
}

ClsHead ClsHead::zeros(std::size_t width) {
  return {Matrix::Zero(static_cast<Eigen::Index>(width), 2), Vector::Zero(2)};
}

Vector ClsHead::logits(const Eigen::Ref<const Vector>& hidden) const {
  return weight.transpose() * hidden + bias;
}

// ---------------------------------------------------------------------------
// Parameters

std::vector<std::span<double>> ReferenceParameters::tensors() {
  std::vector<std::span<double>> out;
  auto add = [&out](auto& t) { out.emplace_back(t.data(), static_cast<std::size_t>(t.size())); };
  add(token_embedding);
  add(position_embedding);
  for (auto& l : layers) {
    add(l.ln1_gain);
    add(l.ln1_bias);
    add(l.wq);
    add(l.bq);
    add(l.wk);
    add(l.bk);
    add(l.wv);
    add(l.bv);
    add(l.wo);
    add(l.bo);
    add(l.ln2_gain);
    add(l.ln2_bias);
    add(l.w1);
    add(l.b1);
    add(l.w2);
    add(l.b2);
  }
  add(final_gain);
  add(final_bias);
  add(output_bias);
  add(cls_head.weight);
  add(cls_head.bias);
  return out;
}

std::vector<std::span<const double>> ReferenceParameters::tensors() const {
  auto mutable_views = const_cast<ReferenceParameters*>(this)->tensors();
  return {mutable_views.begin(), mutable_views.end()};
}

ReferenceParameters ReferenceParameters::zeros_like() const {
  ReferenceParameters z = *this;
  for (auto t : z.tensors()) std::fill(t.begin(), t.end(), 0.0);
  return z;
}

std::size_t ReferenceParameters::size() const {
  std::size_t n = 0;
  for (auto t : tensors()) n += t.size();
  return n;
}

namespace {

ReferenceParameters shaped_parameters(std::size_t vocab_size, const ReferenceConfig& c) {
  const auto d = static_cast<Eigen::Index>(c.width);
  const auto f = static_cast<Eigen::Index>(c.ff_width);
  ReferenceParameters p;
  p.token_embedding = Matrix::Zero(static_cast<Eigen::Index>(vocab_size), d);
  p.position_embedding = Matrix::Zero(static_cast<Eigen::Index>(c.max_length), d);
  p.layers.resize(c.layers);
  for (auto& l : p.layers) {
    l.ln1_gain = Vector::Ones(d);
    l.ln1_bias = Vector::Zero(d);
    l.wq = l.wk = l.wv = l.wo = Matrix::Zero(d, d);
    l.bq = l.bk = l.bv = l.bo = Vector::Zero(d);
    l.ln2_gain = Vector::Ones(d);
    l.ln2_bias = Vector::Zero(d);
    l.w1 = Matrix::Zero(d, f);
    l.b1 = Vector::Zero(f);
    l.w2 = Matrix::Zero(f, d);
    l.b2 = Vector::Zero(d);
  }
  p.final_gain = Vector::Ones(d);
  p.final_bias = Vector::Zero(d);
  p.output_bias = Vector::Zero(static_cast<Eigen::Index>(vocab_size));
  p.cls_head = ClsHead::zeros(c.width);
  return p;
}

void validate(const ReferenceConfig& c) {
  if (c.width == 0 || c.layers == 0 || c.heads == 0 || c.ff_width == 0 || c.max_length == 0) {
    throw ConfigError("reference backend dimensions must be positive");
  }
  if (c.width % c.heads != 0) throw ConfigError("width must be divisible by the head count");
  if (!(c.init_range > 0.0)) throw ConfigError("init_range must be positive");
}

constexpr double kLayerNormEps = 1e-5;

Matrix layer_norm(const Matrix& x, const Vector& gain, const Vector& bias, Matrix& xhat, Vector& rstd) {
  const auto rows = x.rows();
  const auto d = static_cast<double>(x.cols());
  xhat.resize(rows, x.cols());
  rstd.resize(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double mean = x.row(i).sum() / d;
    const auto centered = (x.row(i).array() - mean).matrix();
    const double var = centered.squaredNorm() / d;
    rstd[i] = 1.0 / std::sqrt(var + kLayerNormEps);
    xhat.row(i) = centered * rstd[i];
  }
  Matrix y = xhat.array().rowwise() * gain.transpose().array();
  y.rowwise() += bias.transpose();
  return y;
}

Matrix layer_norm_backward(const Matrix& dy, const Matrix& xhat, const Vector& rstd, const Vector& gain,
                           Vector* dgain, Vector* dbias) {
  if (dgain) {
    *dgain += (dy.array() * xhat.array()).colwise().sum().transpose().matrix();
    *dbias += dy.colwise().sum().transpose();
  }
  const auto d = static_cast<double>(dy.cols());
  Matrix dxhat = dy.array().rowwise() * gain.transpose().array();
  Matrix dx(dy.rows(), dy.cols());
  for (Eigen::Index i = 0; i < dy.rows(); ++i) {
    const double mean_dxhat = dxhat.row(i).sum() / d;
    const double mean_dot = dxhat.row(i).dot(xhat.row(i)) / d;
    dx.row(i) = rstd[i] * (dxhat.row(i).array() - mean_dxhat - xhat.row(i).array() * mean_dot).matrix();
  }
  return dx;
}

Matrix affine(const Matrix& x, const Matrix& w, const Vector& b) {
  Matrix y = x * w;
  y.rowwise() += b.transpose();
  return y;
}

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluK = 0.044715;

double gelu(double u) { return 0.5 * u * (1.0 + std::tanh(kGeluC * (u + kGeluK * u * u * u))); }

double gelu_derivative(double u) {
  const double t = std::tanh(kGeluC * (u + kGeluK * u * u * u));
  return 0.5 * (1.0 + t) + 0.5 * u * (1.0 - t * t) * kGeluC * (1.0 + 3.0 * kGeluK * u * u);
}

void row_softmax(Matrix& s) {
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    const double m = s.row(i).maxCoeff();
    s.row(i) = (s.row(i).array() - m).exp();
    s.row(i) /= s.row(i).sum();
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Reference backend

struct LayerCache {
  Matrix input;
  Matrix xhat1;
  Vector rstd1;
  Matrix z1;
  Matrix q, k, v;
  std::vector<Matrix> attention;
  Matrix context;
  Matrix mid;
  Matrix xhat2;
  Vector rstd2;
  Matrix z2;
  Matrix pre_activation;
  Matrix activation;
};

struct ReferenceBackend::Cache {
  std::vector<LayerCache> layers;
  Matrix last;
  Matrix xhat;
  Vector rstd;
  Matrix hidden;
};

ReferenceBackend::ReferenceBackend(Vocabulary vocab, ReferenceConfig config)
    : vocab_(std::move(vocab)), config_(config) {
  validate(config_);
  params_ = shaped_parameters(vocab_.size(), config_);
  Rng rng(config_.seed);
  const double r = config_.init_range;
  auto fill = [&](auto& t) {
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = rng.uniform(-r, r);
  };
  fill(params_.token_embedding);
  fill(params_.position_embedding);
  for (auto& l : params_.layers) {
    fill(l.wq);
    fill(l.bq);
    fill(l.wk);
    fill(l.bk);
    fill(l.wv);
    fill(l.bv);
    fill(l.wo);
    fill(l.bo);
    fill(l.w1);
    fill(l.b1);
    fill(l.w2);
    fill(l.b2);
  }
  fill(params_.output_bias);
  fill(params_.cls_head.weight);
  fill(params_.cls_head.bias);
}

ReferenceBackend::ReferenceBackend(Vocabulary vocab, ReferenceConfig config, ReferenceParameters parameters)
    : vocab_(std::move(vocab)), config_(config), params_(std::move(parameters)) {
  validate(config_);
  const auto expected = shaped_parameters(vocab_.size(), config_);
  const auto want = expected.tensors();
  const auto have = params_.tensors();
  if (want.size() != have.size()) throw ShapeError("parameter tensor count does not match the config");
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (want[i].size() != have[i].size()) throw ShapeError("parameter tensor size does not match the config");
  }
}

Matrix ReferenceBackend::embed(const PromptedInput& input) const {
  const auto& ids = input.token_ids;
  if (ids.empty()) throw ShapeError("cannot embed an empty sequence");
  if (ids.size() > config_.max_length) {
    throw ShapeError("sequence of length " + std::to_string(ids.size()) + " exceeds max_length " +
                     std::to_string(config_.max_length));
  }
  Matrix e(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(config_.width));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!vocab_.contains_id(ids[i])) {
      throw VocabularyError("token id " + std::to_string(ids[i]) + " outside vocabulary of size " +
                            std::to_string(vocab_.size()));
    }
    const auto row = static_cast<Eigen::Index>(i);
    e.row(row) = params_.token_embedding.row(ids[i]) + params_.position_embedding.row(row);
  }
  return e;
}

void ReferenceBackend::check_input(const Matrix& embeddings) const {
  if (embeddings.cols() != static_cast<Eigen::Index>(config_.width)) {
    throw ShapeError("embedding width " + std::to_string(embeddings.cols()) + " != backend width " +
                     std::to_string(config_.width));
  }
  if (embeddings.rows() == 0 || embeddings.rows() > static_cast<Eigen::Index>(config_.max_length)) {
    throw ShapeError("embedding length outside [1, max_length]");
  }
  if (!embeddings.allFinite()) throw NumericError("non-finite entry in input embeddings");
}

const Matrix& ReferenceBackend::encode(const Matrix& embeddings, Cache& cache) const {
  const auto heads = static_cast<Eigen::Index>(config_.heads);
  const auto dh = static_cast<Eigen::Index>(config_.width / config_.heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  cache.layers.resize(params_.layers.size());
  Matrix next;
  for (std::size_t li = 0; li < params_.layers.size(); ++li) {
    const auto& p = params_.layers[li];
    auto& c = cache.layers[li];
    c.input = li == 0 ? embeddings : next;
    c.z1 = layer_norm(c.input, p.ln1_gain, p.ln1_bias, c.xhat1, c.rstd1);
    c.q = affine(c.z1, p.wq, p.bq);
    c.k = affine(c.z1, p.wk, p.bk);
    c.v = affine(c.z1, p.wv, p.bv);
    c.attention.resize(static_cast<std::size_t>(heads));
    c.context.resize(c.input.rows(), c.input.cols());
    for (Eigen::Index h = 0; h < heads; ++h) {
      auto& a = c.attention[static_cast<std::size_t>(h)];
      a = c.q.middleCols(h * dh, dh) * c.k.middleCols(h * dh, dh).transpose() * scale;
      row_softmax(a);
      c.context.middleCols(h * dh, dh) = a * c.v.middleCols(h * dh, dh);
    }
    c.mid = c.input + affine(c.context, p.wo, p.bo);
    c.z2 = layer_norm(c.mid, p.ln2_gain, p.ln2_bias, c.xhat2, c.rstd2);
    c.pre_activation = affine(c.z2, p.w1, p.b1);
    c.activation = c.pre_activation.unaryExpr([](double u) { return gelu(u); });
    next = c.mid + affine(c.activation, p.w2, p.b2);
  }
  cache.last = std::move(next);
  cache.hidden = layer_norm(cache.last, params_.final_gain, params_.final_bias, cache.xhat, cache.rstd);
  return cache.hidden;
}

Matrix ReferenceBackend::backward(const Cache& cache, Matrix grad, ReferenceParameters* g) const {
  const auto heads = static_cast<Eigen::Index>(config_.heads);
  const auto dh = static_cast<Eigen::Index>(config_.width / config_.heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  grad = layer_norm_backward(grad, cache.xhat, cache.rstd, params_.final_gain, g ? &g->final_gain : nullptr,
                             g ? &g->final_bias : nullptr);

  for (std::size_t li = params_.layers.size(); li-- > 0;) {
    const auto& p = params_.layers[li];
    const auto& c = cache.layers[li];
    EncoderLayer* gl = g ? &g->layers[li] : nullptr;

    // Feed-forward block: out = mid + W2 gelu(W1 ln2(mid)).
    if (gl) {
      gl->w2.noalias() += c.activation.transpose() * grad;
      gl->b2 += grad.colwise().sum().transpose();
    }
    Matrix d_act = grad * p.w2.transpose();
    Matrix d_pre = d_act.array() * c.pre_activation.unaryExpr([](double u) { return gelu_derivative(u); }).array();
    if (gl) {
      gl->w1.noalias() += c.z2.transpose() * d_pre;
      gl->b1 += d_pre.colwise().sum().transpose();
    }
    Matrix d_z2 = d_pre * p.w1.transpose();
    Matrix d_mid = grad + layer_norm_backward(d_z2, c.xhat2, c.rstd2, p.ln2_gain, gl ? &gl->ln2_gain : nullptr,
                                              gl ? &gl->ln2_bias : nullptr);

    // Attention block: mid = input + Wo attn(ln1(input)).
    if (gl) {
      gl->wo.noalias() += c.context.transpose() * d_mid;
      gl->bo += d_mid.colwise().sum().transpose();
    }
    Matrix d_context = d_mid * p.wo.transpose();
    Matrix d_q(c.q.rows(), c.q.cols());
    Matrix d_k(c.k.rows(), c.k.cols());
    Matrix d_v(c.v.rows(), c.v.cols());
    for (Eigen::Index h = 0; h < heads; ++h) {
      const auto& a = c.attention[static_cast<std::size_t>(h)];
      const auto d_ctx_h = d_context.middleCols(h * dh, dh);
      Matrix d_a = d_ctx_h * c.v.middleCols(h * dh, dh).transpose();
      d_v.middleCols(h * dh, dh) = a.transpose() * d_ctx_h;
      const Vector row_dot = (d_a.array() * a.array()).rowwise().sum();
      Matrix d_s = a.array() * (d_a.colwise() - row_dot).array();
      d_s *= scale;
      d_q.middleCols(h * dh, dh) = d_s * c.k.middleCols(h * dh, dh);
      d_k.middleCols(h * dh, dh) = d_s.transpose() * c.q.middleCols(h * dh, dh);
    }
    if (gl) {
      gl->wq.noalias() += c.z1.transpose() * d_q;
      gl->bq += d_q.colwise().sum().transpose();
      gl->wk.noalias() += c.z1.transpose() * d_k;
      gl->bk += d_k.colwise().sum().transpose();
      gl->wv.noalias() += c.z1.transpose() * d_v;
      gl->bv += d_v.colwise().sum().transpose();
    }
    Matrix d_z1 = d_q * p.wq.transpose();
    d_z1.noalias() += d_k * p.wk.transpose();
    d_z1.noalias() += d_v * p.wv.transpose();
    grad = d_mid + layer_norm_backward(d_z1, c.xhat1, c.rstd1, p.ln1_gain, gl ? &gl->ln1_gain : nullptr,
                                       gl ? &gl->ln1_bias : nullptr);
  }
  return grad;
}

double ReferenceBackend::head_backward(const Cache& cache, const LossTarget& target, Matrix& grad_hidden,
                                       ReferenceParameters* g) const {
  grad_hidden = Matrix::Zero(cache.hidden.rows(), cache.hidden.cols());
  if (std::holds_alternative<MlmTarget>(target) || std::holds_alternative<TokenTarget>(target)) {
    const auto* mlm = std::get_if<MlmTarget>(&target);
    const auto* tok = std::get_if<TokenTarget>(&target);
    if (mlm && mlm->verbalizer == nullptr) throw ConfigError("MLM target without a verbalizer");
    const auto m = static_cast<Eigen::Index>(mlm ? mlm->mask_position : tok->position);
    if (m >= cache.hidden.rows()) throw ShapeError("mask position outside the sequence");
    const Vector h = cache.hidden.row(m).transpose();
    const Vector logits = params_.token_embedding * h + params_.output_bias;
    if (tok && (tok->token < 0 || tok->token >= logits.size())) throw VocabularyError("target token id out of range");
    const auto head = mlm ? mlm_head_gradient(logits, *mlm->verbalizer, mlm->label)
                          : token_head_gradient(logits, tok->token);
    grad_hidden.row(m) = (params_.token_embedding.transpose() * head.logit_gradient).transpose();
    if (g) {
      g->token_embedding.noalias() += head.logit_gradient * h.transpose();
      g->output_bias += head.logit_gradient;
    }
    return head.loss;
  }
  const auto& cls = std::get<ClsTarget>(target);
  const Vector h = cache.hidden.row(0).transpose();
  const auto head = cls_head_gradient(params_.cls_head.logits(h), cls.label);
  grad_hidden.row(0) = (params_.cls_head.weight * head.logit_gradient).transpose();
  if (g) {
    g->cls_head.weight.noalias() += h * head.logit_gradient.transpose();
    g->cls_head.bias += head.logit_gradient;
  }
  return head.loss;
}

BackendOutput ReferenceBackend::forward_from_embeddings(const Matrix& embeddings) const {
  check_input(embeddings);
  Cache cache;
  const Matrix& h = encode(embeddings, cache);
  BackendOutput out;
  out.vocab_logits = h * params_.token_embedding.transpose();
  out.vocab_logits.rowwise() += params_.output_bias.transpose();
  out.cls_hidden = h.row(0).transpose();
  return out;
}

Vector ReferenceBackend::mask_logits(const Matrix& embeddings, std::size_t position) const {
  check_input(embeddings);
  if (position >= static_cast<std::size_t>(embeddings.rows())) throw ShapeError("mask position outside the sequence");
  Cache cache;
  const Matrix& h = encode(embeddings, cache);
  return params_.token_embedding * h.row(static_cast<Eigen::Index>(position)).transpose() + params_.output_bias;
}

Vector ReferenceBackend::cls_logits(const Matrix& embeddings) const {
  check_input(embeddings);
  Cache cache;
  const Matrix& h = encode(embeddings, cache);
  return params_.cls_head.logits(h.row(0).transpose());
}

Matrix ReferenceBackend::loss_gradient_wrt_embeddings(const Matrix& embeddings, const LossTarget& target) const {
  check_input(embeddings);
  Cache cache;
  encode(embeddings, cache);
  Matrix grad_hidden;
  head_backward(cache, target, grad_hidden, nullptr);
  return backward(cache, std::move(grad_hidden), nullptr);
}

double ReferenceBackend::accumulate_gradients(const PromptedInput& input, const Matrix* perturbation,
                                              const LossTarget& target, ReferenceParameters& gradients) const {
  Matrix embeddings = embed(input);
  if (perturbation) {
    if (perturbation->rows() != embeddings.rows() || perturbation->cols() != embeddings.cols()) {
      throw ShapeError("perturbation shape does not match the embeddings");
    }
    embeddings += *perturbation;
  }
  check_input(embeddings);
  Cache cache;
  encode(embeddings, cache);
  Matrix grad_hidden;
  const double loss = head_backward(cache, target, grad_hidden, &gradients);
  const Matrix grad_embeddings = backward(cache, std::move(grad_hidden), &gradients);
  for (std::size_t i = 0; i < input.token_ids.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    gradients.token_embedding.row(input.token_ids[i]) += grad_embeddings.row(row);
    gradients.position_embedding.row(row) += grad_embeddings.row(row);
  }
  return loss;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr std::string_view kMagic = "LINKCLOZE-CHECKPOINT 1";

nlohmann::json config_json(const ReferenceConfig& c) {
  return {{"width", c.width},           {"layers", c.layers},         {"heads", c.heads},
          {"ff_width", c.ff_width},     {"max_length", c.max_length}, {"init_range", c.init_range},
          {"seed", c.seed}};
}

ReferenceConfig config_from_json(const nlohmann::json& j) {
  ReferenceConfig c;
  c.width = j.at("width").get<std::size_t>();
  c.layers = j.at("layers").get<std::size_t>();
  c.heads = j.at("heads").get<std::size_t>();
  c.ff_width = j.at("ff_width").get<std::size_t>();
  c.max_length = j.at("max_length").get<std::size_t>();
  c.init_range = j.at("init_range").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ReferenceBackend& backend,
                     const nlohmann::json& metadata) {
  nlohmann::json header;
  header["config"] = config_json(backend.config());
  header["vocabulary"] = backend.vocabulary().tokens();
  header["parameter_count"] = backend.parameters().size();
  header["metadata"] = metadata;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint '" + path.string() + "'");
  out << kMagic << '\n' << header.dump() << '\n';
  for (auto t : backend.parameters().tensors()) {
    out.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.size_bytes()));
  }
  if (!out) throw Error("failed writing checkpoint '" + path.string() + "'");
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint '" + path.string() + "'");
  std::string magic;
  std::getline(in, magic);
  if (magic != kMagic) throw ParseError("not a checkpoint file: " + path.string(), 1);
  std::string header_text;
  std::getline(in, header_text);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad checkpoint header: ") + e.what(), 2);
  }
  const auto config = config_from_json(header.at("config"));
  const auto tokens = header.at("vocabulary").get<std::vector<std::string>>();
  auto vocab = Vocabulary::from_tokens(tokens);
  auto params = shaped_parameters(vocab.size(), config);
  if (header.at("parameter_count").get<std::size_t>() != params.size()) {
    throw ParseError("checkpoint parameter count does not match its config", 2);
  }
  for (auto t : params.tensors()) {
    in.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(t.size_bytes()));
    if (!in) throw ParseError("truncated checkpoint payload", 0);
  }
  return {ReferenceBackend(std::move(vocab), config, std::move(params)), header.at("metadata")};
}

std::uint64_t parameter_hash(const ReferenceParameters& parameters) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto t : parameters.tensors()) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(t.data());
    for (std::size_t i = 0; i < t.size_bytes(); ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

}  // namespace linkcloze
