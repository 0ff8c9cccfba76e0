#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "sift/data.hpp"
#include "sift/ops.hpp"
#include "sift/relax.hpp"
#include "sift/rng.hpp"

namespace sift::model {

// Fused gate parameters for one LSTM direction: w is {input_dim + hidden, 4h}
// with gate order input, forget, cell, output; b is {4h}.
struct LstmParams {
  ad::TensorPtr w;
  ad::TensorPtr b;
  std::size_t input_dim = 0;
  std::size_t hidden = 0;
};

struct LstmState {
  ad::Var h;
  ad::Var c;
};

LstmParams make_lstm(std::size_t input_dim, std::size_t hidden, Rng& rng);
LstmState lstm_zero_state(ad::Tape& tape, std::size_t hidden);
LstmState lstm_step(ad::Tape& tape, const LstmParams& p, const ad::Var& x, const LstmState& s);

// Additive attention: score_t = v . tanh(W_state s + W_ann a_t).
struct AttentionParams {
  ad::TensorPtr w_state;  // {state_dim, attn_dim}
  ad::TensorPtr w_ann;    // {ann_dim, attn_dim}
  ad::TensorPtr v;        // {attn_dim}
};

struct Attended {
  ad::Var context;  // {ann_dim}
  ad::Var weights;  // {T}, sums to 1
};

AttentionParams make_attention(std::size_t state_dim, std::size_t ann_dim, std::size_t attn_dim,
                               Rng& rng);
// proj_ann must be matmul(annotations, w_ann); precomputed once per sentence.
Attended attend(ad::Tape& tape, const AttentionParams& p, const ad::Var& state,
                const ad::Var& annotations, const ad::Var& proj_ann);

struct AutoencoderConfig {
  std::size_t embed_dim = 32;
  std::size_t enc_hidden = 32;  // decoder hidden is 2*enc_hidden by construction
  std::size_t attn_dim = 32;
  std::size_t max_len = 24;  // longest decodable sentence, excluding BOS/EOS
};

// Sequence autoencoder: bidirectional LSTM encoder, elementwise-max pooled
// initial state, attention-augmented unidirectional LSTM decoder.
struct Autoencoder {
  AutoencoderConfig cfg;
  std::size_t vocab_size = 0;
  ad::TensorPtr embedding;  // {V, embed_dim}
  LstmParams enc_fwd;
  LstmParams enc_bwd;
  LstmParams dec;  // input {embed_dim + 2*enc_hidden}, hidden {2*enc_hidden}
  AttentionParams attn;
  ad::TensorPtr out_w;  // {2*enc_hidden, V}
  ad::TensorPtr out_b;  // {V}

  std::size_t dec_hidden() const { return 2 * cfg.enc_hidden; }
};

Autoencoder make_autoencoder(const AutoencoderConfig& cfg, std::size_t vocab_size, Rng& rng);
std::vector<std::pair<std::string, ad::TensorPtr>> named_params(const Autoencoder& ae);

struct Encoded {
  ad::Var annotations;  // {T, 2*enc_hidden}, concat(fwd_t, bwd_t)
  ad::Var init;         // {2*enc_hidden}, elementwise max over time
};

// ids are raw token ids (no BOS/EOS). T must be in [1, max_len].
Encoded encode(ad::Tape& tape, const Autoencoder& ae, const std::vector<std::size_t>& ids);

// tokens must be the full frame [BOS, t1..tn, EOS]; step j conditions on the
// gold token j and predicts token j+1. Returns log-probabilities {n+1, V}.
ad::Var decode_teacher_forced(ad::Tape& tape, const Autoencoder& ae, const Encoded& enc,
                              const std::vector<std::size_t>& tokens);

struct FreeRunStep {
  relax::GumbelSample sample;
  ad::Var log_probs;  // {V} at this step
};

struct FreeRunResult {
  std::vector<FreeRunStep> steps;   // includes the terminating EOS step if any
  std::vector<std::size_t> tokens;  // sampled ids, EOS excluded
  bool hit_eos = false;
};

// Free-running decode: each step embeds the previous discrete sample via
// one_hot x embedding so gradients reach the decoder stack. Stops after
// sampling EOS or after max_len steps.
FreeRunResult decode_free_running(ad::Tape& tape, const Autoencoder& ae, const Encoded& enc,
                                  Rng& rng, double tau, std::size_t max_len);

// Greedy decode without gradients; used for evaluation-style generation.
std::vector<std::size_t> greedy_decode(ad::Tape& tape, const Autoencoder& ae, const Encoded& enc,
                                       std::size_t max_len);

enum class ClfVariant { rnn, cnn, dan, pair };

ClfVariant classifier_variant_from_string(const std::string& s);
std::string to_string(ClfVariant v);

struct ClassifierConfig {
  ClfVariant variant = ClfVariant::rnn;
  std::size_t embed_dim = 32;
  std::size_t hidden = 32;  // LSTM hidden (rnn/pair) or feedforward width (dan)
  std::vector<std::size_t> cnn_widths = {3, 4, 5};
  std::size_t cnn_filters = 16;  // per width
  double dan_word_dropout = 0.3;
  std::string pair_combiner = "rich";  // "rich": [u;v;|u-v|;u*v], or "concat"
  std::size_t num_classes = 2;
};

struct Classifier {
  ClassifierConfig cfg;
  std::size_t vocab_size = 0;
  ad::TensorPtr embedding;  // {V, embed_dim}
  LstmParams lstm;          // rnn & pair
  std::vector<ad::TensorPtr> conv_w;  // cnn, one {w*d, filters} per width
  std::vector<ad::TensorPtr> conv_b;  // cnn, one {filters} per width
  ad::TensorPtr ff1_w, ff1_b;         // dan
  ad::TensorPtr ff2_w, ff2_b;         // dan
  ad::TensorPtr head_w;  // {feature_dim, num_classes}
  ad::TensorPtr head_b;  // {num_classes}
};

Classifier make_classifier(const ClassifierConfig& cfg, std::size_t vocab_size, Rng& rng);
std::vector<std::pair<std::string, ad::TensorPtr>> named_params(const Classifier& clf);

ad::Var embed_ids(ad::Tape& tape, const ad::TensorPtr& table,
                  const std::vector<std::size_t>& ids);

// embedded is {T, embed_dim}. A non-null dropout_rng enables the DAN's
// word dropout (training mode); other variants ignore it.
ad::Var classify(ad::Tape& tape, const Classifier& clf, const ad::Var& embedded,
                 Rng* dropout_rng = nullptr);
ad::Var classify_pair(ad::Tape& tape, const Classifier& clf, const ad::Var& premise,
                      const ad::Var& hypothesis);

}  // namespace sift::model
