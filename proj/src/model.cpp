#include "sift/model.hpp"

#include <algorithm>
#include <cmath>

namespace sift::model {

using ad::Tape;
using ad::Tensor;
using ad::TensorPtr;
using ad::Var;

namespace {

TensorPtr init_uniform(std::vector<std::size_t> shape, Rng& rng, double scale = 0.1) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (double& v : t.data) v = rng.uniform(-scale, scale);
  t.requires_grad = true;
  return ad::make_tensor(std::move(t));
}

TensorPtr init_zeros(std::vector<std::size_t> shape) {
  Tensor t = Tensor::zeros(std::move(shape));
  t.requires_grad = true;
  return ad::make_tensor(std::move(t));
}

}  // namespace

LstmParams make_lstm(std::size_t input_dim, std::size_t hidden, Rng& rng) {
  LstmParams p;
  p.input_dim = input_dim;
  p.hidden = hidden;
  p.w = init_uniform({input_dim + hidden, 4 * hidden}, rng);
  p.b = init_zeros({4 * hidden});
  // forget-gate bias starts at 1 so early training does not wash out state
  for (std::size_t j = hidden; j < 2 * hidden; ++j) p.b->data[j] = 1.0;
  return p;
}

LstmState lstm_zero_state(Tape& tape, std::size_t hidden) {
  return {tape.constant(Tensor::zeros({hidden})), tape.constant(Tensor::zeros({hidden}))};
}

LstmState lstm_step(Tape& tape, const LstmParams& p, const Var& x, const LstmState& s) {
  require(x.t->rank() == 1 && x.size() == p.input_dim, errkind::dimension,
          "lstm_step: input size mismatch");
  require(s.h.size() == p.hidden && s.c.size() == p.hidden, errkind::dimension,
          "lstm_step: state size mismatch");
  const std::size_t h = p.hidden;
  Var z = ad::add(ad::matmul(ad::concat({x, s.h}), tape.leaf(p.w)), tape.leaf(p.b));
  Var i = ad::sigmoid(ad::slice(z, 0, h));
  Var f = ad::sigmoid(ad::slice(z, h, h));
  Var g = ad::tanh(ad::slice(z, 2 * h, h));
  Var o = ad::sigmoid(ad::slice(z, 3 * h, h));
  Var c = ad::add(ad::mul(f, s.c), ad::mul(i, g));
  return {ad::mul(o, ad::tanh(c)), c};
}

AttentionParams make_attention(std::size_t state_dim, std::size_t ann_dim, std::size_t attn_dim,
                               Rng& rng) {
  AttentionParams p;
  p.w_state = init_uniform({state_dim, attn_dim}, rng);
  p.w_ann = init_uniform({ann_dim, attn_dim}, rng);
  p.v = init_uniform({attn_dim}, rng);
  return p;
}

Attended attend(Tape& tape, const AttentionParams& p, const Var& state, const Var& annotations,
                const Var& proj_ann) {
  require(annotations.t->rank() == 2 && annotations.t->shape[0] >= 1, errkind::dimension,
          "attend: non-empty annotation matrix required");
  Var s_proj = ad::matmul(state, tape.leaf(p.w_state));            // {a}
  Var scores = ad::matmul(ad::tanh(ad::add_rowwise(proj_ann, s_proj)), tape.leaf(p.v));  // {T}
  Var weights = ad::softmax_rows(scores);
  Var context = ad::matmul(weights, annotations);  // {ann_dim}
  return {context, weights};
}

Autoencoder make_autoencoder(const AutoencoderConfig& cfg, std::size_t vocab_size, Rng& rng) {
  require(vocab_size > data::Vocab::kEos, errkind::config,
          "autoencoder: vocabulary too small");
  require(cfg.embed_dim >= 1 && cfg.enc_hidden >= 1 && cfg.attn_dim >= 1 && cfg.max_len >= 1,
          errkind::config, "autoencoder: dimensions must be positive");
  Autoencoder ae;
  ae.cfg = cfg;
  ae.vocab_size = vocab_size;
  ae.embedding = init_uniform({vocab_size, cfg.embed_dim}, rng);
  ae.enc_fwd = make_lstm(cfg.embed_dim, cfg.enc_hidden, rng);
  ae.enc_bwd = make_lstm(cfg.embed_dim, cfg.enc_hidden, rng);
  const std::size_t dh = 2 * cfg.enc_hidden;
  ae.dec = make_lstm(cfg.embed_dim + dh, dh, rng);
  ae.attn = make_attention(dh, dh, cfg.attn_dim, rng);
  ae.out_w = init_uniform({dh, vocab_size}, rng);
  ae.out_b = init_zeros({vocab_size});
  return ae;
}

std::vector<std::pair<std::string, TensorPtr>> named_params(const Autoencoder& ae) {
  return {
      {"attn.v", ae.attn.v},        {"attn.w_ann", ae.attn.w_ann},
      {"attn.w_state", ae.attn.w_state},
      {"dec.b", ae.dec.b},          {"dec.w", ae.dec.w},
      {"embedding", ae.embedding},
      {"enc_bwd.b", ae.enc_bwd.b},  {"enc_bwd.w", ae.enc_bwd.w},
      {"enc_fwd.b", ae.enc_fwd.b},  {"enc_fwd.w", ae.enc_fwd.w},
      {"out.b", ae.out_b},          {"out.w", ae.out_w},
  };
}

Encoded encode(Tape& tape, const Autoencoder& ae, const std::vector<std::size_t>& ids) {
  require(!ids.empty(), errkind::dimension, "encode: empty sequence");
  require(ids.size() <= ae.cfg.max_len, errkind::dimension, "encode: sequence too long");
  const std::size_t t_len = ids.size();
  Var emb = tape.leaf(ae.embedding);
  std::vector<Var> fwd(t_len), bwd(t_len);
  LstmState s = lstm_zero_state(tape, ae.cfg.enc_hidden);
  for (std::size_t t = 0; t < t_len; ++t) {
    s = lstm_step(tape, ae.enc_fwd, ad::embedding_row(emb, ids[t]), s);
    fwd[t] = s.h;
  }
  s = lstm_zero_state(tape, ae.cfg.enc_hidden);
  for (std::size_t t = t_len; t-- > 0;) {
    s = lstm_step(tape, ae.enc_bwd, ad::embedding_row(emb, ids[t]), s);
    bwd[t] = s.h;
  }
  std::vector<Var> rows(t_len);
  for (std::size_t t = 0; t < t_len; ++t) rows[t] = ad::concat({fwd[t], bwd[t]});
  Var annotations = ad::stack_rows(rows);
  Var init = ad::max_over_time(annotations);
  return {annotations, init};
}

namespace {

struct DecoderLoop {
  Var proj_ann;
  LstmState state;
};

DecoderLoop begin_decode(Tape& tape, const Autoencoder& ae, const Encoded& enc) {
  DecoderLoop loop;
  loop.proj_ann = ad::matmul(enc.annotations, tape.leaf(ae.attn.w_ann));
  loop.state = {enc.init, tape.constant(Tensor::zeros({ae.dec_hidden()}))};
  return loop;
}

// One decoder step given the previous token's embedding; returns the logits.
Var decode_step(Tape& tape, const Autoencoder& ae, const Encoded& enc, DecoderLoop& loop,
                const Var& prev_emb) {
  Attended att = attend(tape, ae.attn, loop.state.h, enc.annotations, loop.proj_ann);
  Var x = ad::concat({prev_emb, att.context});
  loop.state = lstm_step(tape, ae.dec, x, loop.state);
  return ad::add(ad::matmul(loop.state.h, tape.leaf(ae.out_w)), tape.leaf(ae.out_b));
}

}  // namespace

Var decode_teacher_forced(Tape& tape, const Autoencoder& ae, const Encoded& enc,
                          const std::vector<std::size_t>& tokens) {
  require(tokens.size() >= 2, errkind::contract,
          "decode_teacher_forced: need at least BOS and EOS");
  require(tokens.front() == data::Vocab::kBos && tokens.back() == data::Vocab::kEos,
          errkind::contract, "decode_teacher_forced: frame must be [BOS, ..., EOS]");
  require(tokens.size() <= ae.cfg.max_len + 2, errkind::dimension,
          "decode_teacher_forced: sequence too long");
  Var emb = tape.leaf(ae.embedding);
  DecoderLoop loop = begin_decode(tape, ae, enc);
  std::vector<Var> step_logits;
  step_logits.reserve(tokens.size() - 1);
  for (std::size_t j = 0; j + 1 < tokens.size(); ++j) {
    Var logits = decode_step(tape, ae, enc, loop, ad::embedding_row(emb, tokens[j]));
    step_logits.push_back(logits);
  }
  return ad::log_softmax_rows(ad::stack_rows(step_logits));
}

FreeRunResult decode_free_running(Tape& tape, const Autoencoder& ae, const Encoded& enc,
                                  Rng& rng, double tau, std::size_t max_len) {
  require(max_len >= 1, errkind::contract, "decode_free_running: max_len must be positive");
  Var emb = tape.leaf(ae.embedding);
  DecoderLoop loop = begin_decode(tape, ae, enc);
  FreeRunResult out;
  Var prev_emb = ad::embedding_row(emb, data::Vocab::kBos);
  for (std::size_t t = 0; t < max_len; ++t) {
    Var logits = decode_step(tape, ae, enc, loop, prev_emb);
    Var logp = ad::log_softmax_rows(logits);
    relax::GumbelSample s = relax::gumbel_softmax(tape, logp, rng, tau);
    out.steps.push_back({s, logp});
    if (s.token == data::Vocab::kEos) {
      out.hit_eos = true;
      break;
    }
    out.tokens.push_back(s.token);
    prev_emb = ad::matmul(s.onehot, emb);
  }
  return out;
}

std::vector<std::size_t> greedy_decode(Tape& tape, const Autoencoder& ae, const Encoded& enc,
                                       std::size_t max_len) {
  ad::NoGrad off(tape);
  Var emb = tape.leaf(ae.embedding);
  DecoderLoop loop = begin_decode(tape, ae, enc);
  std::vector<std::size_t> out;
  std::size_t prev = data::Vocab::kBos;
  for (std::size_t t = 0; t < max_len; ++t) {
    Var logits = decode_step(tape, ae, enc, loop, ad::embedding_row(emb, prev));
    std::size_t arg = 0;
    for (std::size_t j = 1; j < logits.size(); ++j)
      if (logits.data()[j] > logits.data()[arg]) arg = j;
    if (arg == data::Vocab::kEos) break;
    out.push_back(arg);
    prev = arg;
  }
  return out;
}

ClfVariant classifier_variant_from_string(const std::string& s) {
  if (s == "rnn") return ClfVariant::rnn;
  if (s == "cnn") return ClfVariant::cnn;
  if (s == "dan") return ClfVariant::dan;
  if (s == "pair") return ClfVariant::pair;
  fail(errkind::config, "unknown classifier variant: " + s);
}

std::string to_string(ClfVariant v) {
  switch (v) {
    case ClfVariant::rnn: return "rnn";
    case ClfVariant::cnn: return "cnn";
    case ClfVariant::dan: return "dan";
    case ClfVariant::pair: return "pair";
  }
  fail(errkind::contract, "bad classifier variant tag");
}

Classifier make_classifier(const ClassifierConfig& cfg, std::size_t vocab_size, Rng& rng) {
  require(cfg.num_classes >= 2, errkind::config, "classifier: need at least two classes");
  require(cfg.embed_dim >= 1 && cfg.hidden >= 1, errkind::config,
          "classifier: dimensions must be positive");
  Classifier clf;
  clf.cfg = cfg;
  clf.vocab_size = vocab_size;
  clf.embedding = init_uniform({vocab_size, cfg.embed_dim}, rng);
  std::size_t feat = 0;
  switch (cfg.variant) {
    case ClfVariant::rnn:
      clf.lstm = make_lstm(cfg.embed_dim, cfg.hidden, rng);
      feat = cfg.hidden;
      break;
    case ClfVariant::cnn: {
      require(!cfg.cnn_widths.empty() && cfg.cnn_filters >= 1, errkind::config,
              "classifier: cnn needs widths and filters");
      for (std::size_t w : cfg.cnn_widths) {
        require(w >= 1, errkind::config, "classifier: zero filter width");
        clf.conv_w.push_back(init_uniform({w * cfg.embed_dim, cfg.cnn_filters}, rng));
        clf.conv_b.push_back(init_zeros({cfg.cnn_filters}));
      }
      feat = cfg.cnn_widths.size() * cfg.cnn_filters;
      break;
    }
    case ClfVariant::dan:
      require(cfg.dan_word_dropout >= 0.0 && cfg.dan_word_dropout < 1.0, errkind::config,
              "classifier: dan word dropout must lie in [0,1)");
      clf.ff1_w = init_uniform({cfg.embed_dim, cfg.hidden}, rng);
      clf.ff1_b = init_zeros({cfg.hidden});
      clf.ff2_w = init_uniform({cfg.hidden, cfg.hidden}, rng);
      clf.ff2_b = init_zeros({cfg.hidden});
      feat = cfg.hidden;
      break;
    case ClfVariant::pair: {
      require(cfg.pair_combiner == "rich" || cfg.pair_combiner == "concat", errkind::config,
              "classifier: pair combiner must be 'rich' or 'concat'");
      clf.lstm = make_lstm(cfg.embed_dim, cfg.hidden, rng);
      feat = (cfg.pair_combiner == "rich") ? 4 * cfg.hidden : 2 * cfg.hidden;
      break;
    }
  }
  clf.head_w = init_uniform({feat, cfg.num_classes}, rng);
  clf.head_b = init_zeros({cfg.num_classes});
  return clf;
}

std::vector<std::pair<std::string, TensorPtr>> named_params(const Classifier& clf) {
  std::vector<std::pair<std::string, TensorPtr>> out;
  out.emplace_back("embedding", clf.embedding);
  switch (clf.cfg.variant) {
    case ClfVariant::rnn:
    case ClfVariant::pair:
      out.emplace_back("lstm.b", clf.lstm.b);
      out.emplace_back("lstm.w", clf.lstm.w);
      break;
    case ClfVariant::cnn:
      for (std::size_t i = 0; i < clf.conv_w.size(); ++i) {
        const std::string tag = "conv" + std::to_string(clf.cfg.cnn_widths[i]);
        out.emplace_back(tag + ".b", clf.conv_b[i]);
        out.emplace_back(tag + ".w", clf.conv_w[i]);
      }
      break;
    case ClfVariant::dan:
      out.emplace_back("ff1.b", clf.ff1_b);
      out.emplace_back("ff1.w", clf.ff1_w);
      out.emplace_back("ff2.b", clf.ff2_b);
      out.emplace_back("ff2.w", clf.ff2_w);
      break;
  }
  out.emplace_back("head.b", clf.head_b);
  out.emplace_back("head.w", clf.head_w);
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

Var embed_ids(Tape& tape, const TensorPtr& table, const std::vector<std::size_t>& ids) {
  return ad::embedding_gather(tape.leaf(table), ids);
}

namespace {

Var lstm_final_state(Tape& tape, const LstmParams& p, const Var& embedded) {
  const std::size_t t_len = embedded.t->shape[0];
  LstmState s = lstm_zero_state(tape, p.hidden);
  for (std::size_t t = 0; t < t_len; ++t) s = lstm_step(tape, p, ad::row(embedded, t), s);
  return s.h;
}

Var head(Tape& tape, const Classifier& clf, const Var& features) {
  return ad::add(ad::matmul(features, tape.leaf(clf.head_w)), tape.leaf(clf.head_b));
}

}  // namespace

Var classify(Tape& tape, const Classifier& clf, const Var& embedded, Rng* dropout_rng) {
  require(embedded.t->rank() == 2 && embedded.t->shape[0] >= 1, errkind::dimension,
          "classify: non-empty {T,d} input required");
  require(embedded.t->shape[1] == clf.cfg.embed_dim, errkind::dimension,
          "classify: embedding dimension mismatch");
  switch (clf.cfg.variant) {
    case ClfVariant::rnn:
      return head(tape, clf, lstm_final_state(tape, clf.lstm, embedded));
    case ClfVariant::cnn: {
      std::size_t max_w = 0;
      for (std::size_t w : clf.cfg.cnn_widths) max_w = std::max(max_w, w);
      Var x = embedded;
      if (x.t->shape[0] < max_w) x = ad::pad_rows(x, max_w);
      std::vector<Var> pooled;
      for (std::size_t i = 0; i < clf.cfg.cnn_widths.size(); ++i) {
        Var patches = ad::time_patches(x, clf.cfg.cnn_widths[i]);
        Var conv = ad::add_rowwise(ad::matmul(patches, tape.leaf(clf.conv_w[i])),
                                   tape.leaf(clf.conv_b[i]));
        pooled.push_back(ad::max_over_time(ad::tanh(conv)));
      }
      return head(tape, clf, ad::concat(pooled));
    }
    case ClfVariant::dan: {
      const std::size_t t_len = embedded.t->shape[0];
      Var avg = ad::mean_rows(embedded);
      if (dropout_rng != nullptr && clf.cfg.dan_word_dropout > 0.0) {
        Tensor mask = Tensor::zeros({t_len, clf.cfg.embed_dim});
        std::size_t kept = 0;
        for (std::size_t t = 0; t < t_len; ++t) {
          if (dropout_rng->uniform() >= clf.cfg.dan_word_dropout) {
            ++kept;
            for (std::size_t j = 0; j < clf.cfg.embed_dim; ++j) mask.at(t, j) = 1.0;
          }
        }
        if (kept > 0 && kept < t_len) {
          Var masked = ad::mul(embedded, tape.constant(std::move(mask)));
          avg = ad::axpb(ad::mean_rows(masked),
                         static_cast<double>(t_len) / static_cast<double>(kept), 0.0);
        }  // all dropped: fall back to the plain mean
      }
      Var h1 = ad::tanh(ad::add(ad::matmul(avg, tape.leaf(clf.ff1_w)), tape.leaf(clf.ff1_b)));
      Var h2 = ad::tanh(ad::add(ad::matmul(h1, tape.leaf(clf.ff2_w)), tape.leaf(clf.ff2_b)));
      return head(tape, clf, h2);
    }
    case ClfVariant::pair:
      fail(errkind::contract, "classify: pair variant needs classify_pair");
  }
  fail(errkind::contract, "classify: bad variant tag");
}

Var classify_pair(Tape& tape, const Classifier& clf, const Var& premise,
                  const Var& hypothesis) {
  require(clf.cfg.variant == ClfVariant::pair, errkind::contract,
          "classify_pair: classifier is not the pair variant");
  Var u = lstm_final_state(tape, clf.lstm, premise);
  Var v = lstm_final_state(tape, clf.lstm, hypothesis);
  Var feat = (clf.cfg.pair_combiner == "rich")
                 ? ad::concat({u, v, ad::abs(ad::sub(u, v)), ad::mul(u, v)})
                 : ad::concat({u, v});
  return head(tape, clf, feat);
}

}  // namespace sift::model
