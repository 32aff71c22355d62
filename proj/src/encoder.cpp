#include "xsql/encoder.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace xsql {

namespace {

constexpr Real kInitStddev = 0.02;
constexpr Real kLnEps = 1e-5;

Parameter& weight(ParameterStore& store, const std::string& name, std::vector<int> shape,
                  Rng& rng) {
  Parameter& p = store.create(name, std::move(shape));
  for (Real& v : p.value.values) v = rng.normal(0.0, kInitStddev);
  return p;
}

Parameter& zeros(ParameterStore& store, const std::string& name, std::vector<int> shape) {
  return store.create(name, std::move(shape));
}

Parameter& ones(ParameterStore& store, const std::string& name, std::vector<int> shape) {
  Parameter& p = store.create(name, std::move(shape));
  for (Real& v : p.value.values) v = 1.0;
  return p;
}

}  // namespace

void EncoderConfig::validate() const {
  if (d <= 0 || layers <= 0 || heads <= 0 || ffn_mult <= 0 || max_seq_len <= 0 ||
      vocab_size <= 0) {
    throw std::invalid_argument("encoder config: all dimensions must be positive");
  }
  if (d % heads != 0) {
    throw std::invalid_argument("encoder config: d=" + std::to_string(d) +
                                " not divisible by heads=" + std::to_string(heads));
  }
  if (dropout < 0.0 || dropout >= 1.0) {
    throw std::invalid_argument("encoder config: dropout must be in [0, 1)");
  }
}

EncoderParams init_encoder(ParameterStore& store, const EncoderConfig& config, Rng& rng) {
  config.validate();
  EncoderParams p;
  p.tok_emb = &weight(store, "encoder.tok_emb", {config.vocab_size, config.d}, rng);
  p.pos_emb = &weight(store, "encoder.pos_emb", {config.max_seq_len, config.d}, rng);
  p.type_emb = &weight(store, "encoder.type_emb", {kNumTypeIds, config.d}, rng);
  p.emb_ln_gain = &ones(store, "encoder.emb_ln.gain", {config.d});
  p.emb_ln_bias = &zeros(store, "encoder.emb_ln.bias", {config.d});

  int ffn = config.d * config.ffn_mult;
  for (int l = 0; l < config.layers; ++l) {
    std::string base = "encoder.layer" + std::to_string(l) + ".";
    EncoderLayerParams lp;
    lp.wq = &weight(store, base + "wq", {config.d, config.d}, rng);
    lp.bq = &zeros(store, base + "bq", {1, config.d});
    lp.wk = &weight(store, base + "wk", {config.d, config.d}, rng);
    lp.bk = &zeros(store, base + "bk", {1, config.d});
    lp.wv = &weight(store, base + "wv", {config.d, config.d}, rng);
    lp.bv = &zeros(store, base + "bv", {1, config.d});
    lp.wo = &weight(store, base + "wo", {config.d, config.d}, rng);
    lp.bo = &zeros(store, base + "bo", {1, config.d});
    lp.ln1_gain = &ones(store, base + "ln1.gain", {config.d});
    lp.ln1_bias = &zeros(store, base + "ln1.bias", {config.d});
    lp.w1 = &weight(store, base + "w1", {config.d, ffn}, rng);
    lp.b1 = &zeros(store, base + "b1", {1, ffn});
    lp.w2 = &weight(store, base + "w2", {ffn, config.d}, rng);
    lp.b2 = &zeros(store, base + "b2", {1, config.d});
    lp.ln2_gain = &ones(store, base + "ln2.gain", {config.d});
    lp.ln2_bias = &zeros(store, base + "ln2.bias", {config.d});
    p.layers.push_back(lp);
  }
  return p;
}

EncoderOutput encode(Graph& g, const InputSequence& seq, const EncoderParams& params,
                     const EncoderConfig& config, bool train, Rng* rng) {
  int t_len = seq.length();
  if (t_len == 0) throw std::invalid_argument("encode: empty sequence");
  if (t_len > config.max_seq_len) {
    throw std::invalid_argument("encode: sequence length " + std::to_string(t_len) +
                                " exceeds max_seq_len " + std::to_string(config.max_seq_len));
  }
  bool use_dropout = train && config.dropout > 0.0;
  if (use_dropout && rng == nullptr) {
    throw std::invalid_argument("encode: training-mode dropout requires an rng");
  }
  auto dropped = [&](NodeId x) { return use_dropout ? g.dropout(x, config.dropout, *rng) : x; };

  NodeId x = g.add(g.gather_rows(*params.tok_emb, seq.token_ids),
                   g.gather_rows(*params.pos_emb, seq.position_ids));
  x = g.add(x, g.gather_rows(*params.type_emb, seq.type_ids));
  x = g.layer_norm(x, g.param(*params.emb_ln_gain), g.param(*params.emb_ln_bias), kLnEps);
  x = dropped(x);

  int dh = config.d / config.heads;
  Real att_scale = 1.0 / std::sqrt(static_cast<Real>(dh));
  for (const EncoderLayerParams& lp : params.layers) {
    NodeId q = g.add_row(g.matmul(x, g.param(*lp.wq)), g.param(*lp.bq));
    NodeId k = g.add_row(g.matmul(x, g.param(*lp.wk)), g.param(*lp.bk));
    NodeId v = g.add_row(g.matmul(x, g.param(*lp.wv)), g.param(*lp.bv));

    std::vector<NodeId> head_ctx;
    head_ctx.reserve(static_cast<std::size_t>(config.heads));
    for (int h = 0; h < config.heads; ++h) {
      NodeId qh = g.slice_cols(q, h * dh, (h + 1) * dh);
      NodeId kh = g.slice_cols(k, h * dh, (h + 1) * dh);
      NodeId vh = g.slice_cols(v, h * dh, (h + 1) * dh);
      NodeId scores = g.scale(g.matmul(qh, g.transpose(kh)), att_scale);
      head_ctx.push_back(g.matmul(g.softmax(scores), vh));
    }
    NodeId att = g.add_row(g.matmul(g.concat_cols(head_ctx), g.param(*lp.wo)), g.param(*lp.bo));
    x = g.layer_norm(g.add(x, dropped(att)), g.param(*lp.ln1_gain), g.param(*lp.ln1_bias),
                     kLnEps);

    NodeId hidden = g.gelu(g.add_row(g.matmul(x, g.param(*lp.w1)), g.param(*lp.b1)));
    NodeId ffn = g.add_row(g.matmul(hidden, g.param(*lp.w2)), g.param(*lp.b2));
    x = g.layer_norm(g.add(x, dropped(ffn)), g.param(*lp.ln2_gain), g.param(*lp.ln2_bias),
                     kLnEps);
  }

  EncoderOutput out;
  out.all = x;
  out.h_ctx = g.slice_rows(x, seq.ctx_index, seq.ctx_index + 1);
  out.h_q = g.slice_rows(x, seq.question.begin, seq.question.end);
  out.question_len = seq.question.length();
  for (const Span& span : seq.columns) {
    out.col_tokens.push_back(g.slice_rows(x, span.begin, span.end));
  }
  return out;
}

}  // namespace xsql
