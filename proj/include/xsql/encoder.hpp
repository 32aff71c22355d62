#pragma once

#include <vector>

#include "xsql/graph.hpp"
#include "xsql/rng.hpp"
#include "xsql/sequence.hpp"

namespace xsql {

struct EncoderConfig {
  int d = 64;
  int layers = 2;
  int heads = 4;
  int ffn_mult = 4;
  int max_seq_len = 96;
  int vocab_size = 0;
  Real dropout = 0.1;

  void validate() const;
};

struct EncoderLayerParams {
  Parameter* wq;
  Parameter* bq;
  Parameter* wk;
  Parameter* bk;
  Parameter* wv;
  Parameter* bv;
  Parameter* wo;
  Parameter* bo;
  Parameter* ln1_gain;
  Parameter* ln1_bias;
  Parameter* w1;
  Parameter* b1;
  Parameter* w2;
  Parameter* b2;
  Parameter* ln2_gain;
  Parameter* ln2_bias;
};

struct EncoderParams {
  Parameter* tok_emb;   // [vocab_size x d]
  Parameter* pos_emb;   // [max_seq_len x d]
  Parameter* type_emb;  // [4 x d]
  Parameter* emb_ln_gain;
  Parameter* emb_ln_bias;
  std::vector<EncoderLayerParams> layers;
};

/// Registers every encoder parameter in a fixed order and initializes:
/// normal(0, 0.02) embeddings and linear weights, zero biases, unit
/// layer-norm gains.
EncoderParams init_encoder(ParameterStore& store, const EncoderConfig& config, Rng& rng);

/// Per-position encoder states, sliced by the input spans. `col_tokens`
/// includes the special empty column, last, as a 1-token slice.
struct EncoderOutput {
  NodeId all;    // [T x d]
  NodeId h_ctx;  // [1 x d]
  NodeId h_q;    // [n x d]
  std::vector<NodeId> col_tokens;
  int question_len = 0;
};

/// Runs the encoder. Dropout is applied only when `train` is set; `rng` may
/// be null in that case.
EncoderOutput encode(Graph& g, const InputSequence& seq, const EncoderParams& params,
                     const EncoderConfig& config, bool train = false, Rng* rng = nullptr);

}  // namespace xsql
