#include "xsql/model.hpp"

#include <algorithm>
#include <stdexcept>

namespace xsql {

namespace {

std::vector<Real> row_values(const Graph& g, NodeId id) { return g.value(id).values; }

int argmax(const std::vector<Real>& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

XSqlModel::XSqlModel(const ModelConfig& cfg, std::uint64_t init_seed) : config(cfg) {
  config.encoder.validate();
  Rng rng(init_seed);
  encoder = init_encoder(store, config.encoder, rng);
  schema_encoder = init_schema_encoder(store, config.pooled_width(), config.encoder.d, rng);
  heads = init_heads(store, config.encoder.d, config.pooled_width(), rng);
}

NodeId training_loss(Graph& g, XSqlModel& model, const InputSequence& seq,
                     const Schema& schema, const GoldLabel& gold, bool train,
                     Rng* dropout_rng, LossParts* parts) {
  EncoderOutput enc = encode(g, seq, model.encoder, model.config.encoder, train, dropout_rng);
  ColumnVectors cols = enhance_schema(g, enc, model.schema_encoder);
  int num_user_cols = schema.num_columns();
  if (cols.count() != num_user_cols + 1) {
    throw std::invalid_argument("training_loss: schema and sequence disagree on column count");
  }
  validate_gold(gold, num_user_cols, enc.question_len);

  HeadLossInputs inputs;
  inputs.s_col_logits = s_col_logits(g, enc.h_ctx, cols, model.heads);
  inputs.s_agg_logits =
      s_agg_logits(g, enc.h_ctx, cols, gold.select_col,
                   schema.columns[static_cast<std::size_t>(gold.select_col)].ctype, model.heads);
  inputs.w_num_logits = w_num_logits(g, enc.h_ctx, model.heads);
  inputs.w_col_logits = w_col_logits(g, enc.h_ctx, cols, model.heads);
  for (const GoldCond& c : gold.conds) {
    inputs.w_op_logits.push_back(w_op_logits(g, enc.h_ctx, cols, c.col, model.heads));
    auto [start, end] = w_val_logits(g, enc.h_q, enc.h_ctx, cols, c.col, model.heads);
    inputs.start_logits.push_back(start);
    inputs.end_logits.push_back(end);
  }
  return total_loss(g, inputs, gold, num_user_cols, parts);
}

HeadDistributions inference_forward(Graph& g, XSqlModel& model, const InputSequence& seq,
                                    const Schema& schema) {
  EncoderOutput enc = encode(g, seq, model.encoder, model.config.encoder, /*train=*/false);
  ColumnVectors cols = enhance_schema(g, enc, model.schema_encoder);
  int num_user_cols = schema.num_columns();
  if (cols.count() != num_user_cols + 1) {
    throw std::invalid_argument("inference: schema and sequence disagree on column count");
  }

  HeadDistributions out;
  out.s_col = row_values(g, g.softmax(s_col_logits(g, enc.h_ctx, cols, model.heads)));
  int select_col = argmax(out.s_col);
  out.s_agg = row_values(
      g, g.softmax(s_agg_logits(g, enc.h_ctx, cols, select_col,
                                schema.columns[static_cast<std::size_t>(select_col)].ctype,
                                model.heads)));
  out.w_num = row_values(g, g.softmax(w_num_logits(g, enc.h_ctx, model.heads)));
  out.w_col = row_values(g, g.softmax(w_col_logits(g, enc.h_ctx, cols, model.heads)));
  for (int i = 0; i < num_user_cols; ++i) {
    out.w_op.push_back(row_values(g, g.softmax(w_op_logits(g, enc.h_ctx, cols, i, model.heads))));
    auto [start, end] = w_val_logits(g, enc.h_q, enc.h_ctx, cols, i, model.heads);
    out.val_start.push_back(row_values(g, g.softmax(start)));
    out.val_end.push_back(row_values(g, g.softmax(end)));
  }
  return out;
}

}  // namespace xsql
