#include "xsql/schema_encoder.hpp"

#include <stdexcept>

namespace xsql {

SchemaEncoderParams init_schema_encoder(ParameterStore& store, int m, int d, Rng& rng) {
  if (m <= 0 || d <= 0) {
    throw std::invalid_argument("schema encoder: m and d must be positive");
  }
  SchemaEncoderParams p;
  p.m = m;
  p.d = d;
  p.u = &store.create("schema_enc.u", {m, d});
  p.v = &store.create("schema_enc.v", {m, d});
  for (Real& x : p.u->value.values) x = rng.normal(0.0, 0.02);
  for (Real& x : p.v->value.values) x = rng.normal(0.0, 0.02);
  return p;
}

NodeId align_scores(Graph& g, NodeId h_ctx, NodeId col_tokens,
                    const SchemaEncoderParams& params) {
  if (g.value(col_tokens).rows() < 1) {
    throw std::invalid_argument("align_scores: column has no tokens");
  }
  // <U h_ctx / sqrt(d), V h_t / sqrt(d)> = (h_ctx U^T)(h_t V^T)^T / d
  NodeId ctx_proj = g.matmul(h_ctx, g.transpose(g.param(*params.u)));        // [1 x m]
  NodeId tok_proj = g.matmul(col_tokens, g.transpose(g.param(*params.v)));   // [n x m]
  NodeId scores = g.matmul(ctx_proj, g.transpose(tok_proj));                 // [1 x n]
  return g.scale(scores, 1.0 / static_cast<Real>(params.d));
}

NodeId pool_column(Graph& g, NodeId h_ctx, NodeId col_tokens,
                   const SchemaEncoderParams& params) {
  NodeId alpha = g.softmax(align_scores(g, h_ctx, col_tokens, params));  // [1 x n]
  return g.matmul(alpha, col_tokens);                                    // [1 x d]
}

ColumnVectors enhance_schema(Graph& g, const EncoderOutput& enc,
                             const SchemaEncoderParams& params) {
  ColumnVectors cols;
  cols.h.reserve(enc.col_tokens.size());
  for (NodeId tokens : enc.col_tokens) {
    cols.h.push_back(pool_column(g, enc.h_ctx, tokens, params));
  }
  return cols;
}

}  // namespace xsql
