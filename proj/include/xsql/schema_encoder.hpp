#pragma once

#include <vector>

#include "xsql/encoder.hpp"
#include "xsql/graph.hpp"

namespace xsql {

/// Parameters of the context-enhanced schema encoder: two projections of the
/// global context and the column tokens into a shared m-dimensional space.
struct SchemaEncoderParams {
  Parameter* u;  // [m x d]
  Parameter* v;  // [m x d]
  int m = 0;
  int d = 0;
};

SchemaEncoderParams init_schema_encoder(ParameterStore& store, int m, int d, Rng& rng);

/// One pooled vector per column, ordered as in the schema, the special empty
/// column last.
struct ColumnVectors {
  std::vector<NodeId> h;  // each [1 x d]

  int count() const { return static_cast<int>(h.size()); }
  int empty_index() const { return count() - 1; }
};

/// Alignment score of every column token against the global context:
///   s_t = <U h_ctx / sqrt(d), V h_t / sqrt(d)>
/// Returned as a [1 x n_tokens] node.
NodeId align_scores(Graph& g, NodeId h_ctx, NodeId col_tokens, const SchemaEncoderParams& params);

/// Pools a column's token vectors into one vector with softmax(align_scores)
/// weights: a convex combination of the token vectors.
NodeId pool_column(Graph& g, NodeId h_ctx, NodeId col_tokens, const SchemaEncoderParams& params);

/// Applies pool_column to every column of the encoder output, including the
/// 1-token empty column (for which pooling is the identity).
ColumnVectors enhance_schema(Graph& g, const EncoderOutput& enc,
                             const SchemaEncoderParams& params);

}  // namespace xsql
