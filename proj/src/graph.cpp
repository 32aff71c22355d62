#include "xsql/graph.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace xsql {

Parameter& ParameterStore::create(const std::string& name, std::vector<int> shape) {
  if (find(name) != nullptr) {
    throw std::invalid_argument("duplicate parameter name: " + name);
  }
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->value = Tensor::zeros(shape);
  p->grad = Tensor::zeros(shape);
  params_.push_back(std::move(p));
  return *params_.back();
}

Parameter* ParameterStore::find(const std::string& name) {
  for (auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

const Parameter* ParameterStore::find(const std::string& name) const {
  for (const auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

std::size_t ParameterStore::total_values() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

void ParameterStore::zero_grads() {
  for (auto& p : params_) {
    std::fill(p->grad.values.begin(), p->grad.values.end(), 0.0);
  }
}

const Graph::Node& Graph::node(NodeId id) const {
  return nodes_[static_cast<std::size_t>(id)];
}

const Tensor& Graph::value(NodeId id) const { return value_of(node(id)); }

const Tensor& Graph::grad(NodeId id) const {
  const Node& n = node(id);
  if (n.bound) return n.bound->grad;
  return n.grad;
}

Tensor& Graph::grad_of(NodeId id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.bound) return n.bound->grad;
  if (n.grad.values.empty()) {
    n.grad = Tensor::zeros(value_of(n).shape);
  }
  return n.grad;
}

void Graph::accumulate(NodeId id, const Tensor& g) {
  Tensor& dst = grad_of(id);
  for (std::size_t i = 0; i < dst.values.size(); ++i) {
    dst.values[i] += g.values[i];
  }
}

NodeId Graph::push(Tensor val, std::function<void(Graph&, const Tensor&)> fn) {
  Node n;
  n.val = std::move(val);
  n.backward_fn = std::move(fn);
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Graph::constant(Tensor t) { return push(std::move(t), nullptr); }

NodeId Graph::param(Parameter& p) {
  Node n;
  n.bound = &p;
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Graph::matmul(NodeId a, NodeId b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  int p = ta.rows(), q = ta.cols(), q2 = tb.rows(), r = tb.cols();
  if (q != q2) {
    throw std::invalid_argument("matmul: inner dimensions disagree: " + shape_string(ta.shape) +
                                " vs " + shape_string(tb.shape));
  }
  Tensor out = Tensor::zeros({p, r});
  for (int i = 0; i < p; ++i) {
    for (int k = 0; k < q; ++k) {
      Real aik = ta.at(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < r; ++j) {
        out.at(i, j) += aik * tb.at(k, j);
      }
    }
  }
  return push(std::move(out), [a, b](Graph& g, const Tensor& up) {
    const Tensor& ta = g.value(a);
    const Tensor& tb = g.value(b);
    int p = ta.rows(), q = ta.cols(), r = tb.cols();
    Tensor da = Tensor::zeros(ta.shape);
    Tensor db = Tensor::zeros(tb.shape);
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j < r; ++j) {
        Real u = up.at(i, j);
        if (u == 0.0) continue;
        for (int k = 0; k < q; ++k) {
          da.values[static_cast<std::size_t>(i) * q + k] += u * tb.at(k, j);
          db.values[static_cast<std::size_t>(k) * r + j] += u * ta.at(i, k);
        }
      }
    }
    g.accumulate(a, da);
    g.accumulate(b, db);
  });
}

NodeId Graph::transpose(NodeId a) {
  const Tensor& ta = value(a);
  int r = ta.rows(), c = ta.cols();
  Tensor out = Tensor::zeros({c, r});
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) {
      out.at(j, i) = ta.at(i, j);
    }
  }
  return push(std::move(out), [a, r, c](Graph& g, const Tensor& up) {
    Tensor da = Tensor::zeros(g.value(a).shape);
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < c; ++j) {
        da.values[static_cast<std::size_t>(i) * c + j] = up.at(j, i);
      }
    }
    g.accumulate(a, da);
  });
}

NodeId Graph::add(NodeId a, NodeId b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  if (!ta.same_shape(tb)) {
    throw std::invalid_argument("add: shape mismatch: " + shape_string(ta.shape) + " vs " +
                                shape_string(tb.shape));
  }
  Tensor out = ta;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += tb.values[i];
  return push(std::move(out), [a, b](Graph& g, const Tensor& up) {
    g.accumulate(a, up);
    g.accumulate(b, up);
  });
}

NodeId Graph::add_row(NodeId m, NodeId row) {
  const Tensor& tm = value(m);
  const Tensor& tr = value(row);
  if (tr.rows() != 1 || tr.cols() != tm.cols()) {
    throw std::invalid_argument("add_row: row shape " + shape_string(tr.shape) +
                                " does not broadcast over " + shape_string(tm.shape));
  }
  Tensor out = tm;
  int n = tm.rows(), k = tm.cols();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) out.at(i, j) += tr.values[static_cast<std::size_t>(j)];
  }
  return push(std::move(out), [m, row, n, k](Graph& g, const Tensor& up) {
    g.accumulate(m, up);
    Tensor dr = Tensor::zeros(g.value(row).shape);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < k; ++j) dr.values[static_cast<std::size_t>(j)] += up.at(i, j);
    }
    g.accumulate(row, dr);
  });
}

NodeId Graph::add_scalar(NodeId m, NodeId s) {
  const Tensor& tm = value(m);
  const Tensor& ts = value(s);
  if (ts.size() != 1) {
    throw std::invalid_argument("add_scalar: expected scalar, got " + shape_string(ts.shape));
  }
  Tensor out = tm;
  for (Real& v : out.values) v += ts.values[0];
  return push(std::move(out), [m, s](Graph& g, const Tensor& up) {
    g.accumulate(m, up);
    Real total = 0.0;
    for (Real v : up.values) total += v;
    g.accumulate(s, Tensor(g.value(s).shape, {total}));
  });
}

NodeId Graph::scale(NodeId a, Real c) {
  Tensor out = value(a);
  for (Real& v : out.values) v *= c;
  return push(std::move(out), [a, c](Graph& g, const Tensor& up) {
    Tensor da = up;
    for (Real& v : da.values) v *= c;
    da.shape = g.value(a).shape;
    g.accumulate(a, da);
  });
}

NodeId Graph::softmax(NodeId a) {
  const Tensor& ta = value(a);
  if (ta.size() == 0 || ta.cols() == 0) {
    throw std::invalid_argument("softmax: empty input");
  }
  int n = ta.rows(), k = ta.cols();
  Tensor out = ta;
  for (int i = 0; i < n; ++i) {
    Real mx = out.at(i, 0);
    for (int j = 1; j < k; ++j) mx = std::max(mx, out.at(i, j));
    Real z = 0.0;
    for (int j = 0; j < k; ++j) {
      Real e = std::exp(out.at(i, j) - mx);
      out.at(i, j) = e;
      z += e;
    }
    for (int j = 0; j < k; ++j) out.at(i, j) /= z;
  }
  std::vector<Real> probs = out.values;
  return push(std::move(out), [a, n, k, probs](Graph& g, const Tensor& up) {
    Tensor da = Tensor::zeros(g.value(a).shape);
    for (int i = 0; i < n; ++i) {
      Real dot = 0.0;
      for (int j = 0; j < k; ++j) {
        dot += up.at(i, j) * probs[static_cast<std::size_t>(i) * k + j];
      }
      for (int j = 0; j < k; ++j) {
        std::size_t idx = static_cast<std::size_t>(i) * k + j;
        da.values[idx] = probs[idx] * (up.at(i, j) - dot);
      }
    }
    g.accumulate(a, da);
  });
}

NodeId Graph::layer_norm(NodeId x, NodeId gain, NodeId bias, Real eps) {
  const Tensor& tx = value(x);
  const Tensor& tg = value(gain);
  const Tensor& tb = value(bias);
  int n = tx.rows(), d = tx.cols();
  if (d < 2) {
    throw std::invalid_argument("layer_norm: normalized dimension must be >= 2, got " +
                                std::to_string(d));
  }
  if (tg.size() != static_cast<std::size_t>(d) || tb.size() != static_cast<std::size_t>(d)) {
    throw std::invalid_argument("layer_norm: gain/bias size must match dimension " +
                                std::to_string(d));
  }
  Tensor out = Tensor::zeros(tx.shape);
  std::vector<Real> xhat(static_cast<std::size_t>(n) * d);
  std::vector<Real> inv_std(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Real mean = 0.0;
    for (int j = 0; j < d; ++j) mean += tx.at(i, j);
    mean /= d;
    Real var = 0.0;
    for (int j = 0; j < d; ++j) {
      Real c = tx.at(i, j) - mean;
      var += c * c;
    }
    var /= d;
    Real is = 1.0 / std::sqrt(var + eps);
    inv_std[static_cast<std::size_t>(i)] = is;
    for (int j = 0; j < d; ++j) {
      std::size_t idx = static_cast<std::size_t>(i) * d + j;
      xhat[idx] = (tx.at(i, j) - mean) * is;
      out.values[idx] = tg.values[static_cast<std::size_t>(j)] * xhat[idx] +
                        tb.values[static_cast<std::size_t>(j)];
    }
  }
  return push(std::move(out),
              [x, gain, bias, n, d, xhat, inv_std](Graph& g, const Tensor& up) {
    const Tensor& tg = g.value(gain);
    Tensor dx = Tensor::zeros(g.value(x).shape);
    Tensor dgain = Tensor::zeros(tg.shape);
    Tensor dbias = Tensor::zeros(g.value(bias).shape);
    for (int i = 0; i < n; ++i) {
      Real mean_dy = 0.0, mean_dy_xhat = 0.0;
      for (int j = 0; j < d; ++j) {
        std::size_t idx = static_cast<std::size_t>(i) * d + j;
        Real dy = up.at(i, j) * tg.values[static_cast<std::size_t>(j)];
        mean_dy += dy;
        mean_dy_xhat += dy * xhat[idx];
        dgain.values[static_cast<std::size_t>(j)] += up.at(i, j) * xhat[idx];
        dbias.values[static_cast<std::size_t>(j)] += up.at(i, j);
      }
      mean_dy /= d;
      mean_dy_xhat /= d;
      for (int j = 0; j < d; ++j) {
        std::size_t idx = static_cast<std::size_t>(i) * d + j;
        Real dy = up.at(i, j) * tg.values[static_cast<std::size_t>(j)];
        dx.values[idx] = (dy - mean_dy - xhat[idx] * mean_dy_xhat) * inv_std[static_cast<std::size_t>(i)];
      }
    }
    g.accumulate(x, dx);
    g.accumulate(gain, dgain);
    g.accumulate(bias, dbias);
  });
}

NodeId Graph::gelu(NodeId a) {
  static constexpr Real kInvSqrt2 = 0.70710678118654752440;
  static constexpr Real kInvSqrt2Pi = 0.39894228040143267794;
  const Tensor& ta = value(a);
  Tensor out = ta;
  for (Real& v : out.values) {
    v = 0.5 * v * (1.0 + std::erf(v * kInvSqrt2));
  }
  return push(std::move(out), [a](Graph& g, const Tensor& up) {
    const Tensor& ta = g.value(a);
    Tensor da = Tensor::zeros(ta.shape);
    for (std::size_t i = 0; i < ta.values.size(); ++i) {
      Real xv = ta.values[i];
      Real cdf = 0.5 * (1.0 + std::erf(xv * kInvSqrt2));
      Real pdf = kInvSqrt2Pi * std::exp(-0.5 * xv * xv);
      da.values[i] = up.values[i] * (cdf + xv * pdf);
    }
    g.accumulate(a, da);
  });
}

NodeId Graph::tanh(NodeId a) {
  const Tensor& ta = value(a);
  Tensor out = ta;
  for (Real& v : out.values) v = std::tanh(v);
  return push(std::move(out), [a](Graph& g, const Tensor& up) {
    const Tensor& ta = g.value(a);
    Tensor da = Tensor::zeros(ta.shape);
    for (std::size_t i = 0; i < ta.values.size(); ++i) {
      Real t = std::tanh(ta.values[i]);
      da.values[i] = up.values[i] * (1.0 - t * t);
    }
    g.accumulate(a, da);
  });
}

NodeId Graph::gather_rows(Parameter& table, std::vector<int> ids) {
  int d = table.value.cols();
  int rows_in_table = table.value.rows();
  Tensor out = Tensor::zeros({static_cast<int>(ids.size()), d});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    int id = ids[i];
    if (id < 0 || id >= rows_in_table) {
      throw std::out_of_range("gather_rows: id " + std::to_string(id) + " outside table of " +
                              std::to_string(rows_in_table) + " rows");
    }
    for (int j = 0; j < d; ++j) {
      out.values[i * static_cast<std::size_t>(d) + j] = table.value.at(id, j);
    }
  }
  Parameter* tp = &table;
  return push(std::move(out), [tp, ids, d](Graph&, const Tensor& up) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (int j = 0; j < d; ++j) {
        tp->grad.at(ids[i], j) += up.values[i * static_cast<std::size_t>(d) + j];
      }
    }
  });
}

NodeId Graph::slice_rows(NodeId a, int begin, int end) {
  const Tensor& ta = value(a);
  int r = ta.rows(), c = ta.cols();
  if (begin < 0 || end > r || begin >= end) {
    throw std::out_of_range("slice_rows: range [" + std::to_string(begin) + ", " +
                            std::to_string(end) + ") outside " + shape_string(ta.shape));
  }
  Tensor out = Tensor::zeros({end - begin, c});
  std::copy(ta.values.begin() + static_cast<std::ptrdiff_t>(begin) * c,
            ta.values.begin() + static_cast<std::ptrdiff_t>(end) * c, out.values.begin());
  return push(std::move(out), [a, begin, c](Graph& g, const Tensor& up) {
    Tensor da = Tensor::zeros(g.value(a).shape);
    std::copy(up.values.begin(), up.values.end(),
              da.values.begin() + static_cast<std::ptrdiff_t>(begin) * c);
    g.accumulate(a, da);
  });
}

NodeId Graph::slice_cols(NodeId a, int begin, int end) {
  const Tensor& ta = value(a);
  int r = ta.rows(), c = ta.cols();
  if (begin < 0 || end > c || begin >= end) {
    throw std::out_of_range("slice_cols: range [" + std::to_string(begin) + ", " +
                            std::to_string(end) + ") outside " + shape_string(ta.shape));
  }
  Tensor out = Tensor::zeros({r, end - begin});
  for (int i = 0; i < r; ++i) {
    for (int j = begin; j < end; ++j) out.at(i, j - begin) = ta.at(i, j);
  }
  return push(std::move(out), [a, begin, end, r](Graph& g, const Tensor& up) {
    Tensor da = Tensor::zeros(g.value(a).shape);
    int c = g.value(a).cols();
    for (int i = 0; i < r; ++i) {
      for (int j = begin; j < end; ++j) {
        da.values[static_cast<std::size_t>(i) * c + j] = up.at(i, j - begin);
      }
    }
    g.accumulate(a, da);
  });
}

NodeId Graph::concat_rows(const std::vector<NodeId>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: no parts");
  int c = value(parts[0]).cols();
  int total = 0;
  for (NodeId p : parts) {
    if (value(p).cols() != c) {
      throw std::invalid_argument("concat_rows: column mismatch");
    }
    total += value(p).rows();
  }
  Tensor out = Tensor::zeros({total, c});
  int row = 0;
  for (NodeId p : parts) {
    const Tensor& tp = value(p);
    std::copy(tp.values.begin(), tp.values.end(),
              out.values.begin() + static_cast<std::ptrdiff_t>(row) * c);
    row += tp.rows();
  }
  return push(std::move(out), [parts, c](Graph& g, const Tensor& up) {
    int row = 0;
    for (NodeId p : parts) {
      const Tensor& tp = g.value(p);
      int r = tp.rows();
      Tensor dp = Tensor::zeros(tp.shape);
      std::copy(up.values.begin() + static_cast<std::ptrdiff_t>(row) * c,
                up.values.begin() + static_cast<std::ptrdiff_t>(row + r) * c, dp.values.begin());
      g.accumulate(p, dp);
      row += r;
    }
  });
}

NodeId Graph::concat_cols(const std::vector<NodeId>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no parts");
  int r = value(parts[0]).rows();
  int total = 0;
  for (NodeId p : parts) {
    if (value(p).rows() != r) {
      throw std::invalid_argument("concat_cols: row mismatch");
    }
    total += value(p).cols();
  }
  Tensor out = Tensor::zeros({r, total});
  int col = 0;
  for (NodeId p : parts) {
    const Tensor& tp = value(p);
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < tp.cols(); ++j) out.at(i, col + j) = tp.at(i, j);
    }
    col += tp.cols();
  }
  return push(std::move(out), [parts, r](Graph& g, const Tensor& up) {
    int col = 0;
    for (NodeId p : parts) {
      const Tensor& tp = g.value(p);
      Tensor dp = Tensor::zeros(tp.shape);
      for (int i = 0; i < r; ++i) {
        for (int j = 0; j < tp.cols(); ++j) {
          dp.values[static_cast<std::size_t>(i) * tp.cols() + j] = up.at(i, col + j);
        }
      }
      g.accumulate(p, dp);
      col += tp.cols();
    }
  });
}

NodeId Graph::dropout(NodeId a, Real rate, Rng& rng) {
  if (rate <= 0.0) return a;
  if (rate >= 1.0) throw std::invalid_argument("dropout: rate must be < 1");
  const Tensor& ta = value(a);
  Real keep_scale = 1.0 / (1.0 - rate);
  std::vector<Real> mask(ta.values.size());
  for (Real& m : mask) {
    m = rng.uniform01() < rate ? 0.0 : keep_scale;
  }
  Tensor out = ta;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] *= mask[i];
  return push(std::move(out), [a, mask](Graph& g, const Tensor& up) {
    Tensor da = up;
    for (std::size_t i = 0; i < da.values.size(); ++i) da.values[i] *= mask[i];
    da.shape = g.value(a).shape;
    g.accumulate(a, da);
  });
}

NodeId Graph::sum(NodeId a) {
  const Tensor& ta = value(a);
  Real total = 0.0;
  for (Real v : ta.values) total += v;
  return push(Tensor::scalar(total), [a](Graph& g, const Tensor& up) {
    Tensor da = Tensor::full(g.value(a).shape, up.values[0]);
    g.accumulate(a, da);
  });
}

NodeId Graph::add_scalars(const std::vector<NodeId>& parts) {
  if (parts.empty()) throw std::invalid_argument("add_scalars: no parts");
  Real total = 0.0;
  for (NodeId p : parts) {
    total += value(p).item();
  }
  return push(Tensor::scalar(total), [parts](Graph& g, const Tensor& up) {
    for (NodeId p : parts) g.accumulate(p, Tensor(g.value(p).shape, {up.values[0]}));
  });
}

NodeId Graph::cross_entropy(NodeId logits, int gold) {
  const Tensor& tl = value(logits);
  if (tl.rows() != 1) {
    throw std::invalid_argument("cross_entropy: logits must be a single row, got " +
                                shape_string(tl.shape));
  }
  int k = tl.cols();
  if (gold < 0 || gold >= k) {
    throw std::out_of_range("cross_entropy: gold index " + std::to_string(gold) +
                            " outside [0, " + std::to_string(k) + ")");
  }
  Real mx = tl.values[0];
  for (Real v : tl.values) mx = std::max(mx, v);
  Real z = 0.0;
  for (Real v : tl.values) z += std::exp(v - mx);
  Real loss = mx + std::log(z) - tl.values[static_cast<std::size_t>(gold)];
  std::vector<Real> probs(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) probs[static_cast<std::size_t>(j)] = std::exp(tl.values[static_cast<std::size_t>(j)] - mx) / z;
  return push(Tensor::scalar(loss), [logits, gold, probs](Graph& g, const Tensor& up) {
    Tensor dl = Tensor::zeros(g.value(logits).shape);
    for (std::size_t j = 0; j < probs.size(); ++j) {
      dl.values[j] = up.values[0] * (probs[j] - (static_cast<int>(j) == gold ? 1.0 : 0.0));
    }
    g.accumulate(logits, dl);
  });
}

NodeId Graph::kl_divergence(Tensor q, NodeId p) {
  const Tensor& tp = value(p);
  if (q.size() != tp.size()) {
    throw std::invalid_argument("kl_divergence: size mismatch: " + shape_string(q.shape) +
                                " vs " + shape_string(tp.shape));
  }
  Real loss = 0.0;
  for (std::size_t i = 0; i < q.values.size(); ++i) {
    Real qi = q.values[i];
    if (qi <= 0.0) continue;
    Real pi = tp.values[i];
    if (pi <= 0.0) {
      throw std::domain_error("kl_divergence: p must be strictly positive where q > 0");
    }
    loss += qi * std::log(qi / pi);
  }
  return push(Tensor::scalar(loss), [q, p](Graph& g, const Tensor& up) {
    const Tensor& tp = g.value(p);
    Tensor dp = Tensor::zeros(tp.shape);
    for (std::size_t i = 0; i < q.values.size(); ++i) {
      if (q.values[i] <= 0.0) continue;
      dp.values[i] = -up.values[0] * q.values[i] / tp.values[i];
    }
    g.accumulate(p, dp);
  });
}

void Graph::backward(NodeId loss, Real seed) {
  if (backward_done_) {
    throw std::logic_error("backward: already called on this record; build a new forward pass");
  }
  backward_done_ = true;
  const Tensor& lv = value(loss);
  if (lv.size() != 1) {
    throw std::invalid_argument("backward: loss must be scalar, got " + shape_string(lv.shape));
  }
  grad_of(loss).values[0] += seed;
  for (NodeId id = static_cast<NodeId>(nodes_.size()) - 1; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.backward_fn) continue;
    if (!n.bound && n.grad.values.empty()) continue;  // never reached the loss
    const Tensor& g = n.bound ? n.bound->grad : n.grad;
    n.backward_fn(*this, g);
  }
}

}  // namespace xsql
