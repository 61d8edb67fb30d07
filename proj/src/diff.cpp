#include "threadweave/diff.hpp"

#include <cmath>

#include "threadweave/errors.hpp"
#include "threadweave/kernels.hpp"

namespace tw {

const Tensor& Value::val() const { return tape->value_of(*this); }

double Value::scalar() const {
  const Tensor& t = val();
  if (t.size() != 1) throw NumericError("Value::scalar: not a scalar " + t.shape_str());
  return t.a[0];
}

Value detail_emit(Tape& t, Tensor val, std::vector<int> parents,
                  std::function<void(Tape&, std::vector<Tensor>&, int)> back,
                  const char* op_name) {
  if (!val.all_finite())
    throw NumericError(std::string(op_name) + ": non-finite result");
  Tape::Node node;
  node.grad_acc = Tensor(val.rows, val.cols);
  node.val = std::move(val);
  node.parents = std::move(parents);
  node.back = std::move(back);
  t.nodes_.push_back(std::move(node));
  return Value{&t, static_cast<int>(t.nodes_.size()) - 1};
}

Value Tape::constant(Tensor v) {
  return detail_emit(*this, std::move(v), {}, nullptr, "constant");
}

Value Tape::leaf(Parameter& p) {
  auto it = param_ids_.find(&p);
  if (it != param_ids_.end()) return Value{this, it->second};
  Value v = detail_emit(*this, p.value, {}, nullptr, "leaf");
  nodes_[v.id].source = &p;
  param_ids_.emplace(&p, v.id);
  return v;
}

void Tape::backward(Value loss) {
  if (loss.tape != this) throw NumericError("backward: value from another tape");
  if (nodes_[loss.id].val.size() != 1)
    throw NumericError("backward: loss must be scalar, got " + nodes_[loss.id].val.shape_str());

  // Scratch gradients per call so repeated backward passes accumulate
  // correctly into the persistent slots.
  std::vector<Tensor> g(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) g[i] = Tensor(nodes_[i].val.rows, nodes_[i].val.cols);
  g[loss.id].a[0] = 1.0;

  for (int id = loss.id; id >= 0; --id) {
    if (nodes_[id].back) nodes_[id].back(*this, g, id);
  }

  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    Node& n = nodes_[i];
    kernels::vadd(n.grad_acc.a.data(), g[i].a.data(), n.grad_acc.a.data(), n.grad_acc.a.size());
    if (n.source)
      kernels::vadd(n.source->grad.a.data(), g[i].a.data(), n.source->grad.a.data(),
                    g[i].a.size());
  }
}

namespace {

const Tensor& tv(Value v) { return v.tape->value_of(v); }

void require_same_tape(Value a, Value b, const char* op) {
  if (a.tape != b.tape) throw NumericError(std::string(op) + ": values from different tapes");
}

void require_same_shape(Value a, Value b, const char* op) {
  if (!tv(a).same_shape(tv(b)))
    throw NumericError(std::string(op) + ": shape mismatch " + tv(a).shape_str() + " vs " +
                       tv(b).shape_str());
}

}  // namespace

Value add(Value a, Value b) {
  require_same_tape(a, b, "add");
  require_same_shape(a, b, "add");
  Tensor out(tv(a).rows, tv(a).cols);
  kernels::vadd(tv(a).a.data(), tv(b).a.data(), out.a.data(), out.a.size());
  int pa = a.id, pb = b.id;
  return detail_emit(
      *a.tape, std::move(out), {pa, pb},
      [pa, pb](Tape&, std::vector<Tensor>& g, int self) {
        kernels::vadd(g[pa].a.data(), g[self].a.data(), g[pa].a.data(), g[pa].a.size());
        kernels::vadd(g[pb].a.data(), g[self].a.data(), g[pb].a.data(), g[pb].a.size());
      },
      "add");
}

Value sub(Value a, Value b) {
  require_same_tape(a, b, "sub");
  require_same_shape(a, b, "sub");
  Tensor out(tv(a).rows, tv(a).cols);
  for (int i = 0; i < out.size(); ++i) out.a[i] = tv(a).a[i] - tv(b).a[i];
  int pa = a.id, pb = b.id;
  return detail_emit(
      *a.tape, std::move(out), {pa, pb},
      [pa, pb](Tape&, std::vector<Tensor>& g, int self) {
        kernels::vadd(g[pa].a.data(), g[self].a.data(), g[pa].a.data(), g[pa].a.size());
        kernels::axpy(-1.0, g[self].a.data(), g[pb].a.data(), g[pb].a.size());
      },
      "sub");
}

Value mul(Value a, Value b) {
  require_same_tape(a, b, "mul");
  require_same_shape(a, b, "mul");
  Tensor out(tv(a).rows, tv(a).cols);
  kernels::vmul(tv(a).a.data(), tv(b).a.data(), out.a.data(), out.a.size());
  int pa = a.id, pb = b.id;
  return detail_emit(
      *a.tape, std::move(out), {pa, pb},
      [pa, pb](Tape& t, std::vector<Tensor>& g, int self) {
        const Tensor& av = t.value_of(Value{&t, pa});
        const Tensor& bv = t.value_of(Value{&t, pb});
        for (std::size_t i = 0; i < g[self].a.size(); ++i) {
          g[pa].a[i] += g[self].a[i] * bv.a[i];
          g[pb].a[i] += g[self].a[i] * av.a[i];
        }
      },
      "mul");
}

Value smul(Value s, Value x) {
  require_same_tape(s, x, "smul");
  if (tv(s).size() != 1) throw NumericError("smul: scaler must be 1x1, got " + tv(s).shape_str());
  const double sv = tv(s).a[0];
  Tensor out(tv(x).rows, tv(x).cols);
  for (int i = 0; i < out.size(); ++i) out.a[i] = sv * tv(x).a[i];
  int ps = s.id, px = x.id;
  return detail_emit(
      *x.tape, std::move(out), {ps, px},
      [ps, px](Tape& t, std::vector<Tensor>& g, int self) {
        const Tensor& xv = t.value_of(Value{&t, px});
        const double svv = t.value_of(Value{&t, ps}).a[0];
        g[ps].a[0] += kernels::dot(g[self].a.data(), xv.a.data(), xv.a.size());
        kernels::axpy(svv, g[self].a.data(), g[px].a.data(), g[px].a.size());
      },
      "smul");
}

Value scale(Value x, double c) {
  Tensor out(tv(x).rows, tv(x).cols);
  for (int i = 0; i < out.size(); ++i) out.a[i] = c * tv(x).a[i];
  int px = x.id;
  return detail_emit(
      *x.tape, std::move(out), {px},
      [px, c](Tape&, std::vector<Tensor>& g, int self) {
        kernels::axpy(c, g[self].a.data(), g[px].a.data(), g[px].a.size());
      },
      "scale");
}

Value matmul(Value a, Value b) {
  require_same_tape(a, b, "matmul");
  const Tensor& av = tv(a);
  const Tensor& bv = tv(b);
  if (av.cols != bv.rows)
    throw NumericError("matmul: shape mismatch " + av.shape_str() + " * " + bv.shape_str());
  Tensor out(av.rows, bv.cols);
  kernels::matmul(av.a.data(), bv.a.data(), out.a.data(), av.rows, av.cols, bv.cols);
  int pa = a.id, pb = b.id;
  return detail_emit(
      *a.tape, std::move(out), {pa, pb},
      [pa, pb](Tape& t, std::vector<Tensor>& g, int self) {
        const Tensor& A = t.value_of(Value{&t, pa});
        const Tensor& B = t.value_of(Value{&t, pb});
        const Tensor& G = g[self];
        // dA += G * B^T ; dB += A^T * G
        kernels::matmul_nt(G.a.data(), B.a.data(), g[pa].a.data(), G.rows, G.cols, B.rows, true);
        kernels::matmul_tn(A.a.data(), G.a.data(), g[pb].a.data(), A.rows, A.cols, G.cols, true);
      },
      "matmul");
}

namespace {

template <typename Fwd, typename Bwd>
Value unary_op(Value x, Fwd fwd, Bwd bwd, const char* name) {
  Tensor out(tv(x).rows, tv(x).cols);
  for (int i = 0; i < out.size(); ++i) out.a[i] = fwd(tv(x).a[i]);
  int px = x.id;
  return detail_emit(
      *x.tape, std::move(out), {px},
      [px, bwd](Tape& t, std::vector<Tensor>& g, int self) {
        const Tensor& xv = t.value_of(Value{&t, px});
        const Tensor& yv = t.value_of(Value{&t, self});
        for (std::size_t i = 0; i < g[self].a.size(); ++i)
          g[px].a[i] += g[self].a[i] * bwd(xv.a[i], yv.a[i]);
      },
      name);
}

}  // namespace

Value tanh(Value x) {
  return unary_op(
      x, [](double v) { return std::tanh(v); },
      [](double, double y) { return 1.0 - y * y; }, "tanh");
}

Value sigmoid(Value x) {
  return unary_op(
      x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); },
      [](double, double y) { return y * (1.0 - y); }, "sigmoid");
}

Value exp(Value x) {
  return unary_op(
      x, [](double v) { return std::exp(v); }, [](double, double y) { return y; }, "exp");
}

Value log(Value x) {
  return unary_op(
      x, [](double v) { return std::log(v); }, [](double xv, double) { return 1.0 / xv; }, "log");
}

Value softmax(Value x) {
  const Tensor& xv = tv(x);
  if (xv.cols != 1) throw NumericError("softmax: expected column vector, got " + xv.shape_str());
  Tensor out(xv.rows, 1);
  double mx = xv.a[0];
  for (double v : xv.a) mx = std::max(mx, v);
  double z = 0.0;
  for (int i = 0; i < xv.rows; ++i) {
    out.a[i] = std::exp(xv.a[i] - mx);
    z += out.a[i];
  }
  for (int i = 0; i < xv.rows; ++i) out.a[i] /= z;
  int px = x.id;
  return detail_emit(
      *x.tape, std::move(out), {px},
      [px](Tape& t, std::vector<Tensor>& g, int self) {
        const Tensor& y = t.value_of(Value{&t, self});
        const double s = kernels::dot(g[self].a.data(), y.a.data(), y.a.size());
        for (std::size_t i = 0; i < y.a.size(); ++i) g[px].a[i] += y.a[i] * (g[self].a[i] - s);
      },
      "softmax");
}

Value log_softmax(Value x) {
  const Tensor& xv = tv(x);
  if (xv.cols != 1)
    throw NumericError("log_softmax: expected column vector, got " + xv.shape_str());
  Tensor out(xv.rows, 1);
  double mx = xv.a[0];
  for (double v : xv.a) mx = std::max(mx, v);
  double z = 0.0;
  for (int i = 0; i < xv.rows; ++i) z += std::exp(xv.a[i] - mx);
  const double lz = mx + std::log(z);
  for (int i = 0; i < xv.rows; ++i) out.a[i] = xv.a[i] - lz;
  int px = x.id;
  return detail_emit(
      *x.tape, std::move(out), {px},
      [px](Tape& t, std::vector<Tensor>& g, int self) {
        const Tensor& y = t.value_of(Value{&t, self});
        const double s = kernels::vsum(g[self].a.data(), g[self].a.size());
        for (std::size_t i = 0; i < y.a.size(); ++i)
          g[px].a[i] += g[self].a[i] - std::exp(y.a[i]) * s;
      },
      "log_softmax");
}

Value concat_rows(std::span<const Value> parts) {
  if (parts.empty()) throw NumericError("concat_rows: no inputs");
  Tape& t = *parts[0].tape;
  int rows = 0;
  for (Value p : parts) {
    require_same_tape(parts[0], p, "concat_rows");
    if (tv(p).cols != 1)
      throw NumericError("concat_rows: expected column vectors, got " + tv(p).shape_str());
    rows += tv(p).rows;
  }
  Tensor out(rows, 1);
  std::vector<int> ids;
  int at = 0;
  for (Value p : parts) {
    for (int i = 0; i < tv(p).rows; ++i) out.a[at + i] = tv(p).a[i];
    at += tv(p).rows;
    ids.push_back(p.id);
  }
  return detail_emit(
      t, std::move(out), ids,
      [ids](Tape& tp, std::vector<Tensor>& g, int self) {
        int at2 = 0;
        for (int pid : ids) {
          const int n = tp.value_of(Value{&tp, pid}).rows;
          for (int i = 0; i < n; ++i) g[pid].a[i] += g[self].a[at2 + i];
          at2 += n;
        }
      },
      "concat_rows");
}

Value concat_cols(std::span<const Value> parts) {
  if (parts.empty()) throw NumericError("concat_cols: no inputs");
  Tape& t = *parts[0].tape;
  const int rows = tv(parts[0]).rows;
  int cols = 0;
  for (Value p : parts) {
    require_same_tape(parts[0], p, "concat_cols");
    if (tv(p).rows != rows) throw NumericError("concat_cols: row mismatch");
    cols += tv(p).cols;
  }
  Tensor out(rows, cols);
  std::vector<int> ids;
  int at = 0;
  for (Value p : parts) {
    const Tensor& pv = tv(p);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < pv.cols; ++c) out(r, at + c) = pv(r, c);
    at += pv.cols;
    ids.push_back(p.id);
  }
  return detail_emit(
      t, std::move(out), ids,
      [ids, rows, cols](Tape& tp, std::vector<Tensor>& g, int self) {
        int at2 = 0;
        for (int pid : ids) {
          Tensor& pg = g[pid];
          for (int r = 0; r < rows; ++r)
            for (int c = 0; c < pg.cols; ++c)
              pg(r, c) += g[self].a[static_cast<std::size_t>(r) * cols + at2 + c];
          at2 += pg.cols;
        }
      },
      "concat_cols");
}

Value slice_rows(Value x, int offset, int len) {
  const Tensor& xv = tv(x);
  if (offset < 0 || len <= 0 || offset + len > xv.rows)
    throw NumericError("slice_rows: range out of bounds");
  Tensor out(len, xv.cols);
  for (int r = 0; r < len; ++r)
    for (int c = 0; c < xv.cols; ++c) out(r, c) = xv(offset + r, c);
  int px = x.id;
  return detail_emit(
      *x.tape, std::move(out), {px},
      [px, offset, len](Tape& t, std::vector<Tensor>& g, int self) {
        Tensor& pg = g[px];
        const int cols = pg.cols;
        for (int r = 0; r < len; ++r)
          for (int c = 0; c < cols; ++c)
            pg(offset + r, c) += g[self].a[static_cast<std::size_t>(r) * cols + c];
      },
      "slice_rows");
}

Value reshape(Value x, int rows, int cols) {
  const Tensor& xv = tv(x);
  if (rows * cols != xv.size()) throw NumericError("reshape: size mismatch");
  Tensor out(rows, cols);
  out.a = xv.a;
  int px = x.id;
  return detail_emit(
      *x.tape, std::move(out), {px},
      [px](Tape&, std::vector<Tensor>& g, int self) {
        kernels::vadd(g[px].a.data(), g[self].a.data(), g[px].a.data(), g[px].a.size());
      },
      "reshape");
}

Value mean(Value x) {
  const Tensor& xv = tv(x);
  if (xv.size() == 0) throw NumericError("mean: empty input");
  Tensor out = Tensor::scalar(kernels::vsum(xv.a.data(), xv.a.size()) / xv.size());
  int px = x.id;
  const double inv = 1.0 / xv.size();
  return detail_emit(
      *x.tape, std::move(out), {px},
      [px, inv](Tape&, std::vector<Tensor>& g, int self) {
        const double gs = g[self].a[0] * inv;
        for (double& v : g[px].a) v += gs;
      },
      "mean");
}

Value sum(Value x) {
  const Tensor& xv = tv(x);
  Tensor out = Tensor::scalar(kernels::vsum(xv.a.data(), xv.a.size()));
  int px = x.id;
  return detail_emit(
      *x.tape, std::move(out), {px},
      [px](Tape&, std::vector<Tensor>& g, int self) {
        const double gs = g[self].a[0];
        for (double& v : g[px].a) v += gs;
      },
      "sum");
}

Value embed_row(Value table, int row) {
  const Tensor& m = tv(table);
  if (row < 0 || row >= m.rows) throw NumericError("embed_row: row out of range");
  Tensor out(m.cols, 1);
  for (int c = 0; c < m.cols; ++c) out.a[c] = m(row, c);
  int pt = table.id;
  return detail_emit(
      *table.tape, std::move(out), {pt},
      [pt, row](Tape& t, std::vector<Tensor>& g, int self) {
        Tensor& pg = g[pt];
        for (int c = 0; c < pg.cols; ++c) pg(row, c) += g[self].a[c];
      },
      "embed_row");
}

}  // namespace tw
