#include "sift/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

namespace sift::ad {

namespace {

void check_same_tape(const Var& a, const Var& b, const char* op) {
  require(a.tape && a.tape == b.tape, errkind::contract,
          std::string(op) + ": operands live on different tapes");
}

void check_same_shape(const Var& a, const Var& b, const char* op) {
  require(a.t->shape == b.t->shape, errkind::dimension,
          std::string(op) + ": shape mismatch");
}

void check_finite(const std::vector<double>& v, const char* op) {
  for (double x : v) {
    require(std::isfinite(x), errkind::numeric,
            std::string(op) + ": non-finite input");
  }
}

bool track(const Tape& tape, std::initializer_list<const Var*> ins) {
  if (!tape.grad_enabled()) return false;
  for (const Var* v : ins) {
    if (v->t->requires_grad) return true;
  }
  return false;
}

Var wrap(Tape& tape, Tensor out, bool tracked, std::function<void(const TensorPtr&)> bind) {
  TensorPtr op = make_tensor(std::move(out));
  if (tracked) {
    op->requires_grad = true;
    op->ensure_grad();
    bind(op);
  }
  return Var{&tape, op};
}

// Row-major C(m,n) += A(m,k) * B(k,n). Zero entries of A are skipped, which
// keeps one-hot-by-table products cheap.
void mm_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
            std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ar = a + i * k;
    double* cr = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      double av = ar[p];
      if (av == 0.0) continue;
      const double* br = b + p * n;
      for (std::size_t j = 0; j < n; ++j) cr[j] += av * br[j];
    }
  }
}

}  // namespace

Var add(const Var& a, const Var& b) {
  check_same_tape(a, b, "add");
  check_same_shape(a, b, "add");
  Tensor out = Tensor::zeros(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = a.t->data[i] + b.t->data[i];
  bool tr = track(*a.tape, {&a, &b});
  TensorPtr at = a.t, bt = b.t;
  return wrap(*a.tape, std::move(out), tr, [&tape = *a.tape, at, bt](const TensorPtr& op) {
    tape.push([at, bt, op] {
      const std::size_t n = op->size();
      if (at->requires_grad)
        for (std::size_t i = 0; i < n; ++i) at->grad[i] += op->grad[i];
      if (bt->requires_grad)
        for (std::size_t i = 0; i < n; ++i) bt->grad[i] += op->grad[i];
    });
  });
}

Var sub(const Var& a, const Var& b) {
  check_same_tape(a, b, "sub");
  check_same_shape(a, b, "sub");
  Tensor out = Tensor::zeros(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = a.t->data[i] - b.t->data[i];
  bool tr = track(*a.tape, {&a, &b});
  TensorPtr at = a.t, bt = b.t;
  return wrap(*a.tape, std::move(out), tr, [&tape = *a.tape, at, bt](const TensorPtr& op) {
    tape.push([at, bt, op] {
      const std::size_t n = op->size();
      if (at->requires_grad)
        for (std::size_t i = 0; i < n; ++i) at->grad[i] += op->grad[i];
      if (bt->requires_grad)
        for (std::size_t i = 0; i < n; ++i) bt->grad[i] -= op->grad[i];
    });
  });
}

Var mul(const Var& a, const Var& b) {
  check_same_tape(a, b, "mul");
  check_same_shape(a, b, "mul");
  Tensor out = Tensor::zeros(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = a.t->data[i] * b.t->data[i];
  bool tr = track(*a.tape, {&a, &b});
  TensorPtr at = a.t, bt = b.t;
  return wrap(*a.tape, std::move(out), tr, [&tape = *a.tape, at, bt](const TensorPtr& op) {
    tape.push([at, bt, op] {
      const std::size_t n = op->size();
      if (at->requires_grad)
        for (std::size_t i = 0; i < n; ++i) at->grad[i] += op->grad[i] * bt->data[i];
      if (bt->requires_grad)
        for (std::size_t i = 0; i < n; ++i) bt->grad[i] += op->grad[i] * at->data[i];
    });
  });
}

Var axpb(const Var& x, double a, double b) {
  Tensor out = Tensor::zeros(x.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = a * x.t->data[i] + b;
  bool tr = track(*x.tape, {&x});
  TensorPtr xt = x.t;
  return wrap(*x.tape, std::move(out), tr, [&tape = *x.tape, xt, a](const TensorPtr& op) {
    tape.push([xt, a, op] {
      for (std::size_t i = 0; i < op->size(); ++i) xt->grad[i] += a * op->grad[i];
    });
  });
}

Var matmul(const Var& a, const Var& b) {
  check_same_tape(a, b, "matmul");
  const Tensor& ta = *a.t;
  const Tensor& tb = *b.t;
  std::size_t m, k, n;
  std::vector<std::size_t> out_shape;
  if (ta.rank() == 2 && tb.rank() == 2) {
    m = ta.shape[0], k = ta.shape[1], n = tb.shape[1];
    require(tb.shape[0] == k, errkind::dimension, "matmul: inner dimensions differ");
    out_shape = {m, n};
  } else if (ta.rank() == 1 && tb.rank() == 2) {
    m = 1, k = ta.shape[0], n = tb.shape[1];
    require(tb.shape[0] == k, errkind::dimension, "matmul: inner dimensions differ");
    out_shape = {n};
  } else if (ta.rank() == 2 && tb.rank() == 1) {
    m = ta.shape[0], k = ta.shape[1], n = 1;
    require(tb.shape[0] == k, errkind::dimension, "matmul: inner dimensions differ");
    out_shape = {m};
  } else {
    fail(errkind::dimension, "matmul: expects matrix/vector operands");
  }
  Tensor out = Tensor::zeros(out_shape);
  mm_acc(ta.data.data(), tb.data.data(), out.data.data(), m, k, n);
  bool tr = track(*a.tape, {&a, &b});
  TensorPtr at = a.t, bt = b.t;
  return wrap(*a.tape, std::move(out), tr,
              [&tape = *a.tape, at, bt, m, k, n](const TensorPtr& op) {
                tape.push([at, bt, op, m, k, n] {
                  const double* gc = op->grad.data();
                  if (at->requires_grad) {
                    // dA += dC * B^T
                    const double* bd = bt->data.data();
                    double* ga = at->grad.data();
                    for (std::size_t i = 0; i < m; ++i) {
                      for (std::size_t p = 0; p < k; ++p) {
                        double s = 0.0;
                        const double* gr = gc + i * n;
                        const double* br = bd + p * n;
                        for (std::size_t j = 0; j < n; ++j) s += gr[j] * br[j];
                        ga[i * k + p] += s;
                      }
                    }
                  }
                  if (bt->requires_grad) {
                    // dB += A^T * dC
                    const double* ad = at->data.data();
                    double* gb = bt->grad.data();
                    for (std::size_t i = 0; i < m; ++i) {
                      const double* gr = gc + i * n;
                      for (std::size_t p = 0; p < k; ++p) {
                        double av = ad[i * k + p];
                        if (av == 0.0) continue;
                        double* gbr = gb + p * n;
                        for (std::size_t j = 0; j < n; ++j) gbr[j] += av * gr[j];
                      }
                    }
                  }
                });
              });
}

Var add_rowwise(const Var& m, const Var& r) {
  check_same_tape(m, r, "add_rowwise");
  require(m.t->rank() == 2 && r.t->rank() == 1 && m.t->shape[1] == r.t->shape[0],
          errkind::dimension, "add_rowwise: need {t,d} and {d}");
  const std::size_t t = m.t->shape[0], d = m.t->shape[1];
  Tensor out = Tensor::zeros({t, d});
  for (std::size_t i = 0; i < t; ++i)
    for (std::size_t j = 0; j < d; ++j) out.data[i * d + j] = m.t->data[i * d + j] + r.t->data[j];
  bool tr = track(*m.tape, {&m, &r});
  TensorPtr mt = m.t, rt = r.t;
  return wrap(*m.tape, std::move(out), tr, [&tape = *m.tape, mt, rt, t, d](const TensorPtr& op) {
    tape.push([mt, rt, op, t, d] {
      if (mt->requires_grad)
        for (std::size_t i = 0; i < t * d; ++i) mt->grad[i] += op->grad[i];
      if (rt->requires_grad)
        for (std::size_t i = 0; i < t; ++i)
          for (std::size_t j = 0; j < d; ++j) rt->grad[j] += op->grad[i * d + j];
    });
  });
}

Var dot(const Var& a, const Var& b) {
  check_same_tape(a, b, "dot");
  require(a.t->rank() == 1 && b.t->rank() == 1 && a.size() == b.size(),
          errkind::dimension, "dot: rank-1 operands of equal length required");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.t->data[i] * b.t->data[i];
  bool tr = track(*a.tape, {&a, &b});
  TensorPtr at = a.t, bt = b.t;
  return wrap(*a.tape, Tensor::scalar(s), tr, [&tape = *a.tape, at, bt](const TensorPtr& op) {
    tape.push([at, bt, op] {
      const double g = op->grad[0];
      if (at->requires_grad)
        for (std::size_t i = 0; i < at->size(); ++i) at->grad[i] += g * bt->data[i];
      if (bt->requires_grad)
        for (std::size_t i = 0; i < bt->size(); ++i) bt->grad[i] += g * at->data[i];
    });
  });
}

Var concat(const std::vector<Var>& parts) {
  require(!parts.empty(), errkind::dimension, "concat: no inputs");
  Tape& tape = *parts[0].tape;
  std::size_t total = 0;
  bool tr = tape.grad_enabled();
  bool any = false;
  for (const Var& p : parts) {
    check_same_tape(parts[0], p, "concat");
    require(p.t->rank() == 1, errkind::dimension, "concat: rank-1 inputs required");
    total += p.size();
    any = any || p.t->requires_grad;
  }
  tr = tr && any;
  Tensor out = Tensor::zeros({total});
  std::size_t off = 0;
  std::vector<TensorPtr> ins;
  ins.reserve(parts.size());
  for (const Var& p : parts) {
    std::copy(p.t->data.begin(), p.t->data.end(), out.data.begin() + off);
    off += p.size();
    ins.push_back(p.t);
  }
  return wrap(tape, std::move(out), tr, [&tape, ins](const TensorPtr& op) {
    tape.push([ins, op] {
      std::size_t off = 0;
      for (const TensorPtr& in : ins) {
        if (in->requires_grad)
          for (std::size_t i = 0; i < in->size(); ++i) in->grad[i] += op->grad[off + i];
        off += in->size();
      }
    });
  });
}

Var slice(const Var& v, std::size_t start, std::size_t len) {
  require(v.t->rank() == 1, errkind::dimension, "slice: rank-1 input required");
  require(len >= 1 && start + len <= v.size(), errkind::index, "slice: out of range");
  Tensor out = Tensor::zeros({len});
  std::copy(v.t->data.begin() + start, v.t->data.begin() + start + len, out.data.begin());
  bool tr = track(*v.tape, {&v});
  TensorPtr vt = v.t;
  return wrap(*v.tape, std::move(out), tr, [&tape = *v.tape, vt, start, len](const TensorPtr& op) {
    tape.push([vt, op, start, len] {
      for (std::size_t i = 0; i < len; ++i) vt->grad[start + i] += op->grad[i];
    });
  });
}

Var row(const Var& m, std::size_t i) {
  require(m.t->rank() == 2, errkind::dimension, "row: rank-2 input required");
  const std::size_t t = m.t->shape[0], d = m.t->shape[1];
  require(i < t, errkind::index, "row: index out of range");
  Tensor out = Tensor::zeros({d});
  std::copy(m.t->data.begin() + i * d, m.t->data.begin() + (i + 1) * d, out.data.begin());
  bool tr = track(*m.tape, {&m});
  TensorPtr mt = m.t;
  return wrap(*m.tape, std::move(out), tr, [&tape = *m.tape, mt, i, d](const TensorPtr& op) {
    tape.push([mt, i, d, op] {
      for (std::size_t j = 0; j < d; ++j) mt->grad[i * d + j] += op->grad[j];
    });
  });
}

Var stack_rows(const std::vector<Var>& rows) {
  require(!rows.empty(), errkind::dimension, "stack_rows: no inputs");
  Tape& tape = *rows[0].tape;
  const std::size_t d = rows[0].size();
  bool any = false;
  for (const Var& r : rows) {
    check_same_tape(rows[0], r, "stack_rows");
    require(r.t->rank() == 1 && r.size() == d, errkind::dimension,
            "stack_rows: rows must be rank-1 with equal length");
    any = any || r.t->requires_grad;
  }
  const std::size_t t = rows.size();
  Tensor out = Tensor::zeros({t, d});
  std::vector<TensorPtr> ins;
  ins.reserve(t);
  for (std::size_t i = 0; i < t; ++i) {
    std::copy(rows[i].t->data.begin(), rows[i].t->data.end(), out.data.begin() + i * d);
    ins.push_back(rows[i].t);
  }
  bool tr = tape.grad_enabled() && any;
  return wrap(tape, std::move(out), tr, [&tape, ins, d](const TensorPtr& op) {
    tape.push([ins, op, d] {
      for (std::size_t i = 0; i < ins.size(); ++i) {
        if (!ins[i]->requires_grad) continue;
        for (std::size_t j = 0; j < d; ++j) ins[i]->grad[j] += op->grad[i * d + j];
      }
    });
  });
}

Var mean_rows(const Var& m) {
  require(m.t->rank() == 2 && m.t->shape[0] >= 1, errkind::dimension,
          "mean_rows: non-empty {t,d} input required");
  const std::size_t t = m.t->shape[0], d = m.t->shape[1];
  Tensor out = Tensor::zeros({d});
  for (std::size_t i = 0; i < t; ++i)
    for (std::size_t j = 0; j < d; ++j) out.data[j] += m.t->data[i * d + j];
  for (std::size_t j = 0; j < d; ++j) out.data[j] /= static_cast<double>(t);
  bool tr = track(*m.tape, {&m});
  TensorPtr mt = m.t;
  return wrap(*m.tape, std::move(out), tr, [&tape = *m.tape, mt, t, d](const TensorPtr& op) {
    tape.push([mt, op, t, d] {
      const double inv = 1.0 / static_cast<double>(t);
      for (std::size_t i = 0; i < t; ++i)
        for (std::size_t j = 0; j < d; ++j) mt->grad[i * d + j] += inv * op->grad[j];
    });
  });
}

Var mean_all(const Var& x) {
  require(x.size() >= 1, errkind::dimension, "mean_all: empty input");
  double s = 0.0;
  for (double v : x.t->data) s += v;
  const double inv = 1.0 / static_cast<double>(x.size());
  bool tr = track(*x.tape, {&x});
  TensorPtr xt = x.t;
  return wrap(*x.tape, Tensor::scalar(s * inv), tr, [&tape = *x.tape, xt, inv](const TensorPtr& op) {
    tape.push([xt, inv, op] {
      const double g = op->grad[0] * inv;
      for (std::size_t i = 0; i < xt->size(); ++i) xt->grad[i] += g;
    });
  });
}

Var sum_all(const Var& x) {
  double s = 0.0;
  for (double v : x.t->data) s += v;
  bool tr = track(*x.tape, {&x});
  TensorPtr xt = x.t;
  return wrap(*x.tape, Tensor::scalar(s), tr, [&tape = *x.tape, xt](const TensorPtr& op) {
    tape.push([xt, op] {
      const double g = op->grad[0];
      for (std::size_t i = 0; i < xt->size(); ++i) xt->grad[i] += g;
    });
  });
}

Var sigmoid(const Var& x) {
  Tensor out = Tensor::zeros(x.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = x.t->data[i];
    if (v >= 0.0) {
      out.data[i] = 1.0 / (1.0 + std::exp(-v));
    } else {
      const double e = std::exp(v);
      out.data[i] = e / (1.0 + e);
    }
  }
  bool tr = track(*x.tape, {&x});
  TensorPtr xt = x.t;
  return wrap(*x.tape, std::move(out), tr, [&tape = *x.tape, xt](const TensorPtr& op) {
    tape.push([xt, op] {
      for (std::size_t i = 0; i < op->size(); ++i) {
        const double y = op->data[i];
        xt->grad[i] += op->grad[i] * y * (1.0 - y);
      }
    });
  });
}

Var tanh(const Var& x) {
  Tensor out = Tensor::zeros(x.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = std::tanh(x.t->data[i]);
  bool tr = track(*x.tape, {&x});
  TensorPtr xt = x.t;
  return wrap(*x.tape, std::move(out), tr, [&tape = *x.tape, xt](const TensorPtr& op) {
    tape.push([xt, op] {
      for (std::size_t i = 0; i < op->size(); ++i) {
        const double y = op->data[i];
        xt->grad[i] += op->grad[i] * (1.0 - y * y);
      }
    });
  });
}

Var log(const Var& x) {
  Tensor out = Tensor::zeros(x.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    require(x.t->data[i] > 0.0, errkind::numeric, "log: input must be positive");
    out.data[i] = std::log(x.t->data[i]);
  }
  bool tr = track(*x.tape, {&x});
  TensorPtr xt = x.t;
  return wrap(*x.tape, std::move(out), tr, [&tape = *x.tape, xt](const TensorPtr& op) {
    tape.push([xt, op] {
      for (std::size_t i = 0; i < op->size(); ++i) xt->grad[i] += op->grad[i] / xt->data[i];
    });
  });
}

Var exp(const Var& x) {
  Tensor out = Tensor::zeros(x.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = std::exp(x.t->data[i]);
  bool tr = track(*x.tape, {&x});
  TensorPtr xt = x.t;
  return wrap(*x.tape, std::move(out), tr, [&tape = *x.tape, xt](const TensorPtr& op) {
    tape.push([xt, op] {
      for (std::size_t i = 0; i < op->size(); ++i) xt->grad[i] += op->grad[i] * op->data[i];
    });
  });
}

Var abs(const Var& x) {
  Tensor out = Tensor::zeros(x.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = std::fabs(x.t->data[i]);
  bool tr = track(*x.tape, {&x});
  TensorPtr xt = x.t;
  return wrap(*x.tape, std::move(out), tr, [&tape = *x.tape, xt](const TensorPtr& op) {
    tape.push([xt, op] {
      for (std::size_t i = 0; i < op->size(); ++i) {
        const double v = xt->data[i];
        if (v > 0.0)
          xt->grad[i] += op->grad[i];
        else if (v < 0.0)
          xt->grad[i] -= op->grad[i];
        // subgradient at exactly zero: contribute nothing
      }
    });
  });
}

namespace {

// Shared stabilized softmax core; fills probs row by row.
void softmax_fill(const std::vector<double>& in, std::vector<double>& probs, std::size_t rows,
                  std::size_t cols, const char* op) {
  check_finite(in, op);
  for (std::size_t i = 0; i < rows; ++i) {
    const double* x = in.data() + i * cols;
    double* p = probs.data() + i * cols;
    double mx = x[0];
    for (std::size_t j = 1; j < cols; ++j) mx = std::max(mx, x[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      p[j] = std::exp(x[j] - mx);
      z += p[j];
    }
    for (std::size_t j = 0; j < cols; ++j) p[j] /= z;
  }
}

void softmax_dims(const Tensor& t, std::size_t& rows, std::size_t& cols, const char* op) {
  if (t.rank() == 1) {
    rows = 1, cols = t.shape[0];
  } else if (t.rank() == 2) {
    rows = t.shape[0], cols = t.shape[1];
  } else {
    fail(errkind::dimension, std::string(op) + ": rank-1 or rank-2 input required");
  }
  require(cols >= 1, errkind::dimension, std::string(op) + ": empty rows");
}

}  // namespace

Var softmax_rows(const Var& x) {
  std::size_t rows, cols;
  softmax_dims(*x.t, rows, cols, "softmax_rows");
  Tensor out = Tensor::zeros(x.shape());
  softmax_fill(x.t->data, out.data, rows, cols, "softmax_rows");
  bool tr = track(*x.tape, {&x});
  TensorPtr xt = x.t;
  return wrap(*x.tape, std::move(out), tr,
              [&tape = *x.tape, xt, rows, cols](const TensorPtr& op) {
                tape.push([xt, op, rows, cols] {
                  for (std::size_t i = 0; i < rows; ++i) {
                    const double* p = op->data.data() + i * cols;
                    const double* g = op->grad.data() + i * cols;
                    double dotpg = 0.0;
                    for (std::size_t j = 0; j < cols; ++j) dotpg += p[j] * g[j];
                    double* gx = xt->grad.data() + i * cols;
                    for (std::size_t j = 0; j < cols; ++j) gx[j] += p[j] * (g[j] - dotpg);
                  }
                });
              });
}

Var log_softmax_rows(const Var& x) {
  std::size_t rows, cols;
  softmax_dims(*x.t, rows, cols, "log_softmax_rows");
  check_finite(x.t->data, "log_softmax_rows");
  Tensor out = Tensor::zeros(x.shape());
  for (std::size_t i = 0; i < rows; ++i) {
    const double* xi = x.t->data.data() + i * cols;
    double* o = out.data.data() + i * cols;
    double mx = xi[0];
    for (std::size_t j = 1; j < cols; ++j) mx = std::max(mx, xi[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < cols; ++j) z += std::exp(xi[j] - mx);
    const double lz = std::log(z) + mx;
    for (std::size_t j = 0; j < cols; ++j) o[j] = xi[j] - lz;
  }
  bool tr = track(*x.tape, {&x});
  TensorPtr xt = x.t;
  return wrap(*x.tape, std::move(out), tr,
              [&tape = *x.tape, xt, rows, cols](const TensorPtr& op) {
                tape.push([xt, op, rows, cols] {
                  for (std::size_t i = 0; i < rows; ++i) {
                    const double* o = op->data.data() + i * cols;
                    const double* g = op->grad.data() + i * cols;
                    double gsum = 0.0;
                    for (std::size_t j = 0; j < cols; ++j) gsum += g[j];
                    double* gx = xt->grad.data() + i * cols;
                    for (std::size_t j = 0; j < cols; ++j) gx[j] += g[j] - std::exp(o[j]) * gsum;
                  }
                });
              });
}

Var cross_entropy_logits(const Var& logits, const std::vector<std::size_t>& targets) {
  std::size_t rows, cols;
  softmax_dims(*logits.t, rows, cols, "cross_entropy_logits");
  require(targets.size() == rows, errkind::dimension,
          "cross_entropy_logits: one target per row required");
  for (std::size_t t : targets)
    require(t < cols, errkind::index, "cross_entropy_logits: target out of range");
  std::vector<double> probs(rows * cols);
  softmax_fill(logits.t->data, probs, rows, cols, "cross_entropy_logits");
  double loss = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    const double* xi = logits.t->data.data() + i * cols;
    double mx = xi[0];
    for (std::size_t j = 1; j < cols; ++j) mx = std::max(mx, xi[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < cols; ++j) z += std::exp(xi[j] - mx);
    loss -= xi[targets[i]] - mx - std::log(z);
  }
  loss /= static_cast<double>(rows);
  bool tr = track(*logits.tape, {&logits});
  TensorPtr lt = logits.t;
  return wrap(*logits.tape, Tensor::scalar(loss), tr,
              [&tape = *logits.tape, lt, targets, probs, rows, cols](const TensorPtr& op) {
                tape.push([lt, targets, probs, rows, cols, op] {
                  const double g = op->grad[0] / static_cast<double>(rows);
                  for (std::size_t i = 0; i < rows; ++i) {
                    double* gl = lt->grad.data() + i * cols;
                    const double* p = probs.data() + i * cols;
                    for (std::size_t j = 0; j < cols; ++j) gl[j] += g * p[j];
                    gl[targets[i]] -= g;
                  }
                });
              });
}

Var max_over_time(const Var& m) {
  require(m.t->rank() == 2 && m.t->shape[0] >= 1, errkind::dimension,
          "max_over_time: non-empty {t,d} input required");
  const std::size_t t = m.t->shape[0], d = m.t->shape[1];
  Tensor out = Tensor::zeros({d});
  std::vector<std::size_t> arg(d, 0);
  for (std::size_t j = 0; j < d; ++j) {
    double best = m.t->data[j];
    for (std::size_t i = 1; i < t; ++i) {
      const double v = m.t->data[i * d + j];
      if (v > best) {  // strict: ties keep the earliest row
        best = v;
        arg[j] = i;
      }
    }
    out.data[j] = best;
  }
  bool tr = track(*m.tape, {&m});
  TensorPtr mt = m.t;
  return wrap(*m.tape, std::move(out), tr, [&tape = *m.tape, mt, arg, d](const TensorPtr& op) {
    tape.push([mt, arg, d, op] {
      for (std::size_t j = 0; j < d; ++j) mt->grad[arg[j] * d + j] += op->grad[j];
    });
  });
}

Var cosine_similarity(const Var& a, const Var& b) {
  check_same_tape(a, b, "cosine_similarity");
  require(a.t->rank() == 1 && b.t->rank() == 1 && a.size() == b.size(),
          errkind::dimension, "cosine_similarity: rank-1 operands of equal length");
  constexpr double kEps = 1e-12;
  double s = 0.0, qa = 0.0, qb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += a.t->data[i] * b.t->data[i];
    qa += a.t->data[i] * a.t->data[i];
    qb += b.t->data[i] * b.t->data[i];
  }
  const double na = std::sqrt(qa) + kEps;
  const double nb = std::sqrt(qb) + kEps;
  const double c = s / (na * nb);
  bool tr = track(*a.tape, {&a, &b});
  TensorPtr at = a.t, bt = b.t;
  return wrap(*a.tape, Tensor::scalar(c), tr,
              [&tape = *a.tape, at, bt, s, qa, qb, na, nb](const TensorPtr& op) {
                tape.push([at, bt, s, qa, qb, na, nb, op] {
                  const double g = op->grad[0];
                  if (at->requires_grad && qa > 0.0) {
                    const double c1 = 1.0 / (na * nb);
                    const double c2 = s / (na * na * nb * std::sqrt(qa));
                    for (std::size_t i = 0; i < at->size(); ++i)
                      at->grad[i] += g * (bt->data[i] * c1 - at->data[i] * c2);
                  }
                  if (bt->requires_grad && qb > 0.0) {
                    const double c1 = 1.0 / (na * nb);
                    const double c2 = s / (nb * nb * na * std::sqrt(qb));
                    for (std::size_t i = 0; i < bt->size(); ++i)
                      bt->grad[i] += g * (at->data[i] * c1 - bt->data[i] * c2);
                  }
                });
              });
}

Var embedding_row(const Var& e, std::size_t id) {
  require(e.t->rank() == 2, errkind::dimension, "embedding_row: table must be {V,d}");
  const std::size_t v = e.t->shape[0], d = e.t->shape[1];
  require(id < v, errkind::index, "embedding_row: id out of range");
  Tensor out = Tensor::zeros({d});
  std::copy(e.t->data.begin() + id * d, e.t->data.begin() + (id + 1) * d, out.data.begin());
  bool tr = track(*e.tape, {&e});
  TensorPtr et = e.t;
  return wrap(*e.tape, std::move(out), tr, [&tape = *e.tape, et, id, d](const TensorPtr& op) {
    tape.push([et, id, d, op] {
      for (std::size_t j = 0; j < d; ++j) et->grad[id * d + j] += op->grad[j];
    });
  });
}

Var embedding_gather(const Var& e, const std::vector<std::size_t>& ids) {
  require(e.t->rank() == 2, errkind::dimension, "embedding_gather: table must be {V,d}");
  require(!ids.empty(), errkind::dimension, "embedding_gather: empty id list");
  const std::size_t v = e.t->shape[0], d = e.t->shape[1];
  Tensor out = Tensor::zeros({ids.size(), d});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    require(ids[i] < v, errkind::index, "embedding_gather: id out of range");
    std::copy(e.t->data.begin() + ids[i] * d, e.t->data.begin() + (ids[i] + 1) * d,
              out.data.begin() + i * d);
  }
  bool tr = track(*e.tape, {&e});
  TensorPtr et = e.t;
  return wrap(*e.tape, std::move(out), tr, [&tape = *e.tape, et, ids, d](const TensorPtr& op) {
    tape.push([et, ids, d, op] {
      for (std::size_t i = 0; i < ids.size(); ++i)
        for (std::size_t j = 0; j < d; ++j) et->grad[ids[i] * d + j] += op->grad[i * d + j];
    });
  });
}

Var time_patches(const Var& m, std::size_t w) {
  require(m.t->rank() == 2, errkind::dimension, "time_patches: {t,d} input required");
  const std::size_t t = m.t->shape[0], d = m.t->shape[1];
  require(w >= 1 && w <= t, errkind::dimension,
          "time_patches: window must fit (pad rows first)");
  const std::size_t p = t - w + 1;
  Tensor out = Tensor::zeros({p, w * d});
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t k = 0; k < w; ++k)
      std::copy(m.t->data.begin() + (i + k) * d, m.t->data.begin() + (i + k + 1) * d,
                out.data.begin() + i * (w * d) + k * d);
  bool tr = track(*m.tape, {&m});
  TensorPtr mt = m.t;
  return wrap(*m.tape, std::move(out), tr,
              [&tape = *m.tape, mt, w, d, p](const TensorPtr& op) {
                tape.push([mt, w, d, p, op] {
                  for (std::size_t i = 0; i < p; ++i)
                    for (std::size_t k = 0; k < w; ++k)
                      for (std::size_t j = 0; j < d; ++j)
                        mt->grad[(i + k) * d + j] += op->grad[i * (w * d) + k * d + j];
                });
              });
}

Var pad_rows(const Var& m, std::size_t new_t) {
  require(m.t->rank() == 2, errkind::dimension, "pad_rows: {t,d} input required");
  const std::size_t t = m.t->shape[0], d = m.t->shape[1];
  require(new_t >= t, errkind::dimension, "pad_rows: cannot shrink");
  Tensor out = Tensor::zeros({new_t, d});
  std::copy(m.t->data.begin(), m.t->data.end(), out.data.begin());
  bool tr = track(*m.tape, {&m});
  TensorPtr mt = m.t;
  return wrap(*m.tape, std::move(out), tr, [&tape = *m.tape, mt, t, d](const TensorPtr& op) {
    tape.push([mt, t, d, op] {
      for (std::size_t i = 0; i < t * d; ++i) mt->grad[i] += op->grad[i];
    });
  });
}

Var straight_through(const Var& y) {
  require(y.t->rank() == 1 && y.size() >= 1, errkind::dimension,
          "straight_through: non-empty rank-1 input required");
  std::size_t arg = 0;
  for (std::size_t i = 1; i < y.size(); ++i)
    if (y.t->data[i] > y.t->data[arg]) arg = i;
  Tensor out = Tensor::zeros(y.shape());
  out.data[arg] = 1.0;
  bool tr = track(*y.tape, {&y});
  TensorPtr yt = y.t;
  return wrap(*y.tape, std::move(out), tr, [&tape = *y.tape, yt](const TensorPtr& op) {
    tape.push([yt, op] {
      for (std::size_t i = 0; i < op->size(); ++i) yt->grad[i] += op->grad[i];
    });
  });
}

}  // namespace sift::ad
