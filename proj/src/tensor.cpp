#include "srb/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "srb/errors.hpp"

namespace srb {

namespace {

void check_finite(std::span<const double> values, const char* op) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string(op) + ": non-finite result");
    }
  }
}

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

int64_t numel(const Shape& shape) {
  int64_t n = 1;
  for (int d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::string s = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

double TensorNode::item() const {
  require(size() == 1, "item: tensor is not scalar, shape " + shape_str(shape));
  return value[0];
}

Tensor tensor(Shape shape, std::vector<double> value, bool requires_grad) {
  for (int d : shape) require(d >= 0, "tensor: negative dimension");
  require(numel(shape) == static_cast<int64_t>(value.size()),
          "tensor: shape " + shape_str(shape) + " does not match " +
              std::to_string(value.size()) + " values");
  auto node = std::make_shared<TensorNode>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  node->requires_grad = requires_grad;
  if (requires_grad) node->grad.assign(node->value.size(), 0.0);
  return node;
}

Tensor zeros(Shape shape, bool requires_grad) {
  std::vector<double> v(static_cast<size_t>(numel(shape)), 0.0);
  return tensor(std::move(shape), std::move(v), requires_grad);
}

Tensor full(Shape shape, double fill, bool requires_grad) {
  std::vector<double> v(static_cast<size_t>(numel(shape)), fill);
  return tensor(std::move(shape), std::move(v), requires_grad);
}

Tensor scalar(double v, bool requires_grad) {
  return tensor({1}, {v}, requires_grad);
}

void zero_grad(const Tensor& t) {
  if (t->requires_grad) std::fill(t->grad.begin(), t->grad.end(), 0.0);
}

void zero_grad(std::span<const Tensor> params) {
  for (const Tensor& t : params) zero_grad(t);
}

Tensor Tape::make_output(Shape shape, std::vector<double> value,
                         std::initializer_list<const Tensor*> inputs) {
  bool needs_grad = false;
  for (const Tensor* in : inputs) {
    if ((*in)->requires_grad) needs_grad = true;
  }
  return tensor(std::move(shape), std::move(value), needs_grad);
}

Tensor Tape::matmul(const Tensor& a, const Tensor& b) {
  require(a->rank() == 2, "matmul: lhs must be rank 2, got " + shape_str(a->shape));
  require(b->rank() == 1 || b->rank() == 2,
          "matmul: rhs must be rank 1 or 2, got " + shape_str(b->shape));
  const int m = a->shape[0];
  const int k = a->shape[1];
  const bool vec = b->rank() == 1;
  const int kb = b->shape[0];
  const int n = vec ? 1 : b->shape[1];
  require(k == kb, "matmul: inner dimensions disagree, " + shape_str(a->shape) +
                       " x " + shape_str(b->shape));

  std::vector<double> out(static_cast<size_t>(m) * n, 0.0);
  for (int i = 0; i < m; ++i) {
    for (int p = 0; p < k; ++p) {
      const double av = a->value[i * k + p];
      for (int j = 0; j < n; ++j) out[i * n + j] += av * b->value[p * n + j];
    }
  }
  check_finite(out, "matmul");

  Tensor y = make_output(vec ? Shape{m} : Shape{m, n}, std::move(out), {&a, &b});
  if (y->requires_grad) {
    record([a, b, y, m, k, n]() {
      if (a->requires_grad) {
        // dA += dY B^T
        for (int i = 0; i < m; ++i)
          for (int p = 0; p < k; ++p) {
            double acc = 0;
            for (int j = 0; j < n; ++j)
              acc += y->grad[i * n + j] * b->value[p * n + j];
            a->grad[i * k + p] += acc;
          }
      }
      if (b->requires_grad) {
        // dB += A^T dY
        for (int p = 0; p < k; ++p)
          for (int j = 0; j < n; ++j) {
            double acc = 0;
            for (int i = 0; i < m; ++i)
              acc += a->value[i * k + p] * y->grad[i * n + j];
            b->grad[p * n + j] += acc;
          }
      }
    });
  }
  return y;
}

Tensor Tape::vecmat(const Tensor& v, const Tensor& m) {
  require(v->rank() == 1 && m->rank() == 2,
          "vecmat: expected [m] x [m,n], got " + shape_str(v->shape) + " x " +
              shape_str(m->shape));
  const int rows = m->shape[0];
  const int cols = m->shape[1];
  require(v->shape[0] == rows, "vecmat: dimensions disagree, " +
                                   shape_str(v->shape) + " x " + shape_str(m->shape));
  std::vector<double> out(cols, 0.0);
  for (int i = 0; i < rows; ++i) {
    const double vi = v->value[i];
    for (int j = 0; j < cols; ++j) out[j] += vi * m->value[i * cols + j];
  }
  check_finite(out, "vecmat");

  Tensor y = make_output({cols}, std::move(out), {&v, &m});
  if (y->requires_grad) {
    record([v, m, y, rows, cols]() {
      if (v->requires_grad) {
        for (int i = 0; i < rows; ++i) {
          double acc = 0;
          for (int j = 0; j < cols; ++j)
            acc += m->value[i * cols + j] * y->grad[j];
          v->grad[i] += acc;
        }
      }
      if (m->requires_grad) {
        for (int i = 0; i < rows; ++i)
          for (int j = 0; j < cols; ++j)
            m->grad[i * cols + j] += v->value[i] * y->grad[j];
      }
    });
  }
  return y;
}

Tensor Tape::add(const Tensor& a, const Tensor& b) {
  require(a->shape == b->shape, "add: shape mismatch, " + shape_str(a->shape) +
                                    " vs " + shape_str(b->shape));
  std::vector<double> out(a->value.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a->value[i] + b->value[i];
  check_finite(out, "add");
  Tensor y = make_output(a->shape, std::move(out), {&a, &b});
  if (y->requires_grad) {
    record([a, b, y]() {
      for (size_t i = 0; i < y->grad.size(); ++i) {
        if (a->requires_grad) a->grad[i] += y->grad[i];
        if (b->requires_grad) b->grad[i] += y->grad[i];
      }
    });
  }
  return y;
}

Tensor Tape::sub(const Tensor& a, const Tensor& b) {
  require(a->shape == b->shape, "sub: shape mismatch, " + shape_str(a->shape) +
                                    " vs " + shape_str(b->shape));
  std::vector<double> out(a->value.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a->value[i] - b->value[i];
  check_finite(out, "sub");
  Tensor y = make_output(a->shape, std::move(out), {&a, &b});
  if (y->requires_grad) {
    record([a, b, y]() {
      for (size_t i = 0; i < y->grad.size(); ++i) {
        if (a->requires_grad) a->grad[i] += y->grad[i];
        if (b->requires_grad) b->grad[i] -= y->grad[i];
      }
    });
  }
  return y;
}

Tensor Tape::mul(const Tensor& a, const Tensor& b) {
  require(a->shape == b->shape, "mul: shape mismatch, " + shape_str(a->shape) +
                                    " vs " + shape_str(b->shape));
  std::vector<double> out(a->value.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a->value[i] * b->value[i];
  check_finite(out, "mul");
  Tensor y = make_output(a->shape, std::move(out), {&a, &b});
  if (y->requires_grad) {
    record([a, b, y]() {
      for (size_t i = 0; i < y->grad.size(); ++i) {
        if (a->requires_grad) a->grad[i] += y->grad[i] * b->value[i];
        if (b->requires_grad) b->grad[i] += y->grad[i] * a->value[i];
      }
    });
  }
  return y;
}

Tensor Tape::sigmoid(const Tensor& x) {
  std::vector<double> out(x->value.size());
  for (size_t i = 0; i < out.size(); ++i) {
    const double v = x->value[i];
    // Split by sign to avoid exp overflow.
    out[i] = v >= 0 ? 1.0 / (1.0 + std::exp(-v))
                    : std::exp(v) / (1.0 + std::exp(v));
  }
  Tensor y = make_output(x->shape, std::move(out), {&x});
  if (y->requires_grad) {
    record([x, y]() {
      for (size_t i = 0; i < y->grad.size(); ++i)
        x->grad[i] += y->grad[i] * y->value[i] * (1.0 - y->value[i]);
    });
  }
  return y;
}

Tensor Tape::tanh(const Tensor& x) {
  std::vector<double> out(x->value.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(x->value[i]);
  Tensor y = make_output(x->shape, std::move(out), {&x});
  if (y->requires_grad) {
    record([x, y]() {
      for (size_t i = 0; i < y->grad.size(); ++i)
        x->grad[i] += y->grad[i] * (1.0 - y->value[i] * y->value[i]);
    });
  }
  return y;
}

Tensor Tape::log(const Tensor& x) {
  std::vector<double> out(x->value.size());
  for (size_t i = 0; i < out.size(); ++i) {
    if (x->value[i] <= 0.0)
      throw NumericError("log: non-positive input " + std::to_string(x->value[i]));
    out[i] = std::log(x->value[i]);
  }
  check_finite(out, "log");
  Tensor y = make_output(x->shape, std::move(out), {&x});
  if (y->requires_grad) {
    record([x, y]() {
      for (size_t i = 0; i < y->grad.size(); ++i)
        x->grad[i] += y->grad[i] / x->value[i];
    });
  }
  return y;
}

Tensor Tape::scale(const Tensor& x, double c) {
  std::vector<double> out(x->value.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = c * x->value[i];
  check_finite(out, "scale");
  Tensor y = make_output(x->shape, std::move(out), {&x});
  if (y->requires_grad) {
    record([x, y, c]() {
      for (size_t i = 0; i < y->grad.size(); ++i) x->grad[i] += c * y->grad[i];
    });
  }
  return y;
}

Tensor Tape::scale_by(const Tensor& x, const Tensor& s) {
  require(s->size() == 1, "scale_by: scale must be scalar, got " + shape_str(s->shape));
  const double sv = s->value[0];
  std::vector<double> out(x->value.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = sv * x->value[i];
  check_finite(out, "scale_by");
  Tensor y = make_output(x->shape, std::move(out), {&x, &s});
  if (y->requires_grad) {
    record([x, s, y, sv]() {
      if (x->requires_grad)
        for (size_t i = 0; i < y->grad.size(); ++i) x->grad[i] += sv * y->grad[i];
      if (s->requires_grad) {
        double acc = 0;
        for (size_t i = 0; i < y->grad.size(); ++i)
          acc += y->grad[i] * x->value[i];
        s->grad[0] += acc;
      }
    });
  }
  return y;
}

Tensor Tape::softmax(const Tensor& x) {
  require(x->rank() == 1 && x->size() >= 1, "softmax: expected non-empty 1-D input");
  return softmax_masked(x, std::vector<uint8_t>(x->value.size(), 1));
}

Tensor Tape::softmax_masked(const Tensor& x, const std::vector<uint8_t>& mask) {
  require(x->rank() == 1, "softmax: expected 1-D input, got " + shape_str(x->shape));
  require(mask.size() == x->value.size(), "softmax: mask length mismatch");
  double max_v = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) max_v = std::max(max_v, x->value[i]);
  if (!std::isfinite(max_v)) throw NumericError("softmax: all positions masked");

  std::vector<double> out(x->value.size(), 0.0);
  double denom = 0;
  for (size_t i = 0; i < out.size(); ++i) {
    if (!mask[i]) continue;
    out[i] = std::exp(x->value[i] - max_v);
    denom += out[i];
  }
  for (size_t i = 0; i < out.size(); ++i)
    if (mask[i]) out[i] /= denom;

  Tensor y = make_output(x->shape, std::move(out), {&x});
  if (y->requires_grad) {
    auto m = mask;
    record([x, y, m = std::move(m)]() {
      double dot = 0;
      for (size_t i = 0; i < y->grad.size(); ++i) dot += y->grad[i] * y->value[i];
      for (size_t i = 0; i < y->grad.size(); ++i)
        if (m[i]) x->grad[i] += y->value[i] * (y->grad[i] - dot);
    });
  }
  return y;
}

Tensor Tape::concat(const Tensor& a, const Tensor& b, int axis) {
  require(a->rank() == b->rank(), "concat: rank mismatch");
  require(axis >= 0 && axis < a->rank(), "concat: axis out of range");
  Shape out_shape = a->shape;
  for (int d = 0; d < a->rank(); ++d) {
    if (d == axis) {
      out_shape[d] = a->shape[d] + b->shape[d];
    } else {
      require(a->shape[d] == b->shape[d],
              "concat: non-concat dimensions disagree, " + shape_str(a->shape) +
                  " vs " + shape_str(b->shape));
    }
  }

  std::vector<double> out;
  out.reserve(static_cast<size_t>(numel(out_shape)));
  if (a->rank() == 1 || axis == 0) {
    out.insert(out.end(), a->value.begin(), a->value.end());
    out.insert(out.end(), b->value.begin(), b->value.end());
  } else {
    // rank 2, axis 1: interleave rows
    const int rows = a->shape[0];
    const int ca = a->shape[1], cb = b->shape[1];
    for (int i = 0; i < rows; ++i) {
      out.insert(out.end(), a->value.begin() + i * ca, a->value.begin() + (i + 1) * ca);
      out.insert(out.end(), b->value.begin() + i * cb, b->value.begin() + (i + 1) * cb);
    }
  }

  Tensor y = make_output(out_shape, std::move(out), {&a, &b});
  if (y->requires_grad) {
    record([a, b, y, axis]() {
      if (a->rank() == 1 || axis == 0) {
        const size_t na = a->value.size();
        if (a->requires_grad)
          for (size_t i = 0; i < na; ++i) a->grad[i] += y->grad[i];
        if (b->requires_grad)
          for (size_t i = 0; i < b->value.size(); ++i) b->grad[i] += y->grad[na + i];
      } else {
        const int rows = a->shape[0];
        const int ca = a->shape[1], cb = b->shape[1];
        for (int i = 0; i < rows; ++i) {
          if (a->requires_grad)
            for (int j = 0; j < ca; ++j)
              a->grad[i * ca + j] += y->grad[i * (ca + cb) + j];
          if (b->requires_grad)
            for (int j = 0; j < cb; ++j)
              b->grad[i * cb + j] += y->grad[i * (ca + cb) + ca + j];
        }
      }
    });
  }
  return y;
}

Tensor Tape::cosine(const Tensor& u, const Tensor& v) {
  require(u->rank() == 1 && v->rank() == 1 && u->size() == v->size(),
          "cosine: expected 1-D tensors of equal length, got " +
              shape_str(u->shape) + " and " + shape_str(v->shape));
  double dot = 0, uu = 0, vv = 0;
  for (int64_t i = 0; i < u->size(); ++i) {
    dot += u->value[i] * v->value[i];
    uu += u->value[i] * u->value[i];
    vv += v->value[i] * v->value[i];
  }
  const double nu = std::sqrt(uu);
  const double nv = std::sqrt(vv);
  if (nu < 1e-12 || nv < 1e-12)
    throw NumericError("cosine: degenerate vector (norm below 1e-12)");

  const double c = std::clamp(dot / (nu * nv), -1.0, 1.0);
  Tensor y = make_output({1}, {c}, {&u, &v});
  if (y->requires_grad) {
    record([u, v, y, c, nu, nv]() {
      const double g = y->grad[0];
      for (int64_t i = 0; i < u->size(); ++i) {
        if (u->requires_grad)
          u->grad[i] += g * (v->value[i] / (nu * nv) - c * u->value[i] / (nu * nu));
        if (v->requires_grad)
          v->grad[i] += g * (u->value[i] / (nu * nv) - c * v->value[i] / (nv * nv));
      }
    });
  }
  return y;
}

Tensor Tape::pick(const Tensor& x, int index) {
  require(x->rank() == 1, "pick: expected 1-D input");
  require(index >= 0 && index < x->shape[0],
          "pick: index " + std::to_string(index) + " out of range [0," +
              std::to_string(x->shape[0]) + ")");
  Tensor y = make_output({1}, {x->value[index]}, {&x});
  if (y->requires_grad) {
    record([x, y, index]() { x->grad[index] += y->grad[0]; });
  }
  return y;
}

Tensor Tape::slice(const Tensor& x, int start, int len) {
  require(x->rank() == 1, "slice: expected 1-D input");
  require(start >= 0 && len >= 0 && start + len <= x->shape[0],
          "slice: range [" + std::to_string(start) + "," +
              std::to_string(start + len) + ") out of bounds for " +
              shape_str(x->shape));
  std::vector<double> out(x->value.begin() + start, x->value.begin() + start + len);
  Tensor y = make_output({len}, std::move(out), {&x});
  if (y->requires_grad) {
    record([x, y, start, len]() {
      for (int i = 0; i < len; ++i) x->grad[start + i] += y->grad[i];
    });
  }
  return y;
}

Tensor Tape::row(const Tensor& m, int r) {
  require(m->rank() == 2, "row: expected 2-D input");
  require(r >= 0 && r < m->shape[0],
          "row: index " + std::to_string(r) + " out of range [0," +
              std::to_string(m->shape[0]) + ")");
  const int cols = m->shape[1];
  std::vector<double> out(m->value.begin() + static_cast<size_t>(r) * cols,
                          m->value.begin() + static_cast<size_t>(r + 1) * cols);
  Tensor y = make_output({cols}, std::move(out), {&m});
  if (y->requires_grad) {
    record([m, y, r, cols]() {
      for (int j = 0; j < cols; ++j)
        m->grad[static_cast<size_t>(r) * cols + j] += y->grad[j];
    });
  }
  return y;
}

Tensor Tape::stack_rows(const std::vector<Tensor>& rows) {
  require(!rows.empty(), "stack_rows: empty input");
  const int n = rows[0]->shape[0];
  bool needs_grad = false;
  std::vector<double> out;
  out.reserve(rows.size() * n);
  for (const Tensor& r : rows) {
    require(r->rank() == 1 && r->shape[0] == n, "stack_rows: row shapes disagree");
    out.insert(out.end(), r->value.begin(), r->value.end());
    needs_grad = needs_grad || r->requires_grad;
  }
  Tensor y = tensor({static_cast<int>(rows.size()), n}, std::move(out), needs_grad);
  if (needs_grad) {
    record([rows, y, n]() {
      for (size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i]->requires_grad) continue;
        for (int j = 0; j < n; ++j) rows[i]->grad[j] += y->grad[i * n + j];
      }
    });
  }
  return y;
}

Tensor Tape::sum(const Tensor& x) {
  double acc = 0;
  for (double v : x->value) acc += v;
  check_finite(std::span<const double>(&acc, 1), "sum");
  Tensor y = make_output({1}, {acc}, {&x});
  if (y->requires_grad) {
    record([x, y]() {
      for (size_t i = 0; i < x->value.size(); ++i) x->grad[i] += y->grad[0];
    });
  }
  return y;
}

Tensor Tape::dropout(const Tensor& x, double rate, Rng& rng) {
  require(rate >= 0.0 && rate < 1.0, "dropout: rate must be in [0,1)");
  if (rate == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - rate);
  auto mask = std::make_shared<std::vector<double>>(x->value.size());
  std::vector<double> out(x->value.size());
  for (size_t i = 0; i < out.size(); ++i) {
    (*mask)[i] = rng.next_double() < rate ? 0.0 : keep_scale;
    out[i] = x->value[i] * (*mask)[i];
  }
  Tensor y = make_output(x->shape, std::move(out), {&x});
  if (y->requires_grad) {
    record([x, y, mask]() {
      for (size_t i = 0; i < y->grad.size(); ++i)
        x->grad[i] += y->grad[i] * (*mask)[i];
    });
  }
  return y;
}

void Tape::backward(const Tensor& loss) {
  require(loss->size() == 1,
          "backward: loss must be scalar, got " + shape_str(loss->shape));
  if (consumed_) throw std::logic_error("backward: tape already consumed");
  consumed_ = true;
  if (!loss->requires_grad) return;  // nothing on the tape depends on parameters
  loss->grad[0] = 1.0;
  for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) (*it)();
}

}  // namespace srb
