#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "srb/rng.hpp"

namespace srb {

using Shape = std::vector<int>;

int64_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);

// Dense tensor node. Values are doubles in row-major order; grad is
// allocated (zero-filled) exactly when requires_grad is set. Nodes are
// immutable once created by a tape op; parameters persist across tapes
// and accumulate gradients until zero_grad.
struct TensorNode {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;

  int64_t size() const { return static_cast<int64_t>(value.size()); }
  int rank() const { return static_cast<int>(shape.size()); }
  // Scalar value; throws std::invalid_argument on non-scalar tensors.
  double item() const;
};

using Tensor = std::shared_ptr<TensorNode>;

Tensor tensor(Shape shape, std::vector<double> value, bool requires_grad = false);
Tensor zeros(Shape shape, bool requires_grad = false);
Tensor full(Shape shape, double v, bool requires_grad = false);
Tensor scalar(double v, bool requires_grad = false);

void zero_grad(const Tensor& t);
void zero_grad(std::span<const Tensor> params);

// Reverse-mode tape. Ops validate shapes, compute values eagerly and
// record one backward step per op; backward() replays the steps once in
// reverse execution order. A tape lives for one forward/backward pass
// and is confined to one worker.
class Tape {
 public:
  // [m,k] x [k,n] -> [m,n], or [m,k] x [k] -> [m].
  Tensor matmul(const Tensor& a, const Tensor& b);
  // v^T M: [m] x [m,n] -> [n].
  Tensor vecmat(const Tensor& v, const Tensor& m);

  Tensor add(const Tensor& a, const Tensor& b);
  Tensor sub(const Tensor& a, const Tensor& b);
  Tensor mul(const Tensor& a, const Tensor& b);
  Tensor sigmoid(const Tensor& x);
  Tensor tanh(const Tensor& x);
  Tensor log(const Tensor& x);
  Tensor scale(const Tensor& x, double c);
  // x scaled elementwise by a scalar tensor s; gradients flow into both.
  Tensor scale_by(const Tensor& x, const Tensor& s);

  // 1-D softmax with max-subtraction. Output is positive and sums to 1.
  Tensor softmax(const Tensor& x);
  // Softmax restricted to positions with mask != 0; masked entries are
  // exactly 0. Throws NumericError when every position is masked.
  Tensor softmax_masked(const Tensor& x, const std::vector<uint8_t>& mask);

  // Concatenation along axis; rank 1 (axis 0) and rank 2 (axis 0 or 1).
  Tensor concat(const Tensor& a, const Tensor& b, int axis = 0);

  // cos(u, v) in [-1, 1] for 1-D u, v of equal length. Throws
  // NumericError when either norm is below 1e-12.
  Tensor cosine(const Tensor& u, const Tensor& v);

  // Element i of a 1-D tensor as a scalar.
  Tensor pick(const Tensor& x, int index);
  // Contiguous range [start, start+len) of a 1-D tensor.
  Tensor slice(const Tensor& x, int start, int len);
  // Row r of a 2-D tensor as a 1-D tensor (embedding lookup).
  Tensor row(const Tensor& m, int r);
  // k tensors of shape [n] stacked into [k,n].
  Tensor stack_rows(const std::vector<Tensor>& rows);

  Tensor sum(const Tensor& x);

  // Inverted dropout: kept entries scaled by 1/(1-rate). rate == 0 is
  // the identity. Mask drawn from rng; no gradient into the mask.
  Tensor dropout(const Tensor& x, double rate, Rng& rng);

  // Seeds d(loss)/d(loss) = 1 and runs all recorded steps backward,
  // accumulating into grad fields. Loss must be scalar; a tape can be
  // run backward only once.
  void backward(const Tensor& loss);

  size_t num_ops() const { return steps_.size(); }

 private:
  Tensor make_output(Shape shape, std::vector<double> value,
                     std::initializer_list<const Tensor*> inputs);
  void record(std::function<void()> fn) { steps_.push_back(std::move(fn)); }

  std::vector<std::function<void()>> steps_;
  bool consumed_ = false;
};

}  // namespace srb
