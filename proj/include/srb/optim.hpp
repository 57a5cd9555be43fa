#pragma once

#include <cstdint>
#include <vector>

#include "srb/tensor.hpp"

namespace srb {

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction. Moment arrays mirror the parameter shapes;
// the step counter increases by exactly one per step().
class Adam {
 public:
  explicit Adam(std::vector<Tensor> params, AdamConfig cfg = {});

  // One update from the gradients currently held in the parameters.
  void step();

  int64_t step_count() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  AdamConfig cfg_;
  int64_t t_ = 0;
};

// Global L2 norm over every gradient element.
double global_grad_norm(const std::vector<Tensor>& params);

// Scales all gradients by max_norm/norm when the global norm exceeds
// max_norm; otherwise leaves them untouched. Returns the pre-clip norm.
double clip_gradients(const std::vector<Tensor>& params, double max_norm);

}  // namespace srb
