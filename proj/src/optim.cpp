#include "srb/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace srb {

Adam::Adam(std::vector<Tensor> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const Tensor& p : params_) {
    if (!p->requires_grad)
      throw std::invalid_argument("Adam: parameter without requires_grad");
    m_.emplace_back(p->value.size(), 0.0);
    v_.emplace_back(p->value.size(), 0.0);
  }
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (size_t i = 0; i < params_.size(); ++i) {
    TensorNode& p = *params_[i];
    std::vector<double>& m = m_[i];
    std::vector<double>& v = v_[i];
    for (size_t k = 0; k < p.value.size(); ++k) {
      const double g = p.grad[k];
      m[k] = cfg_.beta1 * m[k] + (1.0 - cfg_.beta1) * g;
      v[k] = cfg_.beta2 * v[k] + (1.0 - cfg_.beta2) * g * g;
      const double m_hat = m[k] / bc1;
      const double v_hat = v[k] / bc2;
      p.value[k] -= cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
    }
  }
}

double global_grad_norm(const std::vector<Tensor>& params) {
  double sq = 0.0;
  for (const Tensor& p : params)
    for (double g : p->grad) sq += g * g;
  return std::sqrt(sq);
}

double clip_gradients(const std::vector<Tensor>& params, double max_norm) {
  const double norm = global_grad_norm(params);
  // The slack keeps clipping idempotent: rescaling can land the norm one
  // ulp above max_norm, which must not trigger a second rescale.
  if (norm > max_norm * (1.0 + 1e-12)) {
    const double s = max_norm / norm;
    for (const Tensor& p : params)
      for (double& g : p->grad) g *= s;
  }
  return norm;
}

}  // namespace srb
