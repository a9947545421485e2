#include "wernet/optimizer.hpp"

#include <cmath>

#include "wernet/errors.hpp"

namespace wernet {

void AdamConfig::validate() const {
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ParameterError("Adam betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw ParameterError("Adam epsilon must be > 0");
}

Adam::Adam(std::size_t size, const AdamConfig& config) : config_(config), m_(size, 0.0), v_(size, 0.0) {
  config_.validate();
}

void Adam::step(std::span<double> params, std::span<const double> grads, double lr) {
  if (params.size() != m_.size() || grads.size() != m_.size()) throw ShapeError("Adam: parameter/gradient size mismatch");
  ++t_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    m_[i] = b1 * m_[i] + (1.0 - b1) * g;
    v_[i] = b2 * v_[i] + (1.0 - b2) * g * g;
    const double m_hat = m_[i] / c1;
    const double v_hat = v_[i] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + config_.epsilon);
  }
}

double lr_schedule(int epoch, double base_lr, double decay, int period) {
  if (epoch < 0 || period < 1) throw ParameterError("lr_schedule: epoch must be >= 0 and period >= 1");
  return base_lr * std::pow(decay, epoch / period);
}

}  // namespace wernet
