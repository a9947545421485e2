#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace wernet {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  void validate() const;
  bool operator==(const AdamConfig&) const = default;
};

/// Adam with bias correction over one parameter group.
class Adam {
 public:
  Adam() = default;
  Adam(std::size_t size, const AdamConfig& config = {});

  void step(std::span<double> params, std::span<const double> grads, double lr);

  std::size_t size() const { return m_.size(); }
  long steps() const { return t_; }
  std::span<const double> first_moment() const { return m_; }
  std::span<const double> second_moment() const { return v_; }
  const AdamConfig& config() const { return config_; }

  bool operator==(const Adam&) const = default;

 private:
  AdamConfig config_;
  std::vector<double> m_;
  std::vector<double> v_;
  long t_ = 0;
};

/// Step decay: base_lr * decay^floor(epoch / period).
double lr_schedule(int epoch, double base_lr, double decay = 0.5, int period = 5);

}  // namespace wernet
