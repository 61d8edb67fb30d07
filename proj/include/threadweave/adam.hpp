#pragma once

#include <span>
#include <vector>

#include "threadweave/diff.hpp"

namespace tw {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam. Bound to a fixed parameter list at init; step() applies
// the update in place and zeroes the gradients afterwards.
class AdamState {
 public:
  AdamState() = default;
  explicit AdamState(AdamConfig cfg) : cfg_(cfg) {}

  void init(std::span<Parameter* const> params);
  void step(std::span<Parameter* const> params);

  long step_count() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  long t_ = 0;
  bool inited_ = false;
  std::vector<const Parameter*> bound_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
};

}  // namespace tw
