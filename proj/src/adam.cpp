#include "threadweave/adam.hpp"

#include <cmath>

#include "threadweave/errors.hpp"

namespace tw {

void AdamState::init(std::span<Parameter* const> params) {
  bound_.clear();
  m_.clear();
  v_.clear();
  for (Parameter* p : params) {
    bound_.push_back(p);
    m_.emplace_back(p->value.rows, p->value.cols);
    v_.emplace_back(p->value.rows, p->value.cols);
  }
  t_ = 0;
  inited_ = true;
}

void AdamState::step(std::span<Parameter* const> params) {
  if (!inited_) throw NumericError("AdamState::step: state not initialized");
  if (params.size() != bound_.size())
    throw NumericError("AdamState::step: parameter set does not match init");
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i];
    if (params[i] != bound_[i] || !p.value.same_shape(m_[i]))
      throw NumericError("AdamState::step: parameter '" + p.name + "' does not match init");
    Tensor& m = m_[i];
    Tensor& v = v_[i];
    for (int j = 0; j < p.value.size(); ++j) {
      const double g = p.grad.a[j];
      m.a[j] = cfg_.beta1 * m.a[j] + (1.0 - cfg_.beta1) * g;
      v.a[j] = cfg_.beta2 * v.a[j] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = m.a[j] / bc1;
      const double vhat = v.a[j] / bc2;
      p.value.a[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
    p.zero_grad();
  }
}

}  // namespace tw
