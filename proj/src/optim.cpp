#include "pccs/optim.hpp"

#include <cmath>

namespace pccs {

void optimizer_step(ParamSet& params, OptimState& state) {
  const AdamConfig& cfg = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);

  for (auto& [name, p] : params) {
    auto [m_it, m_new] = state.first_moment.try_emplace(name);
    auto [v_it, v_new] = state.second_moment.try_emplace(name);
    Tensor2& m = m_it->second;
    Tensor2& v = v_it->second;
    if (m_new) m = Tensor2::Zero(p.value.rows(), p.value.cols());
    if (v_new) v = Tensor2::Zero(p.value.rows(), p.value.cols());
    require_shape(m, p.value.rows(), p.value.cols(), "optimizer moment");

    m = cfg.beta1 * m + (1.0 - cfg.beta1) * p.grad;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * p.grad.cwiseProduct(p.grad);
    const auto m_hat = m.array() / correction1;
    const auto v_hat = v.array() / correction2;
    p.value.array() -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
    p.grad.setZero();
  }
}

}  // namespace pccs
