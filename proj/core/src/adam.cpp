#include "vpinn/adam.hpp"

namespace vpinn {

void AdamState::step(Eigen::Ref<Eigen::VectorXd> params,
                     const Eigen::Ref<const Eigen::VectorXd>& grad) {
  if (grad.size() != params.size() || params.size() != m_.size())
    throw std::invalid_argument("gradient shape does not match the Adam state");
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grad;
  v_ = cfg_.beta2 * v_.array() + (1.0 - cfg_.beta2) * grad.array().square();
  params.array() -=
      cfg_.lr * (m_.array() / bc1) / ((v_.array() / bc2).sqrt() + cfg_.eps);
  count_adam(static_cast<uint64_t>(params.size()));
}

}  // namespace vpinn
