#include "hosm/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace hosm {

void adam_step(Vec& theta, const Vec& grad, AdamState& state) {
  if (theta.size() != grad.size() || theta.size() != state.m.size() || theta.size() != state.v.size())
    throw std::invalid_argument("adam_step: shape mismatch");
  state.step += 1;
  const double b1 = state.beta1, b2 = state.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    state.m[i] = b1 * state.m[i] + (1.0 - b1) * grad[i];
    state.v[i] = b2 * state.v[i] + (1.0 - b2) * grad[i] * grad[i];
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    theta[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
  }
}

}  // namespace hosm
