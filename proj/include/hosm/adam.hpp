#pragma once

#include "hosm/linalg.hpp"

namespace hosm {

// Adam over a flat parameter vector. Defaults follow the usual
// beta1=0.9, beta2=0.999, eps=1e-8 convention.
struct AdamState {
  Vec m;
  Vec v;
  long step = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState init(std::size_t n, double lr = 1e-3) {
    AdamState s;
    s.m.assign(n, 0.0);
    s.v.assign(n, 0.0);
    s.lr = lr;
    return s;
  }
};

// Bias-corrected update; increments the step counter. Throws on shape mismatch.
void adam_step(Vec& theta, const Vec& grad, AdamState& state);

}  // namespace hosm
