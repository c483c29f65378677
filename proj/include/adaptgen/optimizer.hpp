#pragma once

#include <map>

#include "adaptgen/params.hpp"

namespace adaptgen {

// Adaptive-moment estimation. Frozen tensors are never touched: no update,
// no moment tracking, so their bytes stay identical across steps.
template <class Scalar>
class AdamOptimizer {
 public:
  using Mat = Matrix<Scalar>;

  explicit AdamOptimizer(Scalar learning_rate, Scalar beta1 = Scalar(0.9),
                         Scalar beta2 = Scalar(0.999), Scalar eps = Scalar(1e-8))
      : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(ParamStore<Scalar>& params, const GradMap<Scalar>& grads) {
    ++t_;
    const Scalar bc1 = Scalar(1) - std::pow(beta1_, Scalar(t_));
    const Scalar bc2 = Scalar(1) - std::pow(beta2_, Scalar(t_));
    for (auto& tensor : params.tensors()) {
      if (!tensor.trainable) continue;
      const Mat* g = grads.find(tensor.name);
      if (!g) continue;
      auto& [m, v] = moments_[tensor.name];
      if (m.size() == 0) {
        m = Mat::Zero(tensor.value.rows(), tensor.value.cols());
        v = Mat::Zero(tensor.value.rows(), tensor.value.cols());
      }
      m = beta1_ * m + (Scalar(1) - beta1_) * (*g);
      v = (beta2_ * v.array() + (Scalar(1) - beta2_) * g->array().square()).matrix();
      const auto m_hat = m.array() / bc1;
      const auto v_hat = v.array() / bc2;
      tensor.value.array() -= lr_ * m_hat / (v_hat.sqrt() + eps_);
    }
  }

  int steps_taken() const { return t_; }

 private:
  Scalar lr_, beta1_, beta2_, eps_;
  int t_ = 0;
  std::map<std::string, std::pair<Mat, Mat>> moments_;
};

// Plain gradient descent, used by small convergence tests.
template <class Scalar>
void sgd_step(ParamStore<Scalar>& params, const GradMap<Scalar>& grads, Scalar lr) {
  for (auto& tensor : params.tensors()) {
    if (!tensor.trainable) continue;
    if (const auto* g = grads.find(tensor.name)) tensor.value -= lr * (*g);
  }
}

}  // namespace adaptgen
