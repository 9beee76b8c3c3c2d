#pragma once

#include <cmath>

#include <Eigen/Core>

namespace prefelicit {

/// Adam moment state for gradient *ascent* on a dense vector.
class AdamAscent {
 public:
  AdamAscent(Eigen::Index n, double learning_rate, double beta1, double beta2, double eps)
      : m_(Eigen::VectorXd::Zero(n)),
        v_(Eigen::VectorXd::Zero(n)),
        lr_(learning_rate),
        beta1_(beta1),
        beta2_(beta2),
        eps_(eps) {}

  void step(const Eigen::VectorXd& grad, Eigen::VectorXd& x) {
    ++t_;
    m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
    v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(beta1_, t_);
    const double c2 = 1.0 - std::pow(beta2_, t_);
    x.array() += lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
  }

  int steps() const { return t_; }

 private:
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
  double lr_;
  double beta1_;
  double beta2_;
  double eps_;
  int t_ = 0;
};

}  // namespace prefelicit
