#include "prefelicit/random.hpp"

#include <stdexcept>

namespace prefelicit {

void sample_dirichlet(const Eigen::VectorXd& alpha, Rng& rng,
                      Eigen::Ref<Eigen::VectorXd> out) {
  if (out.size() != alpha.size()) {
    throw std::invalid_argument("sample_dirichlet: size mismatch");
  }
  double total = 0.0;
  for (Eigen::Index k = 0; k < alpha.size(); ++k) {
    if (!(alpha[k] > 0.0)) {
      throw std::invalid_argument("sample_dirichlet: non-positive parameter");
    }
    std::gamma_distribution<double> gamma(alpha[k], 1.0);
    out[k] = gamma(rng);
    total += out[k];
  }
  if (total > 0.0) {
    out /= total;
  } else {
    // Every gamma draw underflowed (tiny shapes); fall back to the largest
    // shape parameter as a point mass.
    Eigen::Index best = 0;
    alpha.maxCoeff(&best);
    out.setZero();
    out[best] = 1.0;
  }
}

}  // namespace prefelicit
