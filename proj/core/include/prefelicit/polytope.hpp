#pragma once

#include <optional>
#include <stdexcept>

#include <Eigen/Core>

#include "prefelicit/model.hpp"
#include "prefelicit/random.hpp"

namespace prefelicit {

/// {u : sum(u) = 1, A u >= b}. The rows of A include u >= 0 when built by
/// preference_polytope().
struct PolytopeSpec {
  int dimension = 0;
  Eigen::MatrixXd a;
  Eigen::VectorXd b;

  static PolytopeSpec simplex(int dimension);
  /// Appends a.u >= b.
  void add_constraint(const Eigen::VectorXd& row, double rhs);
  /// Largest violation of the inequalities at u (0 when all hold).
  double max_violation(const Eigen::VectorXd& u) const;
};

/// Simplex plus U(preferred) - U(other) >= delta for every statement.
PolytopeSpec preference_polytope(const PerformanceTable& table, const PreferenceSet& q,
                                 double delta);

class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InteriorPoint {
  Eigen::VectorXd point;
  /// Radius of the largest ball (within the simplex's affine hull) around
  /// point; zero when the polytope is flat.
  double radius = 0.0;
};

/// Chebyshev centre within the affine hull, or nullopt when infeasible.
std::optional<InteriorPoint> chebyshev_center(const PolytopeSpec& poly);

bool is_feasible(const PolytopeSpec& poly);

struct HitAndRunOptions {
  int burn_in = 1000;
  int thinning = 5;
};

/// W x dimension matrix of approximately uniform draws, one per row.
/// Throws InfeasibleError on an empty polytope.
Eigen::MatrixXd hit_and_run(const PolytopeSpec& poly, int samples, Rng& rng,
                            const HitAndRunOptions& options = {});

}  // namespace prefelicit
