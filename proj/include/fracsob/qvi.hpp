#pragma once

#include <optional>
#include <vector>

#include "fracsob/domain_mask.hpp"
#include "fracsob/grid_function.hpp"
#include "fracsob/vi.hpp"

namespace fracsob {

/// Phi(v) = envelope * (G_delta * v) - shift, G_delta the periodic Gaussian
/// smoother exp(-delta^2 |xi|^2).
struct ObstacleMapSpec {
  double mollifier_width;
  double shift;
  GridFunction envelope;

  void validate(const DomainMask& mask) const;
};

GridFunction apply_obstacle_map(const GridFunction& v, const ObstacleMapSpec& spec, const DomainMask& mask);

struct QVIOptions {
  double outer_tol = 1e-8;
  int outer_max = 200;
  /// u_{k+1} = (1 - damping) u_k + damping T(u_k).
  double damping = 1.0;
  VIOptions vi;
  std::optional<GridFunction> initial;
};

struct QVIResult {
  GridFunction u;
  int outer_iterations = 0;
  /// ||(-Delta)^{s/2}(T(u_k) - u_k)||_2 per outer step.
  std::vector<double> residual_trace;
  /// ||(-Delta)^{s/2} T(u_k)||_2 per outer step.
  std::vector<double> seminorm_trace;
  bool converged = false;
};

/// Picard iteration on T(v) = solve_vi(f, obstacle = Phi(v)), from u_0 = 0.
/// Non-convergence is reported through `converged`; inner VI failure throws NumericalError.
QVIResult solve_qvi(const GridFunction& f, const ObstacleMapSpec& spec, const DomainMask& mask, double s,
                    const QVIOptions& opts = {});

}  // namespace fracsob
