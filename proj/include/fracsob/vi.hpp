#pragma once

#include <optional>
#include <vector>

#include "fracsob/domain_mask.hpp"
#include "fracsob/galerkin.hpp"
#include "fracsob/grid_function.hpp"

namespace fracsob {

/// Fractional obstacle problem: minimize 1/2 ||(-Delta)^{s/2} u||^2 - f[u]
/// over fields u vanishing outside the mask with u >= obstacle on the mask.
struct VIProblem {
  double s;
  DomainMask mask;
  GridFunction f;
  GridFunction obstacle;

  /// Throws ValidationError unless s in (0,1], fields share the mask grid,
  /// f is finite and obstacle <= 0 outside the mask.
  void validate() const;
};

struct VIOptions {
  double tol = 1e-8;
  int max_iter = 20000;
  /// Feasible starting point; defaults to max(obstacle, 0) on the mask.
  std::optional<GridFunction> initial;
};

struct VISolution {
  GridFunction u;
  int iterations = 0;
  bool converged = false;
  int restarts = 0;
  double primal_violation = 0.0;     // max over mask of (obstacle - u)^+
  double dual_violation = 0.0;       // max over mask of (-r)^+, r = (-Delta)^s u - f
  double complementarity_gap = 0.0;  // cell_volume * sum_mask |r (u - obstacle)|
  double energy = 0.0;
  /// Energy of the accepted iterate after every step.
  std::vector<double> energy_trace;
};

/// E(u) = 1/2 <(-Delta)^{s/2} u, (-Delta)^{s/2} u> - f[u].
double energy(const GridFunction& u, const GridFunction& f, double s);

/// KKT diagnostics of a candidate u for the problem.
struct KKTReport {
  double primal_violation;
  double dual_violation;
  double complementarity_gap;
};
KKTReport kkt_report(const VIProblem& problem, const GridFunction& u);

/// Multiplier density r = (-Delta)^s u - f restricted to the mask.
GridFunction contact_multiplier(const GridFunction& u, const GridFunction& f, const DomainMask& mask, double s);

/// Accelerated projected gradient with monotone restart.
VISolution solve_vi(const VIProblem& problem, const VIOptions& opts = {});

/// Reference solution by a primal active-set method on the dense restricted kernel.
inline constexpr Index kMaxDenseVINodes = 2048;
GridFunction dense_vi_oracle(const VIProblem& problem);

}  // namespace fracsob
