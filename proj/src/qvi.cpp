#include "fracsob/qvi.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "fracsob/experiments.hpp"
#include "fracsob/norms.hpp"
#include "fracsob/spectral.hpp"

namespace fracsob {

void ObstacleMapSpec::validate(const DomainMask& mask) const {
  if (!(mollifier_width > 0.0) || !std::isfinite(mollifier_width)) {
    throw ParameterError("obstacle map: mollifier_width must be positive");
  }
  if (!(shift > 0.0) || !std::isfinite(shift)) throw ParameterError("obstacle map: shift must be positive");
  if (!(envelope.grid() == mask.grid())) throw ValidationError("obstacle map: envelope grid mismatch");
  if (mask.outside_magnitude(envelope) != 0.0) throw ValidationError("obstacle map: envelope must vanish outside the domain");
  if (envelope.values().minCoeff() < 0.0) throw ValidationError("obstacle map: envelope must be nonnegative");
}

GridFunction apply_obstacle_map(const GridFunction& v, const ObstacleMapSpec& spec, const DomainMask& mask) {
  spec.validate(mask);
  if (!(v.grid() == mask.grid())) throw ValidationError("obstacle map: argument grid mismatch");
  GridFunction out = pointwise_product(spec.envelope, mollify(v, spec.mollifier_width));
  out.values().array() -= spec.shift;
  return out;
}

QVIResult solve_qvi(const GridFunction& f, const ObstacleMapSpec& spec, const DomainMask& mask, double s,
                    const QVIOptions& opts) {
  spec.validate(mask);
  if (!(opts.outer_tol > 0.0) || opts.outer_max < 1) throw ParameterError("solve_qvi: need outer_tol > 0, outer_max >= 1");
  if (!(opts.damping > 0.0 && opts.damping <= 1.0)) throw ParameterError("solve_qvi: damping must lie in (0, 1]");
  const Grid& grid = mask.grid();

  QVIResult result{GridFunction(grid), 0, {}, {}, false};
  GridFunction u = opts.initial ? mask.restrict(*opts.initial) : GridFunction(grid);
  std::optional<GridFunction> previous;

  for (int k = 1; k <= opts.outer_max; ++k) {
    const GridFunction psi = apply_obstacle_map(u, spec, mask);
    VIOptions vi = opts.vi;
    if (previous) {
      GridFunction start(grid);
      for (Index i : mask.indices()) start[i] = std::max((*previous)[i], psi[i]);
      vi.initial = std::move(start);
    }
    const VISolution t = solve_vi(VIProblem{s, mask, f, psi}, vi);
    if (!t.converged) {
      std::ostringstream msg;
      msg << "solve_qvi: inner VI failed at outer step " << k << " (dual violation " << t.dual_violation
          << ", gap " << t.complementarity_gap << "); residual trace:";
      for (double r : result.residual_trace) msg << ' ' << r;
      throw NumericalError(msg.str());
    }
    const double residual = lp_norm(frac_laplacian(t.u - u, s), 2.0);
    result.residual_trace.push_back(residual);
    result.seminorm_trace.push_back(lp_norm(frac_laplacian(t.u, s), 2.0));
    result.outer_iterations = k;
    previous = t.u;
    if (residual <= opts.outer_tol) {
      result.u = t.u;
      result.converged = true;
      return result;
    }
    u = (1.0 - opts.damping) * u + opts.damping * t.u;
  }
  result.u = *previous;
  return result;
}

}  // namespace fracsob
