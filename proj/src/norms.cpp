#include "fracsob/norms.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "fracsob/galerkin.hpp"
#include "fracsob/spectral.hpp"

namespace fracsob {

NormParams::NormParams(double s_, double p_) : s(s_), p(p_) {
  if (!(s > 0.0 && s <= 1.0)) throw ParameterError("norm params: s must lie in (0, 1], got " + std::to_string(s));
  if (!(p > 1.0) || !std::isfinite(p)) throw ParameterError("norm params: p must lie in (1, inf), got " + std::to_string(p));
}

double lp_norm(const GridFunction& f, double p) {
  if (!(p >= 1.0)) throw ParameterError("lp_norm: p must be >= 1, got " + std::to_string(p));
  const auto a = f.values().cwiseAbs();
  if (std::isinf(p)) return a.maxCoeff();
  const double scale = a.maxCoeff();
  if (scale == 0.0) return 0.0;
  // Scaled to keep |f|^p representable for large p.
  const double sum = (a / scale).array().pow(p).sum();
  return scale * std::pow(f.grid().cell_volume() * sum, 1.0 / p);
}

double hsp_seminorm(const GridFunction& f, const NormParams& params) {
  return lp_norm(frac_laplacian(f, params.s), params.p);
}

double poincare_constant(const DomainMask& mask, double s, const PoincareOptions& opts) {
  const MaskedOperator op(mask, s);
  const Grid& grid = mask.grid();
  Eigen::VectorXd x = mask.indicator().normalized();
  double lambda = x.dot(op.apply(x));
  for (int it = 1; it <= opts.max_iter; ++it) {
    const GalerkinResult solve = solve_galerkin(GridFunction(grid, x), op, {1e-13, 50000});
    x = solve.u.values().normalized();
    const double next = x.dot(op.apply(x));
    if (std::abs(next - lambda) <= opts.tol * next) {
      return 1.0 / std::sqrt(next);
    }
    lambda = next;
  }
  throw NumericalError("poincare_constant: inverse power iteration did not converge in " +
                       std::to_string(opts.max_iter) + " iterations (last eigenvalue estimate " +
                       std::to_string(lambda) + ")");
}

std::pair<double, double> holder_type_check(const GridFunction& phi, const DomainMask& mask, double s, double q,
                                            double p) {
  if (!(phi.grid() == mask.grid())) throw ValidationError("holder_type_check: grid mismatch");
  if (mask.outside_magnitude(phi) != 0.0) throw ValidationError("holder_type_check: phi must vanish outside the mask");
  if (!(q > 1.0 && q < p)) throw ParameterError("holder_type_check: need 1 < q < p");
  const GridFunction d = frac_laplacian(phi, s);
  return {lp_norm(d, q), lp_norm(d, p)};
}

std::vector<double> brezis_lieb_defect(const std::vector<GridFunction>& sequence, const GridFunction& f, double p) {
  if (sequence.empty()) throw ValidationError("brezis_lieb_defect: empty sequence");
  if (!(p > 1.0) || !std::isfinite(p)) throw ParameterError("brezis_lieb_defect: p must lie in (1, inf)");
  const double fp = std::pow(lp_norm(f, p), p);
  std::vector<double> out;
  out.reserve(sequence.size());
  for (const GridFunction& fk : sequence) {
    fk.require_same_grid(f);
    out.push_back(std::abs(std::pow(lp_norm(fk, p), p) - fp - std::pow(lp_norm(fk - f, p), p)));
  }
  return out;
}

}  // namespace fracsob
