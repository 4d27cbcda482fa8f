#include "fracsob/galerkin.hpp"

#include <cmath>
#include <string>

namespace fracsob {

MaskedOperator::MaskedOperator(const DomainMask& mask, double s)
    : mask_(mask),
      s_(s),
      full_(mask.grid(), MultiplierSymbol::power(2.0 * s)),
      preconditioner_(mask.grid(), MultiplierSymbol::bessel_inverse(2.0 * s)) {
  if (!(s > 0.0 && s <= 1.0)) throw ParameterError("masked operator: s must lie in (0, 1], got " + std::to_string(s));
}

Eigen::VectorXd MaskedOperator::apply(const Eigen::VectorXd& v) const {
  return mask_.restrict(full_.apply(mask_.restrict(v)));
}

Eigen::VectorXd MaskedOperator::precondition(const Eigen::VectorXd& r) const {
  return mask_.restrict(preconditioner_.apply(mask_.restrict(r)));
}

double MaskedOperator::max_eigenvalue_bound() const { return full_.table().maxCoeff(); }

GalerkinResult solve_galerkin(const GridFunction& f, const MaskedOperator& op, const GalerkinOptions& opts) {
  const DomainMask& mask = op.mask();
  if (!(f.grid() == mask.grid())) throw ValidationError("galerkin: grid mismatch");
  if (!f.values().allFinite()) throw ValidationError("galerkin: right-hand side has non-finite values");
  if (!(opts.tol > 0.0)) throw ParameterError("galerkin: tol must be positive");

  const Eigen::VectorXd b = mask.restrict(f.values());
  const double bnorm = b.norm();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
  if (bnorm == 0.0) return {GridFunction(f.grid(), x), 0, 0.0};

  Eigen::VectorXd r = b;
  Eigen::VectorXd z = op.precondition(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  for (int it = 1; it <= opts.max_iter; ++it) {
    const Eigen::VectorXd ap = op.apply(p);
    const double alpha = rz / p.dot(ap);
    x += alpha * p;
    r -= alpha * ap;
    if (r.norm() <= opts.tol * bnorm) {
      // The recursive residual drifts from b - A x; confirm before returning
      // and restart from the true residual if it disagrees.
      r = b - op.apply(x);
      const double rel = r.norm() / bnorm;
      if (rel <= opts.tol) return {GridFunction(f.grid(), x), it, rel};
      z = op.precondition(r);
      p = z;
      rz = r.dot(z);
      continue;
    }
    z = op.precondition(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  const double rel = (b - op.apply(x)).norm() / bnorm;
  throw NumericalError("galerkin: CG did not converge in " + std::to_string(opts.max_iter) +
                       " iterations, relative residual " + std::to_string(rel));
}

GridFunction solve_unconstrained(const GridFunction& f, const DomainMask& mask, double s, double tol) {
  return solve_galerkin(f, MaskedOperator(mask, s), {tol, 50000}).u;
}

}  // namespace fracsob
