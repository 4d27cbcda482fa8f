#pragma once

#include "fracsob/domain_mask.hpp"
#include "fracsob/grid_function.hpp"
#include "fracsob/spectral.hpp"

namespace fracsob {

/// Masked operator u -> P frac_laplacian(u, 2s) P, the discrete Riesz map of
/// the Hilbert seminorm ||frac_laplacian(., s)||_2 on fields vanishing outside the mask.
class MaskedOperator {
 public:
  MaskedOperator(const DomainMask& mask, double s);

  const DomainMask& mask() const { return mask_; }
  double order() const { return s_; }
  /// P (-Delta)^s P v.
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  /// Unmasked (-Delta)^s v.
  Eigen::VectorXd apply_full(const Eigen::VectorXd& v) const { return full_.apply(v); }
  /// P (1 + |xi|^{2s})^{-1} P r.
  Eigen::VectorXd precondition(const Eigen::VectorXd& r) const;
  /// Largest symbol value on the lattice, an exact Lipschitz bound.
  double max_eigenvalue_bound() const;

 private:
  DomainMask mask_;
  double s_;
  MultiplierOperator full_;
  MultiplierOperator preconditioner_;
};

struct GalerkinOptions {
  double tol = 1e-10;
  int max_iter = 50000;
};

struct GalerkinResult {
  GridFunction u;
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Preconditioned CG for <(-Delta)^{s/2} u, (-Delta)^{s/2} phi> = f[phi]
/// over masked u, phi. Stops when ||P((-Delta)^s u - f)|| <= tol ||P f||.
GalerkinResult solve_galerkin(const GridFunction& f, const MaskedOperator& op, const GalerkinOptions& opts = {});

/// Convenience form returning only u.
GridFunction solve_unconstrained(const GridFunction& f, const DomainMask& mask, double s, double tol = 1e-10);

}  // namespace fracsob
