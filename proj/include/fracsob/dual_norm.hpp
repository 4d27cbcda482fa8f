#pragma once

#include "fracsob/domain_mask.hpp"
#include "fracsob/grid_function.hpp"

namespace fracsob {

/// ||h|| in the dual of the masked H^{s,2} space, via the Riesz representative:
/// value = ||(-Delta)^{s/2} u||_2 where u solves the masked Galerkin problem with data h.
double dual_norm_2(const GridFunction& h, const DomainMask& mask, double s, double tol = 1e-12);

struct DualNormOptions {
  double tol = 1e-10;
  int max_iter = 2000;
};

struct DualNormResult {
  double value = 0.0;
  /// Masked test field with ||(-Delta)^{s/2} maximizer||_{q'} = 1.
  GridFunction maximizer;
  int iterations = 0;
  /// Relative change of value over the last 10 iterations.
  double certificate_gap = 0.0;
  bool certified = false;
};

/// Lower bound on sup { h[phi] : phi masked, ||(-Delta)^{s/2} phi||_{q'} <= 1 } for q in (1, 2).
///
/// The supremum is attained at the direction of the minimizer of
///   F(phi) = ||(-Delta)^{s/2} phi||_{q'}^{q'} / q' - h[phi],
/// which is found by nonlinear conjugate gradients preconditioned with the
/// q = 2 Riesz map, starting from the q = 2 maximizer. Every iterate yields a
/// feasible ratio h[phi] / ||(-Delta)^{s/2} phi||_{q'}; the best one is returned.
DualNormResult dual_norm_q(const GridFunction& h, const DomainMask& mask, double s, double q,
                           const DualNormOptions& opts = {});

}  // namespace fracsob
