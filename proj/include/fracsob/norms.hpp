#pragma once

#include <utility>
#include <vector>

#include "fracsob/domain_mask.hpp"
#include "fracsob/grid_function.hpp"

namespace fracsob {

/// Exponent pair for the Bessel-potential seminorm ||(-Delta)^{s/2} f||_{L^p}.
struct NormParams {
  double s;
  double p;

  NormParams(double s, double p);
  double conjugate() const { return p / (p - 1.0); }
};

/// (cell_volume * sum |f|^p)^{1/p}.
double lp_norm(const GridFunction& f, double p);

/// ||frac_laplacian(f, s)||_{L^p}.
double hsp_seminorm(const GridFunction& f, const NormParams& params);

/// Best constant C in ||f||_2 <= C ||(-Delta)^{s/2} f||_2 over fields vanishing
/// outside the mask, i.e. 1/sqrt of the smallest eigenvalue of the masked
/// (-Delta)^s. Inverse power iteration with Galerkin solves.
struct PoincareOptions {
  double tol = 1e-8;
  int max_iter = 10000;
};
double poincare_constant(const DomainMask& mask, double s, const PoincareOptions& opts = {});

/// Both sides of the Hoelder-type comparison: (||(-Delta)^{s/2} phi||_q, ||(-Delta)^{s/2} phi||_p).
std::pair<double, double> holder_type_check(const GridFunction& phi, const DomainMask& mask, double s, double q,
                                            double p);

/// d_k = | ||f_k||_p^p - ||f||_p^p - ||f_k - f||_p^p |.
std::vector<double> brezis_lieb_defect(const std::vector<GridFunction>& sequence, const GridFunction& f, double p);

}  // namespace fracsob
