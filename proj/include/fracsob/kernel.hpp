#pragma once

#include <Eigen/Core>

#include "fracsob/domain_mask.hpp"
#include "fracsob/grid.hpp"
#include "fracsob/grid_function.hpp"
#include "fracsob/spectral.hpp"

namespace fracsob {

using DenseOperator = Eigen::MatrixXd;

/// Largest node count accepted by the dense kernel oracle.
inline constexpr Index kMaxDenseNodes = 4096;

/// Explicit circulant matrix of a multiplier, built by direct cosine
/// summation over the frequency lattice (no FFT involved).
DenseOperator kernel_matrix(const Grid& grid, const MultiplierSymbol& symbol);

/// Circulant matrix K with K f = frac_laplacian(f, s).
DenseOperator kernel_matrix(const Grid& grid, double s);

/// Rows and columns of `full` belonging to the mask.
DenseOperator restrict_to_mask(const DenseOperator& full, const DomainMask& mask);

/// Bilinear nonlocal term of the fractional product rule:
///   R(x) = sum_{y != x} K(x, y) (f(x) - f(y)) (g(x) - g(y)),
/// so that frac_laplacian(f g, s) = f frac_laplacian(g, s) + g frac_laplacian(f, s) + R.
/// K has negative off-diagonal entries for the fractional kernel, so R <= 0 when f = g.
GridFunction product_rule_remainder(const GridFunction& f, const GridFunction& g, double s);

}  // namespace fracsob
