#pragma once

// Shared generators and independent oracles for the test suites.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "fracsob/domain_mask.hpp"
#include "fracsob/experiments.hpp"
#include "fracsob/grid_function.hpp"
#include "fracsob/kernel.hpp"
#include "fracsob/vi.hpp"

namespace fracsob::testing {

inline GridFunction random_field(const Grid& grid, std::mt19937_64& rng, double amplitude = 1.0) {
  std::normal_distribution<double> normal(0.0, amplitude);
  Eigen::VectorXd v(grid.size());
  for (Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
  return GridFunction(grid, v);
}

inline GridFunction random_masked_field(const DomainMask& mask, std::mt19937_64& rng, double amplitude = 1.0) {
  return mask.restrict(random_field(mask.grid(), rng, amplitude));
}

/// Random smooth masked field: a sum of a few bumps inside the mask.
inline GridFunction random_smooth_masked_field(const DomainMask& mask, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  GridFunction out(mask.grid());
  for (int k = 0; k < 3; ++k) {
    const double radius = 0.2 * (hi - lo) + 0.2 * (hi - lo) * unit(rng);
    const double center = lo + radius + (hi - lo - 2.0 * radius) * unit(rng);
    out += smooth_bump(mask.grid(), {center, 0.0}, radius, 2.0 * unit(rng) - 0.5);
  }
  return mask.restrict(out);
}

inline GridFunction lattice_cosine(const Grid& grid, int k0, int k1 = 0) {
  return GridFunction::sample(grid, [&](const std::array<double, 2>& x) {
    const double pi_l = std::numbers::pi / grid.half_width();
    return std::cos(pi_l * (k0 * x[0] + k1 * x[1]));
  });
}

inline double lattice_frequency(const Grid& grid, int k0, int k1 = 0) {
  return std::numbers::pi / grid.half_width() * std::hypot(double(k0), double(k1));
}

inline GridFunction indicator(const DomainMask& mask) { return GridFunction(mask.grid(), mask.indicator()); }

inline double weighted_dot(const GridFunction& a, const GridFunction& b) { return pairing(a, b); }

/// Dense Galerkin solve on the mask-restricted kernel of (-Delta)^s.
inline GridFunction dense_galerkin_solve(const GridFunction& f, const DomainMask& mask, double s) {
  const DenseOperator a = restrict_to_mask(kernel_matrix(mask.grid(), 2.0 * s), mask);
  const Eigen::VectorXd x = a.llt().solve(mask.gather(f.values()));
  return GridFunction(mask.grid(), mask.scatter(x));
}

/// Random feasible obstacle problem with a nontrivial contact set.
inline VIProblem random_vi_problem(const DomainMask& mask, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double s = 0.2 + 0.8 * unit(rng);
  GridFunction f = random_masked_field(mask, rng, 0.5) - 0.3 * indicator(mask);
  GridFunction psi = random_smooth_masked_field(mask, -1.0, 1.0, rng);
  psi += random_masked_field(mask, rng, 0.05);
  return VIProblem{s, mask, f, psi};
}

/// Obstacle-perturbation instance used by the stability and cone experiments:
/// 1D, L = 2, M = 256, domain (-1, 1), s = 1/2, unit load, bump obstacle just
/// above the unconstrained solution at the origin, oscillating perturbations of
/// amplitude 0.2 under a bump envelope of radius 1/2.
struct ObstacleExperiment {
  Grid grid{1, 2.0, 256};
  DomainMask mask = DomainMask::interval(grid, -1.0, 1.0);
  double s = 0.5;
  GridFunction f = indicator(mask);
  GridFunction envelope = smooth_bump(grid, {0.0, 0.0}, 0.5);
  ObstacleSequenceSpec spec() const {
    const GridFunction free = solve_unconstrained(f, mask, s);
    const double peak = free[grid.flat_index(grid.points_per_dim() / 2)];
    return ObstacleSequenceSpec{smooth_bump(grid, {0.0, 0.0}, 0.5, 1.05 * peak), 0.2, 0.5, 1, 32, envelope};
  }
};

}  // namespace fracsob::testing
