#include "fracsob/vi.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <string>

#include "fracsob/kernel.hpp"
#include "fracsob/spectral.hpp"

namespace fracsob {

void VIProblem::validate() const {
  if (!(s > 0.0 && s <= 1.0)) throw ParameterError("vi: s must lie in (0, 1], got " + std::to_string(s));
  if (!(f.grid() == mask.grid()) || !(obstacle.grid() == mask.grid())) {
    throw ValidationError("vi: f, obstacle and mask must share one grid");
  }
  if (!f.values().allFinite()) throw ValidationError("vi: f has non-finite values");
  if (!obstacle.values().allFinite()) throw ValidationError("vi: obstacle has non-finite values");
  for (Index i = 0; i < obstacle.size(); ++i) {
    if (!mask.contains(i) && obstacle[i] > 0.0) {
      throw ValidationError("vi: obstacle must be <= 0 outside the domain (node " + std::to_string(i) + ")");
    }
  }
}

double energy(const GridFunction& u, const GridFunction& f, double s) {
  u.require_same_grid(f);
  const GridFunction a = frac_laplacian(u, 2.0 * s);
  return 0.5 * pairing(a, u) - pairing(f, u);
}

GridFunction contact_multiplier(const GridFunction& u, const GridFunction& f, const DomainMask& mask, double s) {
  return mask.restrict(frac_laplacian(u, 2.0 * s) - f);
}

namespace {

KKTReport kkt_from(const Eigen::VectorXd& u, const Eigen::VectorXd& au, const VIProblem& problem) {
  KKTReport out{0.0, 0.0, 0.0};
  const Eigen::VectorXd& psi = problem.obstacle.values();
  const Eigen::VectorXd& f = problem.f.values();
  double gap = 0.0;
  for (Index i : problem.mask.indices()) {
    const double r = au[i] - f[i];
    out.primal_violation = std::max(out.primal_violation, psi[i] - u[i]);
    out.dual_violation = std::max(out.dual_violation, -r);
    gap += std::abs(r * (u[i] - psi[i]));
  }
  out.complementarity_gap = gap * problem.mask.grid().cell_volume();
  return out;
}

}  // namespace

KKTReport kkt_report(const VIProblem& problem, const GridFunction& u) {
  problem.validate();
  const GridFunction au = frac_laplacian(u, 2.0 * problem.s);
  return kkt_from(u.values(), au.values(), problem);
}

VISolution solve_vi(const VIProblem& problem, const VIOptions& opts) {
  problem.validate();
  if (!(opts.tol > 0.0) || opts.max_iter < 1) throw ParameterError("solve_vi: need tol > 0 and max_iter >= 1");

  const DomainMask& mask = problem.mask;
  const Grid& grid = mask.grid();
  const double w = grid.cell_volume();
  const MultiplierOperator lap(grid, MultiplierSymbol::power(2.0 * problem.s));
  const Eigen::VectorXd& f = problem.f.values();
  const Eigen::VectorXd& psi = problem.obstacle.values();
  const double step = 0.9 / lap.table().maxCoeff();

  auto project = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
    for (Index i : mask.indices()) out[i] = std::max(v[i], psi[i]);
    return out;
  };
  auto energy_of = [&](const Eigen::VectorXd& u, const Eigen::VectorXd& au) {
    return w * (0.5 * u.dot(au) - f.dot(u));
  };

  Eigen::VectorXd x;
  if (opts.initial) {
    if (!(opts.initial->grid() == grid)) throw ValidationError("solve_vi: initial guess on a different grid");
    x = opts.initial->values();
    if (mask.outside_magnitude(*opts.initial) != 0.0 || (project(x) - x).cwiseAbs().maxCoeff() != 0.0) {
      throw ValidationError("solve_vi: initial guess is not feasible");
    }
  } else {
    x = project(Eigen::VectorXd::Zero(grid.size()));
  }

  Eigen::VectorXd ax = lap.apply(x);
  double ex = energy_of(x, ax);
  Eigen::VectorXd y = x, ay = ax;
  double t = 1.0;

  VISolution sol{GridFunction(grid), 0, false, 0, 0.0, 0.0, 0.0, ex, {}};
  sol.energy_trace.reserve(std::size_t(std::min(opts.max_iter, 100000)));

  for (int it = 1; it <= opts.max_iter; ++it) {
    Eigen::VectorXd z = project(y - step * (ay - f));
    Eigen::VectorXd az = lap.apply(z);
    double ez = energy_of(z, az);
    if (ez > ex) {
      // Momentum overshot: drop it and take a plain projected gradient step.
      ++sol.restarts;
      t = 1.0;
      z = project(x - step * (ax - f));
      az = lap.apply(z);
      ez = energy_of(z, az);
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double beta = (t - 1.0) / t_next;
    y = z + beta * (z - x);
    ay = az + beta * (az - ax);
    t = t_next;

    const double change = std::sqrt(std::max(0.0, w * (z - x).dot(az - ax)));
    x = std::move(z);
    ax = std::move(az);
    ex = ez;
    sol.energy_trace.push_back(ex);
    sol.iterations = it;

    const KKTReport kkt = kkt_from(x, ax, problem);
    if (kkt.dual_violation <= opts.tol && kkt.complementarity_gap <= opts.tol && change <= opts.tol) {
      sol.converged = true;
      break;
    }
  }

  const KKTReport kkt = kkt_from(x, ax, problem);
  sol.u = GridFunction(grid, std::move(x));
  sol.primal_violation = kkt.primal_violation;
  sol.dual_violation = kkt.dual_violation;
  sol.complementarity_gap = kkt.complementarity_gap;
  sol.energy = ex;
  return sol;
}

GridFunction dense_vi_oracle(const VIProblem& problem) {
  problem.validate();
  const DomainMask& mask = problem.mask;
  const Grid& grid = mask.grid();
  if (grid.size() > kMaxDenseVINodes) {
    throw SizeError("dense_vi_oracle: grid has " + std::to_string(grid.size()) + " nodes, limit is " +
                    std::to_string(kMaxDenseVINodes));
  }
  const DenseOperator a = restrict_to_mask(kernel_matrix(grid, 2.0 * problem.s), mask);
  const Eigen::VectorXd b = mask.gather(problem.f.values());
  const Eigen::VectorXd psi = mask.gather(problem.obstacle.values());
  const Index n = mask.count();

  // Primal active-set method for min 1/2 x'Ax - b'x subject to x >= psi.
  Eigen::VectorXd x = psi.cwiseMax(0.0);
  std::vector<bool> working(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) working[std::size_t(i)] = x[i] == psi[i];

  const int max_steps = int(10 * n + 100);
  for (int step = 0; step < max_steps; ++step) {
    std::vector<Index> free;
    for (Index i = 0; i < n; ++i)
      if (!working[std::size_t(i)]) free.push_back(i);

    Eigen::VectorXd target = x;
    for (Index i = 0; i < n; ++i)
      if (working[std::size_t(i)]) target[i] = psi[i];
    if (!free.empty()) {
      const Index nf = Index(free.size());
      Eigen::MatrixXd aff(nf, nf);
      Eigen::VectorXd rhs(nf);
      for (Index p = 0; p < nf; ++p) {
        rhs[p] = b[free[std::size_t(p)]];
        for (Index i = 0; i < n; ++i)
          if (working[std::size_t(i)]) rhs[p] -= a(free[std::size_t(p)], i) * psi[i];
        for (Index q = 0; q < nf; ++q) aff(p, q) = a(free[std::size_t(p)], free[std::size_t(q)]);
      }
      const Eigen::VectorXd xf = aff.ldlt().solve(rhs);
      for (Index p = 0; p < nf; ++p) target[free[std::size_t(p)]] = xf[p];
    }
    const Eigen::VectorXd dir = target - x;
    const double scale = 1.0 + x.cwiseAbs().maxCoeff();

    if (dir.cwiseAbs().maxCoeff() <= 1e-14 * scale) {
      x = target;
      const Eigen::VectorXd lambda = a * x - b;
      Index worst = -1;
      double most_negative = -1e-13 * (1.0 + b.cwiseAbs().maxCoeff());
      for (Index i = 0; i < n; ++i) {
        if (working[std::size_t(i)] && lambda[i] < most_negative) {
          most_negative = lambda[i];
          worst = i;
        }
      }
      if (worst < 0) return GridFunction(grid, mask.scatter(x));
      working[std::size_t(worst)] = false;
      continue;
    }

    double alpha = 1.0;
    Index blocking = -1;
    for (Index i = 0; i < n; ++i) {
      if (!working[std::size_t(i)] && dir[i] < 0.0) {
        const double limit = (psi[i] - x[i]) / dir[i];
        if (limit < alpha) {
          alpha = limit;
          blocking = i;
        }
      }
    }
    x += alpha * dir;
    if (blocking >= 0) {
      x[blocking] = psi[blocking];
      working[std::size_t(blocking)] = true;
    }
  }
  throw NumericalError("dense_vi_oracle: active set did not settle within " + std::to_string(max_steps) + " steps");
}

}  // namespace fracsob
