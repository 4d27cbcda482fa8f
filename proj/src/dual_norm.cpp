#include "fracsob/dual_norm.hpp"

#include <cmath>
#include <deque>
#include <string>

#include "fracsob/galerkin.hpp"
#include "fracsob/norms.hpp"
#include "fracsob/spectral.hpp"

namespace fracsob {

double dual_norm_2(const GridFunction& h, const DomainMask& mask, double s, double tol) {
  if (!(h.grid() == mask.grid())) throw ValidationError("dual_norm_2: grid mismatch");
  const GridFunction u = solve_unconstrained(h, mask, s, tol);
  return lp_norm(frac_laplacian(u, s), 2.0);
}

namespace {

// One-dimensional convex objective g(t) = F(phi + t d) for the q' power term.
struct RayObjective {
  const Eigen::VectorXd& a;  // D phi
  const Eigen::VectorXd& b;  // D d
  double e;                  // h[d] / cell volume
  double r;

  double slope(double t) const {
    double acc = 0.0;
    for (Index i = 0; i < a.size(); ++i) {
      const double v = a[i] + t * b[i];
      acc += std::copysign(std::pow(std::abs(v), r - 1.0), v) * b[i];
    }
    return acc - e;
  }
  double curvature(double t) const {
    double acc = 0.0;
    for (Index i = 0; i < a.size(); ++i) acc += std::pow(std::abs(a[i] + t * b[i]), r - 2.0) * b[i] * b[i];
    return (r - 1.0) * acc;
  }

  // Safeguarded Newton on g'(t) = 0; g'(0) < 0 on entry.
  double minimize() const {
    double lo = 0.0, hi = 1.0;
    while (slope(hi) < 0.0) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e12) return hi;
    }
    double t = hi;
    for (int it = 0; it < 200; ++it) {
      const double g = slope(t);
      if (g < 0.0) lo = t; else hi = t;
      const double c = curvature(t);
      double next = c > 0.0 ? t - g / c : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - t) <= 1e-15 * std::max(1.0, std::abs(t)) || hi - lo <= 1e-15 * hi) return next;
      t = next;
    }
    return t;
  }
};

double power_sum(const Eigen::VectorXd& v, double r) { return v.cwiseAbs().array().pow(r).sum(); }

}  // namespace

DualNormResult dual_norm_q(const GridFunction& h, const DomainMask& mask, double s, double q,
                           const DualNormOptions& opts) {
  if (!(h.grid() == mask.grid())) throw ValidationError("dual_norm_q: grid mismatch");
  if (!(q > 1.0 && q < 2.0)) throw ParameterError("dual_norm_q: q must lie in (1, 2), got " + std::to_string(q));
  if (!(opts.tol > 0.0) || opts.max_iter < 1) throw ParameterError("dual_norm_q: need tol > 0 and max_iter >= 1");
  if (!h.values().allFinite()) throw ValidationError("dual_norm_q: h has non-finite values");

  const Grid& grid = mask.grid();
  const double w = grid.cell_volume();
  const double r = q / (q - 1.0);
  const MaskedOperator riesz(mask, s);
  const MultiplierOperator d(grid, MultiplierSymbol::power(s));
  const Eigen::VectorXd hm = mask.restrict(h.values());

  auto seminorm = [&](const Eigen::VectorXd& dphi) { return std::pow(w * power_sum(dphi, r), 1.0 / r); };

  DualNormResult out{0.0, GridFunction(grid), 0, 0.0, false};
  if (hm.cwiseAbs().maxCoeff() == 0.0) {
    const Eigen::VectorXd ind = mask.indicator();
    out.maximizer = GridFunction(grid, ind / seminorm(d.apply(ind)));
    out.certified = true;
    return out;
  }

  auto riesz_solve = [&](const Eigen::VectorXd& g) {
    return solve_galerkin(GridFunction(grid, g), riesz, {1e-12, 50000}).u.values();
  };

  // q = 2 maximizer, rescaled to the minimizer of F along its ray.
  Eigen::VectorXd phi = riesz_solve(hm);
  Eigen::VectorXd dphi = d.apply(phi);
  {
    const double scale = std::pow(hm.dot(phi) / power_sum(dphi, r), 1.0 / (r - 1.0));
    phi *= scale;
    dphi *= scale;
  }

  auto ratio = [&](const Eigen::VectorXd& p, const Eigen::VectorXd& dp) { return w * hm.dot(p) / seminorm(dp); };
  auto gradient = [&](const Eigen::VectorXd& dp) {
    Eigen::VectorXd flux(dp.size());
    for (Index i = 0; i < dp.size(); ++i) flux[i] = std::copysign(std::pow(std::abs(dp[i]), r - 1.0), dp[i]);
    return Eigen::VectorXd(mask.restrict(d.apply(flux)) - hm);
  };

  double best = ratio(phi, dphi);
  Eigen::VectorXd best_phi = phi, best_dphi = dphi;
  std::deque<double> history{best};

  Eigen::VectorXd g = gradient(dphi);
  Eigen::VectorXd z = riesz_solve(g);
  Eigen::VectorXd dir = -z;
  double gz = g.dot(z);

  for (int it = 1; it <= opts.max_iter; ++it) {
    out.iterations = it;
    if (g.dot(dir) >= 0.0) {
      dir = -z;  // not a descent direction; fall back to steepest descent
    }
    const Eigen::VectorXd ddir = d.apply(dir);
    const RayObjective ray{dphi, ddir, hm.dot(dir), r};
    const double t = g.dot(dir) < 0.0 ? ray.minimize() : 0.0;
    phi += t * dir;
    dphi = it % 25 == 0 ? d.apply(phi) : Eigen::VectorXd(dphi + t * ddir);

    const double value = ratio(phi, dphi);
    if (value > best) {
      best = value;
      best_phi = phi;
      best_dphi = dphi;
    }
    history.push_back(best);
    if (history.size() > 11) history.pop_front();
    if (history.size() == 11) {
      out.certificate_gap = std::abs(history.back() - history.front()) / std::abs(history.back());
      if (out.certificate_gap <= opts.tol) {
        out.certified = true;
        break;
      }
    }

    const Eigen::VectorXd g_next = gradient(dphi);
    const Eigen::VectorXd z_next = riesz_solve(g_next);
    const double gz_next = g_next.dot(z_next);
    if (gz_next <= 0.0) {
      // Preconditioned gradient vanished: stationary point reached.
      out.certificate_gap = 0.0;
      out.certified = true;
      break;
    }
    const double beta = std::max(0.0, (g_next - g).dot(z_next) / gz);
    dir = -z_next + beta * dir;
    g = g_next;
    z = z_next;
    gz = gz_next;
  }

  const double norm = seminorm(best_dphi);
  out.value = best;
  out.maximizer = GridFunction(grid, best_phi / norm);
  return out;
}

}  // namespace fracsob
