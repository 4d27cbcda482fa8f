#include "doctest.h"
#include "fracsob/dual_norm.hpp"
#include "fracsob/norms.hpp"
#include "fracsob/qvi.hpp"
#include "fracsob/spectral.hpp"
#include "support.hpp"

using namespace fracsob;
using namespace fracsob::testing;

namespace {
double inf_norm(const GridFunction& a) { return a.values().cwiseAbs().maxCoeff(); }

// Largest ratio ||(-Delta)^{1/4}(Phi(v1) - Phi(v2))||_3 / ||v1 - v2||_2 over 50
// Gaussian pairs (seed 7), delta = 0.2, 1D L=2 M=32.
constexpr double kLipschitzBound = 0.5081;

struct Small {
  Grid grid{1, 2.0, 32};
  DomainMask mask = DomainMask::interval(grid, -1.0, 1.0);
  ObstacleMapSpec spec{0.2, 0.1, smooth_bump(grid, {0.0, 0.0}, 0.8)};
};

// Fixed points from damped iteration started at random masked fields.
std::vector<GridFunction> multistart(const GridFunction& f, const Small& in, int restarts, std::mt19937_64& rng) {
  std::vector<GridFunction> found;
  for (int r = 0; r < restarts; ++r) {
    QVIOptions opts;
    opts.damping = 0.5;
    opts.outer_max = 400;
    opts.initial = random_masked_field(in.mask, rng, 0.5);
    const QVIResult res = solve_qvi(f, in.spec, in.mask, 0.5, opts);
    if (res.converged) found.push_back(res.u);
  }
  return found;
}
}  // namespace

TEST_CASE("apply_obstacle_map") {
  std::mt19937_64 rng(7);
  const Small in;
  CHECK(inf_norm(apply_obstacle_map(GridFunction(in.grid), in.spec, in.mask) + GridFunction::constant(in.grid, 0.1)) ==
        0.0);
  const GridFunction kappa = GridFunction::constant(in.grid, 0.7);
  const GridFunction expect = 0.7 * in.spec.envelope - GridFunction::constant(in.grid, 0.1);
  CHECK(inf_norm(apply_obstacle_map(kappa, in.spec, in.mask) - expect) < 1e-14);

  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const GridFunction a = random_field(in.grid, rng), b = random_field(in.grid, rng);
    const GridFunction d = apply_obstacle_map(a, in.spec, in.mask) - apply_obstacle_map(b, in.spec, in.mask);
    worst = std::max(worst, hsp_seminorm(d, NormParams(0.5, 3.0)) / lp_norm(a - b, 2.0));
    CHECK(in.mask.outside_magnitude(d) == 0.0);
  }
  CHECK(worst <= kLipschitzBound);

  ObstacleMapSpec bad = in.spec;
  bad.shift = 0.0;
  CHECK_THROWS_AS(apply_obstacle_map(kappa, bad, in.mask), ParameterError);
  bad = in.spec;
  bad.envelope = GridFunction::constant(in.grid, 1.0);
  CHECK_THROWS_AS(apply_obstacle_map(kappa, bad, in.mask), ValidationError);
}

TEST_CASE("solve_qvi trivial instances") {
  const Small in;
  SUBCASE("zero load") {
    const QVIOptions opts;
    const QVIResult res = solve_qvi(GridFunction(in.grid), in.spec, in.mask, 0.5, opts);
    CHECK(res.converged);
    CHECK(hsp_seminorm(res.u, NormParams(0.5, 2.0)) <= 10.0 * opts.vi.tol);
  }
  SUBCASE("zero envelope reduces to a fixed obstacle") {
    ObstacleMapSpec flat = in.spec;
    flat.envelope = GridFunction(in.grid);
    const GridFunction f = smooth_bump(in.grid, {0.2, 0.0}, 0.6, -3.0);
    const QVIResult res = solve_qvi(f, flat, in.mask, 0.5);
    const GridFunction psi = in.mask.restrict(GridFunction::constant(in.grid, -0.1));
    const VISolution vi = solve_vi(VIProblem{0.5, in.mask, f, psi});
    CHECK(res.converged);
    CHECK(inf_norm(res.u - vi.u) <= 1e-8);
  }
}

TEST_CASE("solve_qvi agrees with a multi-start damped oracle") {
  std::mt19937_64 rng(11);
  const Small in;
  // A positive load keeps the obstacle inactive; a negative one produces contact.
  for (double amplitude : {1.0, -1.0}) {
    const GridFunction f = smooth_bump(in.grid, {0.0, 0.0}, 0.7, amplitude);
    const QVIOptions opts;
    const QVIResult res = solve_qvi(f, in.spec, in.mask, 0.5, opts);
    REQUIRE(res.converged);
    CHECK(res.residual_trace.back() <= opts.outer_tol);

    const GridFunction phi = apply_obstacle_map(res.u, in.spec, in.mask);
    const VIProblem problem{0.5, in.mask, f, phi};
    const KKTReport kkt = kkt_report(problem, res.u);
    CHECK(kkt.primal_violation <= 1e-10);
    CHECK(kkt.dual_violation <= opts.vi.tol);
    CHECK(kkt.complementarity_gap <= opts.vi.tol);

    int contacts = 0;
    for (Index i : in.mask.indices()) contacts += std::abs(res.u[i] - phi[i]) < 1e-8;
    if (amplitude < 0.0) CHECK(contacts > 0);

    const auto found = multistart(f, in, 50, rng);
    CHECK(found.size() == 50);
    double spread = 0.0;
    for (const auto& u : found) spread = std::max(spread, inf_norm(u - res.u));
    MESSAGE("load amplitude " << amplitude << ": " << found.size() << " converged restarts, max deviation " << spread
                              << std::string(spread > 1e-6 ? " (distinct fixed points)" : " (single fixed point)"));
    CHECK(spread <= 1e-6);
  }
}

TEST_CASE("solve_qvi iterates stay in the coercivity ball") {
  const Small in;
  // With f <= 0 every iterate is <= 0, so Phi(u_k) <= -c0 and 0 is feasible;
  // comparing energies with 0 gives ||u|| <= 2 ||f||_{-s}.
  const GridFunction f = smooth_bump(in.grid, {-0.2, 0.0}, 0.7, -2.0);
  const double radius = 2.0 * dual_norm_2(f, in.mask, 0.5);
  const QVIResult res = solve_qvi(f, in.spec, in.mask, 0.5);
  CHECK(res.converged);
  for (double r : res.seminorm_trace) CHECK(r <= radius);
}

TEST_CASE("solve_qvi reports stagnation and rejects bad options") {
  const Small in;
  const GridFunction f = smooth_bump(in.grid, {0.0, 0.0}, 0.7, -1.0);
  QVIOptions opts;
  opts.outer_max = 2;
  const QVIResult res = solve_qvi(f, in.spec, in.mask, 0.5, opts);
  CHECK_FALSE(res.converged);
  CHECK(res.residual_trace.size() == 2);
  opts.damping = 0.0;
  CHECK_THROWS_AS(solve_qvi(f, in.spec, in.mask, 0.5, opts), ParameterError);
  QVIOptions starved;
  starved.vi.max_iter = 1;
  CHECK_THROWS_AS(solve_qvi(f, in.spec, in.mask, 0.5, starved), NumericalError);
}
