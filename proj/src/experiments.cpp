#include "fracsob/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <thread>

#include "fracsob/norms.hpp"
#include "fracsob/spectral.hpp"

namespace fracsob {

GridFunction smooth_bump(const Grid& grid, std::array<double, 2> center, double radius, double amplitude) {
  if (!(radius > 0.0)) throw ParameterError("smooth_bump: radius must be positive");
  return GridFunction::sample(grid, [&](const std::array<double, 2>& x) {
    double r2 = 0.0;
    for (int d = 0; d < grid.dim(); ++d) r2 += (x[d] - center[d]) * (x[d] - center[d]);
    const double t = r2 / (radius * radius);
    return t < 1.0 ? amplitude * std::exp(1.0 - 1.0 / (1.0 - t)) : 0.0;
  });
}

GridFunction mollify(const GridFunction& f, double delta) {
  if (!(delta > 0.0)) throw ParameterError("mollify: width must be positive");
  return apply_multiplier(f, MultiplierSymbol::gaussian(delta));
}

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * double(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) out[order[k]] = avg;
    i = j + 1;
  }
  return out;
}

template <typename Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  int workers = threads > 0 ? threads : int(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::max(1, std::min(workers, count));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto body = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    body();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(body);
  }
  if (failure) std::rethrow_exception(failure);
}

TrendSummary trend(const std::vector<double>& values) {
  TrendSummary out;
  if (values.empty()) return out;
  out.endpoint_ratio = values.front() > 0.0 ? values.back() / values.front() : 0.0;
  std::vector<double> n(values.size());
  std::iota(n.begin(), n.end(), 1.0);
  out.spearman = values.size() > 1 ? spearman(n, values) : 0.0;
  return out;
}

double seminorm2(const GridFunction& f, double s) { return lp_norm(frac_laplacian(f, s), 2.0); }

double masked_min(const GridFunction& f, const DomainMask& mask) {
  double m = INFINITY;
  for (Index i : mask.indices()) m = std::min(m, f[i]);
  return m;
}
double masked_max(const GridFunction& f, const DomainMask& mask) {
  double m = -INFINITY;
  for (Index i : mask.indices()) m = std::max(m, f[i]);
  return m;
}

std::vector<VISolution> solve_sequence(const GridFunction& f, const std::vector<GridFunction>& obstacles,
                                       const DomainMask& mask, double s, const ExperimentOptions& opts) {
  std::vector<VISolution> out(obstacles.size(), VISolution{GridFunction(mask.grid()), 0, false, 0, 0.0, 0.0, 0.0, 0.0, {}});
  parallel_for(int(obstacles.size()), opts.threads, [&](int i) {
    out[std::size_t(i)] = solve_vi(VIProblem{s, mask, f, obstacles[std::size_t(i)]}, opts.vi);
  });
  return out;
}

void validate_envelope(const GridFunction& envelope, const DomainMask& mask) {
  if (!(envelope.grid() == mask.grid())) throw ValidationError("envelope: grid mismatch");
  if (mask.outside_magnitude(envelope) != 0.0) throw ValidationError("envelope: must vanish outside the domain");
  if (envelope.values().minCoeff() < 0.0 || envelope.values().maxCoeff() > 1.0) {
    throw ValidationError("envelope: values must lie in [0, 1]");
  }
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("spearman: need two equal-length series of size >= 2");
  const std::vector<double> rx = ranks(x), ry = ranks(y);
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / double(rx.size());
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / double(ry.size());
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

std::vector<GridFunction> make_obstacle_sequence(const ObstacleSequenceSpec& spec, const DomainMask& mask) {
  const Grid& grid = mask.grid();
  if (!(spec.base.grid() == grid)) throw ValidationError("obstacle sequence: base obstacle grid mismatch");
  validate_envelope(spec.envelope, mask);
  if (spec.count < 1) throw ParameterError("obstacle sequence: count must be >= 1");
  if (spec.stride < 1) throw ParameterError("obstacle sequence: stride must be >= 1");
  if (!std::isfinite(spec.amplitude) || !std::isfinite(spec.decay_exponent)) {
    throw ParameterError("obstacle sequence: amplitude and decay must be finite");
  }
  // Quarter-Nyquist guard: n * stride * pi / L <= (pi M / (2L)) / 4.
  const long highest = long(spec.count) * spec.stride;
  if (8 * highest > grid.points_per_dim()) {
    throw ValidationError("obstacle sequence: n * stride = " + std::to_string(highest) +
                          " exceeds the resolvable limit M/8 = " + std::to_string(grid.points_per_dim() / 8));
  }

  std::vector<GridFunction> out;
  out.reserve(std::size_t(spec.count));
  for (int n = 1; n <= spec.count; ++n) {
    const double amp = spec.amplitude * std::pow(double(n), -spec.decay_exponent);
    const double k = n * spec.stride * std::numbers::pi / grid.half_width();
    GridFunction psi = spec.base;
    for (Index i = 0; i < grid.size(); ++i) {
      psi[i] += amp * spec.envelope[i] * std::cos(k * grid.node(i)[0]);
    }
    for (Index i = 0; i < grid.size(); ++i) {
      if (!mask.contains(i) && psi[i] > 0.0) {
        throw ValidationError("obstacle sequence: psi_" + std::to_string(n) + " is positive outside the domain");
      }
    }
    out.push_back(std::move(psi));
  }
  return out;
}

std::vector<GridFunction> witness_fields(const DomainMask& mask, const GridFunction& envelope, int count,
                                         std::uint64_t seed) {
  validate_envelope(envelope, mask);
  const Grid& grid = mask.grid();
  std::array<double, 2> lo{INFINITY, INFINITY}, hi{-INFINITY, -INFINITY};
  for (Index i : mask.indices()) {
    const auto x = grid.node(i);
    for (int d = 0; d < grid.dim(); ++d) {
      lo[d] = std::min(lo[d], x[d]);
      hi[d] = std::max(hi[d], x[d]);
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<GridFunction> out;
  for (int j = 0; j < count; ++j) {
    std::array<double, 2> c{0.0, 0.0};
    double extent = INFINITY;
    for (int d = 0; d < grid.dim(); ++d) {
      const double mid = 0.5 * (lo[d] + hi[d]), half = 0.5 * (hi[d] - lo[d]);
      c[d] = mid + 0.6 * half * (2.0 * unit(rng) - 1.0);
      extent = std::min(extent, hi[d] - lo[d]);
    }
    const double width = extent * (0.1 + 0.2 * unit(rng));
    GridFunction phi = GridFunction::sample(grid, [&](const std::array<double, 2>& x) {
      double r2 = 0.0;
      for (int d = 0; d < grid.dim(); ++d) r2 += (x[d] - c[d]) * (x[d] - c[d]);
      return std::exp(-r2 / (2.0 * width * width));
    });
    out.push_back(pointwise_product(phi, envelope));
  }
  return out;
}

MoscoSweepReport run_mosco_sweep(const GridFunction& f, const ObstacleSequenceSpec& spec, const DomainMask& mask,
                                 double s, double q, const ExperimentOptions& opts) {
  if (!(q > 2.0) || !std::isfinite(q)) throw ParameterError("mosco sweep: q must be > 2, got " + std::to_string(q));
  const std::vector<GridFunction> obstacles = make_obstacle_sequence(spec, mask);
  const VISolution limit = solve_vi(VIProblem{s, mask, f, spec.base}, opts.vi);
  const GridFunction& ustar = limit.u;

  // Recovery sequence for a sample w in K(psi): w_n solves the VI with data (-Delta)^s w and obstacle psi_n.
  // w = P psi.
  const GridFunction w = mask.restrict(spec.base);
  const GridFunction fw = frac_laplacian(w, 2.0 * s);

  const std::vector<VISolution> sols = solve_sequence(f, obstacles, mask, s, opts);
  const std::vector<VISolution> recov = solve_sequence(fw, obstacles, mask, s, opts);

  const double q_dual = q / (q - 1.0);
  MoscoSweepReport report{{}, {}, {}, {}, 0.0, 0.0, ustar};
  report.rows.resize(obstacles.size());
  parallel_for(int(obstacles.size()), opts.threads, [&](int i) {
    const std::size_t k = std::size_t(i);
    const GridFunction diff = sols[k].u - ustar;
    const GridFunction h = mask.restrict(frac_laplacian(diff, 2.0 * s));
    MoscoRow& row = report.rows[k];
    row.n = i + 1;
    row.seminorm_error = seminorm2(diff, s);
    row.dual_distance = dual_norm_q(h, mask, s, q_dual, opts.dual).value;
    row.obstacle_seminorm = lp_norm(frac_laplacian(obstacles[k], s), q);
    row.recovery_residual = seminorm2(recov[k].u - w, s);
    row.shifted_recovery = seminorm2(obstacles[k] - spec.base, s);
    row.feasibility_violation = sols[k].primal_violation;
    row.iterations = sols[k].iterations;
    row.converged = sols[k].converged && recov[k].converged;
  });

  std::vector<double> e, d, rec;
  double worst = 0.0;
  for (const MoscoRow& row : report.rows) {
    e.push_back(row.seminorm_error);
    d.push_back(row.dual_distance);
    rec.push_back(row.recovery_residual);
    worst = std::max(worst, row.feasibility_violation);
    report.max_obstacle_seminorm_ratio =
        std::max(report.max_obstacle_seminorm_ratio, row.obstacle_seminorm / report.rows.front().obstacle_seminorm);
  }
  report.seminorm_trend = trend(e);
  report.dual_trend = trend(d);
  report.recovery_trend = trend(rec);
  report.condition_two_violation = std::max(worst, limit.primal_violation);
  return report;
}

ConeCompactnessReport run_cone_compactness(const GridFunction& f, const ObstacleSequenceSpec& spec,
                                           const DomainMask& mask, double s, double q,
                                           const ExperimentOptions& opts) {
  if (!(q > 1.0 && q < 2.0)) throw ParameterError("cone compactness: q must lie in (1, 2), got " + std::to_string(q));
  const std::vector<GridFunction> obstacles = make_obstacle_sequence(spec, mask);
  const std::vector<GridFunction> witnesses = witness_fields(mask, spec.envelope, opts.witnesses, opts.seed);
  const double delta = opts.mollifier_cells * mask.grid().spacing();
  const double floor = -10.0 * opts.vi.tol;

  const VISolution limit = solve_vi(VIProblem{s, mask, f, spec.base}, opts.vi);
  const GridFunction hstar = contact_multiplier(limit.u, f, mask, s);
  if (masked_min(mollify(hstar, delta), mask) < floor) {
    throw NumericalError("cone compactness: limit multiplier is not a nonnegative distribution");
  }
  const std::vector<VISolution> sols = solve_sequence(f, obstacles, mask, s, opts);

  ConeCompactnessReport report;
  report.rows.resize(obstacles.size());
  parallel_for(int(obstacles.size()), opts.threads, [&](int i) {
    const std::size_t k = std::size_t(i);
    const GridFunction hn = contact_multiplier(sols[k].u, f, mask, s);
    const GridFunction smooth = mollify(hn, delta);
    ConeRow& row = report.rows[k];
    row.n = i + 1;
    row.min_mollified = masked_min(smooth, mask);
    row.max_mollified = masked_max(smooth, mask);
    if (row.min_mollified < floor) {
      throw NumericalError("cone compactness: h_" + std::to_string(i + 1) +
                           " is not a nonnegative distribution (min mollified " + std::to_string(row.min_mollified) +
                           ")");
    }
    const GridFunction diff = hn - hstar;
    row.dual_distance = dual_norm_q(diff, mask, s, q, opts.dual).value;
    row.dual2_distance = dual_norm_2(diff, mask, s);
    for (const GridFunction& phi : witnesses) row.witness.push_back(std::abs(pairing(diff, phi)));
    row.iterations = sols[k].iterations;
    row.converged = sols[k].converged;
  });

  std::vector<double> d, d2;
  for (const ConeRow& row : report.rows) {
    d.push_back(row.dual_distance);
    d2.push_back(row.dual2_distance);
  }
  report.dual_trend = trend(d);
  report.dual2_trend = trend(d2);
  return report;
}

namespace {

// f_n = envelope * prod_d cos(n x_d).
GridFunction oscillation(const GridFunction& envelope, int n) {
  const Grid& grid = envelope.grid();
  return pointwise_product(envelope, GridFunction::sample(grid, [&](const std::array<double, 2>& x) {
                             double p = 1.0;
                             for (int d = 0; d < grid.dim(); ++d) p *= std::cos(n * x[d]);
                             return p;
                           }));
}

void check_counterexample_args(int n_max, double s, const DomainMask& mask, const GridFunction& envelope) {
  validate_envelope(envelope, mask);
  require_laplacian_order(s);
  const Grid& grid = mask.grid();
  if (n_max < 1) throw ParameterError("counterexample: n_max must be >= 1");
  // Quarter-Nyquist guard: n <= (pi M / (2L)) / 4.
  if (8.0 * grid.half_width() * n_max > std::numbers::pi * grid.points_per_dim()) {
    throw ValidationError("counterexample: frequency n_max = " + std::to_string(n_max) +
                          " exceeds a quarter of the Nyquist frequency");
  }
}

}  // namespace

std::vector<GridFunction> counterexample_sequence(int n_max, double s, const DomainMask& mask,
                                                  const GridFunction& envelope) {
  check_counterexample_args(n_max, s, mask, envelope);
  std::vector<GridFunction> out;
  for (int n = 1; n <= n_max; ++n) out.push_back(frac_laplacian(oscillation(envelope, n), s));
  return out;
}

CounterexampleReport run_counterexample(int n_max, double s, double q, const DomainMask& mask,
                                        const GridFunction& envelope, const ExperimentOptions& opts) {
  check_counterexample_args(n_max, s, mask, envelope);
  if (!(s > 0.0 && s <= 1.0)) throw ParameterError("counterexample: s must lie in (0, 1]");
  const std::vector<GridFunction> witnesses = witness_fields(mask, envelope, opts.witnesses, opts.seed);
  const double delta = opts.mollifier_cells * mask.grid().spacing();

  CounterexampleReport report;
  report.rows.resize(std::size_t(n_max));
  parallel_for(n_max, opts.threads, [&](int i) {
    const int n = i + 1;
    const GridFunction fn = oscillation(envelope, n);
    const GridFunction hn = frac_laplacian(fn, s);
    const GridFunction smooth = mollify(mask.restrict(hn), delta);
    CounterexampleRow& row = report.rows[std::size_t(i)];
    row.n = n;
    row.l2_norm = lp_norm(fn, 2.0);
    row.dual_q = dual_norm_q(hn, mask, s, q, opts.dual).value;
    row.dual_2 = dual_norm_2(hn, mask, s);
    row.min_mollified = masked_min(smooth, mask);
    row.max_mollified = masked_max(smooth, mask);
    for (const GridFunction& phi : witnesses) row.witness.push_back(std::abs(pairing(fn, phi)));
  });

  const CounterexampleRow& first = report.rows.front();
  const CounterexampleRow& last = report.rows.back();
  report.min_dual_q_ratio = INFINITY;
  report.min_dual_2_ratio = INFINITY;
  for (const CounterexampleRow& row : report.rows) {
    report.min_dual_q_ratio = std::min(report.min_dual_q_ratio, row.dual_q / first.dual_q);
    report.min_dual_2_ratio = std::min(report.min_dual_2_ratio, row.dual_2 / first.dual_2);
  }
  for (std::size_t j = 0; j < witnesses.size(); ++j) {
    report.max_witness_ratio = std::max(report.max_witness_ratio, last.witness[j] / first.witness[j]);
  }
  return report;
}

}  // namespace fracsob
