#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fracsob/domain_mask.hpp"
#include "fracsob/dual_norm.hpp"
#include "fracsob/grid_function.hpp"
#include "fracsob/vi.hpp"

namespace fracsob {

/// Smooth bump amplitude * exp(1 - 1/(1 - |x-c|^2/r^2)) on |x-c| < r, zero elsewhere.
GridFunction smooth_bump(const Grid& grid, std::array<double, 2> center, double radius, double amplitude = 1.0);

/// Periodic Gaussian smoothing exp(-delta^2 |xi|^2).
GridFunction mollify(const GridFunction& f, double delta);

/// Spearman rank correlation (average ranks for ties).
double spearman(const std::vector<double>& x, const std::vector<double>& y);

/// psi_n = base + amplitude * n^{-decay} * envelope * cos(n * stride * pi * x_0 / L), n = 1..count.
struct ObstacleSequenceSpec {
  GridFunction base;
  double amplitude = 0.0;
  double decay_exponent = 0.5;
  int stride = 1;
  int count = 32;
  GridFunction envelope;
};

/// Throws ValidationError if the spec is inconsistent with the mask, names
/// the offending n if a generated obstacle is infeasible, and enforces the
/// quarter-Nyquist frequency guard.
std::vector<GridFunction> make_obstacle_sequence(const ObstacleSequenceSpec& spec, const DomainMask& mask);

/// Masked smooth witness fields phi_j = envelope * exp(-(x - c_j)^2 / (2 w_j^2)),
/// centers and widths drawn from `seed`.
std::vector<GridFunction> witness_fields(const DomainMask& mask, const GridFunction& envelope, int count,
                                         std::uint64_t seed);

struct ExperimentOptions {
  VIOptions vi;
  DualNormOptions dual;
  /// Worker threads for per-n solves; 0 picks hardware concurrency.
  int threads = 0;
  std::uint64_t seed = 0;
  int witnesses = 10;
  /// Mollifier width in units of grid spacing for positivity checks.
  double mollifier_cells = 3.0;
};

struct MoscoRow {
  int n;
  double seminorm_error;       // ||(-Delta)^{s/2}(u_n - u*)||_2
  double dual_distance;        // dual_norm_q' of (-Delta)^s (u_n - u*), q' = q/(q-1)
  double obstacle_seminorm;    // ||(-Delta)^{s/2} psi_n||_q
  double recovery_residual;    // ||(-Delta)^{s/2}(w_n - w)||_2, w = P psi, w_n solves the VI with data (-Delta)^s w
  double shifted_recovery;     // ||(-Delta)^{s/2}(psi_n + w - psi - w)||_2, bounded but not vanishing
  double feasibility_violation;  // max over mask of (psi_n - u_n)^+
  int iterations;
  bool converged;
};

struct TrendSummary {
  double endpoint_ratio = 0.0;
  double spearman = 0.0;
};

struct MoscoSweepReport {
  std::vector<MoscoRow> rows;
  TrendSummary seminorm_trend;
  TrendSummary dual_trend;
  TrendSummary recovery_trend;
  /// max over n of (psi_n - u_n)^+ together with (psi - u*)^+.
  double condition_two_violation = 0.0;
  double max_obstacle_seminorm_ratio = 0.0;
  GridFunction limit_solution;
};

MoscoSweepReport run_mosco_sweep(const GridFunction& f, const ObstacleSequenceSpec& spec, const DomainMask& mask,
                                 double s, double q, const ExperimentOptions& opts = {});

struct ConeRow {
  int n;
  double dual_distance;        // dual_norm_q(h_n - h*)
  double dual2_distance;       // dual_norm_2(h_n - h*)
  double min_mollified;        // min over mask of mollified h_n
  double max_mollified;
  std::vector<double> witness;  // |(h_n - h*)[phi_j]|
  int iterations;
  bool converged;
};

struct ConeCompactnessReport {
  std::vector<ConeRow> rows;
  TrendSummary dual_trend;
  TrendSummary dual2_trend;
};

/// h_n = (-Delta)^s u_n - f on the mask for obstacle solutions u_n.
/// Throws NumericalError if some mollified h_n is below -10 tol on the mask.
ConeCompactnessReport run_cone_compactness(const GridFunction& f, const ObstacleSequenceSpec& spec,
                                           const DomainMask& mask, double s, double q,
                                           const ExperimentOptions& opts = {});

/// h_n = frac_laplacian(envelope * prod_i cos(n x_i), s), n = 1..n_max.
std::vector<GridFunction> counterexample_sequence(int n_max, double s, const DomainMask& mask,
                                                  const GridFunction& envelope);

struct CounterexampleRow {
  int n;
  double l2_norm;              // ||f_n||_2
  double dual_q;               // dual_norm_q(h_n)
  double dual_2;               // dual_norm_2(h_n)
  double min_mollified;
  double max_mollified;
  std::vector<double> witness;  // |<f_n, phi_j>|
};

struct CounterexampleReport {
  std::vector<CounterexampleRow> rows;
  double min_dual_q_ratio = 0.0;  // min_n dual_q(n) / dual_q(1)
  double min_dual_2_ratio = 0.0;
  double max_witness_ratio = 0.0;  // max_j |w_j(n_max)| / |w_j(1)|
};

CounterexampleReport run_counterexample(int n_max, double s, double q, const DomainMask& mask,
                                        const GridFunction& envelope, const ExperimentOptions& opts = {});

}  // namespace fracsob
