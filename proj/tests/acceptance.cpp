// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <unistd.h>

#include <Eigen/Eigenvalues>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "fracsob/cli.hpp"
#include "fracsob/dual_norm.hpp"
#include "fracsob/experiments.hpp"
#include "fracsob/norms.hpp"
#include "fracsob/qvi.hpp"
#include "fracsob/spectral.hpp"
#include "fracsob/vi.hpp"
#include "support.hpp"

using namespace fracsob;
using namespace fracsob::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double inf_norm(const GridFunction& a) { return a.values().cwiseAbs().maxCoeff(); }

Outcome operator_identities() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Grid g(1, 2.0, 64);
  double ibp = 0.0, semigroup = 0.0, bessel = 0.0, riesz = 0.0;
  for (int k = 0; k < 100; ++k) {
    const GridFunction f = random_field(g, rng), h = random_field(g, rng);
    const GridFunction centered = f - GridFunction::constant(g, mean(f));
    const double s = 0.05 + 1.95 * unit(rng);
    const double scale = std::sqrt(pairing(f, f) * pairing(h, h));
    ibp = std::max(ibp, std::abs(pairing(frac_laplacian(f, s), h) - pairing(f, frac_laplacian(h, s))) / scale);
    const double a = s * unit(rng), b = s - a;
    if (a > 0.0 && b > 0.0) {
      const GridFunction whole = frac_laplacian(centered, s);
      semigroup = std::max(semigroup, inf_norm(frac_laplacian(frac_laplacian(centered, a), b) - whole) /
                                          std::max(1.0, inf_norm(whole)));
    }
    const double sb = 0.05 + 1.9 * unit(rng);
    const GridFunction bi = bessel_inverse(f, sb);
    bessel = std::max(bessel, inf_norm(frac_laplacian(bi, sb) + bi - f));
    const double sr = 0.05 + 0.9 * unit(rng);
    riesz = std::max(riesz, inf_norm(frac_laplacian(riesz_potential(centered, sr), sr) - centered));
    riesz = std::max(riesz, inf_norm(riesz_potential(frac_laplacian(f, sr), sr) - centered));
  }
  const double worst = std::max({ibp, semigroup, bessel, riesz});
  return {worst < 1e-10, fmt("ibp %.1e, semigroup %.1e, bessel %.1e, riesz %.1e (limit 1e-10, 100 fields, M=64)",
                             ibp, semigroup, bessel, riesz)};
}

Outcome product_rule() {
  std::mt19937_64 rng(102);
  const Grid g(1, 2.0, 64);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double s = 0.1 + 0.09 * k;
    const GridFunction f = random_field(g, rng), h = random_field(g, rng);
    const GridFunction lhs = frac_laplacian(pointwise_product(f, h), s);
    const GridFunction rhs = pointwise_product(f, frac_laplacian(h, s)) + pointwise_product(h, frac_laplacian(f, s)) +
                             product_rule_remainder(f, h, s);
    worst = std::max(worst, inf_norm(lhs - rhs));
  }
  return {worst < 1e-9, fmt("max residual %.2e (limit 1e-9, 20 pairs, M=64)", worst)};
}

Outcome kernel_equivalence() {
  std::mt19937_64 rng(103);
  double worst = 0.0;
  for (int m : {32, 64}) {
    const Grid g(1, 2.0, m);
    for (double s : {0.3, 1.0, 1.7}) {
      const DenseOperator k = kernel_matrix(g, s);
      for (int t = 0; t < 10; ++t) {
        const GridFunction f = random_field(g, rng);
        worst = std::max(worst, (k * f.values() - frac_laplacian(f, s).values()).cwiseAbs().maxCoeff());
      }
    }
  }
  return {worst < 1e-10, fmt("max difference %.2e (limit 1e-10, M=32 and 64)", worst)};
}

Outcome vi_oracle() {
  std::mt19937_64 rng(104);
  const Grid g(1, 2.0, 32);
  const DomainMask mask = DomainMask::interval(g, -1.0, 1.0);
  const VIOptions opts;
  double diff = 0.0, gap = 0.0, unique = 0.0;
  int converged = 0;
  for (int k = 0; k < 20; ++k) {
    const VIProblem problem = random_vi_problem(mask, rng);
    const VISolution sol = solve_vi(problem, opts);
    if (sol.converged) {
      ++converged;
      gap = std::max(gap, sol.complementarity_gap);
    }
    diff = std::max(diff, inf_norm(sol.u - dense_vi_oracle(problem)));
    VIOptions other = opts;
    GridFunction start(g);
    for (Index i : mask.indices()) start[i] = std::max(problem.obstacle[i], 0.0) + 0.5;
    other.initial = start;
    const VISolution second = solve_vi(problem, other);
    unique = std::max(unique, hsp_seminorm(sol.u - second.u, NormParams(problem.s, 2.0)));
  }
  const bool pass = converged == 20 && diff <= 1e-7 && gap <= 1e-8 && unique <= 10.0 * opts.tol;
  return {pass, fmt("oracle diff %.2e (<=1e-7), gap %.2e (<=1e-8), two-start %.2e (<=1e-7), converged %d/20", diff,
                    gap, unique, converged)};
}

Outcome riesz_identity() {
  std::mt19937_64 rng(105);
  const Grid g(1, 2.0, 128);
  const DomainMask mask = DomainMask::interval(g, -1.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double s = 0.1 + 0.045 * k;
    const GridFunction w = k % 2 ? random_masked_field(mask, rng) : random_smooth_masked_field(mask, -1, 1, rng);
    const double expect = hsp_seminorm(w, NormParams(s, 2.0));
    worst = std::max(worst, std::abs(dual_norm_2(frac_laplacian(w, 2.0 * s), mask, s) - expect) / expect);
  }
  return {worst <= 1e-7, fmt("max relative error %.2e (limit 1e-7, 20 fields)", worst)};
}

Outcome cone_compactness() {
  const ObstacleExperiment ex;
  const ConeCompactnessReport rep = run_cone_compactness(ex.f, ex.spec(), ex.mask, ex.s, 1.5);
  bool converged = true;
  double lowest = 0.0;
  for (const auto& r : rep.rows) {
    converged = converged && r.converged;
    lowest = std::min(lowest, r.min_mollified);
  }
  // Weak-only control arm: the sign-changing counterexample does not decay in H^{-s,2}.
  const CounterexampleReport control = run_counterexample(32, ex.s, 1.5, ex.mask, ex.envelope);
  const bool pass = converged && rep.rows.size() == 32 && rep.dual_trend.endpoint_ratio <= 0.2 &&
                    rep.dual_trend.spearman <= -0.8 && control.min_dual_2_ratio >= 0.5;
  return {pass, fmt("d32/d1 %.3f (<=0.2), spearman %.3f (<=-0.8), min mollified h_n %.1e, control H^{-s,2} floor "
                    "%.3f (>=0.5)",
                    rep.dual_trend.endpoint_ratio, rep.dual_trend.spearman, lowest, control.min_dual_2_ratio)};
}

Outcome counterexample() {
  const ObstacleExperiment ex;
  const CounterexampleReport rep = run_counterexample(32, ex.s, 1.5, ex.mask, ex.envelope);
  bool sign_changing = true;
  for (const auto& r : rep.rows) sign_changing = sign_changing && r.min_mollified < 0.0 && r.max_mollified > 0.0;
  const bool pass = sign_changing && rep.min_dual_q_ratio >= 0.5 && rep.max_witness_ratio <= 0.1;
  return {pass, fmt("min dual_q ratio %.3f (>=0.5), worst witness ratio n=32/n=1 %.2e (<=0.1), sign-changing %s",
                    rep.min_dual_q_ratio, rep.max_witness_ratio, sign_changing ? "yes" : "no")};
}

Outcome mosco_sweep() {
  const ObstacleExperiment ex;
  const MoscoSweepReport rep = run_mosco_sweep(ex.f, ex.spec(), ex.mask, ex.s, 3.0);
  bool converged = true;
  for (const auto& r : rep.rows) converged = converged && r.converged;
  const bool pass = converged && rep.rows.size() == 32 && rep.seminorm_trend.endpoint_ratio <= 0.2 &&
                    rep.seminorm_trend.spearman <= -0.8 && rep.recovery_trend.endpoint_ratio <= 0.2 &&
                    rep.condition_two_violation <= 1e-10;
  return {pass, fmt("e32/e1 %.3f (<=0.2), spearman %.3f (<=-0.8), recovery ratio %.3f (<=0.2), condition II %.1e "
                    "(<=1e-10)",
                    rep.seminorm_trend.endpoint_ratio, rep.seminorm_trend.spearman, rep.recovery_trend.endpoint_ratio,
                    rep.condition_two_violation)};
}

Outcome qvi() {
  const Grid g(1, 2.0, 32);
  const DomainMask mask = DomainMask::interval(g, -1.0, 1.0);
  const ObstacleMapSpec spec{0.2, 0.1, smooth_bump(g, {0.0, 0.0}, 0.8)};
  const QVIOptions opts;

  const QVIResult zero = solve_qvi(GridFunction(g), spec, mask, 0.5, opts);
  const double trivial = hsp_seminorm(zero.u, NormParams(0.5, 2.0));

  ObstacleMapSpec flat = spec;
  flat.envelope = GridFunction(g);
  const GridFunction load = smooth_bump(g, {0.2, 0.0}, 0.6, -3.0);
  const QVIResult reduced = solve_qvi(load, flat, mask, 0.5, opts);
  const VISolution fixed = solve_vi(VIProblem{0.5, mask, load, mask.restrict(GridFunction::constant(g, -0.1))});
  const double degeneracy = inf_norm(reduced.u - fixed.u);

  std::mt19937_64 rng(109);
  double spread = 0.0;
  int agreed = 0;
  const GridFunction f = smooth_bump(g, {0.0, 0.0}, 0.7, -1.0);
  const QVIResult main = solve_qvi(f, spec, mask, 0.5, opts);
  for (int r = 0; r < 50; ++r) {
    QVIOptions damped;
    damped.damping = 0.5;
    damped.outer_max = 400;
    damped.initial = random_masked_field(mask, rng, 0.5);
    const QVIResult other = solve_qvi(f, spec, mask, 0.5, damped);
    if (other.converged && main.converged) {
      ++agreed;
      spread = std::max(spread, inf_norm(other.u - main.u));
    }
  }
  const bool pass = zero.converged && trivial <= 10.0 * opts.vi.tol && reduced.converged && degeneracy <= 1e-8 &&
                    main.converged && agreed > 0 && spread <= 1e-6;
  return {pass, fmt("trivial %.1e (<=1e-7), constant map %.1e (<=1e-8), 50-restart oracle %.1e (<=1e-6, %d/50 "
                    "converged)",
                    trivial, degeneracy, spread, agreed)};
}

Outcome poincare() {
  const Grid g(1, 2.0, 256);
  const DomainMask mask = DomainMask::interval(g, -0.5, 0.5);
  std::mt19937_64 rng(110);
  double worst = 0.0, oracle_err = 0.0;
  for (double s : {0.5, 1.0}) {
    const double c = poincare_constant(mask, s);
    const DenseOperator a = restrict_to_mask(kernel_matrix(g, 2.0 * s), mask);
    Eigen::SelfAdjointEigenSolver<DenseOperator> eig(a, Eigen::EigenvaluesOnly);
    const double dense = 1.0 / std::sqrt(eig.eigenvalues()[0]);
    oracle_err = std::max(oracle_err, std::abs(c - dense) / dense);
    for (int k = 0; k < 100; ++k) {
      const GridFunction f = k % 2 ? random_masked_field(mask, rng) : random_smooth_masked_field(mask, -0.5, 0.5, rng);
      worst = std::max(worst, lp_norm(f, 2.0) / (c * hsp_seminorm(f, NormParams(s, 2.0))));
    }
  }
  const bool pass = worst <= 1.0 + 1e-6 && oracle_err <= 0.01;
  return {pass, fmt("max ||f||/(C |f|) %.6f (<=1+1e-6), dense oracle rel. error %.1e (<=1e-2), M=256", worst,
                    oracle_err)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / ("fracsob_accept_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const fs::path configs = FRACSOB_CONFIG_DIR;
  struct Run {
    std::string command;
    std::vector<std::string> args;
  };
  const std::vector<Run> runs{
      {"check-ops", {"--grid", "1:2.0:64", "--s", "0.5"}},
      {"solve-vi", {"--config", (configs / "vi.json").string()}},
      {"dual-norm", {"--config", (configs / "dual.json").string()}},
      {"mosco-sweep", {"--config", (configs / "sweep.json").string()}},
      {"cone-compactness", {"--config", (configs / "cone.json").string()}},
      {"counterexample", {"--config", (configs / "counterexample.json").string()}},
      {"qvi", {"--config", (configs / "qvi.json").string()}},
  };
  int identical = 0;
  std::string failed;
  for (const Run& r : runs) {
    std::vector<std::string> outputs;
    for (const char* threads : {"0", "0", "3"}) {
      const fs::path out = dir / (r.command + ".csv");
      std::vector<std::string> args{r.command, "--seed", "42", "--threads", threads, "--out", out.string()};
      args.insert(args.end(), r.args.begin(), r.args.end());
      std::ostringstream sink;
      const int code = cli::run(args, sink, sink);
      std::string bytes = std::to_string(code) + "\n" + slurp(out);
      const fs::path beside = fs::path(out).replace_extension(".fields.csv");
      if (fs::exists(beside)) bytes += slurp(beside);
      outputs.push_back(bytes);
      fs::remove(out);
      fs::remove(beside);
    }
    const bool same = outputs[0] == outputs[1] && outputs[1] == outputs[2] && outputs[0].rfind("0\n", 0) == 0;
    identical += same;
    if (!same) failed += " " + r.command;
  }
  fs::remove_all(dir);
  return {identical == int(runs.size()),
          fmt("%d/%zu subcommands bitwise identical over three runs (seed 42, threads auto/auto/3)%s", identical,
              runs.size(), failed.empty() ? "" : (" differing:" + failed).c_str())};
}

Outcome brezis_lieb() {
  std::mt19937_64 rng(112);
  const Grid g(1, 2.0, 128);
  const GridFunction f = random_field(g, rng), h = random_field(g, rng);
  double constant = 0.0;
  for (double d : brezis_lieb_defect(std::vector<GridFunction>(5, f), f, 3.0)) constant = std::max(constant, d);

  const GridFunction fp(g, f.values().cwiseAbs()), gp(g, h.values().cwiseAbs());
  std::vector<GridFunction> seq;
  for (int k = 1; k <= 30; ++k) seq.push_back(fp + (1.0 / k) * gp);
  const auto d = brezis_lieb_defect(seq, fp, 3.0);
  bool monotone = true;
  for (std::size_t k = 1; k < d.size(); ++k) monotone = monotone && d[k] <= d[k - 1] * (1.0 + 1e-12) + 1e-14;

  std::vector<GridFunction> wandering;
  std::vector<double> cross;
  for (int k = 0; k < 12; ++k) {
    const GridFunction b = smooth_bump(g, {-1.5 + 0.25 * k, 0.0}, 0.3);
    wandering.push_back(f + b);
    cross.push_back(2.0 * std::abs(pairing(f, b)));
  }
  const auto dk = brezis_lieb_defect(wandering, f, 2.0);
  double expansion = 0.0;
  for (std::size_t k = 0; k < dk.size(); ++k) expansion = std::max(expansion, std::abs(dk[k] - cross[k]));

  const bool pass = constant == 0.0 && monotone && d.back() < 0.05 * d.front() && expansion < 1e-10;
  return {pass, fmt("f_k = f: %.1e (==0); f + g/k monotone %s, d_30/d_1 %.3f; p=2 expansion residual %.1e (<1e-10)",
                    constant, monotone ? "yes" : "no", d.back() / d.front(), expansion)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"operator identity suite", operator_identities},
      {"product rule via dense kernel", product_rule},
      {"spectral vs dense kernel", kernel_equivalence},
      {"VI solver vs active-set oracle", vi_oracle},
      {"q=2 Riesz dual-norm identity", riesz_identity},
      {"positive-cone compactness", cone_compactness},
      {"sign-changing counterexample", counterexample},
      {"obstacle stability sweep", mosco_sweep},
      {"QVI fixed points", qvi},
      {"Poincare constant", poincare},
      {"CLI determinism", determinism},
      {"Brezis-Lieb defect", brezis_lieb},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << (i + 1 < 10 ? " " : "") << i + 1 << "] " << criteria[i].first
              << ": " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
