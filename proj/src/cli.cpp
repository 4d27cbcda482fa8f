#include "fracsob/cli.hpp"

#include <unistd.h>

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include "fracsob/dual_norm.hpp"
#include "fracsob/errors.hpp"
#include "fracsob/experiments.hpp"
#include "fracsob/kernel.hpp"
#include "fracsob/norms.hpp"
#include "fracsob/qvi.hpp"
#include "fracsob/spectral.hpp"
#include "fracsob/vi.hpp"

namespace fracsob::cli {

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

namespace {

using json = nlohmann::json;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> threads;
  std::optional<double> tol;
  std::string grid;
  std::optional<double> s;
};

[[noreturn]] void bad_field(const std::string& path, const std::string& why) {
  throw ValidationError("config: field '" + path + "' " + why);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

const json* find(const json& obj, const std::string& key) {
  if (!obj.is_object()) return nullptr;
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  const json* v = find(obj, key);
  if (!v) bad_field(join(path, key), "is required");
  return *v;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) bad_field(path, "must be a number");
  return v.get<double>();
}

double number(const json& obj, const std::string& key, const std::string& path, std::optional<double> fallback = {}) {
  const json* v = find(obj, key);
  if (!v) {
    if (fallback) return *fallback;
    bad_field(join(path, key), "is required");
  }
  return as_number(*v, join(path, key));
}

int integer(const json& obj, const std::string& key, const std::string& path, std::optional<int> fallback = {}) {
  const json* v = find(obj, key);
  if (!v) {
    if (fallback) return *fallback;
    bad_field(join(path, key), "is required");
  }
  if (!v->is_number_integer()) bad_field(join(path, key), "must be an integer");
  return v->get<int>();
}

std::array<double, 2> point(const json& v, int dim, const std::string& path) {
  std::array<double, 2> p{0.0, 0.0};
  if (v.is_number() && dim == 1) {
    p[0] = v.get<double>();
    return p;
  }
  if (!v.is_array() || int(v.size()) != dim) bad_field(path, "must be an array of " + std::to_string(dim) + " numbers");
  for (int d = 0; d < dim; ++d) p[std::size_t(d)] = as_number(v[std::size_t(d)], path);
  return p;
}

// Everything a field spec may refer to.
struct Context {
  Grid grid;
  std::optional<DomainMask> mask;
  std::uint64_t seed;
};

GridFunction field(const json& spec, const Context& ctx, const std::string& path);

GridFunction field_component(const json& spec, const Context& ctx, const std::string& path) {
  if (!spec.is_object()) bad_field(path, "must be an object or an array of objects");
  const json& kind_node = require(spec, "kind", path);
  if (!kind_node.is_string()) bad_field(join(path, "kind"), "must be a string");
  const std::string kind = kind_node.get<std::string>();
  const Grid& g = ctx.grid;
  const double amplitude = number(spec, "amplitude", path, 1.0);
  GridFunction out(g);
  if (kind == "zero") {
  } else if (kind == "constant") {
    out = GridFunction::constant(g, number(spec, "value", path));
  } else if (kind == "bump") {
    out = smooth_bump(g, point(require(spec, "center", path), g.dim(), join(path, "center")),
                      number(spec, "radius", path), amplitude);
  } else if (kind == "gaussian") {
    const auto c = point(require(spec, "center", path), g.dim(), join(path, "center"));
    const double w = number(spec, "width", path);
    if (!(w > 0.0)) bad_field(join(path, "width"), "must be positive");
    out = GridFunction::sample(g, [&](const std::array<double, 2>& x) {
      const double r2 = (x[0] - c[0]) * (x[0] - c[0]) + (x[1] - c[1]) * (x[1] - c[1]);
      return amplitude * std::exp(-r2 / (2.0 * w * w));
    });
  } else if (kind == "cosine") {
    const json& k = require(spec, "k", path);
    const auto kk = point(k, g.dim(), join(path, "k"));
    out = GridFunction::sample(g, [&](const std::array<double, 2>& x) {
      return amplitude * std::cos(std::numbers::pi / g.half_width() * (kk[0] * x[0] + kk[1] * x[1]));
    });
  } else if (kind == "random") {
    const int stream = integer(spec, "stream", path, 0);
    std::seed_seq seq{std::uint32_t(ctx.seed), std::uint32_t(ctx.seed >> 32), std::uint32_t(stream)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, amplitude);
    for (Index i = 0; i < g.size(); ++i) out[i] = normal(rng);
  } else if (kind == "values") {
    const json& values = require(spec, "values", path);
    if (!values.is_array() || Index(values.size()) != g.size()) {
      bad_field(join(path, "values"), "must be an array of " + std::to_string(g.size()) + " numbers");
    }
    for (Index i = 0; i < g.size(); ++i) out[i] = as_number(values[std::size_t(i)], join(path, "values"));
  } else {
    bad_field(join(path, "kind"), "has unknown value '" + kind + "'");
  }
  if (const json* m = find(spec, "masked"); m && m->is_boolean() && m->get<bool>()) {
    if (!ctx.mask) bad_field(join(path, "masked"), "needs a mask");
    out = ctx.mask->restrict(out);
  }
  return out;
}

GridFunction field(const json& spec, const Context& ctx, const std::string& path) {
  if (!spec.is_array()) return field_component(spec, ctx, path);
  GridFunction sum(ctx.grid);
  for (std::size_t i = 0; i < spec.size(); ++i) sum += field_component(spec[i], ctx, path + "[" + std::to_string(i) + "]");
  return sum;
}

Grid parse_grid_shorthand(const std::string& text) {
  std::istringstream in(text);
  int dim = 0, m = 0;
  double l = 0.0;
  char c1 = 0, c2 = 0;
  if (!(in >> dim >> c1 >> l >> c2 >> m) || c1 != ':' || c2 != ':' || !in.eof()) {
    throw ValidationError("--grid: expected dim:L:M, got '" + text + "'");
  }
  return Grid(dim, l, m);
}

Grid parse_grid(const json& cfg, const Flags& flags) {
  if (!flags.grid.empty()) return parse_grid_shorthand(flags.grid);
  const json& g = require(cfg, "grid", "");
  try {
    return Grid(integer(g, "dim", "grid"), number(g, "L", "grid"), integer(g, "M", "grid"));
  } catch (const ParameterError& e) {
    bad_field("grid", e.what());
  }
}

DomainMask parse_mask(const json& cfg, const Grid& grid) {
  const json& m = require(cfg, "mask", "");
  const json& shape = require(m, "shape", "mask");
  const json& bounds = require(m, "bounds", "mask");
  if (shape == "interval") {
    if (grid.dim() != 1) bad_field("mask.shape", "interval needs a 1D grid");
    if (!bounds.is_array() || bounds.size() != 2) bad_field("mask.bounds", "must be [a, b]");
    return DomainMask::interval(grid, as_number(bounds[0], "mask.bounds"), as_number(bounds[1], "mask.bounds"));
  }
  if (shape == "box") {
    if (!bounds.is_array() || int(bounds.size()) != grid.dim()) {
      bad_field("mask.bounds", "must hold one [lo, hi] pair per dimension");
    }
    std::array<double, 2> lo{-grid.half_width(), -grid.half_width()}, hi{grid.half_width(), grid.half_width()};
    for (int d = 0; d < grid.dim(); ++d) {
      const json& pair = bounds[std::size_t(d)];
      if (!pair.is_array() || pair.size() != 2) bad_field("mask.bounds", "must hold one [lo, hi] pair per dimension");
      lo[std::size_t(d)] = as_number(pair[0], "mask.bounds");
      hi[std::size_t(d)] = as_number(pair[1], "mask.bounds");
    }
    if (grid.dim() == 1) return DomainMask::interval(grid, lo[0], hi[0]);
    return DomainMask::box(grid, lo, hi);
  }
  bad_field("mask.shape", "must be 'interval' or 'box'");
}

double parse_s(const json& cfg, const Flags& flags, double hi = 1.0) {
  const double s = flags.s ? *flags.s : number(cfg, "s", "");
  if (!(s > 0.0 && s <= hi)) bad_field("s", "must lie in (0, " + std::to_string(hi) + "]");
  return s;
}

VIOptions parse_vi(const json& cfg, const Flags& flags) {
  VIOptions o;
  if (const json* v = find(cfg, "vi")) {
    o.tol = number(*v, "tol", "vi", o.tol);
    o.max_iter = integer(*v, "max_iter", "vi", o.max_iter);
  }
  if (flags.tol) o.tol = *flags.tol;
  if (!(o.tol > 0.0)) bad_field("vi.tol", "must be positive");
  if (o.max_iter < 1) bad_field("vi.max_iter", "must be >= 1");
  return o;
}

DualNormOptions parse_dual(const json& cfg) {
  DualNormOptions o;
  if (const json* v = find(cfg, "dual")) {
    o.tol = number(*v, "tol", "dual", o.tol);
    o.max_iter = integer(*v, "max_iter", "dual", o.max_iter);
  }
  if (!(o.tol > 0.0)) bad_field("dual.tol", "must be positive");
  if (o.max_iter < 1) bad_field("dual.max_iter", "must be >= 1");
  return o;
}

ExperimentOptions parse_experiment(const json& cfg, const Flags& flags, std::uint64_t seed) {
  ExperimentOptions o;
  o.vi = parse_vi(cfg, flags);
  o.dual = parse_dual(cfg);
  o.seed = seed;
  o.threads = flags.threads ? *flags.threads : integer(cfg, "threads", "", 0);
  o.witnesses = integer(cfg, "witnesses", "", o.witnesses);
  o.mollifier_cells = number(cfg, "mollifier_cells", "", o.mollifier_cells);
  if (o.threads < 0) bad_field("threads", "must be >= 0");
  if (o.witnesses < 1) bad_field("witnesses", "must be >= 1");
  if (!(o.mollifier_cells > 0.0)) bad_field("mollifier_cells", "must be positive");
  return o;
}

ObstacleSequenceSpec parse_sequence(const json& cfg, const Context& ctx, double s) {
  const json& q = require(cfg, "sequence", "");
  ObstacleSequenceSpec spec{field(require(cfg, "obstacle", ""), ctx, "obstacle"),
                            number(q, "amplitude", "sequence"),
                            number(q, "decay", "sequence", s),
                            integer(q, "stride", "sequence", 1),
                            integer(q, "count", "sequence", 32),
                            field(require(q, "envelope", "sequence"), ctx, "sequence.envelope")};
  return spec;
}

// ---------------------------------------------------------------------------
// Output

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17e", v);
  return buf;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string render(const std::string& hash) const {
    std::string text = "# config-hash: " + hash + "\n";
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) text += (i ? "," : "") + cells[i];
      text += "\n";
    };
    line(header);
    for (const auto& r : rows) line(r);
    return text;
  }
};

void write_atomic(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream file(tmp, std::ios::binary | std::ios::trunc);
    if (!file) throw ValidationError("cannot open '" + tmp.string() + "' for writing");
    file << text;
    file.flush();
    if (!file) throw ValidationError("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw ValidationError("cannot move output into place at '" + path.string() + "': " + ec.message());
  }
}

struct Output {
  std::string out_path;
  std::string hash;
  std::ostream& out;

  void emit(const Table& t) const {
    const std::string text = t.render(hash);
    if (out_path.empty()) {
      out << text;
    } else {
      write_atomic(out_path, text);
    }
  }
  // Secondary table next to the main output (skipped when writing to stdout).
  void emit_beside(const std::string& suffix, const Table& t) const {
    if (out_path.empty()) return;
    std::filesystem::path p = out_path;
    p.replace_extension(suffix);
    write_atomic(p, t.render(hash));
  }
};

Table node_table(const Grid& g, const std::vector<std::pair<std::string, const GridFunction*>>& columns) {
  Table t;
  t.header = {"index", "x0"};
  if (g.dim() == 2) t.header.push_back("x1");
  for (const auto& c : columns) t.header.push_back(c.first);
  for (Index i = 0; i < g.size(); ++i) {
    const auto x = g.node(i);
    std::vector<std::string> row{std::to_string(i), num(x[0])};
    if (g.dim() == 2) row.push_back(num(x[1]));
    for (const auto& c : columns) row.push_back(num((*c.second)[i]));
    t.rows.push_back(std::move(row));
  }
  return t;
}

void witness_columns(Table& t, std::size_t count) {
  for (std::size_t j = 0; j < count; ++j) t.header.push_back("witness_" + std::to_string(j));
}

// ---------------------------------------------------------------------------
// Subcommands

int check_ops(const json& cfg, const Flags& flags, std::uint64_t seed, const Output& io, std::ostream& err) {
  const Grid g = parse_grid(cfg, flags);
  const double s = parse_s(cfg, flags, 2.0);
  const int fields = integer(cfg, "fields", "", 20);
  if (fields < 1) bad_field("fields", "must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random = [&] {
    GridFunction f(g);
    for (Index i = 0; i < g.size(); ++i) f[i] = normal(rng);
    return f;
  };
  auto inf = [](const GridFunction& f) { return f.values().cwiseAbs().maxCoeff(); };
  const bool dense = g.size() <= kMaxDenseNodes;
  const bool riesz = s < g.dim();
  const double half = 0.5 * s;
  const double bessel_order = std::min(s, 1.9);
  std::optional<DenseOperator> kernel;
  if (dense) kernel = kernel_matrix(g, s);

  double ibp = 0.0, semigroup = 0.0, bessel = 0.0, round_trip = 0.0, equivalence = 0.0, product = 0.0;
  for (int k = 0; k < fields; ++k) {
    const GridFunction f = random(), h = random();
    const GridFunction lf = frac_laplacian(f, s);
    const double scale = std::sqrt(pairing(f, f) * pairing(h, h));
    ibp = std::max(ibp, std::abs(pairing(lf, h) - pairing(f, frac_laplacian(h, s))) / scale);
    const GridFunction centered = f - GridFunction::constant(g, mean(f));
    semigroup = std::max(semigroup, inf(frac_laplacian(frac_laplacian(centered, half), half) - frac_laplacian(centered, s)) /
                                        std::max(1.0, inf(lf)));
    const GridFunction b = bessel_inverse(f, bessel_order);
    bessel = std::max(bessel, inf(frac_laplacian(b, bessel_order) + b - f));
    if (riesz) round_trip = std::max(round_trip, inf(frac_laplacian(riesz_potential(centered, s), s) - centered));
    if (dense) {
      equivalence = std::max(equivalence, (*kernel * f.values() - lf.values()).cwiseAbs().maxCoeff());
      const GridFunction r = product_rule_remainder(f, h, s);
      const GridFunction lhs = frac_laplacian(pointwise_product(f, h), s);
      const GridFunction rhs = pointwise_product(f, frac_laplacian(h, s)) + pointwise_product(h, lf) + r;
      product = std::max(product, inf(lhs - rhs));
    }
  }
  Table t;
  t.header = {"identity", "max_residual", "threshold", "passed"};
  bool ok = true;
  auto add = [&](const std::string& name, double value, double threshold) {
    const bool pass = value < threshold;
    ok = ok && pass;
    t.rows.push_back({name, num(value), num(threshold), pass ? "1" : "0"});
    err << name << ": " << num(value) << (pass ? "" : "  FAILED") << "\n";
  };
  add("integration_by_parts", ibp, 1e-10);
  add("semigroup", semigroup, 1e-10);
  add("bessel_decomposition", bessel, 1e-10);
  if (riesz) add("riesz_round_trip", round_trip, 1e-10);
  if (dense) {
    add("kernel_equivalence", equivalence, 1e-10);
    add("product_rule", product, 1e-9);
  }
  io.emit(t);
  return ok ? kExitOk : kExitNumerical;
}

int solve_vi_cmd(const json& cfg, const Flags& flags, std::uint64_t seed, const Output& io, std::ostream& err) {
  const Grid g = parse_grid(cfg, flags);
  const Context ctx{g, parse_mask(cfg, g), seed};
  const double s = parse_s(cfg, flags);
  const VIProblem problem{s, *ctx.mask, field(require(cfg, "f", ""), ctx, "f"),
                          field(require(cfg, "obstacle", ""), ctx, "obstacle")};
  problem.validate();
  const VIOptions opts = parse_vi(cfg, flags);

  const VISolution sol = solve_vi(problem, opts);
  Table summary;
  summary.header = {"iterations", "converged", "restarts", "primal_violation", "dual_violation",
                    "complementarity_gap", "energy"};
  summary.rows.push_back({std::to_string(sol.iterations), sol.converged ? "1" : "0", std::to_string(sol.restarts),
                          num(sol.primal_violation), num(sol.dual_violation), num(sol.complementarity_gap),
                          num(sol.energy)});
  const GridFunction r = contact_multiplier(sol.u, problem.f, problem.mask, s);
  io.emit(summary);
  io.emit_beside(".fields.csv", node_table(g, {{"u", &sol.u}, {"obstacle", &problem.obstacle}, {"multiplier", &r}}));
  if (!sol.converged) err << "solve-vi: not converged after " << sol.iterations << " iterations\n";
  return sol.converged ? kExitOk : kExitNumerical;
}

int dual_norm_cmd(const json& cfg, const Flags& flags, std::uint64_t seed, const Output& io, std::ostream& err) {
  const Grid g = parse_grid(cfg, flags);
  const Context ctx{g, parse_mask(cfg, g), seed};
  const double s = parse_s(cfg, flags);
  const double q = number(cfg, "q", "");
  if (!(q > 1.0 && q <= 2.0)) bad_field("q", "must lie in (1, 2]");
  const GridFunction h = field(require(cfg, "h", ""), ctx, "h");
  DualNormOptions opts = parse_dual(cfg);
  if (flags.tol) opts.tol = *flags.tol;

  DualNormResult res = q == 2.0 ? DualNormResult{dual_norm_2(h, *ctx.mask, s), GridFunction(g), 0, 0.0, true}
                                 : dual_norm_q(h, *ctx.mask, s, q, opts);
  Table t;
  t.header = {"q", "value", "iterations", "certificate_gap", "certified"};
  t.rows.push_back({num(q), num(res.value), std::to_string(res.iterations), num(res.certificate_gap),
                    res.certified ? "1" : "0"});
  io.emit(t);
  if (!res.certified) err << "dual-norm: certificate not reached (gap " << num(res.certificate_gap) << ")\n";
  return res.certified ? kExitOk : kExitNumerical;
}

void report_trend(std::ostream& err, const std::string& name, const TrendSummary& t) {
  err << name << ": endpoint_ratio=" << num(t.endpoint_ratio) << " spearman=" << num(t.spearman) << "\n";
}

int mosco_cmd(const json& cfg, const Flags& flags, std::uint64_t seed, const Output& io, std::ostream& err) {
  const Grid g = parse_grid(cfg, flags);
  const Context ctx{g, parse_mask(cfg, g), seed};
  const double s = parse_s(cfg, flags);
  const double q = number(cfg, "q", "");
  if (!(q > 2.0)) bad_field("q", "must be > 2");
  const GridFunction f = field(require(cfg, "f", ""), ctx, "f");
  const ObstacleSequenceSpec spec = parse_sequence(cfg, ctx, s);
  const ExperimentOptions opts = parse_experiment(cfg, flags, seed);

  const MoscoSweepReport rep = run_mosco_sweep(f, spec, *ctx.mask, s, q, opts);
  Table t;
  t.header = {"n", "seminorm_error", "dual_distance", "obstacle_seminorm", "recovery_residual", "shifted_recovery",
              "feasibility_violation", "iterations", "converged"};
  bool ok = true;
  for (const auto& r : rep.rows) {
    ok = ok && r.converged;
    t.rows.push_back({std::to_string(r.n), num(r.seminorm_error), num(r.dual_distance), num(r.obstacle_seminorm),
                      num(r.recovery_residual), num(r.shifted_recovery), num(r.feasibility_violation),
                      std::to_string(r.iterations), r.converged ? "1" : "0"});
  }
  io.emit(t);
  report_trend(err, "seminorm_error", rep.seminorm_trend);
  report_trend(err, "dual_distance", rep.dual_trend);
  report_trend(err, "recovery_residual", rep.recovery_trend);
  err << "condition_two_violation: " << num(rep.condition_two_violation) << "\n";
  return ok ? kExitOk : kExitNumerical;
}

int cone_cmd(const json& cfg, const Flags& flags, std::uint64_t seed, const Output& io, std::ostream& err) {
  const Grid g = parse_grid(cfg, flags);
  const Context ctx{g, parse_mask(cfg, g), seed};
  const double s = parse_s(cfg, flags);
  const double q = number(cfg, "q", "");
  if (!(q > 1.0 && q < 2.0)) bad_field("q", "must lie in (1, 2)");
  const GridFunction f = field(require(cfg, "f", ""), ctx, "f");
  const ObstacleSequenceSpec spec = parse_sequence(cfg, ctx, s);
  const ExperimentOptions opts = parse_experiment(cfg, flags, seed);

  const ConeCompactnessReport rep = run_cone_compactness(f, spec, *ctx.mask, s, q, opts);
  Table t;
  t.header = {"n", "dual_distance", "dual2_distance", "min_mollified", "max_mollified"};
  witness_columns(t, std::size_t(opts.witnesses));
  t.header.insert(t.header.end(), {"iterations", "converged"});
  bool ok = true;
  for (const auto& r : rep.rows) {
    ok = ok && r.converged;
    std::vector<std::string> row{std::to_string(r.n), num(r.dual_distance), num(r.dual2_distance),
                                 num(r.min_mollified), num(r.max_mollified)};
    for (double w : r.witness) row.push_back(num(w));
    row.push_back(std::to_string(r.iterations));
    row.push_back(r.converged ? "1" : "0");
    t.rows.push_back(std::move(row));
  }
  io.emit(t);
  report_trend(err, "dual_distance", rep.dual_trend);
  report_trend(err, "dual2_distance", rep.dual2_trend);
  return ok ? kExitOk : kExitNumerical;
}

int counterexample_cmd(const json& cfg, const Flags& flags, std::uint64_t seed, const Output& io, std::ostream& err) {
  const Grid g = parse_grid(cfg, flags);
  const Context ctx{g, parse_mask(cfg, g), seed};
  const double s = parse_s(cfg, flags);
  const double q = number(cfg, "q", "");
  if (!(q > 1.0 && q < 2.0)) bad_field("q", "must lie in (1, 2)");
  const int n_max = integer(cfg, "n_max", "", 32);
  const GridFunction envelope = field(require(cfg, "envelope", ""), ctx, "envelope");
  const ExperimentOptions opts = parse_experiment(cfg, flags, seed);

  const CounterexampleReport rep = run_counterexample(n_max, s, q, *ctx.mask, envelope, opts);
  Table t;
  t.header = {"n", "l2_norm", "dual_q", "dual_2", "min_mollified", "max_mollified"};
  witness_columns(t, std::size_t(opts.witnesses));
  for (const auto& r : rep.rows) {
    std::vector<std::string> row{std::to_string(r.n), num(r.l2_norm),       num(r.dual_q),
                                 num(r.dual_2),       num(r.min_mollified), num(r.max_mollified)};
    for (double w : r.witness) row.push_back(num(w));
    t.rows.push_back(std::move(row));
  }
  io.emit(t);
  err << "min_dual_q_ratio: " << num(rep.min_dual_q_ratio) << "\nmin_dual_2_ratio: " << num(rep.min_dual_2_ratio)
      << "\nmax_witness_ratio: " << num(rep.max_witness_ratio) << "\n";
  return kExitOk;
}

int qvi_cmd(const json& cfg, const Flags& flags, std::uint64_t seed, const Output& io, std::ostream& err) {
  const Grid g = parse_grid(cfg, flags);
  const Context ctx{g, parse_mask(cfg, g), seed};
  const double s = parse_s(cfg, flags);
  const GridFunction f = field(require(cfg, "f", ""), ctx, "f");
  const json& m = require(cfg, "map", "");
  const ObstacleMapSpec spec{number(m, "mollifier_width", "map"), number(m, "shift", "map"),
                             field(require(m, "envelope", "map"), ctx, "map.envelope")};
  spec.validate(*ctx.mask);
  QVIOptions opts;
  opts.vi = parse_vi(cfg, Flags{});
  if (const json* o = find(cfg, "qvi")) {
    opts.outer_tol = number(*o, "outer_tol", "qvi", opts.outer_tol);
    opts.outer_max = integer(*o, "outer_max", "qvi", opts.outer_max);
    opts.damping = number(*o, "damping", "qvi", opts.damping);
  }
  if (flags.tol) opts.outer_tol = *flags.tol;
  if (!(opts.outer_tol > 0.0)) bad_field("qvi.outer_tol", "must be positive");
  if (opts.outer_max < 1) bad_field("qvi.outer_max", "must be >= 1");
  if (!(opts.damping > 0.0 && opts.damping <= 1.0)) bad_field("qvi.damping", "must lie in (0, 1]");

  const QVIResult res = solve_qvi(f, spec, *ctx.mask, s, opts);
  Table t;
  t.header = {"k", "residual", "seminorm"};
  for (std::size_t k = 0; k < res.residual_trace.size(); ++k) {
    t.rows.push_back({std::to_string(k + 1), num(res.residual_trace[k]), num(res.seminorm_trace[k])});
  }
  const GridFunction phi = apply_obstacle_map(res.u, spec, *ctx.mask);
  io.emit(t);
  io.emit_beside(".fields.csv", node_table(g, {{"u", &res.u}, {"obstacle", &phi}}));
  if (!res.converged) err << "qvi: fixed-point residual stagnated after " << res.outer_iterations << " steps\n";
  return res.converged ? kExitOk : kExitNumerical;
}

using Handler = int (*)(const json&, const Flags&, std::uint64_t, const Output&, std::ostream&);

struct Command {
  const char* name;
  const char* help;
  Handler handler;
};

constexpr Command kCommands[] = {
    {"check-ops", "operator identity residuals on random fields", check_ops},
    {"solve-vi", "fractional obstacle problem", solve_vi_cmd},
    {"dual-norm", "dual Sobolev norm of a field", dual_norm_cmd},
    {"mosco-sweep", "solution stability under perturbed obstacles", mosco_cmd},
    {"cone-compactness", "strong dual convergence of obstacle multipliers", cone_cmd},
    {"counterexample", "oscillating sign-changing sequence", counterexample_cmd},
    {"qvi", "quasi-variational inequality by fixed-point iteration", qvi_cmd},
};

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config '" + path + "'");
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config '" + path + "' is not valid JSON: " + e.what());
  }
  if (!cfg.is_object()) throw ValidationError("config '" + path + "' must hold a JSON object");
  return cfg;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fractional Sobolev toolkit"};
  app.name("fracsob");
  app.require_subcommand(1);
  app.fallthrough();
  Flags flags;
  app.add_option("--config", flags.config, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", flags.seed, "64-bit random seed");
  app.add_option("--out", flags.out, "CSV output path (default: standard output)");
  app.add_option("--threads", flags.threads, "worker threads, 0 = auto");
  app.add_option("--tol", flags.tol, "solver tolerance");
  app.add_option("--grid", flags.grid, "grid shorthand dim:L:M");
  app.add_option("--s", flags.s, "operator order");
  const Command* chosen = nullptr;
  for (const Command& c : kCommands) {
    app.add_subcommand(c.name, c.help)->callback([&chosen, &c] { chosen = &c; });
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitInvalid;
  }

  try {
    json cfg = load_config(flags.config);
    std::uint64_t seed = flags.seed ? *flags.seed : 0;
    if (!flags.seed) {
      if (const json* v = find(cfg, "seed")) {
        if (!v->is_number_unsigned()) bad_field("seed", "must be a nonnegative integer");
        seed = v->get<std::uint64_t>();
      }
    }
    json canonical = cfg;
    canonical["command"] = chosen->name;
    canonical["seed"] = seed;
    if (flags.tol) canonical["tol"] = *flags.tol;
    if (!flags.grid.empty()) canonical["grid"] = flags.grid;
    if (flags.s) canonical["s"] = *flags.s;
    canonical.erase("threads");
    const Output io{flags.out, fnv1a_hex(canonical.dump()), out};
    return chosen->handler(cfg, flags, seed, io, err);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace fracsob::cli
