#include "opx/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "opx/asymptotics.hpp"
#include "opx/compare.hpp"
#include "opx/dbar_ext.hpp"
#include "opx/equilibrium.hpp"
#include "opx/errors.hpp"
#include "opx/field.hpp"
#include "opx/oracle.hpp"
#include "opx/parallel.hpp"
#include "opx/statphase.hpp"
#include "opx/universality.hpp"

namespace opx::cli {

using json = nlohmann::ordered_json;

namespace {

struct Table {
  std::vector<std::string> cols;
  std::vector<std::vector<double>> rows;
  std::string str() const {
    std::string s;
    for (size_t i = 0; i < cols.size(); ++i) s += (i ? "," : "") + cols[i];
    s += '\n';
    for (const auto& r : rows) {
      for (size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + csv_number(r[i]);
      s += '\n';
    }
    return s;
  }
};

// What a subcommand produced. The primary artifact goes to stdout; with
// --output-dir both are also written as <command>.json / <command>.csv.
struct Result {
  json report;
  std::optional<Table> table;
  bool csv_primary = false;
};

// NaN and infinities are not JSON numbers
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::shared_ptr<const EquilibriumMeasure> solve_eq(const RunConfig& cfg) {
  if (!(cfg.c > 0)) throw ValidationError("--c must be positive");
  EquilibriumOptions opt;
  opt.quad_order = cfg.quad_order;
  return std::make_shared<const EquilibriumMeasure>(
      EquilibriumMeasure::solve(builtin(cfg.field_id), cfg.c, opt));
}

int weight_N(const RunConfig& cfg, int n) {
  if (cfg.N > 0) return cfg.N;
  const double v = cfg.c * n;
  const double r = std::round(v);
  if (std::abs(v - r) > 1e-9 * std::max(1.0, v))
    throw ValidationError("c * n is not an integer; pass --bigN");
  return int(r);
}

struct GridSpec {
  double lo = 0, hi = 0;
  int count = 0;
};

GridSpec parse_grid(const std::string& s) {
  GridSpec g;
  char c1 = 0, c2 = 0;
  std::istringstream is(s);
  if (!(is >> g.lo >> c1 >> g.hi >> c2 >> g.count) || c1 != ':' || c2 != ':' || g.count < 1 ||
      !(is >> std::ws).eof())
    throw ValidationError("grid must look like lo:hi:count, got '" + s + "'");
  if (g.count > 1 && !(g.hi > g.lo)) throw ValidationError("grid needs hi > lo");
  return g;
}

double grid_at(const GridSpec& g, int i) {
  return g.count == 1 ? g.lo : g.lo + (g.hi - g.lo) * i / (g.count - 1);
}

std::pair<int, int> parse_dims(const std::string& s) {
  int a = 0, b = 0;
  char x = 0;
  std::istringstream is(s);
  if (!(is >> a >> x >> b) || (x != 'x' && x != 'X') || a < 1 || b < 1)
    throw ValidationError("expected NxM, got '" + s + "'");
  return {a, b};
}

json condition_json(const ConditionReport& r) {
  return json{{"all", r.all()},
              {"smooth", r.smooth},
              {"support", r.support},
              {"strict", r.strict},
              {"single_interval", r.single_interval},
              {"min_interior_psi", num(r.min_interior_psi)},
              {"min_exterior_phi", num(r.min_exterior_phi)},
              {"min_h", num(r.min_h)},
              {"h_alpha_margin", num(r.h_alpha_margin)},
              {"h_beta_margin", num(r.h_beta_margin)},
              {"h_alpha_prime_alpha", num(r.h_alpha_prime_alpha)},
              {"h_beta_prime_beta", num(r.h_beta_prime_beta)},
              {"psi_prime_bound", num(r.psi_prime_bound)},
              {"v2_lip", num(r.v2_lip)}};
}

// ---- subcommands ----

struct EquilibriumArgs {
  int grid = 101;
  double pad = 0.5;
  int energy_samples = 0;
};

Result run_equilibrium(const RunConfig& cfg, const EquilibriumArgs& a) {
  if (a.grid < 2) throw ValidationError("--grid must be at least 2");
  if (!(a.pad >= 0)) throw ValidationError("--pad must be non-negative");
  const auto eq = solve_eq(cfg);
  Result r;
  r.report = json{{"command", "equilibrium"},
                  {"field", cfg.field_id},
                  {"c", cfg.c},
                  {"quad_order", cfg.quad_order},
                  {"alpha", eq->alpha()},
                  {"beta", eq->beta()},
                  {"ell", eq->ell()},
                  {"ell_from_alpha", eq->ell_from_alpha()},
                  {"h_alpha_prime_alpha", eq->h_alpha_prime_alpha()},
                  {"h_beta_prime_beta", eq->h_beta_prime_beta()},
                  {"condition_report", condition_json(eq->verify_conditions())}};
  if (a.energy_samples > 0) {
    const EnergyCheck e = energy_check(*eq, a.energy_samples, cfg.seed);
    r.report["energy"] = json{{"seed", cfg.seed},
                              {"samples", a.energy_samples},
                              {"base", e.base},
                              {"min_perturbed", e.min_perturbed},
                              {"ok", e.ok()}};
  }
  Table t{{"x", "psi", "theta", "phi"}, {}};
  const double lo = eq->alpha() - a.pad, hi = eq->beta() + a.pad;
  for (int i = 0; i < a.grid; ++i) {
    const double x = lo + (hi - lo) * i / (a.grid - 1);
    const bool in = x >= eq->alpha() && x <= eq->beta();
    const double psi = in ? eq->psi(x) : 0.0;
    const double th = in ? eq->theta(x) : (x < eq->alpha() ? 2 * std::numbers::pi : 0.0);
    const double ph = in ? 0.0 : eq->phi(x);
    t.rows.push_back({x, psi, th, ph});
  }
  r.table = std::move(t);
  return r;
}

struct PolyArgs {
  std::string where = "bulk";
  std::string grid;
};

Result run_poly(const RunConfig& cfg, const PolyArgs& a) {
  if (cfg.n < 1) throw ValidationError("--n must be at least 1");
  if (a.where != "bulk" && a.where != "edge") throw ValidationError("--where must be bulk or edge");
  const auto eq = solve_eq(cfg);
  const auto ctx = AsymptoticContext::make(eq, cfg.n, weight_N(cfg, cfg.n), cfg.delta);
  const bool bulk = a.where == "bulk";
  const GridSpec g = a.grid.empty()
                         ? (bulk ? GridSpec{ctx.alpha() + ctx.delta, ctx.beta() - ctx.delta, 41}
                                 : GridSpec{-2, 1, 31})
                         : parse_grid(a.grid);
  Result r;
  r.csv_primary = true;
  Table t{{bulk ? "x" : "zeta", "re_a11", "im_a11", "re_a21", "im_a21", "log_scale"}, {}};
  for (int i = 0; i < g.count; ++i) {
    const double s = grid_at(g, i);
    const PolyPairEval p = bulk ? bulk_axis(ctx, s) : edge_poly(ctx, s);
    t.rows.push_back({s, p.a11.real(), p.a11.imag(), p.a21.real(), p.a21.imag(), p.log_scale});
  }
  r.report = json{{"command", "poly"},     {"field", cfg.field_id},    {"c", cfg.c},
                  {"n", ctx.n},            {"N", ctx.N},               {"where", a.where},
                  {"delta", ctx.delta},    {"lambda", ctx.lambda_edge}, {"w_beta", ctx.w_beta},
                  {"delta_n", ctx.delta_n}, {"points", g.count}};
  r.table = std::move(t);
  return r;
}

struct OracleArgs {
  int n_max = 0;
  int nodes_per_unit = 40;
};

Result run_oracle(const RunConfig& cfg, const OracleArgs& a) {
  if (cfg.N < 1) throw ValidationError("--bigN must be at least 1");
  if (a.n_max < 1) throw ValidationError("--nmax must be at least 1");
  const Oracle o = Oracle::build(builtin(cfg.field_id), cfg.N, a.n_max, a.nodes_per_unit);
  json lk = json::array();
  for (int k = 0; k <= a.n_max; ++k) lk.push_back(log_kappa_sq(o.table, k));
  Result r;
  r.report = json{{"command", "oracle"},
                  {"field", cfg.field_id},
                  {"N", cfg.N},
                  {"n_max", a.n_max},
                  {"nodes_per_unit", a.nodes_per_unit},
                  {"lower", o.grid.lower},
                  {"upper", o.grid.upper},
                  {"node_count", o.grid.node_count},
                  {"m0", o.table.m0},
                  {"gram_residual", gram_residual(o.grid, o.table, a.n_max)},
                  {"a", o.table.a},
                  {"b", o.table.b},
                  {"log_kappa_sq", lk}};
  Table t{{"k", "a", "b", "log_kappa_sq"}, {}};
  for (int k = 0; k < a.n_max; ++k)
    t.rows.push_back({double(k), o.table.a[k], o.table.b[k], log_kappa_sq(o.table, k)});
  r.table = std::move(t);
  return r;
}

struct CompareArgs {
  std::string n_list;
  std::string where = "bulk";
  std::string grid;
};

Result run_compare(const RunConfig& cfg, const CompareArgs& a) {
  if (a.where != "bulk" && a.where != "edge") throw ValidationError("--where must be bulk or edge");
  const std::vector<int> ns = parse_int_list(a.n_list.empty() ? std::to_string(cfg.n) : a.n_list);
  const auto eq = solve_eq(cfg);
  const auto f = builtin(cfg.field_id);
  const bool bulk = a.where == "bulk";
  Result r;
  r.csv_primary = true;
  Table t{{"n", "x", "zeta", "asym_a11", "oracle_a11", "rel_a11", "env_err", "asym_a21",
           "oracle_a21", "rel_a21", "d_asym", "d_oracle", "rel_d", "log_scale"},
          {}};
  json rows = json::array();
  for (int n : ns) {
    if (n < 2 || n > 128) throw ValidationError("compare needs 2 <= n <= 128");
    const int N = weight_N(cfg, n);
    const Oracle o = Oracle::build(f, N, n);
    const auto ctx = AsymptoticContext::make(eq, n, N, cfg.delta);
    const GridSpec g = a.grid.empty()
                           ? (bulk ? GridSpec{ctx.alpha() + ctx.delta, ctx.beta() - ctx.delta, 41}
                                   : GridSpec{-2, 1, 31})
                           : parse_grid(a.grid);
    double worst = 0;
    for (int i = 0; i < g.count; ++i) {
      const double s = grid_at(g, i);
      const CompareRow c = bulk ? compare_bulk(ctx, o.table, s) : compare_edge(ctx, o.table, s);
      worst = std::max(worst, c.env_err());
      t.rows.push_back({double(n), c.x, c.zeta, c.asym_a11, c.oracle_a11, c.rel_a11(), c.env_err(),
                        c.asym_a21, c.oracle_a21, c.rel_a21(), c.d_asym, c.d_oracle, c.rel_d(),
                        c.log_scale});
    }
    const auto [k1, k2] = kappa_asymptotic(ctx);
    rows.push_back(json{{"n", n},
                        {"N", N},
                        {"max_env_err", num(worst)},
                        {"log_kappa_sq_asym", k1},
                        {"log_kappa_sq_oracle", log_kappa_sq(o.table, n)},
                        {"log_kappa1_sq_asym", k2},
                        {"log_kappa1_sq_oracle", log_kappa_sq(o.table, n - 1)}});
  }
  r.report = json{{"command", "compare"}, {"field", cfg.field_id}, {"c", cfg.c},
                  {"where", a.where},     {"rows", rows}};
  r.table = std::move(t);
  return r;
}

struct KernelArgs {
  std::string mode = "bulk";
  double a = 0;
  double range = -1;
  int points = 21;
};

Result run_kernel(const RunConfig& cfg, const KernelArgs& a) {
  if (a.mode != "bulk" && a.mode != "edge") throw ValidationError("--mode must be bulk or edge");
  if (cfg.c != 1) throw ValidationError("kernel rescaling needs --c 1");
  if (cfg.N < 1 || cfg.N > 128) throw ValidationError("--bigN must be in [1, 128]");
  if (a.points < 2) throw ValidationError("--points must be at least 2");
  const bool bulk = a.mode == "bulk";
  const double range = a.range > 0 ? a.range : (bulk ? 2.0 : 1.0);
  const auto eq = solve_eq(cfg);
  const Oracle o = Oracle::build(builtin(cfg.field_id), cfg.N, cfg.N);
  const KernelHandle fin = bulk ? finite_bulk_kernel(o, *eq, a.a) : finite_edge_kernel(o, *eq);
  const KernelHandle lim = bulk ? sine_kernel() : airy_kernel();
  Result r;
  r.csv_primary = true;
  Table t{{"u", "v", "finite", "limit", "diff"}, {}};
  const size_t m = size_t(a.points);
  std::vector<std::array<double, 5>> vals(m * m);
  parallel_for(m * m, [&](size_t k) {
    const double u = -range + 2 * range * double(k / m) / (m - 1);
    const double v = -range + 2 * range * double(k % m) / (m - 1);
    const double fv = fin(u, v), lv = lim(u, v);
    vals[k] = {u, v, fv, lv, fv - lv};
  });
  double sup = 0;
  for (const auto& v : vals) {
    sup = std::max(sup, std::abs(v[4]));
    t.rows.push_back({v.begin(), v.end()});
  }
  r.report = json{{"command", "kernel"}, {"mode", a.mode},   {"field", cfg.field_id},
                  {"N", cfg.N},          {"a", a.a},         {"range", range},
                  {"points", a.points},  {"sup_error", sup}, {"finite_diagonal_rule", fin.diagonal_rule},
                  {"limit_diagonal_rule", lim.diagonal_rule}};
  if (!bulk) r.report["lambda"] = edge_lambda(*eq);
  r.table = std::move(t);
  return r;
}

struct GapArgs {
  std::string N_list = "20,40,60";
  double s = 1;
  int quad_n = 40;
  double a = 0;
};

Result run_gap(const RunConfig& cfg, const GapArgs& a) {
  const GapReport g =
      gap_convergence(builtin(cfg.field_id), cfg.c, parse_int_list(a.N_list), a.s, a.quad_n, a.a);
  Result r;
  json rows = json::array();
  Table t{{"N", "finite_sine_gap", "sine_gap", "finite_edge_law", "airy_law", "max_refine_change"},
          {}};
  for (const auto& w : g.rows) {
    rows.push_back(json{{"N", w.N},
                        {"finite_sine_gap", w.finite_sine_gap},
                        {"sine_gap", w.sine_gap},
                        {"sine_deviation", std::abs(w.finite_sine_gap - w.sine_gap)},
                        {"finite_edge_law", w.finite_edge_law},
                        {"airy_law", w.airy_law},
                        {"airy_deviation", std::abs(w.finite_edge_law - w.airy_law)},
                        {"max_refine_change", w.max_refine_change}});
    t.rows.push_back({double(w.N), w.finite_sine_gap, w.sine_gap, w.finite_edge_law, w.airy_law,
                      w.max_refine_change});
  }
  r.report = json{{"command", "gap"},
                  {"field", cfg.field_id},
                  {"c", cfg.c},
                  {"s", a.s},
                  {"a", a.a},
                  {"quad_n", a.quad_n},
                  {"rows", rows},
                  {"sine_decreasing", g.sine_decreasing},
                  {"airy_decreasing", g.airy_decreasing}};
  r.table = std::move(t);
  return r;
}

struct CertifyArgs {
  std::string grid = "200x50";
  int fd_stride = 4;
};

Result run_certify(const RunConfig& cfg, const CertifyArgs& a) {
  const auto [gn, gm] = parse_dims(a.grid);
  if (gn < 50 || gm < 10) throw ValidationError("--grid needs at least 50x10");
  if (a.fd_stride < 1) throw ValidationError("--fd-stride must be at least 1");
  const auto eq = solve_eq(cfg);
  const ExtensionField e = ExtensionField::make(eq, cfg.delta);
  const CertifyReport c = certify(e, gn, gm, a.fd_stride);
  Result r;
  r.report = json{{"command", "dbar-certify"},
                  {"field", cfg.field_id},
                  {"c", cfg.c},
                  {"grid", a.grid},
                  {"delta", e.delta},
                  {"glue", json::array({e.a_glue, e.b_glue})},
                  {"ok", c.ok()},
                  {"theta",
                   json{{"trace_err", c.theta_trace_err},
                        {"trace_dbar", c.theta_trace_dbar},
                        {"K_fit", num(c.theta_K_fit)},
                        {"k_fit_upper", num(c.theta_k_fit_upper)},
                        {"k_fit_lower", num(c.theta_k_fit_lower)},
                        {"diag_err", c.theta_diag_err},
                        {"G_slope", num(c.theta_G_slope)},
                        {"fd_err", c.theta_fd_err}}},
                  {"phi",
                   json{{"trace_err", c.phi_trace_err},
                        {"trace_dbar", c.phi_trace_dbar},
                        {"K_fit", num(c.phi_K_fit)},
                        {"k_fit", num(c.phi_k_fit)},
                        {"k_rect", num(c.phi_k_rect)},
                        {"diag_err", c.phi_diag_err},
                        {"H_slope", num(c.phi_H_slope)},
                        {"fd_err", c.phi_fd_err}}}};
  return r;
}

struct KnormArgs {
  std::string n_list = "16,64,256";
  int u_cells = 200, v_panels = 6, eval_points = 25;
  bool zero_w = false;
};

Result run_knorm(const RunConfig& cfg, const KnormArgs& a) {
  const auto eq = solve_eq(cfg);
  KnormGrid g{a.u_cells, a.v_panels, a.eval_points};
  const KnormReport k = knorm_estimate(eq, parse_int_list(a.n_list), g, a.zero_w);
  Result r;
  r.csv_primary = true;
  Table t{{"n", "estimate", "model", "argmax_x", "argmax_y"}, {}};
  for (const auto& w : k.rows) t.rows.push_back({double(w.n), w.estimate, w.model, w.argmax_x, w.argmax_y});
  r.report = json{{"command", "dbar-knorm"},
                  {"field", cfg.field_id},
                  {"c", cfg.c},
                  {"u_cells", a.u_cells},
                  {"v_panels", a.v_panels},
                  {"eval_points", a.eval_points},
                  {"C", num(k.C)},
                  {"residual", num(k.residual)},
                  {"monotone", k.monotone},
                  {"ratio", num(k.ratio)},
                  {"model_ratio", num(k.model_ratio)},
                  {"ratio_ok", k.ratio_ok}};
  r.table = std::move(t);
  return r;
}

struct StatArgs {
  std::string phase = "quad";
  std::string n_list = "100,1000,10000";
};

Result run_statphase(const RunConfig&, const StatArgs& a) {
  const PhaseFunction p = PhaseFunction::builtin(a.phase);
  const DecompReport d = decomposition_check(p, parse_int_list(a.n_list));
  const PhaseCertificate c = certify_phase(p);
  Result r;
  r.csv_primary = true;
  Table t{{"n", "re_I", "im_I", "re_gauss", "im_gauss", "re_seg_left", "im_seg_left", "re_seg_right",
           "im_seg_right", "re_tri_plus", "im_tri_plus", "re_tri_minus", "im_tri_minus",
           "identity_residual", "refine_change", "alt_bump_change", "scaled_leading_err",
           "slope_seg_left", "slope_seg_right", "slope_tri_plus", "slope_tri_minus"},
          {}};
  for (const auto& w : d.rows) {
    const PieceSet& s = w.pieces;
    t.rows.push_back({double(w.n), w.direct.real(), w.direct.imag(), w.gauss.real(), w.gauss.imag(),
                      s.seg_left.real(), s.seg_left.imag(), s.seg_right.real(), s.seg_right.imag(),
                      s.tri_plus.real(), s.tri_plus.imag(), s.tri_minus.real(), s.tri_minus.imag(),
                      w.residual, w.refine_change, w.alt_bump_change, w.scaled_leading_err,
                      d.slope_left, d.slope_right, d.slope_plus, d.slope_minus});
  }
  r.report = json{{"command", "statphase"},
                  {"phase", a.phase},
                  {"slopes",
                   json{{"seg_left", num(d.slope_left)},
                        {"seg_right", num(d.slope_right)},
                        {"tri_plus", num(d.slope_plus)},
                        {"tri_minus", num(d.slope_minus)}}},
                  {"slopes_ok", d.slopes_ok},
                  {"max_identity_residual", d.max_residual},
                  {"max_alt_bump_change", d.max_alt_bump_change},
                  {"max_scaled_leading_err", d.max_scaled_leading_err},
                  {"certificate",
                   json{{"trace_err", c.trace_err},
                        {"diag_err", c.diag_err},
                        {"K_fit", c.K_fit},
                        {"k_fit", c.k_fit},
                        {"fd_err", c.fd_err}}}};
  r.table = std::move(t);
  return r;
}

void emit(const std::string& name, const Result& r, const RunConfig& cfg, std::ostream& out) {
  const std::string js = r.report.dump(2) + "\n";
  if (!cfg.output_dir.empty()) {
    std::filesystem::create_directories(cfg.output_dir);
    const auto dir = std::filesystem::path(cfg.output_dir);
    std::ofstream(dir / (name + ".json"), std::ios::binary) << js;
    if (r.table) std::ofstream(dir / (name + ".csv"), std::ios::binary) << r.table->str();
  }
  if (r.csv_primary && r.table)
    out << r.table->str();
  else
    out << js;
}

}  // namespace

std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> v;
  std::istringstream is(s);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    size_t pos = 0;
    int x = 0;
    try {
      x = std::stoi(tok, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || tok.find_first_not_of(" \t", pos) != std::string::npos)
      throw ValidationError("bad integer '" + tok + "' in list '" + s + "'");
    v.push_back(x);
  }
  if (v.empty()) throw ValidationError("empty integer list");
  return v;
}

std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file '" + path + "'");
  std::vector<std::pair<std::string, std::string>> kv;
  std::string line;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r"), e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError(path + ":" + std::to_string(lineno) + ": expected key=value");
    kv.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return kv;
}

int dispatch(const std::vector<std::string>& args_in, std::ostream& out, std::ostream& err) {
  CLI::App app{"opx: equilibrium measures, orthogonal polynomial asymptotics and checks"};
  app.name("opx");
  app.require_subcommand(1);
  RunConfig cfg;
  std::string config_path;
  int nthreads = 0;
  app.add_option("--config", config_path, "flat key=value file; flags override it");
  app.add_option("--threads", nthreads, "worker threads (default: OPX_THREADS or all cores)")
      ->check(CLI::NonNegativeNumber);

  auto common = [&](CLI::App* s, bool field = true) {
    if (field) {
      s->add_option("--field", cfg.field_id, "gue, quartic(g) or c2lip(a,c0)");
      s->add_option("--c", cfg.c, "ratio N/n");
      s->add_option("--quad-order", cfg.quad_order, "trigonometric quadrature order");
    }
    s->add_option("--output-dir", cfg.output_dir, "write <command>.json / .csv here");
    s->add_option("--seed", cfg.seed, "seed for randomised checks");
  };

  EquilibriumArgs ea;
  auto* s_eq = app.add_subcommand("equilibrium", "endpoints, ell, condition report, psi/theta/phi table");
  common(s_eq);
  s_eq->add_option("--grid", ea.grid, "number of table points");
  s_eq->add_option("--pad", ea.pad, "table extends this far past each endpoint");
  s_eq->add_option("--energy-samples", ea.energy_samples, "random perturbations for the energy check");

  PolyArgs pa;
  auto* s_poly = app.add_subcommand("poly", "leading-term A11, A21 in the bulk or at the edge");
  common(s_poly);
  s_poly->add_option("--n", cfg.n, "degree")->required();
  s_poly->add_option("--bigN", cfg.N, "weight parameter (default c n)");
  s_poly->add_option("--delta", cfg.delta, "square half-width");
  s_poly->add_option("--where", pa.where, "bulk or edge");
  s_poly->add_option("--grid", pa.grid, "lo:hi:count in x (bulk) or zeta (edge)");

  OracleArgs oa;
  auto* s_or = app.add_subcommand("oracle", "Stieltjes recurrence table for exp(-N V)");
  common(s_or);
  s_or->add_option("--bigN", cfg.N, "weight parameter")->required();
  s_or->add_option("--nmax", oa.n_max, "highest degree")->required();
  s_or->add_option("--nodes-per-unit", oa.nodes_per_unit, "Gauss-Legendre density");

  CompareArgs ca;
  auto* s_cmp = app.add_subcommand("compare", "asymptotic leading terms against the oracle");
  common(s_cmp);
  s_cmp->add_option("--n", ca.n_list, "degree or comma list")->required();
  s_cmp->add_option("--bigN", cfg.N, "weight parameter (default c n)");
  s_cmp->add_option("--delta", cfg.delta, "square half-width");
  s_cmp->add_option("--where", ca.where, "bulk or edge");
  s_cmp->add_option("--grid", ca.grid, "lo:hi:count");

  KernelArgs ka;
  auto* s_k = app.add_subcommand("kernel", "rescaled finite-N kernel against the sine or Airy kernel");
  common(s_k);
  s_k->add_option("--mode", ka.mode, "bulk or edge");
  s_k->add_option("--bigN", cfg.N, "N")->required();
  s_k->add_option("--a", ka.a, "bulk centre");
  s_k->add_option("--range", ka.range, "u, v in [-range, range]");
  s_k->add_option("--points", ka.points, "grid points per axis");

  GapArgs ga;
  auto* s_gap = app.add_subcommand("gap", "Fredholm gap probabilities, finite N against the limits");
  common(s_gap);
  s_gap->add_option("--N", ga.N_list, "comma list of N");
  s_gap->add_option("--s", ga.s, "interval length / edge offset");
  s_gap->add_option("--quad-n", ga.quad_n, "Nystrom nodes (doubled for the check)");
  s_gap->add_option("--a", ga.a, "bulk centre");

  CertifyArgs da;
  auto* s_dc = app.add_subcommand("dbar-certify", "certify the Theta and Phi extensions");
  common(s_dc);
  s_dc->add_option("--grid", da.grid, "NxM samples per region");
  s_dc->add_option("--delta", cfg.delta, "strip half-height");
  s_dc->add_option("--fd-stride", da.fd_stride, "finite-difference check on every k-th sample");

  KnormArgs kn;
  auto* s_kn = app.add_subcommand("dbar-knorm", "dbar operator norm estimates against n");
  common(s_kn);
  s_kn->add_option("--n", kn.n_list, "comma list of n");
  s_kn->add_option("--u-cells", kn.u_cells, "cells along x");
  s_kn->add_option("--v-panels", kn.v_panels, "geometric panels per half-strip");
  s_kn->add_option("--eval-points", kn.eval_points, "evaluation points on the axis");
  s_kn->add_flag("--zero-w", kn.zero_w, "replace ||W|| by 0 (null check)");

  StatArgs sa;
  auto* s_sp = app.add_subcommand("statphase", "stationary-phase decomposition check");
  common(s_sp, false);
  s_sp->add_option("--phase", sa.phase, "quad or cubic");
  s_sp->add_option("--n", sa.n_list, "comma list of n");

  try {
    std::vector<std::string> args = args_in;
    // config file: insert "--key value" for keys the chosen subcommand knows
    // and the command line does not set
    for (size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
      if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
    }
    if (!config_path.empty()) {
      CLI::App* sub = nullptr;
      size_t sub_pos = 0;
      for (size_t i = 0; i < args.size() && !sub; ++i)
        for (CLI::App* s : app.get_subcommands([](CLI::App*) { return true; }))
          if (s->get_name() == args[i]) sub = s, sub_pos = i;
      if (sub) {
        auto given = [&](const std::string& flag) {
          return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
            return a == flag || a.rfind(flag + "=", 0) == 0;
          });
        };
        std::vector<std::string> pre, post;
        for (const auto& [k, v] : read_config(config_path)) {
          const std::string flag = "--" + k;
          if (given(flag)) continue;
          if (k == "threads") {
            pre.insert(pre.end(), {flag, v});
          } else if (sub->get_option_no_throw(flag)) {
            post.insert(post.end(), {flag, v});
          } else {
            bool known = false;
            for (CLI::App* s : app.get_subcommands([](CLI::App*) { return true; }))
              known = known || s->get_option_no_throw(flag) != nullptr;
            if (!known) throw ValidationError("unknown config key '" + k + "'");
          }
        }
        args.insert(args.begin() + long(sub_pos) + 1, post.begin(), post.end());
        args.insert(args.begin(), pre.begin(), pre.end());
      }
    }
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return 0;
    const auto used = app.get_subcommands();
    err << (used.empty() ? app.help() : used.front()->help());
    return 2;
  } catch (const ValidationError& e) {
    err << "opx: " << e.what() << "\n";
    return 2;
  }

  if (nthreads > 0) set_threads(nthreads);
  try {
    Result r;
    std::string name;
    if (s_eq->parsed()) name = "equilibrium", r = run_equilibrium(cfg, ea);
    else if (s_poly->parsed()) name = "poly", r = run_poly(cfg, pa);
    else if (s_or->parsed()) name = "oracle", r = run_oracle(cfg, oa);
    else if (s_cmp->parsed()) name = "compare", r = run_compare(cfg, ca);
    else if (s_k->parsed()) name = "kernel", r = run_kernel(cfg, ka);
    else if (s_gap->parsed()) name = "gap", r = run_gap(cfg, ga);
    else if (s_dc->parsed()) name = "dbar-certify", r = run_certify(cfg, da);
    else if (s_kn->parsed()) name = "dbar-knorm", r = run_knorm(cfg, kn);
    else if (s_sp->parsed()) name = "statphase", r = run_statphase(cfg, sa);
    emit(name, r, cfg, out);
  } catch (const ValidationError& e) {
    err << "opx: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    err << "opx: numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "opx: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace opx::cli
