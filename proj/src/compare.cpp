#include "opx/compare.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace opx {

namespace {

constexpr double pi = std::numbers::pi;

struct OracleScaled {
  double a11, a21, d11;
};

// p_n / kappa_n, -2 pi i kappa_{n-1} p_{n-1} (imaginary part) and d/dx of the
// first, all divided by exp(ls)
OracleScaled oracle_scaled(const RecurrenceTable& t, int n, double x, double ls) {
  const PolyPairValue pv = eval_pair(t, n, x);
  const double lk = log_kappa_sq(t, n), lk1 = log_kappa_sq(t, n - 1);
  const double s11 = std::exp(pv.log_scale - 0.5 * lk - ls);
  const double s21 = std::exp(pv.log_scale + 0.5 * lk1 - ls);
  return {pv.p.real() * s11, -2 * pi * pv.p_prev.real() * s21, pv.dp.real() * s11};
}

}  // namespace

double CompareRow::rel_a11() const { return std::abs(asym_a11 - oracle_a11) / std::abs(oracle_a11); }
double CompareRow::rel_a21() const { return std::abs(asym_a21 - oracle_a21) / std::abs(oracle_a21); }
double CompareRow::rel_d() const { return std::abs(d_asym - d_oracle) / std::abs(d_oracle); }
double CompareRow::env_err() const { return std::abs(asym_a11 - oracle_a11) / envelope; }

CompareRow compare_bulk(const AsymptoticContext& ctx, const RecurrenceTable& t, double x) {
  const PolyPairEval a = bulk_axis(ctx, x);
  const DerivEval d = bulk_derivative_axis(ctx, x);
  CompareRow r;
  r.x = x;
  r.zeta = std::nan("");
  r.log_scale = a.log_scale;
  r.asym_a11 = a.a11.real();
  r.asym_a21 = a.a21.imag();
  r.d_asym = d.d_a11.real();
  r.envelope = std::abs(amp_a(ctx, x));
  const OracleScaled o = oracle_scaled(t, ctx.n, x, a.log_scale);
  r.oracle_a11 = o.a11;
  r.oracle_a21 = o.a21;
  r.d_oracle = o.d11;
  return r;
}

CompareRow compare_edge(const AsymptoticContext& ctx, const RecurrenceTable& t, double zeta) {
  const PolyPairEval a = edge_poly(ctx, zeta);
  const DerivEval d = edge_derivative(ctx, zeta);
  const double x = edge_point(ctx, zeta);
  const double dz = std::pow(ctx.lambda_edge * ctx.n, -2.0 / 3.0);  // dx / dzeta
  CompareRow r;
  r.x = x;
  r.zeta = zeta;
  r.log_scale = a.log_scale;
  r.asym_a11 = a.a11.real();
  r.asym_a21 = a.a21.imag();
  r.d_asym = d.d_a11.real();
  r.envelope = std::abs(a.a11);
  const OracleScaled o = oracle_scaled(t, ctx.n, x, a.log_scale);
  r.oracle_a11 = o.a11;
  r.oracle_a21 = o.a21;
  r.d_oracle = o.d11 * dz;
  return r;
}

PeriodError bulk_period_error(const AsymptoticContext& ctx, const RecurrenceTable& t, double x0,
                              int samples) {
  const auto& eq = *ctx.eq;
  // |cos(n theta / 2)| has local period 1 / (n psi)
  const double per = 1.0 / (ctx.n * eq.psi(x0));
  PeriodError e;
  for (int i = 0; i < samples; ++i) {
    const double x = x0 - per / 2 + per * i / (samples - 1);
    const CompareRow r = compare_bulk(ctx, t, x);
    e.value = std::max(e.value, r.env_err());
    const double dscale = r.envelope * ctx.n * pi * eq.psi(x);
    e.derivative = std::max(e.derivative, std::abs(r.d_asym - r.d_oracle) / dscale);
  }
  return e;
}

}  // namespace opx
