#include "opx/universality.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <numbers>

#include "opx/airy.hpp"
#include "opx/asymptotics.hpp"
#include "opx/errors.hpp"
#include "opx/quadrature.hpp"

namespace opx {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double kAiryCut = 12.0;

double airy_diag(double u) {
  AiryPair p = airy(u);
  double ai = p.ai.real(), aip = p.aip.real();
  return aip * aip - u * ai * ai;
}

}  // namespace

double sine_kernel_value(double u, double v) {
  double d = u - v;
  if (std::abs(d) < 1e-8) return 1 - pi * pi * d * d / 6;
  return std::sin(pi * d) / (pi * d);
}

double airy_kernel_value(double u, double v) {
  // below this separation the difference quotient loses digits; the
  // midpoint diagonal is accurate to O((u-v)^2)
  if (std::abs(u - v) < 1e-5) return airy_diag(0.5 * (u + v));
  AiryPair a = airy(u), b = airy(v);
  return (a.ai.real() * b.aip.real() - a.aip.real() * b.ai.real()) / (u - v);
}

KernelHandle sine_kernel() {
  return {KernelKind::sine, sine_kernel_value, "sin(pi d)/(pi d) -> 1 at d = 0"};
}

KernelHandle airy_kernel() {
  return {KernelKind::airy, airy_kernel_value, "Ai'(u)^2 - u Ai(u)^2 at u = v"};
}

double edge_lambda(const EquilibriumMeasure& eq) {
  return 0.75 * (-eq.h_beta_prime_beta());
}

double bulk_rescaled(const Oracle& o, const EquilibriumMeasure& eq, double a, double u, double v) {
  if (!(a > eq.alpha() && a < eq.beta())) throw DomainError("bulk point must lie in (alpha, beta)");
  const double s = o.N * eq.psi(a);
  if (!(s > 0)) throw DomainError("density vanishes at the bulk point");
  return cd_kernel(o.table, o.field, o.N, a + u / s, a + v / s) / s;
}

double edge_rescaled(const Oracle& o, const EquilibriumMeasure& eq, double u, double v) {
  const double s = std::pow(edge_lambda(eq) * o.N, -2.0 / 3);
  return s * cd_kernel(o.table, o.field, o.N, eq.beta() + u * s, eq.beta() + v * s);
}

KernelHandle finite_bulk_kernel(const Oracle& o, const EquilibriumMeasure& eq, double a) {
  if (!(a > eq.alpha() && a < eq.beta())) throw DomainError("bulk point must lie in (alpha, beta)");
  const Oracle* po = &o;
  const EquilibriumMeasure* pe = &eq;
  return {KernelKind::finite_bulk,
          [po, pe, a](double u, double v) { return bulk_rescaled(*po, *pe, a, u, v); },
          "derivative form of Christoffel-Darboux"};
}

KernelHandle finite_edge_kernel(const Oracle& o, const EquilibriumMeasure& eq) {
  const Oracle* po = &o;
  const EquilibriumMeasure* pe = &eq;
  return {KernelKind::finite_edge,
          [po, pe](double u, double v) { return edge_rescaled(*po, *pe, u, v); },
          "derivative form of Christoffel-Darboux"};
}

namespace {

double nystrom(const KernelHandle& k, double lo, double hi, int n) {
  const quad::Rule& r = quad::gauss_legendre(n);
  const double h = 0.5 * (hi - lo), c = 0.5 * (hi + lo);
  std::vector<double> x(n), sw(n);
  for (int i = 0; i < n; ++i) {
    x[i] = c + h * r.x[i];
    sw[i] = std::sqrt(h * r.w[i]);
  }
  Eigen::MatrixXd G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double v = sw[i] * k(x[i], x[j]) * sw[j];
      G(i, j) = (i == j ? 1.0 : 0.0) - v;
      G(j, i) = G(i, j);
    }
  return G.partialPivLu().determinant();
}

}  // namespace

DetResult fredholm_det(const KernelHandle& k, double lo, double hi, int quad_n, double tol) {
  if (quad_n < 2) throw ValidationError("fredholm_det needs quad_n >= 2");
  if (std::isinf(hi)) {
    if (k.kind != KernelKind::airy && k.kind != KernelKind::finite_edge)
      throw ValidationError("infinite interval only for edge kernels");
    hi = kAiryCut;
  }
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw ValidationError("interval must be finite");
  DetResult r;
  if (!(hi > lo)) return r;
  r.value = nystrom(k, lo, hi, quad_n);
  r.value_refined = nystrom(k, lo, hi, 2 * quad_n);
  r.change = std::abs(r.value - r.value_refined);
  if (!(r.change <= tol)) throw ResolutionError("Fredholm determinant not stable under doubling");
  return r;
}

double sine_sup_error(const Oracle& o, const EquilibriumMeasure& eq, double a, double r, int m) {
  double worst = 0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      double u = -r + 2 * r * i / (m - 1), v = -r + 2 * r * j / (m - 1);
      worst = std::max(worst, std::abs(bulk_rescaled(o, eq, a, u, v) - sine_kernel_value(u, v)));
    }
  return worst;
}

double airy_sup_error(const Oracle& o, const EquilibriumMeasure& eq, double r, int m) {
  double worst = 0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      double u = -r + 2 * r * i / (m - 1), v = -r + 2 * r * j / (m - 1);
      worst = std::max(worst, std::abs(edge_rescaled(o, eq, u, v) - airy_kernel_value(u, v)));
    }
  return worst;
}

GapReport gap_convergence(const ExternalField& f, double c, const std::vector<int>& Ns, double s,
                          int quad_n, double a) {
  if (std::abs(c - 1) > 1e-12) throw ValidationError("kernel universality is implemented for c = 1");
  if (!(s >= 0)) throw ValidationError("gap length must be non-negative");
  EquilibriumMeasure eq = EquilibriumMeasure::solve(f, c);
  GapReport rep;
  rep.field = f.id;
  rep.s = s;
  DetResult sine = fredholm_det(sine_kernel(), 0, s, quad_n);
  DetResult airy = fredholm_det(airy_kernel(), s, kAiryCut, quad_n);
  for (int N : Ns) {
    Oracle o = Oracle::build(f, N, N);
    GapRow row;
    row.N = N;
    DetResult fs = fredholm_det(finite_bulk_kernel(o, eq, a), 0, s, quad_n);
    DetResult fe = fredholm_det(finite_edge_kernel(o, eq), s, kAiryCut, quad_n);
    row.finite_sine_gap = fs.value_refined;
    row.sine_gap = sine.value_refined;
    row.finite_edge_law = fe.value_refined;
    row.airy_law = airy.value_refined;
    row.max_refine_change = std::max({fs.change, fe.change, sine.change, airy.change});
    rep.rows.push_back(row);
  }
  rep.sine_decreasing = rep.airy_decreasing = true;
  for (size_t i = 1; i < rep.rows.size(); ++i) {
    const auto &p = rep.rows[i - 1], &q = rep.rows[i];
    auto shrinks = [](double prev, double cur) { return cur < prev || cur <= 1e-14; };
    if (!shrinks(std::abs(p.finite_sine_gap - p.sine_gap), std::abs(q.finite_sine_gap - q.sine_gap)))
      rep.sine_decreasing = false;
    if (!shrinks(std::abs(p.finite_edge_law - p.airy_law), std::abs(q.finite_edge_law - q.airy_law)))
      rep.airy_decreasing = false;
  }
  return rep;
}

}  // namespace opx
