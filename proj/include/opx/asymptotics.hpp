#pragma once
#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <utility>

#include "opx/airy.hpp"
#include "opx/equilibrium.hpp"

namespace opx {

using Mat2 = Eigen::Matrix2cd;

struct AsymptoticContext {
  std::shared_ptr<const EquilibriumMeasure> eq;
  int n = 0, N = 0;
  double delta = 0;        // half-width of the lens and of the squares
  double lambda_edge = 0;  // edge scale: z = beta + (lambda n)^{-2/3} zeta
  double w_beta = 0;
  double delta_n = 0;      // n^{-1/3} log n
  double hbp = 0;          // h_beta'(beta) < 0
  double hap = 0;          // h_alpha'(alpha) > 0

  static AsymptoticContext make(std::shared_ptr<const EquilibriumMeasure> eq, int n, int N,
                                double delta = -1);
  double alpha() const { return eq->alpha(); }
  double beta() const { return eq->beta(); }
  double c() const { return eq->c(); }
};

// A11 = a11 * exp(log_scale), A21 = a21 * exp(log_scale).
struct PolyPairEval {
  cplx a11, a21;
  double log_scale = 0;
};

struct DerivEval {
  cplx d_a11, d_a21;
  double log_scale = 0;
};

cplx gamma_fn(const AsymptoticContext& ctx, cplx z, Side side = Side::automatic);
cplx amp_a(const AsymptoticContext& ctx, cplx z);         // a(z)
cplx phase_arcsin(const AsymptoticContext& ctx, cplx z);  // arcsin((2z-a-b)/(b-a))
cplx u_beta(const AsymptoticContext& ctx, cplx z);
cplx u_alpha(const AsymptoticContext& ctx, cplx z);

// Airy matrix M(u) with xi = (3n/4)^{2/3} u; sector from arg(u).
Mat2 airy_matrix_m(int n, cplx u);
Mat2 outer_parametrix(const AsymptoticContext& ctx, cplx z);
// D-hat: outer formula outside S_alpha, S_beta, Airy-built inside. The sign of
// Im z (including a signed zero) picks the side on the real axis.
Mat2 model_parametrix(const AsymptoticContext& ctx, cplx z);
bool in_square_beta(const AsymptoticContext& ctx, cplx z);
bool in_square_alpha(const AsymptoticContext& ctx, cplx z);

std::pair<double, double> kappa_asymptotic(const AsymptoticContext& ctx);

PolyPairEval bulk_axis(const AsymptoticContext& ctx, double x);
PolyPairEval bulk_upper(const AsymptoticContext& ctx, cplx z);
PolyPairEval edge_poly(const AsymptoticContext& ctx, cplx zeta);
DerivEval bulk_derivative_axis(const AsymptoticContext& ctx, double x);
DerivEval edge_derivative(const AsymptoticContext& ctx, double zeta);
// Same with the n^{-1/6} w^{-1} Ai' term kept (real zeta, Ai(zeta) != 0).
// Diagnostic: shows how much of the edge error is this explicit correction.
PolyPairEval edge_poly_two_term(const AsymptoticContext& ctx, double zeta);
DerivEval edge_derivative_two_term(const AsymptoticContext& ctx, double zeta);

// z = beta + (lambda n)^{-2/3} zeta
inline double edge_point(const AsymptoticContext& ctx, double zeta) {
  return ctx.beta() + std::pow(ctx.lambda_edge * ctx.n, -2.0 / 3.0) * zeta;
}

}  // namespace opx
