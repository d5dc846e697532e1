#include "opx/asymptotics.hpp"

#include <cmath>
#include <numbers>

#include "opx/errors.hpp"

namespace opx {

namespace {

constexpr double pi = std::numbers::pi;
const cplx I(0, 1);

cplx cis(double a) { return std::polar(1.0, a); }

// value of Ai or Ai' times exp(e), keeping the Airy log scale inside the exponent
cplx scaled(cplx mant, double log_scale, cplx e) { return mant * std::exp(e + log_scale); }

Mat2 U_matrix() {
  Mat2 U;
  const double s = 1 / std::sqrt(2.0);
  U << s * cis(-pi / 4), s * cis(pi / 4), s * cis(pi / 4), s * cis(-pi / 4);
  return U;
}

Side side_of(cplx z) { return std::signbit(z.imag()) ? Side::minus : Side::plus; }

// M(u) diag(e^{E}, e^{-E}) with E = n u^{3/2}/2
Mat2 airy_matrix_scaled(int n, cplx u, cplx E) {
  const cplx xi = std::pow(0.75 * n, 2.0 / 3.0) * u;
  const cplx w = cis(2 * pi / 3), wb = cis(-2 * pi / 3);
  const double th = std::arg(u);
  AiryPair a0{}, ap{}, am{};
  Mat2 M;
  auto col1 = [&](const AiryPair& p, double ph_d, double ph_v) {
    M(0, 0) = cis(ph_d) * scaled(p.aip, p.log_scale, E);
    M(1, 0) = cis(ph_v) * scaled(p.ai, p.log_scale, E);
  };
  auto col2 = [&](const AiryPair& p, double ph_d, double ph_v) {
    M(0, 1) = cis(ph_d) * scaled(p.aip, p.log_scale, -E);
    M(1, 1) = cis(ph_v) * scaled(p.ai, p.log_scale, -E);
  };
  if (th > -pi / 4 && th <= 3 * pi / 4) {
    a0 = airy_scaled(xi);
    am = airy_scaled(xi * wb);
    col1(a0, -3 * pi / 4, -pi / 4);
    col2(am, 11 * pi / 12, pi / 12);
  } else if (th > 3 * pi / 4) {
    ap = airy_scaled(xi * w);
    am = airy_scaled(xi * wb);
    col1(ap, -5 * pi / 12, -7 * pi / 12);
    col2(am, 11 * pi / 12, pi / 12);
  } else if (th <= -3 * pi / 4) {
    am = airy_scaled(xi * wb);
    ap = airy_scaled(xi * w);
    col1(am, 11 * pi / 12, pi / 12);
    col2(ap, 7 * pi / 12, 5 * pi / 12);
  } else {
    a0 = airy_scaled(xi);
    ap = airy_scaled(xi * w);
    col1(a0, -3 * pi / 4, -pi / 4);
    col2(ap, 7 * pi / 12, 5 * pi / 12);
  }
  return M;
}

}  // namespace

AsymptoticContext AsymptoticContext::make(std::shared_ptr<const EquilibriumMeasure> eq, int n,
                                          int N, double delta) {
  if (!eq) throw ValidationError("asymptotic context needs an equilibrium measure");
  if (n < 1 || N < 1) throw ValidationError("n and N must be positive");
  const double c = eq->c();
  if (std::abs(static_cast<double>(N) / n - c) > 1e-9 * c)
    throw ValidationError("N/n must equal the equilibrium ratio c");
  AsymptoticContext ctx;
  ctx.eq = std::move(eq);
  ctx.n = n;
  ctx.N = N;
  const double w = ctx.beta() - ctx.alpha();
  ctx.delta = delta > 0 ? delta : w / 8;
  if (!(ctx.delta < w / 3)) throw ValidationError("delta must be below (beta-alpha)/3");
  ctx.hbp = ctx.eq->h_beta_prime_beta();
  ctx.hap = ctx.eq->h_alpha_prime_alpha();
  ctx.lambda_edge = 0.75 * (-ctx.hbp);
  ctx.w_beta = std::pow(0.75, 1.0 / 6) * std::pow(-ctx.hbp, 1.0 / 6) * std::pow(w, 0.25);
  ctx.delta_n = std::pow(n, -1.0 / 3) * std::log(static_cast<double>(n));
  return ctx;
}

cplx gamma_fn(const AsymptoticContext& ctx, cplx z, Side side) {
  const double a = ctx.alpha(), b = ctx.beta();
  if (z.imag() == 0 && z.real() >= a && z.real() <= b) {
    if (side == Side::automatic) throw BranchError("gamma: z on [alpha, beta] needs a side");
    double mag = std::pow((b - z.real()) / (z.real() - a), 0.25);
    return mag * cis(side == Side::plus ? pi / 4 : -pi / 4);
  }
  return std::sqrt(std::sqrt((z - b) / (z - a)));
}

cplx amp_a(const AsymptoticContext& ctx, cplx z) {
  const double a = ctx.alpha(), b = ctx.beta();
  return std::sqrt(b - a) / (std::pow(z - a, 0.25) * std::pow(b - z, 0.25));
}

cplx phase_arcsin(const AsymptoticContext& ctx, cplx z) {
  const double a = ctx.alpha(), b = ctx.beta();
  cplx w = (2.0 * z - (a + b)) / (b - a);
  if (w.imag() == 0 && std::abs(w.real()) <= 1) return std::asin(w.real());
  return std::asin(w);
}

cplx u_beta(const AsymptoticContext& ctx, cplx z) {
  return std::pow(-ctx.hbp, 2.0 / 3) * (z - ctx.beta());
}

cplx u_alpha(const AsymptoticContext& ctx, cplx z) {
  return std::pow(ctx.hap, 2.0 / 3) * (-(z - ctx.alpha()));
}

Mat2 airy_matrix_m(int n, cplx u) { return airy_matrix_scaled(n, u, 0.0); }

bool in_square_beta(const AsymptoticContext& ctx, cplx z) {
  return std::abs(z.real() - ctx.beta()) < ctx.delta && std::abs(z.imag()) < ctx.delta;
}
bool in_square_alpha(const AsymptoticContext& ctx, cplx z) {
  return std::abs(z.real() - ctx.alpha()) < ctx.delta && std::abs(z.imag()) < ctx.delta;
}

Mat2 outer_parametrix(const AsymptoticContext& ctx, cplx z) {
  cplx g = gamma_fn(ctx, z, side_of(z));
  cplx gi = 1.0 / g;
  Mat2 D;
  D << 0.5 * (g + gi), (g - gi) / (2.0 * I), -(g - gi) / (2.0 * I), 0.5 * (g + gi);
  return D;
}

Mat2 model_parametrix(const AsymptoticContext& ctx, cplx z) {
  const int n = ctx.n;
  if (in_square_beta(ctx, z)) {
    cplx u = u_beta(ctx, z);
    cplx E = 0.5 * n * u * std::sqrt(u);
    Mat2 M = airy_matrix_scaled(n, u, E);
    cplx g = gamma_fn(ctx, z, side_of(z));
    cplx q = std::pow(u, 0.25);
    double s = std::pow(4.0 / (3.0 * n), 1.0 / 6);
    Mat2 L = Mat2::Zero();
    L(0, 0) = s * g / q;
    L(1, 1) = q / (s * g);
    return std::sqrt(2 * pi) * U_matrix() * L * M;
  }
  if (in_square_alpha(ctx, z)) {
    cplx u = u_alpha(ctx, z);
    cplx E = 0.5 * n * u * std::sqrt(u);
    // M sigma3 diag(e^E, e^-E) = (M diag(e^E, e^-E)) sigma3
    Mat2 M = airy_matrix_scaled(n, u, E);
    M.col(1) *= -1.0;
    Mat2 s2;
    s2 << 0, -I, I, 0;
    cplx g = gamma_fn(ctx, z, side_of(z));
    cplx q = std::pow(u, 0.25);
    double s = std::pow(0.75 * n, 1.0 / 6);
    Mat2 L = Mat2::Zero();
    L(0, 0) = s * g * q;
    L(1, 1) = 1.0 / (s * g * q);
    return -std::sqrt(2 * pi) * U_matrix() * L * s2 * M;
  }
  return outer_parametrix(ctx, z);
}

std::pair<double, double> kappa_asymptotic(const AsymptoticContext& ctx) {
  const double w = ctx.beta() - ctx.alpha();
  const double nl = ctx.n * ctx.eq->ell();
  return {std::log(2 / (w * pi)) - nl, std::log(w / (8 * pi)) - nl};
}

namespace {

void check_bulk(const AsymptoticContext& ctx, double x) {
  if (x < ctx.alpha() + ctx.delta || x > ctx.beta() - ctx.delta)
    throw DomainError("bulk formula needs alpha+delta <= x <= beta-delta");
}

}  // namespace

PolyPairEval bulk_axis(const AsymptoticContext& ctx, double x) {
  check_bulk(ctx, x);
  const auto& eq = *ctx.eq;
  const int n = ctx.n;
  const double a = amp_a(ctx, x).real(), ph = phase_arcsin(ctx, x).real();
  const double th = eq.theta(x);
  PolyPairEval r;
  r.log_scale = n * (eq.c() * eq.field().v(x) + eq.ell()) / 2;
  r.a11 = a * std::cos(0.5 * (n * th - ph));
  r.a21 = -I * std::exp(-n * eq.ell()) * a * std::sin(0.5 * (n * th + ph));
  return r;
}

PolyPairEval bulk_upper(const AsymptoticContext& ctx, cplx z) {
  const double x = z.real(), y = z.imag();
  check_bulk(ctx, x);
  if (!(y > 0 && y < ctx.delta)) throw DomainError("bulk_upper needs 0 < y < delta");
  const auto& eq = *ctx.eq;
  const int n = ctx.n;
  const double ell = eq.ell();
  const cplx g = eq.g(z);
  PolyPairEval r;
  if (y > 5.0 / n) {
    const cplx a = amp_a(ctx, z), ph = phase_arcsin(ctx, z);
    r.log_scale = n * g.real();
    cplx e = std::exp(I * (n * g.imag()));
    r.a11 = 0.5 * e * a * std::exp(-I * ph / 2.0);
    r.a21 = -0.5 * e * std::exp(-n * ell) * a * std::exp(I * ph / 2.0);
    return r;
  }
  const double a = amp_a(ctx, x).real(), ph = phase_arcsin(ctx, x).real();
  const double th = eq.theta(x), thp = -2 * pi * eq.psi(x);
  r.log_scale = n * (g.real() + thp * y / 2);
  cplx e = std::exp(I * (n * (g.imag() - th / 2)));
  cplx arg = n * th + I * (n * thp * y);
  r.a11 = e * a * std::cos(0.5 * (arg - ph));
  r.a21 = -I * e * std::exp(-n * ell) * a * std::sin(0.5 * (arg + ph));
  return r;
}

namespace {

void check_edge(cplx zeta) {
  if (!(std::abs(zeta) <= 8)) throw RegimeError("edge formula needs |zeta| <= 8");
}

}  // namespace

PolyPairEval edge_poly(const AsymptoticContext& ctx, cplx zeta) {
  check_edge(zeta);
  if (zeta.imag() < 0) throw RegimeError("edge formula needs Im zeta >= 0");
  const auto& eq = *ctx.eq;
  const int n = ctx.n;
  const double b = ctx.beta(), c = eq.c();
  const double kap = std::cbrt(double(n)) * c * eq.field().v1(b) * std::pow(ctx.lambda_edge, -2.0 / 3) / 2;
  AiryPair ai = airy(zeta);
  PolyPairEval r;
  r.log_scale = n * (c * eq.field().v(b) + eq.ell()) / 2 + kap * zeta.real();
  cplx base = std::pow(n, 1.0 / 6) * std::sqrt(pi) * ctx.w_beta * ai.ai * cis(kap * zeta.imag());
  r.a11 = base;
  r.a21 = -I * std::exp(-n * eq.ell()) * base;
  return r;
}

DerivEval bulk_derivative_axis(const AsymptoticContext& ctx, double x) {
  check_bulk(ctx, x);
  const auto& eq = *ctx.eq;
  const int n = ctx.n;
  const double al = ctx.alpha(), be = ctx.beta(), c = eq.c();
  const double a = amp_a(ctx, x).real(), ph = phase_arcsin(ctx, x).real();
  const double da = a * (-0.25 / (x - al) + 0.25 / (be - x));
  const double dph = 1 / std::sqrt((x - al) * (be - x));
  const double th = eq.theta(x), dth = -2 * pi * eq.psi(x);
  const double dv = n * c * eq.field().v1(x) / 2;
  const double p1 = 0.5 * (n * th - ph), p2 = 0.5 * (n * th + ph);
  DerivEval r;
  r.log_scale = n * (c * eq.field().v(x) + eq.ell()) / 2;
  r.d_a11 = dv * a * std::cos(p1) + da * std::cos(p1) - a * std::sin(p1) * 0.5 * (n * dth - dph);
  r.d_a21 = -I * std::exp(-n * eq.ell()) *
            (dv * a * std::sin(p2) + da * std::sin(p2) + a * std::cos(p2) * 0.5 * (n * dth + dph));
  return r;
}

DerivEval edge_derivative(const AsymptoticContext& ctx, double zeta) {
  check_edge(zeta);
  const auto& eq = *ctx.eq;
  const int n = ctx.n;
  const double b = ctx.beta(), c = eq.c();
  const double kap = std::cbrt(double(n)) * c * eq.field().v1(b) * std::pow(ctx.lambda_edge, -2.0 / 3) / 2;
  AiryPair ai = airy(zeta);
  DerivEval r;
  r.log_scale = n * (c * eq.field().v(b) + eq.ell()) / 2 + kap * zeta;
  cplx base = std::pow(n, 1.0 / 6) * std::sqrt(pi) * ctx.w_beta * (kap * ai.ai + ai.aip);
  r.d_a11 = base;
  r.d_a21 = -I * std::exp(-n * eq.ell()) * base;
  return r;
}

PolyPairEval edge_poly_two_term(const AsymptoticContext& ctx, double zeta) {
  PolyPairEval r = edge_poly(ctx, zeta);
  const AiryPair ai = airy(zeta);
  const double eps = std::pow(double(ctx.n), -1.0 / 3) / (ctx.w_beta * ctx.w_beta);
  // edge_poly carries Ai(zeta) as a common factor
  r.a11 *= 1.0 - eps * ai.aip / ai.ai;
  r.a21 *= 1.0 + eps * ai.aip / ai.ai;
  return r;
}

DerivEval edge_derivative_two_term(const AsymptoticContext& ctx, double zeta) {
  check_edge(zeta);
  const auto& eq = *ctx.eq;
  const int n = ctx.n;
  const double b = ctx.beta(), c = eq.c();
  const double kap = std::cbrt(double(n)) * c * eq.field().v1(b) * std::pow(ctx.lambda_edge, -2.0 / 3) / 2;
  const double eps = std::pow(double(n), -1.0 / 3) / (ctx.w_beta * ctx.w_beta);
  const AiryPair ai = airy(zeta);
  const cplx aipp = zeta * ai.ai;
  DerivEval r;
  r.log_scale = n * (c * eq.field().v(b) + eq.ell()) / 2 + kap * zeta;
  const cplx pre = std::pow(n, 1.0 / 6) * std::sqrt(pi) * ctx.w_beta;
  r.d_a11 = pre * (kap * (ai.ai - eps * ai.aip) + ai.aip - eps * aipp);
  r.d_a21 = -I * std::exp(-n * eq.ell()) * pre * (kap * (ai.ai + eps * ai.aip) + ai.aip + eps * aipp);
  return r;
}

}  // namespace opx
