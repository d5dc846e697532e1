#include <doctest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "opx/airy.hpp"
#include "opx/asymptotics.hpp"
#include "opx/compare.hpp"
#include "opx/errors.hpp"
#include "opx/oracle.hpp"

using namespace opx;
using doctest::Approx;
constexpr double pi = std::numbers::pi;

namespace {

std::shared_ptr<const EquilibriumMeasure> eq_of(const char* id) {
  return std::make_shared<const EquilibriumMeasure>(EquilibriumMeasure::solve(builtin(id), 1.0));
}

// Ai(x) = (1/pi) int_0^inf cos(t^3/3 + x t) dt, rotated onto the steepest ray
// t = s e^{i pi/6} where the integrand decays like exp(-s^3/3).
double airy_contour(double x) {
  boost::math::quadrature::tanh_sinh<double> ts;
  const cplx w = std::polar(1.0, pi / 6);
  auto f = [&](double s) {
    const cplx t = s * w;
    return (std::exp(cplx(0, 1) * (t * t * t / 3.0 + x * t)) * w).real();
  };
  return ts.integrate(f, 0.0, 12.0) / pi;
}

}  // namespace

TEST_CASE("Ai at the origin and a contour-integral oracle") {
  const AiryPair a = airy(cplx(0, 0));
  CHECK(a.ai.real() == Approx(0.35502805388781723926).epsilon(1e-14));
  CHECK(a.aip.real() == Approx(-0.25881940379280679840).epsilon(1e-14));
  for (double x : {-3.0, -1.2, 0.0, 0.7, 2.5})
    CHECK(airy(cplx(x, 0)).ai.real() == Approx(airy_contour(x)).epsilon(1e-10));
}

TEST_CASE("Airy connection identity") {
  const cplx w = std::polar(1.0, 2 * pi / 3);
  for (cplx z : {cplx(1.7, 0.3), cplx(-4, 2), cplx(11, -3)}) {
    const cplx s = airy(z).ai + std::conj(w) * airy(z * std::conj(w)).ai + w * airy(z * w).ai;
    const double scale = std::max({1.0, std::abs(airy(z).ai), std::abs(airy(z * w).ai),
                                   std::abs(airy(z * std::conj(w)).ai)});
    CHECK(std::abs(s) < 1e-12 * scale);
  }
}

TEST_CASE("series and asymptotic branches agree near the switch") {
  for (double ang : {0.0, 1.0, 2.0, 3.0}) {
    const cplx z = std::polar(kAirySeriesRadius, ang);
    const AiryPair s = airy_series(z), a = airy_asymptotic(z);
    const cplx rs = s.ai * std::exp(s.log_scale - a.log_scale);
    CHECK(std::abs(rs - a.ai) <= 1e-10 * std::abs(a.ai));
  }
  const AiryPair big = airy_scaled(cplx(200, 0));
  CHECK(std::isfinite(big.log_scale));
  CHECK(big.log_scale < -1000);
}

TEST_CASE("gamma and the outer parametrix") {
  const auto ctx = AsymptoticContext::make(eq_of("gue"), 32, 32);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int i = 0; i < 50; ++i) {
    const cplx z(u(rng), u(rng));
    if (std::abs(z.imag()) < 1e-3) continue;
    const cplx g = gamma_fn(ctx, z);
    CHECK(std::abs(gamma_fn(ctx, std::conj(z)) - std::conj(g)) < 1e-13);
    CHECK(std::abs((g - 1.0 / g) * (g + 1.0 / g) - (g * g - 1.0 / (g * g))) < 1e-12);
    CHECK(std::abs(model_parametrix(ctx, z).determinant() - 1.0) < 1e-10);
  }
  const Mat2 far = outer_parametrix(ctx, cplx(1e4, 1));
  CHECK((far - Mat2::Identity()).norm() < 1e-3 * (ctx.beta() - ctx.alpha()));
}

TEST_CASE("kappa: semicircle closed form and oracle") {
  const auto eq = eq_of("gue");
  for (int n : {16, 40}) {
    const auto ctx = AsymptoticContext::make(eq, n, n);
    const auto [k1, k0] = kappa_asymptotic(ctx);
    CHECK(k1 == Approx(n * (1 + std::log(2.0)) - std::log(std::sqrt(2.0) * pi)).epsilon(1e-10));
    (void)k0;
  }
  const auto ctx = AsymptoticContext::make(eq, 40, 40);
  const Oracle o = Oracle::build(builtin("gue"), 40, 40);
  CHECK(std::abs(kappa_asymptotic(ctx).first - log_kappa_sq(o.table, 40)) < 0.02);
}

TEST_CASE("bulk leading term") {
  const auto eq = eq_of("gue");
  for (int n : {31, 32}) {
    const auto ctx = AsymptoticContext::make(eq, n, n);
    const PolyPairEval p = bulk_axis(ctx, 0.0);
    CHECK(p.a11.real() == Approx(std::sqrt(2.0) * std::cos(n * pi / 2)).epsilon(1e-12));
  }
  const auto ctx = AsymptoticContext::make(eq, 64, 64);
  const PolyPairEval ax = bulk_axis(ctx, 0.3);
  const PolyPairEval up = bulk_upper(ctx, cplx(0.3, 1e-13));
  CHECK(std::abs(up.a11 * std::exp(up.log_scale - ax.log_scale) - ax.a11) <= 1e-9 * std::abs(ax.a11));
  // complex point against the oracle
  const Oracle o = Oracle::build(builtin("gue"), 64, 64);
  const cplx z(0, 0.05);
  const PolyPairEval pz = bulk_upper(ctx, z);
  const PolyValue pv = eval_poly(o.table, 64, z);
  const cplx mon = pv.p * std::exp(pv.log_scale - 0.5 * pv.log_kappa_sq - pz.log_scale);
  CHECK(std::abs(pz.a11 - mon) <= 0.03 * std::abs(mon));
}

TEST_CASE("c2lip bulk error decreases with n") {
  const auto eq = eq_of("c2lip(0,1)");
  double prev = 1e9;
  for (int n : {12, 24, 48}) {
    const Oracle o = Oracle::build(builtin("c2lip(0,1)"), n, n);
    const auto ctx = AsymptoticContext::make(eq, n, n);
    const double e = bulk_period_error(ctx, o.table, 0.2).value;
    CHECK(e < prev);
    prev = e;
  }
}

TEST_CASE("edge anchors") {
  const auto ctx = AsymptoticContext::make(eq_of("gue"), 48, 48);
  CHECK(ctx.lambda_edge == Approx(std::pow(2.0, 0.75)).epsilon(1e-10));
  CHECK(ctx.w_beta == Approx(std::sqrt(2.0)).epsilon(1e-10));
  CHECK(edge_point(ctx, 0.0) == Approx(std::sqrt(2.0)));
}

TEST_CASE("edge formula satisfies the Airy equation") {
  const auto ctx = AsymptoticContext::make(eq_of("gue"), 48, 48);
  const double kap = std::cbrt(48.0) * ctx.c() * 2 * ctx.beta() * std::pow(ctx.lambda_edge, -2.0 / 3) / 2;
  const double h = 1e-3;
  for (double z : {-1.5, 0.0, 0.8}) {
    // remove exp(kap zeta) and the constant exponent
    auto prof = [&](double s) {
      const PolyPairEval p = edge_poly(ctx, s);
      return p.a11.real() * std::exp(p.log_scale - kap * s);
    };
    const double d2 = (prof(z + h) - 2 * prof(z) + prof(z - h)) / (h * h);
    CHECK(std::abs(d2 - z * prof(z)) < 1e-4 * std::max(1.0, std::abs(prof(z))));
  }
}

TEST_CASE("derivative parity and scaling") {
  const auto eq = eq_of("gue");
  const auto ctx = AsymptoticContext::make(eq, 32, 32);
  const DerivEval d = bulk_derivative_axis(ctx, 0.0);
  CHECK(std::abs(d.d_a11) < 1e-10);
  // sup over one local period of |A11'| / a(x) grows like n
  auto env = [&](int n) {
    const auto c = AsymptoticContext::make(eq, n, n);
    const double per = 1 / (n * eq->psi(0.3));
    double m = 0;
    for (int i = 0; i <= 40; ++i) {
      const double x = 0.3 - per / 2 + per * i / 40;
      const DerivEval dv = bulk_derivative_axis(c, x);
      const PolyPairEval p = bulk_axis(c, x);
      m = std::max(m, std::abs(dv.d_a11) * std::exp(dv.log_scale - p.log_scale) / std::abs(amp_a(c, x)));
    }
    return m;
  };
  CHECK(env(128) / env(32) == Approx(4).epsilon(0.05));
}

TEST_CASE("bulk derivative against the oracle") {
  const auto eq = eq_of("gue");
  const auto ctx = AsymptoticContext::make(eq, 48, 48);
  const Oracle o = Oracle::build(builtin("gue"), 48, 48);
  const PolyValue pv = eval_poly(o.table, 48, cplx(0.3, 0));
  const DerivEval d = bulk_derivative_axis(ctx, 0.3);
  const double mon = pv.dp.real() * std::exp(pv.log_scale - 0.5 * pv.log_kappa_sq - d.log_scale);
  CHECK(std::abs(d.d_a11.real() - mon) <= 0.05 * std::abs(mon));
}

TEST_CASE("regime checks") {
  const auto ctx = AsymptoticContext::make(eq_of("gue"), 16, 16);
  CHECK_THROWS_AS(bulk_axis(ctx, 1.5), ValidationError);
}
