#include <doctest.h>

#include <Eigen/Dense>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>
#include <vector>

#include "opx/equilibrium.hpp"
#include "opx/errors.hpp"

using namespace opx;
using doctest::Approx;
constexpr double pi = std::numbers::pi;

namespace {

const EquilibriumMeasure& gue() {
  static const EquilibriumMeasure eq = EquilibriumMeasure::solve(builtin("gue"), 1.0);
  return eq;
}
const EquilibriumMeasure& c2lip() {
  static const EquilibriumMeasure eq = EquilibriumMeasure::solve(builtin("c2lip(0,1)"), 1.0);
  return eq;
}

// Minimiser of the discretised weighted energy over point masses on a
// uniform grid, by active-set solution of the KKT system. Returns ell.
double discrete_energy_ell(const ExternalField& f, double c, double lo, double hi, int m) {
  const double h = (hi - lo) / m;
  std::vector<double> x(m);
  for (int i = 0; i < m; ++i) x[i] = lo + (i + 0.5) * h;
  // L_ij = -log|x_i - x_j|; diagonal is the mean of -log|t| over the own cell
  Eigen::MatrixXd L(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) L(i, j) = i == j ? 1 - std::log(h / 2) : -std::log(std::abs(x[i] - x[j]));
  std::vector<int> act(m);
  for (int i = 0; i < m; ++i) act[i] = i;
  Eigen::VectorXd mass;
  double ell = 0;
  for (int it = 0; it < 200; ++it) {
    const int k = int(act.size());
    Eigen::MatrixXd A(k + 1, k + 1);
    Eigen::VectorXd rhs(k + 1);
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b) A(a, b) = 2 * L(act[a], act[b]);
      A(a, k) = 1;
      A(k, a) = 1;
      rhs(a) = -c * f.v(x[act[a]]);
    }
    A(k, k) = 0;
    rhs(k) = 1;
    const Eigen::VectorXd s = A.partialPivLu().solve(rhs);
    ell = s(k);  // 2 L m + c V + ell = 0 on the active set
    std::vector<int> keep;
    for (int a = 0; a < k; ++a)
      if (s(a) > 0) keep.push_back(act[a]);
    if (int(keep.size()) == k) {
      mass = s.head(k);
      break;
    }
    act = keep;
  }
  return ell;
}

}  // namespace

TEST_CASE("semicircle anchors") {
  const auto& eq = gue();
  CHECK(eq.alpha() == Approx(-std::sqrt(2.0)).epsilon(1e-12));
  CHECK(eq.beta() == Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(eq.psi(0) == Approx(0.45015816).epsilon(1e-8));
  CHECK(eq.psi(1) == Approx(1 / pi).epsilon(1e-10));
  CHECK(eq.psi(eq.beta()) == Approx(0).epsilon(1e-12));
  CHECK(eq.ell() == Approx(-1 - std::log(2.0)).epsilon(1e-10));
  CHECK(std::abs(eq.ell() - eq.ell_from_alpha()) < 1e-8);
  CHECK(eq.h(0) == Approx(2).epsilon(1e-12));
  CHECK(eq.h(5) == Approx(2).epsilon(1e-12));
  CHECK(eq.theta(0) == Approx(pi).epsilon(1e-12));
  CHECK(eq.theta(eq.beta()) == Approx(0).epsilon(1e-12));
  CHECK(eq.theta(eq.alpha()) == Approx(2 * pi).epsilon(1e-12));
  CHECK(eq.phi(2) == Approx(2 * std::sqrt(2.0) - 2 * std::log(1 + std::sqrt(2.0))).epsilon(1e-9));
  CHECK(eq.phi(eq.beta()) == Approx(0).epsilon(1e-12));
  CHECK(eq.h_beta_prime_beta() == Approx(-4.0 / 3 * std::pow(2.0, 0.75)).epsilon(1e-9));
  CHECK(eq.h_alpha_prime_alpha() == Approx(4.0 / 3 * std::pow(2.0, 0.75)).epsilon(1e-9));
}

TEST_CASE("endpoint scaling with c") {
  const auto [a, b] = solve_endpoints(builtin("gue"), 4.0, -4, 4);
  CHECK(a == Approx(-std::sqrt(0.5)).epsilon(1e-10));
  CHECK(b == Approx(std::sqrt(0.5)).epsilon(1e-10));
}

TEST_CASE("c2lip endpoints satisfy both moment conditions") {
  const auto& eq = c2lip();
  CHECK(std::abs(eq.alpha() + eq.beta()) > 1e-3);
  // independent trapezoid on the periodic integrand is spectrally accurate
  const auto f = builtin("c2lip(0,1)");
  const double m = eq.mid(), r = eq.rad();
  const int K = 20000;
  double i0 = 0, i1 = 0;
  for (int k = 0; k < K; ++k) {
    const double t = pi * (k + 0.5) / K;
    i0 += f.v1(m + r * std::cos(t)) * pi / K;
    i1 += std::cos(t) * f.v1(m + r * std::cos(t)) * pi / K;
  }
  CHECK(std::abs(i0) < 1e-6);
  CHECK(r * i1 == Approx(2 * pi).epsilon(1e-6));
}

TEST_CASE("quartic h against the closed form") {
  // V = x^4: r^4 = 4/(3c) and h(0) = 2 r^2
  const auto eq = EquilibriumMeasure::solve(builtin("quartic(0)"), 1.0);
  const double r = std::pow(4.0 / 3, 0.25);
  CHECK(eq.beta() == Approx(r).epsilon(1e-10));
  CHECK(eq.h(0) == Approx(2 * r * r).epsilon(1e-10));
  const double hb = eq.h_beta_prime_beta();
  const double fd = (eq.h_beta(eq.beta() - 1e-5) - eq.h_beta(eq.beta() - 2e-5)) / 1e-5;
  CHECK(hb < 0);
  CHECK(hb == Approx(fd).epsilon(1e-3));
}

TEST_CASE("c2lip ell against discrete energy minimisation") {
  const auto& eq = c2lip();
  const double ell = discrete_energy_ell(builtin("c2lip(0,1)"), 1.0, eq.alpha() - 0.1,
                                         eq.beta() + 0.1, 400);
  CHECK(std::abs(ell - eq.ell()) < 1e-3);
}

TEST_CASE("c2lip phi against direct log-potential quadrature") {
  const auto& eq = c2lip();
  const double x = eq.beta() + 0.5;
  boost::math::quadrature::tanh_sinh<double> ts;
  // s = m + r cos t puts the square-root zeros of psi at the ends
  auto integrand = [&](double t) {
    const double s = eq.mid() + eq.rad() * std::cos(t);
    const double p = s <= eq.alpha() || s >= eq.beta() ? 0.0 : eq.psi(s);
    return p * std::log(std::abs(x - s)) * eq.rad() * std::sin(t);
  };
  const double tk = std::acos(-eq.mid() / eq.rad());  // kink of V'' at 0
  const double logpot = ts.integrate(integrand, 0.0, tk) + ts.integrate(integrand, tk, pi);
  const double direct = eq.c() * eq.field().v(x) + eq.ell() - 2 * logpot;
  CHECK(eq.phi(x) > 0);
  CHECK(std::abs(eq.phi(x) - direct) < 1e-6);
}

TEST_CASE("g function") {
  const auto& eq = gue();
  const cplx z(1e6, 0);
  CHECK(std::abs(eq.g(z) - std::log(z)) < 2e-6);
  const cplx gp = eq.g(cplx(0, 0), Side::plus), gm = eq.g(cplx(0, 0), Side::minus);
  CHECK(std::abs(2 * gp.real() - eq.c() * eq.field().v(0) - eq.ell()) < 1e-8);
  CHECK(std::abs(gp - gm - cplx(0, pi)) < 1e-8);
  CHECK_THROWS_AS(eq.g(cplx(0.5, 0)), BranchError);
}

TEST_CASE("domain errors") {
  const auto& eq = gue();
  CHECK_THROWS_AS(eq.psi(2), DomainError);
  CHECK_THROWS_AS(eq.phi(0), DomainError);
}

TEST_CASE("conditions") {
  CHECK(gue().verify_conditions().all());
  CHECK(c2lip().verify_conditions().all());
  const ConditionReport r = c2lip().verify_conditions();
  CHECK(std::isfinite(r.psi_prime_bound));
  CHECK(r.min_interior_psi > 0);
}

TEST_CASE("psi minimises the weighted energy") {
  for (const auto* eq : {&gue(), &c2lip()}) {
    const EnergyCheck e = energy_check(*eq, 20, 7);
    CHECK(e.ok());
  }
}
