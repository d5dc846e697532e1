#include "opx/equilibrium.hpp"

#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "opx/errors.hpp"
#include "opx/quadrature.hpp"

namespace opx {

namespace {

constexpr double pi = std::numbers::pi;
constexpr int kThetaNodes = 40;
constexpr int kPhiNodes = 48;

struct TrigRule {
  std::vector<double> t, w, cuts;
};

// Nodes for \int_0^pi F(m + r cos t) dt. Midpoint (Gauss-Chebyshev) rule when
// the integrand is smooth, Gauss-Legendre per piece when V'' has a kink inside.
TrigRule trig_rule(double m, double r, const std::vector<double>& bps, int M) {
  TrigRule tr;
  for (double b : bps) {
    double u = (b - m) / r;
    if (u > -1 && u < 1) tr.cuts.push_back(std::acos(u));
  }
  std::sort(tr.cuts.begin(), tr.cuts.end());
  if (tr.cuts.empty()) {
    tr.t.resize(M);
    tr.w.assign(M, pi / M);
    for (int k = 0; k < M; ++k) tr.t[k] = (k + 0.5) * pi / M;
    return tr;
  }
  std::vector<double> edges{0.0};
  edges.insert(edges.end(), tr.cuts.begin(), tr.cuts.end());
  edges.push_back(pi);
  for (size_t p = 0; p + 1 < edges.size(); ++p) {
    double a = edges[p], b = edges[p + 1];
    int n = std::max(8, static_cast<int>(std::ceil(M * (b - a) / pi)));
    const auto& gl = quad::gauss_legendre(n);
    for (int i = 0; i < n; ++i) {
      tr.t.push_back(0.5 * (a + b) + 0.5 * (b - a) * gl.x[i]);
      tr.w.push_back(0.5 * (b - a) * gl.w[i]);
    }
  }
  return tr;
}

}  // namespace

std::pair<double, double> endpoint_residuals(const ExternalField& f, double c, double alpha,
                                             double beta, int M) {
  double m = 0.5 * (alpha + beta), r = 0.5 * (beta - alpha);
  TrigRule tr = trig_rule(m, r, f.breakpoints, M);
  double f1 = 0, f2 = 0;
  for (size_t k = 0; k < tr.t.size(); ++k) {
    double ct = std::cos(tr.t[k]);
    double v1 = f.v1(m + r * ct);
    f1 += tr.w[k] * v1;
    f2 += tr.w[k] * ct * v1;
  }
  return {f1, c * r * f2 - 2 * pi};
}

std::pair<double, double> solve_endpoints(const ExternalField& f, double c, double lo,
                                          double hi, int M) {
  if (!(c > 0)) throw ValidationError("c must be positive");
  if (!(hi > lo)) throw ValidationError("bracket must satisfy lo < hi");
  if (M < 8) throw ValidationError("quad_order must be at least 8");
  double m = 0.5 * (lo + hi), r = 0.25 * (hi - lo);

  auto eval = [&](double mm, double rr, double* F, double* J) {
    TrigRule tr = trig_rule(mm, rr, f.breakpoints, M);
    double i1 = 0, ic1 = 0, i2 = 0, ic2 = 0, icc2 = 0;
    for (size_t k = 0; k < tr.t.size(); ++k) {
      double ct = std::cos(tr.t[k]), w = tr.w[k];
      double s = mm + rr * ct;
      double v1 = f.v1(s);
      i1 += w * v1;
      ic1 += w * ct * v1;
      if (J) {
        double v2 = f.v2(s);
        i2 += w * v2;
        ic2 += w * ct * v2;
        icc2 += w * ct * ct * v2;
      }
    }
    F[0] = i1;
    F[1] = c * rr * ic1 - 2 * pi;
    if (J) {
      J[0] = i2;
      J[1] = ic2;
      J[2] = c * rr * ic2;
      J[3] = c * ic1 + c * rr * icc2;
    }
  };

  double F[2], J[4];
  eval(m, r, F, J);
  double res = std::hypot(F[0], F[1]);
  for (int it = 0; it < 100; ++it) {
    if (res < 1e-13) return {m - r, m + r};
    double det = J[0] * J[3] - J[1] * J[2];
    if (!std::isfinite(det) || det == 0) throw SolverError("singular endpoint Jacobian");
    double dm = -(J[3] * F[0] - J[1] * F[1]) / det;
    double dr = -(-J[2] * F[0] + J[0] * F[1]) / det;
    double step = 1;
    int halvings = 0;
    while (r + step * dr <= 0) {
      step *= 0.5;
      if (++halvings > 60) throw SolverError("endpoint radius stays non-positive");
    }
    double Fn[2];
    double mn = m + step * dm, rn = r + step * dr;
    eval(mn, rn, Fn, nullptr);
    double resn = std::hypot(Fn[0], Fn[1]);
    while (!(resn < res) && halvings < 60) {
      step *= 0.5;
      ++halvings;
      mn = m + step * dm;
      rn = r + step * dr;
      eval(mn, rn, Fn, nullptr);
      resn = std::hypot(Fn[0], Fn[1]);
    }
    bool tiny = std::abs(step * dm) + std::abs(step * dr) < 1e-15 * (1 + std::abs(m) + r);
    m = mn;
    r = rn;
    eval(m, r, F, J);
    res = std::hypot(F[0], F[1]);
    if (tiny && res < 1e-11) return {m - r, m + r};
  }
  if (res < 1e-11) return {m - r, m + r};
  throw SolverError("endpoint Newton iteration did not converge");
}

EquilibriumMeasure EquilibriumMeasure::solve(const ExternalField& f, double c,
                                             const EquilibriumOptions& opt) {
  EquilibriumMeasure eq;
  eq.field_ = f;
  eq.c_ = c;
  eq.m_ = opt.quad_order;
  auto [a, b] = solve_endpoints(f, c, opt.bracket_lo, opt.bracket_hi, opt.quad_order);
  eq.alpha_ = a;
  eq.beta_ = b;
  TrigRule tr = trig_rule(eq.mid(), eq.rad(), f.breakpoints, opt.quad_order);
  eq.t_ = std::move(tr.t);
  eq.tw_ = std::move(tr.w);
  eq.tcuts_ = std::move(tr.cuts);
  for (double t : eq.t_) {
    eq.s_.push_back(eq.mid() + eq.rad() * std::cos(t));
    eq.v1s_.push_back(f.v1(eq.s_.back()));
  }
  // the two branches of theta meet at the midpoint only if the computed mass
  // is exactly 2 pi; rescale by the (solver-level) defect
  eq.mass_norm_ = 2 * pi / eq.theta_int(0.0, pi);
  eq.ell_ = eq.ell_at(true);
  eq.ell_alpha_ = eq.ell_at(false);
  if (std::abs(eq.ell_ - eq.ell_alpha_) > 1e-6)
    throw ResolutionError("ell disagrees between endpoints; raise quad_order");
  return eq;
}

double EquilibriumMeasure::h(double x) const {
  const double v1x = field_.v1(x);
  double s = 0;
  for (size_t k = 0; k < s_.size(); ++k) {
    double d = s_[k] - x;
    s += tw_[k] * (std::abs(d) < 1e-9 ? field_.v2(x) : (v1s_[k] - v1x) / d);
  }
  return s / pi;
}

double EquilibriumMeasure::psi(double x) const {
  if (x < alpha_ || x > beta_) throw DomainError("psi: x outside [alpha, beta]");
  double p = (x - alpha_) * (beta_ - x);
  if (p <= 0) return 0.0;
  return c_ / (2 * pi) * std::sqrt(p) * h(x);
}

double EquilibriumMeasure::psi_prime(double x) const {
  double e = 1e-5 * (beta_ - alpha_);
  double lo = std::max(alpha_, x - e), hi = std::min(beta_, x + e);
  return (psi(hi) - psi(lo)) / (hi - lo);
}

double EquilibriumMeasure::theta_int(double t0, double t1) const {
  const double m = mid(), r = rad();
  auto f = [&](double t) {
    double st = std::sin(t);
    return st * st * h(m + r * std::cos(t));
  };
  if (tcuts_.empty()) return mass_norm_ * c_ * r * r * quad::gl(f, t0, t1, kThetaNodes);
  // h has a weak singularity at a breakpoint; tanh-sinh absorbs it at the
  // piece ends where Gauss-Legendre stalls near 1e-10
  static thread_local boost::math::quadrature::tanh_sinh<double> ts;
  double s = 0, lo = t0;
  for (double c : tcuts_) {
    if (c > lo && c < t1) {
      s += ts.integrate(f, lo, c, 1e-15);
      lo = c;
    }
  }
  s += ts.integrate(f, lo, t1, 1e-15);
  return mass_norm_ * c_ * r * r * s;
}

double EquilibriumMeasure::theta(double x) const {
  if (x < alpha_ || x > beta_) throw DomainError("theta: x outside [alpha, beta]");
  if (x == beta_) return 0.0;
  if (x == alpha_) return 2 * pi;
  double u = std::clamp((x - mid()) / rad(), -1.0, 1.0);
  double tx = std::acos(u);
  if (tx > 0.5 * pi) return 2 * pi - theta_int(tx, pi);
  return theta_int(0.0, tx);
}

double EquilibriumMeasure::theta_complement(double x) const {
  if (x < alpha_ || x > beta_) throw DomainError("theta: x outside [alpha, beta]");
  if (x == alpha_) return 0.0;
  double u = std::clamp((x - mid()) / rad(), -1.0, 1.0);
  double tx = std::acos(u);
  if (tx <= 0.5 * pi) return 2 * pi - theta_int(0.0, tx);
  return theta_int(tx, pi);
}

double EquilibriumMeasure::phi(double x) const {
  if (x > alpha_ && x < beta_) throw DomainError("phi: x strictly inside (alpha, beta)");
  if (x == alpha_ || x == beta_) return 0.0;
  std::vector<double> ucuts;
  if (x > beta_) {
    const double d = x - beta_;
    for (double b : field_.breakpoints)
      if (b > beta_ && b < x) ucuts.push_back(std::sqrt((b - beta_) / d));
    std::sort(ucuts.begin(), ucuts.end());
    auto f = [&](double u) {
      double s = beta_ + d * u * u;
      return u * u * std::sqrt(s - alpha_) * h(s);
    };
    return 2 * c_ * d * std::sqrt(d) * quad::gl_split(f, 0.0, 1.0, ucuts, kPhiNodes);
  }
  const double d = alpha_ - x;
  for (double b : field_.breakpoints)
    if (b < alpha_ && b > x) ucuts.push_back(std::sqrt((alpha_ - b) / d));
  std::sort(ucuts.begin(), ucuts.end());
  auto f = [&](double u) {
    double s = alpha_ - d * u * u;
    return u * u * std::sqrt(beta_ - s) * h(s);
  };
  return 2 * c_ * d * std::sqrt(d) * quad::gl_split(f, 0.0, 1.0, ucuts, kPhiNodes);
}

double EquilibriumMeasure::h_alpha(double x) const {
  if (!(x < beta_)) throw DomainError("h_alpha defined on (-inf, beta)");
  if (x == alpha_) return 0.0;
  if (x < alpha_) return -phi(x) / std::sqrt(alpha_ - x);
  return theta_complement(x) / std::sqrt(x - alpha_);
}

double EquilibriumMeasure::h_beta(double x) const {
  if (!(x > alpha_)) throw DomainError("h_beta defined on (alpha, inf)");
  if (x == beta_) return 0.0;
  if (x > beta_) return -phi(x) / std::sqrt(x - beta_);
  return theta(x) / std::sqrt(beta_ - x);
}

std::pair<double, double> EquilibriumMeasure::h_endpoint(double x) const {
  double ha = x < beta_ ? h_alpha(x) : std::nan("");
  double hb = x > alpha_ ? h_beta(x) : std::nan("");
  return {ha, hb};
}

double EquilibriumMeasure::h_beta_prime_beta() const {
  double v = -(2 * c_ * std::sqrt(beta_ - alpha_) / 3) * h(beta_);
  if (!(v < 0)) throw ConditionError("h_beta'(beta) is not negative");
  return v;
}

double EquilibriumMeasure::h_alpha_prime_alpha() const {
  double v = (2 * c_ * std::sqrt(beta_ - alpha_) / 3) * h(alpha_);
  if (!(v > 0)) throw ConditionError("h_alpha'(alpha) is not positive");
  return v;
}

double EquilibriumMeasure::h_beta_prime(double x) const { return h_beta_pair(x).second; }

double EquilibriumMeasure::h_alpha_prime(double x) const { return h_alpha_pair(x).second; }

std::pair<double, double> EquilibriumMeasure::h_beta_pair(double x) const {
  if (!(x > alpha_)) throw DomainError("h_beta defined on (alpha, inf)");
  if (x == beta_) return {0.0, h_beta_prime_beta()};
  double hb = h_beta(x);
  return {hb, -c_ * std::sqrt(x - alpha_) * h(x) - hb / (2 * (x - beta_))};
}

std::pair<double, double> EquilibriumMeasure::h_alpha_pair(double x) const {
  if (!(x < beta_)) throw DomainError("h_alpha defined on (-inf, beta)");
  if (x == alpha_) return {0.0, h_alpha_prime_alpha()};
  double ha = h_alpha(x);
  return {ha, c_ * std::sqrt(beta_ - x) * h(x) - ha / (2 * (x - alpha_))};
}

double EquilibriumMeasure::ell_at(bool at_beta) const {
  // 2 \int log|e - s| psi ds - c V(e) with s = m + r cos t; the distance is
  // 2 r sin^2(t/2) at beta and 2 r cos^2(t/2) at alpha
  const double m = mid(), r = rad();
  auto f = [&](double t) {
    double st = std::sin(t);
    if (st == 0) return 0.0;
    double half = at_beta ? std::sin(0.5 * t) : std::cos(0.5 * t);
    double lg = std::log(2 * r) + 2 * std::log(half);
    return lg * st * st * h(m + r * std::cos(t));
  };
  boost::math::quadrature::tanh_sinh<double> ts;
  std::vector<double> edges{0.0};
  edges.insert(edges.end(), tcuts_.begin(), tcuts_.end());
  edges.push_back(pi);
  double s = 0;
  for (size_t p = 0; p + 1 < edges.size(); ++p) s += ts.integrate(f, edges[p], edges[p + 1], 1e-14);
  double integral = c_ * r * r / pi * s;
  double e = at_beta ? beta_ : alpha_;
  return integral - c_ * field_.v(e);
}

cplx EquilibriumMeasure::g(cplx z, Side side) const {
  const double m = mid(), r = rad();
  const double x = z.real();
  const bool on_axis = z.imag() == 0.0;
  if (on_axis && x <= beta_ && side == Side::automatic)
    throw BranchError("g: z on the branch cut needs a side");
  const double pref = c_ * r * r / (2 * pi);
  std::vector<double> edges{0.0};
  edges.insert(edges.end(), tcuts_.begin(), tcuts_.end());
  double tx = -1;
  if (x > alpha_ && x < beta_) tx = std::acos(std::clamp((x - m) / r, -1.0, 1.0));
  if (tx > 0) edges.push_back(tx);
  edges.push_back(pi);
  std::sort(edges.begin(), edges.end());

  if (on_axis) {
    // real part: \int log|x - s| psi; imaginary part: +-pi * mass right of x
    auto f = [&](double t) {
      double st = std::sin(t);
      if (st == 0) return 0.0;
      double d = std::abs(x - m - r * std::cos(t));
      if (d == 0) return 0.0;
      return std::log(d) * st * st * h(m + r * std::cos(t));
    };
    boost::math::quadrature::tanh_sinh<double> ts;
    double re = 0;
    for (size_t p = 0; p + 1 < edges.size(); ++p)
      if (edges[p + 1] > edges[p]) re += ts.integrate(f, edges[p], edges[p + 1], 1e-13);
    re *= pref;
    double mass_right = 0;
    if (x < alpha_) mass_right = 1;
    else if (x < beta_) mass_right = theta(x) / (2 * pi);
    double sgn = side == Side::minus ? -1.0 : 1.0;
    return {re, sgn * pi * mass_right};
  }
  // near the cut the log is nearly singular at t = tx, which is a panel end;
  // tanh-sinh clusters there, Gauss-Kronrod stalls around 1e-9
  auto w = [&](double t) {
    double st = std::sin(t);
    return st * st * h(m + r * std::cos(t));
  };
  auto fr = [&](double t) { return std::log(std::abs(z - (m + r * std::cos(t)))) * w(t); };
  auto fi = [&](double t) { return std::arg(z - (m + r * std::cos(t))) * w(t); };
  boost::math::quadrature::tanh_sinh<double> ts;
  double re = 0, im = 0;
  for (size_t p = 0; p + 1 < edges.size(); ++p)
    if (edges[p + 1] > edges[p]) {
      re += ts.integrate(fr, edges[p], edges[p + 1], 1e-13);
      im += ts.integrate(fi, edges[p], edges[p + 1], 1e-13);
    }
  return pref * cplx(re, im);
}

double weighted_energy(const EquilibriumMeasure& eq, const std::function<double(double)>& density,
                       int cells) {
  if (cells < 10) throw ValidationError("weighted_energy needs at least 10 cells");
  const double a = eq.alpha(), h = (eq.beta() - a) / cells;
  std::vector<double> xm(cells), m(cells);
  double tot = 0;
  for (int i = 0; i < cells; ++i) {
    xm[i] = a + (i + 0.5) * h;
    // cell mass from a 4-point rule; density vanishes like a square root at the ends
    m[i] = quad::gl(density, a + i * h, a + (i + 1) * h, 4);
    tot += m[i];
  }
  if (!(tot > 0)) throw ValidationError("weighted_energy: density has no mass");
  for (double& v : m) v /= tot;
  double e = 0;
  for (int i = 0; i < cells; ++i) {
    // mean of log|x - y| over a cell squared is log h - 3/2
    e -= m[i] * m[i] * (std::log(h) - 1.5);
    for (int j = i + 1; j < cells; ++j) e -= 2 * m[i] * m[j] * std::log(std::abs(xm[i] - xm[j]));
    e += eq.c() * m[i] * eq.field().v(xm[i]);
  }
  return e;
}

EnergyCheck energy_check(const EquilibriumMeasure& eq, int samples, std::uint64_t seed,
                         double eps, int cells) {
  EnergyCheck r;
  auto psi = [&](double x) { return eq.psi(std::clamp(x, eq.alpha(), eq.beta())); };
  r.base = weighted_energy(eq, psi, cells);
  r.min_perturbed = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  const double a = eq.alpha(), w = eq.beta() - eq.alpha();
  for (int s = 0; s < samples; ++s) {
    double rk[4];
    for (double& v : rk) v = u(rng);
    auto pert = [&](double x) {
      double f = 1;
      for (int k = 0; k < 4; ++k) f += eps * rk[k] * std::cos((k + 1) * pi * (x - a) / w);
      return psi(x) * f;
    };
    r.min_perturbed = std::min(r.min_perturbed, weighted_energy(eq, pert, cells));
  }
  return r;
}

ConditionReport EquilibriumMeasure::verify_conditions() const {
  ConditionReport rep;
  FieldCheck fc = check_field(field_);
  rep.v2_lip = fc.v2_lip_bound;
  rep.smooth = fc.v2_lipschitz;

  const int n_in = 200, n_out = 100;
  const double w = beta_ - alpha_;
  rep.min_interior_psi = INFINITY;
  rep.psi_prime_bound = 0;
  rep.h_alpha_margin = INFINITY;
  rep.h_beta_margin = INFINITY;
  for (int i = 1; i < n_in; ++i) {
    double x = alpha_ + w * i / n_in;
    double p = psi(x);
    rep.min_interior_psi = std::min(rep.min_interior_psi, p);
    rep.psi_prime_bound =
        std::max(rep.psi_prime_bound, std::sqrt((x - alpha_) * (beta_ - x)) * std::abs(psi_prime(x)));
    rep.h_alpha_margin = std::min(rep.h_alpha_margin, h_alpha(x));
    rep.h_beta_margin = std::min(rep.h_beta_margin, h_beta(x));
  }
  rep.min_exterior_phi = INFINITY;
  for (int i = 1; i <= n_out; ++i) {
    double d = 2.0 * i / n_out;
    rep.min_exterior_phi = std::min({rep.min_exterior_phi, phi(alpha_ - d), phi(beta_ + d)});
    rep.h_alpha_margin = std::min(rep.h_alpha_margin, -h_alpha(alpha_ - d));
    rep.h_beta_margin = std::min(rep.h_beta_margin, -h_beta(beta_ + d));
  }
  rep.min_h = INFINITY;
  for (int i = 0; i <= 2 * n_out; ++i) {
    double x = alpha_ - 2 + (w + 4) * i / (2 * n_out);
    rep.min_h = std::min(rep.min_h, h(x));
  }
  const double sc = 2 * c_ * std::sqrt(w) / 3;
  rep.h_alpha_prime_alpha = sc * h(alpha_);
  rep.h_beta_prime_beta = -sc * h(beta_);
  rep.support = rep.min_interior_psi > 0 && rep.min_exterior_phi > 0;
  rep.strict = rep.h_alpha_margin > 0 && rep.h_beta_margin > 0 && rep.h_alpha_prime_alpha > 0 &&
               rep.h_beta_prime_beta < 0;
  rep.single_interval = rep.min_h > 0;
  return rep;
}

}  // namespace opx
