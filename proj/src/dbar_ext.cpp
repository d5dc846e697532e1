#include "opx/dbar_ext.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "opx/errors.hpp"
#include "opx/quadrature.hpp"

namespace opx {

namespace {

constexpr double pi = std::numbers::pi;
const cplx I(0, 1);

// exponent of the bump: B = (tanh(g) + 1) / 2 on (0, 1)
double bump_g(double t) { return t / (1 - t * t) - 1 / t + 2; }

double sech2(double g) {
  double e = std::exp(-2 * std::abs(g));
  return 4 * e / ((1 + e) * (1 + e));
}

struct AngBump {
  double b = 0, dx = 0, dy = 0;
};

// B(|y| / |x - e|) and its partial derivatives
AngBump ang_bump(double x, double y, double e) {
  const double d = x - e, ad = std::abs(d);
  const double t = std::abs(y) / ad;
  const double bp = bump_prime(t);
  const double sy = y > 0 ? 1.0 : (y < 0 ? -1.0 : 0.0);
  const double sd = d > 0 ? 1.0 : -1.0;
  return {bump(t), bp * (-std::abs(y) * sd / (d * d)), bp * sy / ad};
}

cplx dbar_of(double dx, double dy) { return 0.5 * (dx + I * dy); }

ExtValue blend(const AngBump& ab, cplx hol, const ExtValue& raw) {
  return {ab.b * hol + (1 - ab.b) * raw.value,
          dbar_of(ab.dx, ab.dy) * (hol - raw.value) + (1 - ab.b) * raw.dbar};
}

// Theta_beta: angular blend of the hol and Cartesian pieces around beta
ExtValue theta_beta(const ExtensionField& e, double x, double y) {
  const auto& eq = *e.eq;
  const cplx z(x, y);
  const cplx s = std::sqrt(eq.beta() - z);
  const cplx hol = -e.hbp * s * s * s;
  const AngBump ab = ang_bump(x, y, eq.beta());
  if (ab.b >= 1) return {hol, 0.0};
  if (!(x + y > eq.alpha())) throw DomainError("Theta_beta needs x + y > alpha");
  const auto [hx, dx] = eq.h_beta_pair(x);
  const auto [hxy, dxy] = eq.h_beta_pair(x + y);
  ExtValue raw{s * (hx + I * (hxy - hx)), s * 0.5 * (I - 1.0) * (dxy - dx)};
  return blend(ab, hol, raw);
}

ExtValue theta_alpha(const ExtensionField& e, double x, double y) {
  const auto& eq = *e.eq;
  const cplx z(x, y);
  const cplx s = std::sqrt(z - eq.alpha());
  const cplx hol = 2 * pi - e.hap * s * s * s;
  const AngBump ab = ang_bump(x, y, eq.alpha());
  if (ab.b >= 1) return {hol, 0.0};
  if (!(x + y < eq.beta())) throw DomainError("Theta_alpha needs x + y < beta");
  const auto [hx, dx] = eq.h_alpha_pair(x);
  const auto [hxy, dxy] = eq.h_alpha_pair(x + y);
  ExtValue raw{2 * pi - s * (hx + I * (hxy - hx)), -s * 0.5 * (I - 1.0) * (dxy - dx)};
  return blend(ab, hol, raw);
}

}  // namespace

double bump(double t) {
  if (t <= 0) return 0;
  if (t >= 1) return 1;
  return 0.5 * std::tanh(bump_g(t)) + 0.5;
}

double bump_prime(double t) {
  if (t <= 0 || t >= 1) return 0;
  const double g = bump_g(t);
  const double gp = (1 + t * t) / ((1 - t * t) * (1 - t * t)) + 1 / (t * t);
  return 0.5 * sech2(g) * gp;
}

ExtensionField ExtensionField::make(std::shared_ptr<const EquilibriumMeasure> eq, double delta) {
  if (!eq) throw ValidationError("extension needs an equilibrium measure");
  ExtensionField e;
  e.eq = std::move(eq);
  const double w = e.beta() - e.alpha();
  e.delta = delta > 0 ? delta : w / 8;
  if (!(e.delta < w / 3)) throw ValidationError("delta must be below (beta-alpha)/3");
  e.a_glue = e.alpha() + w / 3;
  e.b_glue = e.beta() - w / 3;
  e.hap = e.eq->h_alpha_prime_alpha();
  e.hbp = e.eq->h_beta_prime_beta();
  return e;
}

ExtValue theta_extension(const ExtensionField& e, double x, double y) {
  if (!(x > e.alpha() && x < e.beta() && std::abs(y) < e.delta))
    throw DomainError("theta_extension needs alpha < x < beta and |y| < delta");
  const double w = e.b_glue - e.a_glue;
  const double tg = (x - e.a_glue) / w;
  const double bg = bump(tg), bgp = bump_prime(tg) / w;
  ExtValue tb{0.0, 0.0}, ta{0.0, 0.0};
  if (bg > 0) tb = theta_beta(e, x, y);
  if (bg < 1) ta = theta_alpha(e, x, y);
  return {bg * tb.value + (1 - bg) * ta.value,
          0.5 * bgp * (tb.value - ta.value) + bg * tb.dbar + (1 - bg) * ta.dbar};
}

ExtValue phi_extension(const ExtensionField& e, double x, double y) {
  const auto& eq = *e.eq;
  const double a = eq.alpha(), b = eq.beta(), d = e.delta;
  const cplx z(x, y);
  if (x > a - 2 * d && x < a && y >= 0 && y < d) {
    const cplx s = std::sqrt(a - z);
    const cplx hol = e.hap * s * s * s;
    const AngBump ab = ang_bump(x, y, a);
    if (ab.b >= 1) return {hol, 0.0};
    const auto [hx, dx] = eq.h_alpha_pair(x);
    const auto [hxy, dxy] = eq.h_alpha_pair(x + y);
    ExtValue raw{-s * (hx + I * (hxy - hx)), -s * 0.5 * (I - 1.0) * (dxy - dx)};
    return blend(ab, hol, raw);
  }
  if (x > b && x < b + 2 * d && y <= 0 && y > -d) {
    const cplx s = std::sqrt(z - b);
    const cplx hol = -e.hbp * s * s * s;
    const AngBump ab = ang_bump(x, y, b);
    if (ab.b >= 1) return {hol, 0.0};
    const auto [hx, dx] = eq.h_beta_pair(x);
    const auto [hxy, dxy] = eq.h_beta_pair(x + y);
    ExtValue raw{-s * (hx + I * (hxy - hx)), -s * 0.5 * (I - 1.0) * (dxy - dx)};
    return blend(ab, hol, raw);
  }
  throw DomainError("phi_extension needs a point of R_alpha or R_beta");
}

namespace {

template <class F>
cplx dbar_fd(F&& f, double x, double y, double h) {
  cplx fx = (f(x + h, y) - f(x - h, y)) / (2 * h);
  cplx fy = (f(x, y + h) - f(x, y - h)) / (2 * h);
  return 0.5 * (fx + I * fy);
}

}  // namespace

cplx theta_dbar_fd(const ExtensionField& e, double x, double y, double h) {
  return dbar_fd([&](double u, double v) { return theta_extension(e, u, v).value; }, x, y, h);
}

cplx phi_dbar_fd(const ExtensionField& e, double x, double y, double h) {
  return dbar_fd([&](double u, double v) { return phi_extension(e, u, v).value; }, x, y, h);
}

bool CertifyReport::ok() const {
  auto fin = [](double v) { return std::isfinite(v); };
  return theta_trace_err <= 1e-10 && theta_trace_dbar <= 1e-10 && fin(theta_K_fit) &&
         theta_k_fit_upper > 0 && theta_k_fit_lower > 0 && theta_diag_err <= 1e-12 &&
         fin(theta_G_slope) && theta_fd_err <= 1e-6 && phi_trace_err <= 1e-10 &&
         phi_trace_dbar <= 1e-10 && fin(phi_K_fit) && phi_k_fit > 0 && phi_diag_err <= 1e-12 &&
         fin(phi_H_slope) && phi_fd_err <= 1e-6;
}

CertifyReport certify(const ExtensionField& e, int nx, int ny, int fd_stride) {
  if (nx < 50 || ny < 2) throw ValidationError("certify needs grid_n >= 50");
  const auto& eq = *e.eq;
  const double a = eq.alpha(), b = eq.beta(), d = e.delta;
  const double excl = d / 4;
  CertifyReport r;
  r.nx = nx;
  r.ny = ny;
  r.theta_k_fit_upper = r.theta_k_fit_lower = r.phi_k_fit = r.phi_k_rect =
      std::numeric_limits<double>::infinity();
  auto far = [&](cplx z) { return std::abs(z - a) >= excl && std::abs(z - b) >= excl; };
  auto kfac = [&](cplx z) { return std::sqrt(std::abs(z - a)) * std::sqrt(std::abs(z - b)); };

  // theta on the strip
  for (int i = 0; i < nx; ++i) {
    const double x = a + (b - a) * (i + 0.5) / nx;
    ExtValue t0 = theta_extension(e, x, 0.0);
    r.theta_trace_err = std::max(r.theta_trace_err, std::abs(t0.value - eq.theta(x)));
    r.theta_trace_dbar = std::max(r.theta_trace_dbar, std::abs(t0.dbar));
    for (int j = 0; j < ny; ++j) {
      const double y = -d + 2 * d * (j + 0.5) / ny;
      const cplx z(x, y);
      ExtValue t = theta_extension(e, x, y);
      r.theta_K_fit = std::max(r.theta_K_fit, std::abs(t.dbar) / (std::abs(y) * kfac(z)));
      const double k = std::abs(t.value.imag()) / std::pow(std::abs(y), 1.5);
      if (y > 0) r.theta_k_fit_upper = std::min(r.theta_k_fit_upper, t.value.imag() < 0 ? k : -k);
      if (y < 0) r.theta_k_fit_lower = std::min(r.theta_k_fit_lower, t.value.imag() > 0 ? k : -k);
      if (std::abs(x - b) < d && std::abs(y) < d) {
        cplx G = t.value / std::pow(b - z, 1.5);
        r.theta_G_slope = std::max(r.theta_G_slope, std::abs(G + e.hbp) / std::abs(z - b));
      }
      if (std::abs(x - a) < d && std::abs(y) < d) {
        cplx G = (2 * pi - t.value) / std::pow(z - a, 1.5);
        r.theta_G_slope = std::max(r.theta_G_slope, std::abs(G - e.hap) / std::abs(z - a));
      }
      if (far(z) && i % fd_stride == 0 && j % fd_stride == 0)
        r.theta_fd_err = std::max(r.theta_fd_err, std::abs(t.dbar - theta_dbar_fd(e, x, y)));
    }
  }
  // diagonals |y| = |x - endpoint| for delta/4 <= |x - endpoint| < delta
  const int nd = 50;
  for (int k = 0; k < nd; ++k) {
    const double s = excl + (d - excl) * k / nd;
    for (double sg : {1.0, -1.0}) {
      cplx zb(b - s, sg * s), za(a + s, sg * s);
      cplx Gb = theta_extension(e, zb.real(), zb.imag()).value / std::pow(b - zb, 1.5);
      cplx Ga = (2 * pi - theta_extension(e, za.real(), za.imag()).value) / std::pow(za - a, 1.5);
      r.theta_diag_err = std::max({r.theta_diag_err, std::abs(Gb + e.hbp), std::abs(Ga - e.hap)});
    }
    cplx pa(a - s, s), pb(b + s, -s);
    cplx Ha = phi_extension(e, pa.real(), pa.imag()).value / std::pow(a - pa, 1.5);
    cplx Hb = phi_extension(e, pb.real(), pb.imag()).value / std::pow(pb - b, 1.5);
    r.phi_diag_err = std::max({r.phi_diag_err, std::abs(Ha - e.hap), std::abs(Hb + e.hbp)});
  }

  // phi on R_alpha (y >= 0) and R_beta (y <= 0)
  for (int side = 0; side < 2; ++side) {
    const double ep = side == 0 ? a : b;
    for (int i = 0; i < nx; ++i) {
      const double x = side == 0 ? a - 2 * d + 2 * d * (i + 0.5) / nx : b + 2 * d * (i + 0.5) / nx;
      ExtValue p0 = phi_extension(e, x, 0.0);
      r.phi_trace_err = std::max(r.phi_trace_err, std::abs(p0.value - eq.phi(x)));
      r.phi_trace_dbar = std::max(r.phi_trace_dbar, std::abs(p0.dbar));
      for (int j = 0; j < ny; ++j) {
        const double y = (side == 0 ? 1 : -1) * d * (j + 0.5) / ny;
        const cplx z(x, y);
        ExtValue p = phi_extension(e, x, y);
        r.phi_K_fit = std::max(r.phi_K_fit, std::abs(p.dbar) / (std::abs(y) * kfac(z)));
        const double kr = p.value.real() / std::pow(std::abs(z - ep), 1.5);
        r.phi_k_rect = std::min(r.phi_k_rect, kr);
        // Re Phi changes sign above the diagonal close to the endpoint; the
        // sector |y| <= |x - e| holds Omega_alpha and Omega_beta
        if (std::abs(y) <= std::abs(x - ep)) r.phi_k_fit = std::min(r.phi_k_fit, kr);
        if (std::abs(x - ep) < d) {
          cplx H = side == 0 ? p.value / std::pow(a - z, 1.5) : p.value / std::pow(z - b, 1.5);
          double target = side == 0 ? e.hap : -e.hbp;
          r.phi_H_slope = std::max(r.phi_H_slope, std::abs(H - target) / std::abs(z - ep));
        }
        // the centred stencil must stay inside the rectangle
        if (far(z) && std::abs(y) > 1e-5 && i % fd_stride == 0 && j % fd_stride == 0)
          r.phi_fd_err = std::max(r.phi_fd_err, std::abs(p.dbar - phi_dbar_fd(e, x, y)));
      }
    }
  }
  return r;
}

WRegion w_region(const ExtensionField& e, double x, double y) {
  const double a = e.alpha(), b = e.beta(), d = e.delta;
  if (x > a && x < b && y != 0) {
    double top = std::min({d, x - a, b - x});
    if (y > 0 && y < top) return WRegion::omega_plus;
    if (y < 0 && -y < top) return WRegion::omega_minus;
    return WRegion::none;
  }
  if (x > a - 2 * d && x < a && y > 0 && y < std::min(x - (a - 2 * d), a - x))
    return WRegion::omega_alpha;
  if (x > b && x < b + 2 * d && y < 0 && -y < std::min(x - b, b + 2 * d - x))
    return WRegion::omega_beta;
  return WRegion::none;
}

namespace {

ExtValue region_value(const ExtensionField& e, WRegion reg, double x, double y) {
  switch (reg) {
    case WRegion::omega_plus:
    case WRegion::omega_minus:
      return theta_extension(e, x, y);
    case WRegion::omega_alpha:
    case WRegion::omega_beta:
      return phi_extension(e, x, y);
    default:
      return {0.0, 0.0};
  }
}

Mat2 w0_from(WRegion reg, const ExtValue& v, int n) {
  Mat2 w = Mat2::Zero();
  switch (reg) {
    case WRegion::omega_plus:
      w(1, 0) = I * double(n) * std::exp(-I * double(n) * v.value) * v.dbar;
      break;
    case WRegion::omega_minus:
      w(1, 0) = I * double(n) * std::exp(I * double(n) * v.value) * v.dbar;
      break;
    case WRegion::omega_alpha:
      w(0, 1) = double(n) * std::exp(-double(n) * v.value) * v.dbar;
      break;
    case WRegion::omega_beta:
      w(0, 1) = -double(n) * std::exp(-double(n) * v.value) * v.dbar;
      break;
    default:
      break;
  }
  return w;
}

WPair w_from(WRegion reg, const ExtValue& v, const AsymptoticContext& ctx, double x, double y) {
  WPair p;
  p.region = reg;
  if (reg == WRegion::none) return p;
  p.w0 = w0_from(reg, v, ctx.n);
  Mat2 D = model_parametrix(ctx, cplx(x, y));
  p.w = D * p.w0 * D.inverse();
  return p;
}

}  // namespace

WPair w_matrices(const ExtensionField& e, const AsymptoticContext& ctx, double x, double y) {
  WRegion reg = w_region(e, x, y);
  return w_from(reg, region_value(e, reg, x, y), ctx, x, y);
}

KnormReport knorm_estimate(std::shared_ptr<const EquilibriumMeasure> eq,
                           const std::vector<int>& n_list, const KnormGrid& grid, bool zero_w) {
  if (n_list.empty()) throw ValidationError("knorm needs at least one n");
  if (grid.u_cells < 10 || grid.u_cells > 200 || grid.v_panels < 1 || grid.v_panels * 5 > 30 ||
      grid.eval_points < 1 || grid.eval_points > 25)
    throw ValidationError("knorm grid is limited to 200 x 60 cells and 25 evaluation points");
  const ExtensionField e = ExtensionField::make(eq);
  const double a = e.alpha(), b = e.beta(), d = e.delta;

  // u cells, clustered toward alpha and beta
  const int n_side = std::max(2, grid.u_cells * 3 / 20), n_mid = grid.u_cells - 2 * n_side;
  std::vector<double> ue;
  for (int i = 0; i <= n_side; ++i)
    ue.push_back(a - 2 * d * (1 - std::cos(0.5 * pi * (n_side - i) / n_side)));
  for (int i = 1; i <= n_mid; ++i) ue.push_back(a + (b - a) * 0.5 * (1 - std::cos(pi * i / n_mid)));
  for (int i = 1; i <= n_side; ++i) ue.push_back(b + 2 * d * (1 - std::cos(0.5 * pi * i / n_side)));

  // v nodes: geometric panels in (0, d], mirrored
  std::vector<double> vn, vw;
  {
    std::vector<double> edges{0.0};
    for (int k = grid.v_panels - 1; k >= 0; --k) edges.push_back(d * std::pow(4.0, -k));
    const quad::Rule& r = quad::gauss_legendre(5);
    for (size_t p = 0; p + 1 < edges.size(); ++p) {
      double h = 0.5 * (edges[p + 1] - edges[p]), c = 0.5 * (edges[p + 1] + edges[p]);
      for (int i = 0; i < 5; ++i) {
        vn.push_back(c + h * r.x[i]);
        vw.push_back(h * r.w[i]);
        vn.push_back(-(c + h * r.x[i]));
        vw.push_back(h * r.w[i]);
      }
    }
  }

  // n-independent extension values per cell
  struct Cell {
    double u0, u1, um, v, wv;
    WRegion reg;
    ExtValue val;
  };
  std::vector<Cell> cells;
  for (size_t i = 0; i + 1 < ue.size(); ++i) {
    const double um = 0.5 * (ue[i] + ue[i + 1]);
    for (size_t j = 0; j < vn.size(); ++j) {
      WRegion reg = w_region(e, um, vn[j]);
      if (reg == WRegion::none) continue;
      cells.push_back({ue[i], ue[i + 1], um, vn[j], vw[j], reg, region_value(e, reg, um, vn[j])});
    }
  }

  std::vector<double> ex(grid.eval_points);
  for (int k = 0; k < grid.eval_points; ++k)
    ex[k] = grid.eval_points == 1 ? 0.5 * (a + b)
                                  : a - 2 * d + (b - a + 4 * d) * k / (grid.eval_points - 1);

  KnormReport rep;
  for (int n : n_list) {
    const double c = eq->c();
    const int N = static_cast<int>(std::lround(c * n));
    AsymptoticContext ctx = AsymptoticContext::make(eq, n, N);
    std::vector<double> wn(cells.size());
    for (size_t q = 0; q < cells.size(); ++q) {
      const Cell& cl = cells[q];
      wn[q] = zero_w ? 0.0 : w_from(cl.reg, cl.val, ctx, cl.um, cl.v).w.norm() * cl.wv;
    }
    KnormRow row;
    row.n = n;
    row.model = std::pow(n, -1.0 / 3) * std::log(double(n));
    row.estimate = -1;
    for (double x : ex) {
      const double y = 0;
      double s = 0;
      for (size_t q = 0; q < cells.size(); ++q) {
        if (wn[q] == 0) continue;
        const Cell& cl = cells[q];
        double dv = std::max(std::abs(cl.v - y), 1e-300);
        s += wn[q] * (std::asinh((cl.u1 - x) / dv) - std::asinh((cl.u0 - x) / dv));
      }
      s /= pi;
      if (s > row.estimate) {
        row.estimate = s;
        row.argmax_x = x;
        row.argmax_y = y;
      }
    }
    rep.rows.push_back(row);
  }
  double num = 0, den = 0;
  for (auto& r : rep.rows) {
    num += r.estimate * r.model;
    den += r.model * r.model;
  }
  rep.C = num / den;
  double res = 0;
  for (auto& r : rep.rows) {
    double q = rep.C > 0 ? r.estimate / (rep.C * r.model) - 1 : 0;
    res += q * q;
  }
  rep.residual = std::sqrt(res / rep.rows.size());
  rep.monotone = true;
  for (size_t i = 1; i < rep.rows.size(); ++i)
    if (!(rep.rows[i].estimate < rep.rows[i - 1].estimate)) rep.monotone = false;
  const auto &f = rep.rows.front(), &l = rep.rows.back();
  rep.model_ratio = f.model / l.model;
  rep.ratio = l.estimate > 0 ? f.estimate / l.estimate : 0;
  rep.ratio_ok = rep.ratio >= rep.model_ratio / 2 && rep.ratio <= rep.model_ratio * 2;
  return rep;
}

}  // namespace opx
