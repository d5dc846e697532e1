#include "opx/statphase.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "opx/dbar_ext.hpp"
#include "opx/errors.hpp"
#include "opx/parallel.hpp"
#include "opx/quadrature.hpp"

namespace opx {

namespace {

constexpr double pi = std::numbers::pi;
const cplx I(0, 1);
constexpr int kNodes = 20;
// phase change allowed across one 20-node panel
constexpr double kPanelPhase = 8.0;
// exp(-kCut) is treated as zero
constexpr double kCut = 50.0;

struct Bumps {
  double b, bp;
};

Bumps bumps(double t, BumpChoice c) {
  if (c == BumpChoice::standard) return {bump(t), bump_prime(t)};
  const double b1 = bump(t);
  return {bump(b1), bump_prime(b1) * bump_prime(t)};
}

struct Jet {
  double th, th1, th2, th3;
};

Jet jet(const PhaseFunction& p, double x) {
  return {p.theta(x), p.theta1(x), p.theta2(x), p.theta3(x)};
}

PhaseExt ext_core(const Jet& j, double c2, double x, double y, Bumps bb) {
  const cplx t0(j.th - 0.5 * y * y * j.th2, y * j.th1);
  const cplx z(x, y);
  const cplx hol = 0.5 * c2 * z * z;
  PhaseExt r;
  r.value = bb.b * hol + (1 - bb.b) * t0;
  r.dbar = -(1 - bb.b) * 0.25 * y * y * j.th3;
  if (x != 0 && bb.bp != 0) r.dbar += 0.5 * bb.bp * cplx(y / (x * x), -1 / x) * (t0 - hol);
  return r;
}

PhaseExt ext_raw(const PhaseFunction& p, double x, double y, BumpChoice c) {
  const double t = x == 0 ? 0.0 : y / x;
  return ext_core(jet(p, x), p.theta2(0), x, y, bumps(t, c));
}

bool in_triangles(double x, double y) {
  constexpr double eps = 1e-14;
  if (x >= 0) return y >= -eps && y <= x + eps && x <= 1 + eps;
  return y <= eps && y >= x - eps && x >= -1 - eps;
}

double max_abs_theta1(const PhaseFunction& p) {
  double m = 0;
  for (int i = 0; i <= 400; ++i) m = std::max(m, std::abs(p.theta1(-1 + i / 200.0)));
  return m;
}

// Largest |d/ds Theta| along s -> (x0 s, y(s)) sampled, for panel sizing.
template <class F>
double max_slope(F&& path) {
  double m = 0;
  cplx prev = path(0.0);
  for (int i = 1; i <= 2000; ++i) {
    const double s = i / 2000.0;
    const cplx v = path(s);
    m = std::max(m, std::abs(v - prev) * 2000.0);
    prev = v;
  }
  return m;
}

// -i int_0^1 exp(i n Theta(sx, sx s)) ds along the vertical side x = sx
cplx segment(const PhaseFunction& p, int n, double sx, BumpChoice c, int refine) {
  const double slope =
      max_slope([&](double s) { return ext_raw(p, sx, sx * s, c).value.real(); });
  const double ymax = std::min(1.0, kCut / (n * p.w_lower));
  const int panels = refine * std::max(4, int(std::ceil(ymax * n * slope / kPanelPhase)));
  const Jet j = jet(p, sx);
  const double c2 = p.theta2(0);
  auto f = [&](double s) {
    const double y = sx * s;
    return std::exp(I * double(n) * ext_core(j, c2, sx, y, bumps(s, c)).value);
  };
  return -I * quad::gl_composite(f, 0.0, ymax, panels, kNodes);
}

// int over the triangle on the side sx of exp(i n Theta) dbar Theta dA, in
// coordinates (x = sx xi, y = t x) with dA = xi dxi dt
cplx triangle(const PhaseFunction& p, int n, double sx, BumpChoice c, int refine) {
  const double c2 = p.theta2(0);
  const quad::Rule& r = quad::gauss_legendre(kNodes);

  // xi panels sized by the largest phase rate over all rays
  double slope = 0;
  for (int k = 0; k <= 10; ++k) {
    const double t = k / 10.0;
    slope = std::max(slope, max_slope([&](double s) {
      return ext_raw(p, sx * s, sx * s * t, c).value.real();
    }));
  }
  const int xp = refine * std::max(8, int(std::ceil(n * slope / kPanelPhase)));
  std::vector<double> xi, xw;
  std::vector<Jet> jets;
  xi.reserve(size_t(xp) * kNodes);
  for (int q = 0; q < xp; ++q) {
    const double a = double(q) / xp, b = double(q + 1) / xp;
    for (int i = 0; i < kNodes; ++i) {
      xi.push_back(0.5 * (a + b) + 0.5 * (b - a) * r.x[i]);
      xw.push_back(0.5 * (b - a) * r.w[i]);
      jets.push_back(jet(p, sx * xi.back()));
    }
  }

  // t panels: geometric from 1/(4n), at most 1/16 wide where the bump turns on
  std::vector<double> te{0.0};
  const double ratio = std::pow(2.0, 1.0 / refine), wmax = 1.0 / (16 * refine);
  for (double t = std::min(0.25, 1.0 / (4.0 * n)); t < 1;) {
    te.push_back(t);
    t = std::min(t * ratio, t + wmax);
  }
  te.push_back(1.0);
  std::vector<double> tn, tw;
  for (size_t q = 0; q + 1 < te.size(); ++q)
    for (int i = 0; i < kNodes; ++i) {
      tn.push_back(0.5 * (te[q] + te[q + 1]) + 0.5 * (te[q + 1] - te[q]) * r.x[i]);
      tw.push_back(0.5 * (te[q + 1] - te[q]) * r.w[i]);
    }

  std::vector<cplx> part(tn.size());
  parallel_for(tn.size(), [&](size_t k) {
    const double t = tn[k];
    const Bumps bb = bumps(t, c);
    // Im Theta >= w x y = w t xi^2 bounds the modulus
    const double xmax = t > 0 ? std::sqrt(kCut / (n * p.w_lower * t)) : 2.0;
    cplx s = 0;
    for (size_t i = 0; i < xi.size() && xi[i] < xmax + 1.0 / xp; ++i) {
      const double x = sx * xi[i];
      const PhaseExt e = ext_core(jets[i], c2, x, t * x, bb);
      s += xw[i] * xi[i] * std::exp(I * double(n) * e.value) * e.dbar;
    }
    part[k] = tw[k] * s;
  });
  cplx sum = 0;
  for (const cplx& v : part) sum += v;
  return sum;
}

}  // namespace

PhaseFunction PhaseFunction::builtin(const std::string& id) {
  PhaseFunction p;
  p.id = id;
  if (id == "quad") {
    p.theta = [](double x) { return x * x; };
    p.theta1 = [](double x) { return 2 * x; };
    p.theta2 = [](double) { return 2.0; };
    p.theta3 = [](double) { return 0.0; };
    p.w_lower = 2;
  } else if (id == "cubic") {
    p.theta = [](double x) { return x * x + 0.3 * x * x * x; };
    p.theta1 = [](double x) { return 2 * x + 0.9 * x * x; };
    p.theta2 = [](double x) { return 2 + 1.8 * x; };
    p.theta3 = [](double) { return 1.8; };
    p.w_lower = 0.2;
  } else {
    throw CatalogError("unknown phase '" + id + "' (expected quad or cubic)");
  }
  p.validate();
  return p;
}

void PhaseFunction::validate() const {
  if (!theta || !theta1 || !theta2 || !theta3) throw ValidationError("phase is incomplete");
  if (!(w_lower > 0)) throw ValidationError("phase needs w_lower > 0");
  if (std::abs(theta(0)) > 1e-14 || std::abs(theta1(0)) > 1e-14)
    throw ValidationError("phase needs theta(0) = theta'(0) = 0");
  for (int i = 0; i <= 1000; ++i) {
    const double x = -1 + i / 500.0;
    if (theta2(x) < w_lower * (1 - 1e-12))
      throw ValidationError("theta'' drops below w_lower on [-1, 1]");
    if (!std::isfinite(theta3(x))) throw ValidationError("theta''' is not bounded");
  }
}

cplx i_direct(const PhaseFunction& p, int n) {
  if (n < 1 || n > 1000000) throw ValidationError("i_direct needs 1 <= n <= 1e6");
  const int panels = std::max(8, int(std::ceil(2.0 * n * max_abs_theta1(p) / kPanelPhase)));
  auto f = [&](double x) { return std::exp(I * (double(n) * p.theta(x))); };
  const cplx a = quad::gl_composite(f, -1.0, 1.0, panels, kNodes);
  const cplx b = quad::gl_composite(f, -1.0, 1.0, 2 * panels, kNodes);
  if (std::abs(a - b) > 1e-12)
    throw ResolutionError("i_direct: panel doubling changed the value by " +
                          std::to_string(std::abs(a - b)));
  return b;
}

PhaseExt extension_value(const PhaseFunction& p, double x, double y, BumpChoice b) {
  if (!in_triangles(x, y)) throw DomainError("extension_value: point outside the triangles");
  return ext_raw(p, x, y, b);
}

cplx extension_dbar_fd(const PhaseFunction& p, double x, double y, double h, BumpChoice b) {
  const cplx dx = (ext_raw(p, x + h, y, b).value - ext_raw(p, x - h, y, b).value) / (2 * h);
  const cplx dy = (ext_raw(p, x, y + h, b).value - ext_raw(p, x, y - h, b).value) / (2 * h);
  return 0.5 * (dx + I * dy);
}

PhaseCertificate certify_phase(const PhaseFunction& p, int grid_n) {
  if (grid_n < 10) throw ValidationError("certify_phase needs grid_n >= 10");
  PhaseCertificate r;
  r.k_fit = std::numeric_limits<double>::infinity();
  const double c2 = p.theta2(0);
  for (double sx : {1.0, -1.0}) {
    for (int i = 1; i <= grid_n; ++i) {
      const double x = sx * double(i) / grid_n;
      for (int j = 0; j <= grid_n; ++j) {
        const double y = x * double(j) / grid_n;
        const PhaseExt e = extension_value(p, x, y);
        if (j == 0) {
          r.trace_err = std::max(r.trace_err, std::abs(e.value - p.theta(x)));
          continue;
        }
        if (j == grid_n)
          r.diag_err = std::max(r.diag_err, std::abs(e.value - 0.5 * c2 * cplx(x, x) * cplx(x, x)));
        r.K_fit = std::max(r.K_fit, std::abs(e.dbar) / (y * y));
        r.k_fit = std::min(r.k_fit, e.value.imag() / (x * y));
        // second differences are noisy next to the corner
        if (std::abs(x) >= 0.05 && i % 4 == 0 && j % 4 == 0)
          r.fd_err = std::max(r.fd_err, std::abs(e.dbar - extension_dbar_fd(p, x, y)));
      }
    }
  }
  return r;
}

PieceSet stokes_pieces(const PhaseFunction& p, int n, BumpChoice b, int refine) {
  if (n < 1 || n > 100000) throw ValidationError("stokes_pieces needs 1 <= n <= 1e5");
  PieceSet s;
  s.seg_right = segment(p, n, 1.0, b, refine);
  s.seg_left = segment(p, n, -1.0, b, refine);
  s.tri_plus = -2.0 * double(n) * triangle(p, n, 1.0, b, refine);
  s.tri_minus = 2.0 * double(n) * triangle(p, n, -1.0, b, refine);
  return s;
}

DecompReport decomposition_check(const PhaseFunction& p, const std::vector<int>& n_list) {
  if (n_list.empty()) throw ValidationError("decomposition_check needs at least one n");
  DecompReport rep;
  rep.phase = p.id;
  const double c2 = p.theta2(0);
  for (int n : n_list) {
    DecompRow row;
    row.n = n;
    row.direct = i_direct(p, n);
    const double a = n * c2;
    const cplx e4 = std::exp(I * (pi / 4));
    row.leading = std::sqrt(2 * pi / a) * e4;
    row.gauss = row.leading * std::erf(std::sqrt(a));
    row.pieces = stokes_pieces(p, n);
    row.residual = std::abs(row.direct - row.gauss - row.pieces.sum());
    const PieceSet fine = stokes_pieces(p, n, BumpChoice::standard, 2);
    row.refine_change = std::max({std::abs(fine.seg_left - row.pieces.seg_left),
                                  std::abs(fine.seg_right - row.pieces.seg_right),
                                  std::abs(fine.tri_plus - row.pieces.tri_plus),
                                  std::abs(fine.tri_minus - row.pieces.tri_minus)});
    const PieceSet alt = stokes_pieces(p, n, BumpChoice::composed);
    row.alt_bump_change = std::abs(alt.sum() - row.pieces.sum());
    row.scaled_leading_err = n * std::abs(row.direct - row.leading);
    rep.max_residual = std::max(rep.max_residual, row.residual);
    rep.max_alt_bump_change = std::max(rep.max_alt_bump_change, row.alt_bump_change);
    rep.max_scaled_leading_err = std::max(rep.max_scaled_leading_err, row.scaled_leading_err);
    rep.rows.push_back(row);
  }

  // least-squares slope of log|piece| against log n
  auto slope = [&](auto get) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (rep.rows.size() < 2) return nan;
    double big = 0;
    for (const auto& r : rep.rows) big = std::max(big, std::abs(get(r.pieces)));
    if (big < 1e-13) return nan;  // vanishes to quadrature accuracy
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = double(rep.rows.size());
    for (const auto& r : rep.rows) {
      const double lx = std::log(double(r.n)), ly = std::log(std::abs(get(r.pieces)));
      sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
  };
  rep.slope_left = slope([](const PieceSet& s) { return s.seg_left; });
  rep.slope_right = slope([](const PieceSet& s) { return s.seg_right; });
  rep.slope_plus = slope([](const PieceSet& s) { return s.tri_plus; });
  rep.slope_minus = slope([](const PieceSet& s) { return s.tri_minus; });
  rep.slopes_ok = rep.rows.size() >= 2;
  for (double s : {rep.slope_left, rep.slope_right, rep.slope_plus, rep.slope_minus})
    if (!std::isnan(s) && (s < -1.2 || s > -0.8)) rep.slopes_ok = false;
  return rep;
}

}  // namespace opx
