#include "opx/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "opx/errors.hpp"
#include "opx/quadrature.hpp"

namespace opx {

namespace {

constexpr int kPanelNodes = 20;
constexpr double kBigScale = 1e100;

// log of the tail bound on one side: e^{-N (V(s L) - vmin)} (2L)^{2 n_max + 1} * 2
double tail_log_bound(const ExternalField& f, int N, int n_max, double L, double side) {
  double vmin = f.v(0);
  for (int i = 0; i <= 400; ++i) vmin = std::min(vmin, f.v(-L + 2 * L * i / 400));
  return -N * (f.v(side * L) - vmin) + (2.0 * n_max + 1) * std::log(2 * L) + std::log(2.0);
}

double truncation(const ExternalField& f, int N, int n_max, double side) {
  const double target = std::log(1e-30);
  for (double t = 1; t <= 50; t += 0.125)
    if (tail_log_bound(f, N, n_max, t, side) < target) return t;
  throw GrowthError("oracle tail bound not met for L <= 50");
}

}  // namespace

QuadratureGrid build_grid(const ExternalField& f, int N, int n_max, int nodes_per_unit) {
  if (N < 1 || n_max < 1) throw ValidationError("build_grid needs N >= 1 and n_max >= 1");
  if (n_max > 128) throw ValidationError("oracle n_max is capped at 128");
  if (nodes_per_unit < 1) throw ValidationError("nodes_per_unit must be positive");
  // each side separately, so asymmetric fields do not underflow
  const double Lm = truncation(f, N, n_max, -1), Lp = truncation(f, N, n_max, 1);
  const double L = std::max(Lm, Lp), width = Lm + Lp;

  const double npu = std::max<double>(nodes_per_unit, std::ceil(10.0 * n_max / width));
  const int panels = std::max(1, static_cast<int>(std::ceil(width * npu / kPanelNodes)));
  std::vector<double> edges;
  for (int p = 0; p <= panels; ++p) edges.push_back(-Lm + width * p / panels);
  for (double bp : f.breakpoints)
    if (bp > -Lm && bp < Lp) edges.push_back(bp);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](double u, double v) { return std::abs(u - v) < 1e-12; }),
              edges.end());

  const quad::Rule& r = quad::gauss_legendre(kPanelNodes);
  QuadratureGrid g;
  std::vector<double> vs;
  for (size_t p = 0; p + 1 < edges.size(); ++p) {
    const double h = 0.5 * (edges[p + 1] - edges[p]), c = 0.5 * (edges[p + 1] + edges[p]);
    for (int i = 0; i < kPanelNodes; ++i) {
      double x = c + h * r.x[i];
      g.nodes.push_back(x);
      g.weights.push_back(h * r.w[i]);
      vs.push_back(f.v(x));
    }
  }
  // absolute scale, so that kappa is the true leading coefficient
  for (size_t i = 0; i < vs.size(); ++i) {
    g.weights[i] *= std::exp(-N * vs[i]);
    if (!(g.weights[i] > 0)) throw PrecisionError("oracle weight underflow; reduce N or n_max");
  }
  g.truncation_radius = L;
  g.lower = -Lm;
  g.upper = Lp;
  g.node_count = static_cast<int>(g.nodes.size());
  return g;
}

RecurrenceTable stieltjes(const QuadratureGrid& grid, int n_max) {
  const int M = grid.node_count;
  if (n_max < 1) throw ValidationError("stieltjes needs n_max >= 1");
  if (M < 4 * n_max) throw ValidationError("stieltjes needs node_count >= 4 n_max");
  RecurrenceTable t;
  t.n_max = n_max;
  double m0 = 0;
  for (double w : grid.weights) m0 += w;
  if (!(m0 > 0) || !std::isfinite(m0)) throw PrecisionError("bad zeroth moment");
  t.m0 = m0;

  // Lanczos on diag(x) with starting vector sqrt(w)/sqrt(m0)
  std::vector<std::vector<double>> Q;
  std::vector<double> q(M);
  for (int i = 0; i < M; ++i) q[i] = std::sqrt(grid.weights[i] / m0);
  Q.push_back(q);
  std::vector<double> v(M);
  for (int k = 0; k < n_max; ++k) {
    const auto& qk = Q[k];
    for (int i = 0; i < M; ++i) v[i] = grid.nodes[i] * qk[i];
    double a = 0;
    for (int i = 0; i < M; ++i) a += qk[i] * v[i];
    t.a.push_back(a);
    // full reorthogonalisation, two passes
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& qj : Q) {
        double d = 0;
        for (int i = 0; i < M; ++i) d += qj[i] * v[i];
        for (int i = 0; i < M; ++i) v[i] -= d * qj[i];
      }
    }
    double b = 0;
    for (int i = 0; i < M; ++i) b += v[i] * v[i];
    b = std::sqrt(b);
    if (!(b > 0) || !std::isfinite(b)) throw PrecisionError("Stieltjes lost positivity of b_k");
    t.b.push_back(b);
    for (int i = 0; i < M; ++i) v[i] /= b;
    Q.push_back(v);
  }
  return t;
}

double gram_residual(const QuadratureGrid& grid, const RecurrenceTable& t, int k) {
  if (k > t.n_max) throw ValidationError("gram_residual: k exceeds n_max");
  const int M = grid.node_count;
  std::vector<std::vector<double>> P(k + 1, std::vector<double>(M));
  for (int i = 0; i < M; ++i) {
    double x = grid.nodes[i], pm = 0, p = 1 / std::sqrt(t.m0);
    P[0][i] = p;
    for (int j = 0; j < k; ++j) {
      double bprev = j > 0 ? t.b[j - 1] : 0;
      double pn = ((x - t.a[j]) * p - bprev * pm) / t.b[j];
      pm = p;
      p = pn;
      P[j + 1][i] = p;
    }
  }
  double worst = 0;
  for (int r = 0; r <= k; ++r)
    for (int s = r; s <= k; ++s) {
      double g = 0;
      for (int i = 0; i < M; ++i) g += grid.weights[i] * P[r][i] * P[s][i];
      worst = std::max(worst, std::abs(g - (r == s ? 1.0 : 0.0)));
    }
  return worst;
}

double log_kappa_sq(const RecurrenceTable& t, int n) {
  if (n < 0 || n > t.n_max) throw ValidationError("degree exceeds the recurrence table");
  double s = -std::log(t.m0);
  for (int k = 0; k < n; ++k) s -= 2 * std::log(t.b[k]);
  return s;
}

PolyPairValue eval_pair(const RecurrenceTable& t, int n, cplx z) {
  if (n < 0 || n > t.n_max) throw ValidationError("degree exceeds the recurrence table");
  PolyPairValue r;
  cplx pm = 0, p = 1 / std::sqrt(t.m0), dpm = 0, dp = 0;
  double ls = 0;
  for (int k = 0; k < n; ++k) {
    double bprev = k > 0 ? t.b[k - 1] : 0;
    cplx pn = ((z - t.a[k]) * p - bprev * pm) / t.b[k];
    cplx dpn = ((z - t.a[k]) * dp + p - bprev * dpm) / t.b[k];
    pm = p;
    p = pn;
    dpm = dp;
    dp = dpn;
    double m = std::max({std::abs(p), std::abs(pm), std::abs(dp), std::abs(dpm)});
    if (m > kBigScale) {
      double s = std::log(m);
      p /= m;
      pm /= m;
      dp /= m;
      dpm /= m;
      ls += s;
    }
  }
  r.p_prev = pm;
  r.p = p;
  r.dp_prev = dpm;
  r.dp = dp;
  r.log_scale = ls;
  return r;
}

PolyValue eval_poly(const RecurrenceTable& t, int n, cplx z) {
  PolyPairValue q = eval_pair(t, n, z);
  PolyValue r;
  r.p = q.p;
  r.dp = q.dp;
  r.log_scale = q.log_scale;
  r.log_kappa_sq = log_kappa_sq(t, n);
  return r;
}

double cd_kernel(const RecurrenceTable& t, const ExternalField& f, int N, double x, double y) {
  if (N < 1 || N > t.n_max) throw ValidationError("cd_kernel needs 1 <= N <= n_max");
  PolyPairValue px = eval_pair(t, N, x);
  const double half = -0.5 * N * f.v(x);
  if (x == y) {
    double val = t.b[N - 1] * (px.dp.real() * px.p_prev.real() - px.dp_prev.real() * px.p.real());
    return val * std::exp(2 * px.log_scale + 2 * half);
  }
  PolyPairValue py = eval_pair(t, N, y);
  double val = t.b[N - 1] *
               (px.p.real() * py.p_prev.real() - px.p_prev.real() * py.p.real()) / (x - y);
  return val * std::exp(px.log_scale + py.log_scale + half - 0.5 * N * f.v(y));
}

double cd_kernel_sum(const RecurrenceTable& t, const ExternalField& f, int N, double x, double y) {
  if (N < 1 || N > t.n_max) throw ValidationError("cd_kernel needs 1 <= N <= n_max");
  // p_k carried with the half weight folded in to avoid overflow
  double s = 0;
  double px_m = 0, px = std::exp(-0.5 * N * f.v(x)) / std::sqrt(t.m0);
  double py_m = 0, py = std::exp(-0.5 * N * f.v(y)) / std::sqrt(t.m0);
  for (int k = 0; k < N; ++k) {
    s += px * py;
    if (k + 1 == N) break;
    double bprev = k > 0 ? t.b[k - 1] : 0;
    double xn = ((x - t.a[k]) * px - bprev * px_m) / t.b[k];
    double yn = ((y - t.a[k]) * py - bprev * py_m) / t.b[k];
    px_m = px;
    px = xn;
    py_m = py;
    py = yn;
  }
  return s;
}

Oracle Oracle::build(const ExternalField& f, int N, int n_max, int nodes_per_unit) {
  Oracle o;
  o.field = f;
  o.N = N;
  o.grid = build_grid(f, N, n_max, nodes_per_unit);
  o.table = stieltjes(o.grid, n_max);
  return o;
}

}  // namespace opx
