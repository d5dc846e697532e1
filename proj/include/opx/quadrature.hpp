#pragma once
#include <complex>
#include <vector>

namespace opx::quad {

struct Rule {
  std::vector<double> x;  // nodes on [-1, 1]
  std::vector<double> w;
};

// Gauss-Legendre rule with n nodes, cached per n.
const Rule& gauss_legendre(int n);

// Integrate f over [a, b] with an n-point Gauss-Legendre rule.
template <class F>
auto gl(F&& f, double a, double b, int n) {
  const Rule& r = gauss_legendre(n);
  const double h = 0.5 * (b - a), c = 0.5 * (b + a);
  using T = decltype(f(c));
  T s{};
  for (int i = 0; i < n; ++i) s += r.w[i] * f(c + h * r.x[i]);
  return s * h;
}

// Composite rule: panels of equal width, n nodes each.
template <class F>
auto gl_composite(F&& f, double a, double b, int panels, int n) {
  const double h = (b - a) / panels;
  using T = decltype(f(a));
  T s{};
  for (int p = 0; p < panels; ++p) s += gl(f, a + p * h, a + (p + 1) * h, n);
  return s;
}

// Integrate over [a, b] split at the given interior points.
template <class F>
auto gl_split(F&& f, double a, double b, const std::vector<double>& cuts, int n) {
  using T = decltype(f(a));
  T s{};
  double lo = a;
  for (double c : cuts) {
    if (c > lo && c < b) {
      s += gl(f, lo, c, n);
      lo = c;
    }
  }
  s += gl(f, lo, b, n);
  return s;
}

}  // namespace opx::quad
