#include "opx/airy.hpp"

#include <cmath>
#include <numbers>

#include "opx/errors.hpp"

namespace opx {

namespace {

using q = __float128;

struct cq {
  q re, im;
};
inline cq mul(cq a, cq b) { return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re}; }
inline cq add(cq a, cq b) { return {a.re + b.re, a.im + b.im}; }
inline cq scale(cq a, q s) { return {a.re * s, a.im * s}; }
inline q norm1(cq a) { return (a.re < 0 ? -a.re : a.re) + (a.im < 0 ? -a.im : a.im); }

// Ai(0) and -Ai'(0)
const q kC1 = 0.355028053887817239260063186004183176Q;
const q kC2 = 0.258819403792806798405183560189203963Q;

constexpr double pi = std::numbers::pi;

// u_k, v_k coefficients of the large-argument expansion
struct Coeffs {
  double u[32], v[32];
  Coeffs() {
    u[0] = v[0] = 1;
    for (int k = 1; k < 32; ++k) {
      u[k] = u[k - 1] * (6.0 * k - 5) * (6.0 * k - 3) * (6.0 * k - 1) / ((2.0 * k - 1) * 216.0 * k);
      v[k] = -u[k] * (6.0 * k + 1) / (6.0 * k - 1);
    }
  }
};
const Coeffs kCoef;

// expansion valid for |arg z| <= 2pi/3; returns mantissas with log scale -Re(zeta)
AiryPair asym_sector(cplx z) {
  cplx sz = std::sqrt(z);
  cplx zeta = (2.0 / 3.0) * z * sz;
  cplx qz = std::sqrt(sz);  // z^{1/4}
  cplx inv = 1.0 / zeta;
  cplx su = 0, sv = 0, p = 1;
  double prev = INFINITY;
  for (int k = 0; k < 32; ++k) {
    double sign = (k % 2) ? -1.0 : 1.0;
    cplx tu = sign * kCoef.u[k] * p, tv = sign * kCoef.v[k] * p;
    double mag = std::abs(tu);
    if (mag > prev) break;  // optimal truncation
    su += tu;
    sv += tv;
    if (mag < 1e-18 * std::abs(su)) break;
    prev = mag;
    p *= inv;
  }
  cplx phase = std::exp(cplx(0, -zeta.imag()));
  double c = 1.0 / (2.0 * std::sqrt(pi));
  AiryPair r;
  r.ai = c / qz * su * phase;
  r.aip = -c * qz * sv * phase;
  r.log_scale = -zeta.real();
  return r;
}

AiryPair combine(const AiryPair& a, cplx wa, cplx wpa, const AiryPair& b, cplx wb, cplx wpb) {
  double L = std::max(a.log_scale, b.log_scale);
  double ea = std::exp(a.log_scale - L), eb = std::exp(b.log_scale - L);
  AiryPair r;
  r.ai = wa * a.ai * ea + wb * b.ai * eb;
  r.aip = wpa * a.aip * ea + wpb * b.aip * eb;
  r.log_scale = L;
  return r;
}

}  // namespace

AiryPair airy_series(cplx zd) {
  cq z{zd.real(), zd.imag()};
  cq z2 = mul(z, z), z3 = mul(z2, z);
  // f = sum a_k z^{3k}, g = sum b_k z^{3k+1}
  cq f{1, 0}, g = z, fp{0, 0}, gp{1, 0};
  cq tf{1, 0}, tg = z;   // current terms of f and g
  cq tfp{0, 0}, tgp{1, 0};
  for (int k = 1; k < 400; ++k) {
    q k3 = 3 * k;
    tf = scale(mul(tf, z3), 1 / ((k3 - 1) * k3));
    tg = scale(mul(tg, z3), 1 / (k3 * (k3 + 1)));
    // f' terms: 3k a_k z^{3k-1}; g' terms: (3k+1) b_k z^{3k}
    if (k == 1) tfp = scale(z2, q(0.5));
    else tfp = scale(mul(tfp, z3), 1 / (3 * (k - 1) * (k3 - 1)));
    tgp = scale(mul(tgp, z3), 1 / (k3 * (k3 - 2)));
    f = add(f, tf);
    g = add(g, tg);
    fp = add(fp, tfp);
    gp = add(gp, tgp);
    q mag = norm1(tf) + norm1(tg) + norm1(tfp) + norm1(tgp);
    q tot = norm1(f) + norm1(g) + norm1(fp) + norm1(gp);
    if (mag < 1e-36Q * tot && k > 2) break;
  }
  cq ai = add(scale(f, kC1), scale(g, -kC2));
  cq aip = add(scale(fp, kC1), scale(gp, -kC2));
  return {cplx((double)ai.re, (double)ai.im), cplx((double)aip.re, (double)aip.im), 0};
}

AiryPair airy_asymptotic(cplx z) {
  const double th = std::arg(z);
  if (std::abs(th) <= 2 * pi / 3) return asym_sector(z);
  const cplx w = std::polar(1.0, 2 * pi / 3), w2 = std::polar(1.0, -2 * pi / 3);
  // Ai(z) = -w Ai(wz) - w^2 Ai(w^2 z); Ai'(z) = -w^2 Ai'(wz) - w Ai'(w^2 z)
  AiryPair a = asym_sector(w * z), b = asym_sector(w2 * z);
  return combine(a, -w, -w2, b, -w2, -w);
}

AiryPair airy_scaled(cplx z) {
  if (!(std::abs(z) <= 1e4)) throw DomainError("airy: |z| must not exceed 1e4");
  if (std::abs(z) <= kAirySeriesRadius) return airy_series(z);
  return airy_asymptotic(z);
}

AiryPair airy(cplx z) {
  AiryPair r = airy_scaled(z);
  if (r.log_scale != 0) {
    double e = std::exp(r.log_scale);
    r.ai *= e;
    r.aip *= e;
    r.log_scale = 0;
  }
  return r;
}

}  // namespace opx
