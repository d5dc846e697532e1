#pragma once
#include <complex>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "opx/field.hpp"

namespace opx {

using cplx = std::complex<double>;

enum class Side { automatic, plus, minus };

struct ConditionReport {
  bool smooth = false;    // V'' Lipschitz on samples
  bool support = false;   // psi > 0 inside, phi > 0 outside
  bool strict = false;    // sign pattern of h_alpha, h_beta and endpoint slopes
  bool single_interval = false;  // h > 0 on the extended grid
  double min_interior_psi = 0;
  double min_exterior_phi = 0;
  double min_h = 0;
  double h_alpha_margin = 0;  // min of sign-corrected h_alpha samples
  double h_beta_margin = 0;
  double h_alpha_prime_alpha = 0;
  double h_beta_prime_beta = 0;
  double psi_prime_bound = 0;  // sup sqrt((x-a)(b-x))|psi'(x)|
  double v2_lip = 0;
  bool all() const { return smooth && support && strict && single_interval; }
};

struct EquilibriumOptions {
  double bracket_lo = -4, bracket_hi = 4;
  int quad_order = 256;
};

class EquilibriumMeasure {
 public:
  static EquilibriumMeasure solve(const ExternalField& f, double c,
                                  const EquilibriumOptions& opt = {});

  const ExternalField& field() const { return field_; }
  double c() const { return c_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double ell() const { return ell_; }
  double ell_from_alpha() const { return ell_alpha_; }
  int quad_order() const { return m_; }
  double mid() const { return 0.5 * (alpha_ + beta_); }
  double rad() const { return 0.5 * (beta_ - alpha_); }

  double h(double x) const;
  double psi(double x) const;
  double psi_prime(double x) const;  // centred differences
  double theta(double x) const;
  double theta_complement(double x) const;  // 2*pi - theta(x), no cancellation
  double phi(double x) const;
  std::pair<double, double> h_endpoint(double x) const;  // (h_alpha, h_beta)
  double h_alpha(double x) const;
  double h_beta(double x) const;
  // derivatives from theta' = -2 pi psi and phi' (no differencing)
  double h_alpha_prime(double x) const;
  double h_beta_prime(double x) const;
  // (h, h') from one theta or phi quadrature
  std::pair<double, double> h_alpha_pair(double x) const;
  std::pair<double, double> h_beta_pair(double x) const;
  double h_alpha_prime_alpha() const;  // h_alpha'(alpha) > 0
  double h_beta_prime_beta() const;    // h_beta'(beta) < 0
  cplx g(cplx z, Side side = Side::automatic) const;
  ConditionReport verify_conditions() const;

  // trigonometric nodes/weights for \int_0^pi F(m + r cos t) dt
  const std::vector<double>& t_nodes() const { return t_; }
  const std::vector<double>& t_weights() const { return tw_; }

 private:
  ExternalField field_;
  double c_ = 1, alpha_ = 0, beta_ = 0, ell_ = 0, ell_alpha_ = 0;
  int m_ = 256;
  std::vector<double> t_, tw_;
  std::vector<double> s_, v1s_;  // nodes m + r cos t and V' there
  double mass_norm_ = 1;
  std::vector<double> tcuts_;  // breakpoints in t inside (0, pi)

  double theta_int(double t0, double t1) const;  // c r^2 \int sin^2 t h dt
  double ell_at(bool at_beta) const;
};

// Weighted energy  \iint log(1/|x-s|) dmu dmu + c \int V dmu  of the unit-mass
// measure with the given density on [alpha, beta], on `cells` equal cells
// (exact self-interaction of each cell).
double weighted_energy(const EquilibriumMeasure& eq, const std::function<double(double)>& density,
                       int cells = 400);

// Energy of psi against `samples` random multiplicative perturbations
// psi (1 + eps sum_k r_k cos(k pi (x - alpha)/(beta - alpha))), k = 1..4.
struct EnergyCheck {
  double base = 0;
  double min_perturbed = 0;
  bool ok() const { return base <= min_perturbed; }
};
EnergyCheck energy_check(const EquilibriumMeasure& eq, int samples = 20, std::uint64_t seed = 0,
                         double eps = 0.05, int cells = 400);

// Endpoint solve only (trigonometric form of the moment conditions).
std::pair<double, double> solve_endpoints(const ExternalField& f, double c, double lo,
                                          double hi, int quad_order = 256);

// Residuals of the two moment conditions at (alpha, beta).
std::pair<double, double> endpoint_residuals(const ExternalField& f, double c,
                                             double alpha, double beta, int quad_order = 256);

}  // namespace opx
