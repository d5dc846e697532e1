#pragma once
#include <memory>
#include <vector>

#include "opx/asymptotics.hpp"
#include "opx/equilibrium.hpp"

namespace opx {

// C-infinity cut-off: 0 for t <= 0, 1 for t >= 1.
double bump(double t);
double bump_prime(double t);

struct ExtensionField {
  std::shared_ptr<const EquilibriumMeasure> eq;
  double delta = 0;
  double a_glue = 0, b_glue = 0;
  double hap = 0, hbp = 0;  // h_alpha'(alpha) > 0, h_beta'(beta) < 0

  static ExtensionField make(std::shared_ptr<const EquilibriumMeasure> eq, double delta = -1);
  double alpha() const { return eq->alpha(); }
  double beta() const { return eq->beta(); }
};

struct ExtValue {
  cplx value;
  cplx dbar;  // (d/dx + i d/dy) / 2
};

// Extension of theta on alpha < x < beta, |y| < delta.
ExtValue theta_extension(const ExtensionField& e, double x, double y);
// Extension of phi on R_alpha (alpha-2delta < x < alpha, 0 <= y < delta)
// and R_beta (beta < x < beta+2delta, -delta < y <= 0).
ExtValue phi_extension(const ExtensionField& e, double x, double y);

// centred-difference dbar of the value, for cross-checks
cplx theta_dbar_fd(const ExtensionField& e, double x, double y, double h = 1e-6);
cplx phi_dbar_fd(const ExtensionField& e, double x, double y, double h = 1e-6);

struct CertifyReport {
  int nx = 0, ny = 0;
  // theta
  double theta_trace_err = 0;       // max |Theta(x,0) - theta(x)|
  double theta_trace_dbar = 0;      // max |dbar Theta(x,0)|
  double theta_K_fit = 0;           // max |dbar|/(|y| |z-a|^1/2 |z-b|^1/2)
  double theta_k_fit_upper = 0;     // min -Im Theta / y^{3/2}, y > 0
  double theta_k_fit_lower = 0;     // min Im Theta / |y|^{3/2}, y < 0
  double theta_diag_err = 0;        // G_alpha, G_beta on the diagonals
  double theta_G_slope = 0;         // max |G - G(endpoint)| / |z - endpoint|
  double theta_fd_err = 0;          // analytic vs finite-difference dbar
  // phi
  double phi_trace_err = 0;
  double phi_trace_dbar = 0;
  double phi_K_fit = 0;
  double phi_k_fit = 0;   // min Re Phi / |z - endpoint|^{3/2} for |y| <= |x - endpoint|
  double phi_k_rect = 0;  // same over the whole rectangles (may be negative)
  double phi_diag_err = 0;
  double phi_H_slope = 0;
  double phi_fd_err = 0;
  bool ok() const;
};

// grid_n x grid_m interior samples per region. The finite-difference
// comparison uses every fd_stride-th sample in each direction and leaves out
// disks of radius delta/4 around the endpoints.
CertifyReport certify(const ExtensionField& e, int grid_n = 200, int grid_m = 50,
                      int fd_stride = 4);

enum class WRegion { none, omega_plus, omega_minus, omega_alpha, omega_beta };
WRegion w_region(const ExtensionField& e, double x, double y);

struct WPair {
  Mat2 w0 = Mat2::Zero();
  Mat2 w = Mat2::Zero();  // D-hat W0 D-hat^{-1}
  WRegion region = WRegion::none;
};

WPair w_matrices(const ExtensionField& e, const AsymptoticContext& ctx, double x, double y);

struct KnormGrid {
  int u_cells = 200;  // split 30 / 140 / 30 over the three x-ranges
  int v_panels = 6;   // geometric panels per half, 5 nodes each
  int eval_points = 25;
};

struct KnormRow {
  int n = 0;
  double estimate = 0;
  double argmax_x = 0, argmax_y = 0;
  double model = 0;  // n^{-1/3} log n
};

struct KnormReport {
  std::vector<KnormRow> rows;
  double C = 0, residual = 0;  // least-squares C for estimate ~ C * model
  bool monotone = false;
  double ratio = 0, model_ratio = 0;  // first over last
  bool ratio_ok = false;              // within a factor 2 of the model ratio
};

// Set zero_w to replace ||W|| by 0 (null check).
KnormReport knorm_estimate(std::shared_ptr<const EquilibriumMeasure> eq,
                           const std::vector<int>& n_list, const KnormGrid& grid = {},
                           bool zero_w = false);

}  // namespace opx
