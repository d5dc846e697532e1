#pragma once
#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace opx {

using cplx = std::complex<double>;

// Real phase on [-1, 1] with theta(0) = theta'(0) = 0 and theta'' >= w_lower > 0.
struct PhaseFunction {
  std::string id;
  std::function<double(double)> theta, theta1, theta2, theta3;
  double w_lower = 0;

  // "quad" (x^2) or "cubic" (x^2 + 0.3 x^3)
  static PhaseFunction builtin(const std::string& id);
  // Checks the hypotheses on a sample grid; throws ValidationError.
  void validate() const;
};

// Which cut-off is used in the blend. `composed` is B(B(t)), used to check
// that the reconstruction does not depend on the extension.
enum class BumpChoice { standard, composed };

// Integral of exp(i n theta) over [-1, 1], absolute accuracy 1e-12.
cplx i_direct(const PhaseFunction& p, int n);

struct PhaseExt {
  cplx value;
  cplx dbar;
};

// Theta = (1 - B(y/x)) Theta_0 + B(y/x) Theta_0^hol on the closed triangles
// 0 <= y <= x <= 1 and -1 <= x <= y <= 0.
PhaseExt extension_value(const PhaseFunction& p, double x, double y,
                         BumpChoice b = BumpChoice::standard);
cplx extension_dbar_fd(const PhaseFunction& p, double x, double y, double h = 1e-5,
                       BumpChoice b = BumpChoice::standard);

struct PhaseCertificate {
  double trace_err = 0;     // max |Theta(x,0) - theta(x)|
  double diag_err = 0;      // max |Theta(x,x) - theta''(0)(x+ix)^2/2|
  double K_fit = 0;         // max |dbar Theta| / y^2
  double k_fit = 0;         // min Im Theta / (x y)
  double fd_err = 0;        // analytic vs finite-difference dbar
};
PhaseCertificate certify_phase(const PhaseFunction& p, int grid_n = 100);

// Pieces of the Stokes rewrite: I(n) - gauss = seg_left + seg_right + tri_plus + tri_minus.
struct PieceSet {
  cplx seg_left, seg_right, tri_plus, tri_minus;
  cplx sum() const { return seg_left + seg_right + tri_plus + tri_minus; }
};
PieceSet stokes_pieces(const PhaseFunction& p, int n, BumpChoice b = BumpChoice::standard,
                       int refine = 1);

struct DecompRow {
  int n = 0;
  cplx direct;      // I(n)
  cplx gauss;       // exp(i pi/4) * int_{-sqrt2}^{sqrt2} exp(-n theta''(0) s^2 / 2) ds
  cplx leading;     // sqrt(2 pi / (n theta''(0))) exp(i pi/4)
  PieceSet pieces;
  double residual = 0;        // |I - gauss - sum|
  double refine_change = 0;   // max piece change under panel doubling
  double alt_bump_change = 0; // reconstruction change with B(B(t))
  double scaled_leading_err = 0;  // n |I - leading|
};

struct DecompReport {
  std::string phase;
  std::vector<DecompRow> rows;
  // log-log slopes of |piece| against n; NaN when the piece vanishes identically
  double slope_left = 0, slope_right = 0, slope_plus = 0, slope_minus = 0;
  double max_residual = 0, max_alt_bump_change = 0;
  double max_scaled_leading_err = 0;
  bool slopes_ok = false;  // each slope in [-1.2, -0.8] or the piece vanishes
};

DecompReport decomposition_check(const PhaseFunction& p, const std::vector<int>& n_list);

}  // namespace opx
