#pragma once
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "opx/equilibrium.hpp"
#include "opx/oracle.hpp"

namespace opx {

enum class KernelKind { finite_bulk, finite_edge, sine, airy };

// Kernel in rescaled variables. For the finite kinds the oracle must outlive
// the handle.
struct KernelHandle {
  KernelKind kind = KernelKind::sine;
  std::function<double(double, double)> eval;
  std::string diagonal_rule;
  double operator()(double u, double v) const { return eval(u, v); }
};

KernelHandle sine_kernel();
KernelHandle airy_kernel();
// K_N(a + u/(N psi(a)), a + v/(N psi(a))) / (N psi(a))
KernelHandle finite_bulk_kernel(const Oracle& o, const EquilibriumMeasure& eq, double a);
// s K_N(beta + u s, beta + v s), s = (lambda N)^{-2/3}
KernelHandle finite_edge_kernel(const Oracle& o, const EquilibriumMeasure& eq);

double sine_kernel_value(double u, double v);
double airy_kernel_value(double u, double v);

double bulk_rescaled(const Oracle& o, const EquilibriumMeasure& eq, double a, double u, double v);
double edge_rescaled(const Oracle& o, const EquilibriumMeasure& eq, double u, double v);

// edge scale lambda, taken from the asymptotics module
double edge_lambda(const EquilibriumMeasure& eq);

struct DetResult {
  double value = 1;          // at quad_n
  double value_refined = 1;  // at 2 quad_n
  double change = 0;
};

// Nystrom det(I - G) on (lo, hi). hi = +infinity is truncated at 12.
// Throws ResolutionError when doubling the order moves the value by > tol.
DetResult fredholm_det(const KernelHandle& k, double lo, double hi, int quad_n = 40,
                       double tol = 1e-8);

// sup over an m x m grid on [-r, r]^2
double sine_sup_error(const Oracle& o, const EquilibriumMeasure& eq, double a, double r = 2,
                      int m = 21);
double airy_sup_error(const Oracle& o, const EquilibriumMeasure& eq, double r = 1, int m = 21);

struct GapRow {
  int N = 0;
  double finite_sine_gap = 0, sine_gap = 0;
  double finite_edge_law = 0, airy_law = 0;
  double max_refine_change = 0;
};
struct GapReport {
  std::string field;
  double s = 0;
  std::vector<GapRow> rows;
  bool sine_decreasing = false, airy_decreasing = false;
};

GapReport gap_convergence(const ExternalField& f, double c, const std::vector<int>& Ns, double s,
                          int quad_n = 40, double a = 0);

}  // namespace opx
