#pragma once
#include <complex>
#include <vector>

#include "opx/field.hpp"

namespace opx {

using cplx = std::complex<double>;

struct QuadratureGrid {
  std::vector<double> nodes;
  std::vector<double> weights;  // include the factor e^{-N V}
  double truncation_radius = 0;  // max(-lower, upper)
  double lower = 0, upper = 0;
  int node_count = 0;
};

// Composite Gauss-Legendre on [lower, upper]. Each end is the smallest
// radius (step 1/8) for which the tail bound holds on that side; the node
// density is raised to at least 10 n_max per interval length so the discrete
// measure resolves degree n_max.
QuadratureGrid build_grid(const ExternalField& f, int N, int n_max, int nodes_per_unit = 40);

// Orthonormal recurrence x p_k = b_{k+1} p_{k+1} + a_k p_k + b_k p_{k-1}.
struct RecurrenceTable {
  std::vector<double> a;  // a_0 .. a_{n_max-1}
  std::vector<double> b;  // b_1 .. b_{n_max}, stored at index k-1
  double m0 = 0;
  int n_max = 0;
};

RecurrenceTable stieltjes(const QuadratureGrid& grid, int n_max);

// max |G - I| over the Gram matrix of p_0..p_k on the grid
double gram_residual(const QuadratureGrid& grid, const RecurrenceTable& t, int k);

// true values are p * e^{log_scale}, dp * e^{log_scale}
struct PolyValue {
  cplx p, dp;
  double log_kappa_sq = 0;  // log kappa_{n,n}^2
  double log_scale = 0;
};

PolyValue eval_poly(const RecurrenceTable& t, int n, cplx z);

// p_{n-1}, p_n and their derivatives with one common scale
struct PolyPairValue {
  cplx p_prev, p, dp_prev, dp;
  double log_scale = 0;
};
PolyPairValue eval_pair(const RecurrenceTable& t, int n, cplx z);

double log_kappa_sq(const RecurrenceTable& t, int n);

// Christoffel-Darboux kernel of p_0..p_{N-1} with half weights.
double cd_kernel(const RecurrenceTable& t, const ExternalField& f, int N, double x, double y);
// direct summation form, for cross-checks
double cd_kernel_sum(const RecurrenceTable& t, const ExternalField& f, int N, double x, double y);

// Convenience bundle: grid and table for (field, N, n_max).
struct Oracle {
  ExternalField field;
  int N = 0;
  QuadratureGrid grid;
  RecurrenceTable table;
  static Oracle build(const ExternalField& f, int N, int n_max, int nodes_per_unit = 40);
};

}  // namespace opx
