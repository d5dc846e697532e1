#pragma once
#include <complex>

namespace opx {

using cplx = std::complex<double>;

// Ai and Ai' at complex argument. The true values are ai*exp(log_scale) and
// aip*exp(log_scale); log_scale is zero unless |Re(2/3 z^{3/2})| is large.
struct AiryPair {
  cplx ai, aip;
  double log_scale = 0;
};

AiryPair airy_scaled(cplx z);

// Unscaled convenience form; may overflow or underflow for very large |z|.
AiryPair airy(cplx z);

// Exposed for tests: the two evaluation branches.
AiryPair airy_series(cplx z);      // Maclaurin pair, quad precision
AiryPair airy_asymptotic(cplx z);  // large-|z| expansion with connection formula

constexpr double kAirySeriesRadius = 9.0;

}  // namespace opx
