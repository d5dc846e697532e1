#pragma once
#include <vector>

#include "opx/asymptotics.hpp"
#include "opx/oracle.hpp"

namespace opx {

// Asymptotic leading terms next to oracle values at one point. Everything is
// divided by exp(log_scale) of the asymptotic formula so large n does not
// overflow. A21 entries are imaginary parts.
struct CompareRow {
  double x = 0, zeta = 0;
  double asym_a11 = 0, oracle_a11 = 0;
  double asym_a21 = 0, oracle_a21 = 0;
  double envelope = 0;  // |a(x)| in the bulk, |a11| at the edge
  double d_asym = 0, d_oracle = 0;  // d/dx in the bulk, d/dzeta at the edge
  double log_scale = 0;
  double rel_a11() const;
  double rel_a21() const;
  double rel_d() const;
  double env_err() const;  // |asym - oracle| / envelope
};

// The table must hold degree ctx.n and come from the weight exp(-ctx.N V).
CompareRow compare_bulk(const AsymptoticContext& ctx, const RecurrenceTable& t, double x);
CompareRow compare_edge(const AsymptoticContext& ctx, const RecurrenceTable& t, double zeta);

// sup over one local period of |A11| around x0 of |A11 - oracle| / envelope,
// and the same for the derivative scaled by n pi psi(x) times the envelope.
struct PeriodError {
  double value = 0, derivative = 0;
};
PeriodError bulk_period_error(const AsymptoticContext& ctx, const RecurrenceTable& t, double x0,
                              int samples = 41);

}  // namespace opx
