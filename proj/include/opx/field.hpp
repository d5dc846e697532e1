#pragma once
#include <functional>
#include <string>
#include <vector>

namespace opx {

enum class Smoothness { analytic, c2_lipschitz };

struct ExternalField {
  std::string id;
  std::function<double(double)> v, v1, v2;
  bool convex = true;
  Smoothness smoothness = Smoothness::analytic;
  double growth_hint = 8.0;
  // points where V'' has a kink; quadratures split there
  std::vector<double> breakpoints;
};

// Catalog: "gue", "quartic(g)", "c2lip(a,c0)".
ExternalField builtin(const std::string& id);

// Checks of the three field invariants on a uniform grid over
// [-growth_hint, growth_hint]. Returns false with a reason on failure.
struct FieldCheck {
  bool convex_ok = true;
  bool v1_consistent = true;
  bool v2_lipschitz = true;
  double max_v1_rel_err = 0;
  double v2_lip_bound = 0;
};
FieldCheck check_field(const ExternalField& f, int samples = 1000);

}  // namespace opx
