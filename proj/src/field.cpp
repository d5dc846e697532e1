#include "opx/field.hpp"

#include <algorithm>
#include <cmath>
#include <regex>

#include "opx/errors.hpp"

namespace opx {

namespace {

std::vector<double> parse_args(const std::string& s) {
  std::vector<double> out;
  size_t pos = 0;
  while (pos < s.size()) {
    size_t end = s.find(',', pos);
    if (end == std::string::npos) end = s.size();
    std::string tok = s.substr(pos, end - pos);
    try {
      size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (tok.find_first_not_of(" \t", used) != std::string::npos)
        throw CatalogError("bad number in field id: " + tok);
    } catch (const std::logic_error&) {
      throw CatalogError("bad number in field id: " + tok);
    }
    pos = end + 1;
  }
  return out;
}

ExternalField gue() {
  ExternalField f;
  f.id = "gue";
  f.v = [](double x) { return x * x; };
  f.v1 = [](double x) { return 2 * x; };
  f.v2 = [](double) { return 2.0; };
  f.growth_hint = 8;
  return f;
}

ExternalField quartic(double g) {
  // one-cut at c=1 needs h(0)=2b^2-2g>0, i.e. g<2
  if (!(g < 2.0) || !std::isfinite(g))
    throw ValidationError("quartic(g) requires g < 2 for a single-interval support");
  ExternalField f;
  f.id = "quartic(" + std::to_string(g) + ")";
  f.v = [g](double x) { return x * x * x * x - g * x * x; };
  f.v1 = [g](double x) { return 4 * x * x * x - 2 * g * x; };
  f.v2 = [g](double x) { return 12 * x * x - 2 * g; };
  f.convex = g <= 0;
  f.growth_hint = 4;
  return f;
}

ExternalField c2lip(double a, double c0) {
  if (!(c0 >= 0) || !std::isfinite(a) || !std::isfinite(c0))
    throw ValidationError("c2lip(a,c0) requires c0 >= 0 for convexity");
  ExternalField f;
  f.id = "c2lip(" + std::to_string(a) + "," + std::to_string(c0) + ")";
  f.v = [a, c0](double x) {
    double p = std::max(0.0, x - a);
    return 0.5 * x * x + c0 * p * p * p;
  };
  f.v1 = [a, c0](double x) {
    double p = std::max(0.0, x - a);
    return x + 3 * c0 * p * p;
  };
  f.v2 = [a, c0](double x) { return 1 + 6 * c0 * std::max(0.0, x - a); };
  f.smoothness = Smoothness::c2_lipschitz;
  f.growth_hint = 8;
  f.breakpoints = {a};
  return f;
}

}  // namespace

ExternalField builtin(const std::string& id) {
  static const std::regex call(R"(\s*([a-z0-9]+)\s*(?:\((.*)\))?\s*)");
  std::smatch m;
  if (!std::regex_match(id, m, call)) throw CatalogError("unknown field: " + id);
  const std::string name = m[1];
  const bool has_args = m[2].matched;
  std::vector<double> args = has_args ? parse_args(m[2]) : std::vector<double>{};
  if (name == "gue" && !has_args) return gue();
  if (name == "quartic" && args.size() == 1) return quartic(args[0]);
  if (name == "c2lip" && args.size() == 2) return c2lip(args[0], args[1]);
  throw CatalogError("unknown field: " + id);
}

FieldCheck check_field(const ExternalField& f, int samples) {
  FieldCheck r;
  const double L = f.growth_hint;
  const double dx = 2 * L / (samples - 1);
  const double h = 1e-5;
  double prev_x = -L, prev_v2 = f.v2(-L);
  for (int i = 0; i < samples; ++i) {
    double x = -L + i * dx;
    double v2 = f.v2(x);
    if (f.convex && !(v2 > 0)) r.convex_ok = false;
    double fd = (f.v(x + h) - f.v(x - h)) / (2 * h);
    double err = std::abs(fd - f.v1(x)) / std::max(1.0, std::abs(f.v1(x)));
    r.max_v1_rel_err = std::max(r.max_v1_rel_err, err);
    if (i > 0) r.v2_lip_bound = std::max(r.v2_lip_bound, std::abs(v2 - prev_v2) / (x - prev_x));
    prev_x = x;
    prev_v2 = v2;
  }
  r.v1_consistent = r.max_v1_rel_err < 1e-6;
  r.v2_lipschitz = std::isfinite(r.v2_lip_bound);
  return r;
}

}  // namespace opx
