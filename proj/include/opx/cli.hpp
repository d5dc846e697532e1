#pragma once
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace opx::cli {

// Parameters shared by the subcommands. Each subcommand reads the fields it
// needs and validates them before running.
struct RunConfig {
  std::string field_id = "gue";
  double c = 1;
  int n = 0, N = 0;
  int quad_order = 256;
  double delta = -1;  // < 0: module default
  std::string output_dir;
  std::uint64_t seed = 0;
};

// Runs one subcommand. args excludes the program name. Exit codes: 0 ok,
// 2 validation error or bad usage, 3 numerical failure.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Flat key=value text; '#' starts a comment.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path);

// Serialisation helpers, exposed for tests.
std::string csv_number(double v);  // %.17g, "nan" / "inf" spelled out
std::vector<int> parse_int_list(const std::string& s);

}  // namespace opx::cli
