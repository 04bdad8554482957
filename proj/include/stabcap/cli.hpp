#ifndef STABCAP_CLI_HPP
#define STABCAP_CLI_HPP

#include <iosfwd>
#include <json.hpp>
#include <string>
#include <vector>

namespace stabcap {

// Parses and runs a full command line (without argv[0]). Exit codes:
// 0 success, 2 input/config error, 3 capability or numeric error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct RecipeResult {
  std::string name;
  bool pass = false;
  std::string detail;
  nlohmann::json values;
};

// Packaged example recipes behind the `reproduce` verb: the scalar moment
// bound maximized at kappa = 3, the linear eigenvalue bounds, the two-letter
// constant-block cocycle rate, and the appendix lemma checks.
std::vector<RecipeResult> run_reproduce_recipes();

}  // namespace stabcap

#endif
