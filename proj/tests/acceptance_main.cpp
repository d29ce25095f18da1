#include <cstdlib>
#include <iostream>
#include <string>

#include "dubrovin/acceptance.hpp"

// Runs the acceptance criteria named on the command line (all by default),
// one PASS/FAIL line each; exits nonzero if any fails.
int main(int argc, char** argv) {
  using namespace dubrovin::acceptance;
  const Inputs in;
  bool all = true;
  for (const auto& c : criteria()) {
    bool wanted = argc == 1;
    for (int i = 1; i < argc; ++i)
      if (std::atoi(argv[i]) == c.id) wanted = true;
    if (!wanted) continue;
    const Result r = run(c, in);
    std::cout << format_line(r) << std::endl;
    all = all && r.passed;
  }
  return all ? EXIT_SUCCESS : EXIT_FAILURE;
}
