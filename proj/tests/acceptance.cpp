#include <iostream>

#include "prismdg/verify.hpp"

int main() {
  const auto results = prismdg::run_suite(prismdg::find_suite("all"), std::cout);
  int failed = 0;
  for (const auto& r : results) failed += !r.pass;
  std::cout << results.size() - failed << "/" << results.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
