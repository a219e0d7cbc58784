// Acceptance suite: runs every criterion of the property battery and prints
// one pass/fail line per criterion.  Exit status is nonzero when any fails.

#include <cstdio>
#include <iostream>

#include "scns/verify.hpp"

int main(int argc, char** argv) {
  std::string filter;
  if (argc > 1) filter = argv[1];
  auto results = scns::run_verification(filter, 1.0, nullptr);
  int failed = 0;
  for (const auto& r : results) {
    std::printf("%s  %-36s %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                r.detail.c_str());
    if (!r.pass) ++failed;
  }
  std::printf("%zu/%zu checks passed\n", results.size() - failed, results.size());
  return failed == 0 ? 0 : 1;
}
