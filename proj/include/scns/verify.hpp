#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace scns {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;  // measured values vs tolerances
};

// The full property battery: the fourteen acceptance criteria plus the
// spectral-identity and noise-certificate property suites.  `filter` keeps
// checks whose name contains the substring; `tol_scale` multiplies every
// tolerance (0 is the advertised negative control: everything must fail).
std::vector<CheckResult> run_verification(const std::string& filter = "",
                                          double tol_scale = 1.0,
                                          std::ostream* progress = nullptr);

}  // namespace scns
