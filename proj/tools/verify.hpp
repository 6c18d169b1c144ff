#pragma once

#include <cstdint>
#include <iosfwd>

namespace robustkern::verify {

struct Options {
  std::uint64_t seed = 1;
  int trials = 200;
  // Test-only fault injection: flips the sign of the MMD cross term inside
  // the candidate statistic so the agreement check must fail.
  bool sabotage = false;
};

// Runs the oracle cross-checks (statistic agreement, sensitivity bound,
// quantile vs exact permutation distribution, Laplace moments), printing
// one pass/fail line per check. Returns true iff all checks pass; the
// first counterexample is printed alongside the failing check.
bool run_checks(const Options& options, std::ostream& out);

}  // namespace robustkern::verify
