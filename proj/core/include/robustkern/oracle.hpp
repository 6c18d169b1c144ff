#pragma once

#include <cstdint>
#include <vector>

#include "robustkern/testing.hpp"

namespace robustkern {
namespace oracle {

// Reference implementations, deliberately naive: explicit nested loops, no
// algebraic shortcuts, single-threaded. The size guards are hard errors.
// These ship in the library so the CLI can expose a `verify` subcommand.

// Literal three-double-sum MMD; requires n + m <= 30.
double mmd_literal(const TwoSampleData& data, const KernelSpec& kernel);

// Literal quadruple-sum HSIC; requires n <= 12 (O(n^4) terms).
double hsic_literal(const PairedData& data, const KernelSpec& kernel_y,
                    const KernelSpec& kernel_z);

// One statistic per permutation of the full group (FullPooled: (n+m)!,
// PairBreaking: n!), in lexicographic enumeration order. Requires the
// permuted size <= 8.
std::vector<double> exact_permutation_distribution(const TestData& data,
                                                   const StatisticKind& kind,
                                                   PermutationScheme scheme);

// Max of |T(X^pi) - T(Y^pi)| over all single-entry replacements of the
// pooled sequence by a candidate (rows of `candidates`) and over
// `num_sampled_permutations` random permutations plus the identity.
double exhaustive_sensitivity_mmd(const TwoSampleData& data, const KernelSpec& kernel,
                                  const Eigen::MatrixXd& candidates,
                                  int num_sampled_permutations, std::uint64_t seed);

// Same search for HSIC; candidate pair i is (candidates_y.row(i),
// candidates_z.row(i)).
double exhaustive_sensitivity_hsic(const PairedData& data, const KernelSpec& kernel_y,
                                   const KernelSpec& kernel_z,
                                   const Eigen::MatrixXd& candidates_y,
                                   const Eigen::MatrixXd& candidates_z,
                                   int num_sampled_permutations, std::uint64_t seed);

}  // namespace oracle
}  // namespace robustkern
