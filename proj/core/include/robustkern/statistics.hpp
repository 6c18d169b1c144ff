#pragma once

#include <optional>
#include <variant>

#include <Eigen/Dense>

#include "robustkern/kernels.hpp"

namespace robustkern {

// Two ordered samples; the pooled sequence is (y_1..y_n, z_1..z_m).
// Rows are observations.
struct TwoSampleData {
  Eigen::MatrixXd y;
  Eigen::MatrixXd z;
};

// n paired observations (y_i, z_i); row i of `y` pairs with row i of `z`.
// The two sides may have different dimensions.
struct PairedData {
  Eigen::MatrixXd y;
  Eigen::MatrixXd z;
};

void validate(const TwoSampleData& data);
void validate(const PairedData& data);

struct MmdStatistic {
  KernelSpec kernel;
};

struct HsicStatistic {
  KernelSpec kernel_y;
  KernelSpec kernel_z;
};

using StatisticKind = std::variant<MmdStatistic, HsicStatistic>;

// Quadratic-time plug-in (V-statistic) estimators. Both return the square
// root of a quantity that is nonnegative in exact arithmetic; negative
// floating-point residue is clamped to exactly 0 before the root.
//
// mmd_stat:
//   sqrt( (1/n^2) sum_ij k(y_i,y_j) + (1/m^2) sum_ij k(z_i,z_j)
//         - (2/nm) sum_ij k(y_i,z_j) )
double mmd_stat(const TwoSampleData& data, const KernelSpec& kernel);

// hsic_stat evaluates the fourth-order V-statistic
//   sqrt( (1/n^2) sum_ij k_ij l_ij - (2/n^3) sum_{i,j1,j2} k_ij1 l_ij2
//         + (1/n^4) sum_{i1,j1,i2,j2} k_i1j1 l_i2j2 )
// through the O(n^2) row-sum factorization documented in testing.hpp
// (HsicPermutationEvaluator). The literal quadruple sum lives in oracle.hpp
// as the correctness reference.
double hsic_stat(const PairedData& data, const KernelSpec& kernel_y, const KernelSpec& kernel_z);

// Closed-form global sensitivity bounds, used as exact operative constants:
//   MMD:  sqrt(2K) / min(n, m)          (requires m)
//   HSIC: 4 sqrt(KL) (n-1) / n^2        (requires m to be absent)
// K, L are the declared kernel bounds.
double sensitivity(const StatisticKind& kind, Eigen::Index n, std::optional<Eigen::Index> m);

}  // namespace robustkern
