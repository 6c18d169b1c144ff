#include "robustkern/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "robustkern/rng.hpp"

namespace robustkern {
namespace oracle {

namespace {

constexpr Eigen::Index kMmdLiteralLimit = 30;
constexpr Eigen::Index kHsicLiteralLimit = 12;
constexpr Eigen::Index kEnumerationLimit = 8;

Eigen::MatrixXd pool_rows(const TwoSampleData& data) {
  Eigen::MatrixXd pooled(data.y.rows() + data.z.rows(), data.y.cols());
  pooled << data.y, data.z;
  return pooled;
}

TwoSampleData permute_pooled(const Eigen::MatrixXd& pooled, Eigen::Index n,
                             const std::vector<int>& perm) {
  const Eigen::Index total = pooled.rows();
  TwoSampleData out;
  out.y.resize(n, pooled.cols());
  out.z.resize(total - n, pooled.cols());
  for (Eigen::Index i = 0; i < n; ++i) out.y.row(i) = pooled.row(perm[static_cast<std::size_t>(i)]);
  for (Eigen::Index i = n; i < total; ++i) {
    out.z.row(i - n) = pooled.row(perm[static_cast<std::size_t>(i)]);
  }
  return out;
}

PairedData permute_pairs(const PairedData& data, const std::vector<int>& perm) {
  PairedData out;
  out.y = data.y;
  out.z.resizeLike(data.z);
  for (Eigen::Index i = 0; i < data.z.rows(); ++i) {
    out.z.row(i) = data.z.row(perm[static_cast<std::size_t>(i)]);
  }
  return out;
}

}  // namespace

double mmd_literal(const TwoSampleData& data, const KernelSpec& kernel) {
  const Eigen::Index n = data.y.rows();
  const Eigen::Index m = data.z.rows();
  // The reference evaluator tolerates single-point samples (the estimator
  // formula is defined there even though the test procedures require >= 2).
  if (n < 1 || m < 1) throw DataError("mmd_literal: empty sample");
  if (data.y.cols() != data.z.cols()) throw DataError("mmd_literal: dimension mismatch");
  if (n + m > kMmdLiteralLimit) {
    throw ConfigError("mmd_literal: size guard n + m <= " + std::to_string(kMmdLiteralLimit));
  }
  double yy = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      yy += eval_kernel(kernel, data.y.row(i), data.y.row(j));
    }
  }
  double zz = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      zz += eval_kernel(kernel, data.z.row(i), data.z.row(j));
    }
  }
  double yz = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      yz += eval_kernel(kernel, data.y.row(i), data.z.row(j));
    }
  }
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  const double value = yy / (nn * nn) + zz / (mm * mm) - 2.0 * yz / (nn * mm);
  return std::sqrt(std::max(0.0, value));
}

double hsic_literal(const PairedData& data, const KernelSpec& kernel_y,
                    const KernelSpec& kernel_z) {
  const Eigen::Index n = data.y.rows();
  if (n < 1) throw DataError("hsic_literal: empty sample");
  if (data.z.rows() != n) throw DataError("hsic_literal: pair count mismatch");
  if (n > kHsicLiteralLimit) {
    throw ConfigError("hsic_literal: size guard n <= " + std::to_string(kHsicLiteralLimit));
  }
  auto k = [&](Eigen::Index i, Eigen::Index j) {
    return eval_kernel(kernel_y, data.y.row(i), data.y.row(j));
  };
  auto l = [&](Eigen::Index i, Eigen::Index j) {
    return eval_kernel(kernel_z, data.z.row(i), data.z.row(j));
  };

  double joint = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) joint += k(i, j) * l(i, j);
  }
  double cross = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j1 = 0; j1 < n; ++j1) {
      for (Eigen::Index j2 = 0; j2 < n; ++j2) cross += k(i, j1) * l(i, j2);
    }
  }
  double product = 0.0;
  for (Eigen::Index i1 = 0; i1 < n; ++i1) {
    for (Eigen::Index j1 = 0; j1 < n; ++j1) {
      for (Eigen::Index i2 = 0; i2 < n; ++i2) {
        for (Eigen::Index j2 = 0; j2 < n; ++j2) product += k(i1, j1) * l(i2, j2);
      }
    }
  }
  const double nn = static_cast<double>(n);
  const double value =
      joint / (nn * nn) - 2.0 * cross / (nn * nn * nn) + product / (nn * nn * nn * nn);
  return std::sqrt(std::max(0.0, value));
}

std::vector<double> exact_permutation_distribution(const TestData& data,
                                                   const StatisticKind& kind,
                                                   PermutationScheme scheme) {
  std::vector<double> values;
  if (std::holds_alternative<MmdStatistic>(kind)) {
    if (scheme != PermutationScheme::kFullPooled) {
      throw ConfigError("exact_permutation_distribution: MMD requires FullPooled");
    }
    const auto& two = std::get<TwoSampleData>(data);
    const Eigen::Index n = two.y.rows();
    const Eigen::Index total = n + two.z.rows();
    if (n < 1 || two.z.rows() < 1) throw DataError("exact_permutation_distribution: empty sample");
    if (two.y.cols() != two.z.cols()) {
      throw DataError("exact_permutation_distribution: dimension mismatch");
    }
    if (total > kEnumerationLimit) {
      throw ConfigError("exact_permutation_distribution: size guard pooled size <= " +
                        std::to_string(kEnumerationLimit));
    }
    const Eigen::MatrixXd pooled = pool_rows(two);
    const KernelSpec kernel = std::get<MmdStatistic>(kind).kernel;
    std::vector<int> perm(static_cast<std::size_t>(total));
    std::iota(perm.begin(), perm.end(), 0);
    do {
      values.push_back(mmd_literal(permute_pooled(pooled, n, perm), kernel));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return values;
  }

  if (scheme != PermutationScheme::kPairBreaking) {
    throw ConfigError("exact_permutation_distribution: HSIC requires PairBreaking");
  }
  const auto& paired = std::get<PairedData>(data);
  const Eigen::Index n = paired.y.rows();
  if (n < 1 || paired.z.rows() != n) {
    throw DataError("exact_permutation_distribution: invalid paired sample");
  }
  if (n > kEnumerationLimit) {
    throw ConfigError("exact_permutation_distribution: size guard n <= " +
                      std::to_string(kEnumerationLimit));
  }
  const auto& hsic = std::get<HsicStatistic>(kind);
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  do {
    values.push_back(hsic_literal(permute_pairs(paired, perm), hsic.kernel_y, hsic.kernel_z));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return values;
}

double exhaustive_sensitivity_mmd(const TwoSampleData& data, const KernelSpec& kernel,
                                  const Eigen::MatrixXd& candidates,
                                  int num_sampled_permutations, std::uint64_t seed) {
  validate(data);
  if (candidates.rows() == 0) return 0.0;
  if (candidates.cols() != data.y.cols()) {
    throw DataError("exhaustive_sensitivity_mmd: candidate dimension mismatch");
  }
  const Eigen::Index n = data.y.rows();
  const Eigen::Index total = n + data.z.rows();
  const Eigen::MatrixXd pooled = pool_rows(data);

  std::vector<std::vector<int>> perms;
  std::vector<int> identity(static_cast<std::size_t>(total));
  std::iota(identity.begin(), identity.end(), 0);
  perms.push_back(identity);
  if (num_sampled_permutations > 0) {
    auto sampled =
        sample_permutations(seed, num_sampled_permutations, static_cast<int>(total));
    perms.insert(perms.end(), sampled.begin(), sampled.end());
  }

  double worst = 0.0;
  for (const auto& perm : perms) {
    const double base = mmd_literal(permute_pooled(pooled, n, perm), kernel);
    for (Eigen::Index entry = 0; entry < total; ++entry) {
      for (Eigen::Index c = 0; c < candidates.rows(); ++c) {
        Eigen::MatrixXd modified = pooled;
        modified.row(entry) = candidates.row(c);
        const double changed = mmd_literal(permute_pooled(modified, n, perm), kernel);
        worst = std::max(worst, std::abs(changed - base));
      }
    }
  }
  return worst;
}

double exhaustive_sensitivity_hsic(const PairedData& data, const KernelSpec& kernel_y,
                                   const KernelSpec& kernel_z,
                                   const Eigen::MatrixXd& candidates_y,
                                   const Eigen::MatrixXd& candidates_z,
                                   int num_sampled_permutations, std::uint64_t seed) {
  validate(data);
  if (candidates_y.rows() != candidates_z.rows()) {
    throw DataError("exhaustive_sensitivity_hsic: candidate pair count mismatch");
  }
  if (candidates_y.rows() == 0) return 0.0;
  if (candidates_y.cols() != data.y.cols() || candidates_z.cols() != data.z.cols()) {
    throw DataError("exhaustive_sensitivity_hsic: candidate dimension mismatch");
  }
  const Eigen::Index n = data.y.rows();

  std::vector<std::vector<int>> perms;
  std::vector<int> identity(static_cast<std::size_t>(n));
  std::iota(identity.begin(), identity.end(), 0);
  perms.push_back(identity);
  if (num_sampled_permutations > 0) {
    auto sampled = sample_permutations(seed, num_sampled_permutations, static_cast<int>(n));
    perms.insert(perms.end(), sampled.begin(), sampled.end());
  }

  double worst = 0.0;
  for (const auto& perm : perms) {
    const double base = hsic_literal(permute_pairs(data, perm), kernel_y, kernel_z);
    for (Eigen::Index entry = 0; entry < n; ++entry) {
      for (Eigen::Index c = 0; c < candidates_y.rows(); ++c) {
        PairedData modified = data;
        modified.y.row(entry) = candidates_y.row(c);
        modified.z.row(entry) = candidates_z.row(c);
        const double changed = hsic_literal(permute_pairs(modified, perm), kernel_y, kernel_z);
        worst = std::max(worst, std::abs(changed - base));
      }
    }
  }
  return worst;
}

}  // namespace oracle
}  // namespace robustkern
