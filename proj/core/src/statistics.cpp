#include "robustkern/statistics.hpp"

#include <algorithm>
#include <numeric>

#include "robustkern/testing.hpp"

namespace robustkern {

void validate(const TwoSampleData& data) {
  if (data.y.rows() < 2 || data.z.rows() < 2) {
    throw DataError("two-sample data needs n >= 2 and m >= 2");
  }
  if (data.y.cols() != data.z.cols()) {
    throw DataError("two-sample data: y and z must share one dimension (" +
                    std::to_string(data.y.cols()) + " vs " + std::to_string(data.z.cols()) + ")");
  }
}

void validate(const PairedData& data) {
  if (data.y.rows() < 2) throw DataError("paired data needs n >= 2");
  if (data.y.rows() != data.z.rows()) {
    throw DataError("paired data: y and z must have one row per pair");
  }
}

double mmd_stat(const TwoSampleData& data, const KernelSpec& kernel) {
  validate(data);
  MmdPermutationEvaluator evaluator(data, kernel);
  std::vector<int> identity(static_cast<std::size_t>(evaluator.pooled_size()));
  std::iota(identity.begin(), identity.end(), 0);
  return evaluator.statistic(identity);
}

double hsic_stat(const PairedData& data, const KernelSpec& kernel_y, const KernelSpec& kernel_z) {
  validate(data);
  HsicPermutationEvaluator evaluator(data, kernel_y, kernel_z);
  std::vector<int> identity(static_cast<std::size_t>(evaluator.size()));
  std::iota(identity.begin(), identity.end(), 0);
  return evaluator.statistic(identity);
}

double sensitivity(const StatisticKind& kind, Eigen::Index n, std::optional<Eigen::Index> m) {
  if (const auto* mmd = std::get_if<MmdStatistic>(&kind)) {
    if (!m.has_value()) throw ConfigError("sensitivity: MMD requires both sample sizes");
    if (n < 2 || *m < 2) throw ConfigError("sensitivity: MMD requires n >= 2 and m >= 2");
    const double k_bound = mmd->kernel.bound;
    return std::sqrt(2.0 * k_bound) / static_cast<double>(std::min(n, *m));
  }
  const auto& hsic = std::get<HsicStatistic>(kind);
  if (m.has_value()) throw ConfigError("sensitivity: HSIC takes a single sample size");
  if (n < 2) throw ConfigError("sensitivity: HSIC requires n >= 2");
  const double kl = hsic.kernel_y.bound * hsic.kernel_z.bound;
  const double nn = static_cast<double>(n);
  return 4.0 * std::sqrt(kl) * (nn - 1.0) / (nn * nn);
}

}  // namespace robustkern
