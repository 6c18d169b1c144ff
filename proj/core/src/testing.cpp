#include "robustkern/testing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "robustkern/parallel.hpp"
#include "robustkern/rng.hpp"

namespace robustkern {

bool operator==(const TestReport& a, const TestReport& b) {
  return a.procedure == b.procedure && a.alpha == b.alpha && a.r == b.r &&
         a.num_permutations == b.num_permutations && a.seed == b.seed &&
         a.statistic_observed == b.statistic_observed &&
         a.permuted_statistics == b.permuted_statistics && a.threshold == b.threshold &&
         a.reject == b.reject && a.sensitivity == b.sensitivity &&
         a.adjusted_level == b.adjusted_level && a.epsilon == b.epsilon &&
         a.noise_values == b.noise_values && a.warnings == b.warnings;
}

std::vector<std::vector<int>> sample_permutations(std::uint64_t seed, int count, int size) {
  if (count < 1) throw ConfigError("sample_permutations: count must be >= 1");
  if (size < 2) throw ConfigError("sample_permutations: size must be >= 2");
  SplitMix64 rng(seed);
  std::vector<std::vector<int>> perms(static_cast<std::size_t>(count));
  for (auto& perm : perms) {
    perm.resize(static_cast<std::size_t>(size));
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = size - 1; i > 0; --i) {
      const auto j = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(i) + 1));
      std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
  }
  return perms;
}

double empirical_quantile(std::span<const double> values, double level) {
  if (values.empty()) throw ConfigError("empirical_quantile: empty value list");
  const auto n = static_cast<double>(values.size());
  const double t = level * n;
  // Snap near-integer products down so that e.g. level*N representing an
  // exact integer never rounds up an order-statistic index.
  std::size_t k;
  if (t - std::floor(t) < 1e-9) {
    k = static_cast<std::size_t>(std::floor(t));
  } else {
    k = static_cast<std::size_t>(std::ceil(t));
  }
  k = std::clamp<std::size_t>(k, 1, values.size());
  std::vector<double> sorted(values.begin(), values.end());
  auto nth = sorted.begin() + static_cast<std::ptrdiff_t>(k - 1);
  std::nth_element(sorted.begin(), nth, sorted.end());
  return *nth;
}

std::vector<double> laplace_noise(std::uint64_t stream_seed, int count) {
  if (count < 1) throw ConfigError("laplace_noise: count must be >= 1");
  SplitMix64 rng(stream_seed);
  std::vector<double> noise(static_cast<std::size_t>(count));
  for (auto& z : noise) z = rng.laplace();
  return noise;
}

double default_dp_epsilon(double alpha, double beta, int r) {
  if (r <= 0) {
    throw ConfigError("default epsilon is undefined for r = 0; pass epsilon explicitly");
  }
  const double e = std::exp(1.0);
  return std::max(std::log(e / alpha), std::log(e / beta)) / static_cast<double>(r);
}

double dp_adjusted_level(double alpha, int r, double epsilon) {
  return alpha * std::exp(-static_cast<double>(r) * epsilon);
}

// --- evaluators -------------------------------------------------------------

MmdPermutationEvaluator::MmdPermutationEvaluator(const TwoSampleData& data,
                                                 const KernelSpec& kernel)
    : n_(data.y.rows()), m_(data.z.rows()) {
  validate(data);
  Eigen::MatrixXd pooled(n_ + m_, data.y.cols());
  pooled << data.y, data.z;
  gram_ = gram_matrix(kernel, pooled);
  row_sums_ = gram_.rowwise().sum();
  total_ = row_sums_.sum();
}

double MmdPermutationEvaluator::statistic(std::span<const int> perm) const {
  const Eigen::Index size = n_ + m_;
  if (static_cast<Eigen::Index>(perm.size()) != size) {
    throw ConfigError("MmdPermutationEvaluator: permutation size mismatch");
  }
  // Sorted selection improves Gram access locality; the fixed order also
  // keeps the summation deterministic for a given permutation.
  std::vector<int> selected(perm.begin(), perm.begin() + n_);
  std::sort(selected.begin(), selected.end());

  const double* gram = gram_.data();
  double s_yy = 0.0;
  double selected_row_total = 0.0;
  for (const int a : selected) {
    selected_row_total += row_sums_[a];
    const double* column = gram + static_cast<std::ptrdiff_t>(a) * size;
    double acc = 0.0;
    for (const int b : selected) acc += column[b];
    s_yy += acc;
  }
  const double s_yz = selected_row_total - s_yy;
  const double s_zz = total_ + s_yy - 2.0 * selected_row_total;

  const double n = static_cast<double>(n_);
  const double m = static_cast<double>(m_);
  const double value = s_yy / (n * n) + s_zz / (m * m) - 2.0 * s_yz / (n * m);
  return std::sqrt(std::max(0.0, value));
}

HsicPermutationEvaluator::HsicPermutationEvaluator(const PairedData& data,
                                                   const KernelSpec& kernel_y,
                                                   const KernelSpec& kernel_z)
    : n_(data.y.rows()) {
  validate(data);
  k_ = gram_matrix(kernel_y, data.y);
  l_ = gram_matrix(kernel_z, data.z);
  k_rows_ = k_.rowwise().sum();
  l_rows_ = l_.rowwise().sum();
  k_total_ = k_rows_.sum();
  l_total_ = l_rows_.sum();
}

double HsicPermutationEvaluator::statistic(std::span<const int> perm) const {
  if (static_cast<Eigen::Index>(perm.size()) != n_) {
    throw ConfigError("HsicPermutationEvaluator: permutation size mismatch");
  }
  const double* k = k_.data();
  const double* l = l_.data();
  double joint = 0.0;
  double row_term = 0.0;
  for (Eigen::Index i = 0; i < n_; ++i) {
    const int pi = perm[static_cast<std::size_t>(i)];
    row_term += k_rows_[i] * l_rows_[pi];
    const double* k_column = k + i * n_;
    const double* l_column = l + static_cast<std::ptrdiff_t>(pi) * n_;
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n_; ++j) {
      acc += k_column[j] * l_column[perm[static_cast<std::size_t>(j)]];
    }
    joint += acc;
  }
  const double n = static_cast<double>(n_);
  const double value =
      joint / (n * n) - 2.0 * row_term / (n * n * n) + k_total_ * l_total_ / (n * n * n * n);
  return std::sqrt(std::max(0.0, value));
}

// --- test procedures --------------------------------------------------------

namespace {

struct StructureInfo {
  Eigen::Index n = 0;
  std::optional<Eigen::Index> m;
  int permutation_size = 0;
};

StructureInfo check_structure(const TestData& data, const StatisticKind& kind,
                              PermutationScheme scheme) {
  StructureInfo info;
  if (std::holds_alternative<MmdStatistic>(kind)) {
    if (scheme != PermutationScheme::kFullPooled) {
      throw ConfigError("MMD requires the FullPooled permutation scheme");
    }
    const auto* two = std::get_if<TwoSampleData>(&data);
    if (two == nullptr) throw ConfigError("MMD requires two-sample data");
    validate(*two);
    info.n = two->y.rows();
    info.m = two->z.rows();
    info.permutation_size = static_cast<int>(info.n + *info.m);
  } else {
    if (scheme != PermutationScheme::kPairBreaking) {
      throw ConfigError("HSIC requires the PairBreaking permutation scheme");
    }
    const auto* paired = std::get_if<PairedData>(&data);
    if (paired == nullptr) throw ConfigError("HSIC requires paired data");
    validate(*paired);
    info.n = paired->y.rows();
    info.permutation_size = static_cast<int>(info.n);
  }
  return info;
}

void append_budget_warnings(TestReport& report, const TestConfig& config, Procedure procedure) {
  const double alpha = config.alpha;
  const double beta = config.beta.value_or(alpha);
  if (procedure == Procedure::kDp) {
    const double eps = report.epsilon.value();
    const double alpha_dp = dp_adjusted_level(alpha, config.r, eps);
    const double beta_dp = beta * std::exp(-static_cast<double>(config.r) * eps);
    if (alpha_dp <= 1.0 / (config.num_permutations + 1.0)) {
      report.warnings.push_back("adjusted level " + std::to_string(alpha_dp) +
                                " <= 1/(B+1): test is powerless at this B");
    }
    const double needed = 6.0 / alpha_dp * std::log(2.0 / beta_dp);
    if (static_cast<double>(config.num_permutations) < needed) {
      report.warnings.push_back("B=" + std::to_string(config.num_permutations) +
                                " is below the sufficient DP permutation count " +
                                std::to_string(needed));
    }
  } else {
    const double needed =
        3.0 / (alpha * alpha) * (std::log(8.0 / beta) + alpha * (1.0 - alpha));
    if (static_cast<double>(config.num_permutations) < needed) {
      report.warnings.push_back("B=" + std::to_string(config.num_permutations) +
                                " is below the sufficient DC permutation count " +
                                std::to_string(needed));
    }
  }
}

TestReport run_procedure(Procedure procedure, const TestData& data, const StatisticKind& kind,
                         PermutationScheme scheme, const TestConfig& config) {
  validate_test_inputs(data, kind, scheme, config, procedure);
  const PermutationStatistics stats =
      compute_permutation_statistics(data, kind, scheme, config.num_permutations, config.seed);
  return finalize_report(procedure, stats, config);
}

}  // namespace

std::pair<Eigen::Index, std::optional<Eigen::Index>> validate_test_inputs(
    const TestData& data, const StatisticKind& kind, PermutationScheme scheme,
    const TestConfig& config, Procedure procedure) {
  const StructureInfo info = check_structure(data, kind, scheme);

  if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
    throw ConfigError("alpha must lie strictly between 0 and 1");
  }
  if (config.num_permutations < 1) throw ConfigError("num_permutations must be >= 1");
  if (config.r < 0) throw ConfigError("corruption budget r must be nonnegative");
  if (config.beta.has_value() && !(*config.beta > 0.0 && *config.beta < 1.0)) {
    throw ConfigError("beta must lie strictly between 0 and 1");
  }

  const Eigen::Index budget_bound = info.m.has_value() ? std::min(info.n, *info.m) : info.n;
  if (static_cast<Eigen::Index>(config.r) > budget_bound) {
    throw ConfigError("corruption budget r=" + std::to_string(config.r) +
                      " exceeds the admissible bound " + std::to_string(budget_bound));
  }

  switch (procedure) {
    case Procedure::kClassical:
      if (config.r != 0) {
        throw ConfigError("classical test requires r = 0; use the DC procedure for r > 0");
      }
      break;
    case Procedure::kDc:
      break;
    case Procedure::kDp:
      if (config.epsilon.has_value()) {
        if (!(*config.epsilon > 0.0) || !std::isfinite(*config.epsilon)) {
          throw ConfigError("epsilon must be a positive finite real");
        }
      } else if (config.r == 0) {
        throw ConfigError("DP with r = 0 requires an explicit epsilon (the default formula "
                          "divides by r)");
      }
      break;
  }
  return {info.n, info.m};
}

PermutationStatistics compute_permutation_statistics(const TestData& data,
                                                     const StatisticKind& kind,
                                                     PermutationScheme scheme,
                                                     int num_permutations, std::uint64_t seed) {
  const StructureInfo info = check_structure(data, kind, scheme);
  if (num_permutations < 1) throw ConfigError("num_permutations must be >= 1");

  PermutationStatistics out;
  out.permutation_size = info.permutation_size;
  out.sensitivity = sensitivity(kind, info.n, info.m);
  out.values.assign(static_cast<std::size_t>(num_permutations) + 1, 0.0);

  const auto perms = sample_permutations(derive_stream(seed, Stream::kPermutations),
                                         num_permutations, info.permutation_size);
  std::vector<int> identity(static_cast<std::size_t>(info.permutation_size));
  std::iota(identity.begin(), identity.end(), 0);

  if (std::holds_alternative<MmdStatistic>(kind)) {
    const MmdPermutationEvaluator evaluator(std::get<TwoSampleData>(data),
                                            std::get<MmdStatistic>(kind).kernel);
    out.values[0] = evaluator.statistic(identity);
    parallel_for(num_permutations, [&](std::int64_t i) {
      out.values[static_cast<std::size_t>(i) + 1] =
          evaluator.statistic(perms[static_cast<std::size_t>(i)]);
    });
  } else {
    const auto& hsic = std::get<HsicStatistic>(kind);
    const HsicPermutationEvaluator evaluator(std::get<PairedData>(data), hsic.kernel_y,
                                             hsic.kernel_z);
    out.values[0] = evaluator.statistic(identity);
    parallel_for(num_permutations, [&](std::int64_t i) {
      out.values[static_cast<std::size_t>(i) + 1] =
          evaluator.statistic(perms[static_cast<std::size_t>(i)]);
    });
  }
  return out;
}

TestReport finalize_report(Procedure procedure, const PermutationStatistics& stats,
                           const TestConfig& config) {
  if (stats.values.size() != static_cast<std::size_t>(config.num_permutations) + 1) {
    throw ConfigError("finalize_report: statistics length does not match num_permutations");
  }
  TestReport report;
  report.procedure = procedure;
  report.alpha = config.alpha;
  report.r = config.r;
  report.num_permutations = config.num_permutations;
  report.seed = config.seed;
  report.sensitivity = stats.sensitivity;
  report.statistic_observed = stats.values[0];
  report.permuted_statistics.assign(stats.values.begin() + 1, stats.values.end());

  if (procedure == Procedure::kDp) {
    const double beta = config.beta.value_or(config.alpha);
    const double eps =
        config.epsilon.has_value() ? *config.epsilon : default_dp_epsilon(config.alpha, beta, config.r);
    report.epsilon = eps;
    report.adjusted_level = dp_adjusted_level(config.alpha, config.r, eps);

    auto noise = laplace_noise(derive_stream(config.seed, Stream::kNoise),
                               config.num_permutations + 1);
    std::vector<double> noisy(stats.values.size());
    const double scale = 2.0 * stats.sensitivity / eps;
    for (std::size_t i = 0; i < noisy.size(); ++i) {
      noisy[i] = stats.values[i] + scale * noise[i];
    }
    report.noise_values = std::move(noise);
    report.threshold = empirical_quantile(noisy, 1.0 - report.adjusted_level);
    report.reject = noisy[0] > report.threshold;
  } else {
    report.adjusted_level = config.alpha;
    const double quantile = empirical_quantile(stats.values, 1.0 - config.alpha);
    report.threshold = quantile + 2.0 * static_cast<double>(config.r) * stats.sensitivity;
    report.reject = report.statistic_observed > report.threshold;
  }
  append_budget_warnings(report, config, procedure);
  return report;
}

TestReport run_classical_test(const TestData& data, const StatisticKind& kind,
                              PermutationScheme scheme, const TestConfig& config) {
  return run_procedure(Procedure::kClassical, data, kind, scheme, config);
}

TestReport run_dc_test(const TestData& data, const StatisticKind& kind, PermutationScheme scheme,
                       const TestConfig& config) {
  return run_procedure(Procedure::kDc, data, kind, scheme, config);
}

TestReport run_dp_test(const TestData& data, const StatisticKind& kind, PermutationScheme scheme,
                       const TestConfig& config) {
  return run_procedure(Procedure::kDp, data, kind, scheme, config);
}

// --- statistic selection ----------------------------------------------------

PermutationScheme scheme_for(StatisticChoice::Kind kind) {
  return kind == StatisticChoice::Kind::kMmd ? PermutationScheme::kFullPooled
                                             : PermutationScheme::kPairBreaking;
}

namespace {

KernelSpec resolve_kernel(const KernelChoice& choice,
                          const Eigen::Ref<const Eigen::MatrixXd>& points) {
  const double bandwidth = choice.bandwidth.has_value()
                               ? *choice.bandwidth
                               : median_heuristic_bandwidth(points, norm_for(choice.family));
  KernelSpec spec{choice.family, bandwidth, 1.0};
  validate(spec);
  return spec;
}

}  // namespace

StatisticKind resolve_statistic(const StatisticChoice& choice, const TestData& data) {
  if (choice.kind == StatisticChoice::Kind::kMmd) {
    const auto* two = std::get_if<TwoSampleData>(&data);
    if (two == nullptr) throw ConfigError("MMD requires two-sample data");
    validate(*two);
    Eigen::MatrixXd pooled(two->y.rows() + two->z.rows(), two->y.cols());
    pooled << two->y, two->z;
    return MmdStatistic{resolve_kernel(choice.kernel_y, pooled)};
  }
  const auto* paired = std::get_if<PairedData>(&data);
  if (paired == nullptr) throw ConfigError("HSIC requires paired data");
  validate(*paired);
  return HsicStatistic{resolve_kernel(choice.kernel_y, paired->y),
                       resolve_kernel(choice.kernel_z, paired->z)};
}

}  // namespace robustkern
