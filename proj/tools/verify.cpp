#include "verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "robustkern/corruption.hpp"
#include "robustkern/io.hpp"
#include "robustkern/oracle.hpp"
#include "robustkern/rng.hpp"
#include "robustkern/testing.hpp"

namespace robustkern::verify {

namespace {

bool close_relative(double a, double b, double tol) {
  const double scale = std::max(std::abs(a), std::abs(b));
  if (scale <= 1e-13) return true;
  return std::abs(a - b) <= tol * scale;
}

Eigen::MatrixXd random_matrix(SplitMix64& rng, Eigen::Index rows, Eigen::Index cols,
                              double stddev) {
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = rng.normal(0.0, stddev);
  }
  return out;
}

KernelSpec random_kernel(SplitMix64& rng) {
  const double bandwidth = 0.5 + 2.5 * rng.uniform01();
  return rng.next() % 2 == 0 ? make_gaussian_kernel(bandwidth) : make_laplace_kernel(bandwidth);
}

// The sabotaged MMD: identical to the estimator except the cross term
// enters with the wrong sign. Exists purely so --sabotage demonstrates the
// verifier catches a broken statistic.
double mmd_cross_term_flipped(const TwoSampleData& data, const KernelSpec& kernel) {
  const Eigen::MatrixXd yy = gram_matrix(kernel, data.y);
  const Eigen::MatrixXd zz = gram_matrix(kernel, data.z);
  const Eigen::MatrixXd yz = gram_matrix(kernel, data.y, data.z);
  const double n = static_cast<double>(data.y.rows());
  const double m = static_cast<double>(data.z.rows());
  const double value = yy.sum() / (n * n) + zz.sum() / (m * m) + 2.0 * yz.sum() / (n * m);
  return std::sqrt(std::max(0.0, value));
}

bool check_statistic_agreement(const Options& options, std::ostream& out) {
  SplitMix64 rng(derive_stream(options.seed, {1}));
  for (int trial = 0; trial < options.trials; ++trial) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.bounded(4));
    const KernelSpec kernel = random_kernel(rng);
    if (trial % 2 == 0) {
      const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.bounded(10));
      const Eigen::Index m = 2 + static_cast<Eigen::Index>(rng.bounded(12));
      const TwoSampleData data{random_matrix(rng, n, d, 1.0), random_matrix(rng, m, d, 1.0)};
      const double fast =
          options.sabotage ? mmd_cross_term_flipped(data, kernel) : mmd_stat(data, kernel);
      const double reference = oracle::mmd_literal(data, kernel);
      if (!close_relative(fast, reference, 1e-10)) {
        out << "[FAIL] statistic agreement: MMD trial " << trial << " estimator " << fast
            << " vs literal " << reference << " (n=" << n << ", m=" << m << ", d=" << d << ")\n";
        return false;
      }
    } else {
      const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.bounded(11));
      const KernelSpec kernel_z = random_kernel(rng);
      const PairedData data{random_matrix(rng, n, d, 1.0), random_matrix(rng, n, d, 1.0)};
      const double fast = hsic_stat(data, kernel, kernel_z);
      const double reference = oracle::hsic_literal(data, kernel, kernel_z);
      if (!close_relative(fast, reference, 1e-10)) {
        out << "[FAIL] statistic agreement: HSIC trial " << trial << " estimator " << fast
            << " vs literal " << reference << " (n=" << n << ", d=" << d << ")\n";
        return false;
      }
    }
  }
  out << "[PASS] statistic agreement (" << options.trials << " trials)\n";
  return true;
}

bool check_sensitivity_bound(const Options& options, std::ostream& out) {
  SplitMix64 rng(derive_stream(options.seed, {2}));
  const int replacements = std::max(1000, options.trials);

  // MMD at n = m = 50: every single-entry replacement must move the
  // statistic by at most sqrt(2)/50, under any permutation.
  {
    const Eigen::Index n = 50;
    const Eigen::Index d = 5;
    const TwoSampleData data{random_matrix(rng, n, d, 1.0), random_matrix(rng, n, d, 1.0)};
    Eigen::MatrixXd pooled(2 * n, d);
    pooled << data.y, data.z;
    const KernelSpec kernel =
        make_gaussian_kernel(median_heuristic_bandwidth(pooled, DistanceNorm::kL2));
    const double bound = sensitivity(MmdStatistic{kernel}, n, n);

    for (int trial = 0; trial < replacements; ++trial) {
      const auto entry = static_cast<Eigen::Index>(rng.bounded(static_cast<std::uint64_t>(2 * n)));
      Eigen::MatrixXd modified = pooled;
      const double scale = (trial % 3 == 0) ? 1000.0 : 1.0;
      for (Eigen::Index j = 0; j < d; ++j) modified(entry, j) = rng.normal(scale, 1.0);

      const auto perm = sample_permutations(rng.next(), 1, static_cast<int>(2 * n))[0];
      const TwoSampleData base{pooled.topRows(n), pooled.bottomRows(n)};
      const TwoSampleData changed{modified.topRows(n), modified.bottomRows(n)};
      MmdPermutationEvaluator eval_base(base, kernel);
      MmdPermutationEvaluator eval_changed(changed, kernel);
      const double diff = std::abs(eval_base.statistic(perm) - eval_changed.statistic(perm));
      if (diff > bound + 1e-12) {
        out << "[FAIL] sensitivity bound: MMD replacement moved the statistic by " << diff
            << " > " << bound << " (trial " << trial << ", entry " << entry << ")\n";
        return false;
      }
    }
  }

  // HSIC at n = 50 with its own bound 4 sqrt(KL) (n-1) / n^2.
  {
    const Eigen::Index n = 50;
    const Eigen::Index d = 3;
    const PairedData data{random_matrix(rng, n, d, 1.0), random_matrix(rng, n, d, 1.0)};
    const KernelSpec ky = make_gaussian_kernel(median_heuristic_bandwidth(data.y, DistanceNorm::kL2));
    const KernelSpec kz = make_gaussian_kernel(median_heuristic_bandwidth(data.z, DistanceNorm::kL2));
    const double bound = sensitivity(HsicStatistic{ky, kz}, n, std::nullopt);

    for (int trial = 0; trial < replacements; ++trial) {
      const auto entry = static_cast<Eigen::Index>(rng.bounded(static_cast<std::uint64_t>(n)));
      PairedData modified = data;
      const double scale = (trial % 3 == 0) ? 1000.0 : 1.0;
      for (Eigen::Index j = 0; j < d; ++j) {
        modified.y(entry, j) = rng.normal(scale, 1.0);
        modified.z(entry, j) = rng.normal(-scale, 1.0);
      }
      const auto perm = sample_permutations(rng.next(), 1, static_cast<int>(n))[0];
      HsicPermutationEvaluator eval_base(data, ky, kz);
      HsicPermutationEvaluator eval_changed(modified, ky, kz);
      const double diff = std::abs(eval_base.statistic(perm) - eval_changed.statistic(perm));
      if (diff > bound + 1e-12) {
        out << "[FAIL] sensitivity bound: HSIC replacement moved the statistic by " << diff
            << " > " << bound << " (trial " << trial << ", pair " << entry << ")\n";
        return false;
      }
    }
  }

  // Near-tightness: with a cluster far tighter than the bandwidth and a
  // replacement far beyond it, the MMD bound is nearly attained.
  {
    const Eigen::Index n = 50;
    const Eigen::Index d = 2;
    SplitMix64 local(derive_stream(options.seed, {2, 7}));
    const TwoSampleData data{random_matrix(local, n, d, 0.01), random_matrix(local, n, d, 0.01)};
    const KernelSpec kernel = make_gaussian_kernel(10.0);
    const double bound = sensitivity(MmdStatistic{kernel}, n, n);

    Eigen::MatrixXd pooled(2 * n, d);
    pooled << data.y, data.z;
    Eigen::MatrixXd modified = pooled;
    modified.row(0) = Eigen::RowVectorXd::Constant(d, 1e6);  // 1e5 bandwidths away
    std::vector<int> identity(static_cast<std::size_t>(2 * n));
    std::iota(identity.begin(), identity.end(), 0);
    MmdPermutationEvaluator eval_base(data, kernel);
    MmdPermutationEvaluator eval_changed({modified.topRows(n), modified.bottomRows(n)}, kernel);
    const double diff = std::abs(eval_base.statistic(identity) - eval_changed.statistic(identity));
    if (diff < 0.9 * bound) {
      out << "[FAIL] sensitivity bound: far-away replacement reached only " << diff << " of "
          << bound << "\n";
      return false;
    }
  }

  out << "[PASS] sensitivity bound (" << replacements << " replacements per statistic)\n";
  return true;
}

bool check_quantile_vs_exact(const Options& options, std::ostream& out) {
  SplitMix64 rng(derive_stream(options.seed, {3}));
  const int instances = 5;
  const int num_sampled = 5000;
  const double alpha = 0.05;
  // DKW band at confidence 99%: sup |F_hat - F| <= sqrt(ln(2/0.01) / (2B)).
  const double dkw = std::sqrt(std::log(2.0 / 0.01) / (2.0 * num_sampled));

  for (int instance = 0; instance < instances; ++instance) {
    const TwoSampleData data{random_matrix(rng, 3, 1, 1.0), random_matrix(rng, 4, 1, 1.0)};
    Eigen::MatrixXd pooled(7, 1);
    pooled << data.y, data.z;
    const KernelSpec kernel =
        make_gaussian_kernel(median_heuristic_bandwidth(pooled, DistanceNorm::kL2));
    const StatisticKind kind = MmdStatistic{kernel};

    auto exact = oracle::exact_permutation_distribution(TestData{data}, kind,
                                                        PermutationScheme::kFullPooled);
    const auto sampled = compute_permutation_statistics(
        TestData{data}, kind, PermutationScheme::kFullPooled, num_sampled, rng.next());
    const double q = empirical_quantile(sampled.values, 1.0 - alpha);
    const double lo = empirical_quantile(exact, std::max(0.0, 1.0 - alpha - dkw));
    const double hi = empirical_quantile(exact, std::min(1.0, 1.0 - alpha + dkw));
    if (q < lo || q > hi) {
      out << "[FAIL] quantile vs exact distribution: sampled quantile " << q
          << " outside DKW band [" << lo << ", " << hi << "] (instance " << instance << ")\n";
      return false;
    }
  }
  out << "[PASS] quantile vs exact permutation distribution (" << instances << " instances)\n";
  return true;
}

bool check_laplace_moments(const Options& options, std::ostream& out) {
  const int draws = 100000;
  const auto noise = laplace_noise(derive_stream(options.seed, {4}), draws);
  const double mean = std::accumulate(noise.begin(), noise.end(), 0.0) / draws;
  double var = 0.0;
  int exceed = 0;
  const double ln2 = std::log(2.0);
  for (const double z : noise) {
    var += (z - mean) * (z - mean);
    if (std::abs(z) > ln2) ++exceed;
  }
  var /= draws - 1;
  const double tail = static_cast<double>(exceed) / draws;

  if (std::abs(mean) > 0.02) {
    out << "[FAIL] Laplace moments: mean " << mean << " outside 0 +/- 0.02\n";
    return false;
  }
  if (std::abs(var - 2.0) > 0.05) {
    out << "[FAIL] Laplace moments: variance " << var << " outside 2 +/- 0.05\n";
    return false;
  }
  if (std::abs(tail - 0.5) > 0.01) {
    out << "[FAIL] Laplace moments: P(|z| > ln 2) = " << tail << " outside 0.5 +/- 0.01\n";
    return false;
  }
  out << "[PASS] Laplace moments (mean " << mean << ", variance " << var << ", tail " << tail
      << ")\n";
  return true;
}

}  // namespace

bool run_checks(const Options& options, std::ostream& out) {
  if (options.trials < 1) throw ConfigError("verify: --trials must be >= 1");
  bool ok = true;
  ok = check_statistic_agreement(options, out) && ok;
  ok = check_sensitivity_bound(options, out) && ok;
  ok = check_quantile_vs_exact(options, out) && ok;
  ok = check_laplace_moments(options, out) && ok;
  return ok;
}

}  // namespace robustkern::verify
