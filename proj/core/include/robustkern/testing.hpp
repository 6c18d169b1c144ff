#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "robustkern/statistics.hpp"

namespace robustkern {

enum class Procedure { kClassical, kDc, kDp };

// FullPooled permutes the pooled (n+m)-sequence of a two-sample dataset and
// re-splits it at position n; PairBreaking holds the y side of paired data
// fixed and permutes the z side across pairs. The scheme must match the
// statistic: FullPooled <-> MMD, PairBreaking <-> HSIC.
enum class PermutationScheme { kFullPooled, kPairBreaking };

using TestData = std::variant<TwoSampleData, PairedData>;

struct TestConfig {
  double alpha = 0.05;
  int r = 0;                  // corruption budget (number of samples)
  int num_permutations = 500; // B
  std::uint64_t seed = 0;
  // DP only. If absent, epsilon defaults to r^{-1} max{log(e/alpha),
  // log(e/beta)}; with r = 0 an explicit epsilon is required.
  std::optional<double> epsilon;
  // Second error level entering the default-epsilon formula; defaults to
  // alpha.
  std::optional<double> beta;
};

struct TestReport {
  Procedure procedure = Procedure::kClassical;
  double alpha = 0.0;
  int r = 0;
  int num_permutations = 0;
  std::uint64_t seed = 0;
  double statistic_observed = 0.0;          // T_0
  std::vector<double> permuted_statistics;  // T_1..T_B
  double threshold = 0.0;
  bool reject = false;
  double sensitivity = 0.0;                 // Delta_T
  double adjusted_level = 0.0;              // DP: alpha e^{-r eps}; else alpha
  std::optional<double> epsilon;            // resolved value (DP only)
  std::optional<std::vector<double>> noise_values;  // zeta_0..zeta_B (DP only)
  std::vector<std::string> warnings;
};

bool operator==(const TestReport& a, const TestReport& b);

// B independent uniformly random permutations of {0..size-1}, Fisher-Yates
// from a SplitMix64 stream. Deterministic in (seed, count, size). The
// identity permutation is never sampled here; procedures prepend it as
// index 0 themselves.
std::vector<std::vector<int>> sample_permutations(std::uint64_t seed, int count, int size);

// inf{ t : (1/N) sum_i 1(v_i <= t) >= level } for the N supplied values,
// i.e. the ceil(level*N)-th order statistic. Always an element of `values`.
double empirical_quantile(std::span<const double> values, double level);

// count i.i.d. Laplace(0,1) draws from the given stream seed.
std::vector<double> laplace_noise(std::uint64_t stream_seed, int count);

// epsilon = r^{-1} max{log(e/alpha), log(e/beta)}.
double default_dp_epsilon(double alpha, double beta, int r);

// alpha * exp(-r * epsilon): the level at which the DP procedure tests so
// that group privacy yields level alpha under r corruptions.
double dp_adjusted_level(double alpha, int r, double epsilon);

// Classical permutation test (requires r = 0): reject iff
//   T_0 > quantile_{1-alpha}(T_0..T_B).
TestReport run_classical_test(const TestData& data, const StatisticKind& kind,
                              PermutationScheme scheme, const TestConfig& config);

// Threshold-inflated robust test: reject iff
//   T_0 > quantile_{1-alpha}(T_0..T_B) + 2 r Delta_T.
TestReport run_dc_test(const TestData& data, const StatisticKind& kind, PermutationScheme scheme,
                       const TestConfig& config);

// Laplace-noised, level-adjusted robust test: with M_i = T_i + 2 zeta_i
// Delta_T / epsilon, reject iff M_0 > quantile_{1 - alpha e^{-r eps}}(M_0..M_B).
TestReport run_dp_test(const TestData& data, const StatisticKind& kind, PermutationScheme scheme,
                       const TestConfig& config);

// --- Permuted-statistic engines -------------------------------------------
//
// The Gram matrix of a permuted dataset is the permuted Gram matrix, so each
// engine computes Gram rows once and then evaluates any permutation in
// O(size^2) sums without touching the kernel again.

class MmdPermutationEvaluator {
 public:
  MmdPermutationEvaluator(const TwoSampleData& data, const KernelSpec& kernel);

  // `perm` is a permutation of {0..n+m-1}; positions 0..n-1 select the
  // permuted first sample. Uses the identity S_total = S_YY + S_ZZ + 2 S_YZ
  // and pooled row sums, so one permutation costs one n x n gather.
  double statistic(std::span<const int> perm) const;
  Eigen::Index pooled_size() const { return n_ + m_; }

 private:
  Eigen::Index n_;
  Eigen::Index m_;
  Eigen::MatrixXd gram_;
  Eigen::VectorXd row_sums_;
  double total_;
};

class HsicPermutationEvaluator {
 public:
  HsicPermutationEvaluator(const PairedData& data, const KernelSpec& kernel_y,
                           const KernelSpec& kernel_z);

  // `perm` permutes the z side: pair i becomes (y_i, z_perm[i]).
  //
  // O(n^2) factorization of the V-statistic (K, L the two Gram matrices):
  //   HSIC^2 = (1/n^2) sum_ij K_ij L_ij
  //          - (2/n^3) sum_i Krow_i Lrow_i
  //          + (1/n^4) Ksum Lsum
  // where Krow_i = sum_j K_ij, Ksum = sum_ij K_ij. Under a z-permutation,
  // L_ij becomes L_{perm(i),perm(j)} and Lrow_i becomes Lrow_{perm(i)};
  // the last term is permutation-invariant.
  double statistic(std::span<const int> perm) const;
  Eigen::Index size() const { return n_; }

 private:
  Eigen::Index n_;
  Eigen::MatrixXd k_;
  Eigen::MatrixXd l_;
  Eigen::VectorXd k_rows_;
  Eigen::VectorXd l_rows_;
  double k_total_;
  double l_total_;
};

// Precomputed engine + the B+1 statistics (index 0 = identity) for one
// (data, statistic, scheme, B, seed) tuple. The experiment harness reuses
// this across procedures that share permutations.
struct PermutationStatistics {
  std::vector<double> values;  // size B+1, [0] = T_0
  double sensitivity = 0.0;
  int permutation_size = 0;
};

PermutationStatistics compute_permutation_statistics(const TestData& data,
                                                     const StatisticKind& kind,
                                                     PermutationScheme scheme, int num_permutations,
                                                     std::uint64_t seed);

// Applies one procedure's thresholding to precomputed permutation
// statistics. run_classical_test / run_dc_test / run_dp_test are thin
// wrappers over compute_permutation_statistics + this.
TestReport finalize_report(Procedure procedure, const PermutationStatistics& stats,
                           const TestConfig& config);

// Validates config against data and scheme/kind pairing; throws ConfigError.
// Returns {n, m or nullopt} as seen by sensitivity().
std::pair<Eigen::Index, std::optional<Eigen::Index>> validate_test_inputs(
    const TestData& data, const StatisticKind& kind, PermutationScheme scheme,
    const TestConfig& config, Procedure procedure);

// --- Statistic selection with deferred bandwidths --------------------------

// A kernel whose bandwidth may be deferred to the median heuristic on the
// data actually observed (corrupted data included, by design).
struct KernelChoice {
  KernelFamily family = KernelFamily::kGaussian;
  std::optional<double> bandwidth;  // nullopt = median heuristic
};

struct StatisticChoice {
  enum class Kind { kMmd, kHsic };
  Kind kind = Kind::kMmd;
  KernelChoice kernel_y;  // the only kernel for MMD
  KernelChoice kernel_z;  // HSIC only
};

// Resolves deferred bandwidths: MMD uses the pooled (y;z) rows, HSIC uses
// each side separately. Throws DegenerateDataError if the heuristic is
// undefined for the data.
StatisticKind resolve_statistic(const StatisticChoice& choice, const TestData& data);

PermutationScheme scheme_for(StatisticChoice::Kind kind);

}  // namespace robustkern
