#include <cmath>
#include <numeric>

#include <doctest.h>

#include "robustkern/corruption.hpp"
#include "robustkern/oracle.hpp"
#include "robustkern/rng.hpp"
#include "robustkern/testing.hpp"

using namespace robustkern;

namespace {

Eigen::MatrixXd rows(std::initializer_list<std::initializer_list<double>> values) {
  const auto r = static_cast<Eigen::Index>(values.size());
  const auto c = static_cast<Eigen::Index>(values.begin()->size());
  Eigen::MatrixXd m(r, c);
  Eigen::Index i = 0;
  for (const auto& row : values) {
    Eigen::Index j = 0;
    for (const double x : row) m(i, j++) = x;
    ++i;
  }
  return m;
}

bool close_relative(double a, double b, double tol) {
  const double scale = std::max(std::abs(a), std::abs(b));
  if (scale <= 1e-13) return true;
  return std::abs(a - b) <= tol * scale;
}

Eigen::MatrixXd shuffled_rows(const Eigen::MatrixXd& m, std::uint64_t seed) {
  const auto perm = sample_permutations(seed, 1, static_cast<int>(m.rows()))[0];
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.row(i) = m.row(perm[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace

TEST_CASE("mmd_stat on hand cases") {
  const KernelSpec gaussian = make_gaussian_kernel(1.0);

  const TwoSampleData identical{rows({{0.0}, {2.0}}), rows({{0.0}, {2.0}})};
  CHECK(mmd_stat(identical, gaussian) == 0.0);

  // sqrt(2 (1 - e^{-1/2})) for ((0),(0)) vs ((1),(1)).
  const TwoSampleData shifted{rows({{0.0}, {0.0}}), rows({{1.0}, {1.0}})};
  const double expected = std::sqrt(2.0 * (1.0 - std::exp(-0.5)));
  CHECK(mmd_stat(shifted, gaussian) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(oracle::mmd_literal(shifted, gaussian) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(0.8870956434199947).epsilon(1e-12));
}

TEST_CASE("hsic_stat hand cases") {
  const KernelSpec gaussian = make_gaussian_kernel(1.0);

  // Constant z side: the centered L column vanishes, so HSIC is zero.
  const PairedData constant_z{rows({{0.0}, {1.0}, {2.0}}), rows({{5.0}, {5.0}, {5.0}})};
  CHECK(hsic_stat(constant_z, gaussian, gaussian) == doctest::Approx(0.0).epsilon(1e-12));

  // Two perfectly coupled pairs; frozen from the literal quadruple sum:
  // HSIC^2 = 1/2 + e^{-1}/2 - (1 + e^{-1/2})^2 / 4.
  const PairedData coupled{rows({{0.0}, {1.0}}), rows({{0.0}, {1.0}})};
  const double k01 = std::exp(-0.5);
  const double expected =
      std::sqrt(0.5 + 0.5 * std::exp(-1.0) - 0.25 * (1.0 + k01) * (1.0 + k01));
  const double literal = oracle::hsic_literal(coupled, gaussian, gaussian);
  CHECK(literal == doctest::Approx(expected).epsilon(1e-12));
  CHECK(hsic_stat(coupled, gaussian, gaussian) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("hsic is invariant under joint relabeling of the pairs") {
  SplitMix64 seeds(31);
  const PairedData data{generate(GaussianGenerator{0.0, 1.0, 2}, 9, seeds.next()),
                        generate(GaussianGenerator{0.0, 1.0, 3}, 9, seeds.next())};
  const KernelSpec ky = make_gaussian_kernel(1.2);
  const KernelSpec kz = make_laplace_kernel(0.8);

  const auto perm = sample_permutations(seeds.next(), 1, 9)[0];
  PairedData relabeled;
  relabeled.y.resizeLike(data.y);
  relabeled.z.resizeLike(data.z);
  for (Eigen::Index i = 0; i < 9; ++i) {
    relabeled.y.row(i) = data.y.row(perm[static_cast<std::size_t>(i)]);
    relabeled.z.row(i) = data.z.row(perm[static_cast<std::size_t>(i)]);
  }
  CHECK(hsic_stat(relabeled, ky, kz) ==
        doctest::Approx(hsic_stat(data, ky, kz)).epsilon(1e-12));
}

TEST_CASE("mmd is invariant under within-sample reordering and sample swap at n == m") {
  SplitMix64 seeds(37);
  const TwoSampleData data{generate(GaussianGenerator{0.0, 1.0, 3}, 8, seeds.next()),
                           generate(GaussianGenerator{0.5, 1.0, 3}, 8, seeds.next())};
  const KernelSpec kernel = make_gaussian_kernel(1.0);
  const double base = mmd_stat(data, kernel);

  const TwoSampleData reordered{shuffled_rows(data.y, seeds.next()),
                                shuffled_rows(data.z, seeds.next())};
  CHECK(mmd_stat(reordered, kernel) == doctest::Approx(base).epsilon(1e-12));

  const TwoSampleData swapped{data.z, data.y};
  CHECK(mmd_stat(swapped, kernel) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("statistics are finite and nonnegative on random inputs") {
  SplitMix64 seeds(41);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 1 + static_cast<int>(seeds.bounded(4));
    const TwoSampleData two{generate(GaussianGenerator{0.0, 2.0, d}, 5, seeds.next()),
                            generate(GaussianGenerator{1.0, 0.5, d}, 7, seeds.next())};
    const double mmd = mmd_stat(two, make_gaussian_kernel(0.9));
    CHECK(std::isfinite(mmd));
    CHECK(mmd >= 0.0);

    const PairedData paired{generate(GaussianGenerator{0.0, 1.0, d}, 6, seeds.next()),
                            generate(GaussianGenerator{0.0, 1.0, d}, 6, seeds.next())};
    const double hsic = hsic_stat(paired, make_laplace_kernel(1.1), make_gaussian_kernel(0.7));
    CHECK(std::isfinite(hsic));
    CHECK(hsic >= 0.0);
  }
}

TEST_CASE("sensitivity constants") {
  const StatisticKind mmd = MmdStatistic{make_gaussian_kernel(1.0)};
  CHECK(sensitivity(mmd, 100, 100) == doctest::Approx(0.0141421356).epsilon(1e-9));
  CHECK(sensitivity(mmd, 100, 100) == std::sqrt(2.0) / 100.0);
  CHECK(sensitivity(mmd, 2, 5) == doctest::Approx(0.7071067812).epsilon(1e-9));

  const StatisticKind hsic =
      HsicStatistic{make_gaussian_kernel(1.0), make_gaussian_kernel(1.0)};
  CHECK(sensitivity(hsic, 100, std::nullopt) == doctest::Approx(0.0396).epsilon(1e-12));

  CHECK_THROWS_AS(sensitivity(mmd, 100, std::nullopt), ConfigError);
  CHECK_THROWS_AS(sensitivity(hsic, 100, 100), ConfigError);
  CHECK_THROWS_AS(sensitivity(mmd, 1, 5), ConfigError);
}

TEST_CASE("optimized estimators agree with the literal sums on random instances") {
  SplitMix64 seeds(43);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 1 + static_cast<int>(seeds.bounded(3));
    const double bw = 0.5 + 2.0 * seeds.uniform01();
    const KernelSpec kernel =
        trial % 2 == 0 ? make_gaussian_kernel(bw) : make_laplace_kernel(bw);

    const int n = 2 + static_cast<int>(seeds.bounded(10));
    const int m = 2 + static_cast<int>(seeds.bounded(12));
    const TwoSampleData two{generate(GaussianGenerator{0.0, 1.0, d}, n, seeds.next()),
                            generate(GaussianGenerator{0.3, 1.0, d}, m, seeds.next())};
    CHECK(close_relative(mmd_stat(two, kernel), oracle::mmd_literal(two, kernel), 1e-10));

    const int np = 2 + static_cast<int>(seeds.bounded(11));
    const PairedData paired{generate(GaussianGenerator{0.0, 1.0, d}, np, seeds.next()),
                            generate(GaussianGenerator{0.0, 1.0, d}, np, seeds.next())};
    const KernelSpec kz = make_gaussian_kernel(0.5 + seeds.uniform01());
    CHECK(close_relative(hsic_stat(paired, kernel, kz),
                         oracle::hsic_literal(paired, kernel, kz), 1e-10));
  }
}

TEST_CASE("single-entry replacements never move a statistic past its sensitivity") {
  SplitMix64 seeds(47);

  SUBCASE("mmd") {
    const Eigen::Index n = 20;
    const TwoSampleData data{generate(GaussianGenerator{0.0, 1.0, 3}, n, seeds.next()),
                             generate(GaussianGenerator{0.0, 1.0, 3}, n, seeds.next())};
    const KernelSpec kernel = make_gaussian_kernel(1.5);
    const double bound = sensitivity(MmdStatistic{kernel}, n, n);
    Eigen::MatrixXd pooled(2 * n, 3);
    pooled << data.y, data.z;

    for (int trial = 0; trial < 100; ++trial) {
      Eigen::MatrixXd modified = pooled;
      const auto entry = static_cast<Eigen::Index>(seeds.bounded(2 * n));
      for (int j = 0; j < 3; ++j) modified(entry, j) = seeds.normal(0.0, 100.0);
      const auto perm = sample_permutations(seeds.next(), 1, static_cast<int>(2 * n))[0];
      const MmdPermutationEvaluator eval_base(data, kernel);
      const MmdPermutationEvaluator eval_mod({modified.topRows(n), modified.bottomRows(n)},
                                             kernel);
      CHECK(std::abs(eval_base.statistic(perm) - eval_mod.statistic(perm)) <= bound + 1e-12);
    }
  }

  SUBCASE("hsic") {
    const Eigen::Index n = 20;
    const PairedData data{generate(GaussianGenerator{0.0, 1.0, 2}, n, seeds.next()),
                          generate(GaussianGenerator{0.0, 1.0, 2}, n, seeds.next())};
    const KernelSpec ky = make_gaussian_kernel(1.0);
    const KernelSpec kz = make_laplace_kernel(1.0);
    const double bound = sensitivity(HsicStatistic{ky, kz}, n, std::nullopt);

    for (int trial = 0; trial < 100; ++trial) {
      PairedData modified = data;
      const auto entry = static_cast<Eigen::Index>(seeds.bounded(n));
      for (int j = 0; j < 2; ++j) {
        modified.y(entry, j) = seeds.normal(0.0, 100.0);
        modified.z(entry, j) = seeds.normal(0.0, 100.0);
      }
      const auto perm = sample_permutations(seeds.next(), 1, static_cast<int>(n))[0];
      const HsicPermutationEvaluator eval_base(data, ky, kz);
      const HsicPermutationEvaluator eval_mod(modified, ky, kz);
      CHECK(std::abs(eval_base.statistic(perm) - eval_mod.statistic(perm)) <= bound + 1e-12);
    }
  }
}

TEST_CASE("data validation") {
  CHECK_THROWS_AS(validate(TwoSampleData{rows({{0.0}}), rows({{0.0}, {1.0}})}), DataError);
  CHECK_THROWS_AS(validate(TwoSampleData{rows({{0.0, 1.0}, {1.0, 2.0}}), rows({{0.0}, {1.0}})}),
                  DataError);
  CHECK_THROWS_AS(validate(PairedData{rows({{0.0}}), rows({{0.0}})}), DataError);
  CHECK_THROWS_AS(validate(PairedData{rows({{0.0}, {1.0}}), rows({{0.0}})}), DataError);
}
