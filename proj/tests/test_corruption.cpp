#include <cmath>

#include <doctest.h>

#include "robustkern/corruption.hpp"
#include "robustkern/rng.hpp"

using namespace robustkern;

namespace {

int hamming_rows(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  REQUIRE(a.rows() == b.rows());
  REQUIRE(a.cols() == b.cols());
  int count = 0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    if (a.row(i) != b.row(i)) ++count;
  }
  return count;
}

int hamming_pairs(const PairedData& a, const PairedData& b) {
  int count = 0;
  for (Eigen::Index i = 0; i < a.y.rows(); ++i) {
    if (a.y.row(i) != b.y.row(i) || a.z.row(i) != b.z.row(i)) ++count;
  }
  return count;
}

}  // namespace

TEST_CASE("generate: shapes and validation") {
  const auto single = generate(GaussianGenerator{0.0, 1.0, 7}, 1, 3);
  CHECK(single.rows() == 1);
  CHECK(single.cols() == 7);

  CHECK_THROWS_AS(generate(GaussianGenerator{0.0, 0.0, 3}, 5, 1), ConfigError);
  CHECK_THROWS_AS(generate(GeometricGenerator{1.0, 3}, 5, 1), ConfigError);
  CHECK_THROWS_AS(generate(GaussianGenerator{0.0, 1.0, 0}, 5, 1), ConfigError);
  CHECK_THROWS_AS(generate(GaussianGenerator{0.0, 1.0, 3}, 0, 1), ConfigError);
}

TEST_CASE("generate: gaussian per-coordinate moments") {
  const auto sample = generate(GaussianGenerator{0.0, 0.1, 50}, 1000, 42);
  for (Eigen::Index j = 0; j < 50; ++j) {
    const double mean = sample.col(j).mean();
    const double sd = std::sqrt((sample.col(j).array() - mean).square().sum() / 999.0);
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(sd - 0.1) < 0.01);
  }
}

TEST_CASE("generate: geometric mean") {
  const auto sample = generate(GeometricGenerator{0.05, 1}, 100000, 7);
  CHECK(std::abs(sample.col(0).mean() - 19.0) < 0.5);
  CHECK(sample.minCoeff() >= 0.0);
  // Integer-valued support.
  for (int i = 0; i < 100; ++i) {
    CHECK(sample(i, 0) == std::floor(sample(i, 0)));
  }
}

TEST_CASE("replace-with-generator attack on two-sample data") {
  const TwoSampleData data{generate(GaussianGenerator{0.0, 1.0, 3}, 10, 1),
                           generate(GaussianGenerator{0.0, 1.0, 3}, 12, 2)};
  const GeneratorSpec far = GaussianGenerator{1000.0, 0.1, 3};

  SUBCASE("c = 0 leaves the data bitwise unchanged") {
    const AttackSpec attack{ReplaceWithGenerator{AttackTarget::kSecondSample, far}, 0, false};
    const auto out = apply_attack(data, attack, 5);
    CHECK(out.y == data.y);
    CHECK(out.z == data.z);
  }

  SUBCASE("c = n replaces the whole first sample") {
    const AttackSpec attack{ReplaceWithGenerator{AttackTarget::kFirstSample, far}, 10, false};
    const auto out = apply_attack(data, attack, 5);
    CHECK(hamming_rows(out.y, data.y) == 10);
    CHECK(out.z == data.z);
  }

  SUBCASE("hamming distance equals c; only leading entries change by default") {
    const AttackSpec attack{ReplaceWithGenerator{AttackTarget::kSecondSample, far}, 4, false};
    const auto out = apply_attack(data, attack, 5);
    CHECK(out.y == data.y);
    CHECK(hamming_rows(out.z, data.z) == 4);
    for (int i = 4; i < 12; ++i) CHECK(out.z.row(i) == data.z.row(i));
    CHECK(out.z.rows() == data.z.rows());
    CHECK(out.z.cols() == data.z.cols());
  }

  SUBCASE("attacks are deterministic per seed") {
    const AttackSpec attack{ReplaceWithGenerator{AttackTarget::kSecondSample, far}, 4, false};
    const auto once = apply_attack(data, attack, 5);
    const auto twice = apply_attack(data, attack, 5);
    CHECK(once.z == twice.z);
    const auto other_seed = apply_attack(data, attack, 6);
    CHECK(other_seed.z != twice.z);
  }

  SUBCASE("random index mode corrupts exactly c rows, not necessarily the first") {
    const AttackSpec attack{ReplaceWithGenerator{AttackTarget::kSecondSample, far}, 3, true};
    const auto out = apply_attack(data, attack, 11);
    CHECK(hamming_rows(out.z, data.z) == 3);
    const auto repeat = apply_attack(data, attack, 11);
    CHECK(out.z == repeat.z);
  }

  SUBCASE("bounds and shape validation") {
    const AttackSpec too_many{ReplaceWithGenerator{AttackTarget::kFirstSample, far}, 11, false};
    CHECK_THROWS_AS(apply_attack(data, too_many, 1), ConfigError);

    const AttackSpec wrong_dim{
        ReplaceWithGenerator{AttackTarget::kFirstSample, GaussianGenerator{0.0, 1.0, 2}}, 1,
        false};
    CHECK_THROWS_AS(apply_attack(data, wrong_dim, 1), ConfigError);

    const AttackSpec pairs_target{ReplaceWithGenerator{AttackTarget::kPairs, far}, 1, false};
    CHECK_THROWS_AS(apply_attack(data, pairs_target, 1), ConfigError);

    const AttackSpec coupling{GaussianPairCoupling{}, 1, false};
    CHECK_THROWS_AS(apply_attack(data, coupling, 1), ConfigError);
  }
}

TEST_CASE("gaussian pair coupling follows the half/half sign rule") {
  const PairedData data{generate(GaussianGenerator{0.0, 0.1, 5}, 9, 21),
                        generate(GaussianGenerator{0.0, 0.1, 5}, 9, 22)};
  const AttackSpec attack{GaussianPairCoupling{1000.0, 0.1}, 4, false};
  const auto out = apply_attack(data, attack, 31);

  CHECK(hamming_pairs(out, data) == 4);
  // Signs (+1, +1, -1, -1) on the corrupted pairs.
  CHECK(out.y.row(0).mean() > 500.0);
  CHECK(out.y.row(1).mean() > 500.0);
  CHECK(out.y.row(2).mean() < -500.0);
  CHECK(out.y.row(3).mean() < -500.0);
  // z = x + eps stays within noise range of y.
  for (int i = 0; i < 4; ++i) {
    CHECK((out.z.row(i) - out.y.row(i)).cwiseAbs().maxCoeff() < 1.0);
  }
  for (int i = 4; i < 9; ++i) {
    CHECK(out.y.row(i) == data.y.row(i));
    CHECK(out.z.row(i) == data.z.row(i));
  }

  // Odd c: ceil(c/2) pairs take the +1 branch.
  const AttackSpec odd{GaussianPairCoupling{1000.0, 0.1}, 3, false};
  const auto odd_out = apply_attack(data, odd, 31);
  CHECK(odd_out.y.row(0).mean() > 500.0);
  CHECK(odd_out.y.row(1).mean() > 500.0);
  CHECK(odd_out.y.row(2).mean() < -500.0);
}

TEST_CASE("geometric pair coupling shifts the second half") {
  const PairedData data{generate(GaussianGenerator{0.0, 0.1, 40}, 8, 23),
                        generate(GaussianGenerator{0.0, 0.1, 40}, 8, 24)};
  const AttackSpec attack{GeometricPairCoupling{0.05, 5.0, 0.1}, 4, false};
  const auto out = apply_attack(data, attack, 41);

  CHECK(hamming_pairs(out, data) == 4);
  // First ceil(c/2) corrupted pairs keep s = 0 (bare geometric draws reach 0
  // somewhere in 40 coordinates); the rest sit at s = 5 or above.
  CHECK(out.y.row(0).minCoeff() < 5.0);
  CHECK(out.y.row(1).minCoeff() < 5.0);
  CHECK(out.y.row(2).minCoeff() >= 5.0);
  CHECK(out.y.row(3).minCoeff() >= 5.0);
  // y entries are integer lattice points (geometric + integer shift).
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 40; ++j) CHECK(out.y(i, j) == std::floor(out.y(i, j)));
    CHECK((out.z.row(i) - out.y.row(i)).cwiseAbs().maxCoeff() < 1.0);
  }
}

TEST_CASE("pair replacement with a generator requires matching dimensions") {
  const PairedData data{generate(GaussianGenerator{0.0, 1.0, 3}, 6, 51),
                        generate(GaussianGenerator{0.0, 1.0, 3}, 6, 52)};
  const AttackSpec attack{
      ReplaceWithGenerator{AttackTarget::kPairs, GaussianGenerator{100.0, 1.0, 3}}, 2, false};
  const auto out = apply_attack(data, attack, 61);
  CHECK(hamming_pairs(out, data) == 2);
  CHECK(out.y.row(0).mean() > 50.0);
  CHECK(out.z.row(0).mean() > 50.0);

  const AttackSpec mismatched{
      ReplaceWithGenerator{AttackTarget::kPairs, GaussianGenerator{0.0, 1.0, 2}}, 1, false};
  CHECK_THROWS_AS(apply_attack(data, mismatched, 1), ConfigError);

  const AttackSpec sample_target{
      ReplaceWithGenerator{AttackTarget::kFirstSample, GaussianGenerator{0.0, 1.0, 3}}, 1, false};
  CHECK_THROWS_AS(apply_attack(data, sample_target, 1), ConfigError);
}
