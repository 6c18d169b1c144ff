#pragma once

#include <cstdint>
#include <variant>

#include "robustkern/statistics.hpp"

namespace robustkern {

// Per-coordinate i.i.d. generators: Gaussian(mean, stddev) or Geometric(p)
// on {0,1,2,...}, in `dim` independent coordinates.
struct GaussianGenerator {
  double mean = 0.0;
  double stddev = 1.0;
  int dim = 1;
};

struct GeometricGenerator {
  double p = 0.5;
  int dim = 1;
};

using GeneratorSpec = std::variant<GaussianGenerator, GeometricGenerator>;

void validate(const GeneratorSpec& spec);
int generator_dim(const GeneratorSpec& spec);

// n i.i.d. draws, one per row. Deterministic per seed.
Eigen::MatrixXd generate(const GeneratorSpec& spec, int n, std::uint64_t seed);

enum class AttackTarget { kFirstSample, kSecondSample, kPairs };

// Replace the corrupted entries with fresh draws from a generator. For
// two-sample data the target picks which sample loses entries; for paired
// data (target kPairs) each corrupted pair gets independent y and z draws,
// which requires d_y == d_z == generator dim.
struct ReplaceWithGenerator {
  AttackTarget target = AttackTarget::kSecondSample;
  GeneratorSpec generator;
};

// Corrupted pair i becomes (X, X + eps) with X ~ Gaussian(s * mean_scale,
// stddev, d) and eps ~ Gaussian(0, stddev, d); s = +1 for the first
// ceil(c/2) corrupted pairs and -1 for the rest.
struct GaussianPairCoupling {
  double mean_scale = 1000.0;
  double stddev = 0.1;
};

// Corrupted pair i becomes (X + s, X + s + eps) with X ~ Geometric(p, d)
// and eps ~ Gaussian(0, noise_stddev, d); s = 0 for the first ceil(c/2)
// corrupted pairs and `shift` for the rest.
struct GeometricPairCoupling {
  double p = 0.05;
  double shift = 5.0;
  double noise_stddev = 0.1;
};

struct AttackSpec {
  std::variant<ReplaceWithGenerator, GaussianPairCoupling, GeometricPairCoupling> kind;
  int count = 0;  // c: the number of entries actually corrupted
  // Default: the first c indices of the targeted sample. With
  // random_indices, c distinct indices are drawn from the attack seed.
  bool random_indices = false;
};

// Exactly `count` entries replaced; everything else bitwise-unchanged, and
// sizes/dimensions always preserved.
TwoSampleData apply_attack(const TwoSampleData& data, const AttackSpec& attack,
                           std::uint64_t seed);
PairedData apply_attack(const PairedData& data, const AttackSpec& attack, std::uint64_t seed);

}  // namespace robustkern
