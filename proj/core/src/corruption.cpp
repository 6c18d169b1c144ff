#include "robustkern/corruption.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "robustkern/rng.hpp"

namespace robustkern {

void validate(const GeneratorSpec& spec) {
  std::visit(
      [](const auto& g) {
        if (g.dim < 1) throw ConfigError("generator dimension must be >= 1");
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, GaussianGenerator>) {
          if (!(g.stddev > 0.0)) throw ConfigError("Gaussian generator requires stddev > 0");
        } else {
          if (!(g.p > 0.0 && g.p < 1.0)) {
            throw ConfigError("Geometric generator requires p strictly inside (0, 1)");
          }
        }
      },
      spec);
}

int generator_dim(const GeneratorSpec& spec) {
  return std::visit([](const auto& g) { return g.dim; }, spec);
}

namespace {

void fill_row(Eigen::MatrixXd& out, Eigen::Index row, const GeneratorSpec& spec, SplitMix64& rng) {
  if (const auto* gauss = std::get_if<GaussianGenerator>(&spec)) {
    for (int d = 0; d < gauss->dim; ++d) out(row, d) = rng.normal(gauss->mean, gauss->stddev);
  } else {
    const auto& geom = std::get<GeometricGenerator>(spec);
    for (int d = 0; d < geom.dim; ++d) {
      out(row, d) = static_cast<double>(rng.geometric(geom.p));
    }
  }
}

Eigen::VectorXd draw_vector(const GeneratorSpec& spec, SplitMix64& rng) {
  Eigen::MatrixXd row(1, generator_dim(spec));
  fill_row(row, 0, spec, rng);
  return row.row(0);
}

// Indices to corrupt within [0, size): first `count` by default, or a
// seeded draw of `count` distinct indices. Returned ascending either way.
std::vector<Eigen::Index> corrupted_indices(Eigen::Index size, int count, bool random_indices,
                                            SplitMix64& rng) {
  std::vector<Eigen::Index> indices;
  if (!random_indices) {
    indices.resize(static_cast<std::size_t>(count));
    std::iota(indices.begin(), indices.end(), 0);
    return indices;
  }
  std::vector<Eigen::Index> all(static_cast<std::size_t>(size));
  std::iota(all.begin(), all.end(), 0);
  for (int i = 0; i < count; ++i) {
    const auto j =
        i + static_cast<Eigen::Index>(rng.bounded(static_cast<std::uint64_t>(size - i)));
    std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(j)]);
  }
  indices.assign(all.begin(), all.begin() + count);
  std::sort(indices.begin(), indices.end());
  return indices;
}

void check_count(int count, Eigen::Index bound, const char* what) {
  if (count < 0) throw ConfigError("attack count must be nonnegative");
  if (count > bound) {
    throw ConfigError(std::string("attack count ") + std::to_string(count) + " exceeds " + what +
                      " size " + std::to_string(bound));
  }
}

}  // namespace

Eigen::MatrixXd generate(const GeneratorSpec& spec, int n, std::uint64_t seed) {
  validate(spec);
  if (n < 1) throw ConfigError("generate: n must be >= 1");
  SplitMix64 rng(seed);
  Eigen::MatrixXd out(n, generator_dim(spec));
  for (Eigen::Index i = 0; i < n; ++i) fill_row(out, i, spec, rng);
  return out;
}

TwoSampleData apply_attack(const TwoSampleData& data, const AttackSpec& attack,
                           std::uint64_t seed) {
  validate(data);
  const auto* replace = std::get_if<ReplaceWithGenerator>(&attack.kind);
  if (replace == nullptr) {
    throw ConfigError("pair-coupling attacks require paired data");
  }
  if (replace->target == AttackTarget::kPairs) {
    throw ConfigError("target 'pairs' requires paired data");
  }
  validate(replace->generator);

  TwoSampleData out = data;
  Eigen::MatrixXd& target =
      replace->target == AttackTarget::kFirstSample ? out.y : out.z;
  check_count(attack.count, target.rows(), "targeted sample");
  if (generator_dim(replace->generator) != target.cols()) {
    throw ConfigError("attack generator dimension does not match the data");
  }
  SplitMix64 rng(derive_stream(seed, Stream::kAttack));
  const auto indices = corrupted_indices(target.rows(), attack.count, attack.random_indices, rng);
  for (const Eigen::Index i : indices) fill_row(target, i, replace->generator, rng);
  return out;
}

PairedData apply_attack(const PairedData& data, const AttackSpec& attack, std::uint64_t seed) {
  validate(data);
  PairedData out = data;
  check_count(attack.count, out.y.rows(), "paired sample");
  SplitMix64 rng(derive_stream(seed, Stream::kAttack));
  const auto indices = corrupted_indices(out.y.rows(), attack.count, attack.random_indices, rng);
  // Half/half rules put the first ceil(c/2) corrupted pairs in the first
  // branch.
  const std::size_t first_branch = (static_cast<std::size_t>(attack.count) + 1) / 2;

  if (const auto* replace = std::get_if<ReplaceWithGenerator>(&attack.kind)) {
    if (replace->target != AttackTarget::kPairs) {
      throw ConfigError("two-sample attack targets require two-sample data");
    }
    validate(replace->generator);
    if (generator_dim(replace->generator) != out.y.cols() ||
        generator_dim(replace->generator) != out.z.cols()) {
      throw ConfigError("pair replacement requires d_y == d_z == generator dimension");
    }
    for (const Eigen::Index i : indices) {
      fill_row(out.y, i, replace->generator, rng);
      fill_row(out.z, i, replace->generator, rng);
    }
    return out;
  }

  if (out.y.cols() != out.z.cols()) {
    throw ConfigError("pair-coupling attacks require d_y == d_z");
  }
  const int dim = static_cast<int>(out.y.cols());

  if (const auto* coupling = std::get_if<GaussianPairCoupling>(&attack.kind)) {
    if (!(coupling->stddev > 0.0)) throw ConfigError("coupling stddev must be positive");
    const GeneratorSpec noise = GaussianGenerator{0.0, coupling->stddev, dim};
    for (std::size_t pos = 0; pos < indices.size(); ++pos) {
      const double sign = pos < first_branch ? 1.0 : -1.0;
      const GeneratorSpec base = GaussianGenerator{sign * coupling->mean_scale, coupling->stddev, dim};
      const Eigen::VectorXd x = draw_vector(base, rng);
      const Eigen::VectorXd eps = draw_vector(noise, rng);
      out.y.row(indices[pos]) = x;
      out.z.row(indices[pos]) = x + eps;
    }
    return out;
  }

  const auto& coupling = std::get<GeometricPairCoupling>(attack.kind);
  if (!(coupling.p > 0.0 && coupling.p < 1.0)) {
    throw ConfigError("coupling parameter p must lie strictly inside (0, 1)");
  }
  if (!(coupling.noise_stddev > 0.0)) throw ConfigError("coupling noise_stddev must be positive");
  const GeneratorSpec base = GeometricGenerator{coupling.p, dim};
  const GeneratorSpec noise = GaussianGenerator{0.0, coupling.noise_stddev, dim};
  for (std::size_t pos = 0; pos < indices.size(); ++pos) {
    const double shift = pos < first_branch ? 0.0 : coupling.shift;
    const Eigen::VectorXd x =
        draw_vector(base, rng) + Eigen::VectorXd::Constant(dim, shift);
    const Eigen::VectorXd eps = draw_vector(noise, rng);
    out.y.row(indices[pos]) = x;
    out.z.row(indices[pos]) = x + eps;
  }
  return out;
}

}  // namespace robustkern
