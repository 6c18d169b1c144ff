#include "robustkern/harness.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "robustkern/parallel.hpp"
#include "robustkern/rng.hpp"

namespace robustkern {

WilsonInterval wilson_interval(int successes, int trials) {
  if (trials <= 0) throw ConfigError("wilson_interval: trials must be positive");
  if (successes < 0 || successes > trials) {
    throw ConfigError("wilson_interval: successes out of range");
  }
  const double z = 1.959963984540054;  // 97.5% standard normal quantile
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

namespace {

void validate_spec(const ExperimentSpec& spec) {
  if (spec.repetitions < 1) throw ConfigError("experiment: repetitions must be >= 1");
  if (spec.tests.empty()) throw ConfigError("experiment: at least one test is required");
  if (spec.corruption_grid.empty()) throw ConfigError("experiment: empty corruption grid");
  validate(spec.scenario.generator_y);
  validate(spec.scenario.generator_z);

  if (spec.scenario.paired) {
    if (spec.scenario.n < 2) throw ConfigError("experiment: paired scenario needs n >= 2");
  } else {
    if (spec.scenario.n < 2 || spec.scenario.m < 2) {
      throw ConfigError("experiment: two-sample scenario needs n >= 2 and m >= 2");
    }
  }

  int grid_bound;
  if (const auto* replace = std::get_if<ReplaceWithGenerator>(&spec.attack.kind)) {
    switch (replace->target) {
      case AttackTarget::kFirstSample:
        grid_bound = spec.scenario.n;
        break;
      case AttackTarget::kSecondSample:
        grid_bound = spec.scenario.paired ? spec.scenario.n : spec.scenario.m;
        break;
      case AttackTarget::kPairs:
      default:
        grid_bound = spec.scenario.n;
        break;
    }
  } else {
    grid_bound = spec.scenario.n;
  }
  for (const int c : spec.corruption_grid) {
    if (c < 0 || c > grid_bound) {
      throw ConfigError("experiment: grid value " + std::to_string(c) +
                        " outside the attackable sample size " + std::to_string(grid_bound));
    }
  }

  std::set<std::string> names;
  for (const auto& test : spec.tests) {
    if (test.name.empty()) throw ConfigError("experiment: every test needs a name");
    if (!names.insert(test.name).second) {
      throw ConfigError("experiment: duplicate test name '" + test.name + "'");
    }
    const bool wants_paired = test.statistic.kind == StatisticChoice::Kind::kHsic;
    if (wants_paired != spec.scenario.paired) {
      throw ConfigError("experiment: test '" + test.name +
                        "' statistic does not match the scenario data shape");
    }
  }
}

TestData make_data(const ScenarioSpec& scenario, std::uint64_t base_seed, int rep) {
  const std::uint64_t seed_y = derive_stream(
      base_seed, {static_cast<std::uint64_t>(rep), static_cast<std::uint64_t>(Stream::kData), 0});
  const std::uint64_t seed_z = derive_stream(
      base_seed, {static_cast<std::uint64_t>(rep), static_cast<std::uint64_t>(Stream::kData), 1});
  if (scenario.paired) {
    return PairedData{generate(scenario.generator_y, scenario.n, seed_y),
                      generate(scenario.generator_z, scenario.n, seed_z)};
  }
  return TwoSampleData{generate(scenario.generator_y, scenario.n, seed_y),
                       generate(scenario.generator_z, scenario.m, seed_z)};
}

TestData corrupt(const TestData& data, const AttackSpec& attack, std::uint64_t seed) {
  if (const auto* two = std::get_if<TwoSampleData>(&data)) {
    return apply_attack(*two, attack, seed);
  }
  return apply_attack(std::get<PairedData>(data), attack, seed);
}

// Cache key for sharing permuted statistics between procedures in one cell:
// tests agree whenever their statistic choice and permutation count agree
// (the cell seed is common, so the permutations are too).
struct StatsKey {
  StatisticChoice::Kind kind;
  KernelFamily family_y;
  double bandwidth_y;
  KernelFamily family_z;
  double bandwidth_z;
  int num_permutations;

  bool operator==(const StatsKey&) const = default;
};

StatsKey key_for(const TestSpec& test) {
  const auto& s = test.statistic;
  return StatsKey{s.kind,
                  s.kernel_y.family,
                  s.kernel_y.bandwidth.value_or(-1.0),
                  s.kernel_z.family,
                  s.kernel_z.bandwidth.value_or(-1.0),
                  test.config.num_permutations};
}

}  // namespace

std::vector<CurvePoint> run_experiment(const ExperimentSpec& spec) {
  validate_spec(spec);

  const std::size_t num_grid = spec.corruption_grid.size();
  const std::size_t num_tests = spec.tests.size();
  const std::int64_t cells = static_cast<std::int64_t>(spec.repetitions) *
                             static_cast<std::int64_t>(num_grid);
  std::vector<std::uint8_t> rejects(static_cast<std::size_t>(cells) * num_tests, 0);

  parallel_for(cells, [&](std::int64_t cell) {
    const int rep = static_cast<int>(cell / static_cast<std::int64_t>(num_grid));
    const std::size_t grid_index =
        static_cast<std::size_t>(cell % static_cast<std::int64_t>(num_grid));
    const int c = spec.corruption_grid[grid_index];

    const TestData fresh = make_data(spec.scenario, spec.base_seed, rep);
    AttackSpec attack = spec.attack;
    attack.count = c;
    const std::uint64_t attack_seed = derive_stream(
        spec.base_seed, {static_cast<std::uint64_t>(rep), static_cast<std::uint64_t>(c)});
    const TestData data = corrupt(fresh, attack, attack_seed);

    const std::uint64_t cell_seed =
        derive_stream(spec.base_seed, {static_cast<std::uint64_t>(rep),
                                       static_cast<std::uint64_t>(c),
                                       static_cast<std::uint64_t>(Stream::kTest)});

    std::vector<std::pair<StatsKey, PermutationStatistics>> cache;
    for (std::size_t t = 0; t < num_tests; ++t) {
      const TestSpec& test = spec.tests[t];
      TestConfig config = test.config;
      config.seed = cell_seed;

      const StatisticKind kind = resolve_statistic(test.statistic, data);
      const PermutationScheme scheme = scheme_for(test.statistic.kind);
      try {
        validate_test_inputs(data, kind, scheme, config, test.procedure);
        const StatsKey key = key_for(test);
        const PermutationStatistics* stats = nullptr;
        for (const auto& entry : cache) {
          if (entry.first == key) {
            stats = &entry.second;
            break;
          }
        }
        if (stats == nullptr) {
          cache.emplace_back(key, compute_permutation_statistics(
                                      data, kind, scheme, config.num_permutations, config.seed));
          stats = &cache.back().second;
        }
        const TestReport report = finalize_report(test.procedure, *stats, config);
        rejects[static_cast<std::size_t>(cell) * num_tests + t] = report.reject ? 1 : 0;
      } catch (const Error& e) {
        throw ConfigError("experiment cell (rep=" + std::to_string(rep) +
                          ", c=" + std::to_string(c) + ", test='" + test.name +
                          "'): " + e.what());
      }
    }
  });

  std::vector<CurvePoint> curve;
  curve.reserve(num_grid * num_tests);
  for (std::size_t g = 0; g < num_grid; ++g) {
    for (std::size_t t = 0; t < num_tests; ++t) {
      int count = 0;
      for (int rep = 0; rep < spec.repetitions; ++rep) {
        const std::size_t cell = static_cast<std::size_t>(rep) * num_grid + g;
        count += rejects[cell * num_tests + t];
      }
      CurvePoint point;
      point.c = spec.corruption_grid[g];
      point.test_name = spec.tests[t].name;
      point.repetitions = spec.repetitions;
      point.rejection_rate = static_cast<double>(count) / static_cast<double>(spec.repetitions);
      const WilsonInterval interval = wilson_interval(count, spec.repetitions);
      point.wilson_lo = interval.lo;
      point.wilson_hi = interval.hi;
      curve.push_back(std::move(point));
    }
  }
  return curve;
}

}  // namespace robustkern
