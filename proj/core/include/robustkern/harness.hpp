#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "robustkern/corruption.hpp"
#include "robustkern/testing.hpp"

namespace robustkern {

// Null-scenario data source: a fresh dataset per repetition. For two-sample
// scenarios y and z are drawn from generator_y / generator_z; for paired
// scenarios the pair sides are drawn independently (the independence null).
struct ScenarioSpec {
  bool paired = false;
  int n = 0;
  int m = 0;  // ignored for paired scenarios
  GeneratorSpec generator_y;
  GeneratorSpec generator_z;
};

// One test to run at every (repetition, corruption count) cell. The
// harness derives each cell's seed from base_seed; TestConfig::seed is
// ignored inside experiments so that adding or reordering tests never
// reshuffles the randomness of the others.
struct TestSpec {
  std::string name;
  Procedure procedure = Procedure::kClassical;
  StatisticChoice statistic;
  TestConfig config;
};

struct ExperimentSpec {
  ScenarioSpec scenario;
  AttackSpec attack;               // attack.count is overridden per grid value
  std::vector<int> corruption_grid;
  std::vector<TestSpec> tests;
  int repetitions = 1;
  std::uint64_t base_seed = 0;
};

struct CurvePoint {
  int c = 0;
  std::string test_name;
  double rejection_rate = 0.0;
  double wilson_lo = 0.0;
  double wilson_hi = 0.0;
  int repetitions = 0;
};

struct WilsonInterval {
  double lo = 0.0;
  double hi = 0.0;
};

// 95% Wilson score interval for a binomial proportion.
WilsonInterval wilson_interval(int successes, int trials);

// Monte-Carlo sweep over (repetition, corruption count). Per cell, every
// configured test consumes the identical corrupted dataset; procedures that
// share a statistic and permutation count also share the permuted
// statistics, which the derived per-cell seed makes exact. Deterministic
// end-to-end in base_seed, for any worker count.
//
// Seed derivation: data uses derive(base_seed, {rep, data-tag, side}),
// the attack uses derive(base_seed, {rep, c}), and all tests in a cell use
// derive(base_seed, {rep, c, test-tag}).
std::vector<CurvePoint> run_experiment(const ExperimentSpec& spec);

}  // namespace robustkern
