#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "robustkern/io.hpp"
#include "robustkern/oracle.hpp"
#include "verify.hpp"

namespace {

using namespace robustkern;

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitDataError = 3;

std::uint64_t entropy_seed() {
  std::random_device device;
  return (static_cast<std::uint64_t>(device()) << 32) ^ device();
}

struct TestArgs {
  std::string kind;
  std::string procedure;
  std::string y_path;
  std::string z_path;
  std::string pairs_path;
  int dy = 0;
  double alpha = 0.05;
  int r = 0;
  int permutations = 500;
  std::optional<double> epsilon;
  std::optional<double> beta;
  std::string kernel = "gaussian";
  std::string bandwidth = "median";
  std::optional<std::uint64_t> seed;
  std::string out_path;
};

KernelChoice kernel_choice_from(const std::string& family, const std::string& bandwidth) {
  KernelChoice choice;
  if (family == "gaussian") {
    choice.family = KernelFamily::kGaussian;
  } else if (family == "laplace") {
    choice.family = KernelFamily::kLaplace;
  } else {
    throw ConfigError("--kernel must be 'gaussian' or 'laplace'");
  }
  if (bandwidth != "median") {
    try {
      std::size_t used = 0;
      const double value = std::stod(bandwidth, &used);
      if (used != bandwidth.size()) throw std::invalid_argument(bandwidth);
      choice.bandwidth = value;
    } catch (const std::exception&) {
      throw ConfigError("--bandwidth must be a positive number or 'median'");
    }
  }
  return choice;
}

int run_test_command(const TestArgs& args) {
  TestData data;
  StatisticChoice statistic;
  if (args.kind == "mmd") {
    if (args.y_path.empty() || args.z_path.empty()) {
      throw ConfigError("--kind mmd requires --y and --z");
    }
    data = TwoSampleData{load_csv_matrix(args.y_path), load_csv_matrix(args.z_path)};
    statistic.kind = StatisticChoice::Kind::kMmd;
  } else if (args.kind == "hsic") {
    if (args.pairs_path.empty()) throw ConfigError("--kind hsic requires --pairs");
    const Eigen::MatrixXd pairs = load_csv_matrix(args.pairs_path);
    if (args.dy < 1 || args.dy >= pairs.cols()) {
      throw ConfigError("--dy must split the pair columns: need 1 <= dy < " +
                        std::to_string(pairs.cols()));
    }
    data = PairedData{pairs.leftCols(args.dy), pairs.rightCols(pairs.cols() - args.dy)};
    statistic.kind = StatisticChoice::Kind::kHsic;
  } else {
    throw ConfigError("--kind must be 'mmd' or 'hsic'");
  }

  const KernelChoice kernel = kernel_choice_from(args.kernel, args.bandwidth);
  statistic.kernel_y = kernel;
  statistic.kernel_z = kernel;

  TestConfig config;
  config.alpha = args.alpha;
  config.r = args.r;
  config.num_permutations = args.permutations;
  config.epsilon = args.epsilon;
  config.beta = args.beta;
  config.seed = args.seed.has_value() ? *args.seed : entropy_seed();

  const StatisticKind kind = resolve_statistic(statistic, data);
  const PermutationScheme scheme = scheme_for(statistic.kind);
  const Procedure procedure = procedure_from_name(args.procedure);

  TestReport report;
  switch (procedure) {
    case Procedure::kClassical:
      report = run_classical_test(data, kind, scheme, config);
      break;
    case Procedure::kDc:
      report = run_dc_test(data, kind, scheme, config);
      break;
    case Procedure::kDp:
      report = run_dp_test(data, kind, scheme, config);
      break;
  }

  for (const auto& warning : report.warnings) {
    std::cerr << "warning: " << warning << "\n";
  }
  std::cout << "procedure=" << procedure_name(report.procedure) << " kind=" << args.kind
            << " T0=" << report.statistic_observed << " threshold=" << report.threshold
            << " reject=" << (report.reject ? "true" : "false")
            << " adjusted_level=" << report.adjusted_level << " seed=" << report.seed << "\n";

  if (!args.out_path.empty()) {
    std::ofstream out(args.out_path);
    if (!out) throw DataError(args.out_path + ": cannot open for writing");
    out << report_to_json(report) << "\n";
  }
  return kExitOk;
}

int run_experiment_command(const std::string& config_path, const std::string& out_path) {
  const ExperimentSpec spec = load_experiment_spec(config_path);
  const auto curve = run_experiment(spec);
  const std::string csv = curve_to_csv(curve, spec.base_seed);
  if (out_path.empty()) {
    std::cout << csv;
  } else {
    std::ofstream out(out_path);
    if (!out) throw DataError(out_path + ": cannot open for writing");
    out << csv;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust kernel two-sample and independence testing under data corruption"};
  app.require_subcommand(1);

  TestArgs test_args;
  auto* test_cmd = app.add_subcommand("test", "Run one hypothesis test on CSV data");
  test_cmd->add_option("--kind", test_args.kind, "Statistic: mmd or hsic")->required();
  test_cmd->add_option("--procedure", test_args.procedure, "classical, dc or dp")->required();
  test_cmd->add_option("--y", test_args.y_path, "First sample CSV (mmd)");
  test_cmd->add_option("--z", test_args.z_path, "Second sample CSV (mmd)");
  test_cmd->add_option("--pairs", test_args.pairs_path, "Paired sample CSV (hsic)");
  test_cmd->add_option("--dy", test_args.dy, "Number of leading columns forming y (hsic)");
  test_cmd->add_option("--alpha", test_args.alpha, "Test level")->capture_default_str();
  test_cmd->add_option("--r", test_args.r, "Corruption budget")->capture_default_str();
  test_cmd->add_option("--permutations", test_args.permutations, "Permutation count B")->capture_default_str();
  double epsilon_value = 0.0;
  auto* epsilon_opt = test_cmd->add_option("--epsilon", epsilon_value, "DP privacy parameter");
  double beta_value = 0.0;
  auto* beta_opt = test_cmd->add_option("--beta", beta_value,
                                        "Second error level for the default epsilon");
  test_cmd->add_option("--kernel", test_args.kernel, "gaussian or laplace")->capture_default_str();
  test_cmd->add_option("--bandwidth", test_args.bandwidth, "Positive number or 'median'")->capture_default_str();
  std::uint64_t seed_value = 0;
  auto* seed_opt = test_cmd->add_option("--seed", seed_value, "RNG seed (default: entropy)");
  test_cmd->add_option("--out", test_args.out_path, "Write the full JSON report here");

  std::string experiment_config;
  std::string experiment_out;
  auto* experiment_cmd =
      app.add_subcommand("experiment", "Run a Monte-Carlo rejection-rate sweep from a JSON config");
  experiment_cmd->add_option("config", experiment_config, "Experiment JSON config")->required();
  experiment_cmd->add_option("--out", experiment_out, "Write the curve CSV here (default stdout)");

  verify::Options verify_options;
  bool sabotage = false;
  auto* verify_cmd = app.add_subcommand("verify", "Run the brute-force verification checks");
  verify_cmd->add_option("--seed", verify_options.seed, "RNG seed")->capture_default_str();
  verify_cmd->add_option("--trials", verify_options.trials, "Random instances per check")->capture_default_str();
  verify_cmd->add_flag("--sabotage", sabotage,
                       "Fault injection self-test: must make verification fail");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitConfigError;
  }

  try {
    if (test_cmd->parsed()) {
      if (epsilon_opt->count() > 0) test_args.epsilon = epsilon_value;
      if (beta_opt->count() > 0) test_args.beta = beta_value;
      if (seed_opt->count() > 0) test_args.seed = seed_value;
      return run_test_command(test_args);
    }
    if (experiment_cmd->parsed()) {
      return run_experiment_command(experiment_config, experiment_out);
    }
    if (verify_cmd->parsed()) {
      verify_options.sabotage = sabotage;
      return verify::run_checks(verify_options, std::cout) ? kExitOk : kExitVerifyFailed;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return kExitConfigError;
}
