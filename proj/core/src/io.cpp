#include "robustkern/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace robustkern {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

bool parse_double(const std::string& cell, double& out) {
  const char* first = cell.data();
  const char* last = first + cell.size();
  const auto result = std::from_chars(first, last, out);
  return result.ec == std::errc{} && result.ptr == last;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream stream(line);
  while (std::getline(stream, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double value) {
  for (int precision = 1; precision <= 17; ++precision) {
    std::ostringstream out;
    out.precision(precision);
    out << value;
    double back = 0.0;
    std::istringstream in(out.str());
    in >> back;
    if (back == value) return out.str();
  }
  std::ostringstream out;
  out.precision(17);
  out << value;
  return out.str();
}

}  // namespace

Eigen::MatrixXd parse_csv_matrix(std::istream& in, const std::string& name) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_number = 0;
  bool header_checked = false;
  std::size_t width = 0;

  while (std::getline(in, line)) {
    ++line_number;
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto cells = split_csv_line(stripped);

    if (!header_checked) {
      header_checked = true;
      bool numeric = true;
      double ignored;
      for (const auto& cell : cells) {
        if (!parse_double(cell, ignored)) {
          numeric = false;
          break;
        }
      }
      if (!numeric) continue;  // header row
    }

    std::vector<double> row(cells.size());
    for (std::size_t col = 0; col < cells.size(); ++col) {
      if (!parse_double(cells[col], row[col])) {
        throw DataError(name + ": non-numeric cell at row " + std::to_string(line_number) +
                        ", column " + std::to_string(col + 1) + " ('" + cells[col] + "')");
      }
    }
    if (width == 0) {
      width = row.size();
    } else if (row.size() != width) {
      throw DataError(name + ": ragged row " + std::to_string(line_number) + " has " +
                      std::to_string(row.size()) + " columns, expected " + std::to_string(width));
    }
    rows.push_back(std::move(row));
  }

  if (rows.empty()) throw DataError(name + ": no data rows");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < width; ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return out;
}

Eigen::MatrixXd load_csv_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open file");
  return parse_csv_matrix(in, path);
}

std::string procedure_name(Procedure procedure) {
  switch (procedure) {
    case Procedure::kClassical:
      return "classical";
    case Procedure::kDc:
      return "dc";
    case Procedure::kDp:
      return "dp";
  }
  throw ConfigError("unknown procedure");
}

Procedure procedure_from_name(const std::string& name) {
  if (name == "classical") return Procedure::kClassical;
  if (name == "dc") return Procedure::kDc;
  if (name == "dp") return Procedure::kDp;
  throw ConfigError("unknown procedure '" + name + "' (expected classical, dc or dp)");
}

std::string report_to_json(const TestReport& report) {
  json j;
  j["procedure"] = procedure_name(report.procedure);
  j["alpha"] = report.alpha;
  j["r"] = report.r;
  j["num_permutations"] = report.num_permutations;
  j["seed"] = report.seed;
  j["statistic_observed"] = report.statistic_observed;
  j["permuted_statistics"] = report.permuted_statistics;
  j["threshold"] = report.threshold;
  j["reject"] = report.reject;
  j["sensitivity"] = report.sensitivity;
  j["adjusted_level"] = report.adjusted_level;
  if (report.epsilon.has_value()) j["epsilon"] = *report.epsilon;
  if (report.noise_values.has_value()) j["noise_values"] = *report.noise_values;
  j["warnings"] = report.warnings;
  return j.dump(2);
}

TestReport report_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("report JSON parse error: ") + e.what());
  }
  try {
    TestReport report;
    report.procedure = procedure_from_name(j.at("procedure").get<std::string>());
    report.alpha = j.at("alpha").get<double>();
    report.r = j.at("r").get<int>();
    report.num_permutations = j.at("num_permutations").get<int>();
    report.seed = j.at("seed").get<std::uint64_t>();
    report.statistic_observed = j.at("statistic_observed").get<double>();
    report.permuted_statistics = j.at("permuted_statistics").get<std::vector<double>>();
    report.threshold = j.at("threshold").get<double>();
    report.reject = j.at("reject").get<bool>();
    report.sensitivity = j.at("sensitivity").get<double>();
    report.adjusted_level = j.at("adjusted_level").get<double>();
    if (j.contains("epsilon")) report.epsilon = j.at("epsilon").get<double>();
    if (j.contains("noise_values")) {
      report.noise_values = j.at("noise_values").get<std::vector<double>>();
    }
    report.warnings = j.at("warnings").get<std::vector<std::string>>();
    return report;
  } catch (const json::exception& e) {
    throw DataError(std::string("report JSON field error: ") + e.what());
  }
}

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& message) {
  throw ConfigError(path + ": " + message);
}

const json& require_key(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) schema_error(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(path + "." + key, "missing required key");
  return *it;
}

double as_double(const json& value, const std::string& path) {
  if (!value.is_number()) schema_error(path, "expected a number");
  return value.get<double>();
}

int as_int(const json& value, const std::string& path) {
  if (!value.is_number_integer()) schema_error(path, "expected an integer");
  return value.get<int>();
}

std::uint64_t as_seed(const json& value, const std::string& path) {
  if (!value.is_number_unsigned() && !value.is_number_integer()) {
    schema_error(path, "expected an integer seed");
  }
  return value.get<std::uint64_t>();
}

std::string as_string(const json& value, const std::string& path) {
  if (!value.is_string()) schema_error(path, "expected a string");
  return value.get<std::string>();
}

GeneratorSpec parse_generator(const json& j, const std::string& path) {
  const std::string type = as_string(require_key(j, "type", path), path + ".type");
  if (type == "gaussian") {
    GaussianGenerator g;
    g.mean = as_double(require_key(j, "mean", path), path + ".mean");
    g.stddev = as_double(require_key(j, "std", path), path + ".std");
    g.dim = as_int(require_key(j, "dim", path), path + ".dim");
    return g;
  }
  if (type == "geometric") {
    GeometricGenerator g;
    g.p = as_double(require_key(j, "p", path), path + ".p");
    g.dim = as_int(require_key(j, "dim", path), path + ".dim");
    return g;
  }
  schema_error(path + ".type", "expected 'gaussian' or 'geometric'");
}

AttackTarget parse_target(const std::string& name, const std::string& path) {
  if (name == "first_sample") return AttackTarget::kFirstSample;
  if (name == "second_sample") return AttackTarget::kSecondSample;
  if (name == "pairs") return AttackTarget::kPairs;
  schema_error(path, "expected 'first_sample', 'second_sample' or 'pairs'");
}

AttackSpec parse_attack(const json& j, const std::string& path) {
  AttackSpec attack;
  const std::string type = as_string(require_key(j, "type", path), path + ".type");
  if (type == "replace_with_generator") {
    ReplaceWithGenerator replace;
    replace.target =
        parse_target(as_string(require_key(j, "target", path), path + ".target"), path + ".target");
    replace.generator = parse_generator(require_key(j, "generator", path), path + ".generator");
    attack.kind = replace;
  } else if (type == "gaussian_pair_coupling") {
    GaussianPairCoupling coupling;
    coupling.mean_scale = as_double(require_key(j, "mean_scale", path), path + ".mean_scale");
    coupling.stddev = as_double(require_key(j, "std", path), path + ".std");
    attack.kind = coupling;
  } else if (type == "geometric_pair_coupling") {
    GeometricPairCoupling coupling;
    coupling.p = as_double(require_key(j, "p", path), path + ".p");
    coupling.shift = as_double(require_key(j, "shift", path), path + ".shift");
    coupling.noise_stddev = as_double(require_key(j, "noise_std", path), path + ".noise_std");
    attack.kind = coupling;
  } else {
    schema_error(path + ".type",
                 "expected 'replace_with_generator', 'gaussian_pair_coupling' or "
                 "'geometric_pair_coupling'");
  }
  if (j.contains("random_indices")) {
    const json& flag = j.at("random_indices");
    if (!flag.is_boolean()) schema_error(path + ".random_indices", "expected a boolean");
    attack.random_indices = flag.get<bool>();
  }
  return attack;
}

KernelChoice parse_kernel(const json& j, const std::string& path) {
  KernelChoice choice;
  const std::string family = as_string(require_key(j, "family", path), path + ".family");
  if (family == "gaussian") {
    choice.family = KernelFamily::kGaussian;
  } else if (family == "laplace") {
    choice.family = KernelFamily::kLaplace;
  } else {
    schema_error(path + ".family", "expected 'gaussian' or 'laplace'");
  }
  const json& bandwidth = require_key(j, "bandwidth", path);
  if (bandwidth.is_string()) {
    if (bandwidth.get<std::string>() != "median") {
      schema_error(path + ".bandwidth", "expected a positive number or 'median'");
    }
  } else {
    choice.bandwidth = as_double(bandwidth, path + ".bandwidth");
  }
  return choice;
}

TestSpec parse_test(const json& j, const std::string& path) {
  TestSpec test;
  test.name = as_string(require_key(j, "name", path), path + ".name");
  test.procedure =
      procedure_from_name(as_string(require_key(j, "procedure", path), path + ".procedure"));
  const std::string kind = as_string(require_key(j, "kind", path), path + ".kind");
  if (kind == "mmd") {
    test.statistic.kind = StatisticChoice::Kind::kMmd;
    test.statistic.kernel_y = parse_kernel(require_key(j, "kernel", path), path + ".kernel");
  } else if (kind == "hsic") {
    test.statistic.kind = StatisticChoice::Kind::kHsic;
    test.statistic.kernel_y = parse_kernel(require_key(j, "kernel_y", path), path + ".kernel_y");
    test.statistic.kernel_z = parse_kernel(require_key(j, "kernel_z", path), path + ".kernel_z");
  } else {
    schema_error(path + ".kind", "expected 'mmd' or 'hsic'");
  }
  test.config.alpha = as_double(require_key(j, "alpha", path), path + ".alpha");
  test.config.r = as_int(require_key(j, "r", path), path + ".r");
  test.config.num_permutations =
      as_int(require_key(j, "permutations", path), path + ".permutations");
  if (j.contains("epsilon") && !j.at("epsilon").is_null()) {
    test.config.epsilon = as_double(j.at("epsilon"), path + ".epsilon");
  }
  if (j.contains("beta") && !j.at("beta").is_null()) {
    test.config.beta = as_double(j.at("beta"), path + ".beta");
  }
  return test;
}

}  // namespace

ExperimentSpec experiment_spec_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("$: JSON parse error: ") + e.what());
  }

  ExperimentSpec spec;
  const json& scenario = require_key(j, "scenario", "$");
  const std::string kind = as_string(require_key(scenario, "kind", "$.scenario"),
                                     "$.scenario.kind");
  if (kind == "two_sample") {
    spec.scenario.paired = false;
    spec.scenario.m = as_int(require_key(scenario, "m", "$.scenario"), "$.scenario.m");
  } else if (kind == "paired") {
    spec.scenario.paired = true;
  } else {
    schema_error("$.scenario.kind", "expected 'two_sample' or 'paired'");
  }
  spec.scenario.n = as_int(require_key(scenario, "n", "$.scenario"), "$.scenario.n");
  spec.scenario.generator_y =
      parse_generator(require_key(scenario, "generator_y", "$.scenario"), "$.scenario.generator_y");
  spec.scenario.generator_z =
      parse_generator(require_key(scenario, "generator_z", "$.scenario"), "$.scenario.generator_z");

  spec.attack = parse_attack(require_key(j, "attack", "$"), "$.attack");

  const json& grid = require_key(j, "corruption_grid", "$");
  if (!grid.is_array() || grid.empty()) {
    schema_error("$.corruption_grid", "expected a nonempty array of integers");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    spec.corruption_grid.push_back(
        as_int(grid[i], "$.corruption_grid[" + std::to_string(i) + "]"));
  }

  spec.repetitions = as_int(require_key(j, "repetitions", "$"), "$.repetitions");
  spec.base_seed = as_seed(require_key(j, "base_seed", "$"), "$.base_seed");

  const json& tests = require_key(j, "tests", "$");
  if (!tests.is_array() || tests.empty()) {
    schema_error("$.tests", "expected a nonempty array of tests");
  }
  for (std::size_t i = 0; i < tests.size(); ++i) {
    spec.tests.push_back(parse_test(tests[i], "$.tests[" + std::to_string(i) + "]"));
  }
  return spec;
}

ExperimentSpec load_experiment_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return experiment_spec_from_json(buffer.str());
}

std::string curve_to_csv(const std::vector<CurvePoint>& curve, std::uint64_t base_seed) {
  std::ostringstream out;
  out << "c,test_name,rejection_rate,wilson_lo,wilson_hi,repetitions,seed\n";
  for (const auto& point : curve) {
    out << point.c << ',' << point.test_name << ',' << format_double(point.rejection_rate) << ','
        << format_double(point.wilson_lo) << ',' << format_double(point.wilson_hi) << ','
        << point.repetitions << ',' << base_seed << '\n';
  }
  return out.str();
}

}  // namespace robustkern
