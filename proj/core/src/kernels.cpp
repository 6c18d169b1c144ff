#include "robustkern/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace robustkern {

KernelSpec make_gaussian_kernel(double bandwidth) {
  KernelSpec spec{KernelFamily::kGaussian, bandwidth, 1.0};
  validate(spec);
  return spec;
}

KernelSpec make_laplace_kernel(double bandwidth) {
  KernelSpec spec{KernelFamily::kLaplace, bandwidth, 1.0};
  validate(spec);
  return spec;
}

void validate(const KernelSpec& spec) {
  if (!(spec.bandwidth > 0.0) || !std::isfinite(spec.bandwidth)) {
    throw ConfigError("kernel bandwidth must be a positive finite real");
  }
  if (spec.bound != 1.0) {
    throw ConfigError("Gaussian and Laplace kernels have everywhere-bound 1");
  }
}

DistanceNorm norm_for(KernelFamily family) {
  return family == KernelFamily::kGaussian ? DistanceNorm::kL2 : DistanceNorm::kL1;
}

double eval_kernel(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y) {
  validate(spec);
  if (x.size() != y.size()) {
    throw DataError("eval_kernel: dimension mismatch (" + std::to_string(x.size()) + " vs " +
                    std::to_string(y.size()) + ")");
  }
  switch (spec.family) {
    case KernelFamily::kGaussian: {
      const double d2 = (x - y).squaredNorm();
      return std::exp(-d2 / (2.0 * spec.bandwidth * spec.bandwidth));
    }
    case KernelFamily::kLaplace: {
      const double d1 = (x - y).cwiseAbs().sum();
      return std::exp(-d1 / spec.bandwidth);
    }
  }
  throw ConfigError("eval_kernel: unknown kernel family");
}

namespace {

void check_rows(const Eigen::Ref<const Eigen::MatrixXd>& m, const char* which) {
  if (m.rows() == 0) throw DataError(std::string("gram_matrix: empty point list ") + which);
}

Eigen::MatrixXd gaussian_gram(const Eigen::Ref<const Eigen::MatrixXd>& a,
                              const Eigen::Ref<const Eigen::MatrixXd>& b, double bandwidth) {
  // ||a_i - b_j||^2 = ||a_i||^2 + ||b_j||^2 - 2 <a_i, b_j>, clamped at zero
  // against floating-point cancellation.
  const Eigen::VectorXd a2 = a.rowwise().squaredNorm();
  const Eigen::VectorXd b2 = b.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = (-2.0 * a * b.transpose());
  d2.colwise() += a2;
  d2.rowwise() += b2.transpose();
  const double inv = 1.0 / (2.0 * bandwidth * bandwidth);
  return (-(d2.cwiseMax(0.0)) * inv).array().exp();
}

Eigen::MatrixXd laplace_gram(const Eigen::Ref<const Eigen::MatrixXd>& a,
                             const Eigen::Ref<const Eigen::MatrixXd>& b, double bandwidth) {
  Eigen::MatrixXd g(a.rows(), b.rows());
  const double inv = 1.0 / bandwidth;
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      const double d1 = (a.row(i) - b.row(j)).cwiseAbs().sum();
      g(i, j) = std::exp(-d1 * inv);
    }
  }
  return g;
}

}  // namespace

Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& a,
                            const Eigen::Ref<const Eigen::MatrixXd>& b) {
  validate(spec);
  check_rows(a, "A");
  check_rows(b, "B");
  if (a.cols() != b.cols()) {
    throw DataError("gram_matrix: dimension mismatch (" + std::to_string(a.cols()) + " vs " +
                    std::to_string(b.cols()) + ")");
  }
  return spec.family == KernelFamily::kGaussian ? gaussian_gram(a, b, spec.bandwidth)
                                                : laplace_gram(a, b, spec.bandwidth);
}

Eigen::MatrixXd gram_matrix(const KernelSpec& spec,
                            const Eigen::Ref<const Eigen::MatrixXd>& points) {
  Eigen::MatrixXd g = gram_matrix(spec, points, points);
  // Pin the self-similarity invariants exactly: unit-bound diagonal and
  // entrywise symmetry.
  g.diagonal().setConstant(spec.bound);
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    for (Eigen::Index i = j + 1; i < g.rows(); ++i) {
      g(j, i) = g(i, j);
    }
  }
  return g;
}

double median_heuristic_bandwidth(const Eigen::Ref<const Eigen::MatrixXd>& points,
                                  DistanceNorm norm) {
  const Eigen::Index n = points.rows();
  if (n < 2) throw ConfigError("median_heuristic_bandwidth: need at least 2 points");

  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2);
  if (norm == DistanceNorm::kL2) {
    const Eigen::VectorXd sq = points.rowwise().squaredNorm();
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double d2 = sq[i] + sq[j] - 2.0 * points.row(i).dot(points.row(j));
        dists.push_back(std::sqrt(std::max(0.0, d2)));
      }
    }
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        dists.push_back((points.row(i) - points.row(j)).cwiseAbs().sum());
      }
    }
  }

  const std::size_t count = dists.size();
  double median;
  if (count % 2 == 1) {
    auto mid = dists.begin() + static_cast<std::ptrdiff_t>(count / 2);
    std::nth_element(dists.begin(), mid, dists.end());
    median = *mid;
  } else {
    auto hi = dists.begin() + static_cast<std::ptrdiff_t>(count / 2);
    std::nth_element(dists.begin(), hi, dists.end());
    const double upper = *hi;
    const double lower = *std::max_element(dists.begin(), hi);
    median = 0.5 * (lower + upper);
  }
  if (!(median > 0.0)) {
    throw DegenerateDataError(
        "median_heuristic_bandwidth: all points identical; supply an explicit bandwidth");
  }
  return median;
}

}  // namespace robustkern
