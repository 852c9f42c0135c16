#include "rotavg/averaging.h"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace rotavg {
namespace {

// An iterate closer than this to an input is treated as coinciding with it.
constexpr double kCoincidence = 1e-9;

void CheckNotEmpty(std::span<const RotationMatrix> rotations) {
  if (rotations.empty()) {
    throw std::invalid_argument("cannot average an empty set of rotations");
  }
}

// Median of `values`, reordering them.
double MedianInPlace(std::span<double> values) {
  const auto mid = values.begin() + values.size() / 2;
  std::nth_element(values.begin(), mid, values.end());
  if (values.size() % 2 == 1) {
    return *mid;
  }
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + *mid);
}

double FirstQuartileInPlace(std::span<double> values) {
  const std::size_t rank = (values.size() + 3) / 4;
  const auto it = values.begin() + (rank - 1);
  std::nth_element(values.begin(), it, values.end());
  return *it;
}

Vector3 RandomAxis(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double z = 2.0 * unit(rng) - 1.0;
  const double phi = 2.0 * std::numbers::pi * unit(rng);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return Vector3(r * std::cos(phi), r * std::sin(phi), z);
}

// Fills {0, 1} weights from the current residuals. `scratch` avoids an
// allocation per iteration.
void ComputeWeights(const std::vector<double>& residuals, const bool reject,
                    const double max_inlier_residual,
                    std::vector<double>& scratch, std::vector<int>& weights) {
  double threshold = std::numeric_limits<double>::infinity();
  if (reject) {
    scratch.assign(residuals.begin(), residuals.end());
    threshold = std::max(FirstQuartileInPlace(scratch), max_inlier_residual);
  }
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    weights[i] = residuals[i] <= threshold ? 1 : 0;
  }
}

}  // namespace

void AveragingConfig::Check() const {
  if (max_iterations < 1) {
    throw std::invalid_argument("max_iterations must be at least 1");
  }
  if (!(convergence_tol > 0.0)) {
    throw std::invalid_argument("convergence_tol must be positive");
  }
  if (!(perturbation_magnitude > 0.0)) {
    throw std::invalid_argument("perturbation_magnitude must be positive");
  }
}

Projection ChordalL2Mean(std::span<const RotationMatrix> rotations) {
  CheckNotEmpty(rotations);
  Matrix3 sum = Matrix3::Zero();
  for (const RotationMatrix& r : rotations) {
    sum += r.matrix();
  }
  return ProjectToSO3(sum);
}

Matrix3 ElementwiseMedianMatrix(std::span<const RotationMatrix> rotations) {
  CheckNotEmpty(rotations);
  std::vector<double> entries(rotations.size());
  Matrix3 median;
  for (int col = 0; col < 3; ++col) {
    for (int row = 0; row < 3; ++row) {
      for (std::size_t i = 0; i < rotations.size(); ++i) {
        entries[i] = rotations[i](row, col);
      }
      median(row, col) = MedianInPlace(entries);
    }
  }
  return median;
}

Projection InitializeElementwiseMedian(
    std::span<const RotationMatrix> rotations) {
  return ProjectToSO3(ElementwiseMedianMatrix(rotations));
}

double FirstQuartile(std::span<const double> values) {
  if (values.empty()) {
    throw std::invalid_argument("first quartile of an empty set");
  }
  std::vector<double> copy(values.begin(), values.end());
  return FirstQuartileInPlace(copy);
}

double MaxInlierResidual(const std::size_t num_rotations,
                         const DistanceMetric metric) {
  const double angle = num_rotations <= 50 ? 1.0 : 0.5;
  return metric == DistanceMetric::kGeodesic ? angle : GeodesicToChordal(angle);
}

double RejectionThreshold(std::span<const double> residuals,
                          const std::size_t num_rotations,
                          const DistanceMetric metric) {
  return std::max(FirstQuartile(residuals),
                  MaxInlierResidual(num_rotations, metric));
}

AveragingResult GeodesicL1Mean(std::span<const RotationMatrix> rotations,
                               const AveragingConfig& config) {
  CheckNotEmpty(rotations);
  config.Check();

  const std::size_t n = rotations.size();
  const double max_inlier_residual =
      MaxInlierResidual(n, DistanceMetric::kGeodesic);
  std::mt19937_64 rng(config.rng_seed);

  const Projection init = InitializeElementwiseMedian(rotations);
  AveragingResult result;
  result.estimate = init.rotation;
  result.degenerate_projection = init.degenerate;
  result.residuals.resize(n);
  result.weights.resize(n);

  std::vector<Vector3> tangents(n);
  std::vector<double> scratch;
  for (int it = 1; it <= config.max_iterations; ++it) {
    for (;;) {
      const RotationMatrix inverse = result.estimate.Transpose();
      bool coincident = false;
      for (std::size_t i = 0; i < n; ++i) {
        tangents[i] = LogMap(rotations[i] * inverse);
        result.residuals[i] = tangents[i].norm();
        coincident = coincident || result.residuals[i] < kCoincidence;
      }
      if (!coincident) {
        break;
      }
      result.estimate =
          ExpMap(config.perturbation_magnitude * RandomAxis(rng)) *
          result.estimate;
    }

    double cost = 0.0;
    for (const double d : result.residuals) {
      cost += d;
    }
    result.cost_trace.push_back(cost);

    ComputeWeights(result.residuals, config.rejection_enabled,
                   max_inlier_residual, scratch, result.weights);

    Vector3 numerator = Vector3::Zero();
    double denominator = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (result.weights[i] != 0) {
        numerator += tangents[i] / result.residuals[i];
        denominator += 1.0 / result.residuals[i];
      }
    }
    assert(denominator > 0.0);

    const Vector3 step = numerator / denominator;
    result.estimate = ExpMap(step) * result.estimate;
    result.iterations_used = it;
    if (step.norm() < config.convergence_tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

AveragingResult ChordalL1MeanApprox(std::span<const RotationMatrix> rotations,
                                    const AveragingConfig& config) {
  CheckNotEmpty(rotations);
  config.Check();

  const std::size_t n = rotations.size();
  const double max_inlier_residual =
      MaxInlierResidual(n, DistanceMetric::kChordal);
  std::mt19937_64 rng(config.rng_seed);
  std::uniform_real_distribution<double> jitter(0.0,
                                                config.perturbation_magnitude);

  std::vector<Vector9> points(n);
  for (std::size_t i = 0; i < n; ++i) {
    points[i] = Vec(rotations[i].matrix());
  }

  AveragingResult result;
  result.residuals.resize(n);
  result.weights.resize(n);

  // The iterate lives in R^9 and is only projected at the end.
  Vector9 s = Vec(ElementwiseMedianMatrix(rotations));
  std::vector<Vector9> offsets(n);
  std::vector<double> scratch;
  for (int it = 1; it <= config.max_iterations; ++it) {
    for (;;) {
      bool coincident = false;
      for (std::size_t i = 0; i < n; ++i) {
        offsets[i] = points[i] - s;
        result.residuals[i] = offsets[i].norm();
        coincident = coincident || result.residuals[i] < kCoincidence;
      }
      if (!coincident) {
        break;
      }
      for (int k = 0; k < 9; ++k) {
        s(k) += jitter(rng);
      }
    }

    double cost = 0.0;
    for (const double d : result.residuals) {
      cost += d;
    }
    result.cost_trace.push_back(cost);

    ComputeWeights(result.residuals, config.rejection_enabled,
                   max_inlier_residual, scratch, result.weights);

    Vector9 numerator = Vector9::Zero();
    double denominator = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (result.weights[i] != 0) {
        numerator += offsets[i] / result.residuals[i];
        denominator += 1.0 / result.residuals[i];
      }
    }
    assert(denominator > 0.0);

    const Vector9 step = numerator / denominator;
    s += step;
    result.iterations_used = it;
    if (step.norm() < config.convergence_tol) {
      result.converged = true;
      break;
    }
  }

  result.embedded_estimate = s;
  const Projection projection = ProjectToSO3(VecInv(s));
  result.estimate = projection.rotation;
  result.degenerate_projection = projection.degenerate;
  return result;
}

}  // namespace rotavg
