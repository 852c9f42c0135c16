#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rotavg/so3.h"

namespace rotavg {

enum class DistanceMetric { kGeodesic, kChordal };

struct AveragingConfig {
  // Upper bound on Weiszfeld iterations.
  int max_iterations = 10;
  // Stop once the step norm (radians for the geodesic variant, R^9 units
  // for the chordal variant) falls below this.
  double convergence_tol = 1e-3;
  // Zero-weight residuals above max(Q1, MaxInlierResidual(N, metric)).
  bool rejection_enabled = true;
  // Angle of the rotation applied when the geodesic estimate coincides with
  // an input, or the per-component upper bound of the uniform offset added
  // in R^9 for the chordal estimate. The estimate can stop up to about this
  // far from a point of multiplicity > N/2, so it is kept well below
  // convergence_tol.
  double perturbation_magnitude = 1e-7;
  // Seeds the std::mt19937_64 that drives the perturbations.
  std::uint64_t rng_seed = 0;

  // Throws std::invalid_argument when a field is out of range.
  void Check() const;
};

struct AveragingResult {
  RotationMatrix estimate;
  int iterations_used = 0;
  bool converged = false;
  // Per-input distances and {0, 1} inlier weights of the last completed
  // iteration. Geodesic residuals are radians, chordal residuals are R^9
  // distances to the unprojected iterate.
  std::vector<double> residuals;
  std::vector<int> weights;
  // Unweighted sum of residuals at the iterate entering each iteration.
  std::vector<double> cost_trace;
  // Chordal variant only: the final R^9 iterate before projection.
  Vector9 embedded_estimate = Vector9::Zero();
  // Set when a projection onto SO(3) along the way was ambiguous.
  bool degenerate_projection = false;
};

// Estimate is the projection of the entrywise sum; the flag reports whether
// that projection was ambiguous.
Projection ChordalL2Mean(std::span<const RotationMatrix> rotations);

// Entry (j, k) is the median of the inputs' (j, k) entries. Even counts use
// the mean of the two middle order statistics.
Matrix3 ElementwiseMedianMatrix(std::span<const RotationMatrix> rotations);

// Projection of ElementwiseMedianMatrix onto SO(3).
Projection InitializeElementwiseMedian(
    std::span<const RotationMatrix> rotations);

// Nearest-rank lower quartile: the ceil(N / 4)-th smallest value (1-based).
double FirstQuartile(std::span<const double> values);

// 1 rad for N <= 50 and 0.5 rad otherwise; the chordal rule maps these
// angles through 2 sqrt(2) sin(angle / 2).
double MaxInlierResidual(std::size_t num_rotations, DistanceMetric metric);

// max(FirstQuartile(residuals), MaxInlierResidual(N, metric)).
double RejectionThreshold(std::span<const double> residuals,
                          std::size_t num_rotations, DistanceMetric metric);

// Weiszfeld iterations on SO(3) towards the geodesic L1 mean, initialized
// from the elementwise median and optionally rejecting large residuals.
AveragingResult GeodesicL1Mean(std::span<const RotationMatrix> rotations,
                               const AveragingConfig& config = {});

// Euclidean Weiszfeld iterations on the column-stacked matrices in R^9,
// initialized from the (unprojected) elementwise median, followed by a final
// projection onto SO(3).
AveragingResult ChordalL1MeanApprox(std::span<const RotationMatrix> rotations,
                                    const AveragingConfig& config = {});

}  // namespace rotavg
