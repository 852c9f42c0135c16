#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "rotavg/so3.h"

namespace rotavg {

// All synthetic data is drawn from a std::mt19937_64 seeded per instance.
using Rng = std::mt19937_64;

struct TrialSpec {
  std::size_t n_rotations = 100;
  double inlier_sigma_deg = 5.0;
  double outlier_ratio = 0.0;
  std::uint64_t seed = 0;

  // round(outlier_ratio * n_rotations), halves rounded away from zero.
  std::size_t NumOutliers() const;
  // Throws std::invalid_argument when a field is out of range.
  void Check() const;
};

struct ProblemInstance {
  TrialSpec spec;
  RotationMatrix ground_truth;
  std::vector<RotationMatrix> rotations;
  // For evaluation only; estimators never see it.
  std::vector<bool> inlier_mask;
};

// Haar-uniform rotation, sampled as a uniform unit quaternion.
RotationMatrix RandomRotationUniform(Rng& rng);

// Uniform direction on the unit sphere.
Vector3 RandomUnitVector(Rng& rng);

// Exp(theta * axis) * ground_truth with a uniform axis and
// theta = |z|, z ~ Normal(0, sigma). The angular error is half-normal with
// scale sigma.
RotationMatrix GenerateInlier(const RotationMatrix& ground_truth,
                              double sigma_deg, Rng& rng);

// Exp(theta * axis) with theta ~ Uniform[0, pi] and a uniform axis. Not Haar
// distributed: small angles are over-represented.
RotationMatrix GenerateOutlier(Rng& rng);

// Haar ground truth, NumOutliers() outliers GenerateOutlier(rng) * ground
// truth, inliers from GenerateInlier, in a seeded random order.
// Deterministic in `spec`: equal specs give bit-identical instances.
ProblemInstance MakeInstance(const TrialSpec& spec);

// Plain-text exchange format:
//
//   # spec n=<N> sigma_deg=<deg> outlier_ratio=<ratio> seed=<seed>
//   # ground_truth <9 row-major entries>
//   # inlier_mask <N values of 0 or 1>
//   <9 row-major entries>          (N lines)
//
// Entries are written with 17 significant digits so that reading back
// reproduces every rotation exactly. Readers that only want the rotations
// may skip lines starting with '#'.
void WriteInstance(const ProblemInstance& instance,
                   const std::filesystem::path& path);
ProblemInstance ReadInstance(const std::filesystem::path& path);

}  // namespace rotavg
