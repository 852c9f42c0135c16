#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rotavg/so3.h"
#include "rotavg/synthetic.h"

namespace rotavg {

enum class Method { kChordalL2, kInitMedian, kGeodesicL1, kChordalL1 };

// "chordal-l2", "init-median", "geodesic-l1", "chordal-l1".
std::string_view MethodName(Method method);
// Throws std::invalid_argument for unknown names.
Method ParseMethod(std::string_view name);
// Only the Weiszfeld estimators have an outlier rejection switch.
bool SupportsRejection(Method method);

enum class RejectionMode { kOn, kOff, kBoth };

struct SweepConfig {
  std::vector<Method> methods = {Method::kChordalL2, Method::kInitMedian,
                                 Method::kGeodesicL1, Method::kChordalL1};
  RejectionMode rejection = RejectionMode::kBoth;
  std::vector<double> sigmas_deg = {5.0, 15.0};
  std::vector<double> outlier_ratios = {0.0, 0.25, 0.5, 0.75, 0.95};
  std::size_t n_rotations = 100;
  int trials = 1000;
  std::uint64_t base_seed = 1;
  // Worker threads per cell. Timings are least noisy with 1.
  int threads = 1;
  // When non-empty, every generated instance is written here.
  std::filesystem::path dump_dir;

  void Check() const;
};

struct TrialRecord {
  Method method = Method::kChordalL2;
  bool rejection = false;
  double sigma_deg = 0.0;
  double outlier_ratio = 0.0;
  int trial = 0;
  // Geodesic distance between estimate and ground truth. NaN marks a trial
  // whose estimator threw.
  double error_deg = 0.0;
  double time_us_per_rotation = 0.0;
  // -1 for a failed trial; 0 for the closed-form estimators.
  int iterations = 0;

  bool failed() const { return error_deg != error_deg; }
};

struct CellSummary {
  Method method = Method::kChordalL2;
  bool rejection = false;
  double sigma_deg = 0.0;
  double outlier_ratio = 0.0;
  int trials = 0;
  int failures = 0;
  double mean_error_deg = 0.0;
  double median_error_deg = 0.0;
  double median_time_us_per_rotation = 0.0;
  double mean_iterations = 0.0;
};

// splitmix64 finalizer.
std::uint64_t MixSeed(std::uint64_t x);

// Instance seed for a sweep cell and trial: the indices are folded one at
// a time into MixSeed(base_seed), so adding methods never changes an
// instance.
std::uint64_t TrialSeed(std::uint64_t base_seed, std::size_t sigma_index,
                        std::size_t ratio_index, int trial);

// Seed handed to the estimators' perturbation generator for a trial.
std::uint64_t PerturbationSeed(std::uint64_t trial_seed);

// The instance every method sees for (sigma_index, ratio_index, trial).
ProblemInstance SweepInstance(const SweepConfig& config,
                              std::size_t sigma_index,
                              std::size_t ratio_index, int trial);

struct EstimatorOutput {
  RotationMatrix estimate;
  int iterations = 0;
};

EstimatorOutput RunEstimator(Method method, bool rejection,
                             std::span<const RotationMatrix> rotations,
                             std::uint64_t perturbation_seed);

// Records are ordered by method, rejection (off before on), sigma, ratio
// and trial. Closed-form methods are run once per trial with rejection off.
std::vector<TrialRecord> RunSweep(const SweepConfig& config);

// One summary per (method, rejection, sigma, ratio), in record order.
std::vector<CellSummary> Summarize(std::span<const TrialRecord> records);

// Header
// method,rejection,sigma_deg,outlier_ratio,trial,error_deg,time_us_per_rot,iterations
// followed by one row per record. Numbers use the shortest representation
// that parses back to the same double. Throws on empty input or I/O error;
// nothing is written for empty input.
void WriteCsv(std::span<const TrialRecord> records,
              const std::filesystem::path& path);
std::vector<TrialRecord> ReadCsv(const std::filesystem::path& path);

// One row per (sigma, ratio) and one column per (method, rejection) holding
// median time per rotation and mean error. When both Weiszfeld methods ran
// with the same rejection setting, the chordal column also shows the
// geodesic/chordal time ratio in parentheses.
std::string FormatSummary(std::span<const TrialRecord> records);

}  // namespace rotavg
