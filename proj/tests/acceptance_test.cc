#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "rotavg/averaging.h"
#include "rotavg/benchmark.h"
#include "rotavg/so3.h"
#include "rotavg/synthetic.h"

namespace rotavg {
namespace {

constexpr double kPi = std::numbers::pi;

int g_failures = 0;

void Report(const char* id, bool pass, const std::string& detail) {
  std::printf("[%s] %s: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!pass) {
    ++g_failures;
  }
}

template <typename... Args>
std::string Format(const char* format, Args... args) {
  char buffer[512];
  std::snprintf(buffer, sizeof(buffer), format, args...);
  return buffer;
}

double Seconds(const std::function<void()>& body) {
  const auto start = std::chrono::steady_clock::now();
  body();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

double Median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

const CellSummary* FindCell(const std::vector<CellSummary>& cells,
                            Method method, bool rejection, double sigma,
                            double ratio) {
  for (const CellSummary& c : cells) {
    if (c.method == method && c.rejection == rejection &&
        c.sigma_deg == sigma && c.outlier_ratio == ratio) {
      return &c;
    }
  }
  return nullptr;
}

void CheckMathKernel() {
  double worst_relation = 0.0;
  double worst_roundtrip = 0.0;
  bool projections_valid = true;
  bool projections_best = true;
  const double seconds = Seconds([&] {
    Rng rng(101);
    for (int i = 0; i < 100000; ++i) {
      const RotationMatrix a = RandomRotationUniform(rng);
      const RotationMatrix b = RandomRotationUniform(rng);
      worst_relation =
          std::max(worst_relation,
                   std::abs(ChordalDistance(a, b) -
                            2.0 * std::sqrt(2.0) *
                                std::sin(GeodesicDistance(a, b) / 2.0)));
    }

    std::uniform_real_distribution<double> angle(0.0, kPi - 1e-6);
    std::vector<double> angles = {0.0, 1e-12, 1e-4, kPi - 1e-6};
    for (int i = 0; i < 100000; ++i) {
      angles.push_back(angle(rng));
    }
    for (const double theta : angles) {
      const RotationVector v = theta * RandomUnitVector(rng);
      worst_roundtrip =
          std::max(worst_roundtrip, (LogMap(ExpMap(v)) - v).norm());
    }

    std::vector<RotationMatrix> candidates;
    candidates.reserve(100000);
    for (int i = 0; i < 100000; ++i) {
      candidates.push_back(RandomRotationUniform(rng));
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
      Matrix3 m;
      for (int k = 0; k < 9; ++k) {
        m(k / 3, k % 3) = normal(rng);
      }
      const Projection p = ProjectToSO3(m);
      projections_valid = projections_valid && IsRotation(p.rotation.matrix());
      const double best = (p.rotation.matrix() - m).norm();
      for (const RotationMatrix& r : candidates) {
        if ((r.matrix() - m).norm() < best) {
          projections_best = false;
        }
      }
    }
  });
  Report("AC1 math kernel",
         worst_relation <= 1e-9 && worst_roundtrip <= 1e-9 &&
             projections_valid && projections_best && seconds < 10.0,
         Format("max |chordal - 2sqrt2 sin(d/2)| = %.3g, max roundtrip = "
                "%.3g, projections valid = %d, beat 1e5 rotations = %d, "
                "%.2f s",
                worst_relation, worst_roundtrip, projections_valid,
                projections_best, seconds));
}

void CheckExactMajority() {
  double worst_init = 0.0;
  double worst_geodesic = 0.0;
  double worst_chordal = 0.0;
  const double seconds = Seconds([&] {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      Rng rng(MixSeed(seed + 1000));
      const RotationMatrix truth = RandomRotationUniform(rng);
      std::vector<RotationMatrix> rotations(60, truth);
      for (int i = 0; i < 40; ++i) {
        rotations.push_back(RandomRotationUniform(rng));
      }
      std::shuffle(rotations.begin(), rotations.end(), rng);
      AveragingConfig config;
      config.rng_seed = seed;
      worst_init = std::max(
          worst_init,
          GeodesicDistance(InitializeElementwiseMedian(rotations).rotation,
                           truth));
      worst_geodesic = std::max(
          worst_geodesic,
          GeodesicDistance(GeodesicL1Mean(rotations, config).estimate, truth));
      worst_chordal = std::max(
          worst_chordal,
          GeodesicDistance(ChordalL1MeanApprox(rotations, config).estimate,
                           truth));
    }
  });
  Report("AC2 exact-majority recovery",
         worst_init <= 1e-6 && worst_geodesic <= 1e-6 &&
             worst_chordal <= 1e-6 && seconds < 5.0,
         Format("max error [rad] init-median = %.3g, geodesic-l1 = %.3g, "
                "chordal-l1 = %.3g, %.2f s",
                worst_init, worst_geodesic, worst_chordal, seconds));
}

void CheckInitializationBeatsL2(const std::vector<CellSummary>& cells) {
  bool pass = true;
  std::string detail = "sigma 5:";
  double improvement = 0.0;
  for (const double ratio : {0.25, 0.5, 0.75}) {
    const CellSummary* l2 = FindCell(cells, Method::kChordalL2, false, 5.0,
                                     ratio);
    const CellSummary* init = FindCell(cells, Method::kInitMedian, false, 5.0,
                                       ratio);
    if (l2 == nullptr || init == nullptr) {
      Report("AC3 initialization beats chordal L2", false, "missing cells");
      return;
    }
    pass = pass && init->mean_error_deg < l2->mean_error_deg;
    detail += Format(" ratio %.2f init %.3f vs L2 %.3f;", ratio,
                     init->mean_error_deg, l2->mean_error_deg);
    if (ratio == 0.75) {
      improvement = l2->mean_error_deg / init->mean_error_deg;
    }
  }
  pass = pass && improvement >= 2.0;
  detail += Format(" improvement at 0.75 = %.3fx (need >= 2x)", improvement);
  Report("AC3 initialization beats chordal L2", pass, detail);
}

void CheckRejectionHelps(const std::vector<CellSummary>& cells) {
  bool pass = true;
  std::string detail = "ratio 0.75:";
  for (const double sigma : {5.0, 15.0}) {
    for (const Method method : {Method::kGeodesicL1, Method::kChordalL1}) {
      const CellSummary* on = FindCell(cells, method, true, sigma, 0.75);
      const CellSummary* off = FindCell(cells, method, false, sigma, 0.75);
      if (on == nullptr || off == nullptr) {
        Report("AC4 rejection improves robustness", false, "missing cells");
        return;
      }
      pass = pass && on->mean_error_deg < off->mean_error_deg;
      detail += Format(" %s sigma %g rej %.3f vs no rej %.3f;",
                       std::string(MethodName(method)).c_str(), sigma,
                       on->mean_error_deg, off->mean_error_deg);
    }
  }
  Report("AC4 rejection improves robustness", pass, detail);
}

// Largest |geodesic - chordal| mean-error gap over the cells with the given
// rejection setting and outlier ratio at most `max_ratio`.
void CheckMethodGap(const std::vector<CellSummary>& cells, bool rejection,
                    double max_ratio, double tolerance, const char* id) {
  double worst = 0.0;
  std::string where = "none";
  int compared = 0;
  for (const CellSummary& geodesic : cells) {
    if (geodesic.method != Method::kGeodesicL1 ||
        geodesic.rejection != rejection || geodesic.outlier_ratio > max_ratio) {
      continue;
    }
    const CellSummary* chordal =
        FindCell(cells, Method::kChordalL1, rejection, geodesic.sigma_deg,
                 geodesic.outlier_ratio);
    if (chordal == nullptr) {
      Report(id, false, "missing cells");
      return;
    }
    ++compared;
    const double gap =
        std::abs(geodesic.mean_error_deg - chordal->mean_error_deg);
    if (gap >= worst) {
      worst = gap;
      where = Format("(%g deg, %g)", geodesic.sigma_deg,
                     geodesic.outlier_ratio);
    }
  }
  Report(id, compared > 0 && worst <= tolerance,
         Format("%d cells, max gap %.3f deg at %s (need <= %.2f)", compared,
                worst, where.c_str(), tolerance));
}

void CheckSpeed(const std::vector<CellSummary>& cells) {
  bool ordered = true;
  double geodesic_sum = 0.0;
  double chordal_sum = 0.0;
  double slowest_ratio = 1e300;
  for (const CellSummary& geodesic : cells) {
    if (geodesic.method != Method::kGeodesicL1 || !geodesic.rejection) {
      continue;
    }
    const CellSummary* chordal =
        FindCell(cells, Method::kChordalL1, true, geodesic.sigma_deg,
                 geodesic.outlier_ratio);
    if (chordal == nullptr) {
      Report("AC7 speed ordering", false, "missing cells");
      return;
    }
    ordered = ordered && chordal->median_time_us_per_rotation <=
                             geodesic.median_time_us_per_rotation;
    slowest_ratio = std::min(slowest_ratio,
                             geodesic.median_time_us_per_rotation /
                                 chordal->median_time_us_per_rotation);
    geodesic_sum += geodesic.median_time_us_per_rotation;
    chordal_sum += chordal->median_time_us_per_rotation;
  }
  const double aggregate = geodesic_sum / chordal_sum;

  // N = 500 calls on fresh instances.
  std::string large;
  bool fast = true;
  for (const Method method : {Method::kChordalL2, Method::kInitMedian,
                              Method::kGeodesicL1, Method::kChordalL1}) {
    std::vector<double> millis;
    for (int trial = 0; trial < 51; ++trial) {
      const ProblemInstance instance =
          MakeInstance({500, 5.0, 0.25, MixSeed(7000 + trial)});
      millis.push_back(1e3 * Seconds([&] {
        RunEstimator(method, true, instance.rotations,
                     static_cast<std::uint64_t>(trial));
      }));
    }
    const double median = Median(millis);
    fast = fast && median < 1.0;
    large += Format(" %s %.3f ms;", std::string(MethodName(method)).c_str(),
                    median);
  }
  Report("AC7 speed ordering",
         ordered && aggregate >= 1.5 && fast,
         Format("chordal <= geodesic in every rejection cell = %d (smallest "
                "ratio %.2fx), aggregate ratio %.2fx (need >= 1.5x); N=500 "
                "median:%s",
                ordered, slowest_ratio, aggregate, large.c_str()));
}

void CheckDeterminism(const std::vector<TrialRecord>& first,
                      const std::vector<TrialRecord>& second) {
  bool identical = first.size() == second.size();
  std::size_t mismatches = 0;
  for (std::size_t i = 0; identical && i < first.size(); ++i) {
    const bool both_failed = first[i].failed() && second[i].failed();
    if (!both_failed && (std::bit_cast<std::uint64_t>(first[i].error_deg) !=
                         std::bit_cast<std::uint64_t>(second[i].error_deg))) {
      ++mismatches;
    }
  }
  identical = identical && mismatches == 0;
  Report("AC8 determinism", identical,
         Format("%zu records, %zu error mismatches", first.size(),
                mismatches));
}

int Run() {
  CheckMathKernel();
  CheckExactMajority();

  const SweepConfig config;
  std::vector<TrialRecord> records;
  const double sweep_seconds = Seconds([&] { records = RunSweep(config); });
  std::printf("%s", FormatSummary(records).c_str());
  const std::vector<CellSummary> cells = Summarize(records);
  int failures = 0;
  for (const CellSummary& c : cells) {
    failures += c.failures;
  }

  CheckInitializationBeatsL2(cells);
  CheckRejectionHelps(cells);
  CheckMethodGap(cells, true, 1.0, 0.25, "AC5 methods agree with rejection");
  CheckMethodGap(cells, false, 0.5, 0.5,
                 "AC6 methods agree without rejection at ratio <= 0.5");
  CheckSpeed(cells);
  CheckDeterminism(records, RunSweep(config));
  Report("Default sweep runtime", sweep_seconds < 600.0 && failures == 0,
         Format("%zu trials in %.1f s (need < 600 s), %d failed trials",
                records.size(), sweep_seconds, failures));

  std::printf("%d criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}

}  // namespace
}  // namespace rotavg

int main() {
  try {
    return rotavg::Run();
  } catch (const std::exception& e) {
    std::printf("[FAIL] acceptance run aborted: %s\n", e.what());
    return 1;
  }
}
