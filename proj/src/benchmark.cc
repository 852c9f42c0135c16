#include "rotavg/benchmark.h"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "rotavg/averaging.h"

namespace rotavg {
namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

struct Variant {
  Method method;
  bool rejection;
};

std::vector<Variant> SweepVariants(const SweepConfig& config) {
  std::vector<Variant> variants;
  for (const Method method : config.methods) {
    if (!SupportsRejection(method)) {
      variants.push_back({method, false});
      continue;
    }
    if (config.rejection != RejectionMode::kOn) {
      variants.push_back({method, false});
    }
    if (config.rejection != RejectionMode::kOff) {
      variants.push_back({method, true});
    }
  }
  return variants;
}

std::string FormatNumber(const double value) {
  char buffer[64];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) {
    throw std::runtime_error("number formatting failed");
  }
  return std::string(buffer, end);
}

double ParseNumber(std::string_view field) {
  double value = 0.0;
  const auto [end, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || end != field.data() + field.size()) {
    throw std::runtime_error("csv: bad number '" + std::string(field) + "'");
  }
  return value;
}

std::vector<std::string_view> SplitCsvLine(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double Median(std::vector<double> values) {
  if (values.empty()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  const auto mid = values.begin() + values.size() / 2;
  std::nth_element(values.begin(), mid, values.end());
  if (values.size() % 2 == 1) {
    return *mid;
  }
  return 0.5 * (*std::max_element(values.begin(), mid) + *mid);
}

template <typename... Args>
std::string Printf(const char* format, Args... args) {
  char buffer[128];
  std::snprintf(buffer, sizeof(buffer), format, args...);
  return buffer;
}

std::string PadRight(std::string text, std::size_t width) {
  // Degree signs are two bytes but one column.
  const std::size_t columns =
      text.size() - static_cast<std::size_t>(
                        std::count(text.begin(), text.end(), '\xC2'));
  if (columns < width) {
    text.append(width - columns, ' ');
  }
  return text;
}

}  // namespace

std::string_view MethodName(const Method method) {
  switch (method) {
    case Method::kChordalL2:
      return "chordal-l2";
    case Method::kInitMedian:
      return "init-median";
    case Method::kGeodesicL1:
      return "geodesic-l1";
    case Method::kChordalL1:
      return "chordal-l1";
  }
  return "unknown";
}

Method ParseMethod(std::string_view name) {
  for (const Method method : {Method::kChordalL2, Method::kInitMedian,
                              Method::kGeodesicL1, Method::kChordalL1}) {
    if (MethodName(method) == name) {
      return method;
    }
  }
  throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

bool SupportsRejection(const Method method) {
  return method == Method::kGeodesicL1 || method == Method::kChordalL1;
}

void SweepConfig::Check() const {
  if (methods.empty() || sigmas_deg.empty() || outlier_ratios.empty()) {
    throw std::invalid_argument(
        "sweep needs at least one method, sigma and outlier ratio");
  }
  if (trials < 1) {
    throw std::invalid_argument("trials must be at least 1");
  }
  if (n_rotations < 1) {
    throw std::invalid_argument("n_rotations must be at least 1");
  }
  if (threads < 1) {
    throw std::invalid_argument("threads must be at least 1");
  }
  for (const double sigma : sigmas_deg) {
    TrialSpec{n_rotations, sigma, 0.0, 0}.Check();
  }
  for (const double ratio : outlier_ratios) {
    TrialSpec{n_rotations, 0.0, ratio, 0}.Check();
  }
}

std::uint64_t MixSeed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t TrialSeed(const std::uint64_t base_seed,
                        const std::size_t sigma_index,
                        const std::size_t ratio_index, const int trial) {
  std::uint64_t h = MixSeed(base_seed);
  h = MixSeed(h ^ static_cast<std::uint64_t>(sigma_index));
  h = MixSeed(h ^ static_cast<std::uint64_t>(ratio_index));
  return MixSeed(h ^ static_cast<std::uint64_t>(trial));
}

std::uint64_t PerturbationSeed(const std::uint64_t trial_seed) {
  return MixSeed(trial_seed ^ 0x6a09e667f3bcc908ULL);
}

ProblemInstance SweepInstance(const SweepConfig& config,
                              const std::size_t sigma_index,
                              const std::size_t ratio_index, const int trial) {
  TrialSpec spec;
  spec.n_rotations = config.n_rotations;
  spec.inlier_sigma_deg = config.sigmas_deg.at(sigma_index);
  spec.outlier_ratio = config.outlier_ratios.at(ratio_index);
  spec.seed = TrialSeed(config.base_seed, sigma_index, ratio_index, trial);
  return MakeInstance(spec);
}

EstimatorOutput RunEstimator(const Method method, const bool rejection,
                             std::span<const RotationMatrix> rotations,
                             const std::uint64_t perturbation_seed) {
  AveragingConfig config;
  config.rejection_enabled = rejection;
  config.rng_seed = perturbation_seed;
  switch (method) {
    case Method::kChordalL2:
      return {ChordalL2Mean(rotations).rotation, 0};
    case Method::kInitMedian:
      return {InitializeElementwiseMedian(rotations).rotation, 0};
    case Method::kGeodesicL1: {
      const AveragingResult result = GeodesicL1Mean(rotations, config);
      return {result.estimate, result.iterations_used};
    }
    case Method::kChordalL1: {
      const AveragingResult result = ChordalL1MeanApprox(rotations, config);
      return {result.estimate, result.iterations_used};
    }
  }
  throw std::invalid_argument("unknown method");
}

std::vector<TrialRecord> RunSweep(const SweepConfig& config) {
  config.Check();
  if (!config.dump_dir.empty()) {
    std::filesystem::create_directories(config.dump_dir);
  }

  const std::vector<Variant> variants = SweepVariants(config);
  const std::size_t num_sigmas = config.sigmas_deg.size();
  const std::size_t num_ratios = config.outlier_ratios.size();
  const auto num_trials = static_cast<std::size_t>(config.trials);
  std::vector<TrialRecord> records(variants.size() * num_sigmas * num_ratios *
                                   num_trials);

  std::vector<ProblemInstance> instances(num_trials);
  std::vector<std::uint64_t> perturbation_seeds(num_trials);
  for (std::size_t si = 0; si < num_sigmas; ++si) {
    for (std::size_t ri = 0; ri < num_ratios; ++ri) {
      for (std::size_t t = 0; t < num_trials; ++t) {
        const int trial = static_cast<int>(t);
        instances[t] = SweepInstance(config, si, ri, trial);
        perturbation_seeds[t] = PerturbationSeed(instances[t].spec.seed);
        if (!config.dump_dir.empty()) {
          char name[96];
          std::snprintf(name, sizeof(name), "instance_s%zu_r%zu_t%zu.txt", si,
                        ri, t);
          WriteInstance(instances[t], config.dump_dir / name);
        }
      }

      for (std::size_t vi = 0; vi < variants.size(); ++vi) {
        const Variant variant = variants[vi];
        const std::size_t offset =
            ((vi * num_sigmas + si) * num_ratios + ri) * num_trials;

        // Warm-up, discarded.
        try {
          RunEstimator(variant.method, variant.rejection,
                       instances[0].rotations, perturbation_seeds[0]);
        } catch (const std::exception&) {
        }

        const auto run_trial = [&](const std::size_t t) {
          const ProblemInstance& instance = instances[t];
          TrialRecord& record = records[offset + t];
          record.method = variant.method;
          record.rejection = variant.rejection;
          record.sigma_deg = config.sigmas_deg[si];
          record.outlier_ratio = config.outlier_ratios[ri];
          record.trial = static_cast<int>(t);
          const double n = static_cast<double>(instance.rotations.size());
          try {
            const auto start = std::chrono::steady_clock::now();
            const EstimatorOutput output =
                RunEstimator(variant.method, variant.rejection,
                             instance.rotations, perturbation_seeds[t]);
            const auto stop = std::chrono::steady_clock::now();
            record.time_us_per_rotation =
                std::chrono::duration<double, std::micro>(stop - start)
                    .count() /
                n;
            record.error_deg =
                GeodesicDistance(output.estimate, instance.ground_truth) *
                kRadToDeg;
            record.iterations = output.iterations;
          } catch (const std::exception&) {
            record.error_deg = std::numeric_limits<double>::quiet_NaN();
            record.time_us_per_rotation =
                std::numeric_limits<double>::quiet_NaN();
            record.iterations = -1;
          }
        };

        if (config.threads <= 1) {
          for (std::size_t t = 0; t < num_trials; ++t) {
            run_trial(t);
          }
        } else {
          const auto workers = static_cast<std::size_t>(config.threads);
          std::vector<std::jthread> pool;
          pool.reserve(workers);
          for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
              for (std::size_t t = w; t < num_trials; t += workers) {
                run_trial(t);
              }
            });
          }
        }
      }
    }
  }
  return records;
}

std::vector<CellSummary> Summarize(std::span<const TrialRecord> records) {
  using Key = std::tuple<Method, bool, double, double>;
  std::vector<Key> order;
  std::map<Key, std::vector<const TrialRecord*>> cells;
  for (const TrialRecord& record : records) {
    const Key key{record.method, record.rejection, record.sigma_deg,
                  record.outlier_ratio};
    auto [it, inserted] = cells.try_emplace(key);
    if (inserted) {
      order.push_back(key);
    }
    it->second.push_back(&record);
  }

  std::vector<CellSummary> summaries;
  summaries.reserve(order.size());
  for (const Key& key : order) {
    CellSummary summary;
    std::tie(summary.method, summary.rejection, summary.sigma_deg,
             summary.outlier_ratio) = key;
    std::vector<double> errors;
    std::vector<double> times;
    double iterations = 0.0;
    for (const TrialRecord* record : cells[key]) {
      ++summary.trials;
      if (record->failed()) {
        ++summary.failures;
        continue;
      }
      errors.push_back(record->error_deg);
      times.push_back(record->time_us_per_rotation);
      iterations += record->iterations;
    }
    if (!errors.empty()) {
      double sum = 0.0;
      for (const double e : errors) {
        sum += e;
      }
      summary.mean_error_deg = sum / static_cast<double>(errors.size());
      summary.mean_iterations = iterations / static_cast<double>(errors.size());
    } else {
      summary.mean_error_deg = std::numeric_limits<double>::quiet_NaN();
      summary.mean_iterations = std::numeric_limits<double>::quiet_NaN();
    }
    summary.median_error_deg = Median(std::move(errors));
    summary.median_time_us_per_rotation = Median(std::move(times));
    summaries.push_back(summary);
  }
  return summaries;
}

void WriteCsv(std::span<const TrialRecord> records,
              const std::filesystem::path& path) {
  if (records.empty()) {
    throw std::invalid_argument("no records to write");
  }
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  out << "method,rejection,sigma_deg,outlier_ratio,trial,error_deg,"
         "time_us_per_rot,iterations\n";
  for (const TrialRecord& r : records) {
    out << MethodName(r.method) << ',' << (r.rejection ? "on" : "off") << ','
        << FormatNumber(r.sigma_deg) << ',' << FormatNumber(r.outlier_ratio)
        << ',' << r.trial << ',' << FormatNumber(r.error_deg) << ','
        << FormatNumber(r.time_us_per_rotation) << ',' << r.iterations
        << '\n';
  }
  out.flush();
  if (!out) {
    throw std::runtime_error("failed writing " + path.string());
  }
}

std::vector<TrialRecord> ReadCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  std::string line;
  if (!std::getline(in, line) || line.rfind("method,rejection,", 0) != 0) {
    throw std::runtime_error("csv: missing header");
  }
  std::vector<TrialRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    const std::vector<std::string_view> fields = SplitCsvLine(line);
    if (fields.size() != 8) {
      throw std::runtime_error("csv: expected 8 fields in '" + line + "'");
    }
    TrialRecord r;
    r.method = ParseMethod(fields[0]);
    if (fields[1] != "on" && fields[1] != "off") {
      throw std::runtime_error("csv: bad rejection flag");
    }
    r.rejection = fields[1] == "on";
    r.sigma_deg = ParseNumber(fields[2]);
    r.outlier_ratio = ParseNumber(fields[3]);
    r.trial = static_cast<int>(ParseNumber(fields[4]));
    r.error_deg = ParseNumber(fields[5]);
    r.time_us_per_rotation = ParseNumber(fields[6]);
    r.iterations = static_cast<int>(ParseNumber(fields[7]));
    records.push_back(r);
  }
  return records;
}

std::string FormatSummary(std::span<const TrialRecord> records) {
  const std::vector<CellSummary> summaries = Summarize(records);

  std::vector<std::pair<double, double>> rows;
  std::vector<Variant> columns;
  std::map<std::tuple<double, double, Method, bool>, const CellSummary*> index;
  for (const CellSummary& s : summaries) {
    const std::pair<double, double> row{s.sigma_deg, s.outlier_ratio};
    if (std::find(rows.begin(), rows.end(), row) == rows.end()) {
      rows.push_back(row);
    }
    const bool known = std::any_of(columns.begin(), columns.end(),
                                   [&](const Variant& v) {
                                     return v.method == s.method &&
                                            v.rejection == s.rejection;
                                   });
    if (!known) {
      columns.push_back({s.method, s.rejection});
    }
    index[{s.sigma_deg, s.outlier_ratio, s.method, s.rejection}] = &s;
  }

  const auto find = [&](const std::pair<double, double>& row, Method method,
                        bool rejection) -> const CellSummary* {
    const auto it = index.find({row.first, row.second, method, rejection});
    return it == index.end() ? nullptr : it->second;
  };

  constexpr std::size_t kLabelWidth = 14;
  constexpr std::size_t kCellWidth = 26;
  std::ostringstream out;
  out << "median time [us/rotation] | mean error [deg]\n";
  out << PadRight("", kLabelWidth);
  for (const Variant& column : columns) {
    std::string title(MethodName(column.method));
    if (SupportsRejection(column.method)) {
      title += column.rejection ? " (rej)" : " (no rej)";
    }
    out << PadRight(title, kCellWidth);
  }
  out << '\n';

  for (const auto& row : rows) {
    out << PadRight(Printf("(%g\xC2\xB0, %g%%)", row.first, row.second * 100.0),
                    kLabelWidth);
    for (const Variant& column : columns) {
      const CellSummary* cell = find(row, column.method, column.rejection);
      if (cell == nullptr) {
        out << PadRight("-", kCellWidth);
        continue;
      }
      std::string text = Printf("%.3g", cell->median_time_us_per_rotation);
      if (column.method == Method::kChordalL1) {
        const CellSummary* geodesic =
            find(row, Method::kGeodesicL1, column.rejection);
        if (geodesic != nullptr) {
          text += Printf(" (%.1fx)",
                         geodesic->median_time_us_per_rotation /
                             cell->median_time_us_per_rotation,
                         0);
        }
      }
      text += Printf(" | %.3f", cell->mean_error_deg);
      if (cell->failures > 0) {
        text += " !" + std::to_string(cell->failures);
      }
      out << PadRight(text, kCellWidth);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace rotavg
