#include "rotavg/synthetic.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

#include <Eigen/Geometry>

namespace rotavg {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

void WriteRowMajor(std::ostream& out, const RotationMatrix& r) {
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) {
      if (row != 0 || col != 0) {
        out << ' ';
      }
      out << r(row, col);
    }
  }
}

RotationMatrix ParseRowMajor(std::istream& in) {
  Matrix3 m;
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) {
      if (!(in >> m(row, col))) {
        throw std::runtime_error("instance file: expected 9 matrix entries");
      }
    }
  }
  return RotationMatrix::FromMatrix(m);
}

// Extracts the value of `key=` from a header token stream.
std::string HeaderValue(const std::string& line, const std::string& key) {
  std::istringstream tokens(line);
  std::string token;
  while (tokens >> token) {
    if (token.rfind(key + "=", 0) == 0) {
      return token.substr(key.size() + 1);
    }
  }
  throw std::runtime_error("instance file: missing header field " + key);
}

}  // namespace

std::size_t TrialSpec::NumOutliers() const {
  return static_cast<std::size_t>(
      std::round(outlier_ratio * static_cast<double>(n_rotations)));
}

void TrialSpec::Check() const {
  if (n_rotations < 1) {
    throw std::invalid_argument("n_rotations must be at least 1");
  }
  if (!(inlier_sigma_deg >= 0.0) || !std::isfinite(inlier_sigma_deg)) {
    throw std::invalid_argument("inlier_sigma_deg must be finite and >= 0");
  }
  if (!(outlier_ratio >= 0.0 && outlier_ratio <= 1.0)) {
    throw std::invalid_argument("outlier_ratio must lie in [0, 1]");
  }
}

RotationMatrix RandomRotationUniform(Rng& rng) {
  // Shoemake's subgroup algorithm for a uniform unit quaternion.
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u1 = unit(rng);
  const double u2 = unit(rng);
  const double u3 = unit(rng);
  const double a = std::sqrt(1.0 - u1);
  const double b = std::sqrt(u1);
  const double t2 = 2.0 * std::numbers::pi * u2;
  const double t3 = 2.0 * std::numbers::pi * u3;
  const Eigen::Quaterniond q(b * std::cos(t3), a * std::sin(t2),
                             a * std::cos(t2), b * std::sin(t3));
  return RotationMatrix::FromMatrix(q.normalized().toRotationMatrix());
}

Vector3 RandomUnitVector(Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double z = 2.0 * unit(rng) - 1.0;
  const double phi = 2.0 * std::numbers::pi * unit(rng);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return Vector3(r * std::cos(phi), r * std::sin(phi), z);
}

RotationMatrix GenerateInlier(const RotationMatrix& ground_truth,
                              const double sigma_deg, Rng& rng) {
  if (!(sigma_deg >= 0.0)) {
    throw std::invalid_argument("sigma_deg must be >= 0");
  }
  const Vector3 axis = RandomUnitVector(rng);
  double angle = 0.0;
  if (sigma_deg > 0.0) {
    std::normal_distribution<double> normal(0.0, sigma_deg * kDegToRad);
    angle = std::abs(normal(rng));
  }
  if (angle == 0.0) {
    return ground_truth;
  }
  return ExpMap(angle * axis) * ground_truth;
}

RotationMatrix GenerateOutlier(Rng& rng) {
  const Vector3 axis = RandomUnitVector(rng);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  return ExpMap(angle(rng) * axis);
}

ProblemInstance MakeInstance(const TrialSpec& spec) {
  spec.Check();
  Rng rng(spec.seed);

  ProblemInstance instance;
  instance.spec = spec;
  instance.ground_truth = RandomRotationUniform(rng);

  const std::size_t num_outliers = spec.NumOutliers();
  const std::size_t num_inliers = spec.n_rotations - num_outliers;

  std::vector<std::pair<RotationMatrix, bool>> samples;
  samples.reserve(spec.n_rotations);
  for (std::size_t i = 0; i < num_inliers; ++i) {
    samples.emplace_back(
        GenerateInlier(instance.ground_truth, spec.inlier_sigma_deg, rng),
        true);
  }
  for (std::size_t i = 0; i < num_outliers; ++i) {
    samples.emplace_back(GenerateOutlier(rng) * instance.ground_truth, false);
  }

  // Fisher-Yates with an explicit index draw, so the permutation depends
  // only on the generator and not on the standard library's shuffle.
  for (std::size_t i = samples.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(samples[i - 1], samples[j]);
  }

  instance.rotations.reserve(samples.size());
  instance.inlier_mask.reserve(samples.size());
  for (auto& [rotation, inlier] : samples) {
    instance.rotations.push_back(rotation);
    instance.inlier_mask.push_back(inlier);
  }
  return instance;
}

void WriteInstance(const ProblemInstance& instance,
                   const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  out << std::setprecision(17);
  const TrialSpec& spec = instance.spec;
  out << "# spec n=" << spec.n_rotations
      << " sigma_deg=" << spec.inlier_sigma_deg
      << " outlier_ratio=" << spec.outlier_ratio << " seed=" << spec.seed
      << '\n';
  out << "# ground_truth ";
  WriteRowMajor(out, instance.ground_truth);
  out << "\n# inlier_mask";
  for (const bool inlier : instance.inlier_mask) {
    out << ' ' << (inlier ? 1 : 0);
  }
  out << '\n';
  for (const RotationMatrix& r : instance.rotations) {
    WriteRowMajor(out, r);
    out << '\n';
  }
  if (!out) {
    throw std::runtime_error("failed writing " + path.string());
  }
}

ProblemInstance ReadInstance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  ProblemInstance instance;
  bool have_spec = false;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::istringstream fields(line);
    if (line[0] != '#') {
      instance.rotations.push_back(ParseRowMajor(fields));
      continue;
    }
    std::string hash, tag;
    fields >> hash >> tag;
    if (tag == "spec") {
      TrialSpec& spec = instance.spec;
      spec.n_rotations = std::stoull(HeaderValue(line, "n"));
      spec.inlier_sigma_deg = std::stod(HeaderValue(line, "sigma_deg"));
      spec.outlier_ratio = std::stod(HeaderValue(line, "outlier_ratio"));
      spec.seed = std::stoull(HeaderValue(line, "seed"));
      have_spec = true;
    } else if (tag == "ground_truth") {
      instance.ground_truth = ParseRowMajor(fields);
    } else if (tag == "inlier_mask") {
      int flag;
      while (fields >> flag) {
        instance.inlier_mask.push_back(flag != 0);
      }
    }
  }
  if (!have_spec) {
    throw std::runtime_error("instance file: missing spec header");
  }
  if (instance.rotations.size() != instance.spec.n_rotations ||
      (!instance.inlier_mask.empty() &&
       instance.inlier_mask.size() != instance.rotations.size())) {
    throw std::runtime_error("instance file: size mismatch");
  }
  return instance;
}

}  // namespace rotavg
