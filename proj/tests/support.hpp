#pragma once

#include <Eigen/Geometry>

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "ocr3d/geometry.hpp"
#include "ocr3d/policy.hpp"

namespace testing {

using namespace ocr3d;

inline double rel_error(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

inline double rel_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).norm() / std::max({1e-8, a.norm(), b.norm()});
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

inline FeatureMatrix random_features(std::mt19937_64& rng, int options, int dim = kFeatureDim) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  FeatureMatrix f(options, dim);
  for (int i = 0; i < options; ++i)
    for (int j = 0; j < dim; ++j) f(i, j) = u(rng);
  return f;
}

inline CameraPose random_rotation_pose(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  CameraPose pose;
  pose.rotation = q.toRotationMatrix();
  pose.translation = Vec3(g(rng), g(rng), g(rng));
  return pose;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("ocr3d_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
