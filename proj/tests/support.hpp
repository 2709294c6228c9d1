#pragma once

#include <Eigen/Core>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gricp/matching.hpp"
#include "gricp/types.hpp"

namespace testing {

inline std::mt19937_64& engine() {
  static std::mt19937_64 e(20240611);
  return e;
}

inline double uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(engine());
}

inline gricp::Vec3 random_vec(double lo = -1.0, double hi = 1.0) {
  return {uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)};
}

inline gricp::Vec3 random_unit() {
  gricp::Vec3 v;
  do {
    v = random_vec();
  } while (v.norm() < 1e-3 || v.norm() > 1.0);
  return v.normalized();
}

/// Rotation about z written out with sin and cos.
inline Eigen::Matrix3d rz(double a) {
  Eigen::Matrix3d m;
  m << std::cos(a), -std::sin(a), 0.0, std::sin(a), std::cos(a), 0.0, 0.0, 0.0, 1.0;
  return m;
}

inline Eigen::Matrix3d ry(double a) {
  Eigen::Matrix3d m;
  m << std::cos(a), 0.0, std::sin(a), 0.0, 1.0, 0.0, -std::sin(a), 0.0, std::cos(a);
  return m;
}

inline Eigen::Matrix3d rx(double a) {
  Eigen::Matrix3d m;
  m << 1.0, 0.0, 0.0, 0.0, std::cos(a), -std::sin(a), 0.0, std::sin(a), std::cos(a);
  return m;
}

/// Random correspondence set with unit normals.
inline gricp::CorrespondenceSet random_pairs(std::size_t n, double spread = 10.0) {
  gricp::CorrespondenceSet set;
  for (std::size_t i = 0; i < n; ++i) {
    gricp::Correspondence c;
    c.p = random_vec(-spread, spread);
    c.q = c.p + random_vec(-0.2, 0.2);
    c.n = random_unit();
    c.dist = (c.p - c.q).norm();
    set.pairs.push_back(c);
  }
  return set;
}

/// Linear system written as the per-pair sum of outer products.
inline void summation_4dof(const gricp::CorrespondenceSet& corr, Eigen::Matrix4d& A,
                           Eigen::Vector4d& b) {
  A.setZero();
  b.setZero();
  for (const auto& c : corr.pairs) {
    const Eigen::Matrix3d gamma_gen = (Eigen::Matrix3d() << 0, -1, 0, 1, 0, 0, 0, 0, 0).finished();
    const double ck = (gamma_gen * c.p).dot(c.n);
    const Eigen::Vector3d dk = c.q - c.p;
    Eigen::Vector4d g;
    g << ck, c.n;
    A += g * g.transpose();
    b += g * dk.dot(c.n);
  }
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("gricp_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
