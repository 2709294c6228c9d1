#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "gricp/types.hpp"

namespace gricp {

// ASCII PLY with a single vertex element of double x, y, z and optionally
// nx, ny, nz. Values are written with 17 significant digits.
PointCloud read_cloud(std::istream& in, const std::string& source = "<stream>");
PointCloud read_cloud(const std::filesystem::path& path);
void write_cloud(std::ostream& out, const PointCloud& cloud);
void write_cloud(const PointCloud& cloud, const std::filesystem::path& path);

// TUM trajectory lines: "stamp tx ty tz qx qy qz qw"; '#' starts a comment.
Trajectory read_trajectory(std::istream& in, const std::string& source = "<stream>");
Trajectory read_trajectory(const std::filesystem::path& path);
void write_trajectory(std::ostream& out, const Trajectory& trajectory);
void write_trajectory(const Trajectory& trajectory, const std::filesystem::path& path);

/// Plain "key = value" settings; '#' starts a comment, blank lines ignored.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in, const std::string& source = "<stream>");
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& values() const noexcept { return values_; }

  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;

  /// Throws naming the first key that is not in `known`.
  void reject_unknown(const std::vector<std::string>& known) const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace gricp
