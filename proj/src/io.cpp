#include "gricp/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "format.hpp"

namespace gricp {

namespace {

[[noreturn]] void parse_error(const std::string& source, std::size_t line, const std::string& what) {
  throw Error(ErrorCode::kParse, source + ": line " + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool to_double(const std::string& token, double& out) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc{} && res.ptr == last;
}

double parse_number(const std::string& token, const std::string& source, std::size_t line) {
  double v = 0.0;
  if (!to_double(token, v)) parse_error(source, line, "non-numeric token '" + token + "'");
  if (!std::isfinite(v)) parse_error(source, line, "non-finite value '" + token + "'");
  return v;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "failed writing '" + path.string() + "'");
}

}  // namespace

PointCloud read_cloud(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  if (!next_line() || trim(line) != "ply") parse_error(source, 1, "missing 'ply' magic");
  bool seen_format = false;
  bool in_vertex = false;
  bool seen_vertex = false;
  long long vertex_count = -1;
  std::vector<std::string> properties;
  while (true) {
    if (!next_line()) parse_error(source, line_no + 1, "unexpected end of header");
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    const std::string& kw = tokens[0];
    if (kw == "end_header") break;
    if (kw == "comment" || kw == "obj_info") continue;
    if (kw == "format") {
      if (tokens.size() != 3 || tokens[1] != "ascii") {
        parse_error(source, line_no, "only 'format ascii 1.0' is supported");
      }
      seen_format = true;
    } else if (kw == "element") {
      if (tokens.size() != 3) parse_error(source, line_no, "malformed element line");
      long long count = 0;
      const auto res = std::from_chars(tokens[2].data(), tokens[2].data() + tokens[2].size(), count);
      if (res.ec != std::errc{} || res.ptr != tokens[2].data() + tokens[2].size() || count < 0) {
        parse_error(source, line_no, "invalid element count '" + tokens[2] + "'");
      }
      if (tokens[1] == "vertex") {
        if (seen_vertex) parse_error(source, line_no, "duplicate vertex element");
        seen_vertex = true;
        in_vertex = true;
        vertex_count = count;
      } else {
        in_vertex = false;
        if (count != 0) parse_error(source, line_no, "unsupported element '" + tokens[1] + "'");
      }
    } else if (kw == "property") {
      if (tokens.size() != 3) parse_error(source, line_no, "malformed property line");
      if (!in_vertex) continue;
      const std::string& type = tokens[1];
      if (type != "double" && type != "float" && type != "float64" && type != "float32") {
        parse_error(source, line_no, "unsupported property type '" + type + "'");
      }
      properties.push_back(tokens[2]);
    } else {
      parse_error(source, line_no, "unknown header keyword '" + kw + "'");
    }
  }
  if (!seen_format) parse_error(source, line_no, "missing format line");
  if (!seen_vertex) parse_error(source, line_no, "missing vertex element");

  auto column = [&](const char* name) -> int {
    const auto it = std::find(properties.begin(), properties.end(), name);
    return it == properties.end() ? -1 : static_cast<int>(it - properties.begin());
  };
  const int cx = column("x");
  const int cy = column("y");
  const int cz = column("z");
  if (cx < 0 || cy < 0 || cz < 0) parse_error(source, line_no, "vertex needs x, y and z properties");
  const int cnx = column("nx");
  const int cny = column("ny");
  const int cnz = column("nz");
  const bool with_normals = cnx >= 0 && cny >= 0 && cnz >= 0;
  if (!with_normals && (cnx >= 0 || cny >= 0 || cnz >= 0)) {
    parse_error(source, line_no, "normals need all of nx, ny and nz");
  }

  std::vector<Vec3> points;
  std::vector<Vec3> normals;
  points.reserve(static_cast<std::size_t>(vertex_count));
  if (with_normals) normals.reserve(static_cast<std::size_t>(vertex_count));
  std::vector<double> values(properties.size());
  for (long long v = 0; v < vertex_count; ++v) {
    if (!next_line()) parse_error(source, line_no + 1, "expected " + std::to_string(vertex_count) +
                                                            " vertices, got " + std::to_string(v));
    const auto tokens = split_ws(line);
    if (tokens.size() != properties.size()) {
      parse_error(source, line_no, "expected " + std::to_string(properties.size()) +
                                       " values, got " + std::to_string(tokens.size()));
    }
    for (std::size_t i = 0; i < tokens.size(); ++i) values[i] = parse_number(tokens[i], source, line_no);
    points.emplace_back(values[cx], values[cy], values[cz]);
    if (with_normals) {
      const Vec3 n(values[cnx], values[cny], values[cnz]);
      const double len = n.norm();
      if (!(len > 0.0)) parse_error(source, line_no, "zero-length normal");
      normals.push_back(std::abs(len - 1.0) <= 1e-12 ? n : Vec3(n / len));
    }
  }
  while (next_line()) {
    if (!trim(line).empty()) parse_error(source, line_no, "unexpected data after vertex list");
  }
  if (with_normals) return PointCloud(std::move(points), std::move(normals));
  return PointCloud(std::move(points));
}

PointCloud read_cloud(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_cloud(in, path.string());
}

void write_cloud(std::ostream& out, const PointCloud& cloud) {
  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << cloud.size() << '\n';
  out << "property double x\nproperty double y\nproperty double z\n";
  if (cloud.has_normals()) out << "property double nx\nproperty double ny\nproperty double nz\n";
  out << "end_header\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.point(i);
    out << detail::digits17(p.x()) << ' ' << detail::digits17(p.y()) << ' '
        << detail::digits17(p.z());
    if (cloud.has_normals()) {
      const Vec3& n = cloud.normal(i);
      out << ' ' << detail::digits17(n.x()) << ' ' << detail::digits17(n.y()) << ' '
          << detail::digits17(n.z());
    }
    out << '\n';
  }
}

void write_cloud(const PointCloud& cloud, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_cloud(out, cloud);
  finish(out, path);
}

Trajectory read_trajectory(std::istream& in, const std::string& source) {
  Trajectory traj;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens.size() != 8) {
      parse_error(source, line_no, "expected 8 fields (stamp tx ty tz qx qy qz qw), got " +
                                       std::to_string(tokens.size()));
    }
    double v[8];
    for (int i = 0; i < 8; ++i) v[i] = parse_number(tokens[static_cast<std::size_t>(i)], source, line_no);
    Eigen::Quaterniond q(v[7], v[4], v[5], v[6]);
    if (std::abs(q.norm() - 1.0) > 1e-6) parse_error(source, line_no, "quaternion is not unit norm");
    q.normalize();
    if (!traj.empty() && !(v[0] > traj.back().stamp)) {
      parse_error(source, line_no, "stamps must be strictly increasing");
    }
    traj.append(v[0], RigidTransform(q, Vec3(v[1], v[2], v[3])));
  }
  if (traj.empty()) throw Error(ErrorCode::kEmptyTrajectory, source + ": empty trajectory");
  return traj;
}

Trajectory read_trajectory(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_trajectory(in, path.string());
}

void write_trajectory(std::ostream& out, const Trajectory& trajectory) {
  for (const auto& e : trajectory.entries()) {
    const Vec3& t = e.pose.translation();
    const auto& q = e.pose.rotation();
    out << detail::shortest(e.stamp) << ' ' << detail::shortest(t.x()) << ' '
        << detail::shortest(t.y()) << ' ' << detail::shortest(t.z()) << ' '
        << detail::shortest(q.x()) << ' ' << detail::shortest(q.y()) << ' '
        << detail::shortest(q.z()) << ' ' << detail::shortest(q.w()) << '\n';
  }
}

void write_trajectory(const Trajectory& trajectory, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_trajectory(out, trajectory);
  finish(out, path);
}

KeyValueConfig KeyValueConfig::parse(std::istream& in, const std::string& source) {
  KeyValueConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) parse_error(source, line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) parse_error(source, line_no, "empty key");
    if (cfg.has(key)) parse_error(source, line_no, "duplicate key '" + key + "'");
    cfg.values_[key] = value;
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse(in, path.string());
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  double v = 0.0;
  if (!to_double(it->second, v) || !std::isfinite(v)) {
    throw Error(ErrorCode::kParse, "config key '" + key + "' is not a number: '" + it->second + "'");
  }
  return v;
}

long long KeyValueConfig::get_int(const std::string& key, long long fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  long long v = 0;
  const auto& s = it->second;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kParse, "config key '" + key + "' is not an integer: '" + s + "'");
  }
  return v;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const auto& s = it->second;
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw Error(ErrorCode::kParse, "config key '" + key + "' is not a boolean: '" + s + "'");
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

void KeyValueConfig::reject_unknown(const std::vector<std::string>& known) const {
  for (const auto& [key, value] : values_) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw Error(ErrorCode::kParse, "unknown config key '" + key + "'");
    }
  }
}

}  // namespace gricp
