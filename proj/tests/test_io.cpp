#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "gricp/io.hpp"
#include "support.hpp"

using namespace gricp;

namespace {

PointCloud random_cloud(std::size_t n, bool normals) {
  std::vector<Vec3> pts;
  std::vector<Vec3> ns;
  for (std::size_t i = 0; i < n; ++i) {
    pts.push_back(testing::random_vec(-100, 100));
    ns.push_back(testing::random_unit());
  }
  return normals ? PointCloud(pts, ns) : PointCloud(pts);
}

std::string cloud_text(const PointCloud& c) {
  std::ostringstream out;
  write_cloud(out, c);
  return out.str();
}

std::string error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

PointCloud parse_cloud(const std::string& s) {
  std::istringstream in(s);
  return read_cloud(in, "t.ply");
}

Trajectory parse_traj(const std::string& s) {
  std::istringstream in(s);
  return read_trajectory(in, "t.txt");
}

const char* kHeader =
    "ply\nformat ascii 1.0\nelement vertex 2\nproperty double x\nproperty double y\n"
    "property double z\nend_header\n";

}  // namespace

TEST_CASE("cloud round trip is exact") {
  for (bool normals : {false, true}) {
    const PointCloud c = random_cloud(1000, normals);
    const PointCloud back = parse_cloud(cloud_text(c));
    REQUIRE(back.size() == c.size());
    CHECK(back.has_normals() == normals);
    for (std::size_t i = 0; i < c.size(); ++i) {
      CHECK(back.point(i) == c.point(i));
      if (normals) CHECK((back.normal(i) - c.normal(i)).norm() <= 1e-15);
    }
    CHECK(cloud_text(back) == cloud_text(c));
  }
}

TEST_CASE("cloud files on disk") {
  testing::TempDir dir("io");
  const PointCloud c = random_cloud(50, true);
  write_cloud(c, dir.path() / "c.ply");
  const PointCloud back = read_cloud(dir.path() / "c.ply");
  CHECK(back.size() == 50);
  CHECK(testing::slurp(dir.path() / "c.ply") == cloud_text(c));
  CHECK_THROWS_AS(read_cloud(dir.path() / "missing.ply"), Error);
}

TEST_CASE("empty vertex list is an empty cloud") {
  const PointCloud c = parse_cloud(
      "ply\nformat ascii 1.0\nelement vertex 0\nproperty double x\nproperty double y\n"
      "property double z\nend_header\n");
  CHECK(c.empty());
}

TEST_CASE("malformed clouds name the line") {
  CHECK(error_of([] { parse_cloud(std::string(kHeader) + "1 2 3\n4 5\n"); }) ==
        "t.ply: line 9: expected 3 values, got 2");
  CHECK(error_of([] { parse_cloud(std::string(kHeader) + "1 2 x\n4 5 6\n"); })
            .starts_with("t.ply: line 8:"));
  CHECK(error_of([] { parse_cloud(std::string(kHeader) + "1 2 3\n"); }).starts_with("t.ply: line 9:"));
  CHECK(error_of([] { parse_cloud("plx\n"); }).starts_with("t.ply: line 1:"));
  CHECK(error_of([] { parse_cloud("ply\nformat binary_little_endian 1.0\n"); })
            .starts_with("t.ply: line 2:"));
  try {
    parse_cloud(std::string(kHeader) + "1 2 3\n4 5\n");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
  }
}

TEST_CASE("float properties and foreign comments are accepted") {
  const PointCloud c = parse_cloud(
      "ply\nformat ascii 1.0\ncomment made elsewhere\nelement vertex 1\nproperty float x\n"
      "property float y\nproperty float z\nend_header\n0.5 -1 2e3\n");
  REQUIRE(c.size() == 1);
  CHECK(c.point(0) == Vec3(0.5, -1, 2000));
}

TEST_CASE("trajectory round trip") {
  Trajectory t;
  for (int i = 0; i < 100; ++i) {
    t.append(0.1 * i + testing::uniform(0, 0.01),
             RigidTransform::from_euler(testing::uniform(-3, 3), testing::uniform(-1.5, 1.5),
                                        testing::uniform(-3, 3), testing::random_vec(-1e3, 1e3)));
  }
  std::ostringstream out;
  write_trajectory(out, t);
  const Trajectory back = parse_traj(out.str());
  REQUIRE(back.size() == 100);
  for (std::size_t i = 0; i < 100; ++i) {
    CHECK(back[i].stamp == t[i].stamp);
    CHECK((back[i].pose.translation() - t[i].pose.translation()).norm() <= 1e-12);
    CHECK(back[i].pose.rotation().angularDistance(t[i].pose.rotation()) <= 1e-12);
  }
  std::ostringstream again;
  write_trajectory(again, t);
  CHECK(again.str() == out.str());
}

TEST_CASE("trajectory parse errors") {
  CHECK(error_of([] { parse_traj("0 1 2 3 0 0 0 1\n1 1 2 3 0 0 1\n"); })
            .starts_with("t.txt: line 2: expected 8 fields"));
  CHECK(error_of([] { parse_traj("# only\n\n# comments\n"); }) == "t.txt: empty trajectory");
  CHECK(error_of([] { parse_traj("1 0 0 0 0 0 0 1\n1 0 0 0 0 0 0 1\n"); })
            .starts_with("t.txt: line 2:"));
  CHECK(error_of([] { parse_traj("0 0 0 0 0 0 0 2\n"); }).starts_with("t.txt: line 1:"));
  CHECK(error_of([] { parse_traj("0 0 0 zero 0 0 0 1\n"); }).starts_with("t.txt: line 1:"));
}

TEST_CASE("near-unit quaternions are normalized on load") {
  const Trajectory t = parse_traj("# header\n0 1 2 3 0 0 0 1.0000005 # trailing\n");
  REQUIRE(t.size() == 1);
  CHECK(std::abs(t[0].pose.rotation().norm() - 1.0) <= 1e-15);
  CHECK(t[0].pose.translation() == Vec3(1, 2, 3));
}

TEST_CASE("key-value config") {
  std::istringstream in("# c\na = 1.5\n\nb=7\n c = yes # tail\nname = tunnel\n");
  const KeyValueConfig cfg = KeyValueConfig::parse(in);
  CHECK(cfg.get_double("a", 0) == 1.5);
  CHECK(cfg.get_int("b", 0) == 7);
  CHECK(cfg.get_bool("c", false));
  CHECK(cfg.get_string("name", "") == "tunnel");
  CHECK(cfg.get_double("missing", 2.5) == 2.5);
  CHECK_THROWS_AS(cfg.get_double("name", 0), Error);
  CHECK_THROWS_AS(cfg.get_int("a", 0), Error);
  CHECK_NOTHROW(cfg.reject_unknown({"a", "b", "c", "name"}));
  CHECK(error_of([&] { cfg.reject_unknown({"a", "b", "c"}); }) == "unknown config key 'name'");
  std::istringstream bad("novalue\n");
  CHECK_THROWS_AS(KeyValueConfig::parse(bad), Error);
}
