// Regenerates tests/fixtures/three_planes: a map, a scan displaced by a known
// 4-DOF offset, and the pose that registers it back.
#include <filesystem>
#include <iostream>

#include "gricp/io.hpp"
#include "gricp/synth.hpp"

int main(int argc, char** argv) {
  using namespace gricp;
  if (argc != 2) {
    std::cerr << "usage: make_fixtures OUT_DIR\n";
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);
  const PointCloud map = three_planes_cloud(400, 2.0, 11);
  const RigidTransform offset = RigidTransform::from_yaw(0.05, Vec3(0.3, -0.2, 0.4));
  std::vector<Vec3> moved;
  for (const auto& p : map.points()) moved.push_back(offset.apply(p));
  write_cloud(map, dir / "map.ply");
  write_cloud(PointCloud(std::move(moved)), dir / "scan.ply");
  Trajectory answer;
  answer.append(0.0, offset.inverse());
  write_trajectory(answer, dir / "answer.txt");
  return 0;
}
