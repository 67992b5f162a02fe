#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "support.hpp"
#include "symap/fixtures.hpp"
#include "symap/kinematics.hpp"

using namespace symap;

namespace {

AgentModel planar_2r(double l1, double l2) {
  AgentModel arm;
  arm.name = "planar_2r";
  arm.feature_encoding = FeatureEncoding::joint_angles;
  arm.joints.resize(2);
  arm.joints[0].axis = Eigen::Vector3d::UnitZ();
  arm.joints[0].parent_link = -1;
  arm.joints[0].lower = -3.0;
  arm.joints[0].upper = 3.0;
  arm.joints[1].axis = Eigen::Vector3d::UnitZ();
  arm.joints[1].parent_link = 0;
  arm.joints[1].lower = -2.5;
  arm.joints[1].upper = 2.5;
  arm.link_lengths = {l1, l2};
  arm.keypoints = {{"tip", 1}};
  arm.chains = {{"arm", 0, 1}};
  arm.validate();
  return arm;
}

}  // namespace

TEST_CASE("cell indexing uses floor semantics around the origin") {
  WorkspaceGrid grid;
  grid.cell_size = 0.1;
  grid.half_cells = 10;
  const auto c1 = grid.cell_of(Eigen::Vector3d(-0.01, 0.51, 0.0));
  REQUIRE(c1 == std::array<int, 3>{-1, 5, 0});
  const auto c2 = grid.cell_of(Eigen::Vector3d(0.0999, -0.1, 0.99));
  REQUIRE(c2 == std::array<int, 3>{0, -1, 9});
  REQUIRE(grid.in_bounds({-10, 9, 0}));
  REQUIRE_FALSE(grid.in_bounds({10, 0, 0}));
  REQUIRE_FALSE(grid.in_bounds({0, -11, 0}));
}

TEST_CASE("a one-joint arm occupies an annulus in its rotation plane") {
  AgentModel arm;
  arm.name = "crank";
  arm.feature_encoding = FeatureEncoding::joint_angles;
  arm.joints.resize(1);
  arm.joints[0].axis = Eigen::Vector3d::UnitZ();
  arm.joints[0].parent_link = -1;
  arm.joints[0].lower = -3.1;
  arm.joints[0].upper = 3.1;
  arm.link_lengths = {1.0};
  arm.keypoints = {{"tip", 0}};
  arm.chains = {{"arm", 0, 0}};

  const WorkspaceGrid grid = sample_workspace(arm, "arm", 20000, {}, 99);
  REQUIRE(grid.samples == 20000);
  REQUIRE(grid.cell_size == Catch::Approx(1.0 / 20.0));
  REQUIRE_FALSE(grid.cells.empty());
  for (const auto& [cell, m] : grid.cells) {
    REQUIRE(cell[2] == 0);  // the tip never leaves the z = 0 plane
    const double cx = (cell[0] + 0.5) * grid.cell_size;
    const double cy = (cell[1] + 0.5) * grid.cell_size;
    const double r = std::hypot(cx, cy);
    REQUIRE(std::abs(r - 1.0) < grid.cell_size);  // on the unit circle
    // one revolute joint: the tip moves on a circle of radius 1, so the
    // velocity ellipsoid is a segment of length 1 in every configuration
    REQUIRE(m == Catch::Approx(1.0));
  }
}

TEST_CASE("cells remember the best manipulability seen, replaying the stream") {
  const AgentModel arm = planar_2r(0.6, 0.4);
  const GridSpec spec{0.08, 0.0};
  const std::uint64_t seed = 1234;
  const WorkspaceGrid grid = sample_workspace(arm, "arm", 5000, spec, seed);

  // independent replay of the sampling loop
  std::map<std::array<int, 3>, double> replay;
  Rng rng(seed);
  long long landed = 0;
  for (int s = 0; s < 5000; ++s) {
    const Pose pose = random_pose(arm, rng);
    const auto kps = forward_kinematics(arm, pose);
    const auto cell = grid.cell_of(kps[0]);
    if (!grid.in_bounds(cell)) continue;
    ++landed;
    const double m =
        std::abs(0.6 * 0.4 * std::sin(pose.angles[1]));  // analytic value
    auto [it, inserted] = replay.try_emplace(cell, m);
    if (!inserted && m > it->second) it->second = m;
  }
  REQUIRE(grid.samples == landed);
  REQUIRE(grid.cells.size() == replay.size());
  for (const auto& [cell, m] : grid.cells) {
    REQUIRE(replay.count(cell) == 1);
    REQUIRE(std::abs(replay[cell] - m) < 1e-12);
  }
}

TEST_CASE("auto bounds cover the chain's full reach") {
  const AgentModel arm = planar_2r(0.6, 0.4);
  const WorkspaceGrid grid = sample_workspace(arm, "arm", 3000, {}, 7);
  REQUIRE(grid.samples == 3000);  // nothing discarded
  REQUIRE(grid.half_cells * grid.cell_size >= Catch::Approx(1.0));
  grid.validate();
}

TEST_CASE("explicit narrow bounds discard out-of-range samples") {
  const AgentModel arm = planar_2r(0.6, 0.4);
  const WorkspaceGrid grid = sample_workspace(arm, "arm", 3000, {0.05, 0.3}, 7);
  REQUIRE(grid.samples < 3000);
  REQUIRE(grid.samples > 0);
  for (const auto& [cell, m] : grid.cells) REQUIRE(grid.in_bounds(cell));
}

TEST_CASE("workspace sampling is deterministic in the seed") {
  const AgentModel human = fixture_small_human();
  const WorkspaceGrid a = sample_workspace(human, "right_arm", 4000, {}, 21);
  const WorkspaceGrid b = sample_workspace(human, "right_arm", 4000, {}, 21);
  const WorkspaceGrid c = sample_workspace(human, "right_arm", 4000, {}, 22);
  REQUIRE(a.cells == b.cells);
  REQUIRE(a.cells != c.cells);
}

TEST_CASE("occupied diameter measures the cell bounding box") {
  WorkspaceGrid grid;
  grid.cell_size = 0.5;
  grid.half_cells = 10;
  grid.cells[{0, 0, 0}] = 0.1;
  grid.cells[{4, 0, 0}] = 0.2;
  const double expected = std::sqrt(2.5 * 2.5 + 0.5 * 0.5 + 0.5 * 0.5);
  REQUIRE(grid.occupied_diameter() == Catch::Approx(expected));
  WorkspaceGrid empty;
  empty.cell_size = 0.5;
  empty.half_cells = 10;
  REQUIRE(empty.occupied_diameter() == 0.0);
}

TEST_CASE("grid compatibility requires the same lattice") {
  const AgentModel arm = planar_2r(0.6, 0.4);
  const WorkspaceGrid a = sample_workspace(arm, "arm", 100, {0.1, 1.0}, 1);
  const WorkspaceGrid b = sample_workspace(arm, "arm", 100, {0.1, 1.0}, 2);
  const WorkspaceGrid c = sample_workspace(arm, "arm", 100, {0.2, 1.0}, 1);
  REQUIRE(a.compatible_with(b));
  REQUIRE_FALSE(a.compatible_with(c));
}
