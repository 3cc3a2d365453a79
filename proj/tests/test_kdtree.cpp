#include "lidar_normals/kdtree.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace lidar_normals;

namespace {

std::vector<Neighbor> brute_knn(const std::vector<Vec3>& pts, const Vec3& q, std::size_t k, std::uint32_t exclude) {
  std::vector<Neighbor> all;
  for (std::uint32_t i = 0; i < pts.size(); ++i)
    if (i != exclude) all.push_back({i, (pts[i] - q).squaredNorm()});
  std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
  });
  all.resize(std::min(k, all.size()));
  return all;
}

}  // namespace

TEST(kdtree, matches_brute_force) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10, 10);
  std::vector<Vec3> pts(3000);
  for (auto& p : pts) p = Vec3(u(rng), u(rng), u(rng));
  const KdTree tree(pts);
  for (int trial = 0; trial < 200; ++trial) {
    const std::uint32_t self = static_cast<std::uint32_t>(trial * 7);
    const Vec3 q = trial % 2 ? pts[self] : Vec3(u(rng), u(rng), u(rng));
    for (std::size_t k : {1u, 8u, 32u}) {
      const auto got = tree.knn(q, k, trial % 2 ? self : KdTree::kNone);
      const auto want = brute_knn(pts, q, k, trial % 2 ? self : KdTree::kNone);
      ASSERT_EQ(got.size(), want.size());
      for (std::size_t m = 0; m < got.size(); ++m) {
        EXPECT_EQ(got[m].index, want[m].index);
        EXPECT_EQ(got[m].dist2, want[m].dist2);
      }
    }
  }
}

TEST(kdtree, ties_resolve_to_lower_index) {
  // Integer grid with duplicates: many equal distances.
  std::vector<Vec3> pts;
  for (int rep = 0; rep < 3; ++rep)
    for (int x = 0; x < 6; ++x)
      for (int y = 0; y < 6; ++y) pts.emplace_back(x, y, 0);
  const KdTree tree(pts, 2);
  for (std::uint32_t i = 0; i < pts.size(); i += 5) {
    const auto got = tree.knn(pts[i], 9, i);
    const auto want = brute_knn(pts, pts[i], 9, i);
    for (std::size_t m = 0; m < got.size(); ++m) EXPECT_EQ(got[m].index, want[m].index);
  }
}

TEST(kdtree, count_within_and_small_inputs) {
  std::vector<Vec3> pts = {Vec3(0, 0, 0), Vec3(0.05, 0, 0), Vec3(0.2, 0, 0)};
  const KdTree tree(pts);
  EXPECT_EQ(tree.count_within(Vec3::Zero(), 0.1), 2u);
  EXPECT_EQ(tree.knn(Vec3::Zero(), 10).size(), 3u);

  const KdTree empty(std::vector<Vec3>{});
  EXPECT_TRUE(empty.knn(Vec3::Zero(), 3).empty());
}
