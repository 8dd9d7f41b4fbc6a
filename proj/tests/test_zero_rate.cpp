#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <doctest.h>

#include "detex/coupling.hpp"
#include "detex/info.hpp"
#include "detex/model.hpp"
#include "detex/zero_rate.hpp"
#include "test_util.hpp"

using namespace detex;

namespace {

HypothesisModel example1() {
  std::vector<std::vector<JointPmf2>> joints;
  for (int m = 0; m < 3; ++m)
    joints.push_back({testutil::example1_joint(m), testutil::example1_joint(m)});
  return HypothesisModel(std::move(joints), {0.2, 0.2});
}

// Direct re-evaluation of the cell score, straight from solver calls.
int argmax_cell_direct(const HypothesisModel& model, const MappingB& b, const TiltVector& r,
                       const Pmf& point) {
  const double inf = std::numeric_limits<double>::infinity();
  int best_cell = 0;
  double best = -inf;
  for (int j = 0; j < b.num_cells; ++j) {
    double score = inf;
    for (int kappa = 0; kappa < model.num_detectors(); ++kappa) {
      double inner = inf;
      for (int m = 0; m < model.num_hypotheses(); ++m) {
        if (b(m) != j || m == kappa) continue;
        inner = std::min(inner, iproject_two_marginals(model.joint(kappa, kappa), point,
                                                       model.detector_marginal(m, kappa))
                                    .value);
      }
      double tilt = 0.0;
      for (int l = kappa; l < model.num_detectors() - 1; ++l) tilt += r.r[static_cast<std::size_t>(l)];
      score = std::min(score, inner + tilt);
    }
    if (score > best) {
      best = score;
      best_cell = j;
    }
  }
  return best_cell;
}

}  // namespace

TEST_CASE("rectangle region") {
  HypothesisModel e1 = example1();

  SUBCASE("needs more cells than distinct marginals") {
    CHECK_THROWS_AS(rectangle_region(e1, 3), std::invalid_argument);
    CHECK_NOTHROW(rectangle_region(e1, 4));
  }

  SUBCASE("single detector corner matches the grid oracle") {
    JointPmf2 p1({0.4, 0.1, 0.1, 0.4}, 2, 2);
    JointPmf2 p2({0.15, 0.25, 0.35, 0.25}, 2, 2);
    HypothesisModel m({{p1}, {p2}}, {0.1});
    ExponentPoint corner = rectangle_region(m, 3);
    double oracle = brute_force_min(
        two_marginal_problem(p1, p2.marginal_x(), p2.marginal_y()), 1e-3);
    CHECK(corner.theta[0] == doctest::Approx(oracle).epsilon(1e-3));
  }

  SUBCASE("running example corner agrees with the oracle") {
    ExponentPoint corner = rectangle_region(e1, 4);
    for (int k = 0; k < 2; ++k) {
      double expect = std::numeric_limits<double>::infinity();
      for (int m = 0; m < 3; ++m) {
        if (m == k) continue;
        expect = std::min(expect,
                          brute_force_min(two_marginal_problem(e1.joint(k, k), e1.source_marginal(m),
                                                               e1.detector_marginal(m, k)),
                                          1e-3));
      }
      CHECK(corner.theta[static_cast<std::size_t>(k)] == doctest::Approx(expect).epsilon(2e-3));
    }
  }

  SUBCASE("near-identical alternative drives the corner toward zero") {
    JointPmf2 p1({0.4, 0.1, 0.1, 0.4}, 2, 2);
    JointPmf2 p2({0.4 - 1e-4, 0.1 + 1e-4, 0.1 + 1e-4, 0.4 - 1e-4}, 2, 2);
    HypothesisModel m({{p1}, {p2}}, {0.1});
    CHECK(rectangle_region(m, 3).theta[0] < 1e-4);
  }
}

TEST_CASE("partition construction") {
  HypothesisModel e1 = example1();
  SimplexGrid grid = simplex_grid(2, 0.02, e1.class_marginals());
  ProjectionTable table = ProjectionTable::build(e1, grid);

  SUBCASE("anchors always land in their mapped cell") {
    std::mt19937_64 rng(67);
    std::uniform_real_distribution<double> uni(-1.5, 1.5);
    for (const auto& b : enumerate_mappings(e1, 2)) {
      TiltVector r{{uni(rng)}};
      Partition part = build_partition(e1, b, r, table);
      for (int m = 0; m < 3; ++m) {
        int g = grid.index_of(e1.source_marginal(m));
        REQUIRE(g >= 0);
        CHECK(part.cell_of[static_cast<std::size_t>(g)] == b(m));
      }
    }
  }

  SUBCASE("a single cell swallows everything") {
    MappingB b{{0, 0, 0}, 1};
    Partition part = build_partition(e1, b, TiltVector{{0.0}}, table);
    for (int cell : part.cell_of) CHECK(cell == 0);
  }

  SUBCASE("assignments match a direct recomputation of the score rule") {
    MappingB b{{0, 1, 1}, 2};
    TiltVector r{{0.0}};
    Partition part = build_partition(e1, b, r, table);
    std::mt19937_64 rng(71);
    std::uniform_int_distribution<int> pick(0, grid.size() - 1);
    int checked = 0;
    while (checked < 5) {
      int g = pick(rng);
      bool is_anchor = false;
      for (int m = 0; m < 3; ++m)
        if (grid.index_of(e1.source_marginal(m)) == g) is_anchor = true;
      if (is_anchor) continue;
      CHECK(part.cell_of[static_cast<std::size_t>(g)] == argmax_cell_direct(e1, b, r, grid.point(g)));
      ++checked;
    }
  }

  SUBCASE("inconsistent mappings on shared marginals are rejected") {
    JointPmf2 a({0.3, 0.2, 0.1, 0.4}, 2, 2);
    JointPmf2 bjoint({0.25, 0.25, 0.3, 0.2}, 2, 2);  // same P_X as a
    JointPmf2 c({0.4, 0.3, 0.1, 0.2}, 2, 2);
    HypothesisModel shared({{a, a}, {bjoint, bjoint}, {c, c}}, {0.1, 0.1});
    SimplexGrid g2 = simplex_grid(2, 0.1, shared.class_marginals());
    ProjectionTable t2 = ProjectionTable::build(shared, g2);
    MappingB bad{{0, 1, 1}, 2};
    CHECK_THROWS_AS(build_partition(shared, bad, TiltVector{{0.0}}, t2), std::invalid_argument);
    MappingB good{{0, 0, 1}, 2};
    CHECK_NOTHROW(build_partition(shared, good, TiltVector{{0.0}}, t2));
  }
}

TEST_CASE("theta evaluation") {
  HypothesisModel e1 = example1();

  SUBCASE("anchor-only grid with injective mapping reproduces the rectangle corner") {
    SimplexGrid anchors = SimplexGrid::from_points(2, 0.01, e1.class_marginals());
    ProjectionTable table = ProjectionTable::build(e1, anchors);
    MappingB b{{0, 1, 2}, 4};
    TiltVector r{{0.0}};
    Partition part = build_partition(e1, b, r, table);
    ExponentPoint theta = theta_of(e1, b, r, part, table);
    ExponentPoint corner = rectangle_region(e1, 4);
    for (int k = 0; k < 2; ++k)
      CHECK(theta.theta[static_cast<std::size_t>(k)] ==
            doctest::Approx(corner.theta[static_cast<std::size_t>(k)]).epsilon(1e-12));
  }

  SUBCASE("sharing a cell can only lower the exponent") {
    SimplexGrid grid = simplex_grid(2, 0.02, e1.class_marginals());
    ProjectionTable table = ProjectionTable::build(e1, grid);
    MappingB b{{0, 0, 1}, 2};
    TiltVector r{{0.0}};
    Partition part = build_partition(e1, b, r, table);
    ExponentPoint theta = theta_of(e1, b, r, part, table);
    ExponentPoint corner = rectangle_region(e1, 4);
    for (int k = 0; k < 2; ++k)
      CHECK(theta.theta[static_cast<std::size_t>(k)] <=
            corner.theta[static_cast<std::size_t>(k)] + 1e-12);
  }

  SUBCASE("values refine monotonically as the grid sharpens") {
    MappingB b{{0, 1, 1}, 2};
    TiltVector r{{0.0}};
    std::vector<double> deltas{0.05, 0.02, 0.01};
    std::vector<ExponentPoint> at_delta;
    for (double d : deltas) {
      SimplexGrid grid = simplex_grid(2, d, e1.class_marginals());
      ProjectionTable table = ProjectionTable::build(e1, grid);
      Partition part = build_partition(e1, b, r, table);
      at_delta.push_back(theta_of(e1, b, r, part, table));
    }
    for (int k = 0; k < 2; ++k) {
      // nested lattices (1/20 and 1/50 both divide 1/100) must not increase
      CHECK(at_delta[2].theta[static_cast<std::size_t>(k)] <=
            at_delta[0].theta[static_cast<std::size_t>(k)] + 1e-15);
      CHECK(at_delta[2].theta[static_cast<std::size_t>(k)] <=
            at_delta[1].theta[static_cast<std::size_t>(k)] + 1e-15);
      // non-nested step observed monotone as well
      CHECK(at_delta[1].theta[static_cast<std::size_t>(k)] <=
            at_delta[0].theta[static_cast<std::size_t>(k)] + 1e-9);
    }
  }
}

TEST_CASE("tilt shifts keep the partition when the score order is unchanged") {
  HypothesisModel e1 = example1();
  SimplexGrid grid = simplex_grid(2, 0.05, e1.class_marginals());
  ProjectionTable table = ProjectionTable::build(e1, grid);
  MappingB b{{0, 1, 1}, 2};
  std::mt19937_64 rng(73);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    TiltVector r1{{uni(rng)}};
    TiltVector r2{{r1.r[0] + uni(rng)}};
    Partition p1 = build_partition(e1, b, r1, table);
    Partition p2 = build_partition(e1, b, r2, table);
    for (int g = 0; g < grid.size(); ++g) {
      int direct1 = argmax_cell_direct(e1, b, r1, grid.point(g));
      int direct2 = argmax_cell_direct(e1, b, r2, grid.point(g));
      if (direct1 == direct2) {
        bool anchor = false;
        for (int m = 0; m < 3; ++m)
          if (grid.index_of(e1.source_marginal(m)) == g) anchor = true;
        if (!anchor) CHECK(p1.cell_of[static_cast<std::size_t>(g)] == p2.cell_of[static_cast<std::size_t>(g)]);
      }
    }
  }
}

TEST_CASE("sweep region") {
  HypothesisModel e1 = example1();

  SUBCASE("ample message alphabet collapses the frontier to the corner") {
    RegionFrontier f = sweep_region(e1, 4, tilt_grid(2, -0.5, 0.5, 0.25), 0.05);
    ExponentPoint corner = rectangle_region(e1, 4);
    REQUIRE(f.points.size() == 1);
    for (int k = 0; k < 2; ++k)
      CHECK(f.points[0].theta[static_cast<std::size_t>(k)] ==
            doctest::Approx(corner.theta[static_cast<std::size_t>(k)]).epsilon(1e-9));
  }

  SUBCASE("scarce message alphabet yields a non-convex multi-point frontier") {
    RegionFrontier f = sweep_region(e1, 2, tilt_grid(2, -2.0, 2.0, 0.1), 0.02);
    CHECK(f.points.size() >= 5);
    CHECK(nonconvexity_margin(f.points) > 0.0);
    // no sweep point may beat the rectangle outer bound
    ExponentPoint corner = rectangle_region(e1, 4);
    for (const auto& p : f.points)
      for (int k = 0; k < 2; ++k)
        CHECK(p.theta[static_cast<std::size_t>(k)] <=
              corner.theta[static_cast<std::size_t>(k)] + 1e-9);
  }

  SUBCASE("detector-exchange symmetric models give symmetric frontiers") {
    JointPmf2 p1({0.4, 0.1, 0.1, 0.4}, 2, 2);
    JointPmf2 p2({0.15, 0.25, 0.35, 0.25}, 2, 2);
    HypothesisModel m({{p1, p1}, {p2, p2}}, {0.1, 0.1});
    RegionFrontier f = sweep_region(m, 2, tilt_grid(2, -1.0, 1.0, 0.1), 0.05);
    for (const auto& p : f.points) {
      bool mirrored = false;
      for (const auto& q : f.points)
        if (std::fabs(p.theta[0] - q.theta[1]) < 1e-9 && std::fabs(p.theta[1] - q.theta[0]) < 1e-9)
          mirrored = true;
      CHECK(mirrored);
    }
  }
}
