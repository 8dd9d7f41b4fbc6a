#pragma once

#include <vector>

#include "detex/coupling.hpp"
#include "detex/frontier.hpp"
#include "detex/model.hpp"
#include "detex/simplex_grid.hpp"

namespace detex {

/// Sensor message map b: hypothesis -> cell, stored 0-based.
struct MappingB {
  std::vector<int> cell_of_hypothesis;
  int num_cells = 0;

  int operator()(int m) const { return cell_of_hypothesis[static_cast<std::size_t>(m)]; }
};

/// Tilt vector r with one entry per detector boundary (K-1 entries).
struct TiltVector {
  std::vector<double> r;
};

/// Assignment of every grid point to a cell, with its provenance.
struct Partition {
  std::vector<int> cell_of;  // per grid index
  int num_cells = 0;
  MappingB b;
  TiltVector r;
  double grid_delta = 0.0;
};

/// Cached projections d(ref, k, m, g): the divergence of the cheapest
/// coupling with X-marginal grid[g] and Y-marginal P_{Y_k}^(m) against
/// detector k's joint under hypothesis ref. Simple-hypothesis machinery uses
/// only the diagonal ref == k; composite testing the full cube.
class ProjectionTable {
 public:
  static ProjectionTable build(const HypothesisModel& model, const SimplexGrid& grid,
                               bool all_references = false);

  double at(int ref, int k, int m, int g) const;
  const SimplexGrid& grid() const { return grid_; }
  const HypothesisModel& model() const { return model_; }
  bool has_all_references() const { return all_references_; }

 private:
  ProjectionTable(const HypothesisModel& model, SimplexGrid grid, bool all_references);

  const HypothesisModel& model_;
  SimplexGrid grid_;
  bool all_references_;
  std::vector<double> values_;
  std::size_t idx(int ref, int k, int m, int g) const;
};

/// All mappings b that are constant on distinct-marginal classes.
std::vector<MappingB> enumerate_mappings(const HypothesisModel& model, int num_cells);

/// Tilt grid {r_min, r_min + r_step, ..., r_max}^(K-1); a single empty tilt
/// when K = 1.
std::vector<TiltVector> tilt_grid(int num_detectors, double r_min, double r_max, double r_step);

/// Corner point of the exponent region when the message alphabet exceeds the
/// number of distinct source marginals (the region is its downward closure).
ExponentPoint rectangle_region(const HypothesisModel& model, int num_cells);

/// Cell that the score rule assigns to grid point g (ties to the smallest
/// cell; hypothesis-free cells score +inf and win).
int partition_argmax_cell(const MappingB& b, const TiltVector& r, const ProjectionTable& table,
                          int g);

Partition build_partition(const HypothesisModel& model, const MappingB& b, const TiltVector& r,
                          const ProjectionTable& table);
Partition build_partition(const HypothesisModel& model, const MappingB& b, const TiltVector& r,
                          const SimplexGrid& grid);

ExponentPoint theta_of(const HypothesisModel& model, const MappingB& b, const TiltVector& r,
                       const Partition& partition, const ProjectionTable& table);
ExponentPoint theta_of(const HypothesisModel& model, const MappingB& b, const TiltVector& r,
                       const Partition& partition);

/// Pareto frontier over every consistent mapping b and tilt r.
RegionFrontier sweep_region(const HypothesisModel& model, int num_cells,
                            const std::vector<TiltVector>& r_grid, double delta);

}  // namespace detex
