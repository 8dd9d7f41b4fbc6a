#include "detex/zero_rate.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "detex/errors.hpp"
#include "detex/parallel.hpp"

namespace detex {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_mapping(const HypothesisModel& model, const MappingB& b) {
  if (static_cast<int>(b.cell_of_hypothesis.size()) != model.num_hypotheses())
    throw std::invalid_argument("mapping b must cover every hypothesis");
  for (int cell : b.cell_of_hypothesis)
    if (cell < 0 || cell >= b.num_cells) throw std::invalid_argument("mapping b cell out of range");
  // Hypotheses sharing a source marginal must share a cell, otherwise the
  // anchor rule is contradictory.
  for (int m = 0; m < model.num_hypotheses(); ++m)
    for (int m2 = m + 1; m2 < model.num_hypotheses(); ++m2)
      if (model.class_of(m) == model.class_of(m2) && b(m) != b(m2))
        throw std::invalid_argument(
            "mapping b must be constant on hypotheses with equal source marginals");
}

void check_tilt(const HypothesisModel& model, const TiltVector& r) {
  if (static_cast<int>(r.r.size()) != model.num_detectors() - 1)
    throw std::invalid_argument("tilt vector needs one entry per detector boundary");
  for (double v : r.r)
    if (!std::isfinite(v)) throw std::invalid_argument("tilt entries must be finite");
}

}  // namespace

ProjectionTable::ProjectionTable(const HypothesisModel& model, SimplexGrid grid,
                                 bool all_references)
    : model_(model), grid_(std::move(grid)), all_references_(all_references) {}

std::size_t ProjectionTable::idx(int ref, int k, int m, int g) const {
  const int mm = model_.num_hypotheses();
  const int gg = grid_.size();
  return static_cast<std::size_t>(((ref * model_.num_detectors() + k) * mm + m) * gg + g);
}

double ProjectionTable::at(int ref, int k, int m, int g) const {
  if (!all_references_ && ref != k)
    throw std::invalid_argument("ProjectionTable: off-diagonal reference not built");
  return values_[idx(ref, k, m, g)];
}

ProjectionTable ProjectionTable::build(const HypothesisModel& model, const SimplexGrid& grid,
                                       bool all_references) {
  ProjectionTable t(model, grid, all_references);
  const int mm = model.num_hypotheses();
  const int kk = model.num_detectors();
  const int gg = grid.size();
  t.values_.assign(static_cast<std::size_t>(mm) * kk * mm * gg,
                   std::numeric_limits<double>::quiet_NaN());

  struct Job {
    int ref, k, m;
  };
  std::vector<Job> jobs;
  for (int k = 0; k < kk; ++k)
    for (int m = 0; m < mm; ++m) {
      if (all_references) {
        for (int ref = 0; ref < mm; ++ref) jobs.push_back({ref, k, m});
      } else if (k < mm) {
        jobs.push_back({k, k, m});
      }
    }

  parallel_for(jobs.size(), [&](std::size_t j) {
    const Job job = jobs[j];
    const JointPmf2& ref_joint = model.joint(job.ref, job.k);
    const Pmf py = model.detector_marginal(job.m, job.k);
    for (int g = 0; g < gg; ++g) {
      auto rep = iproject_two_marginals(ref_joint, grid.point(g), py);
      t.values_[t.idx(job.ref, job.k, job.m, g)] = rep.value;
    }
  });
  return t;
}

std::vector<MappingB> enumerate_mappings(const HypothesisModel& model, int num_cells) {
  const int classes = model.num_classes();
  double combos = std::pow(static_cast<double>(num_cells), classes);
  if (combos > 1e6)
    throw GuardError("enumerate_mappings: too many mappings (" + std::to_string(combos) + ")");
  std::vector<MappingB> out;
  std::vector<int> cell_of_class(static_cast<std::size_t>(classes), 0);
  for (;;) {
    MappingB b;
    b.num_cells = num_cells;
    b.cell_of_hypothesis.reserve(static_cast<std::size_t>(model.num_hypotheses()));
    for (int m = 0; m < model.num_hypotheses(); ++m)
      b.cell_of_hypothesis.push_back(cell_of_class[static_cast<std::size_t>(model.class_of(m))]);
    out.push_back(std::move(b));
    int i = 0;
    while (i < classes && ++cell_of_class[static_cast<std::size_t>(i)] == num_cells) {
      cell_of_class[static_cast<std::size_t>(i)] = 0;
      ++i;
    }
    if (i == classes) break;
  }
  return out;
}

std::vector<TiltVector> tilt_grid(int num_detectors, double r_min, double r_max, double r_step) {
  if (num_detectors < 1) throw std::invalid_argument("tilt_grid: need at least one detector");
  std::vector<double> values;
  for (double v = r_min; v <= r_max + 1e-12; v += r_step) values.push_back(v);
  if (values.empty()) values.push_back(r_min);
  const int dims = num_detectors - 1;
  std::vector<TiltVector> out;
  if (dims == 0) {
    out.push_back(TiltVector{});
    return out;
  }
  double combos = std::pow(static_cast<double>(values.size()), dims);
  if (combos > 2e6) throw GuardError("tilt_grid: too many tilt vectors");
  std::vector<std::size_t> pos(static_cast<std::size_t>(dims), 0);
  for (;;) {
    TiltVector t;
    t.r.reserve(static_cast<std::size_t>(dims));
    for (int d = 0; d < dims; ++d) t.r.push_back(values[pos[static_cast<std::size_t>(d)]]);
    out.push_back(std::move(t));
    int i = 0;
    while (i < dims && ++pos[static_cast<std::size_t>(i)] == values.size()) {
      pos[static_cast<std::size_t>(i)] = 0;
      ++i;
    }
    if (i == dims) break;
  }
  return out;
}

ExponentPoint rectangle_region(const HypothesisModel& model, int num_cells) {
  model.require_detector_targets();
  model.validate_zero_rate();
  if (num_cells <= model.num_classes())
    throw std::invalid_argument(
        "rectangle_region: message alphabet must exceed the number of distinct source marginals");
  ExponentPoint pt;
  pt.mode = "rectangle";
  pt.theta.assign(static_cast<std::size_t>(model.num_detectors()), kInf);
  for (int k = 0; k < model.num_detectors(); ++k) {
    double best = kInf;
    for (int m = 0; m < model.num_hypotheses(); ++m) {
      if (m == k) continue;
      auto rep = iproject_two_marginals(model.joint(k, k), model.source_marginal(m),
                                        model.detector_marginal(m, k));
      best = std::min(best, rep.value);
    }
    pt.theta[static_cast<std::size_t>(k)] = best;
  }
  return pt;
}

int partition_argmax_cell(const MappingB& b, const TiltVector& r, const ProjectionTable& table,
                          int g) {
  const HypothesisModel& model = table.model();
  const int kk = model.num_detectors();
  const int mm = model.num_hypotheses();
  int best_cell = 0;
  double best_score = -kInf;
  for (int j = 0; j < b.num_cells; ++j) {
    double score = kInf;
    for (int kappa = 0; kappa < kk; ++kappa) {
      double inner = kInf;
      for (int m = 0; m < mm; ++m) {
        if (b(m) != j || m == kappa) continue;
        inner = std::min(inner, table.at(kappa, kappa, m, g));
      }
      double tilt = 0.0;
      for (int l = kappa; l < kk - 1; ++l) tilt += r.r[static_cast<std::size_t>(l)];
      score = std::min(score, inner + tilt);
    }
    if (score > best_score) {
      best_score = score;
      best_cell = j;
    }
  }
  return best_cell;
}

Partition build_partition(const HypothesisModel& model, const MappingB& b, const TiltVector& r,
                          const ProjectionTable& table) {
  check_mapping(model, b);
  check_tilt(model, r);
  const SimplexGrid& grid = table.grid();
  Partition part;
  part.num_cells = b.num_cells;
  part.b = b;
  part.r = r;
  part.grid_delta = grid.delta();
  part.cell_of.assign(static_cast<std::size_t>(grid.size()), -1);

  // Anchors go to their mapped cell unconditionally.
  std::vector<int> anchor_cell(static_cast<std::size_t>(grid.size()), -1);
  for (int m = 0; m < model.num_hypotheses(); ++m) {
    int g = grid.index_of(model.source_marginal(m));
    if (g < 0)
      throw std::invalid_argument("build_partition: grid must contain every model marginal");
    anchor_cell[static_cast<std::size_t>(g)] = b(m);
  }
  for (int g = 0; g < grid.size(); ++g) {
    part.cell_of[static_cast<std::size_t>(g)] =
        anchor_cell[static_cast<std::size_t>(g)] >= 0
            ? anchor_cell[static_cast<std::size_t>(g)]
            : partition_argmax_cell(b, r, table, g);
  }
  return part;
}

Partition build_partition(const HypothesisModel& model, const MappingB& b, const TiltVector& r,
                          const SimplexGrid& grid) {
  return build_partition(model, b, r, ProjectionTable::build(model, grid));
}

ExponentPoint theta_of(const HypothesisModel& model, const MappingB& b, const TiltVector& r,
                       const Partition& partition, const ProjectionTable& table) {
  check_mapping(model, b);
  check_tilt(model, r);
  if (partition.b.cell_of_hypothesis != b.cell_of_hypothesis || partition.r.r != r.r)
    throw std::invalid_argument("theta_of: partition was built for a different (b, r)");
  model.require_detector_targets();
  const SimplexGrid& grid = table.grid();
  if (static_cast<int>(partition.cell_of.size()) != grid.size())
    throw std::invalid_argument("theta_of: partition and table use different grids");

  ExponentPoint pt;
  pt.mode = "partition";
  pt.grid_delta = partition.grid_delta;
  pt.b.reserve(b.cell_of_hypothesis.size());
  for (int cell : b.cell_of_hypothesis) pt.b.push_back(cell + 1);
  pt.r = r.r;
  pt.theta.assign(static_cast<std::size_t>(model.num_detectors()), kInf);
  for (int k = 0; k < model.num_detectors(); ++k) {
    double best = kInf;
    for (int m = 0; m < model.num_hypotheses(); ++m) {
      if (m == k) continue;
      const int cell = b(m);
      for (int g = 0; g < grid.size(); ++g)
        if (partition.cell_of[static_cast<std::size_t>(g)] == cell)
          best = std::min(best, table.at(k, k, m, g));
    }
    pt.theta[static_cast<std::size_t>(k)] = best;
  }
  return pt;
}

ExponentPoint theta_of(const HypothesisModel& model, const MappingB& b, const TiltVector& r,
                       const Partition& partition) {
  SimplexGrid grid = simplex_grid(model.nx(), partition.grid_delta, model.class_marginals());
  return theta_of(model, b, r, partition, ProjectionTable::build(model, grid));
}

RegionFrontier sweep_region(const HypothesisModel& model, int num_cells,
                            const std::vector<TiltVector>& r_grid, double delta) {
  model.require_detector_targets();
  model.validate_zero_rate();
  if (num_cells < 1) throw std::invalid_argument("sweep_region: need at least one cell");
  if (r_grid.empty()) throw std::invalid_argument("sweep_region: empty tilt grid");

  SimplexGrid grid = simplex_grid(model.nx(), delta, model.class_marginals());
  ProjectionTable table = ProjectionTable::build(model, grid);
  std::vector<MappingB> mappings = enumerate_mappings(model, num_cells);

  std::vector<ExponentPoint> points(mappings.size() * r_grid.size());
  parallel_for(points.size(), [&](std::size_t i) {
    const MappingB& b = mappings[i / r_grid.size()];
    const TiltVector& r = r_grid[i % r_grid.size()];
    Partition part = build_partition(model, b, r, table);
    points[i] = theta_of(model, b, r, part, table);
  });

  RegionFrontier frontier;
  frontier.points = pareto_maximal(std::move(points));
  return frontier;
}

}  // namespace detex
