#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "detex/pmf.hpp"

namespace detex {

/// One linear marginal constraint: cells are grouped and each group's mass is
/// pinned to a target. Groups of one family partition the cells.
struct MarginalFamily {
  std::string name;
  std::vector<int> group_of;    // size = number of cells
  std::vector<double> target;   // size = number of groups
};

/// A constrained KL-minimization instance: minimize D(pi || reference) over
/// couplings pi satisfying every marginal family, optionally with
/// H_pi(U|Y) >= h_min. 2-d problems use nu = 1.
struct CouplingProblem {
  std::vector<double> reference;
  int nu = 1;
  int nx = 0;
  int ny = 0;
  std::vector<MarginalFamily> families;
  std::optional<double> h_min;  // lower bound on H(U|Y), nats

  int cells() const { return nu * nx * ny; }
};

CouplingProblem two_marginal_problem(const JointPmf2& q, const Pmf& px, const Pmf& py);
CouplingProblem overlapping_problem(const JointPmf3& ref, const JointPmf2& pi_ux,
                                    const JointPmf2& pi_uy);
CouplingProblem entropy_problem(const JointPmf3& ref, const JointPmf2& pi_ux, const Pmf& py,
                                double h_min);

struct SolverReport {
  double value = 0.0;              // nats; +inf when infeasible
  std::vector<double> argmin;      // flattened coupling, empty when infeasible
  int nu = 1;
  int nx = 0;
  int ny = 0;
  long iterations = 0;
  double residual = 0.0;           // max constraint violation (entropy deficit included)
  bool converged = false;
  std::string method;
};

inline constexpr double kDefaultSolverTol = 1e-9;
inline constexpr long kDefaultMaxIter = 100000;
inline constexpr double kEntropyLambdaMax = 50.0;

/// min D(pi||q) with pi_X = px, pi_Y = py, by iterative proportional fitting.
/// Infeasible support patterns (checked by max-flow up front) report +inf.
SolverReport iproject_two_marginals(const JointPmf2& q, const Pmf& px, const Pmf& py,
                                    double tol = kDefaultSolverTol,
                                    long max_iter = kDefaultMaxIter);

/// min D(pi||ref) with pi_UX and pi_UY pinned, by cyclic alternating
/// projections onto the two linear families. The two targets must carry the
/// same U-marginal within 1e-10.
SolverReport iproject_overlapping(const JointPmf3& ref, const JointPmf2& pi_ux,
                                  const JointPmf2& pi_uy, double tol = kDefaultSolverTol,
                                  long max_iter = kDefaultMaxIter);

/// min D(pi||ref) with pi_UX = pi_ux, pi_Y = py and H_pi(U|Y) >= h_min.
/// The entropy constraint is handled by dual bisection on its multiplier;
/// when the plain projection already satisfies it, that solution is returned
/// unchanged.
SolverReport iproject_entropy_constrained(const JointPmf3& ref, const JointPmf2& pi_ux,
                                          const Pmf& py, double h_min,
                                          double tol = kDefaultSolverTol);

/// Validation oracle: exact minimum of the quantized objective over the
/// delta-lattice of couplings meeting every constraint within delta slack,
/// reported as the divergence of the winning coupling after repair to exact
/// feasibility (so the result upper-bounds the true minimum). Guard: at most
/// 12 cells.
double brute_force_min(const CouplingProblem& problem, double delta);

namespace oracle {

struct LatticeResult {
  double lattice_value;            // min of the quantized objective, +inf if empty
  std::vector<std::int64_t> counts;
  std::int64_t denominator = 0;
  std::int64_t nodes = 0;          // enumeration effort
  bool used_flow = false;
};

/// force_path: 0 auto, 1 enumeration, 2 min-cost-flow (two-marginal 2-d only).
LatticeResult lattice_minimum(const CouplingProblem& problem, double delta, int force_path = 0);

/// Rounds a lattice coupling to exact constraint marginals (scale-down plus
/// rank-one residual fill per connected block).
std::vector<double> repair_to_feasible(const CouplingProblem& problem,
                                       const std::vector<std::int64_t>& counts,
                                       std::int64_t denominator);

}  // namespace oracle

namespace detail {

/// Cyclic proportional scaling onto the families, starting from `start`.
/// divergence_trace, when given, records D(pi_t || reference) after each cycle.
struct ScalingOutcome {
  std::vector<double> pi;
  long iterations = 0;
  double residual = 0.0;
  bool converged = false;
};
ScalingOutcome alternating_scaling(const std::vector<double>& reference,
                                   const std::vector<double>& start,
                                   const std::vector<MarginalFamily>& families, double tol,
                                   long max_iter,
                                   std::vector<double>* divergence_trace = nullptr);

/// Maximum-flow support feasibility for a two-family problem.
bool support_feasible(const CouplingProblem& problem);

}  // namespace detail

}  // namespace detex
