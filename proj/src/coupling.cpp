#include "detex/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

#include "detex/info.hpp"

namespace detex {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double kl_flat(const std::vector<double>& p, const std::vector<double>& q) {
  return kl_divergence_flat(p, q);
}

MarginalFamily family_from_groups(std::string name, int cells,
                                  const std::vector<int>& group_of, std::vector<double> target) {
  MarginalFamily f;
  f.name = std::move(name);
  f.group_of = group_of;
  f.target = std::move(target);
  if (static_cast<int>(f.group_of.size()) != cells)
    throw std::invalid_argument("MarginalFamily: group map size mismatch");
  return f;
}

// Group index helpers for the three constraint layouts used here.
std::vector<int> groups_x_2d(int nx, int ny) {
  std::vector<int> g(static_cast<std::size_t>(nx) * ny);
  for (int x = 0; x < nx; ++x)
    for (int y = 0; y < ny; ++y) g[static_cast<std::size_t>(x * ny + y)] = x;
  return g;
}
std::vector<int> groups_y_2d(int nx, int ny) {
  std::vector<int> g(static_cast<std::size_t>(nx) * ny);
  for (int x = 0; x < nx; ++x)
    for (int y = 0; y < ny; ++y) g[static_cast<std::size_t>(x * ny + y)] = y;
  return g;
}
std::vector<int> groups_ux_3d(int nu, int nx, int ny) {
  std::vector<int> g(static_cast<std::size_t>(nu) * nx * ny);
  for (int u = 0; u < nu; ++u)
    for (int x = 0; x < nx; ++x)
      for (int y = 0; y < ny; ++y) g[static_cast<std::size_t>((u * nx + x) * ny + y)] = u * nx + x;
  return g;
}
std::vector<int> groups_uy_3d(int nu, int nx, int ny) {
  std::vector<int> g(static_cast<std::size_t>(nu) * nx * ny);
  for (int u = 0; u < nu; ++u)
    for (int x = 0; x < nx; ++x)
      for (int y = 0; y < ny; ++y) g[static_cast<std::size_t>((u * nx + x) * ny + y)] = u * ny + y;
  return g;
}
std::vector<int> groups_ycol_3d(int nu, int nx, int ny) {
  std::vector<int> g(static_cast<std::size_t>(nu) * nx * ny);
  for (int u = 0; u < nu; ++u)
    for (int x = 0; x < nx; ++x)
      for (int y = 0; y < ny; ++y) g[static_cast<std::size_t>((u * nx + x) * ny + y)] = y;
  return g;
}

double family_residual(const std::vector<double>& pi, const MarginalFamily& f) {
  std::vector<double> sums(f.target.size(), 0.0);
  for (std::size_t c = 0; c < pi.size(); ++c) sums[static_cast<std::size_t>(f.group_of[c])] += pi[c];
  double r = 0.0;
  for (std::size_t g = 0; g < sums.size(); ++g) r = std::max(r, std::fabs(sums[g] - f.target[g]));
  return r;
}

SolverReport infeasible_report(const CouplingProblem& p, std::string method) {
  SolverReport rep;
  rep.value = kInf;
  rep.nu = p.nu;
  rep.nx = p.nx;
  rep.ny = p.ny;
  rep.residual = kInf;
  rep.converged = true;  // infeasibility is a definitive answer
  rep.method = std::move(method);
  return rep;
}

SolverReport run_linear(const CouplingProblem& p, double tol, long max_iter) {
  if (!detail::support_feasible(p)) return infeasible_report(p, "infeasible");
  auto out = detail::alternating_scaling(p.reference, p.reference, p.families, tol, max_iter);
  SolverReport rep;
  rep.value = kl_flat(out.pi, p.reference);
  rep.argmin = std::move(out.pi);
  rep.nu = p.nu;
  rep.nx = p.nx;
  rep.ny = p.ny;
  rep.iterations = out.iterations;
  rep.residual = out.residual;
  rep.converged = out.converged;
  rep.method = "ipf";
  return rep;
}

double entropy_u_given_y(const std::vector<double>& pi, int nu, int nx, int ny) {
  std::vector<double> uy(static_cast<std::size_t>(nu) * ny, 0.0);
  for (int u = 0; u < nu; ++u)
    for (int x = 0; x < nx; ++x)
      for (int y = 0; y < ny; ++y)
        uy[static_cast<std::size_t>(u * ny + y)] += pi[static_cast<std::size_t>((u * nx + x) * ny + y)];
  return conditional_entropy_rows_given_cols(uy, nu, ny);
}

// Inner problem of the dual loop: min D(pi||ref) - lambda * H_pi(U|Y) over the
// linear families, by KL-proximal gradient steps with step 1/(1+lambda). Each
// step multiplies by ref^(1-a) * (pi(x|u,y) * pi_Y(y))^a with a = lambda/(1+lambda)
// and projects back onto the families.
std::vector<double> entropy_inner_solve(const CouplingProblem& p, double lambda,
                                        const std::vector<double>& warm, double tol) {
  const int nu = p.nu, nx = p.nx, ny = p.ny;
  const std::size_t cells = p.reference.size();
  const double a = lambda / (1.0 + lambda);
  std::vector<double> pi = warm;
  std::vector<double> w(cells, 0.0);
  std::vector<double> uy(static_cast<std::size_t>(nu) * ny, 0.0);
  std::vector<double> ycol(static_cast<std::size_t>(ny), 0.0);

  double prev_obj = kInf;
  int stall = 0;
  const int max_steps = 20000;
  for (int step = 0; step < max_steps; ++step) {
    std::fill(uy.begin(), uy.end(), 0.0);
    std::fill(ycol.begin(), ycol.end(), 0.0);
    for (int u = 0; u < nu; ++u)
      for (int x = 0; x < nx; ++x)
        for (int y = 0; y < ny; ++y) {
          double v = pi[static_cast<std::size_t>((u * nx + x) * ny + y)];
          uy[static_cast<std::size_t>(u * ny + y)] += v;
          ycol[static_cast<std::size_t>(y)] += v;
        }

    const double obj = kl_flat(pi, p.reference) - lambda * conditional_entropy_rows_given_cols(uy, nu, ny);
    if (std::fabs(prev_obj - obj) <= 1e-13 * (1.0 + std::fabs(obj))) {
      if (++stall >= 3) break;
    } else {
      stall = 0;
    }
    prev_obj = obj;

    for (int u = 0; u < nu; ++u)
      for (int x = 0; x < nx; ++x)
        for (int y = 0; y < ny; ++y) {
          const std::size_t c = static_cast<std::size_t>((u * nx + x) * ny + y);
          const double q = p.reference[c];
          if (q == 0.0) {
            w[c] = 0.0;
            continue;
          }
          const double muy = uy[static_cast<std::size_t>(u * ny + y)];
          const double my = ycol[static_cast<std::size_t>(y)];
          // pi(x|u,y) * pi_Y(y); the conditional stays bounded as cells vanish.
          const double cond = (muy > 0.0) ? pi[c] / muy : 1.0;
          double ratio = cond * my;
          if (ratio < 1e-300) ratio = 1e-300;
          w[c] = std::pow(q, 1.0 - a) * std::pow(ratio, a);
        }
    auto proj = detail::alternating_scaling(p.reference, w, p.families, tol, 400);
    pi = std::move(proj.pi);
  }
  return pi;
}

}  // namespace

CouplingProblem two_marginal_problem(const JointPmf2& q, const Pmf& px, const Pmf& py) {
  if (px.size() != q.nx() || py.size() != q.ny())
    throw std::invalid_argument("two_marginal_problem: shape mismatch");
  CouplingProblem p;
  p.reference = q.probs();
  p.nu = 1;
  p.nx = q.nx();
  p.ny = q.ny();
  p.families.push_back(
      family_from_groups("X", p.cells(), groups_x_2d(p.nx, p.ny), px.probs()));
  p.families.push_back(
      family_from_groups("Y", p.cells(), groups_y_2d(p.nx, p.ny), py.probs()));
  return p;
}

CouplingProblem overlapping_problem(const JointPmf3& ref, const JointPmf2& pi_ux,
                                    const JointPmf2& pi_uy) {
  if (pi_ux.nx() != ref.nu() || pi_ux.ny() != ref.nx() || pi_uy.nx() != ref.nu() ||
      pi_uy.ny() != ref.ny())
    throw std::invalid_argument("overlapping_problem: shape mismatch");
  CouplingProblem p;
  p.reference = ref.probs();
  p.nu = ref.nu();
  p.nx = ref.nx();
  p.ny = ref.ny();
  p.families.push_back(
      family_from_groups("UX", p.cells(), groups_ux_3d(p.nu, p.nx, p.ny), pi_ux.probs()));
  p.families.push_back(
      family_from_groups("UY", p.cells(), groups_uy_3d(p.nu, p.nx, p.ny), pi_uy.probs()));
  return p;
}

CouplingProblem entropy_problem(const JointPmf3& ref, const JointPmf2& pi_ux, const Pmf& py,
                                double h_min) {
  if (pi_ux.nx() != ref.nu() || pi_ux.ny() != ref.nx() || py.size() != ref.ny())
    throw std::invalid_argument("entropy_problem: shape mismatch");
  if (!(h_min >= 0.0 && h_min <= std::log(static_cast<double>(ref.nu())) + 1e-12))
    throw std::invalid_argument("entropy_problem: h_min outside [0, log|U|]");
  CouplingProblem p;
  p.reference = ref.probs();
  p.nu = ref.nu();
  p.nx = ref.nx();
  p.ny = ref.ny();
  p.families.push_back(
      family_from_groups("UX", p.cells(), groups_ux_3d(p.nu, p.nx, p.ny), pi_ux.probs()));
  p.families.push_back(
      family_from_groups("Y", p.cells(), groups_ycol_3d(p.nu, p.nx, p.ny), py.probs()));
  p.h_min = h_min;
  return p;
}

SolverReport iproject_two_marginals(const JointPmf2& q, const Pmf& px, const Pmf& py, double tol,
                                    long max_iter) {
  if (!(tol > 0.0)) throw std::invalid_argument("iproject_two_marginals: tol must be positive");
  return run_linear(two_marginal_problem(q, px, py), tol, max_iter);
}

SolverReport iproject_overlapping(const JointPmf3& ref, const JointPmf2& pi_ux,
                                  const JointPmf2& pi_uy, double tol, long max_iter) {
  CouplingProblem p = overlapping_problem(ref, pi_ux, pi_uy);
  // The two targets must agree on the shared U-marginal.
  for (int u = 0; u < ref.nu(); ++u) {
    double su = 0.0, sy = 0.0;
    for (int x = 0; x < ref.nx(); ++x) su += pi_ux.at(u, x);
    for (int y = 0; y < ref.ny(); ++y) sy += pi_uy.at(u, y);
    if (std::fabs(su - sy) > 1e-10) return infeasible_report(p, "inconsistent-u-marginals");
  }
  return run_linear(p, tol, max_iter);
}

SolverReport iproject_entropy_constrained(const JointPmf3& ref, const JointPmf2& pi_ux,
                                          const Pmf& py, double h_min, double tol) {
  CouplingProblem p = entropy_problem(ref, pi_ux, py, h_min);
  SolverReport base = run_linear(p, tol, kDefaultMaxIter);
  if (base.value == kInf) return base;
  if (entropy_u_given_y(base.argmin, p.nu, p.nx, p.ny) >= h_min - 1e-12) return base;

  // Dual bisection on the entropy multiplier. H of the inner solution is
  // nondecreasing in lambda; keep the feasible end of the bracket.
  double lo = 0.0, hi = kEntropyLambdaMax;
  std::vector<double> warm = base.argmin;
  std::vector<double> pi_hi = entropy_inner_solve(p, hi, warm, tol);
  double h_hi = entropy_u_given_y(pi_hi, p.nu, p.nx, p.ny);
  long iterations = base.iterations;
  SolverReport rep;
  rep.nu = p.nu;
  rep.nx = p.nx;
  rep.ny = p.ny;
  if (h_hi < h_min) {
    if (h_hi < h_min - 1e-6) return infeasible_report(p, "infeasible-entropy");
    rep.value = kl_flat(pi_hi, p.reference);
    rep.argmin = std::move(pi_hi);
    rep.iterations = iterations;
    rep.residual = h_min - h_hi;
    rep.converged = false;  // bracket not found within lambda_max
    rep.method = "ipf+entropy";
    return rep;
  }
  for (int it = 0; it < 60 && (hi - lo) > 1e-11 * (1.0 + hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    std::vector<double> pi_mid = entropy_inner_solve(p, mid, warm, tol);
    const double h_mid = entropy_u_given_y(pi_mid, p.nu, p.nx, p.ny);
    ++iterations;
    if (h_mid >= h_min) {
      hi = mid;
      pi_hi = std::move(pi_mid);
      if (h_mid - h_min <= 1e-10) break;
    } else {
      lo = mid;
    }
    warm = pi_hi;
  }
  double marg_resid = 0.0;
  for (const auto& f : p.families) marg_resid = std::max(marg_resid, family_residual(pi_hi, f));
  rep.value = kl_flat(pi_hi, p.reference);
  rep.argmin = std::move(pi_hi);
  rep.iterations = iterations;
  rep.residual = marg_resid;
  rep.converged = marg_resid <= tol;
  rep.method = "ipf+entropy";
  return rep;
}

namespace detail {

ScalingOutcome alternating_scaling(const std::vector<double>& reference,
                                   const std::vector<double>& start,
                                   const std::vector<MarginalFamily>& families, double tol,
                                   long max_iter, std::vector<double>* divergence_trace) {
  ScalingOutcome out;
  out.pi = start;
  const std::size_t cells = start.size();
  std::vector<std::vector<double>> sums;
  sums.reserve(families.size());
  for (const auto& f : families) sums.emplace_back(f.target.size(), 0.0);

  for (long cycle = 0; cycle < max_iter; ++cycle) {
    for (std::size_t fi = 0; fi < families.size(); ++fi) {
      const auto& f = families[fi];
      auto& s = sums[fi];
      std::fill(s.begin(), s.end(), 0.0);
      for (std::size_t c = 0; c < cells; ++c) s[static_cast<std::size_t>(f.group_of[c])] += out.pi[c];
      for (std::size_t c = 0; c < cells; ++c) {
        const std::size_t g = static_cast<std::size_t>(f.group_of[c]);
        if (f.target[g] == 0.0) {
          out.pi[c] = 0.0;
        } else if (s[g] > 0.0) {
          out.pi[c] *= f.target[g] / s[g];
        }
        // s[g] == 0 with positive target: mass vanished numerically; the
        // residual below stays large and the caller sees unconverged.
      }
      // The iterates right after the leading projection climb monotonically
      // to the optimum; later sub-steps in a cycle need not.
      if (divergence_trace && fi == 0) divergence_trace->push_back(kl_flat(out.pi, reference));
    }
    out.iterations = cycle + 1;
    double resid = 0.0;
    for (const auto& f : families) resid = std::max(resid, family_residual(out.pi, f));
    out.residual = resid;
    if (resid <= tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

bool support_feasible(const CouplingProblem& problem) {
  if (problem.families.size() != 2) throw std::invalid_argument("support_feasible: need 2 families");
  const auto& fa = problem.families[0];
  const auto& fb = problem.families[1];
  const int na = static_cast<int>(fa.target.size());
  const int nb = static_cast<int>(fb.target.size());
  const int nodes = na + nb + 2;
  const int source = 0, sink = nodes - 1;

  std::vector<std::vector<double>> cap(static_cast<std::size_t>(nodes),
                                       std::vector<double>(static_cast<std::size_t>(nodes), 0.0));
  for (int a = 0; a < na; ++a) cap[static_cast<std::size_t>(source)][static_cast<std::size_t>(1 + a)] = fa.target[static_cast<std::size_t>(a)];
  for (int b = 0; b < nb; ++b) cap[static_cast<std::size_t>(1 + na + b)][static_cast<std::size_t>(sink)] = fb.target[static_cast<std::size_t>(b)];
  for (std::size_t c = 0; c < problem.reference.size(); ++c)
    if (problem.reference[c] > 0.0)
      cap[static_cast<std::size_t>(1 + fa.group_of[c])][static_cast<std::size_t>(1 + na + fb.group_of[c])] = 2.0;

  // Edmonds-Karp; the augmentation count is combinatorial, so real-valued
  // capacities terminate.
  double flow = 0.0;
  for (;;) {
    std::vector<int> parent(static_cast<std::size_t>(nodes), -1);
    parent[static_cast<std::size_t>(source)] = source;
    std::queue<int> q;
    q.push(source);
    while (!q.empty() && parent[static_cast<std::size_t>(sink)] < 0) {
      int v = q.front();
      q.pop();
      for (int w = 0; w < nodes; ++w)
        if (parent[static_cast<std::size_t>(w)] < 0 && cap[static_cast<std::size_t>(v)][static_cast<std::size_t>(w)] > 1e-15) {
          parent[static_cast<std::size_t>(w)] = v;
          q.push(w);
        }
    }
    if (parent[static_cast<std::size_t>(sink)] < 0) break;
    double aug = kInf;
    for (int v = sink; v != source; v = parent[static_cast<std::size_t>(v)])
      aug = std::min(aug, cap[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])][static_cast<std::size_t>(v)]);
    for (int v = sink; v != source; v = parent[static_cast<std::size_t>(v)]) {
      cap[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])][static_cast<std::size_t>(v)] -= aug;
      cap[static_cast<std::size_t>(v)][static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])] += aug;
    }
    flow += aug;
  }
  return flow >= 1.0 - 1e-11;
}

}  // namespace detail

}  // namespace detex
