#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "detex/coupling.hpp"
#include "detex/errors.hpp"
#include "detex/info.hpp"

namespace detex {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
using std::int64_t;

struct Window {
  int64_t lo;
  int64_t hi;
};

std::vector<Window> windows_for(const MarginalFamily& f, int64_t n, double delta) {
  std::vector<Window> w;
  w.reserve(f.target.size());
  for (double t : f.target) {
    int64_t lo = static_cast<int64_t>(std::ceil(static_cast<double>(n) * (t - delta) - 1e-9));
    int64_t hi = static_cast<int64_t>(std::floor(static_cast<double>(n) * (t + delta) + 1e-9));
    lo = std::max<int64_t>(lo, 0);
    hi = std::min<int64_t>(hi, n);
    w.push_back({lo, hi});
  }
  return w;
}

// Quantized objective term for one cell: (t/n) * ln((t/n)/q), in nats.
struct CellObjective {
  explicit CellObjective(int64_t n) : n_(static_cast<double>(n)) {
    tln_.resize(static_cast<std::size_t>(n) + 1, 0.0);
    for (int64_t t = 1; t <= n; ++t)
      tln_[static_cast<std::size_t>(t)] = static_cast<double>(t) * std::log(static_cast<double>(t));
  }
  double eval(int64_t t, double log_nq) const {
    if (t == 0) return 0.0;
    return (tln_[static_cast<std::size_t>(t)] - static_cast<double>(t) * log_nq) / n_;
  }

 private:
  double n_;
  std::vector<double> tln_;
};

double lattice_entropy_u_given_y(const std::vector<int64_t>& counts, const CouplingProblem& p,
                                 int64_t n) {
  std::vector<double> uy(static_cast<std::size_t>(p.nu) * p.ny, 0.0);
  for (int u = 0; u < p.nu; ++u)
    for (int x = 0; x < p.nx; ++x)
      for (int y = 0; y < p.ny; ++y)
        uy[static_cast<std::size_t>(u * p.ny + y)] +=
            static_cast<double>(counts[static_cast<std::size_t>((u * p.nx + x) * p.ny + y)]) /
            static_cast<double>(n);
  return conditional_entropy_rows_given_cols(uy, p.nu, p.ny);
}

double repaired_entropy_u_given_y(const std::vector<double>& pi, const CouplingProblem& p) {
  std::vector<double> uy(static_cast<std::size_t>(p.nu) * p.ny, 0.0);
  for (int u = 0; u < p.nu; ++u)
    for (int x = 0; x < p.nx; ++x)
      for (int y = 0; y < p.ny; ++y)
        uy[static_cast<std::size_t>(u * p.ny + y)] +=
            pi[static_cast<std::size_t>((u * p.nx + x) * p.ny + y)];
  return conditional_entropy_rows_given_cols(uy, p.nu, p.ny);
}

// ---- exhaustive enumeration over the slack-feasible lattice -------------

class LatticeEnumerator {
 public:
  LatticeEnumerator(const CouplingProblem& p, int64_t n, double delta)
      : p_(p), n_(n), obj_(n), cells_(p.cells()) {
    for (const auto& f : p.families) windows_.push_back(windows_for(f, n, delta));
    log_nq_.resize(static_cast<std::size_t>(cells_));
    for (int c = 0; c < cells_; ++c) {
      double q = p.reference[static_cast<std::size_t>(c)];
      log_nq_[static_cast<std::size_t>(c)] =
          q > 0.0 ? std::log(static_cast<double>(n) * q) : 0.0;
    }
    suffix_lb_.assign(static_cast<std::size_t>(cells_) + 1, 0.0);
    for (int c = cells_ - 1; c >= 0; --c) {
      double q = p.reference[static_cast<std::size_t>(c)];
      suffix_lb_[static_cast<std::size_t>(c)] =
          suffix_lb_[static_cast<std::size_t>(c) + 1] - (q > 0.0 ? q / 2.718281828459045 : 0.0);
    }
    const std::size_t nf = p.families.size();
    partial_.resize(nf);
    open_cells_.resize(nf);
    slack_.resize(nf);
    need_.resize(nf);
    for (std::size_t f = 0; f < nf; ++f) {
      const auto& fam = p.families[f];
      partial_[f].assign(fam.target.size(), 0);
      open_cells_[f].assign(fam.target.size(), 0);
      for (int c = 0; c < cells_; ++c) ++open_cells_[f][static_cast<std::size_t>(fam.group_of[static_cast<std::size_t>(c)])];
      int64_t slack = 0, need = 0;
      for (std::size_t g = 0; g < fam.target.size(); ++g) {
        slack += windows_[f][g].hi;
        need += windows_[f][g].lo;
      }
      slack_[f] = slack;
      need_[f] = need;
    }
    counts_.assign(static_cast<std::size_t>(cells_), 0);
  }

  oracle::LatticeResult run() {
    oracle::LatticeResult best;
    best.lattice_value = kInf;
    best.denominator = n_;
    dfs(0, n_, 0.0, best);
    best.nodes = nodes_;
    return best;
  }

 private:
  void dfs(int c, int64_t remaining, double partial_obj, oracle::LatticeResult& best) {
    if (++nodes_ > kNodeBudget)
      throw GuardError("brute_force_min: lattice enumeration exceeds node budget");
    if (c == cells_) {
      if (remaining != 0) return;
      if (partial_obj >= best.lattice_value) return;
      if (p_.h_min) {
        if (lattice_entropy_u_given_y(counts_, p_, n_) < *p_.h_min - entropy_prefilter_slack())
          return;
        auto repaired = oracle::repair_to_feasible(p_, counts_, n_);
        if (repaired_entropy_u_given_y(repaired, p_) < *p_.h_min) return;
      }
      best.lattice_value = partial_obj;
      best.counts = counts_;
      return;
    }
    if (partial_obj + suffix_lb_[static_cast<std::size_t>(c)] >= best.lattice_value) return;

    const std::size_t nf = p_.families.size();
    int64_t t_hi = remaining;
    int64_t t_lo = 0;
    for (std::size_t f = 0; f < nf; ++f) {
      const auto g = static_cast<std::size_t>(p_.families[f].group_of[static_cast<std::size_t>(c)]);
      t_hi = std::min(t_hi, windows_[f][g].hi - partial_[f][g]);
      if (open_cells_[f][g] == 1) t_lo = std::max(t_lo, windows_[f][g].lo - partial_[f][g]);
    }
    if (p_.reference[static_cast<std::size_t>(c)] == 0.0) {
      if (t_lo > 0) return;
      t_hi = 0;
    }
    if (c == cells_ - 1) {
      if (remaining < t_lo || remaining > t_hi) return;
      t_lo = t_hi = remaining;
    }
    for (int64_t t = t_lo; t <= t_hi; ++t) {
      bool ok = true;
      std::size_t applied = 0;
      for (std::size_t f = 0; f < nf; ++f) {
        const auto g = static_cast<std::size_t>(p_.families[f].group_of[static_cast<std::size_t>(c)]);
        partial_[f][g] += t;
        slack_[f] -= t;
        need_[f] -= std::min(t, std::max<int64_t>(windows_[f][g].lo - (partial_[f][g] - t), 0));
        --open_cells_[f][g];
        if (open_cells_[f][g] == 0) {
          slack_[f] -= windows_[f][g].hi - partial_[f][g];
          if (partial_[f][g] < windows_[f][g].lo) ok = false;
        }
        ++applied;
        if (!ok) break;
      }
      if (ok) {
        const int64_t rem = remaining - t;
        bool feasible = true;
        for (std::size_t f = 0; f < nf; ++f)
          if (slack_[f] < rem || need_[f] > rem) {
            feasible = false;
            break;
          }
        if (feasible) {
          counts_[static_cast<std::size_t>(c)] = t;
          dfs(c + 1, rem,
              partial_obj + obj_.eval(t, log_nq_[static_cast<std::size_t>(c)]), best);
          counts_[static_cast<std::size_t>(c)] = 0;
        }
      }
      for (std::size_t f = 0; f < applied; ++f) {
        const auto g = static_cast<std::size_t>(p_.families[f].group_of[static_cast<std::size_t>(c)]);
        if (open_cells_[f][g] == 0) slack_[f] += windows_[f][g].hi - partial_[f][g];
        ++open_cells_[f][g];
        partial_[f][g] -= t;
        slack_[f] += t;
        need_[f] += std::min(t, std::max<int64_t>(windows_[f][g].lo - partial_[f][g], 0));
      }
    }
  }

  double entropy_prefilter_slack() const { return 0.08; }

  static constexpr std::int64_t kNodeBudget = 200000000;

  const CouplingProblem& p_;
  int64_t n_;
  CellObjective obj_;
  int cells_;
  std::vector<std::vector<Window>> windows_;
  std::vector<double> log_nq_;
  std::vector<double> suffix_lb_;
  std::vector<std::vector<int64_t>> partial_;
  std::vector<std::vector<int64_t>> open_cells_;
  std::vector<int64_t> slack_;
  std::vector<int64_t> need_;
  std::vector<int64_t> counts_;
  std::int64_t nodes_ = 0;
};

// ---- min-cost-flow accelerator for plain two-marginal 2-d problems ------
//
// Successive shortest augmenting paths, one mass unit at a time; arc costs are
// the convex increments of the quantized objective, so every intermediate flow
// is optimal for its value and the final flow is the exact lattice minimum for
// the given integer margins.

struct FlowResult {
  bool feasible = false;
  double objective = kInf;
  std::vector<int64_t> counts;
};

FlowResult ssp_transport(const CouplingProblem& p, const std::vector<int64_t>& row_margin,
                         const std::vector<int64_t>& col_margin, int64_t n,
                         const CellObjective& obj, const std::vector<double>& log_nq) {
  const int nx = p.nx, ny = p.ny;
  const int nodes = nx + ny + 2;
  const int source = 0, sink = nodes - 1;
  std::vector<int64_t> row_used(static_cast<std::size_t>(nx), 0);
  std::vector<int64_t> col_used(static_cast<std::size_t>(ny), 0);
  std::vector<int64_t> load(static_cast<std::size_t>(nx) * ny, 0);

  std::vector<double> dist(static_cast<std::size_t>(nodes));
  std::vector<int> parent(static_cast<std::size_t>(nodes));

  for (int64_t unit = 0; unit < n; ++unit) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(parent.begin(), parent.end(), -1);
    dist[static_cast<std::size_t>(source)] = 0.0;
    // Bellman-Ford: the graph is tiny and costs can be negative.
    for (int round = 0; round < nodes; ++round) {
      bool changed = false;
      for (int x = 0; x < nx; ++x)
        if (row_used[static_cast<std::size_t>(x)] < row_margin[static_cast<std::size_t>(x)] &&
            dist[static_cast<std::size_t>(source)] < dist[static_cast<std::size_t>(1 + x)]) {
          dist[static_cast<std::size_t>(1 + x)] = 0.0;
          parent[static_cast<std::size_t>(1 + x)] = source;
          changed = true;
        }
      for (int x = 0; x < nx; ++x) {
        if (dist[static_cast<std::size_t>(1 + x)] == kInf) continue;
        for (int y = 0; y < ny; ++y) {
          const std::size_t c = static_cast<std::size_t>(x * ny + y);
          if (p.reference[c] == 0.0) continue;
          const int64_t k = load[c];
          double step = obj.eval(k + 1, log_nq[c]) - obj.eval(k, log_nq[c]);
          double nd = dist[static_cast<std::size_t>(1 + x)] + step;
          if (nd < dist[static_cast<std::size_t>(1 + nx + y)] - 1e-18) {
            dist[static_cast<std::size_t>(1 + nx + y)] = nd;
            parent[static_cast<std::size_t>(1 + nx + y)] = 1 + x;
            changed = true;
          }
        }
      }
      for (int y = 0; y < ny; ++y) {
        if (dist[static_cast<std::size_t>(1 + nx + y)] == kInf) continue;
        for (int x = 0; x < nx; ++x) {
          const std::size_t c = static_cast<std::size_t>(x * ny + y);
          const int64_t k = load[c];
          if (k <= 0) continue;
          double step = obj.eval(k - 1, log_nq[c]) - obj.eval(k, log_nq[c]);
          double nd = dist[static_cast<std::size_t>(1 + nx + y)] + step;
          if (nd < dist[static_cast<std::size_t>(1 + x)] - 1e-18) {
            dist[static_cast<std::size_t>(1 + x)] = nd;
            parent[static_cast<std::size_t>(1 + x)] = 1 + nx + y;
            changed = true;
          }
        }
      }
      for (int y = 0; y < ny; ++y)
        if (col_used[static_cast<std::size_t>(y)] < col_margin[static_cast<std::size_t>(y)] &&
            dist[static_cast<std::size_t>(1 + nx + y)] < dist[static_cast<std::size_t>(sink)]) {
          dist[static_cast<std::size_t>(sink)] = dist[static_cast<std::size_t>(1 + nx + y)];
          parent[static_cast<std::size_t>(sink)] = 1 + nx + y;
          changed = true;
        }
      if (!changed) break;
    }
    if (parent[static_cast<std::size_t>(sink)] < 0) return {};  // margins unreachable on support

    // Walk back, pushing one unit.
    int v = parent[static_cast<std::size_t>(sink)];
    ++col_used[static_cast<std::size_t>(v - 1 - nx)];
    while (v != source) {
      const int pv = parent[static_cast<std::size_t>(v)];
      if (pv == source) {
        ++row_used[static_cast<std::size_t>(v - 1)];
        v = source;
      } else if (pv >= 1 && pv <= nx && v > nx) {
        ++load[static_cast<std::size_t>((pv - 1) * ny + (v - 1 - nx))];
        v = pv;
      } else {
        // backward arc: col node pv, row node v
        --load[static_cast<std::size_t>((v - 1) * ny + (pv - 1 - nx))];
        v = pv;
      }
    }
  }

  FlowResult res;
  res.feasible = true;
  res.objective = 0.0;
  res.counts = load;
  for (int c = 0; c < nx * ny; ++c)
    res.objective += obj.eval(load[static_cast<std::size_t>(c)], log_nq[static_cast<std::size_t>(c)]);
  return res;
}

void enum_margin_vectors(const std::vector<Window>& w, std::size_t idx, int64_t remaining,
                         std::vector<int64_t>& cur, std::vector<std::vector<int64_t>>& out) {
  if (idx == w.size()) {
    if (remaining == 0) out.push_back(cur);
    return;
  }
  int64_t suffix_hi = 0, suffix_lo = 0;
  for (std::size_t j = idx + 1; j < w.size(); ++j) {
    suffix_hi += w[j].hi;
    suffix_lo += w[j].lo;
  }
  const int64_t lo = std::max(w[idx].lo, remaining - suffix_hi);
  const int64_t hi = std::min(w[idx].hi, remaining - suffix_lo);
  for (int64_t t = lo; t <= hi; ++t) {
    cur.push_back(t);
    enum_margin_vectors(w, idx + 1, remaining - t, cur, out);
    cur.pop_back();
  }
}

bool is_plain_two_marginal_2d(const CouplingProblem& p) {
  if (p.nu != 1 || p.families.size() != 2 || p.h_min) return false;
  const auto& fx = p.families[0];
  const auto& fy = p.families[1];
  if (static_cast<int>(fx.target.size()) != p.nx || static_cast<int>(fy.target.size()) != p.ny)
    return false;
  for (int x = 0; x < p.nx; ++x)
    for (int y = 0; y < p.ny; ++y) {
      const std::size_t c = static_cast<std::size_t>(x * p.ny + y);
      if (fx.group_of[c] != x || fy.group_of[c] != y) return false;
    }
  return true;
}

}  // namespace

namespace oracle {

LatticeResult lattice_minimum(const CouplingProblem& problem, double delta, int force_path) {
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("lattice_minimum: delta in (0,1)");
  const int64_t n = static_cast<int64_t>(std::ceil(1.0 / delta));

  bool flow_ok = is_plain_two_marginal_2d(problem);
  bool use_flow = force_path == 2 || (force_path == 0 && flow_ok && n >= 256);
  if (use_flow && !flow_ok)
    throw std::invalid_argument("lattice_minimum: flow path needs a plain two-marginal problem");

  if (!use_flow) {
    LatticeEnumerator e(problem, n, delta);
    return e.run();
  }

  CellObjective obj(n);
  std::vector<double> log_nq(problem.reference.size());
  for (std::size_t c = 0; c < problem.reference.size(); ++c)
    log_nq[c] = problem.reference[c] > 0.0
                    ? std::log(static_cast<double>(n) * problem.reference[c])
                    : 0.0;
  auto row_windows = windows_for(problem.families[0], n, delta);
  auto col_windows = windows_for(problem.families[1], n, delta);
  std::vector<std::vector<int64_t>> rows, cols;
  std::vector<int64_t> cur;
  enum_margin_vectors(row_windows, 0, n, cur, rows);
  enum_margin_vectors(col_windows, 0, n, cur, cols);

  LatticeResult best;
  best.lattice_value = kInf;
  best.denominator = n;
  best.used_flow = true;
  for (const auto& r : rows)
    for (const auto& c : cols) {
      FlowResult f = ssp_transport(problem, r, c, n, obj, log_nq);
      if (f.feasible && f.objective < best.lattice_value) {
        best.lattice_value = f.objective;
        best.counts = std::move(f.counts);
      }
    }
  return best;
}

std::vector<double> repair_to_feasible(const CouplingProblem& problem,
                                       const std::vector<std::int64_t>& counts,
                                       std::int64_t denominator) {
  const auto& fa = problem.families.at(0);
  const auto& fb = problem.families.at(1);
  const std::size_t cells = problem.reference.size();
  std::vector<double> pi(cells);
  for (std::size_t c = 0; c < cells; ++c)
    pi[c] = static_cast<double>(counts[c]) / static_cast<double>(denominator);

  // Connected blocks of the bipartite (groupA, groupB) graph; every block is a
  // full product of its groups in the layouts used here, so a rank-one fill
  // lands on existing cells.
  const int na = static_cast<int>(fa.target.size());
  const int nb = static_cast<int>(fb.target.size());
  std::vector<int> block_a(static_cast<std::size_t>(na), -1);
  std::vector<int> block_b(static_cast<std::size_t>(nb), -1);
  int blocks = 0;
  for (;;) {
    int seed = -1;
    for (int a = 0; a < na; ++a)
      if (block_a[static_cast<std::size_t>(a)] < 0) {
        seed = a;
        break;
      }
    if (seed < 0) break;
    block_a[static_cast<std::size_t>(seed)] = blocks;
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t c = 0; c < cells; ++c) {
        int a = fa.group_of[c], b = fb.group_of[c];
        const int ba = block_a[static_cast<std::size_t>(a)];
        const int bb = block_b[static_cast<std::size_t>(b)];
        if (ba == blocks && bb < 0) {
          block_b[static_cast<std::size_t>(b)] = blocks;
          changed = true;
        } else if (bb == blocks && ba < 0) {
          block_a[static_cast<std::size_t>(a)] = blocks;
          changed = true;
        }
      }
    }
    ++blocks;
  }

  std::vector<double> sum_a(static_cast<std::size_t>(na), 0.0);
  std::vector<double> sum_b(static_cast<std::size_t>(nb), 0.0);
  for (std::size_t c = 0; c < cells; ++c) sum_a[static_cast<std::size_t>(fa.group_of[c])] += pi[c];
  // Scale A-group masses down to their targets.
  for (std::size_t c = 0; c < cells; ++c) {
    const std::size_t a = static_cast<std::size_t>(fa.group_of[c]);
    if (sum_a[a] > fa.target[a] && sum_a[a] > 0.0) pi[c] *= fa.target[a] / sum_a[a];
  }
  for (std::size_t c = 0; c < cells; ++c) sum_b[static_cast<std::size_t>(fb.group_of[c])] += pi[c];
  for (std::size_t c = 0; c < cells; ++c) {
    const std::size_t b = static_cast<std::size_t>(fb.group_of[c]);
    if (sum_b[b] > fb.target[b] && sum_b[b] > 0.0) pi[c] *= fb.target[b] / sum_b[b];
  }

  // Per-block rank-one fill of the remaining deficits.
  std::fill(sum_a.begin(), sum_a.end(), 0.0);
  std::fill(sum_b.begin(), sum_b.end(), 0.0);
  for (std::size_t c = 0; c < cells; ++c) {
    sum_a[static_cast<std::size_t>(fa.group_of[c])] += pi[c];
    sum_b[static_cast<std::size_t>(fb.group_of[c])] += pi[c];
  }
  std::vector<double> da(static_cast<std::size_t>(na)), db(static_cast<std::size_t>(nb));
  std::vector<double> block_deficit(static_cast<std::size_t>(blocks), 0.0);
  for (int a = 0; a < na; ++a) {
    da[static_cast<std::size_t>(a)] = std::max(fa.target[static_cast<std::size_t>(a)] - sum_a[static_cast<std::size_t>(a)], 0.0);
    block_deficit[static_cast<std::size_t>(block_a[static_cast<std::size_t>(a)])] += da[static_cast<std::size_t>(a)];
  }
  for (int b = 0; b < nb; ++b)
    db[static_cast<std::size_t>(b)] = std::max(fb.target[static_cast<std::size_t>(b)] - sum_b[static_cast<std::size_t>(b)], 0.0);
  for (std::size_t c = 0; c < cells; ++c) {
    const int a = fa.group_of[c], b = fb.group_of[c];
    const double d = block_deficit[static_cast<std::size_t>(block_a[static_cast<std::size_t>(a)])];
    if (d > 1e-15)
      pi[c] += da[static_cast<std::size_t>(a)] * db[static_cast<std::size_t>(b)] / d;
  }
  return pi;
}

}  // namespace oracle

double brute_force_min(const CouplingProblem& problem, double delta) {
  if (problem.cells() > 12)
    throw GuardError("brute_force_min: refusing problems with more than 12 coupling cells");
  if (problem.families.size() != 2)
    throw std::invalid_argument("brute_force_min: exactly two marginal families expected");
  auto lat = oracle::lattice_minimum(problem, delta);
  if (!std::isfinite(lat.lattice_value) || lat.counts.empty()) return kInf;
  auto repaired = oracle::repair_to_feasible(problem, lat.counts, lat.denominator);
  return kl_divergence_flat(repaired, problem.reference);
}

}  // namespace detex
