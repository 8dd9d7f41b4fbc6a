#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <doctest.h>

#include "detex/coupling.hpp"
#include "detex/errors.hpp"
#include "detex/info.hpp"
#include "test_util.hpp"

using namespace detex;

namespace {

double h_u_given_y(const SolverReport& rep) {
  std::vector<double> uy(static_cast<std::size_t>(rep.nu) * rep.ny, 0.0);
  for (int u = 0; u < rep.nu; ++u)
    for (int x = 0; x < rep.nx; ++x)
      for (int y = 0; y < rep.ny; ++y)
        uy[static_cast<std::size_t>(u * rep.ny + y)] +=
            rep.argmin[static_cast<std::size_t>((u * rep.nx + x) * rep.ny + y)];
  return conditional_entropy_rows_given_cols(uy, rep.nu, rep.ny);
}

}  // namespace

TEST_CASE("two-marginal projection: reference's own marginals give zero") {
  std::mt19937_64 rng(23);
  JointPmf2 q = testutil::random_joint2(rng, 2, 3, 0.05);
  auto rep = iproject_two_marginals(q, q.marginal_x(), q.marginal_y());
  CHECK(rep.converged);
  CHECK(rep.value == doctest::Approx(0.0).epsilon(1e-12));
  for (int c = 0; c < 6; ++c)
    CHECK(rep.argmin[static_cast<std::size_t>(c)] ==
          doctest::Approx(q.probs()[static_cast<std::size_t>(c)]).epsilon(1e-9));
}

TEST_CASE("two-marginal projection: product reference factorizes") {
  Pmf qx({0.6, 0.4}), qy({0.3, 0.2, 0.5});
  std::vector<double> cells;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 3; ++y) cells.push_back(qx[x] * qy[y]);
  JointPmf2 q(cells, 2, 3);
  Pmf px({0.45, 0.55}), py({0.25, 0.35, 0.4});
  auto rep = iproject_two_marginals(q, px, py);
  CHECK(rep.converged);
  CHECK(rep.value ==
        doctest::Approx(kl_divergence(px, qx) + kl_divergence(py, qy)).epsilon(1e-9));
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 3; ++y)
      CHECK(rep.argmin[static_cast<std::size_t>(x * 3 + y)] ==
            doctest::Approx(px[x] * py[y]).epsilon(1e-8));
}

TEST_CASE("two-marginal projection: support infeasibility reports +inf") {
  JointPmf2 diag({0.5, 0.0, 0.0, 0.5}, 2, 2);
  auto rep = iproject_two_marginals(diag, Pmf({0.6, 0.4}), Pmf({0.3, 0.7}));
  CHECK(std::isinf(rep.value));
  CHECK(rep.method == "infeasible");
  // but matching diagonal targets stay feasible
  auto ok = iproject_two_marginals(diag, Pmf({0.6, 0.4}), Pmf({0.6, 0.4}));
  CHECK(ok.value == doctest::Approx(kl_divergence(Pmf({0.6, 0.4}), Pmf({0.5, 0.5}))).epsilon(1e-9));
}

TEST_CASE("IPF divergence is nondecreasing over cycles and marginals land on target") {
  std::mt19937_64 rng(29);
  for (int i = 0; i < 10; ++i) {
    JointPmf2 q = testutil::random_joint2(rng, 3, 3, 0.02);
    Pmf px = testutil::random_pmf(rng, 3, 0.1);
    Pmf py = testutil::random_pmf(rng, 3, 0.1);
    CouplingProblem p = two_marginal_problem(q, px, py);
    std::vector<double> trace;
    auto out = detail::alternating_scaling(p.reference, p.reference, p.families, 1e-9, 100000, &trace);
    CHECK(out.converged);
    CHECK(out.residual <= 1e-9);
    for (std::size_t t = 1; t < trace.size(); ++t) CHECK(trace[t] >= trace[t - 1] - 1e-12);
  }
}

TEST_CASE("argmin support matches the reference's support") {
  JointPmf2 q({0.4, 0.0, 0.35, 0.25}, 2, 2);
  auto rep = iproject_two_marginals(q, Pmf({0.5, 0.5}), Pmf({0.55, 0.45}));
  CHECK(rep.converged);
  CHECK(rep.argmin[1] == 0.0);
  for (std::size_t c : {0u, 2u, 3u}) CHECK(rep.argmin[c] > 0.0);
}

TEST_CASE("unconverged runs are reported, not thrown") {
  std::mt19937_64 rng(31);
  JointPmf2 q = testutil::random_joint2(rng, 3, 3, 0.02);
  auto rep = iproject_two_marginals(q, testutil::random_pmf(rng, 3, 0.1),
                                    testutil::random_pmf(rng, 3, 0.1), 1e-9, 1);
  CHECK_FALSE(rep.converged);
  CHECK(rep.residual > 0.0);
  CHECK(std::isfinite(rep.value));
}

TEST_CASE("oracle sandwich on random 2x2 instances") {
  std::mt19937_64 rng(37);
  for (int i = 0; i < 10; ++i) {
    JointPmf2 q = testutil::random_joint2(rng, 2, 2);
    Pmf px = testutil::random_pmf(rng, 2);
    Pmf py = testutil::random_pmf(rng, 2);
    auto rep = iproject_two_marginals(q, px, py);
    double oracle = brute_force_min(two_marginal_problem(q, px, py), 1e-3);
    CHECK(rep.value <= oracle + 1e-9);          // oracle value is feasible
    CHECK(std::fabs(rep.value - oracle) <= 1e-3);
  }
}

TEST_CASE("oracle sandwich at coarser lattices brackets the solver") {
  std::mt19937_64 rng(41);
  for (double delta : {0.02, 0.01}) {
    for (int i = 0; i < 5; ++i) {
      JointPmf2 q = testutil::random_joint2(rng, 2, 2);
      Pmf px = testutil::random_pmf(rng, 2);
      Pmf py = testutil::random_pmf(rng, 2);
      auto rep = iproject_two_marginals(q, px, py);
      double oracle = brute_force_min(two_marginal_problem(q, px, py), delta);
      CHECK(rep.value <= oracle + 1e-9);
      CHECK(rep.value >= oracle - 2.0 * delta);
    }
  }
}

TEST_CASE("brute force trivial cases") {
  std::mt19937_64 rng(43);
  JointPmf2 q = testutil::random_joint2(rng, 2, 2, 0.1);
  const double delta = 0.01;
  SUBCASE("identity targets stay near zero") {
    double v = brute_force_min(two_marginal_problem(q, q.marginal_x(), q.marginal_y()), delta);
    CHECK(v >= 0.0);
    CHECK(v <= 5 * delta);
  }
  SUBCASE("product reference matches the closed form within 5 delta") {
    Pmf qx = q.marginal_x(), qy = q.marginal_y();
    std::vector<double> cells;
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y) cells.push_back(qx[x] * qy[y]);
    Pmf px({0.45, 0.55}), py({0.3, 0.7});
    double v = brute_force_min(two_marginal_problem(JointPmf2(cells, 2, 2), px, py), delta);
    CHECK(std::fabs(v - (kl_divergence(px, qx) + kl_divergence(py, qy))) <= 5 * delta);
  }
  SUBCASE("cell guard") {
    JointPmf2 big = testutil::random_joint2(rng, 4, 4, 0.01);
    CHECK_THROWS_AS(
        brute_force_min(two_marginal_problem(big, big.marginal_x(), big.marginal_y()), 0.1),
        GuardError);
  }
}

TEST_CASE("lattice minimum: enumeration and flow agree") {
  std::mt19937_64 rng(47);
  for (double delta : {0.05, 0.02}) {
    for (int i = 0; i < 5; ++i) {
      JointPmf2 q = testutil::random_joint2(rng, 3, 3, 0.05);
      Pmf px = testutil::random_pmf(rng, 3, 0.1);
      Pmf py = testutil::random_pmf(rng, 3, 0.1);
      CouplingProblem p = two_marginal_problem(q, px, py);
      auto by_enum = oracle::lattice_minimum(p, delta, 1);
      auto by_flow = oracle::lattice_minimum(p, delta, 2);
      CHECK(by_enum.lattice_value == doctest::Approx(by_flow.lattice_value).epsilon(1e-12));
    }
  }
}

TEST_CASE("repair lands exactly on the constraint marginals") {
  std::mt19937_64 rng(53);
  JointPmf2 q = testutil::random_joint2(rng, 3, 3, 0.05);
  Pmf px = testutil::random_pmf(rng, 3, 0.1);
  Pmf py = testutil::random_pmf(rng, 3, 0.1);
  CouplingProblem p = two_marginal_problem(q, px, py);
  auto lat = oracle::lattice_minimum(p, 0.02, 1);
  auto pi = oracle::repair_to_feasible(p, lat.counts, lat.denominator);
  for (const auto& fam : p.families) {
    std::vector<double> sums(fam.target.size(), 0.0);
    for (std::size_t c = 0; c < pi.size(); ++c) sums[static_cast<std::size_t>(fam.group_of[c])] += pi[c];
    for (std::size_t g = 0; g < sums.size(); ++g)
      CHECK(sums[g] == doctest::Approx(fam.target[g]).epsilon(1e-9));
  }
}

TEST_CASE("overlapping projection") {
  std::mt19937_64 rng(59);

  SUBCASE("reference's own marginals give zero") {
    JointPmf3 ref = testutil::random_joint3(rng, 2, 2, 2, 0.05);
    auto rep = iproject_overlapping(ref, ref.marginal_ux(), ref.marginal_uy());
    CHECK(rep.converged);
    CHECK(rep.value == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("conditionally independent reference has a closed form") {
    JointPmf2 ux = testutil::random_joint2(rng, 2, 2, 0.1);
    Pmf qy = testutil::random_pmf(rng, 2, 0.2);
    std::vector<double> cells(8);
    for (int u = 0; u < 2; ++u)
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
          cells[static_cast<std::size_t>((u * 2 + x) * 2 + y)] = ux.at(u, x) * qy[y];
    JointPmf3 ref(cells, 2, 2, 2);

    Pmf pu = ux.marginal_x();  // U-marginal of the (u,x) table
    JointPmf2 target_uy({pu[0] * 0.3, pu[0] * 0.7, pu[1] * 0.55, pu[1] * 0.45}, 2, 2);
    auto rep = iproject_overlapping(ref, ux, target_uy);
    CHECK(rep.converged);
    std::vector<double> expect(8);
    for (int u = 0; u < 2; ++u)
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
          expect[static_cast<std::size_t>((u * 2 + x) * 2 + y)] =
              ux.at(u, x) / pu[u] * target_uy.at(u, y);
    for (int c = 0; c < 8; ++c)
      CHECK(rep.argmin[static_cast<std::size_t>(c)] ==
            doctest::Approx(expect[static_cast<std::size_t>(c)]).epsilon(1e-8));
    CHECK(rep.value == doctest::Approx(kl_divergence_flat(expect, cells)).epsilon(1e-8));
  }

  SUBCASE("mismatched U-marginals are infeasible") {
    JointPmf3 ref = testutil::random_joint3(rng, 2, 2, 2, 0.05);
    JointPmf2 ux = ref.marginal_ux();
    JointPmf2 bad({0.1, 0.2, 0.3, 0.4}, 2, 2);
    auto rep = iproject_overlapping(ref, ux, bad);
    CHECK(std::isinf(rep.value));
    CHECK(rep.method == "inconsistent-u-marginals");
  }

  SUBCASE("random instances agree with the lattice oracle at delta 0.02") {
    for (int i = 0; i < 4; ++i) {
      JointPmf3 ref = testutil::random_joint3(rng, 2, 2, 2, 0.15);
      JointPmf3 other = testutil::random_joint3(rng, 2, 2, 2, 0.15);
      auto rep = iproject_overlapping(ref, other.marginal_ux(), other.marginal_uy());
      double oracle = brute_force_min(
          overlapping_problem(ref, other.marginal_ux(), other.marginal_uy()), 0.02);
      CHECK(rep.value <= oracle + 1e-9);
      CHECK(std::fabs(rep.value - oracle) <= 2e-2);
    }
  }
}

TEST_CASE("entropy-constrained projection") {
  std::mt19937_64 rng(61);

  SUBCASE("h_min = 0 returns the unconstrained projection bit-for-bit") {
    JointPmf3 ref = testutil::random_joint3(rng, 2, 2, 2, 0.1);
    JointPmf3 other = testutil::random_joint3(rng, 2, 2, 2, 0.1);
    auto rep = iproject_entropy_constrained(ref, other.marginal_ux(), other.marginal_y(), 0.0);
    CouplingProblem p = entropy_problem(ref, other.marginal_ux(), other.marginal_y(), 0.0);
    auto linear = detail::alternating_scaling(p.reference, p.reference, p.families, 1e-9, 100000);
    CHECK(rep.method == "ipf");
    REQUIRE(rep.argmin.size() == linear.pi.size());
    for (std::size_t c = 0; c < linear.pi.size(); ++c) CHECK(rep.argmin[c] == linear.pi[c]);
  }

  SUBCASE("maximal h_min on a generic instance is infeasible") {
    JointPmf3 ref = testutil::random_joint3(rng, 2, 2, 2, 0.1);
    JointPmf3 other = testutil::random_joint3(rng, 2, 2, 2, 0.1);
    auto rep = iproject_entropy_constrained(ref, other.marginal_ux(), other.marginal_y(), kLn2);
    CHECK(std::isinf(rep.value));
  }

  SUBCASE("h_min outside [0, log|U|] is rejected") {
    JointPmf3 ref = testutil::random_joint3(rng, 2, 2, 2, 0.1);
    CHECK_THROWS_AS(
        iproject_entropy_constrained(ref, ref.marginal_ux(), ref.marginal_y(), kLn2 + 0.1),
        std::invalid_argument);
  }

  SUBCASE("value is nondecreasing in h_min and satisfies the constraint") {
    JointPmf3 ref = testutil::random_joint3(rng, 2, 2, 2, 0.1);
    JointPmf3 other = testutil::random_joint3(rng, 2, 2, 2, 0.1);
    double prev = -1.0;
    for (double h : {0.0, 0.3, 0.5, 0.6}) {
      auto rep = iproject_entropy_constrained(ref, other.marginal_ux(), other.marginal_y(), h);
      if (std::isinf(rep.value)) break;
      CHECK(rep.value >= prev - 1e-10);
      CHECK(h_u_given_y(rep) >= h - 1e-8);
      prev = rep.value;
    }
  }

  SUBCASE("random active-constraint instances agree with the lattice oracle") {
    int active = 0;
    for (int i = 0; i < 4; ++i) {
      JointPmf3 ref = testutil::random_joint3(rng, 2, 2, 2, 0.15);
      JointPmf3 other = testutil::random_joint3(rng, 2, 2, 2, 0.15);
      auto base = iproject_entropy_constrained(ref, other.marginal_ux(), other.marginal_y(), 0.0);
      double h0 = h_u_given_y(base);
      double h_min = std::min(h0 + 0.05, kLn2 * 0.98);
      auto rep = iproject_entropy_constrained(ref, other.marginal_ux(), other.marginal_y(), h_min);
      if (std::isinf(rep.value)) continue;
      ++active;
      CHECK(h_u_given_y(rep) >= h_min - 1e-8);
      double oracle = brute_force_min(
          entropy_problem(ref, other.marginal_ux(), other.marginal_y(), h_min), 0.02);
      CHECK(rep.value <= oracle + 1e-9);
      CHECK(std::fabs(rep.value - oracle) <= 2e-2);
    }
    CHECK(active >= 2);  // the tightened bound should usually stay feasible
  }
}
