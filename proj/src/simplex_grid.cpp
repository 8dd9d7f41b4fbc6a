#include "detex/simplex_grid.hpp"

#include <cmath>
#include <stdexcept>

namespace detex {

namespace {

void enumerate_compositions(int remaining, int slots, std::vector<int>& cur,
                            std::vector<std::vector<int>>& out) {
  if (slots == 1) {
    cur.push_back(remaining);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int k = 0; k <= remaining; ++k) {
    cur.push_back(k);
    enumerate_compositions(remaining - k, slots - 1, cur, out);
    cur.pop_back();
  }
}

}  // namespace

SimplexGrid::SimplexGrid(int alphabet_size, double delta, const std::vector<Pmf>& extra_points)
    : alphabet_size_(alphabet_size), delta_(delta) {
  if (alphabet_size < 1) throw std::invalid_argument("SimplexGrid: alphabet size must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("SimplexGrid: delta in (0,1)");
  denominator_ = static_cast<int>(std::ceil(1.0 / delta));

  std::vector<std::vector<int>> comps;
  std::vector<int> cur;
  enumerate_compositions(denominator_, alphabet_size, cur, comps);
  points_.reserve(comps.size() + extra_points.size());
  for (const auto& c : comps) {
    std::vector<double> p(c.size());
    for (std::size_t i = 0; i < c.size(); ++i)
      p[i] = static_cast<double>(c[i]) / static_cast<double>(denominator_);
    points_.emplace_back(std::move(p));
  }
  lattice_count_ = static_cast<int>(points_.size());

  for (const auto& extra : extra_points) {
    if (extra.size() != alphabet_size_)
      throw std::invalid_argument("SimplexGrid: extra point alphabet mismatch");
    bool present = false;
    for (const auto& p : points_)
      if (p == extra) {
        present = true;
        break;
      }
    if (!present) points_.push_back(extra);
  }
}

SimplexGrid SimplexGrid::from_points(int alphabet_size, double delta, std::vector<Pmf> points) {
  SimplexGrid g(alphabet_size, delta, {});
  g.points_ = std::move(points);
  g.lattice_count_ = 0;
  for (const auto& p : g.points_)
    if (p.size() != alphabet_size) throw std::invalid_argument("SimplexGrid: point alphabet mismatch");
  return g;
}

int SimplexGrid::index_of(const Pmf& p) const {
  for (int i = 0; i < size(); ++i)
    if (points_[static_cast<std::size_t>(i)] == p) return i;
  return -1;
}

SimplexGrid simplex_grid(int alphabet_size, double delta, const std::vector<Pmf>& extra_points) {
  return SimplexGrid(alphabet_size, delta, extra_points);
}

}  // namespace detex
