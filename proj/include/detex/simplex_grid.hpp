#pragma once

#include "detex/pmf.hpp"

namespace detex {

/// A delta-covering of the probability simplex: the lattice {k/N : sum k = N}
/// with 1/N <= delta, plus injected extra points (kept exact, not snapped).
class SimplexGrid {
 public:
  SimplexGrid(int alphabet_size, double delta, const std::vector<Pmf>& extra_points);

  /// Degenerate grid holding exactly the given points (no lattice).
  static SimplexGrid from_points(int alphabet_size, double delta, std::vector<Pmf> points);

  int alphabet_size() const { return alphabet_size_; }
  double delta() const { return delta_; }
  int denominator() const { return denominator_; }
  int lattice_count() const { return lattice_count_; }
  int size() const { return static_cast<int>(points_.size()); }
  const Pmf& point(int i) const { return points_[static_cast<std::size_t>(i)]; }
  const std::vector<Pmf>& points() const { return points_; }

  /// Index of an injected (or coinciding lattice) point equal to p, or -1.
  int index_of(const Pmf& p) const;

 private:
  int alphabet_size_;
  double delta_;
  int denominator_;
  int lattice_count_;
  std::vector<Pmf> points_;
};

/// Lattice grid of resolution <= delta; extra points appended unless already
/// present bit-exactly.
SimplexGrid simplex_grid(int alphabet_size, double delta, const std::vector<Pmf>& extra_points = {});

}  // namespace detex
