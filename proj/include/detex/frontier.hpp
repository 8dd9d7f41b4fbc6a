#pragma once

#include <string>
#include <vector>

namespace detex {

/// An achievable exponent vector with the provenance needed to reproduce it.
struct ExponentPoint {
  std::vector<double> theta;  // nats per detector; +inf means unconstrained
  std::string mode;           // "rectangle", "partition", "positive-rate", ...
  std::vector<int> b;         // 1-based cell per hypothesis (partition modes)
  std::vector<double> r;      // tilt vector (partition modes)
  double grid_delta = 0.0;
  std::vector<std::vector<double>> channels;  // row-major per marginal class
};

/// Pareto set of achieved points; the region is its downward closure.
struct RegionFrontier {
  std::vector<ExponentPoint> points;
  bool closed_downward = true;
};

bool dominates(const std::vector<double>& a, const std::vector<double>& b);

/// Pareto-maximal subset (componentwise order, exact duplicates collapsed).
std::vector<ExponentPoint> pareto_maximal(std::vector<ExponentPoint> points);

/// Worst-case shortfall certifying non-convexity: the largest gamma such that
/// some midpoint of two achieved points exceeds every achieved point by at
/// least gamma in some coordinate. Nonpositive when every midpoint is covered.
double nonconvexity_margin(const std::vector<ExponentPoint>& points);

}  // namespace detex
