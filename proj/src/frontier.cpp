#include "detex/frontier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace detex {

bool dominates(const std::vector<double>& a, const std::vector<double>& b) {
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a[k] < b[k]) return false;
  return true;
}

std::vector<ExponentPoint> pareto_maximal(std::vector<ExponentPoint> points) {
  std::vector<ExponentPoint> keep;
  for (auto& cand : points) {
    bool covered = false;
    for (const auto& p : keep)
      if (dominates(p.theta, cand.theta)) {
        covered = true;
        break;
      }
    if (covered) continue;
    keep.erase(std::remove_if(keep.begin(), keep.end(),
                              [&](const ExponentPoint& p) { return dominates(cand.theta, p.theta); }),
               keep.end());
    keep.push_back(std::move(cand));
  }
  return keep;
}

double nonconvexity_margin(const std::vector<ExponentPoint>& points) {
  const std::size_t n = points.size();
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> mid;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& a = points[i].theta;
      const auto& b = points[j].theta;
      mid.resize(a.size());
      bool finite = true;
      for (std::size_t k = 0; k < a.size(); ++k) {
        mid[k] = 0.5 * (a[k] + b[k]);
        if (!std::isfinite(mid[k])) finite = false;
      }
      if (!finite) continue;
      // shortfall of the best covering point
      double cover = std::numeric_limits<double>::infinity();
      for (const auto& p : points) {
        double worst = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, mid[k] - p.theta[k]);
        cover = std::min(cover, worst);
      }
      best = std::max(best, cover);
    }
  return best;
}

}  // namespace detex
