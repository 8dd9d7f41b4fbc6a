#include "detex/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "detex/errors.hpp"

namespace detex {

namespace {

bool pmf_equal(const Pmf& a, const Pmf& b, double tol) {
  if (a.size() != b.size()) return false;
  for (int i = 0; i < a.size(); ++i)
    if (std::fabs(a[i] - b[i]) > tol) return false;
  return true;
}

std::string mk(int m, int k) {
  return "(m=" + std::to_string(m + 1) + ", k=" + std::to_string(k + 1) + ")";
}

}  // namespace

HypothesisModel::HypothesisModel(std::vector<std::vector<JointPmf2>> joints,
                                 std::vector<double> epsilon)
    : joints_(std::move(joints)), epsilon_(std::move(epsilon)) {
  m_ = static_cast<int>(joints_.size());
  if (m_ < 2) throw ValidationError("model: need at least 2 hypotheses");
  k_ = static_cast<int>(joints_[0].size());
  if (k_ < 1) throw ValidationError("model: need at least 1 detector");
  for (int m = 0; m < m_; ++m)
    if (static_cast<int>(joints_[static_cast<std::size_t>(m)].size()) != k_)
      throw ValidationError("model: ragged joint table for m=" + std::to_string(m + 1));
  nx_ = joints_[0][0].nx();
  for (int m = 0; m < m_; ++m)
    for (int k = 0; k < k_; ++k) {
      if (joint(m, k).nx() != nx_)
        throw ValidationError("model: X alphabet mismatch at " + mk(m, k));
      if (joint(m, k).ny() != joint(0, k).ny())
        throw ValidationError("model: Y alphabet mismatch at " + mk(m, k));
    }
  if (static_cast<int>(epsilon_.size()) != k_)
    throw ValidationError("model: epsilon vector must have one entry per detector");
  for (double e : epsilon_)
    if (!(e > 0.0 && e < 1.0)) throw ValidationError("model: epsilon entries must lie in (0,1)");

  // One sensor: every detector's joint must induce the same X marginal.
  px_.reserve(static_cast<std::size_t>(m_));
  for (int m = 0; m < m_; ++m) {
    Pmf first = joint(m, 0).marginal_x();
    for (int k = 1; k < k_; ++k)
      if (!pmf_equal(first, joint(m, k).marginal_x(), 1e-12))
        throw ValidationError("model: inconsistent P_X across detectors at " + mk(m, k));
    px_.push_back(std::move(first));
  }

  for (int k = 0; k < k_; ++k)
    for (int m = 0; m < m_; ++m)
      for (int m2 = m + 1; m2 < m_; ++m2)
        if (joint(m, k) == joint(m2, k))
          throw ValidationError("model: duplicate joint (m=" + std::to_string(m + 1) +
                                ", m'=" + std::to_string(m2 + 1) + ", k=" +
                                std::to_string(k + 1) + ")");

  // Absolute continuity of every P^(m) w.r.t. detector k's own-hypothesis
  // joint, for detectors whose index names a hypothesis.
  for (int k = 0; k < std::min(m_, k_); ++k)
    for (int m = 0; m < m_; ++m)
      for (int x = 0; x < nx_; ++x)
        for (int y = 0; y < joint(0, k).ny(); ++y)
          if (joint(m, k).at(x, y) > 0.0 && joint(k, k).at(x, y) == 0.0)
            throw ValidationError("model: absolute-continuity violation at " + mk(m, k) +
                                  " cell (" + std::to_string(x) + "," + std::to_string(y) + ")");

  class_of_.assign(static_cast<std::size_t>(m_), -1);
  for (int m = 0; m < m_; ++m) {
    for (std::size_t c = 0; c < class_marginals_.size(); ++c)
      if (pmf_equal(px_[static_cast<std::size_t>(m)], class_marginals_[c], 1e-12)) {
        class_of_[static_cast<std::size_t>(m)] = static_cast<int>(c);
        break;
      }
    if (class_of_[static_cast<std::size_t>(m)] < 0) {
      class_of_[static_cast<std::size_t>(m)] = static_cast<int>(class_marginals_.size());
      class_marginals_.push_back(px_[static_cast<std::size_t>(m)]);
    }
  }
}

void HypothesisModel::validate_zero_rate() const {
  for (int k = 0; k < k_; ++k)
    for (int m = 0; m < m_; ++m)
      for (int m2 = m + 1; m2 < m_; ++m2) {
        bool same_x =
            pmf_equal(px_[static_cast<std::size_t>(m)], px_[static_cast<std::size_t>(m2)], 1e-12);
        bool same_y = pmf_equal(detector_marginal(m, k), detector_marginal(m2, k), 1e-12);
        if (same_x && same_y)
          throw ValidationError("model: zero-rate assumption fails, joints (m=" +
                                std::to_string(m + 1) + ", m'=" + std::to_string(m2 + 1) +
                                ", k=" + std::to_string(k + 1) + ") share both marginals");
      }
  for (int k = 0; k < std::min(m_, k_); ++k)
    for (int x = 0; x < nx_; ++x)
      for (int y = 0; y < joint(0, k).ny(); ++y)
        if (joint(k, k).at(x, y) == 0.0)
          throw ValidationError(
              "model: zero-rate positivity fails, P^(k) of (X,Y_k) has a zero cell at " +
              mk(k, k) + " cell (" + std::to_string(x) + "," + std::to_string(y) + ")");
}

void HypothesisModel::require_detector_targets() const {
  if (m_ < k_)
    throw ValidationError(
        "model: simple-hypothesis operations need at least as many hypotheses as detectors");
}

DistinctMarginals count_distinct_marginals(const HypothesisModel& model) {
  DistinctMarginals d;
  d.marginals = model.class_marginals();
  d.count = static_cast<int>(d.marginals.size());
  d.class_of.reserve(static_cast<std::size_t>(model.num_hypotheses()));
  for (int m = 0; m < model.num_hypotheses(); ++m) d.class_of.push_back(model.class_of(m));
  return d;
}

}  // namespace detex
