#pragma once

#include <string>
#include <vector>

#include "detex/pmf.hpp"

namespace detex {

/// Hypothesis testing model: M hypotheses, K detectors, and the pairwise
/// joints P^(m) of (X, Y_k). The same X marginal must be induced for every
/// detector (one sensor observes one source), and for each detector the M
/// joints must be pairwise distinct.
class HypothesisModel {
 public:
  /// joints[m][k]; epsilon[k] in (0,1) is detector k's type-I ceiling.
  HypothesisModel(std::vector<std::vector<JointPmf2>> joints, std::vector<double> epsilon);

  int num_hypotheses() const { return m_; }
  int num_detectors() const { return k_; }
  int nx() const { return nx_; }
  int ny(int k) const { return joints_[0][static_cast<std::size_t>(k)].ny(); }
  const JointPmf2& joint(int m, int k) const {
    return joints_[static_cast<std::size_t>(m)][static_cast<std::size_t>(k)];
  }
  const std::vector<double>& epsilon() const { return epsilon_; }

  const Pmf& source_marginal(int m) const { return px_[static_cast<std::size_t>(m)]; }
  Pmf detector_marginal(int m, int k) const { return joint(m, k).marginal_y(); }

  /// Distinct source marginal classes (exact up to 1e-12).
  int num_classes() const { return static_cast<int>(class_marginals_.size()); }
  int class_of(int m) const { return class_of_[static_cast<std::size_t>(m)]; }
  const std::vector<Pmf>& class_marginals() const { return class_marginals_; }

  /// Extra zero-rate assumptions: every pair of joints differs in one of the
  /// two marginals, and P^(k) of (X,Y_k) is strictly positive. Throws
  /// ValidationError naming the failed condition.
  void validate_zero_rate() const;

  /// Simple-hypothesis operations tie detector k to hypothesis k.
  void require_detector_targets() const;

 private:
  std::vector<std::vector<JointPmf2>> joints_;
  std::vector<double> epsilon_;
  std::vector<Pmf> px_;
  std::vector<int> class_of_;
  std::vector<Pmf> class_marginals_;
  int m_;
  int k_;
  int nx_;
};

struct DistinctMarginals {
  int count = 0;                // L
  std::vector<Pmf> marginals;   // the L distinct pmfs, in first-appearance order
  std::vector<int> class_of;    // per hypothesis
};

/// Number of distinct source marginals (grouping tolerance 1e-12).
DistinctMarginals count_distinct_marginals(const HypothesisModel& model);

}  // namespace detex
