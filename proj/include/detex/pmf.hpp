#pragma once

#include <cstdint>
#include <vector>

namespace detex {

inline constexpr double kMassTolerance = 1e-12;

/// Probability vector over a finite alphabet. Entries are nonnegative and
/// sum to one within kMassTolerance.
class Pmf {
 public:
  explicit Pmf(std::vector<double> probs);

  static Pmf uniform(int size);
  static Pmf point_mass(int size, int atom);

  int size() const { return static_cast<int>(probs_.size()); }
  double operator[](int i) const { return probs_[static_cast<std::size_t>(i)]; }
  const std::vector<double>& probs() const { return probs_; }

  bool operator==(const Pmf& other) const { return probs_ == other.probs_; }

 private:
  std::vector<double> probs_;
};

/// Joint pmf over X × Y, row-major.
class JointPmf2 {
 public:
  JointPmf2(std::vector<double> probs, int nx, int ny);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double at(int x, int y) const { return probs_[static_cast<std::size_t>(x * ny_ + y)]; }
  const std::vector<double>& probs() const { return probs_; }

  Pmf marginal_x() const;
  Pmf marginal_y() const;

  bool operator==(const JointPmf2& o) const {
    return nx_ == o.nx_ && ny_ == o.ny_ && probs_ == o.probs_;
  }

 private:
  std::vector<double> probs_;
  int nx_;
  int ny_;
};

/// Joint pmf over U × X × Y, index (u,x,y) -> (u*nx + x)*ny + y.
class JointPmf3 {
 public:
  JointPmf3(std::vector<double> probs, int nu, int nx, int ny);

  int nu() const { return nu_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double at(int u, int x, int y) const {
    return probs_[static_cast<std::size_t>((u * nx_ + x) * ny_ + y)];
  }
  const std::vector<double>& probs() const { return probs_; }

  JointPmf2 marginal_ux() const;
  JointPmf2 marginal_uy() const;
  JointPmf2 marginal_xy() const;
  Pmf marginal_u() const;
  Pmf marginal_x() const;
  Pmf marginal_y() const;

 private:
  std::vector<double> probs_;
  int nu_;
  int nx_;
  int ny_;
};

/// Channel U|X: one pmf over U per input symbol x.
class ConditionalPmf {
 public:
  /// rows[x][u] = P(u|x); every row must be a valid pmf.
  explicit ConditionalPmf(std::vector<std::vector<double>> rows);

  static ConditionalPmf identity(int size);
  static ConditionalPmf constant(int n_in, int n_out, int atom);

  int n_in() const { return n_in_; }
  int n_out() const { return n_out_; }
  double at(int x, int u) const { return rows_[static_cast<std::size_t>(x * n_out_ + u)]; }
  const std::vector<double>& flat() const { return rows_; }

  bool operator==(const ConditionalPmf& o) const {
    return n_in_ == o.n_in_ && n_out_ == o.n_out_ && rows_ == o.rows_;
  }

 private:
  std::vector<double> rows_;  // row-major, n_in x n_out
  int n_in_;
  int n_out_;
};

/// Empirical counts of a length-n sequence (or sequence pair, flattened).
struct EmpiricalType {
  std::vector<std::int64_t> counts;
  std::int64_t n = 0;

  EmpiricalType(std::vector<std::int64_t> c, std::int64_t len);
  Pmf induced() const;
};

/// result(u,x,y) = pxy(x,y) * channel(u|x). Alphabet of X must match.
JointPmf3 compose(const JointPmf2& pxy, const ConditionalPmf& channel);

}  // namespace detex
