#pragma once

#include "detex/pmf.hpp"

namespace detex {

inline constexpr double kLn2 = 0.6931471805599453094;

inline double nats_to_bits(double nats) { return nats / kLn2; }

/// Shannon entropy (nats) of an arbitrary nonnegative vector with 0 log 0 = 0.
double entropy(const std::vector<double>& probs);

/// Kullback-Leibler divergence (nats), +inf iff p puts mass where q has none.
double kl_divergence_flat(const std::vector<double>& p, const std::vector<double>& q);
double kl_divergence(const Pmf& p, const Pmf& q);
double kl_divergence(const JointPmf2& p, const JointPmf2& q);
double kl_divergence(const JointPmf3& p, const JointPmf3& q);

struct InfoSummary2 {
  double h_xy;         // H(X,Y)
  double h_x;          // H(X)
  double h_y;          // H(Y)
  double h_x_given_y;  // H(X|Y)
  double h_y_given_x;  // H(Y|X)
  double mi_xy;        // I(X;Y)
};

struct InfoSummary3 {
  double h_uxy;           // H(U,X,Y)
  double h_u;             // H(U)
  double h_u_given_y;     // H(U|Y)
  double h_u_given_x;     // H(U|X)
  double mi_ux;           // I(U;X)
  double mi_uy;           // I(U;Y)
  double mi_ux_given_y;   // I(U;X|Y)
};

InfoSummary2 info_summary(const JointPmf2& joint);
InfoSummary3 info_summary(const JointPmf3& joint);

/// H(U|Y) of an arbitrary (u,y)-indexed nonnegative matrix of total mass ~1.
double conditional_entropy_rows_given_cols(const std::vector<double>& probs, int nu, int ny);

/// Robust typicality: true iff the empirical distribution of t is within
/// L-infinity distance mu of p.
bool is_typical(const EmpiricalType& t, const Pmf& p, double mu);

}  // namespace detex
