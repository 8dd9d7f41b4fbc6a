#include "detex/info.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace detex {

namespace {

double kl_flat(const std::vector<double>& p, const std::vector<double>& q) {
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
    sum += p[i] * std::log(p[i] / q[i]);
  }
  return sum < 0.0 ? 0.0 : sum;  // clamp tiny negative round-off at p ~ q
}

}  // namespace

double kl_divergence_flat(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw std::invalid_argument("kl_divergence_flat: shape mismatch");
  return kl_flat(p, q);
}

double entropy(const std::vector<double>& probs) {
  double h = 0.0;
  for (double p : probs)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

double kl_divergence(const Pmf& p, const Pmf& q) {
  if (p.size() != q.size()) throw std::invalid_argument("kl_divergence: shape mismatch");
  return kl_flat(p.probs(), q.probs());
}

double kl_divergence(const JointPmf2& p, const JointPmf2& q) {
  if (p.nx() != q.nx() || p.ny() != q.ny())
    throw std::invalid_argument("kl_divergence: shape mismatch");
  return kl_flat(p.probs(), q.probs());
}

double kl_divergence(const JointPmf3& p, const JointPmf3& q) {
  if (p.nu() != q.nu() || p.nx() != q.nx() || p.ny() != q.ny())
    throw std::invalid_argument("kl_divergence: shape mismatch");
  return kl_flat(p.probs(), q.probs());
}

InfoSummary2 info_summary(const JointPmf2& joint) {
  InfoSummary2 s{};
  s.h_xy = entropy(joint.probs());
  s.h_x = entropy(joint.marginal_x().probs());
  s.h_y = entropy(joint.marginal_y().probs());
  s.h_x_given_y = s.h_xy - s.h_y;
  s.h_y_given_x = s.h_xy - s.h_x;
  s.mi_xy = s.h_x + s.h_y - s.h_xy;
  if (s.mi_xy < 0.0) s.mi_xy = 0.0;
  return s;
}

InfoSummary3 info_summary(const JointPmf3& joint) {
  InfoSummary3 s{};
  s.h_uxy = entropy(joint.probs());
  const double h_u = entropy(joint.marginal_u().probs());
  const double h_x = entropy(joint.marginal_x().probs());
  const double h_y = entropy(joint.marginal_y().probs());
  const double h_ux = entropy(joint.marginal_ux().probs());
  const double h_uy = entropy(joint.marginal_uy().probs());
  const double h_xy = entropy(joint.marginal_xy().probs());
  s.h_u = h_u;
  s.h_u_given_y = h_uy - h_y;
  s.h_u_given_x = h_ux - h_x;
  s.mi_ux = h_u + h_x - h_ux;
  s.mi_uy = h_u + h_y - h_uy;
  // I(U;X|Y) = H(U|Y) + H(X|Y) - H(U,X|Y)
  s.mi_ux_given_y = h_uy + h_xy - s.h_uxy - h_y;
  if (s.mi_ux < 0.0) s.mi_ux = 0.0;
  if (s.mi_uy < 0.0) s.mi_uy = 0.0;
  if (s.mi_ux_given_y < 0.0) s.mi_ux_given_y = 0.0;
  return s;
}

double conditional_entropy_rows_given_cols(const std::vector<double>& probs, int nu, int ny) {
  std::vector<double> col(static_cast<std::size_t>(ny), 0.0);
  for (int u = 0; u < nu; ++u)
    for (int y = 0; y < ny; ++y) col[static_cast<std::size_t>(y)] += probs[static_cast<std::size_t>(u * ny + y)];
  return entropy(probs) - entropy(col);
}

bool is_typical(const EmpiricalType& t, const Pmf& p, double mu) {
  if (static_cast<int>(t.counts.size()) != p.size())
    throw std::invalid_argument("is_typical: alphabet mismatch");
  if (!(mu > 0.0)) throw std::invalid_argument("is_typical: mu must be positive");
  for (int i = 0; i < p.size(); ++i) {
    double freq = static_cast<double>(t.counts[static_cast<std::size_t>(i)]) /
                  static_cast<double>(t.n);
    if (std::fabs(freq - p[i]) > mu) return false;
  }
  return true;
}

}  // namespace detex
