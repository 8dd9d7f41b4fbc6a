#include "detex/pmf.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace detex {

namespace {

void check_mass(const std::vector<double>& probs, const char* what) {
  if (probs.empty()) throw std::invalid_argument(std::string(what) + ": empty alphabet");
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw std::invalid_argument(std::string(what) + ": negative or NaN entry");
    sum += p;
  }
  if (std::fabs(sum - 1.0) > kMassTolerance)
    throw std::invalid_argument(std::string(what) + ": mass " + std::to_string(sum) +
                                " not 1 within 1e-12");
}

}  // namespace

Pmf::Pmf(std::vector<double> probs) : probs_(std::move(probs)) { check_mass(probs_, "Pmf"); }

Pmf Pmf::uniform(int size) {
  return Pmf(std::vector<double>(static_cast<std::size_t>(size), 1.0 / size));
}

Pmf Pmf::point_mass(int size, int atom) {
  std::vector<double> p(static_cast<std::size_t>(size), 0.0);
  p[static_cast<std::size_t>(atom)] = 1.0;
  return Pmf(std::move(p));
}

JointPmf2::JointPmf2(std::vector<double> probs, int nx, int ny)
    : probs_(std::move(probs)), nx_(nx), ny_(ny) {
  if (nx_ < 1 || ny_ < 1 || probs_.size() != static_cast<std::size_t>(nx_) * ny_)
    throw std::invalid_argument("JointPmf2: shape mismatch");
  check_mass(probs_, "JointPmf2");
}

Pmf JointPmf2::marginal_x() const {
  std::vector<double> m(static_cast<std::size_t>(nx_), 0.0);
  for (int x = 0; x < nx_; ++x)
    for (int y = 0; y < ny_; ++y) m[static_cast<std::size_t>(x)] += at(x, y);
  return Pmf(std::move(m));
}

Pmf JointPmf2::marginal_y() const {
  std::vector<double> m(static_cast<std::size_t>(ny_), 0.0);
  for (int x = 0; x < nx_; ++x)
    for (int y = 0; y < ny_; ++y) m[static_cast<std::size_t>(y)] += at(x, y);
  return Pmf(std::move(m));
}

JointPmf3::JointPmf3(std::vector<double> probs, int nu, int nx, int ny)
    : probs_(std::move(probs)), nu_(nu), nx_(nx), ny_(ny) {
  if (nu_ < 1 || nx_ < 1 || ny_ < 1 ||
      probs_.size() != static_cast<std::size_t>(nu_) * nx_ * ny_)
    throw std::invalid_argument("JointPmf3: shape mismatch");
  check_mass(probs_, "JointPmf3");
}

JointPmf2 JointPmf3::marginal_ux() const {
  std::vector<double> m(static_cast<std::size_t>(nu_) * nx_, 0.0);
  for (int u = 0; u < nu_; ++u)
    for (int x = 0; x < nx_; ++x)
      for (int y = 0; y < ny_; ++y) m[static_cast<std::size_t>(u * nx_ + x)] += at(u, x, y);
  return JointPmf2(std::move(m), nu_, nx_);
}

JointPmf2 JointPmf3::marginal_uy() const {
  std::vector<double> m(static_cast<std::size_t>(nu_) * ny_, 0.0);
  for (int u = 0; u < nu_; ++u)
    for (int x = 0; x < nx_; ++x)
      for (int y = 0; y < ny_; ++y) m[static_cast<std::size_t>(u * ny_ + y)] += at(u, x, y);
  return JointPmf2(std::move(m), nu_, ny_);
}

JointPmf2 JointPmf3::marginal_xy() const {
  std::vector<double> m(static_cast<std::size_t>(nx_) * ny_, 0.0);
  for (int u = 0; u < nu_; ++u)
    for (int x = 0; x < nx_; ++x)
      for (int y = 0; y < ny_; ++y) m[static_cast<std::size_t>(x * ny_ + y)] += at(u, x, y);
  return JointPmf2(std::move(m), nx_, ny_);
}

Pmf JointPmf3::marginal_u() const { return marginal_ux().marginal_x(); }
Pmf JointPmf3::marginal_x() const { return marginal_xy().marginal_x(); }
Pmf JointPmf3::marginal_y() const { return marginal_xy().marginal_y(); }

ConditionalPmf::ConditionalPmf(std::vector<std::vector<double>> rows) {
  if (rows.empty()) throw std::invalid_argument("ConditionalPmf: no rows");
  n_in_ = static_cast<int>(rows.size());
  n_out_ = static_cast<int>(rows[0].size());
  rows_.reserve(static_cast<std::size_t>(n_in_) * n_out_);
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != n_out_)
      throw std::invalid_argument("ConditionalPmf: ragged rows");
    check_mass(row, "ConditionalPmf row");
    rows_.insert(rows_.end(), row.begin(), row.end());
  }
}

ConditionalPmf ConditionalPmf::identity(int size) {
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(size),
                                        std::vector<double>(static_cast<std::size_t>(size), 0.0));
  for (int i = 0; i < size; ++i) rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1.0;
  return ConditionalPmf(std::move(rows));
}

ConditionalPmf ConditionalPmf::constant(int n_in, int n_out, int atom) {
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(n_in),
                                        std::vector<double>(static_cast<std::size_t>(n_out), 0.0));
  for (auto& row : rows) row[static_cast<std::size_t>(atom)] = 1.0;
  return ConditionalPmf(std::move(rows));
}

EmpiricalType::EmpiricalType(std::vector<std::int64_t> c, std::int64_t len)
    : counts(std::move(c)), n(len) {
  if (n < 1) throw std::invalid_argument("EmpiricalType: n must be >= 1");
  std::int64_t total = 0;
  for (std::int64_t k : counts) {
    if (k < 0) throw std::invalid_argument("EmpiricalType: negative count");
    total += k;
  }
  if (total != n) throw std::invalid_argument("EmpiricalType: counts do not sum to n");
}

Pmf EmpiricalType::induced() const {
  std::vector<double> p;
  p.reserve(counts.size());
  for (std::int64_t k : counts) p.push_back(static_cast<double>(k) / static_cast<double>(n));
  return Pmf(std::move(p));
}

JointPmf3 compose(const JointPmf2& pxy, const ConditionalPmf& channel) {
  if (channel.n_in() != pxy.nx())
    throw std::invalid_argument("compose: channel input alphabet does not match X");
  const int nu = channel.n_out(), nx = pxy.nx(), ny = pxy.ny();
  std::vector<double> t(static_cast<std::size_t>(nu) * nx * ny, 0.0);
  for (int u = 0; u < nu; ++u)
    for (int x = 0; x < nx; ++x)
      for (int y = 0; y < ny; ++y)
        t[static_cast<std::size_t>((u * nx + x) * ny + y)] = pxy.at(x, y) * channel.at(x, u);
  return JointPmf3(std::move(t), nu, nx, ny);
}

}  // namespace detex
