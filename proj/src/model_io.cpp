#include "detex/model_io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "detex/errors.hpp"

namespace detex {

namespace {

// Token stream with '#' line comments.
class Tokens {
 public:
  explicit Tokens(std::istream& in) : in_(in) {}

  std::string next() {
    if (!pending_.empty()) {
      std::string t = pending_;
      pending_.clear();
      return t;
    }
    std::string t;
    while (in_ >> t) {
      if (t[0] == '#') {
        std::string rest;
        std::getline(in_, rest);
        continue;
      }
      return t;
    }
    throw ValidationError("model file: unexpected end of input");
  }

  bool done() {
    if (!pending_.empty()) return false;
    std::string t;
    while (in_ >> t) {
      if (t[0] == '#') {
        std::string rest;
        std::getline(in_, rest);
        continue;
      }
      pending_ = t;
      return false;
    }
    return true;
  }

 private:
  std::istream& in_;
  std::string pending_;
};

int parse_int(const std::string& t, const char* what) {
  errno = 0;
  char* end = nullptr;
  long v = std::strtol(t.c_str(), &end, 10);
  if (errno != 0 || end == t.c_str() || *end != '\0')
    throw ValidationError(std::string("model file: bad integer for ") + what + ": '" + t + "'");
  return static_cast<int>(v);
}

double parse_double(const std::string& t, const char* what) {
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(t.c_str(), &end);
  if (errno != 0 || end == t.c_str() || *end != '\0')
    throw ValidationError(std::string("model file: bad number for ") + what + ": '" + t + "'");
  return v;
}

void expect(Tokens& tok, const std::string& keyword) {
  std::string t = tok.next();
  if (t != keyword)
    throw ValidationError("model file: expected '" + keyword + "', found '" + t + "'");
}

}  // namespace

HypothesisModel parse_model(std::istream& in) {
  Tokens tok(in);
  expect(tok, "M");
  const int m_count = parse_int(tok.next(), "M");
  expect(tok, "K");
  const int k_count = parse_int(tok.next(), "K");
  expect(tok, "X");
  const int nx = parse_int(tok.next(), "X");
  expect(tok, "Y");
  if (m_count < 1 || k_count < 1 || nx < 1)
    throw ValidationError("model file: M, K and alphabet sizes must be positive");
  std::vector<int> ny(static_cast<std::size_t>(k_count));
  for (int k = 0; k < k_count; ++k) ny[static_cast<std::size_t>(k)] = parse_int(tok.next(), "Y");
  expect(tok, "epsilon");
  std::vector<double> epsilon(static_cast<std::size_t>(k_count));
  for (int k = 0; k < k_count; ++k)
    epsilon[static_cast<std::size_t>(k)] = parse_double(tok.next(), "epsilon");

  std::vector<std::vector<bool>> seen(static_cast<std::size_t>(m_count),
                                      std::vector<bool>(static_cast<std::size_t>(k_count), false));
  std::vector<std::vector<std::vector<double>>> tables(
      static_cast<std::size_t>(m_count),
      std::vector<std::vector<double>>(static_cast<std::size_t>(k_count)));

  while (!tok.done()) {
    expect(tok, "joint");
    const int m = parse_int(tok.next(), "joint m");
    const int k = parse_int(tok.next(), "joint k");
    if (m < 1 || m > m_count || k < 1 || k > k_count)
      throw ValidationError("model file: joint indices out of range: joint " + std::to_string(m) +
                            " " + std::to_string(k));
    if (seen[static_cast<std::size_t>(m - 1)][static_cast<std::size_t>(k - 1)])
      throw ValidationError("model file: duplicate block joint " + std::to_string(m) + " " +
                            std::to_string(k));
    seen[static_cast<std::size_t>(m - 1)][static_cast<std::size_t>(k - 1)] = true;
    auto& cells = tables[static_cast<std::size_t>(m - 1)][static_cast<std::size_t>(k - 1)];
    const int need = nx * ny[static_cast<std::size_t>(k - 1)];
    cells.reserve(static_cast<std::size_t>(need));
    for (int i = 0; i < need; ++i) cells.push_back(parse_double(tok.next(), "joint entry"));
  }

  std::vector<std::vector<JointPmf2>> joints;
  joints.reserve(static_cast<std::size_t>(m_count));
  for (int m = 0; m < m_count; ++m) {
    std::vector<JointPmf2> row;
    row.reserve(static_cast<std::size_t>(k_count));
    for (int k = 0; k < k_count; ++k) {
      if (!seen[static_cast<std::size_t>(m)][static_cast<std::size_t>(k)])
        throw ValidationError("model file: missing block joint " + std::to_string(m + 1) + " " +
                              std::to_string(k + 1));
      try {
        row.emplace_back(tables[static_cast<std::size_t>(m)][static_cast<std::size_t>(k)], nx,
                         ny[static_cast<std::size_t>(k)]);
      } catch (const std::invalid_argument& e) {
        throw ValidationError("model file: joint " + std::to_string(m + 1) + " " +
                              std::to_string(k + 1) + ": " + e.what());
      }
    }
    joints.push_back(std::move(row));
  }
  return HypothesisModel(std::move(joints), std::move(epsilon));
}

HypothesisModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("model file: cannot open '" + path + "'");
  return parse_model(in);
}

std::string serialize_model(const HypothesisModel& model) {
  std::ostringstream out;
  char buf[64];
  out << "M " << model.num_hypotheses() << "\n";
  out << "K " << model.num_detectors() << "\n";
  out << "X " << model.nx() << "\n";
  out << "Y";
  for (int k = 0; k < model.num_detectors(); ++k) out << " " << model.ny(k);
  out << "\nepsilon";
  for (double e : model.epsilon()) {
    std::snprintf(buf, sizeof buf, "%.17g", e);
    out << " " << buf;
  }
  out << "\n";
  for (int m = 0; m < model.num_hypotheses(); ++m)
    for (int k = 0; k < model.num_detectors(); ++k) {
      out << "joint " << (m + 1) << " " << (k + 1) << "\n";
      const auto& j = model.joint(m, k);
      for (int x = 0; x < j.nx(); ++x) {
        for (int y = 0; y < j.ny(); ++y) {
          std::snprintf(buf, sizeof buf, "%.17g", j.at(x, y));
          out << (y ? " " : "") << buf;
        }
        out << "\n";
      }
    }
  return out.str();
}

void save_model(const HypothesisModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("model file: cannot write '" + path + "'");
  out << serialize_model(model);
}

}  // namespace detex
