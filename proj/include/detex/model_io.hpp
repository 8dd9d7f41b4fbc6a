#pragma once

#include <iosfwd>
#include <string>

#include "detex/model.hpp"

namespace detex {

// Structured-text model files. Layout (whitespace separated, '#' comments):
//
//   M 3
//   K 2
//   X 2
//   Y 2 2
//   epsilon 0.2 0.2
//   joint 1 1
//   0.30 0.23
//   0.27 0.20
//   ...one "joint m k" block per hypothesis/detector pair, row-major over X.
//
// Numbers are kept as decimal strings until parse time.

HypothesisModel parse_model(std::istream& in);
HypothesisModel load_model(const std::string& path);

std::string serialize_model(const HypothesisModel& model);
void save_model(const HypothesisModel& model, const std::string& path);

}  // namespace detex
