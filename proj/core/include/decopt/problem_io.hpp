#pragma once

#include <iosfwd>
#include <memory>
#include <string>

#include "decopt/families.hpp"

namespace decopt {

// JSON round-trip for the built-in families; problems with arbitrary code
// callbacks are not serializable. Graph endpoints are written 1-based, as in
// the edge-list text format.
void save_problem_json(const LinearLogData& data, std::ostream& out);
void save_problem_json(const CoupledQuadraticData& data, std::ostream& out);

struct LoadedProblem {
  std::string family;  // "linear-log" or "coupled-quadratic"
  std::shared_ptr<CoupledProblem> problem;
  LinearLogData linear_log;
  CoupledQuadraticData quadratic;
};

LoadedProblem load_problem_json(std::istream& in);

}  // namespace decopt
