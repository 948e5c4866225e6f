#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rdex/problem.hpp"

namespace rdex {

/// Registry entry: the problem plus its analytically derived optimum, used
/// by the self-check battery.
struct ProblemEntry {
  ProblemSpec spec;
  std::optional<double> known_optimum_f;
  std::optional<std::vector<double>> known_optimizer;
};

/// Names of the built-in problems in registry order.
std::vector<std::string> list_problems();

/// Instantiates a built-in problem at dimension dim.
/// Throws std::invalid_argument for unknown names or unsupported dimensions
/// (rosenbrock-cubic-line is 2-d only, mixed-eq-ineq needs dim >= 3).
ProblemEntry get_problem(const std::string& name, int dim);

/// Checks the stored optimizer against the stored optimum: the point must be
/// in bounds, reproduce known_optimum_f within 1e-9, satisfy every
/// inequality up to 1e-12, and sit on every equality within 1e-9.
/// Throws std::invalid_argument when the entry has no optimizer or optimum.
bool verify_optimum(const ProblemEntry& entry);

}  // namespace rdex
