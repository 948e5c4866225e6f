#include "rdex/problem.hpp"

#include <cmath>
#include <stdexcept>

namespace rdex {

void validate(const ProblemSpec& spec) {
  if (spec.name.empty()) throw std::invalid_argument("problem spec has no name");
  if (spec.dim <= 0) throw std::invalid_argument("problem '" + spec.name + "': dim must be positive");
  if (static_cast<int>(spec.lower.size()) != spec.dim || static_cast<int>(spec.upper.size()) != spec.dim)
    throw std::invalid_argument("problem '" + spec.name + "': bound lengths do not match dim");
  for (int j = 0; j < spec.dim; ++j) {
    if (!(spec.lower[j] <= spec.upper[j]))
      throw std::invalid_argument("problem '" + spec.name + "': lower > upper at component " + std::to_string(j));
    if (!std::isfinite(spec.lower[j]) || !std::isfinite(spec.upper[j]))
      throw std::invalid_argument("problem '" + spec.name + "': non-finite bound at component " + std::to_string(j));
  }
  if (spec.n_ineq < 0 || spec.n_eq < 0)
    throw std::invalid_argument("problem '" + spec.name + "': negative constraint count");
  if (!spec.evaluator) throw std::invalid_argument("problem '" + spec.name + "': missing evaluator");
}

bool in_bounds(std::span<const double> x, const ProblemSpec& spec) {
  if (static_cast<int>(x.size()) != spec.dim)
    throw std::invalid_argument("problem '" + spec.name + "': point has dimension " +
                                std::to_string(x.size()) + ", expected " + std::to_string(spec.dim));
  for (int j = 0; j < spec.dim; ++j)
    if (x[j] < spec.lower[j] || x[j] > spec.upper[j]) return false;
  return true;
}

RawEvaluation evaluate(const ProblemSpec& spec, std::span<const double> x, BudgetLedger& ledger) {
  if (ledger.exhausted())
    throw std::runtime_error("problem '" + spec.name + "': evaluation budget exhausted (nfe=" +
                             std::to_string(ledger.nfe) + ", max_fe=" + std::to_string(ledger.max_fe) + ")");
  if (!in_bounds(x, spec))
    throw std::invalid_argument("problem '" + spec.name + "': point outside bounds");

  RawEvaluation raw = spec.evaluator(x);
  ledger.nfe += 1;  // every evaluator call costs, even if its output is rejected below

  auto reject = [&](const std::string& what) {
    throw std::runtime_error("problem '" + spec.name + "': evaluator returned " + what +
                             " (nfe=" + std::to_string(ledger.nfe) + ")");
  };
  if (static_cast<int>(raw.ineq.size()) != spec.n_ineq) reject("wrong inequality count");
  if (static_cast<int>(raw.eq.size()) != spec.n_eq) reject("wrong equality count");
  if (!std::isfinite(raw.objective)) reject("non-finite objective");
  for (double g : raw.ineq)
    if (!std::isfinite(g)) reject("non-finite inequality value");
  for (double h : raw.eq)
    if (!std::isfinite(h)) reject("non-finite equality value");
  return raw;
}

}  // namespace rdex
