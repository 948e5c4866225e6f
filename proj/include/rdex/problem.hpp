#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rdex {

/// Raw constraint-aware evaluation of one point: objective value plus the
/// inequality values g_i (feasible when <= 0) and equality values h_j
/// (feasible when == 0 up to the engine's equality tolerance).
struct RawEvaluation {
  double objective = 0.0;
  std::vector<double> ineq;
  std::vector<double> eq;
};

/// Static description of a box-bounded constrained problem. The evaluator is
/// a pure function of x; all constraint handling lives outside of it.
struct ProblemSpec {
  std::string name;
  int dim = 0;
  std::vector<double> lower;
  std::vector<double> upper;
  int n_ineq = 0;
  int n_eq = 0;
  std::function<RawEvaluation(std::span<const double>)> evaluator;
  std::optional<double> reference_optimum;
};

/// Throws std::invalid_argument when the spec is internally inconsistent
/// (bound lengths, lower > upper, missing evaluator, negative counts).
void validate(const ProblemSpec& spec);

/// Evaluation budget. nfe counts every evaluator call ever made and never
/// exceeds max_fe.
struct BudgetLedger {
  long long nfe = 0;
  long long max_fe = 0;

  long long remaining() const { return max_fe - nfe; }
  bool exhausted() const { return nfe >= max_fe; }
};

/// True when x lies inside the box (bounds inclusive).
/// Throws std::invalid_argument on dimension mismatch.
bool in_bounds(std::span<const double> x, const ProblemSpec& spec);

/// Evaluates spec at x and charges one unit of budget.
///
/// Errors: std::runtime_error when the ledger is exhausted (checked before
/// the evaluator runs) or when the evaluator returns a non-finite value or
/// wrong constraint counts; std::invalid_argument when x has the wrong
/// dimension or leaves the box. The budget is charged for every evaluator
/// call, including ones whose output is then rejected as invalid.
RawEvaluation evaluate(const ProblemSpec& spec, std::span<const double> x, BudgetLedger& ledger);

}  // namespace rdex
