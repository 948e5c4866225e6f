#pragma once

#include <span>
#include <vector>

#include "rdex/problem.hpp"

namespace rdex {

/// Knobs of the feasibility machinery: the equality tolerance band and the
/// fraction of the front used to seat the adaptive epsilon level.
struct ViolationConfig {
  double eps_eq = 1e-4;  // |h| <= eps_eq counts as satisfied
  double eta = 0.8;      // order-statistic fraction for the epsilon schedule
};

/// One population member with its cached evaluation summary. phi_trunc and
/// score are refreshed at the start of each generation under that
/// generation's epsilon and are stale in between.
struct ScoredIndividual {
  std::vector<double> x;
  double f = 0.0;
  double phi = 0.0;        // mean constraint violation, >= 0
  double phi_trunc = 0.0;  // phi truncated to 0 when phi <= epsilon
  double score = 0.0;      // feasibility-aware rank score
};

/// Mean constraint violation: inequalities contribute max(0, g_i), equalities
/// contribute max(0, |h_j| - eps_eq), averaged over all m_g + m_h constraints.
/// Returns 0 for unconstrained problems.
double mean_violation(const RawEvaluation& raw, const ViolationConfig& cfg);

/// Epsilon comparison level for one generation.
struct EpsilonState {
  double epsilon = 0.0;
  int k_index = 1;  // 1-based order statistic used while the schedule is active
  enum class Phase { active, zeroed } phase = Phase::active;
};

/// Computes the epsilon level from the front's violation values:
///   k = max(1, floor(eta * N * (1 - nfe/max_fe)^2)), epsilon = k-th smallest
/// while nfe <= 0.8 * max_fe, and epsilon = 0 afterwards.
/// Throws std::invalid_argument on an empty front.
EpsilonState epsilon_level(std::span<const double> front_phis, const BudgetLedger& ledger,
                           const ViolationConfig& cfg);

/// phi truncated under epsilon: 0 when phi <= epsilon, else phi.
inline double truncated_violation(double phi, double epsilon) {
  return phi <= epsilon ? 0.0 : phi;
}

/// Scalar ranking score. Members inside the epsilon band rank by objective;
/// everyone else ranks strictly after them by violation:
///   s = f                 when phi <= epsilon
///   s = f_max + 1 + phi   otherwise, f_max taken over the current front.
double rank_score(double f, double phi, double epsilon, double f_max);

/// One-to-one survivor rule between a parent and its trial under a shared
/// epsilon: the trial replaces the parent iff its truncated violation is
/// strictly smaller, or the truncated violations are equal and the trial's
/// objective is not worse.
bool select(const ScoredIndividual& parent, const ScoredIndividual& trial, double epsilon);

/// Feasibility-aware final quality: f when cv == 0, else b_p + cv, where b_p
/// upper-bounds every feasible objective in the comparison. Infeasible runs
/// therefore always rank after feasible ones.
double feasibility_aware_quality(double final_f, double final_cv, double b_p);

}  // namespace rdex
