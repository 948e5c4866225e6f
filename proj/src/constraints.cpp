#include "rdex/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rdex {

double mean_violation(const RawEvaluation& raw, const ViolationConfig& cfg) {
  std::size_t m = raw.ineq.size() + raw.eq.size();
  if (m == 0) return 0.0;
  double total = 0.0;
  for (double g : raw.ineq) total += std::max(0.0, g);
  for (double h : raw.eq) total += std::max(0.0, std::abs(h) - cfg.eps_eq);
  return total / static_cast<double>(m);
}

EpsilonState epsilon_level(std::span<const double> front_phis, const BudgetLedger& ledger,
                           const ViolationConfig& cfg) {
  if (front_phis.empty()) throw std::invalid_argument("epsilon_level: empty front");

  auto n = static_cast<double>(front_phis.size());
  double progress = static_cast<double>(ledger.nfe) / static_cast<double>(ledger.max_fe);
  double shrink = 1.0 - progress;
  int k = std::max(1, static_cast<int>(std::floor(cfg.eta * n * shrink * shrink)));

  EpsilonState out;
  out.k_index = k;
  if (static_cast<double>(ledger.nfe) > 0.8 * static_cast<double>(ledger.max_fe)) {
    out.phase = EpsilonState::Phase::zeroed;
    out.epsilon = 0.0;
    return out;
  }
  std::vector<double> sorted(front_phis.begin(), front_phis.end());
  std::sort(sorted.begin(), sorted.end());
  out.phase = EpsilonState::Phase::active;
  out.epsilon = sorted[static_cast<std::size_t>(k - 1)];
  return out;
}

double rank_score(double f, double phi, double epsilon, double f_max) {
  if (phi <= epsilon) return f;
  return f_max + 1.0 + phi;
}

bool select(const ScoredIndividual& parent, const ScoredIndividual& trial, double epsilon) {
  double tp = truncated_violation(parent.phi, epsilon);
  double tt = truncated_violation(trial.phi, epsilon);
  if (tt < tp) return true;
  if (tt > tp) return false;
  return trial.f <= parent.f;
}

double feasibility_aware_quality(double final_f, double final_cv, double b_p) {
  return final_cv == 0.0 ? final_f : b_p + final_cv;
}

}  // namespace rdex
