#pragma once

#include <string>
#include <vector>

namespace rdex {

/// Budget thresholds at which the incumbent is recorded. Thresholds are
/// strictly increasing and the last one equals max_fe, so a finished run
/// always carries exactly n_checkpoints points.
struct CheckpointSchedule {
  long long max_fe = 0;
  std::vector<long long> thresholds;  // checkpoint c fires once nfe >= thresholds[c-1]

  int size() const { return static_cast<int>(thresholds.size()); }
};

/// thresholds[c-1] = ceil(c * max_fe / n) for c = 1..n.
/// Throws std::invalid_argument unless 1 <= n <= max_fe.
CheckpointSchedule plan_checkpoints(long long max_fe, int n);

struct TracePoint {
  int checkpoint = 0;   // 1-based checkpoint index
  long long nfe = 0;    // evaluations consumed when the checkpoint fired
  double best_f = 0.0;  // incumbent objective
  double best_cv = 0.0; // incumbent mean violation
};

/// Convergence record of one (problem, run) pair. (best_cv, best_f) is
/// lexicographically non-increasing along points, and final_f/final_cv equal
/// the last point.
struct RunTrace {
  std::string problem;
  int run_id = 0;
  std::uint64_t seed = 0;
  int dim = 0;
  long long max_fe = 0;
  int n_checkpoints = 0;
  std::vector<TracePoint> points;
  double final_f = 0.0;
  double final_cv = 0.0;
};

}  // namespace rdex
