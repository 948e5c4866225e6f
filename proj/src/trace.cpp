#include "rdex/trace.hpp"

#include <stdexcept>

namespace rdex {

CheckpointSchedule plan_checkpoints(long long max_fe, int n) {
  if (n < 1) throw std::invalid_argument("plan_checkpoints: need at least one checkpoint");
  if (max_fe < n)
    throw std::invalid_argument("plan_checkpoints: max_fe must be >= n_checkpoints for strictly increasing thresholds");

  CheckpointSchedule sched;
  sched.max_fe = max_fe;
  sched.thresholds.reserve(static_cast<std::size_t>(n));
  for (long long c = 1; c <= n; ++c)
    sched.thresholds.push_back((c * max_fe + n - 1) / n);  // ceil(c * max_fe / n)
  return sched;
}

}  // namespace rdex
