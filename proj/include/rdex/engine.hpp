#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "rdex/adaptive.hpp"
#include "rdex/constraints.hpp"
#include "rdex/problem.hpp"
#include "rdex/rng.hpp"
#include "rdex/trace.hpp"

namespace rdex {

struct EngineConfig {
  int n0 = 600;                    // initial population size
  int n_min = 4;                   // terminal population size, >= 4
  int history = 5;                 // learned memory slots
  double rho_init = 0.7;           // initial eb-branch share
  double perturb_prob = 0.2;       // per-trial chance of a perturbed crossover base
  double perturb_scale = 0.1;      // Cauchy scale of the base perturbation
  double pbest_frac = 0.3;         // top fraction eligible as pbest
  double rank_bias_lambda = 3.0;   // donor rank-bias strength
  ViolationConfig violation;
  std::uint64_t seed = 0;

  // Diagnostic only: pins the branch-routing probability to a constant,
  // bypassing the adaptive rate. Used to isolate one branch in tests.
  std::optional<double> rho_override;
};

/// Throws std::invalid_argument on out-of-range settings.
void validate(const EngineConfig& cfg);

struct EngineCounters {
  long long std_trials = 0;
  long long eb_trials = 0;
  long long accepted = 0;
};

/// Instrumentation events. Hooks observe; they must not mutate engine state.
struct EvalEvent {
  long long nfe;     // after this evaluation was charged
  double f;
  double phi;
  double best_f;     // incumbent after this evaluation
  double best_phi;
};

struct SelectionEvent {
  int index;               // front slot being challenged
  double epsilon;          // comparison level of this generation
  double parent_f, parent_phi;
  double trial_f, trial_phi;
  bool accepted;
  Branch branch;
};

struct GenerationEvent {
  long long generation;    // index of the generation that just finished
  long long nfe;
  EpsilonState eps;        // level the generation ran under
  int front_size;          // after the end-of-generation shrink
  double success_rate;     // acceptance share of this generation
  double rho_eb;           // eb share for the next generation
};

struct EngineHooks {
  std::function<void(const EvalEvent&)> on_eval;
  std::function<void(const SelectionEvent&)> on_selection;
  std::function<void(const GenerationEvent&)> on_generation;
};

/// Complete mutable state of a run. The struct is open so tests can assemble
/// states by hand and drive single generations with a scripted Rng.
struct EngineState {
  EngineConfig config;
  std::vector<ScoredIndividual> front;  // competing population
  std::vector<ScoredIndividual> pool;   // donor archive: ring of capacity n0
  int pool_write = 0;                   // next ring slot to overwrite
  MemoryBank bank;
  double success_rate = 0.5;
  double rho_eb = 0.7;
  BudgetLedger ledger;
  EpsilonState eps;                     // level of the generation in flight
  long long generation = 0;
  bool terminal = false;                // budget ran out mid-generation
  EngineCounters counters;
  std::vector<double> best_x;           // incumbent: lexicographic (phi, f) minimum
  double best_f = 0.0;
  double best_phi = 0.0;
  std::unique_ptr<Rng> rng;

  EngineState() : bank(5) {}
};

/// Per-generation ranking context shared by all trials of the generation:
/// front order sorted by score ascending, the rank-biased donor weights, and
/// the pbest cutoff max(2, floor(pbest_frac * N)).
struct GenerationContext {
  EpsilonState eps;
  double f_max = 0.0;
  std::vector<int> order;        // front indices, best score first, ties by index
  std::vector<double> rank_cdf;  // cumulative exp(-lambda * rank / N) over `order`
  int pbest_count = 2;
};

/// Target front size under linear population-size reduction.
int lpsr_size(const BudgetLedger& ledger, int n0, int n_min);

/// Samples n0 points uniformly in the box, evaluates them, and returns a
/// ready-to-step state (front == pool, memories and rates at defaults).
/// Throws std::invalid_argument when the budget cannot cover initialization.
EngineState initialize(const EngineConfig& cfg, const ProblemSpec& problem, long long max_fe,
                       const EngineHooks* hooks = nullptr);

/// Scores the front under the current budget position and builds the
/// generation context. Writes phi_trunc and score into the front members.
GenerationContext rank_front(EngineState& state);

/// Current-to-pbest mutation for front slot i:
///   v = x_i + F (x_pbest - x_i) + F (x_r1 - x_r2)
/// pbest uniform over the ctx.pbest_count best, r1 rank-biased over the front
/// (resampled while r1 == i), r2 uniform over the pool (resampled while its
/// point coincides with x_i or x_r1, at most 16 attempts).
/// Draw order: pbest uniform_int, r1 uniform01 (per attempt), r2 uniform_int
/// (per attempt). Throws std::invalid_argument when the front has fewer than
/// 4 members.
std::vector<double> mutate_standard(const EngineState& state, const GenerationContext& ctx, int i,
                                    double f_scale, Rng& rng);

/// Rank-directed mutation for front slot i. Three distinct donors != i are
/// drawn uniformly (uniform_int per attempt, rejected until distinct), then
/// ordered best/mid/worst by (score, index):
///   v = x_i + F (x_best - x_i) + F (x_mid - x_worst)
/// Throws std::invalid_argument when the front has fewer than 4 members.
std::vector<double> mutate_eb(const EngineState& state, const GenerationContext& ctx, int i,
                              double f_scale, Rng& rng);

struct CrossoverResult {
  std::vector<double> trial;
  double cr_realized = 0.0;  // crossed component share, in (0, 1]
};

/// Binomial crossover with a lazily perturbed base. Draw order: one uniform01
/// for the perturbation decision (compared against perturb_prob), one
/// uniform_int(D) for j_rand, then per component one uniform01; components
/// that do not cross and have the perturbation active draw one cauchy_std
/// for base_j = parent_j + perturb_scale * cauchy. At least one component
/// (j_rand) always comes from the donor.
CrossoverResult crossover(std::span<const double> parent, std::span<const double> donor,
                          double cr, double perturb_prob, double perturb_scale, Rng& rng);

/// Midpoint-to-bound repair: components below/above the box move to
/// (parent_j + bound_j) / 2. In-bounds components pass through.
std::vector<double> repair(std::span<const double> trial, std::span<const double> parent,
                           std::span<const double> lower, std::span<const double> upper);

/// Runs one generation: scores the front, generates and selects one trial per
/// member (stopping early when the budget runs out, which sets
/// state.terminal), applies the memory/rate updates from this generation's
/// improvements, and shrinks the front to the reduction target.
///
/// Per-trial draw order: branch uniform01, memory slot uniform_int, F draws,
/// CR normal_std, mutation draws, crossover draws (see the operation docs).
void generation(EngineState& state, const ProblemSpec& problem, const EngineHooks* hooks = nullptr);

/// Full run: initialize, then generations until the budget is exhausted.
/// Records the incumbent at every checkpoint threshold; the returned trace
/// has exactly schedule.size() points and mirrors the final incumbent.
RunTrace run(const EngineConfig& cfg, const ProblemSpec& problem, const CheckpointSchedule& schedule,
             const EngineHooks* hooks = nullptr);

}  // namespace rdex
