#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rdex/engine.hpp"
#include "rdex/trace.hpp"

namespace rdex {

/// One benchmarking campaign: a set of problems at a common dimension, a
/// fixed number of runs each, and the shared budget/checkpoint layout.
/// Run r of every problem uses seed base_seed + r.
struct ExperimentPlan {
  std::vector<std::string> problems;
  int dim = 10;
  int runs_per_problem = 25;
  long long max_fe = 0;  // 0 = derive as 20000 * dim
  int n_checkpoints = 2000;
  std::uint64_t base_seed = 1;
  EngineConfig engine;

  long long effective_max_fe() const { return max_fe > 0 ? max_fe : 20000LL * dim; }
};

/// Throws std::invalid_argument on an empty problem list, non-positive
/// counts, or a checkpoint count the budget cannot support.
void validate(const ExperimentPlan& plan);

/// File a run is stored in: <dir>/<problem>__run<id>.csv
std::filesystem::path trace_path(const std::filesystem::path& dir, const std::string& problem,
                                 int run_id);

/// Serializes a trace: a `# problem,run,seed,dim,max_fe,n_checkpoints` header
/// line followed by one `checkpoint,nfe,best_f,best_cv` row per point, reals
/// in shortest round-trip decimal form. The byte stream is a pure function
/// of the trace.
std::string format_trace(const RunTrace& trace);

/// Inverse of format_trace. Throws std::runtime_error on malformed input,
/// including a point count that disagrees with the header.
RunTrace parse_trace(const std::string& text);

/// Writes atomically (temp file + rename) so interrupted writes never leave
/// a partial trace behind.
void save_trace(const RunTrace& trace, const std::filesystem::path& path);

/// Loads and validates one trace file.
RunTrace load_trace(const std::filesystem::path& path);

struct ExperimentResult {
  std::vector<RunTrace> traces;  // plan order: problems outer, run ids inner
  int executed = 0;              // runs computed in this call
  int resumed = 0;               // runs loaded from existing files
};

/// Executes the plan, writing one trace file per (problem, run) into
/// out_dir. Existing well-formed traces that match the plan header are
/// loaded instead of re-run, so an interrupted campaign continues where it
/// stopped; a header conflict (different seed/budget/layout) is an error.
/// jobs > 1 distributes pending runs over worker threads; outputs are
/// byte-identical to a serial execution since every run owns its rng.
ExperimentResult run_experiment(const ExperimentPlan& plan, const std::filesystem::path& out_dir,
                                int jobs = 1);

/// Per-problem targets: TGT = median over runs of the feasibility-aware
/// final quality, with B_p derived from the supplied traces of that problem.
/// Returns (problem, target) pairs in first-appearance order.
std::vector<std::pair<std::string, double>> derive_median_targets(
    const std::vector<RunTrace>& traces);

/// `problem,target` CSV with a header row.
std::string format_targets(const std::vector<std::pair<std::string, double>>& targets);
std::vector<std::pair<std::string, double>> parse_targets(const std::string& text);

/// Loads every trace file (*.csv) in a directory, sorted by (problem,
/// run_id) for a stable order. Throws when the directory holds no traces.
std::vector<RunTrace> load_trace_dir(const std::filesystem::path& dir);

/// Flat key-value experiment config (`key = value`, `#` comments). Returns
/// the plan with defaults filled in; unknown keys are an error.
ExperimentPlan parse_plan_config(const std::string& text);

}  // namespace rdex
