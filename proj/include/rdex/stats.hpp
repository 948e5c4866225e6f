#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rdex/trace.hpp"

namespace rdex {

/// Median of a sample (average of the two middle order statistics for even
/// sizes). Throws std::invalid_argument on an empty sample.
double median(std::vector<double> values);

/// Offset that places every infeasible outcome after every feasible one:
/// largest finite value plus 1. Throws when no finite value is present.
double quality_baseline(std::span<const double> final_objectives);

/// Upper-tail probability of the standard normal.
double normal_survival(double z);

/// Upper-tail probability of the chi-square distribution, computed through
/// the regularized upper incomplete gamma function (series / continued
/// fraction split at x < df + 2). Relative accuracy is driven to machine
/// level, comfortably below 1e-10 for df <= 10.
double chi2_survival(double x, int df);

enum class Verdict { win, tie, loss };

struct RankSumResult {
  double statistic = 0.0;  // midrank sum of the first sample
  double p_value = 1.0;
  Verdict verdict = Verdict::tie;  // win: first sample significantly smaller
};

/// Two-sided Wilcoxon rank-sum test with midranks for ties. The p-value is
/// the doubled smaller one-sided tail, capped at 1. Pooled sizes up to 20 are
/// computed by exact enumeration of all rank splits; larger samples use the
/// normal approximation with tie-corrected variance and a 0.5 continuity
/// correction. Throws std::invalid_argument when either sample is empty.
RankSumResult wilcoxon_rank_sum(std::span<const double> ours, std::span<const double> theirs,
                                double alpha);

/// Holm step-down correction. Returns per-hypothesis rejection flags in the
/// input order.
std::vector<bool> holm_correct(std::span<const double> p_values, double alpha);

struct FriedmanResult {
  double chi2 = 0.0;
  int df = 0;
  double p_value = 1.0;
  std::vector<double> avg_ranks;
};

/// Friedman test over a complete block design: values[block][algorithm],
/// every row the same length k >= 2, at least one block. Rows are ranked
/// with midranks (rank 1 = smallest); the statistic is the classical
///   chi2 = 12 N / (k (k+1)) (sum_j Rbar_j^2 - k (k+1)^2 / 4),  df = k - 1.
FriedmanResult friedman(const std::vector<std::vector<double>>& values);

/// Same statistic evaluated directly from pre-averaged ranks.
FriedmanResult friedman_from_average_ranks(std::span<const double> avg_ranks, int n_blocks);

/// Vargha-Delaney effect size: probability that a value from `theirs`
/// exceeds one from `ours`, ties counted half. 0.5 means no effect; above
/// 0.5 favors `ours` for minimized metrics.
double vargha_delaney_a12(std::span<const double> ours, std::span<const double> theirs);

/// First checkpoint whose feasibility-aware quality reaches the target
/// (inclusive), or n_checkpoints + 1 when the run never does.
int time_to_target(const RunTrace& trace, double target, double b_p);

/// Mean over checkpoints of log10(1 + max(best_f - target, 0)).
double auc(const RunTrace& trace, double target);

/// Per-run metric values, the unit the report aggregates.
struct MetricRow {
  std::string problem;
  std::string algorithm;
  int run_id = 0;
  double quality = 0.0;
  double ttt = 0.0;
  double auc = 0.0;
};

/// Traces grouped per algorithm label; the first label is the reference the
/// pairwise tests compare against.
using AlgorithmTraces = std::vector<std::pair<std::string, std::vector<RunTrace>>>;

/// Computes per-run metric rows. B_p is derived per problem from the final
/// objectives of all algorithms together; targets must cover every problem.
std::vector<MetricRow> metric_rows(const AlgorithmTraces& traces,
                                   const std::vector<std::pair<std::string, double>>& targets);

struct PairwiseCell {
  std::string metric;
  std::string competitor;
  std::string problem;
  double ref_mean = 0.0, ref_sd = 0.0;
  double comp_mean = 0.0, comp_sd = 0.0;
  double p_value = 1.0;
  double a12 = 0.5;
  Verdict verdict = Verdict::tie;  // at alpha, uncorrected
  bool holm_reject = false;        // Holm across this (metric, competitor) family
};

struct WtlLine {
  std::string metric;
  std::string competitor;
  int win = 0, tie = 0, loss = 0;          // uncorrected
  int holm_win = 0, holm_tie = 0, holm_loss = 0;
  double median_a12 = 0.5;
};

struct FriedmanBlock {
  std::string metric;
  std::vector<std::string> algorithms;
  FriedmanResult result;  // over per-problem medians
};

struct StatReport {
  double alpha = 0.05;
  std::string reference;
  std::vector<std::string> competitors;
  std::vector<std::string> problems;  // sorted
  std::vector<PairwiseCell> cells;    // metric-major, then competitor, then problem
  std::vector<WtlLine> wtl;
  std::vector<FriedmanBlock> friedman_blocks;
};

/// Aggregates metric rows into the full comparison report: per-problem
/// Wilcoxon tests against the reference with Holm correction across problems,
/// W/T/L counts, A12 effect sizes, and a Friedman test per metric over the
/// per-problem medians of all algorithms. Throws std::invalid_argument when
/// the design is incomplete (an algorithm missing runs on some problem).
StatReport build_report(std::span<const MetricRow> rows, double alpha);

/// CSV rendering: header plus one row per problem x competitor x metric.
std::string render_csv(const StatReport& report);

/// Aligned-text rendering with per-metric tables, W/T/L footers and the
/// Friedman blocks.
std::string render_text(const StatReport& report);

}  // namespace rdex
