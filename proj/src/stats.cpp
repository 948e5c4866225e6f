#include "rdex/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "rdex/constraints.hpp"

namespace rdex {

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty sample");
  std::sort(values.begin(), values.end());
  std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double quality_baseline(std::span<const double> final_objectives) {
  double best = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (double f : final_objectives)
    if (std::isfinite(f)) {
      best = std::max(best, f);
      any = true;
    }
  if (!any) throw std::invalid_argument("quality_baseline: no finite objective");
  return best + 1.0;
}

double normal_survival(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

namespace {

// Regularized lower incomplete gamma P(a, x) by series, for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma Q(a, x) by Lentz continued fraction,
// for x >= a + 1.
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double chi2_survival(double x, int df) {
  if (df < 1) throw std::invalid_argument("chi2_survival: df must be >= 1");
  if (!(x > 0.0)) return 1.0;
  double a = 0.5 * static_cast<double>(df);
  double s = 0.5 * x;
  if (s < a + 1.0) return 1.0 - gamma_p_series(a, s);
  return gamma_q_cf(a, s);
}

namespace {

// Midranks of the pooled sample (1-based, ties share the average rank).
// Returns the ranks aligned with the pooled input order.
std::vector<double> pooled_midranks(std::span<const double> a, std::span<const double> b) {
  std::size_t n = a.size() + b.size();
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  auto value = [&](std::size_t i) { return i < a.size() ? a[i] : b[i - a.size()]; };
  std::sort(idx.begin(), idx.end(), [&](std::size_t l, std::size_t r) { return value(l) < value(r); });

  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && value(idx[j + 1]) == value(idx[i])) ++j;
    double mid = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = mid;
    i = j + 1;
  }
  return ranks;
}

// Counts the rank splits of size `left` whose sum is <= / >= w, over all
// C(N, n1) equally likely splits. Backtracking over the sorted rank list;
// midrank sums are multiples of 0.5 so the comparisons are exact up to the
// guard band.
void count_splits(const std::vector<double>& ranks, std::size_t next, int left, double sum,
                  double w, long long& le, long long& ge) {
  if (left == 0) {
    if (sum <= w + 1e-9) ++le;
    if (sum >= w - 1e-9) ++ge;
    return;
  }
  if (ranks.size() - next < static_cast<std::size_t>(left)) return;
  count_splits(ranks, next + 1, left - 1, sum + ranks[next], w, le, ge);
  count_splits(ranks, next + 1, left, sum, w, le, ge);
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

}  // namespace

RankSumResult wilcoxon_rank_sum(std::span<const double> ours, std::span<const double> theirs,
                                double alpha) {
  if (ours.empty() || theirs.empty())
    throw std::invalid_argument("wilcoxon_rank_sum: empty sample");

  const auto n1 = static_cast<double>(ours.size());
  const auto n2 = static_cast<double>(theirs.size());
  const double n = n1 + n2;
  std::vector<double> ranks = pooled_midranks(ours, theirs);

  double w = 0.0;
  for (std::size_t i = 0; i < ours.size(); ++i) w += ranks[i];
  const double mu = n1 * (n + 1.0) / 2.0;

  RankSumResult out;
  out.statistic = w;

  if (ours.size() + theirs.size() <= 20) {
    std::vector<double> sorted_ranks = ranks;
    std::sort(sorted_ranks.begin(), sorted_ranks.end());
    long long le = 0, ge = 0;
    count_splits(sorted_ranks, 0, static_cast<int>(ours.size()), 0.0, w, le, ge);
    double total = binomial(static_cast<int>(n), static_cast<int>(ours.size()));
    out.p_value = std::min(1.0, 2.0 * std::min(static_cast<double>(le), static_cast<double>(ge)) / total);
  } else {
    // Tie-corrected variance of the rank sum.
    std::vector<double> pooled(ours.begin(), ours.end());
    pooled.insert(pooled.end(), theirs.begin(), theirs.end());
    std::sort(pooled.begin(), pooled.end());
    double tie_sum = 0.0;
    for (std::size_t i = 0; i < pooled.size();) {
      std::size_t j = i;
      while (j + 1 < pooled.size() && pooled[j + 1] == pooled[i]) ++j;
      auto t = static_cast<double>(j - i + 1);
      tie_sum += t * t * t - t;
      i = j + 1;
    }
    double sigma2 = n1 * n2 / 12.0 * ((n + 1.0) - tie_sum / (n * (n - 1.0)));
    if (sigma2 <= 0.0) {
      out.p_value = 1.0;  // every pooled value identical
      out.verdict = Verdict::tie;
      return out;
    }
    double sigma = std::sqrt(sigma2);
    double p_le = 1.0 - normal_survival((w - mu + 0.5) / sigma);
    double p_ge = normal_survival((w - mu - 0.5) / sigma);
    out.p_value = std::min(1.0, 2.0 * std::min(p_le, p_ge));
  }

  if (out.p_value <= alpha && w != mu)
    out.verdict = w < mu ? Verdict::win : Verdict::loss;
  else
    out.verdict = Verdict::tie;
  return out;
}

std::vector<bool> holm_correct(std::span<const double> p_values, double alpha) {
  const std::size_t m = p_values.size();
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });

  std::vector<bool> reject(m, false);
  for (std::size_t i = 0; i < m; ++i) {
    double threshold = alpha / static_cast<double>(m - i);
    if (p_values[order[i]] > threshold) break;  // step-down stops at the first failure
    reject[order[i]] = true;
  }
  return reject;
}

FriedmanResult friedman(const std::vector<std::vector<double>>& values) {
  if (values.empty()) throw std::invalid_argument("friedman: no blocks");
  const std::size_t k = values.front().size();
  if (k < 2) throw std::invalid_argument("friedman: need at least two algorithms");
  for (const auto& row : values)
    if (row.size() != k) throw std::invalid_argument("friedman: ragged block design");

  std::vector<double> rank_sum(k, 0.0);
  for (const auto& row : values) {
    std::vector<double> ranks = pooled_midranks(row, {});
    for (std::size_t j = 0; j < k; ++j) rank_sum[j] += ranks[j];
  }
  std::vector<double> avg(k);
  for (std::size_t j = 0; j < k; ++j) avg[j] = rank_sum[j] / static_cast<double>(values.size());
  FriedmanResult res = friedman_from_average_ranks(avg, static_cast<int>(values.size()));
  return res;
}

FriedmanResult friedman_from_average_ranks(std::span<const double> avg_ranks, int n_blocks) {
  const auto k = static_cast<double>(avg_ranks.size());
  if (avg_ranks.size() < 2) throw std::invalid_argument("friedman: need at least two algorithms");
  if (n_blocks < 1) throw std::invalid_argument("friedman: need at least one block");

  double sq = 0.0;
  for (double r : avg_ranks) sq += r * r;
  FriedmanResult res;
  res.chi2 = 12.0 * static_cast<double>(n_blocks) / (k * (k + 1.0)) * (sq - k * (k + 1.0) * (k + 1.0) / 4.0);
  if (res.chi2 < 0.0) res.chi2 = 0.0;  // guards rounding on identical ranks
  res.df = static_cast<int>(k) - 1;
  res.p_value = chi2_survival(res.chi2, res.df);
  res.avg_ranks.assign(avg_ranks.begin(), avg_ranks.end());
  return res;
}

double vargha_delaney_a12(std::span<const double> ours, std::span<const double> theirs) {
  if (ours.empty() || theirs.empty())
    throw std::invalid_argument("vargha_delaney_a12: empty sample");
  std::vector<double> ranks = pooled_midranks(ours, theirs);
  double r_theirs = 0.0;
  for (std::size_t i = ours.size(); i < ranks.size(); ++i) r_theirs += ranks[i];
  const auto m = static_cast<double>(theirs.size());
  const auto n = static_cast<double>(ours.size());
  return (r_theirs - m * (m + 1.0) / 2.0) / (n * m);
}

int time_to_target(const RunTrace& trace, double target, double b_p) {
  for (const TracePoint& pt : trace.points)
    if (feasibility_aware_quality(pt.best_f, pt.best_cv, b_p) <= target) return pt.checkpoint;
  return trace.n_checkpoints + 1;
}

double auc(const RunTrace& trace, double target) {
  if (trace.points.empty()) throw std::invalid_argument("auc: trace has no points");
  double total = 0.0;
  for (const TracePoint& pt : trace.points)
    total += std::log10(1.0 + std::max(pt.best_f - target, 0.0));
  return total / static_cast<double>(trace.points.size());
}

std::vector<MetricRow> metric_rows(const AlgorithmTraces& traces,
                                   const std::vector<std::pair<std::string, double>>& targets) {
  auto target_of = [&](const std::string& problem) {
    for (const auto& [name, value] : targets)
      if (name == problem) return value;
    throw std::invalid_argument("metric_rows: no target for problem '" + problem + "'");
  };

  // B_p per problem over the final objectives of every algorithm.
  std::map<std::string, std::vector<double>> finals;
  for (const auto& [algorithm, runs] : traces)
    for (const RunTrace& t : runs) finals[t.problem].push_back(t.final_f);
  std::map<std::string, double> baseline;
  for (const auto& [problem, fs] : finals) baseline[problem] = quality_baseline(fs);

  std::vector<MetricRow> rows;
  for (const auto& [algorithm, runs] : traces)
    for (const RunTrace& t : runs) {
      double b_p = baseline.at(t.problem);
      double tgt = target_of(t.problem);
      MetricRow row;
      row.problem = t.problem;
      row.algorithm = algorithm;
      row.run_id = t.run_id;
      row.quality = feasibility_aware_quality(t.final_f, t.final_cv, b_p);
      row.ttt = static_cast<double>(time_to_target(t, tgt, b_p));
      row.auc = auc(t, tgt);
      rows.push_back(std::move(row));
    }
  return rows;
}

namespace {

constexpr const char* metric_names[] = {"quality", "ttt", "auc"};

double metric_value(const MetricRow& row, int metric) {
  switch (metric) {
    case 0: return row.quality;
    case 1: return row.ttt;
    default: return row.auc;
  }
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

StatReport build_report(std::span<const MetricRow> rows, double alpha) {
  if (rows.empty()) throw std::invalid_argument("build_report: no rows");

  StatReport report;
  report.alpha = alpha;

  std::vector<std::string> algorithms;
  std::set<std::string> problem_set;
  for (const MetricRow& row : rows) {
    if (std::find(algorithms.begin(), algorithms.end(), row.algorithm) == algorithms.end())
      algorithms.push_back(row.algorithm);
    problem_set.insert(row.problem);
  }
  if (algorithms.size() < 2)
    throw std::invalid_argument("build_report: need at least two algorithms");
  report.reference = algorithms.front();
  report.competitors.assign(algorithms.begin() + 1, algorithms.end());
  report.problems.assign(problem_set.begin(), problem_set.end());

  // samples[metric][algorithm][problem] -> values over runs
  auto sample_of = [&](int metric, const std::string& algorithm,
                       const std::string& problem) {
    std::vector<double> v;
    for (const MetricRow& row : rows)
      if (row.algorithm == algorithm && row.problem == problem)
        v.push_back(metric_value(row, metric));
    if (v.empty())
      throw std::invalid_argument("build_report: no runs for (" + problem + ", " + algorithm + ")");
    return v;
  };

  for (int metric = 0; metric < 3; ++metric) {
    for (const std::string& competitor : report.competitors) {
      std::vector<PairwiseCell> cells;
      std::vector<double> ps;
      std::vector<double> a12s;
      for (const std::string& problem : report.problems) {
        std::vector<double> ref = sample_of(metric, report.reference, problem);
        std::vector<double> comp = sample_of(metric, competitor, problem);
        RankSumResult rs = wilcoxon_rank_sum(ref, comp, alpha);
        PairwiseCell cell;
        cell.metric = metric_names[metric];
        cell.competitor = competitor;
        cell.problem = problem;
        cell.ref_mean = mean_of(ref);
        cell.ref_sd = sd_of(ref);
        cell.comp_mean = mean_of(comp);
        cell.comp_sd = sd_of(comp);
        cell.p_value = rs.p_value;
        cell.a12 = vargha_delaney_a12(ref, comp);
        cell.verdict = rs.verdict;
        ps.push_back(rs.p_value);
        a12s.push_back(cell.a12);
        cells.push_back(std::move(cell));
      }
      std::vector<bool> holm = holm_correct(ps, alpha);
      WtlLine line;
      line.metric = metric_names[metric];
      line.competitor = competitor;
      for (std::size_t i = 0; i < cells.size(); ++i) {
        cells[i].holm_reject = holm[i];
        switch (cells[i].verdict) {
          case Verdict::win: ++line.win; break;
          case Verdict::tie: ++line.tie; break;
          case Verdict::loss: ++line.loss; break;
        }
        if (holm[i] && cells[i].verdict == Verdict::win)
          ++line.holm_win;
        else if (holm[i] && cells[i].verdict == Verdict::loss)
          ++line.holm_loss;
        else
          ++line.holm_tie;
      }
      line.median_a12 = median(a12s);
      report.wtl.push_back(line);
      for (auto& cell : cells) report.cells.push_back(std::move(cell));
    }

    // Friedman over per-problem medians, all algorithms side by side.
    FriedmanBlock block;
    block.metric = metric_names[metric];
    block.algorithms = algorithms;
    std::vector<std::vector<double>> table;
    for (const std::string& problem : report.problems) {
      std::vector<double> row;
      for (const std::string& algorithm : algorithms)
        row.push_back(median(sample_of(metric, algorithm, problem)));
      table.push_back(std::move(row));
    }
    block.result = friedman(table);
    report.friedman_blocks.push_back(std::move(block));
  }
  return report;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::win: return "win";
    case Verdict::loss: return "loss";
    default: return "tie";
  }
}

}  // namespace

std::string render_csv(const StatReport& report) {
  std::ostringstream out;
  out << "metric,competitor,problem,ref_mean,ref_sd,comp_mean,comp_sd,p_value,a12,verdict,holm_reject\n";
  for (const PairwiseCell& c : report.cells)
    out << c.metric << ',' << c.competitor << ',' << c.problem << ',' << fmt(c.ref_mean) << ','
        << fmt(c.ref_sd) << ',' << fmt(c.comp_mean) << ',' << fmt(c.comp_sd) << ','
        << fmt(c.p_value) << ',' << fmt(c.a12) << ',' << verdict_name(c.verdict) << ','
        << (c.holm_reject ? 1 : 0) << '\n';
  return out.str();
}

std::string render_text(const StatReport& report) {
  std::ostringstream out;
  out << "reference: " << report.reference << "   alpha: " << fmt(report.alpha) << "\n";

  for (const char* metric : metric_names) {
    out << "\n== " << metric << " ==\n";
    char line[256];
    std::snprintf(line, sizeof line, "%-24s %-16s %14s %14s %10s %8s %5s\n", "problem",
                  "competitor", "ref mean(sd)", "comp mean(sd)", "p", "A12", "sig");
    out << line;
    for (const PairwiseCell& c : report.cells) {
      if (c.metric != metric) continue;
      std::string ref = fmt(c.ref_mean) + "(" + fmt(c.ref_sd) + ")";
      std::string comp = fmt(c.comp_mean) + "(" + fmt(c.comp_sd) + ")";
      std::snprintf(line, sizeof line, "%-24s %-16s %14s %14s %10s %8s %5s\n", c.problem.c_str(),
                    c.competitor.c_str(), ref.c_str(), comp.c_str(), fmt(c.p_value).c_str(),
                    fmt(c.a12).c_str(), c.holm_reject ? verdict_name(c.verdict) : "");
      out << line;
    }
    for (const WtlLine& w : report.wtl) {
      if (w.metric != metric) continue;
      out << "W/T/L vs " << w.competitor << ": " << w.win << "/" << w.tie << "/" << w.loss
          << "  (Holm: " << w.holm_win << "/" << w.holm_tie << "/" << w.holm_loss
          << ")  median A12 " << fmt(w.median_a12) << "\n";
    }
    for (const FriedmanBlock& b : report.friedman_blocks) {
      if (b.metric != metric) continue;
      out << "Friedman: chi2 " << fmt(b.result.chi2) << "  df " << b.result.df << "  p "
          << fmt(b.result.p_value) << "  avg ranks";
      for (std::size_t j = 0; j < b.algorithms.size(); ++j)
        out << ' ' << b.algorithms[j] << '=' << fmt(b.result.avg_ranks[j]);
      out << "\n";
    }
  }
  return out.str();
}

}  // namespace rdex
