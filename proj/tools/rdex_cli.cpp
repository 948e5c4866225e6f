// Command line front end: run benchmark campaigns, derive targets, compare
// trace sets, and self-check the numerics.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "rdex/constraints.hpp"
#include "rdex/engine.hpp"
#include "rdex/harness.hpp"
#include "rdex/problems.hpp"
#include "rdex/stats.hpp"

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

int cmd_list() {
  for (const std::string& name : rdex::list_problems()) {
    int dim = name == "rosenbrock-cubic-line" ? 2 : name == "mixed-eq-ineq" ? 3 : 2;
    rdex::ProblemEntry entry = rdex::get_problem(name, dim);
    std::printf("%-24s dim%s  ineq=%d eq=%d  optimum(dim=%d)=%.10g\n", name.c_str(),
                name == "rosenbrock-cubic-line" ? "=2"
                : name == "mixed-eq-ineq"       ? ">=3"
                                                : ">=1",
                entry.spec.n_ineq, entry.spec.n_eq, dim, *entry.known_optimum_f);
  }
  return 0;
}

int cmd_run(const std::string& config_path, const std::vector<std::string>& problems, int dim,
            int runs, long long max_fe, int checkpoints, long long seed, const std::string& out_dir,
            int jobs) {
  rdex::ExperimentPlan plan;
  if (!config_path.empty()) plan = rdex::parse_plan_config(read_file(config_path));
  if (!problems.empty()) plan.problems = problems;
  if (plan.problems.empty()) plan.problems = rdex::list_problems();
  if (dim > 0) plan.dim = dim;
  if (runs > 0) plan.runs_per_problem = runs;
  if (max_fe > 0) plan.max_fe = max_fe;
  if (checkpoints > 0) plan.n_checkpoints = checkpoints;
  if (seed >= 0) plan.base_seed = static_cast<std::uint64_t>(seed);

  // rosenbrock-cubic-line is 2-d only; an all-problems default at another
  // dim would otherwise die late.
  for (const std::string& p : plan.problems) rdex::get_problem(p, plan.dim);

  rdex::ExperimentResult result = rdex::run_experiment(plan, out_dir, jobs);

  std::size_t slot = 0;
  for (const std::string& problem : plan.problems) {
    std::vector<double> finals;
    int feasible = 0;
    for (int r = 0; r < plan.runs_per_problem; ++r, ++slot) {
      const rdex::RunTrace& t = result.traces[slot];
      finals.push_back(t.final_f);
      if (t.final_cv == 0.0) ++feasible;
    }
    std::printf("%-24s runs=%d feasible=%d median_final_f=%.10g\n", problem.c_str(),
                plan.runs_per_problem, feasible, rdex::median(finals));
  }
  std::printf("executed=%d resumed=%d out=%s\n", result.executed, result.resumed, out_dir.c_str());
  return 0;
}

int cmd_targets(const std::string& trace_dir, const std::string& out_file) {
  std::vector<rdex::RunTrace> traces = rdex::load_trace_dir(trace_dir);
  auto targets = rdex::derive_median_targets(traces);
  std::string text = rdex::format_targets(targets);
  if (out_file.empty())
    std::fputs(text.c_str(), stdout);
  else
    write_file(out_file, text);
  return 0;
}

int cmd_stats(const std::vector<std::string>& labeled_dirs, const std::string& targets_file,
              double alpha, const std::string& out_csv) {
  rdex::AlgorithmTraces traces;
  for (const std::string& spec : labeled_dirs) {
    auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size())
      throw std::runtime_error("--traces expects NAME=DIR, got '" + spec + "'");
    traces.emplace_back(spec.substr(0, eq), rdex::load_trace_dir(spec.substr(eq + 1)));
  }
  if (traces.size() < 2) throw std::runtime_error("stats needs at least two --traces NAME=DIR sets");

  auto targets = rdex::parse_targets(read_file(targets_file));
  std::vector<rdex::MetricRow> rows = rdex::metric_rows(traces, targets);
  rdex::StatReport report = rdex::build_report(rows, alpha);
  std::fputs(rdex::render_text(report).c_str(), stdout);
  if (!out_csv.empty()) write_file(out_csv, rdex::render_csv(report));
  return 0;
}

// Self-check battery: analytic optima, caption reproductions, and the rank
// test against an independent enumeration. Fast and deterministic.
int cmd_verify() {
  int failures = 0;
  auto check = [&](const std::string& name, bool ok) {
    std::printf("%-58s %s\n", name.c_str(), ok ? "ok" : "FAIL");
    if (!ok) ++failures;
  };

  for (const std::string& name : rdex::list_problems()) {
    std::vector<int> dims = name == "rosenbrock-cubic-line" ? std::vector<int>{2}
                            : name == "mixed-eq-ineq"       ? std::vector<int>{3, 4, 10}
                                                            : std::vector<int>{2, 4, 10};
    for (int dim : dims)
      check("optimum " + name + " dim=" + std::to_string(dim),
            rdex::verify_optimum(rdex::get_problem(name, dim)));
  }

  {
    auto near = [](double v, double want, double tol) { return std::abs(v - want) <= tol; };
    auto fr1 = rdex::friedman_from_average_ranks(std::vector<double>{2.29, 2.39, 2.84, 2.48}, 28);
    auto fr2 = rdex::friedman_from_average_ranks(std::vector<double>{1.61, 2.14, 2.89, 3.36}, 28);
    auto fr3 = rdex::friedman_from_average_ranks(std::vector<double>{2.11, 2.46, 2.66, 2.77}, 28);
    check("friedman ranks set A chi2=2.90 +-0.02", near(fr1.chi2, 2.90, 0.02));
    check("friedman ranks set A p=0.408 +-10%", std::abs(fr1.p_value - 0.408) <= 0.0408);
    check("friedman ranks set B chi2=30.47 +-0.02", near(fr2.chi2, 30.47, 0.02));
    check("friedman ranks set C chi2=4.25 +-0.02", near(fr3.chi2, 4.25, 0.02));
  }

  {
    // Independent oracle: enumerate index masks instead of rank subsets.
    auto exact_p = [](const std::vector<double>& a, const std::vector<double>& b) {
      std::vector<double> pooled = a;
      pooled.insert(pooled.end(), b.begin(), b.end());
      const std::size_t n = pooled.size();
      std::vector<double> ranks(n);
      {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(),
                  [&](std::size_t l, std::size_t r) { return pooled[l] < pooled[r]; });
        std::size_t i = 0;
        while (i < n) {
          std::size_t j = i;
          while (j + 1 < n && pooled[idx[j + 1]] == pooled[idx[i]]) ++j;
          for (std::size_t k = i; k <= j; ++k)
            ranks[idx[k]] = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
          i = j + 1;
        }
      }
      double w = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) w += ranks[i];
      long long le = 0, ge = 0, total = 0;
      for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != a.size()) continue;
        ++total;
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          if (mask & (1u << i)) s += ranks[i];
        if (s <= w + 1e-9) ++le;
        if (s >= w - 1e-9) ++ge;
      }
      return std::min(1.0, 2.0 * static_cast<double>(std::min(le, ge)) / static_cast<double>(total));
    };

    std::vector<std::pair<std::vector<double>, std::vector<double>>> cases = {
        {{1, 2, 3}, {4, 5, 6}},
        {{1, 2, 3, 4}, {5, 6, 7, 8}},
        {{1, 1, 2}, {1, 2, 2}},
        {{3.2, 1.4, 5.5, 2.2, 4.1}, {2.8, 6.0, 3.9, 1.1, 7.3, 5.0}},
        {{1, 2, 2, 3, 3, 3, 9}, {2, 3, 4, 4, 5}},
    };
    int idx = 0;
    for (const auto& [a, b] : cases) {
      double got = rdex::wilcoxon_rank_sum(a, b, 0.05).p_value;
      double want = exact_p(a, b);
      check("wilcoxon vs enumeration case " + std::to_string(idx++),
            std::abs(got - want) <= 1e-9);
    }
  }

  std::printf("verify: %s\n", failures == 0 ? "all checks passed" : "FAILURES PRESENT");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"constrained differential evolution benchmark toolkit"};
  app.require_subcommand(1);

  app.add_subcommand("list", "list built-in problems");

  auto* sub_run = app.add_subcommand("run", "execute a benchmark campaign");
  std::string config_path, out_dir = "traces";
  std::vector<std::string> problems;
  int dim = 0, runs = 0, checkpoints = 0, jobs = 1;
  long long max_fe = 0, seed = -1;
  sub_run->add_option("--config", config_path, "key = value plan file");
  sub_run->add_option("--problems", problems, "problem names")->delimiter(',');
  sub_run->add_option("--dim", dim, "dimension");
  sub_run->add_option("--runs", runs, "runs per problem");
  sub_run->add_option("--max-fe", max_fe, "evaluation budget per run");
  sub_run->add_option("--checkpoints", checkpoints, "checkpoints per run");
  sub_run->add_option("--seed", seed, "base seed (run r uses base + r)");
  sub_run->add_option("--out", out_dir, "trace output directory");
  sub_run->add_option("--jobs", jobs, "parallel runs");

  auto* sub_targets = app.add_subcommand("targets", "derive per-problem median targets");
  std::string t_traces, t_out;
  sub_targets->add_option("--traces", t_traces, "trace directory")->required();
  sub_targets->add_option("--out", t_out, "target CSV (stdout when omitted)");

  auto* sub_stats = app.add_subcommand("stats", "compare trace sets (first = reference)");
  std::vector<std::string> s_traces;
  std::string s_targets, s_out;
  double alpha = 0.05;
  sub_stats->add_option("--traces", s_traces, "NAME=DIR, repeatable")->required();
  sub_stats->add_option("--targets", s_targets, "target CSV")->required();
  sub_stats->add_option("--alpha", alpha, "significance level");
  sub_stats->add_option("--out", s_out, "report CSV path");

  app.add_subcommand("verify", "run the numeric self-check battery");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("list")) return cmd_list();
    if (app.got_subcommand("run"))
      return cmd_run(config_path, problems, dim, runs, max_fe, checkpoints, seed, out_dir, jobs);
    if (app.got_subcommand("targets")) return cmd_targets(t_traces, t_out);
    if (app.got_subcommand("stats")) return cmd_stats(s_traces, s_targets, alpha, s_out);
    if (app.got_subcommand("verify")) return cmd_verify();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
