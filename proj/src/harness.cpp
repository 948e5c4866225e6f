#include "rdex/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "rdex/constraints.hpp"
#include "rdex/problems.hpp"
#include "rdex/stats.hpp"

namespace rdex {

namespace {

// Shortest decimal that round-trips the exact double.
std::string shortest(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(std::begin(buf), std::end(buf), v);
  if (ec != std::errc{}) throw std::runtime_error("shortest: to_chars failed");
  return std::string(buf, end);
}

double parse_double(std::string_view s, const char* what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::runtime_error(std::string("malformed ") + what + ": '" + std::string(s) + "'");
  return v;
}

long long parse_int(std::string_view s, const char* what) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::runtime_error(std::string("malformed ") + what + ": '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == sep) {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

void validate(const ExperimentPlan& plan) {
  if (plan.problems.empty()) throw std::invalid_argument("plan: no problems");
  if (plan.dim < 1) throw std::invalid_argument("plan: dim must be positive");
  if (plan.runs_per_problem < 1) throw std::invalid_argument("plan: runs_per_problem must be positive");
  if (plan.n_checkpoints < 1) throw std::invalid_argument("plan: n_checkpoints must be positive");
  if (plan.effective_max_fe() < plan.n_checkpoints)
    throw std::invalid_argument("plan: budget smaller than the checkpoint count");
  validate(plan.engine);
}

std::filesystem::path trace_path(const std::filesystem::path& dir, const std::string& problem,
                                 int run_id) {
  return dir / (problem + "__run" + std::to_string(run_id) + ".csv");
}

std::string format_trace(const RunTrace& trace) {
  std::string out;
  out.reserve(trace.points.size() * 32 + 64);
  out += "# ";
  out += trace.problem;
  out += ',';
  out += std::to_string(trace.run_id);
  out += ',';
  out += std::to_string(trace.seed);
  out += ',';
  out += std::to_string(trace.dim);
  out += ',';
  out += std::to_string(trace.max_fe);
  out += ',';
  out += std::to_string(trace.n_checkpoints);
  out += '\n';
  for (const TracePoint& pt : trace.points) {
    out += std::to_string(pt.checkpoint);
    out += ',';
    out += std::to_string(pt.nfe);
    out += ',';
    out += shortest(pt.best_f);
    out += ',';
    out += shortest(pt.best_cv);
    out += '\n';
  }
  return out;
}

RunTrace parse_trace(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.size() < 2 || line[0] != '#')
    throw std::runtime_error("trace: missing header line");

  auto header = split(trim(std::string_view(line).substr(1)), ',');
  if (header.size() != 6) throw std::runtime_error("trace: header needs 6 fields");

  RunTrace trace;
  trace.problem = std::string(header[0]);
  trace.run_id = static_cast<int>(parse_int(header[1], "run id"));
  trace.seed = static_cast<std::uint64_t>(parse_int(header[2], "seed"));
  trace.dim = static_cast<int>(parse_int(header[3], "dim"));
  trace.max_fe = parse_int(header[4], "max_fe");
  trace.n_checkpoints = static_cast<int>(parse_int(header[5], "n_checkpoints"));

  while (std::getline(in, line)) {
    std::string_view row = trim(line);
    if (row.empty()) continue;
    auto fields = split(row, ',');
    if (fields.size() != 4) throw std::runtime_error("trace: row needs 4 fields");
    TracePoint pt;
    pt.checkpoint = static_cast<int>(parse_int(fields[0], "checkpoint"));
    pt.nfe = parse_int(fields[1], "nfe");
    pt.best_f = parse_double(fields[2], "best_f");
    pt.best_cv = parse_double(fields[3], "best_cv");
    if (pt.checkpoint != static_cast<int>(trace.points.size()) + 1)
      throw std::runtime_error("trace: checkpoint indices must run 1..n");
    trace.points.push_back(pt);
  }
  if (static_cast<int>(trace.points.size()) != trace.n_checkpoints)
    throw std::runtime_error("trace: point count " + std::to_string(trace.points.size()) +
                             " does not match header n_checkpoints " +
                             std::to_string(trace.n_checkpoints));
  trace.final_f = trace.points.back().best_f;
  trace.final_cv = trace.points.back().best_cv;
  return trace;
}

void save_trace(const RunTrace& trace, const std::filesystem::path& path) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("save_trace: cannot open " + tmp.string());
    out << format_trace(trace);
    if (!out) throw std::runtime_error("save_trace: write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

RunTrace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_trace: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_trace(buf.str());
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

namespace {

struct PendingRun {
  std::size_t slot;  // index into the result vector
  std::string problem;
  int run_id;
};

}  // namespace

ExperimentResult run_experiment(const ExperimentPlan& plan, const std::filesystem::path& out_dir,
                                int jobs) {
  validate(plan);
  std::filesystem::create_directories(out_dir);
  const long long max_fe = plan.effective_max_fe();
  const CheckpointSchedule schedule = plan_checkpoints(max_fe, plan.n_checkpoints);

  ExperimentResult result;
  result.traces.resize(plan.problems.size() * static_cast<std::size_t>(plan.runs_per_problem));
  std::vector<PendingRun> pending;

  std::size_t slot = 0;
  for (const std::string& problem : plan.problems) {
    get_problem(problem, plan.dim);  // fail fast on unknown names before any work
    for (int r = 0; r < plan.runs_per_problem; ++r, ++slot) {
      const std::filesystem::path path = trace_path(out_dir, problem, r);
      if (std::filesystem::exists(path)) {
        RunTrace existing = load_trace(path);
        std::uint64_t expect_seed = plan.base_seed + static_cast<std::uint64_t>(r);
        if (existing.problem != problem || existing.run_id != r || existing.seed != expect_seed ||
            existing.dim != plan.dim || existing.max_fe != max_fe ||
            existing.n_checkpoints != plan.n_checkpoints)
          throw std::runtime_error("run_experiment: " + path.string() +
                                   " belongs to a different plan; refusing to mix campaigns");
        result.traces[slot] = std::move(existing);
        result.resumed += 1;
        continue;
      }
      pending.push_back({slot, problem, r});
    }
  }

  auto execute = [&](const PendingRun& job) {
    ProblemEntry entry = get_problem(job.problem, plan.dim);
    EngineConfig cfg = plan.engine;
    cfg.seed = plan.base_seed + static_cast<std::uint64_t>(job.run_id);
    RunTrace trace = run(cfg, entry.spec, schedule);
    trace.run_id = job.run_id;
    save_trace(trace, trace_path(out_dir, job.problem, job.run_id));
    result.traces[job.slot] = std::move(trace);
  };

  jobs = std::max(1, jobs);
  if (jobs == 1 || pending.size() < 2) {
    for (const PendingRun& job : pending) execute(job);
  } else {
    std::atomic<std::size_t> next{0};
    std::mutex failure_mutex;
    std::string failure;
    auto worker = [&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= pending.size()) return;
        try {
          execute(pending[i]);
        } catch (const std::exception& e) {
          std::lock_guard lock(failure_mutex);
          if (failure.empty())
            failure = pending[i].problem + " run " + std::to_string(pending[i].run_id) + ": " + e.what();
        }
      }
    };
    std::vector<std::thread> threads;
    for (int t = 0; t < std::min<int>(jobs, static_cast<int>(pending.size())); ++t)
      threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (!failure.empty()) throw std::runtime_error("run_experiment: " + failure);
  }
  result.executed = static_cast<int>(pending.size());
  return result;
}

std::vector<std::pair<std::string, double>> derive_median_targets(
    const std::vector<RunTrace>& traces) {
  if (traces.empty()) throw std::invalid_argument("derive_median_targets: no traces");

  std::vector<std::string> order;
  std::map<std::string, std::vector<const RunTrace*>> by_problem;
  for (const RunTrace& t : traces) {
    if (by_problem.find(t.problem) == by_problem.end()) order.push_back(t.problem);
    by_problem[t.problem].push_back(&t);
  }

  std::vector<std::pair<std::string, double>> targets;
  for (const std::string& problem : order) {
    const auto& runs = by_problem[problem];
    std::vector<double> finals;
    for (const RunTrace* t : runs) finals.push_back(t->final_f);
    double b_p = quality_baseline(finals);
    std::vector<double> qualities;
    for (const RunTrace* t : runs)
      qualities.push_back(feasibility_aware_quality(t->final_f, t->final_cv, b_p));
    targets.emplace_back(problem, median(std::move(qualities)));
  }
  return targets;
}

std::string format_targets(const std::vector<std::pair<std::string, double>>& targets) {
  std::string out = "problem,target\n";
  for (const auto& [problem, target] : targets) {
    out += problem;
    out += ',';
    out += shortest(target);
    out += '\n';
  }
  return out;
}

std::vector<std::pair<std::string, double>> parse_targets(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::pair<std::string, double>> targets;
  bool first = true;
  while (std::getline(in, line)) {
    std::string_view row = trim(line);
    if (row.empty()) continue;
    if (first && row == "problem,target") {
      first = false;
      continue;
    }
    first = false;
    auto fields = split(row, ',');
    if (fields.size() != 2) throw std::runtime_error("targets: row needs 2 fields");
    targets.emplace_back(std::string(fields[0]), parse_double(fields[1], "target"));
  }
  if (targets.empty()) throw std::runtime_error("targets: no entries");
  return targets;
}

std::vector<RunTrace> load_trace_dir(const std::filesystem::path& dir) {
  std::vector<RunTrace> traces;
  if (std::filesystem::is_directory(dir))
    for (const auto& entry : std::filesystem::directory_iterator(dir))
      if (entry.is_regular_file() && entry.path().extension() == ".csv")
        traces.push_back(load_trace(entry.path()));
  if (traces.empty()) throw std::runtime_error("no trace files in " + dir.string());
  std::sort(traces.begin(), traces.end(), [](const RunTrace& a, const RunTrace& b) {
    return a.problem != b.problem ? a.problem < b.problem : a.run_id < b.run_id;
  });
  return traces;
}

ExperimentPlan parse_plan_config(const std::string& text) {
  ExperimentPlan plan;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view row = trim(line);
    if (row.empty() || row.front() == '#') continue;
    auto eq = row.find('=');
    if (eq == std::string_view::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key(trim(row.substr(0, eq)));
    std::string value(trim(row.substr(eq + 1)));
    if (value.empty())
      throw std::runtime_error("config line " + std::to_string(lineno) + ": empty value for " + key);

    if (key == "problems") {
      plan.problems.clear();
      for (auto part : split(value, ','))
        if (auto name = trim(part); !name.empty()) plan.problems.emplace_back(name);
    } else if (key == "dim") {
      plan.dim = static_cast<int>(parse_int(value, key.c_str()));
    } else if (key == "runs_per_problem") {
      plan.runs_per_problem = static_cast<int>(parse_int(value, key.c_str()));
    } else if (key == "max_fe") {
      plan.max_fe = parse_int(value, key.c_str());
    } else if (key == "n_checkpoints") {
      plan.n_checkpoints = static_cast<int>(parse_int(value, key.c_str()));
    } else if (key == "base_seed") {
      plan.base_seed = static_cast<std::uint64_t>(parse_int(value, key.c_str()));
    } else if (key == "n0") {
      plan.engine.n0 = static_cast<int>(parse_int(value, key.c_str()));
    } else if (key == "n_min") {
      plan.engine.n_min = static_cast<int>(parse_int(value, key.c_str()));
    } else if (key == "history") {
      plan.engine.history = static_cast<int>(parse_int(value, key.c_str()));
    } else if (key == "rho_init") {
      plan.engine.rho_init = parse_double(value, key.c_str());
    } else if (key == "perturb_prob") {
      plan.engine.perturb_prob = parse_double(value, key.c_str());
    } else if (key == "perturb_scale") {
      plan.engine.perturb_scale = parse_double(value, key.c_str());
    } else if (key == "pbest_frac") {
      plan.engine.pbest_frac = parse_double(value, key.c_str());
    } else if (key == "rank_bias_lambda") {
      plan.engine.rank_bias_lambda = parse_double(value, key.c_str());
    } else if (key == "eps_eq") {
      plan.engine.violation.eps_eq = parse_double(value, key.c_str());
    } else if (key == "eta") {
      plan.engine.violation.eta = parse_double(value, key.c_str());
    } else {
      throw std::runtime_error("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  return plan;
}

}  // namespace rdex
