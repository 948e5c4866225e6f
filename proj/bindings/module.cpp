// Python surface over the core: problem access, single runs, and the
// statistics kernels. Thin conversions only; all logic stays in the library.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rdex/constraints.hpp"
#include "rdex/engine.hpp"
#include "rdex/harness.hpp"
#include "rdex/problems.hpp"
#include "rdex/stats.hpp"

namespace py = pybind11;

namespace {

py::dict trace_to_dict(const rdex::RunTrace& trace) {
  py::list checkpoints, nfe, best_f, best_cv;
  for (const rdex::TracePoint& pt : trace.points) {
    checkpoints.append(pt.checkpoint);
    nfe.append(pt.nfe);
    best_f.append(pt.best_f);
    best_cv.append(pt.best_cv);
  }
  py::dict d;
  d["problem"] = trace.problem;
  d["seed"] = trace.seed;
  d["dim"] = trace.dim;
  d["max_fe"] = trace.max_fe;
  d["checkpoint"] = checkpoints;
  d["nfe"] = nfe;
  d["best_f"] = best_f;
  d["best_cv"] = best_cv;
  d["final_f"] = trace.final_f;
  d["final_cv"] = trace.final_cv;
  return d;
}

rdex::RunTrace trace_from_lists(const std::vector<double>& best_f,
                                const std::vector<double>& best_cv) {
  if (best_f.size() != best_cv.size() || best_f.empty())
    throw std::invalid_argument("best_f and best_cv must be equally sized and non-empty");
  rdex::RunTrace t;
  t.n_checkpoints = static_cast<int>(best_f.size());
  for (std::size_t i = 0; i < best_f.size(); ++i)
    t.points.push_back({static_cast<int>(i) + 1, static_cast<long long>(i) + 1, best_f[i], best_cv[i]});
  t.final_f = best_f.back();
  t.final_cv = best_cv.back();
  return t;
}

}  // namespace

PYBIND11_MODULE(rdexpy, m) {
  m.doc() = "constrained differential evolution engine and evaluation kernels";

  m.def("list_problems", &rdex::list_problems);

  m.def(
      "problem_info",
      [](const std::string& name, int dim) {
        rdex::ProblemEntry entry = rdex::get_problem(name, dim);
        py::dict d;
        d["name"] = entry.spec.name;
        d["dim"] = entry.spec.dim;
        d["lower"] = entry.spec.lower;
        d["upper"] = entry.spec.upper;
        d["n_ineq"] = entry.spec.n_ineq;
        d["n_eq"] = entry.spec.n_eq;
        if (entry.known_optimum_f) d["optimum_f"] = *entry.known_optimum_f;
        if (entry.known_optimizer) d["optimizer"] = *entry.known_optimizer;
        return d;
      },
      py::arg("name"), py::arg("dim"));

  m.def(
      "evaluate",
      [](const std::string& name, const std::vector<double>& x, double eps_eq) {
        rdex::ProblemEntry entry = rdex::get_problem(name, static_cast<int>(x.size()));
        rdex::BudgetLedger scratch{0, 1};
        rdex::RawEvaluation raw = rdex::evaluate(entry.spec, x, scratch);
        py::dict d;
        d["objective"] = raw.objective;
        d["ineq"] = raw.ineq;
        d["eq"] = raw.eq;
        d["mean_violation"] = rdex::mean_violation(raw, rdex::ViolationConfig{eps_eq, 0.8});
        return d;
      },
      py::arg("name"), py::arg("x"), py::arg("eps_eq") = 1e-4);

  m.def(
      "run",
      [](const std::string& problem, int dim, long long max_fe, std::uint64_t seed,
         int n_checkpoints, int n0, int n_min) {
        rdex::ProblemEntry entry = rdex::get_problem(problem, dim);
        rdex::EngineConfig cfg;
        cfg.seed = seed;
        cfg.n0 = n0;
        cfg.n_min = n_min;
        rdex::CheckpointSchedule schedule = rdex::plan_checkpoints(max_fe, n_checkpoints);
        return trace_to_dict(rdex::run(cfg, entry.spec, schedule));
      },
      py::arg("problem"), py::arg("dim"), py::arg("max_fe"), py::arg("seed") = 1,
      py::arg("n_checkpoints") = 100, py::arg("n0") = 600, py::arg("n_min") = 4);

  m.def("quality", &rdex::feasibility_aware_quality, py::arg("final_f"), py::arg("final_cv"),
        py::arg("b_p"));

  m.def(
      "wilcoxon",
      [](const std::vector<double>& a, const std::vector<double>& b, double alpha) {
        rdex::RankSumResult r = rdex::wilcoxon_rank_sum(a, b, alpha);
        py::dict d;
        d["statistic"] = r.statistic;
        d["p_value"] = r.p_value;
        d["verdict"] = r.verdict == rdex::Verdict::win    ? "win"
                       : r.verdict == rdex::Verdict::loss ? "loss"
                                                          : "tie";
        return d;
      },
      py::arg("a"), py::arg("b"), py::arg("alpha") = 0.05);

  m.def(
      "holm",
      [](const std::vector<double>& ps, double alpha) { return rdex::holm_correct(ps, alpha); },
      py::arg("p_values"), py::arg("alpha") = 0.05);

  m.def(
      "friedman",
      [](const std::vector<std::vector<double>>& values) {
        rdex::FriedmanResult r = rdex::friedman(values);
        py::dict d;
        d["chi2"] = r.chi2;
        d["df"] = r.df;
        d["p_value"] = r.p_value;
        d["avg_ranks"] = r.avg_ranks;
        return d;
      },
      py::arg("values"));

  m.def(
      "friedman_from_average_ranks",
      [](const std::vector<double>& ranks, int n_blocks) {
        rdex::FriedmanResult r = rdex::friedman_from_average_ranks(ranks, n_blocks);
        py::dict d;
        d["chi2"] = r.chi2;
        d["df"] = r.df;
        d["p_value"] = r.p_value;
        return d;
      },
      py::arg("avg_ranks"), py::arg("n_blocks"));

  m.def(
      "a12",
      [](const std::vector<double>& ours, const std::vector<double>& theirs) {
        return rdex::vargha_delaney_a12(ours, theirs);
      },
      py::arg("ours"), py::arg("theirs"));

  m.def(
      "time_to_target",
      [](const std::vector<double>& best_f, const std::vector<double>& best_cv, double target,
         double b_p) { return rdex::time_to_target(trace_from_lists(best_f, best_cv), target, b_p); },
      py::arg("best_f"), py::arg("best_cv"), py::arg("target"), py::arg("b_p"));

  m.def(
      "auc",
      [](const std::vector<double>& best_f, double target) {
        std::vector<double> cv(best_f.size(), 0.0);
        return rdex::auc(trace_from_lists(best_f, cv), target);
      },
      py::arg("best_f"), py::arg("target"));

  m.def("chi2_survival", &rdex::chi2_survival, py::arg("x"), py::arg("df"));
}
