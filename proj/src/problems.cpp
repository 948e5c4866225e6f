#include "rdex/problems.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rdex {

namespace {

constexpr double pi = 3.14159265358979323846;

double sum_sq(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

double sum(std::span<const double> x) { return std::accumulate(x.begin(), x.end(), 0.0); }

std::vector<double> filled(int dim, double v) {
  return std::vector<double>(static_cast<std::size_t>(dim), v);
}

// Unconstrained sphere, optimum 0 at the origin. Smoke entry.
ProblemEntry make_sphere(int dim) {
  ProblemEntry e;
  e.spec.name = "sphere";
  e.spec.dim = dim;
  e.spec.lower = filled(dim, -5.0);
  e.spec.upper = filled(dim, 5.0);
  e.spec.evaluator = [](std::span<const double> x) { return RawEvaluation{sum_sq(x), {}, {}}; };
  e.spec.reference_optimum = 0.0;
  e.known_optimum_f = 0.0;
  e.known_optimizer = filled(dim, 0.0);
  return e;
}

// Sphere with one linear inequality sum(x) >= dim. Optimum f = dim at x = 1.
ProblemEntry make_sphere_linear_ineq(int dim) {
  ProblemEntry e;
  e.spec.name = "sphere-linear-ineq";
  e.spec.dim = dim;
  e.spec.lower = filled(dim, -5.0);
  e.spec.upper = filled(dim, 5.0);
  e.spec.n_ineq = 1;
  e.spec.evaluator = [dim](std::span<const double> x) {
    return RawEvaluation{sum_sq(x), {static_cast<double>(dim) - sum(x)}, {}};
  };
  e.spec.reference_optimum = static_cast<double>(dim);
  e.known_optimum_f = static_cast<double>(dim);
  e.known_optimizer = filled(dim, 1.0);
  return e;
}

// Sphere with one linear equality sum(x) = 1. Optimum f = 1/dim at x = 1/dim.
ProblemEntry make_sphere_eq(int dim) {
  ProblemEntry e;
  e.spec.name = "sphere-eq";
  e.spec.dim = dim;
  e.spec.lower = filled(dim, -5.0);
  e.spec.upper = filled(dim, 5.0);
  e.spec.n_eq = 1;
  e.spec.evaluator = [](std::span<const double> x) {
    return RawEvaluation{sum_sq(x), {}, {sum(x) - 1.0}};
  };
  e.spec.reference_optimum = 1.0 / dim;
  e.known_optimum_f = 1.0 / dim;
  e.known_optimizer = filled(dim, 1.0 / dim);
  return e;
}

// Rosenbrock constrained to a cubic and a line (2-d classic). Optimum 0 at
// (1, 1) where both constraints are active.
ProblemEntry make_rosenbrock_cubic_line(int dim) {
  if (dim != 2)
    throw std::invalid_argument("problem 'rosenbrock-cubic-line' is 2-d only, got dim=" +
                                std::to_string(dim));
  ProblemEntry e;
  e.spec.name = "rosenbrock-cubic-line";
  e.spec.dim = 2;
  e.spec.lower = {-1.5, -0.5};
  e.spec.upper = {1.5, 2.5};
  e.spec.n_ineq = 2;
  e.spec.evaluator = [](std::span<const double> x) {
    double a = 1.0 - x[0];
    double b = x[1] - x[0] * x[0];
    double g1 = (x[0] - 1.0) * (x[0] - 1.0) * (x[0] - 1.0) - x[1] + 1.0;
    double g2 = x[0] + x[1] - 2.0;
    return RawEvaluation{a * a + 100.0 * b * b, {g1, g2}, {}};
  };
  e.spec.reference_optimum = 0.0;
  e.known_optimum_f = 0.0;
  e.known_optimizer = std::vector<double>{1.0, 1.0};
  return e;
}

// Rastrigin with the first coordinate pushed off the basin center by
// g(x) = 1 - x_1 <= 0. Each term t^2 - 10 cos(2 pi t) + 10 >= t^2 with
// equality exactly at integer t, so over x_1 >= 1 the restriction bottoms
// out at x_1 = 1 and the optimum is f = 1 at (1, 0, ..., 0).
ProblemEntry make_rastrigin_box_linear(int dim) {
  ProblemEntry e;
  e.spec.name = "rastrigin-box-linear";
  e.spec.dim = dim;
  e.spec.lower = filled(dim, -5.12);
  e.spec.upper = filled(dim, 5.12);
  e.spec.n_ineq = 1;
  e.spec.evaluator = [](std::span<const double> x) {
    double f = 10.0 * static_cast<double>(x.size());
    for (double v : x) f += v * v - 10.0 * std::cos(2.0 * pi * v);
    return RawEvaluation{f, {1.0 - x[0]}, {}};
  };
  e.spec.reference_optimum = 1.0;
  e.known_optimum_f = 1.0;
  auto opt = filled(dim, 0.0);
  opt[0] = 1.0;
  e.known_optimizer = opt;
  return e;
}

// Sphere with one equality and two inequalities:
//   h = sum(x) - 1 = 0, g1 = x_1 <= 0, g2 = x_2 - 0.1 <= 0.
// KKT: x_1 = 0 always binds; x_2 = 0.1 binds while the equal share of the
// remaining mass exceeds 0.1, i.e. 0.9 / (dim - 2) >= 0.1 (dim <= 11), giving
// f = 0.01 + 0.81 / (dim - 2). Beyond that x_2 joins the even split and the
// optimum is 1 / (dim - 1).
ProblemEntry make_mixed_eq_ineq(int dim) {
  if (dim < 3)
    throw std::invalid_argument("problem 'mixed-eq-ineq' needs dim >= 3, got dim=" +
                                std::to_string(dim));
  ProblemEntry e;
  e.spec.name = "mixed-eq-ineq";
  e.spec.dim = dim;
  e.spec.lower = filled(dim, -5.0);
  e.spec.upper = filled(dim, 5.0);
  e.spec.n_ineq = 2;
  e.spec.n_eq = 1;
  e.spec.evaluator = [](std::span<const double> x) {
    return RawEvaluation{sum_sq(x), {x[0], x[1] - 0.1}, {sum(x) - 1.0}};
  };
  double f_opt;
  std::vector<double> opt;
  if (dim <= 11) {
    f_opt = 0.01 + 0.81 / static_cast<double>(dim - 2);
    opt = filled(dim, 0.9 / static_cast<double>(dim - 2));
    opt[0] = 0.0;
    opt[1] = 0.1;
  } else {
    f_opt = 1.0 / static_cast<double>(dim - 1);
    opt = filled(dim, 1.0 / static_cast<double>(dim - 1));
    opt[0] = 0.0;
  }
  e.spec.reference_optimum = f_opt;
  e.known_optimum_f = f_opt;
  e.known_optimizer = opt;
  return e;
}

}  // namespace

std::vector<std::string> list_problems() {
  return {"sphere",                "sphere-linear-ineq", "sphere-eq",
          "rosenbrock-cubic-line", "rastrigin-box-linear", "mixed-eq-ineq"};
}

ProblemEntry get_problem(const std::string& name, int dim) {
  if (dim < 1) throw std::invalid_argument("get_problem: dim must be positive");
  ProblemEntry entry;
  if (name == "sphere")
    entry = make_sphere(dim);
  else if (name == "sphere-linear-ineq")
    entry = make_sphere_linear_ineq(dim);
  else if (name == "sphere-eq")
    entry = make_sphere_eq(dim);
  else if (name == "rosenbrock-cubic-line")
    entry = make_rosenbrock_cubic_line(dim);
  else if (name == "rastrigin-box-linear")
    entry = make_rastrigin_box_linear(dim);
  else if (name == "mixed-eq-ineq")
    entry = make_mixed_eq_ineq(dim);
  else
    throw std::invalid_argument("unknown problem '" + name + "'");
  validate(entry.spec);
  return entry;
}

bool verify_optimum(const ProblemEntry& entry) {
  if (!entry.known_optimizer || !entry.known_optimum_f)
    throw std::invalid_argument("verify_optimum: entry '" + entry.spec.name +
                                "' has no stored optimum");
  const auto& x = *entry.known_optimizer;
  if (!in_bounds(x, entry.spec)) return false;

  BudgetLedger scratch{0, 1};
  RawEvaluation raw = evaluate(entry.spec, x, scratch);
  if (std::abs(raw.objective - *entry.known_optimum_f) > 1e-9) return false;
  for (double g : raw.ineq)
    if (g > 1e-12) return false;
  for (double h : raw.eq)
    if (std::abs(h) > 1e-9) return false;
  return true;
}

}  // namespace rdex
