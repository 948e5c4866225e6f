#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rdex/adaptive.hpp"
#include "rdex/constraints.hpp"
#include "rdex/problems.hpp"
#include "rdex/rng.hpp"
#include "support/scripted_rng.hpp"

using namespace rdex;
using rdex::testing::ScriptedRng;

namespace {

ProblemSpec tiny_box(int dim = 2) {
  ProblemSpec spec;
  spec.name = "tiny";
  spec.dim = dim;
  spec.lower.assign(dim, 0.0);
  spec.upper.assign(dim, 1.0);
  spec.evaluator = [](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return RawEvaluation{s, {}, {}};
  };
  return spec;
}

}  // namespace

TEST_CASE("evaluate charges budget and reproduces the equality-sphere optimum") {
  ProblemEntry entry = get_problem("sphere-eq", 4);
  BudgetLedger ledger{0, 10};
  std::vector<double> x(4, 0.25);
  RawEvaluation raw = evaluate(entry.spec, x, ledger);
  CHECK(raw.objective == doctest::Approx(0.25).epsilon(1e-15));
  REQUIRE(raw.eq.size() == 1);
  CHECK(raw.eq[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(raw.ineq.empty());
  CHECK(ledger.nfe == 1);

  // determinism: same point, same raw values
  RawEvaluation again = evaluate(entry.spec, x, ledger);
  CHECK(again.objective == raw.objective);
  CHECK(again.eq == raw.eq);
  CHECK(ledger.nfe == 2);
}

TEST_CASE("evaluate at a bound corner stays finite with matching lengths") {
  for (const std::string& name : list_problems()) {
    int dim = name == "rosenbrock-cubic-line" ? 2 : 4;
    if (name == "mixed-eq-ineq") dim = 4;
    ProblemEntry entry = get_problem(name, dim);
    BudgetLedger ledger{0, 4};
    RawEvaluation raw = evaluate(entry.spec, entry.spec.lower, ledger);
    CHECK(std::isfinite(raw.objective));
    CHECK(static_cast<int>(raw.ineq.size()) == entry.spec.n_ineq);
    CHECK(static_cast<int>(raw.eq.size()) == entry.spec.n_eq);
  }
}

TEST_CASE("evaluate rejects exhausted budgets before touching the evaluator") {
  ProblemSpec spec = tiny_box();
  int calls = 0;
  auto inner = spec.evaluator;
  spec.evaluator = [&calls, inner](std::span<const double> x) {
    ++calls;
    return inner(x);
  };
  BudgetLedger ledger{2, 2};
  std::vector<double> x(2, 0.5);
  CHECK_THROWS_AS(evaluate(spec, x, ledger), std::runtime_error);
  CHECK(calls == 0);
  CHECK(ledger.nfe == 2);
}

TEST_CASE("evaluate validates dimension and bounds") {
  ProblemSpec spec = tiny_box();
  BudgetLedger ledger{0, 5};
  std::vector<double> wrong_dim(3, 0.5);
  CHECK_THROWS_AS(evaluate(spec, wrong_dim, ledger), std::invalid_argument);
  std::vector<double> outside{0.5, 1.5};
  CHECK_THROWS_AS(evaluate(spec, outside, ledger), std::invalid_argument);
  CHECK(ledger.nfe == 0);
}

TEST_CASE("evaluate charges the budget even when the output is rejected") {
  ProblemSpec spec = tiny_box();
  spec.evaluator = [](std::span<const double>) {
    return RawEvaluation{std::numeric_limits<double>::infinity(), {}, {}};
  };
  BudgetLedger ledger{0, 5};
  std::vector<double> x(2, 0.5);
  CHECK_THROWS_AS(evaluate(spec, x, ledger), std::runtime_error);
  CHECK(ledger.nfe == 1);
}

TEST_CASE("in_bounds is inclusive at both ends") {
  ProblemSpec spec = tiny_box();
  CHECK(in_bounds(std::vector<double>{0.0, 1.0}, spec));
  CHECK_FALSE(in_bounds(std::vector<double>{1.0001, 0.5}, spec));
  ProblemSpec wide = tiny_box();
  wide.lower.assign(2, -5.0);
  wide.upper.assign(2, 5.0);
  CHECK(in_bounds(std::vector<double>{0.0, 0.0}, wide));
  CHECK_THROWS_AS(in_bounds(std::vector<double>{0.0}, spec), std::invalid_argument);
}

TEST_CASE("problem spec validation") {
  ProblemSpec spec = tiny_box();
  CHECK_NOTHROW(validate(spec));
  ProblemSpec bad = spec;
  bad.lower = {1.0, 1.0};
  bad.upper = {0.0, 0.0};
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad = spec;
  bad.evaluator = nullptr;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad = spec;
  bad.lower.pop_back();
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
}

TEST_CASE("mean violation averages hinge losses over all constraints") {
  ViolationConfig cfg;  // eps_eq = 1e-4

  RawEvaluation raw;
  raw.ineq = {0.5, -1.0};
  raw.eq = {0.0002};
  CHECK(mean_violation(raw, cfg) == doctest::Approx((0.5 + 0.0001) / 3.0).epsilon(1e-12));

  raw.ineq = {-0.1};
  raw.eq = {5e-5};
  CHECK(mean_violation(raw, cfg) == 0.0);

  raw.ineq = {};
  raw.eq = {1.0001e-4};
  CHECK(mean_violation(raw, cfg) == doctest::Approx(1e-8).epsilon(1e-3));

  raw.ineq = {};
  raw.eq = {};
  CHECK(mean_violation(raw, cfg) == 0.0);
}

TEST_CASE("epsilon level follows the order-statistic schedule") {
  ViolationConfig cfg;

  SUBCASE("early: k = floor(0.8 N)") {
    std::vector<double> phis{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    BudgetLedger ledger{0, 1000};
    EpsilonState eps = epsilon_level(phis, ledger, cfg);
    CHECK(eps.k_index == 8);
    CHECK(eps.epsilon == doctest::Approx(0.7));
    CHECK(eps.phase == EpsilonState::Phase::active);
  }

  SUBCASE("half budget: quadratic shrink") {
    std::vector<double> phis{0.3, 0.1, 0.2, 0.4};
    BudgetLedger ledger{500, 1000};
    EpsilonState eps = epsilon_level(phis, ledger, cfg);
    CHECK(eps.k_index == 1);
    CHECK(eps.epsilon == doctest::Approx(0.1));
  }

  SUBCASE("past 0.8 max_fe: zeroed") {
    std::vector<double> phis{0.3, 0.1, 0.2, 0.4};
    BudgetLedger at{800, 1000};
    CHECK(epsilon_level(phis, at, cfg).phase == EpsilonState::Phase::active);
    BudgetLedger past{801, 1000};
    EpsilonState eps = epsilon_level(phis, past, cfg);
    CHECK(eps.phase == EpsilonState::Phase::zeroed);
    CHECK(eps.epsilon == 0.0);
  }

  SUBCASE("duplicates count with multiplicity") {
    std::vector<double> phis{0.2, 0.1, 0.2, 0.3};
    BudgetLedger ledger{450, 1000};  // floor(0.8 * 4 * 0.55^2) = 0, clamped to k = 1
    EpsilonState eps = epsilon_level(phis, ledger, cfg);
    CHECK(eps.k_index == 1);
    CHECK(eps.epsilon == doctest::Approx(0.1));
  }

  SUBCASE("k never drops below 1 and never exceeds N") {
    Mt64Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
      std::size_t n = 1 + rng.uniform_int(30);
      std::vector<double> phis(n);
      for (double& p : phis) p = rng.uniform01();
      long long nfe = static_cast<long long>(rng.uniform_int(1001));
      EpsilonState eps = epsilon_level(phis, BudgetLedger{nfe, 1000}, cfg);
      CHECK(eps.k_index >= 1);
      CHECK(eps.k_index <= static_cast<int>(n));
    }
  }

  CHECK_THROWS_AS(epsilon_level(std::vector<double>{}, BudgetLedger{0, 1}, cfg),
                  std::invalid_argument);
}

TEST_CASE("rank score separates the epsilon-feasible set strictly") {
  CHECK(rank_score(3.0, 0.05, 0.1, 5.0) == 3.0);
  CHECK(rank_score(3.0, 0.2, 0.1, 5.0) == doctest::Approx(6.2));
  CHECK(rank_score(5.0, 0.0, 0.0, 5.0) == 5.0);

  // any epsilon-feasible member scores strictly below any violator
  Mt64Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    double f_max = 10.0 * rng.uniform01();
    double f_a = f_max * rng.uniform01();
    double f_b = f_max * rng.uniform01();
    double eps = rng.uniform01();
    double phi_ok = eps * rng.uniform01();
    double phi_bad = eps + 1e-12 + rng.uniform01();
    CHECK(rank_score(f_a, phi_ok, eps, f_max) < rank_score(f_b, phi_bad, eps, f_max));
  }
}

TEST_CASE("selection accepts ties and ranks violation before objective") {
  auto ind = [](double f, double phi) {
    ScoredIndividual s;
    s.f = f;
    s.phi = phi;
    return s;
  };
  CHECK(select(ind(1.0, 0.0), ind(1.0, 0.0), 0.0));
  CHECK(select(ind(0.0, 0.3), ind(100.0, 0.1), 0.0));
  CHECK_FALSE(select(ind(1.0, 0.0), ind(-5.0, 0.2), 0.0));
  // inside the band both count as unviolated, objective decides
  CHECK(select(ind(1.0, 0.3), ind(0.5, 0.1), 0.5));
  CHECK_FALSE(select(ind(0.5, 0.3), ind(1.0, 0.1), 0.5));
}

TEST_CASE("feasibility-aware quality") {
  CHECK(feasibility_aware_quality(3.0, 0.0, 100.0) == 3.0);
  CHECK(feasibility_aware_quality(42.0, 0.5, 10.0) == 10.5);
  CHECK(feasibility_aware_quality(-2.0, 0.0, 1e9) == -2.0);

  // every infeasible outcome sorts after every feasible one under B_p
  std::vector<double> finals{3.0, -2.0, 7.5};
  double b_p = 8.5;  // max finite + 1
  for (double f : finals)
    CHECK(feasibility_aware_quality(f, 0.0, b_p) < feasibility_aware_quality(-100.0, 1e-9, b_p));
}

TEST_CASE("memory bank defaults and fallback immutability") {
  MemoryBank bank(5);
  CHECK(bank.history() == 5);
  CHECK(bank.m_f.size() == 6);
  for (int s = 0; s < 5; ++s) {
    CHECK(bank.m_f[s] == 0.3);
    CHECK(bank.m_cr[s] == 1.0);
  }
  CHECK(bank.m_f[5] == 0.4);
  CHECK(bank.m_cr[5] == 0.9);

  Mt64Rng rng(17);
  for (int round = 0; round < 50; ++round) {
    std::vector<SuccessRecord> batch(1 + rng.uniform_int(5));
    for (auto& s : batch) {
      s.f_value = 0.01 + 0.99 * rng.uniform01();
      s.cr_value = rng.uniform01();
      s.delta = 0.1 + rng.uniform01();
    }
    update_memories(bank, batch);
  }
  CHECK(bank.m_f[5] == 0.4);
  CHECK(bank.m_cr[5] == 0.9);
  for (int s = 0; s < 5; ++s) {
    CHECK(bank.m_f[s] > 0.0);
    CHECK(bank.m_f[s] <= 1.0);
    CHECK(bank.m_cr[s] >= 0.0);
    CHECK(bank.m_cr[s] <= 1.0);
  }
}

TEST_CASE("standard F sampling mean and support") {
  Mt64Rng rng(23);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double f = sample_f_standard(0.216, rng);
    REQUIRE(f > 0.0);
    REQUIRE(f <= 1.0);
    sum += f;
  }
  CHECK(std::abs(sum / n - 0.6) < 0.01);

  // SR = 0.027 -> centre 0.3
  sum = 0.0;
  for (int i = 0; i < n; ++i) sum += sample_f_standard(0.027, rng);
  CHECK(std::abs(sum / n - 0.3) < 0.01);

  // SR = 0 -> half-normal above 0, mean sigma sqrt(2/pi)
  sum = 0.0;
  double max_seen = 0.0;
  for (int i = 0; i < 10000; ++i) {
    double f = sample_f_standard(0.0, rng);
    REQUIRE(f > 0.0);
    max_seen = std::max(max_seen, f);
    sum += f;
  }
  CHECK(std::abs(sum / 10000 - 0.05 * std::sqrt(2.0 / 3.14159265358979)) < 0.002);
  CHECK(max_seen < 0.3);

  // SR = 1 -> centre 1.0, draws clamped into (0, 1] by resampling
  for (int i = 0; i < 1000; ++i) {
    double f = sample_f_standard(1.0, rng);
    REQUIRE(f > 0.0);
    REQUIRE(f <= 1.0);
  }
}

TEST_CASE("eb F sampling resamples non-positive draws and clamps above") {
  MemoryBank bank(2);
  ScriptedRng rng;

  // fallback slot centre 0.4; draw 13 -> 0.4 + 1.3 clamps to 1
  rng.cauchys = {13.0};
  CHECK(sample_f_eb(bank, 2, rng) == 1.0);

  // draw -6 rejected (0.4 - 0.6 <= 0), then 0.1 -> 0.41
  rng.cauchys = {-6.0, 0.1};
  CHECK(sample_f_eb(bank, 2, rng) == doctest::Approx(0.41));
  CHECK(rng.drained());
}

TEST_CASE("CR sampling clips and applies staged eb floors") {
  MemoryBank bank(2);
  bank.m_cr[0] = 0.2;
  ScriptedRng rng;

  // standard branch: clip only
  rng.normals = {13.0};
  CHECK(sample_cr(bank, 0, Branch::standard, BudgetLedger{0, 1000}, rng) == 1.0);
  rng.normals = {-9.0};
  CHECK(sample_cr(bank, 0, Branch::standard, BudgetLedger{900, 1000}, rng) == 0.0);

  // eb branch: floor 0.7 before a quarter of the budget
  rng.normals = {0.0};
  CHECK(sample_cr(bank, 0, Branch::eb, BudgetLedger{100, 1000}, rng) == 0.7);
  // floor 0.6 before half
  rng.normals = {0.0};
  CHECK(sample_cr(bank, 0, Branch::eb, BudgetLedger{400, 1000}, rng) == 0.6);
  rng.normals = {4.5};
  CHECK(sample_cr(bank, 0, Branch::eb, BudgetLedger{400, 1000}, rng) == doctest::Approx(0.65));
  // past half: plain clip
  rng.normals = {0.0};
  CHECK(sample_cr(bank, 0, Branch::eb, BudgetLedger{500, 1000}, rng) == doctest::Approx(0.2));
  CHECK(rng.drained());

  // boundary: exactly a quarter switches to the 0.6 floor
  rng.normals = {0.0};
  CHECK(sample_cr(bank, 0, Branch::eb, BudgetLedger{250, 1000}, rng) == 0.6);
}

TEST_CASE("memory slot picking is uniform over history + fallback") {
  MemoryBank bank(5);
  Mt64Rng rng(31);
  std::vector<int> counts(6, 0);
  const int n = 60000;
  for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(pick_memory_slot(bank, rng))];
  double expected = n / 6.0;
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  CHECK(chi2 < 20.5);  // chi-square(5) 0.999 quantile

  MemoryBank small(1);
  for (int i = 0; i < 100; ++i) {
    int slot = pick_memory_slot(small, rng);
    CHECK(slot >= 0);
    CHECK(slot <= 1);
  }
}

TEST_CASE("memory update blends towards the weighted Lehmer mean") {
  SUBCASE("single success") {
    MemoryBank bank(3);
    std::vector<SuccessRecord> s{{0.5, 0.8, 1.0, Branch::standard}};
    update_memories(bank, s);
    CHECK(bank.m_f[0] == doctest::Approx(0.4));
    CHECK(bank.m_cr[0] == doctest::Approx(0.9));
    CHECK(bank.write_pos == 1);
  }

  SUBCASE("two equal-weight successes") {
    MemoryBank bank(3);
    std::vector<SuccessRecord> s{{0.2, 0.0, 1.0, Branch::standard},
                                 {0.8, 0.0, 1.0, Branch::standard}};
    update_memories(bank, s);
    CHECK(bank.m_f[0] == doctest::Approx(0.49));  // Lehmer 0.68, blended with 0.3
    CHECK(bank.m_cr[0] == 1.0);                   // all-zero CR mass skips the blend
  }

  SUBCASE("empty batch leaves everything, cursor included") {
    MemoryBank bank(3);
    update_memories(bank, {});
    CHECK(bank.write_pos == 0);
    CHECK(bank.m_f[0] == 0.3);
  }

  SUBCASE("cursor wraps over learned slots only") {
    MemoryBank bank(2);
    std::vector<SuccessRecord> s{{0.5, 0.5, 1.0, Branch::eb}};
    update_memories(bank, s);
    update_memories(bank, s);
    CHECK(bank.write_pos == 0);  // H = 2: 0 -> 1 -> 0
    update_memories(bank, s);
    CHECK(bank.write_pos == 1);
    CHECK(bank.m_f[2] == 0.4);  // fallback untouched
  }
}

TEST_CASE("hybrid rate follows the improvement shares") {
  CHECK(update_hybrid_rate(3.0, 1.0) == doctest::Approx(0.75));
  CHECK(update_hybrid_rate(0.0, 5.0) == doctest::Approx(0.7));
  CHECK(update_hybrid_rate(2.0, 2.0) == doctest::Approx(0.5));
  CHECK(update_hybrid_rate(0.0, 0.0) == doctest::Approx(0.7));

  Mt64Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    double rate = update_hybrid_rate(rng.uniform01() * 10, rng.uniform01() * 10);
    CHECK(rate >= 0.0);
    CHECK(rate <= 1.0);
  }
}

TEST_CASE("success rate") {
  CHECK(compute_success_rate(0, 10) == 0.0);
  CHECK(compute_success_rate(10, 10) == 1.0);
  CHECK(compute_success_rate(3, 12) == doctest::Approx(0.25));
  CHECK_THROWS_AS(compute_success_rate(0, 0), std::invalid_argument);
}

TEST_CASE("default rng statistical sanity") {
  Mt64Rng rng(1234);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    sum_sq += u * u;
  }
  CHECK(std::abs(sum / n - 0.5) < 0.005);
  CHECK(std::abs(sum_sq / n - 1.0 / 3.0) < 0.005);

  double nsum = 0.0, nsq = 0.0;
  for (int i = 0; i < n; ++i) {
    double z = rng.normal_std();
    nsum += z;
    nsq += z * z;
  }
  CHECK(std::abs(nsum / n) < 0.01);
  CHECK(std::abs(nsq / n - 1.0) < 0.02);

  // Cauchy: median 0, quartiles at +-1
  int below_m1 = 0, below_0 = 0, below_p1 = 0;
  for (int i = 0; i < n; ++i) {
    double c = rng.cauchy_std();
    below_m1 += c < -1.0;
    below_0 += c < 0.0;
    below_p1 += c < 1.0;
  }
  CHECK(std::abs(below_m1 / double(n) - 0.25) < 0.01);
  CHECK(std::abs(below_0 / double(n) - 0.5) < 0.01);
  CHECK(std::abs(below_p1 / double(n) - 0.75) < 0.01);

  // same seed, same stream
  Mt64Rng a(99), b(99);
  for (int i = 0; i < 1000; ++i) REQUIRE(a.uniform01() == b.uniform01());
}
