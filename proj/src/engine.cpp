#include "rdex/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace rdex {

void validate(const EngineConfig& cfg) {
  if (cfg.n_min < 4) throw std::invalid_argument("EngineConfig: n_min must be >= 4 (mutation needs 4 members)");
  if (cfg.n0 < cfg.n_min) throw std::invalid_argument("EngineConfig: n0 must be >= n_min");
  if (cfg.history < 1) throw std::invalid_argument("EngineConfig: history must be >= 1");
  if (cfg.rho_init < 0.0 || cfg.rho_init > 1.0) throw std::invalid_argument("EngineConfig: rho_init outside [0, 1]");
  if (cfg.perturb_prob < 0.0 || cfg.perturb_prob > 1.0)
    throw std::invalid_argument("EngineConfig: perturb_prob outside [0, 1]");
  if (!(cfg.perturb_scale > 0.0)) throw std::invalid_argument("EngineConfig: perturb_scale must be positive");
  if (!(cfg.pbest_frac > 0.0) || cfg.pbest_frac > 1.0)
    throw std::invalid_argument("EngineConfig: pbest_frac outside (0, 1]");
  if (!(cfg.rank_bias_lambda > 0.0)) throw std::invalid_argument("EngineConfig: rank_bias_lambda must be positive");
  if (!(cfg.violation.eps_eq > 0.0)) throw std::invalid_argument("EngineConfig: eps_eq must be positive");
  if (!(cfg.violation.eta > 0.0) || cfg.violation.eta > 1.0)
    throw std::invalid_argument("EngineConfig: eta outside (0, 1]");
  if (cfg.rho_override && (*cfg.rho_override < 0.0 || *cfg.rho_override > 1.0))
    throw std::invalid_argument("EngineConfig: rho_override outside [0, 1]");
}

int lpsr_size(const BudgetLedger& ledger, int n0, int n_min) {
  double progress = static_cast<double>(ledger.nfe) / static_cast<double>(ledger.max_fe);
  return static_cast<int>(std::floor(n0 + (n_min - n0) * progress));
}

namespace {

// Folds one evaluation into the incumbent (lexicographic (phi, f) strict
// improvement) and notifies the eval hook.
void absorb_eval(EngineState& st, std::span<const double> x, double f, double phi,
                 const EngineHooks* hooks) {
  if (st.best_x.empty() || phi < st.best_phi || (phi == st.best_phi && f < st.best_f)) {
    st.best_x.assign(x.begin(), x.end());
    st.best_f = f;
    st.best_phi = phi;
  }
  if (hooks && hooks->on_eval) hooks->on_eval({st.ledger.nfe, f, phi, st.best_f, st.best_phi});
}

}  // namespace

EngineState initialize(const EngineConfig& cfg, const ProblemSpec& problem, long long max_fe,
                       const EngineHooks* hooks) {
  validate(cfg);
  validate(problem);
  if (max_fe < cfg.n0)
    throw std::invalid_argument("initialize: budget " + std::to_string(max_fe) +
                                " cannot cover the initial population of " + std::to_string(cfg.n0));

  EngineState st;
  st.config = cfg;
  st.bank = MemoryBank(cfg.history);
  st.success_rate = 0.5;
  st.rho_eb = cfg.rho_init;
  st.ledger = BudgetLedger{0, max_fe};
  st.rng = std::make_unique<Mt64Rng>(cfg.seed);

  st.front.reserve(static_cast<std::size_t>(cfg.n0));
  std::vector<double> x(static_cast<std::size_t>(problem.dim));
  for (int i = 0; i < cfg.n0; ++i) {
    for (int j = 0; j < problem.dim; ++j)
      x[static_cast<std::size_t>(j)] =
          problem.lower[j] + st.rng->uniform01() * (problem.upper[j] - problem.lower[j]);
    RawEvaluation raw = evaluate(problem, x, st.ledger);
    double phi = mean_violation(raw, cfg.violation);
    absorb_eval(st, x, raw.objective, phi, hooks);
    st.front.push_back(ScoredIndividual{x, raw.objective, phi, phi, 0.0});
  }
  st.pool = st.front;
  st.pool_write = 0;
  return st;
}

GenerationContext rank_front(EngineState& st) {
  auto& front = st.front;
  if (front.empty()) throw std::invalid_argument("rank_front: empty front");
  const auto n = front.size();

  std::vector<double> phis(n);
  double f_max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    phis[i] = front[i].phi;
    f_max = std::max(f_max, front[i].f);
  }

  GenerationContext ctx;
  ctx.eps = epsilon_level(phis, st.ledger, st.config.violation);
  ctx.f_max = f_max;
  for (auto& ind : front) {
    ind.phi_trunc = truncated_violation(ind.phi, ctx.eps.epsilon);
    ind.score = rank_score(ind.f, ind.phi, ctx.eps.epsilon, f_max);
  }

  ctx.order.resize(n);
  for (std::size_t i = 0; i < n; ++i) ctx.order[i] = static_cast<int>(i);
  std::stable_sort(ctx.order.begin(), ctx.order.end(),
                   [&](int a, int b) { return front[static_cast<std::size_t>(a)].score <
                                              front[static_cast<std::size_t>(b)].score; });

  ctx.rank_cdf.resize(n);
  double cum = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    cum += std::exp(-st.config.rank_bias_lambda * static_cast<double>(r) / static_cast<double>(n));
    ctx.rank_cdf[r] = cum;
  }

  int p = std::max(2, static_cast<int>(std::floor(st.config.pbest_frac * static_cast<double>(n))));
  ctx.pbest_count = std::min(p, static_cast<int>(n));

  st.eps = ctx.eps;
  return ctx;
}

namespace {

// Rank-biased front index: inverse-CDF draw on exp(-lambda r / N) weights
// over ctx.order. One uniform01 per attempt.
int draw_rank_biased(const GenerationContext& ctx, Rng& rng) {
  double u = rng.uniform01() * ctx.rank_cdf.back();
  auto it = std::upper_bound(ctx.rank_cdf.begin(), ctx.rank_cdf.end(), u);
  if (it == ctx.rank_cdf.end()) --it;  // u == back() cannot occur, guard anyway
  return ctx.order[static_cast<std::size_t>(it - ctx.rank_cdf.begin())];
}

}  // namespace

std::vector<double> mutate_standard(const EngineState& st, const GenerationContext& ctx, int i,
                                    double f_scale, Rng& rng) {
  const auto& front = st.front;
  if (front.size() < 4) throw std::invalid_argument("mutate_standard: front smaller than 4");

  const auto& xi = front[static_cast<std::size_t>(i)].x;
  const auto& xpb =
      front[static_cast<std::size_t>(ctx.order[rng.uniform_int(static_cast<std::uint64_t>(ctx.pbest_count))])].x;

  int r1;
  do {
    r1 = draw_rank_biased(ctx, rng);
  } while (r1 == i);
  const auto& xr1 = front[static_cast<std::size_t>(r1)].x;

  // Donor from the pool, distinct as a point from x_i and x_r1. The ring can
  // be saturated with copies, so retries are capped and the last draw wins.
  const std::vector<double>* xr2 = &st.pool[rng.uniform_int(st.pool.size())].x;
  for (int attempt = 0; attempt < 16 && (*xr2 == xi || *xr2 == xr1); ++attempt)
    xr2 = &st.pool[rng.uniform_int(st.pool.size())].x;

  std::vector<double> v(xi.size());
  for (std::size_t j = 0; j < xi.size(); ++j)
    v[j] = xi[j] + f_scale * (xpb[j] - xi[j]) + f_scale * (xr1[j] - (*xr2)[j]);
  return v;
}

std::vector<double> mutate_eb(const EngineState& st, [[maybe_unused]] const GenerationContext& ctx,
                              int i, double f_scale, Rng& rng) {
  // ctx pins the precondition (front scored under the generation epsilon);
  // the donor ordering reads those scores straight off the members.
  const auto& front = st.front;
  const auto n = static_cast<std::uint64_t>(front.size());
  if (front.size() < 4) throw std::invalid_argument("mutate_eb: front smaller than 4");

  int picks[3];
  for (int k = 0; k < 3; ++k) {
    int j;
    bool clash;
    do {
      j = static_cast<int>(rng.uniform_int(n));
      clash = j == i;
      for (int prev = 0; prev < k && !clash; ++prev) clash = j == picks[prev];
    } while (clash);
    picks[k] = j;
  }
  std::sort(std::begin(picks), std::end(picks), [&](int a, int b) {
    double sa = front[static_cast<std::size_t>(a)].score;
    double sb = front[static_cast<std::size_t>(b)].score;
    return sa != sb ? sa < sb : a < b;
  });

  const auto& xi = front[static_cast<std::size_t>(i)].x;
  const auto& xb = front[static_cast<std::size_t>(picks[0])].x;
  const auto& xm = front[static_cast<std::size_t>(picks[1])].x;
  const auto& xw = front[static_cast<std::size_t>(picks[2])].x;
  std::vector<double> v(xi.size());
  for (std::size_t j = 0; j < xi.size(); ++j)
    v[j] = xi[j] + f_scale * (xb[j] - xi[j]) + f_scale * (xm[j] - xw[j]);
  return v;
}

CrossoverResult crossover(std::span<const double> parent, std::span<const double> donor,
                          double cr, double perturb_prob, double perturb_scale, Rng& rng) {
  if (parent.size() != donor.size()) throw std::invalid_argument("crossover: size mismatch");
  const auto d = parent.size();

  bool perturb = rng.uniform01() < perturb_prob;
  auto j_rand = rng.uniform_int(d);

  CrossoverResult out;
  out.trial.resize(d);
  int crossed = 0;
  for (std::size_t j = 0; j < d; ++j) {
    if (rng.uniform01() < cr || j == j_rand) {
      out.trial[j] = donor[j];
      ++crossed;
    } else {
      out.trial[j] = perturb ? parent[j] + perturb_scale * rng.cauchy_std() : parent[j];
    }
  }
  out.cr_realized = static_cast<double>(crossed) / static_cast<double>(d);
  return out;
}

std::vector<double> repair(std::span<const double> trial, std::span<const double> parent,
                           std::span<const double> lower, std::span<const double> upper) {
  std::vector<double> out(trial.begin(), trial.end());
  for (std::size_t j = 0; j < out.size(); ++j) {
    if (out[j] < lower[j])
      out[j] = 0.5 * (parent[j] + lower[j]);
    else if (out[j] > upper[j])
      out[j] = 0.5 * (parent[j] + upper[j]);
  }
  return out;
}

void generation(EngineState& st, const ProblemSpec& problem, const EngineHooks* hooks) {
  GenerationContext ctx = rank_front(st);
  const auto n = static_cast<int>(st.front.size());
  const EngineConfig& cfg = st.config;
  Rng& rng = *st.rng;

  std::vector<SuccessRecord> successes;
  int trials = 0, accepted = 0;
  double delta_eb = 0.0, delta_std = 0.0;

  for (int i = 0; i < n; ++i) {
    if (st.ledger.exhausted()) {
      st.terminal = true;
      break;
    }

    double route = cfg.rho_override ? *cfg.rho_override : st.rho_eb;
    Branch branch = rng.uniform01() < route ? Branch::eb : Branch::standard;
    int slot = pick_memory_slot(st.bank, rng);
    double f_scale = branch == Branch::eb ? sample_f_eb(st.bank, slot, rng)
                                          : sample_f_standard(st.success_rate, rng);
    double cr = sample_cr(st.bank, slot, branch, st.ledger, rng);

    std::vector<double> donor = branch == Branch::eb ? mutate_eb(st, ctx, i, f_scale, rng)
                                                     : mutate_standard(st, ctx, i, f_scale, rng);
    CrossoverResult crossed =
        crossover(st.front[static_cast<std::size_t>(i)].x, donor, cr, cfg.perturb_prob,
                  cfg.perturb_scale, rng);
    std::vector<double> x = repair(crossed.trial, st.front[static_cast<std::size_t>(i)].x,
                                   problem.lower, problem.upper);

    RawEvaluation raw = evaluate(problem, x, st.ledger);
    double phi = mean_violation(raw, cfg.violation);
    absorb_eval(st, x, raw.objective, phi, hooks);

    ScoredIndividual trial;
    trial.x = std::move(x);
    trial.f = raw.objective;
    trial.phi = phi;
    trial.phi_trunc = truncated_violation(phi, ctx.eps.epsilon);
    trial.score = rank_score(trial.f, trial.phi, ctx.eps.epsilon, ctx.f_max);

    ++trials;
    (branch == Branch::eb ? st.counters.eb_trials : st.counters.std_trials) += 1;

    ScoredIndividual& parent = st.front[static_cast<std::size_t>(i)];
    bool accept = select(parent, trial, ctx.eps.epsilon);
    if (hooks && hooks->on_selection)
      hooks->on_selection(
          {i, ctx.eps.epsilon, parent.f, parent.phi, trial.f, trial.phi, accept, branch});

    if (accept) {
      ++accepted;
      st.counters.accepted += 1;
      double delta = parent.phi_trunc != trial.phi_trunc ? parent.phi_trunc - trial.phi_trunc
                                                         : parent.f - trial.f;
      if (delta > 0.0) {
        successes.push_back({f_scale, crossed.cr_realized, delta, branch});
        (branch == Branch::eb ? delta_eb : delta_std) += delta;
      }
      parent = std::move(trial);
      st.pool[static_cast<std::size_t>(st.pool_write)] = parent;
      st.pool_write = (st.pool_write + 1) % static_cast<int>(st.pool.size());
    }
  }

  if (trials > 0) {
    update_memories(st.bank, successes);
    st.rho_eb = update_hybrid_rate(delta_eb, delta_std);
    st.success_rate = compute_success_rate(accepted, trials);
  }

  int target = lpsr_size(st.ledger, cfg.n0, cfg.n_min);
  if (static_cast<int>(st.front.size()) > target) {
    // Fresh scores over the post-selection front, same epsilon; survivors
    // keep their relative order.
    double f_max = -std::numeric_limits<double>::infinity();
    for (const auto& ind : st.front) f_max = std::max(f_max, ind.f);
    std::vector<std::pair<double, int>> keyed;
    keyed.reserve(st.front.size());
    for (std::size_t i = 0; i < st.front.size(); ++i)
      keyed.emplace_back(rank_score(st.front[i].f, st.front[i].phi, ctx.eps.epsilon, f_max),
                         static_cast<int>(i));
    std::sort(keyed.begin(), keyed.end());
    std::vector<char> keep(st.front.size(), 0);
    for (int r = 0; r < target; ++r) keep[static_cast<std::size_t>(keyed[static_cast<std::size_t>(r)].second)] = 1;
    std::vector<ScoredIndividual> next;
    next.reserve(static_cast<std::size_t>(target));
    for (std::size_t i = 0; i < st.front.size(); ++i)
      if (keep[i]) next.push_back(std::move(st.front[i]));
    st.front = std::move(next);
  }

  st.generation += 1;
  if (hooks && hooks->on_generation)
    hooks->on_generation({st.generation - 1, st.ledger.nfe, ctx.eps,
                          static_cast<int>(st.front.size()), st.success_rate, st.rho_eb});
}

RunTrace run(const EngineConfig& cfg, const ProblemSpec& problem, const CheckpointSchedule& schedule,
             const EngineHooks* user_hooks) {
  if (schedule.thresholds.empty() || schedule.thresholds.back() != schedule.max_fe)
    throw std::invalid_argument("run: checkpoint schedule does not end at max_fe");

  RunTrace trace;
  trace.problem = problem.name;
  trace.seed = cfg.seed;
  trace.dim = problem.dim;
  trace.max_fe = schedule.max_fe;
  trace.n_checkpoints = schedule.size();
  trace.points.reserve(schedule.thresholds.size());

  std::size_t next_cp = 0;
  EngineHooks hooks;
  hooks.on_eval = [&](const EvalEvent& ev) {
    while (next_cp < schedule.thresholds.size() &&
           ev.nfe >= schedule.thresholds[next_cp]) {
      trace.points.push_back(
          {static_cast<int>(next_cp) + 1, ev.nfe, ev.best_f, ev.best_phi});
      ++next_cp;
    }
    if (user_hooks && user_hooks->on_eval) user_hooks->on_eval(ev);
  };
  if (user_hooks && user_hooks->on_selection) hooks.on_selection = user_hooks->on_selection;
  if (user_hooks && user_hooks->on_generation) hooks.on_generation = user_hooks->on_generation;

  EngineState st = initialize(cfg, problem, schedule.max_fe, &hooks);
  while (!st.terminal && !st.ledger.exhausted()) generation(st, problem, &hooks);

  if (next_cp != schedule.thresholds.size() || st.ledger.nfe != schedule.max_fe)
    throw std::logic_error("run: budget not fully consumed");

  trace.final_f = st.best_f;
  trace.final_cv = st.best_phi;
  return trace;
}

}  // namespace rdex
