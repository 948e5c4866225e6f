#include "rdex/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rdex {

namespace {
constexpr double fallback_f = 0.4;
constexpr double fallback_cr = 0.9;
constexpr double init_f = 0.3;
constexpr double init_cr = 1.0;
}  // namespace

MemoryBank::MemoryBank(int history_size) {
  if (history_size < 1) throw std::invalid_argument("MemoryBank: history size must be >= 1");
  m_f.assign(static_cast<std::size_t>(history_size) + 1, init_f);
  m_cr.assign(static_cast<std::size_t>(history_size) + 1, init_cr);
  m_f.back() = fallback_f;
  m_cr.back() = fallback_cr;
}

int pick_memory_slot(const MemoryBank& bank, Rng& rng) {
  return static_cast<int>(rng.uniform_int(bank.m_f.size()));
}

double sample_f_standard(double success_rate, Rng& rng) {
  double center = std::max(0.0, std::cbrt(success_rate));
  for (;;) {
    double f = center + 0.05 * rng.normal_std();
    if (f > 0.0 && f <= 1.0) return f;
  }
}

double sample_f_eb(const MemoryBank& bank, int slot, Rng& rng) {
  double center = bank.m_f.at(static_cast<std::size_t>(slot));
  for (;;) {
    double f = center + 0.1 * rng.cauchy_std();
    if (f <= 0.0) continue;
    return std::min(f, 1.0);
  }
}

double sample_cr(const MemoryBank& bank, int slot, Branch branch, const BudgetLedger& ledger,
                 Rng& rng) {
  double cr = bank.m_cr.at(static_cast<std::size_t>(slot)) + 0.1 * rng.normal_std();
  cr = std::clamp(cr, 0.0, 1.0);
  if (branch == Branch::eb) {
    double progress = static_cast<double>(ledger.nfe);
    if (progress < 0.25 * static_cast<double>(ledger.max_fe))
      cr = std::max(cr, 0.7);
    else if (progress < 0.5 * static_cast<double>(ledger.max_fe))
      cr = std::max(cr, 0.6);
  }
  return cr;
}

namespace {

// Improvement-weighted Lehmer mean sum(w v^2) / sum(w v). Callers guarantee
// the denominator is nonzero.
double lehmer(std::span<const SuccessRecord> successes, double total_delta,
              double SuccessRecord::*field) {
  double num = 0.0, den = 0.0;
  for (const SuccessRecord& s : successes) {
    double w = s.delta / total_delta;
    double v = s.*field;
    num += w * v * v;
    den += w * v;
  }
  return num / den;
}

}  // namespace

void update_memories(MemoryBank& bank, std::span<const SuccessRecord> successes) {
  if (successes.empty()) return;

  double total_delta = 0.0, cr_mass = 0.0;
  for (const SuccessRecord& s : successes) {
    if (!(s.delta > 0.0)) throw std::invalid_argument("update_memories: non-positive delta");
    total_delta += s.delta;
    cr_mass += s.delta * s.cr_value;
  }

  auto pos = static_cast<std::size_t>(bank.write_pos);
  bank.m_f[pos] = 0.5 * (bank.m_f[pos] + lehmer(successes, total_delta, &SuccessRecord::f_value));
  if (cr_mass > 0.0)
    bank.m_cr[pos] = 0.5 * (bank.m_cr[pos] + lehmer(successes, total_delta, &SuccessRecord::cr_value));
  bank.write_pos = (bank.write_pos + 1) % bank.history();
}

double update_hybrid_rate(double delta_eb, double delta_std) {
  if (delta_eb > 0.0 && delta_std > 0.0) return delta_eb / (delta_eb + delta_std);
  return 0.7;
}

double compute_success_rate(int n_success, int n_trials) {
  if (n_trials <= 0) throw std::invalid_argument("compute_success_rate: no trials");
  return static_cast<double>(n_success) / static_cast<double>(n_trials);
}

}  // namespace rdex
