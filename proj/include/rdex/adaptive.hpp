#pragma once

#include <span>
#include <vector>

#include "rdex/problem.hpp"
#include "rdex/rng.hpp"

namespace rdex {

enum class Branch { standard, eb };

/// Success-history memory for the scale factor F and crossover rate CR.
/// Slots 0..history-1 are learned; slot `history` is a fixed fallback pair
/// (F=0.4, CR=0.9) that sampling may pick but updates never touch.
struct MemoryBank {
  std::vector<double> m_f;
  std::vector<double> m_cr;
  int write_pos = 0;

  explicit MemoryBank(int history_size = 5);

  /// Number of learned slots (excludes the fallback).
  int history() const { return static_cast<int>(m_f.size()) - 1; }
};

/// One accepted trial that strictly improved its parent, as consumed by the
/// memory update at the end of a generation.
struct SuccessRecord {
  double f_value = 0.0;   // scale factor the trial was generated with
  double cr_value = 0.0;  // realized crossover fraction of the trial
  double delta = 0.0;     // improvement margin, > 0
  Branch branch = Branch::standard;
};

/// Uniform slot index in [0, history], i.e. the fallback slot included.
int pick_memory_slot(const MemoryBank& bank, Rng& rng);

/// Standard-branch scale factor: normal around max(0, success_rate^(1/3))
/// with sigma 0.05, resampled until it lands in (0, 1].
double sample_f_standard(double success_rate, Rng& rng);

/// Eb-branch scale factor: Cauchy around m_f[slot] with scale 0.1, resampled
/// while <= 0, clamped to 1 from above.
double sample_f_eb(const MemoryBank& bank, int slot, Rng& rng);

/// Crossover rate: normal around m_cr[slot] with sigma 0.1, clipped to
/// [0, 1]. The eb branch additionally floors the result by run progress:
/// >= 0.7 while nfe < 0.25 * max_fe, >= 0.6 while nfe < 0.5 * max_fe.
double sample_cr(const MemoryBank& bank, int slot, Branch branch, const BudgetLedger& ledger,
                 Rng& rng);

/// Blends the write slot halfway towards the improvement-weighted Lehmer
/// mean of the recorded F and CR values, then advances the write cursor.
/// No records: bank is left untouched, cursor included. The CR blend is
/// skipped when all recorded CR values are zero.
void update_memories(MemoryBank& bank, std::span<const SuccessRecord> successes);

/// Share of the next generation routed to the eb branch: the eb fraction of
/// total improvement when both branches improved, else the 0.7 default.
double update_hybrid_rate(double delta_eb, double delta_std);

/// Acceptance fraction of the previous generation. Throws on n_trials == 0.
double compute_success_rate(int n_success, int n_trials);

}  // namespace rdex
