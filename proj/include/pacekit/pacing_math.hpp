#pragma once

#include <span>
#include <vector>

#include "pacekit/campaign.hpp"

namespace pacekit {

// Root-mean-square deviation of realized spend from plan, in currency units:
// sqrt(mean((C_t - B_t)^2)). Zero iff the vectors are identical. Throws on
// length mismatch.
double penalty(std::span<const Micros> actual, std::span<const Micros> plan);

// Penalty normalized by average planned spend per slot; the relative
// per-slot deviation. Throws std::domain_error when budget is not positive.
double avg_err(double omega, Micros budget, int num_slots);

// Desired spend for slots m+1..K given the remaining budget: each remaining
// planned amount shifted by an equal share of the surplus or deficit. This is
// the unconstrained minimizer of the penalty over the remaining slots subject
// to the sum constraint, so entries can go negative when past overspend
// exceeds the remaining plan; callers clamp the current slot's target at
// zero. Output sums to remaining_budget exactly.
std::vector<Micros> replan(const CampaignSpec& spec, int slots_elapsed,
                           Micros remaining_budget);

// Target for the coming slot minus actual spend in the slot just finished.
// Positive: speed up. Negative: slow down.
inline Micros residual(Micros desired_this_slot, Micros actual_last_slot) {
  return desired_this_slot - actual_last_slot;
}

}  // namespace pacekit
