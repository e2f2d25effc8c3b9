#include "pacekit/pacing_math.hpp"

#include <cmath>
#include <stdexcept>

namespace pacekit {

double penalty(std::span<const Micros> actual, std::span<const Micros> plan) {
  if (actual.size() != plan.size())
    throw std::invalid_argument("penalty: spend pattern and plan differ in length");
  if (plan.empty()) throw std::invalid_argument("penalty: empty plan");
  double sum_sq = 0.0;
  for (std::size_t t = 0; t < plan.size(); ++t) {
    double diff = units_from_micros(actual[t] - plan[t]);
    sum_sq += diff * diff;
  }
  return std::sqrt(sum_sq / static_cast<double>(plan.size()));
}

double avg_err(double omega, Micros budget, int num_slots) {
  if (budget <= 0) throw std::domain_error("avg_err: undefined for non-positive budget");
  if (num_slots <= 0) throw std::domain_error("avg_err: num_slots must be positive");
  double avg_planned = units_from_micros(budget) / static_cast<double>(num_slots);
  return omega / avg_planned;
}

std::vector<Micros> replan(const CampaignSpec& spec, int slots_elapsed,
                           Micros remaining_budget) {
  const int k = spec.num_slots;
  if (slots_elapsed < 0 || slots_elapsed >= k)
    throw std::invalid_argument("replan: slots_elapsed must be in [0, num_slots)");
  if (remaining_budget < 0)
    throw std::invalid_argument("replan: remaining budget must be >= 0");

  const int remaining = k - slots_elapsed;
  Micros planned_rest = 0;
  for (int t = slots_elapsed; t < k; ++t) planned_rest += spec.spending_plan[t];

  // Equal share of the surplus per remaining slot; leftover quanta go to the
  // earliest slots so the output sums to remaining_budget exactly.
  auto [share, extra] = floor_divmod(remaining_budget - planned_rest, remaining);
  std::vector<Micros> targets(remaining);
  for (int i = 0; i < remaining; ++i)
    targets[i] = spec.spending_plan[slots_elapsed + i] + share + (i < extra ? 1 : 0);
  return targets;
}

}  // namespace pacekit
