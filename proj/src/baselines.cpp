#include "pacekit/baselines.hpp"

#include <algorithm>
#include <stdexcept>

namespace pacekit {

GlobalRateController::GlobalRateController(CampaignSpec spec, ControllerConfig cfg)
    : inner_(std::move(spec), single_layer(cfg)) {}

std::vector<Micros> build_allocation(std::span<const std::int64_t> forecast_traffic,
                                     Micros budget) {
  if (forecast_traffic.empty())
    throw std::invalid_argument("build_allocation: empty forecast");
  __int128 total = 0;
  for (std::int64_t count : forecast_traffic) {
    if (count < 0) throw std::invalid_argument("build_allocation: negative forecast");
    total += count;
  }
  if (total == 0) throw std::invalid_argument("build_allocation: all-zero forecast");

  std::vector<Micros> allocation(forecast_traffic.size());
  __int128 cumulative = 0;
  for (std::size_t t = 0; t < forecast_traffic.size(); ++t) {
    cumulative += forecast_traffic[t];
    allocation[t] = static_cast<Micros>(static_cast<__int128>(budget) * cumulative / total);
  }
  allocation.back() = budget;  // land exactly on the budget
  return allocation;
}

void comparator_step(FeedbackComparatorState& state, int minute, Micros spend_so_far) {
  if (minute < 1 || minute > static_cast<int>(state.allocation.size()))
    throw std::invalid_argument("comparator_step: minute outside the allocation");
  Micros target = state.allocation[minute - 1];
  if (spend_so_far < target)
    state.rate *= 1.1;
  else if (spend_so_far > target)
    state.rate *= 0.9;
  // exact tie: leave the rate alone
  state.rate = std::clamp(state.rate, 0.0, 1.0);
  state.cumulative_spend = spend_so_far;
}

FeedbackComparatorController::FeedbackComparatorController(std::vector<Micros> allocation,
                                                           double initial_rate) {
  state_.allocation = std::move(allocation);
  state_.rate = std::clamp(initial_rate, 0.0, 1.0);
}

RateTable FeedbackComparatorController::initial_table() const {
  RateTable table;
  table.rates = {state_.rate};
  return table;
}

RateTable FeedbackComparatorController::on_slot_end(const SlotReport& report,
                                                    bool quick_stopped) {
  minute_ = report.slot;
  comparator_step(state_, minute_, state_.cumulative_spend + report.spend);
  RateTable table;
  table.rates = {quick_stopped ? 0.0 : state_.rate};
  return table;
}

}  // namespace pacekit
