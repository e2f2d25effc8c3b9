#pragma once

#include <memory>
#include <span>
#include <vector>

#include "pacekit/controller.hpp"

namespace pacekit {

// Reference controller: a single global pacing rate. Behaviourally identical
// to the layered controller with one layer, and implemented as exactly that.
class GlobalRateController {
 public:
  GlobalRateController(CampaignSpec spec, ControllerConfig cfg);

  RateTable initial_table() const { return inner_.initial_table(); }
  RateTable on_slot_end(const SlotReport& report, bool quick_stopped = false) {
    return inner_.on_slot_end(report, quick_stopped);
  }

  double rate() const { return inner_.state().layers.front().pacing_rate; }
  const LayeredController& inner() const { return inner_; }

 private:
  static ControllerConfig single_layer(ControllerConfig cfg) {
    cfg.num_layers = 1;
    return cfg;
  }
  LayeredController inner_;
};

// Cumulative spend allocation proportional to forecast traffic, scaled so the
// curve ends exactly at the budget. Throws when the forecast is all zero.
std::vector<Micros> build_allocation(std::span<const std::int64_t> forecast_traffic,
                                     Micros budget);

// State of the +/-10% feedback comparator: one global rate adjusted every
// minute against the cumulative allocation curve.
struct FeedbackComparatorState {
  double rate = 0.0;
  std::vector<Micros> allocation;  // cumulative, one entry per minute
  Micros cumulative_spend = 0;
};

// One control step at the end of `minute` (1-based): rate * 1.1 when behind
// the allocation, rate * 0.9 when ahead, exact tie leaves the rate alone.
// Clamped to [0, 1].
void comparator_step(FeedbackComparatorState& state, int minute, Micros spend_so_far);

class FeedbackComparatorController {
 public:
  FeedbackComparatorController(std::vector<Micros> allocation, double initial_rate);

  RateTable initial_table() const;
  RateTable on_slot_end(const SlotReport& report, bool quick_stopped = false);

  const FeedbackComparatorState& state() const { return state_; }

 private:
  FeedbackComparatorState state_;
  int minute_ = 0;
};

}  // namespace pacekit
