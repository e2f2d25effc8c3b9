#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "pacekit/campaign.hpp"
#include "pacekit/report.hpp"

namespace pacekit {

struct ControllerConfig {
  double global_init_rate = 0.01;    // r_G, used for the whole first slot
  int num_layers = 0;                // 0 = derive from ceil(1/r_G)
  double trial_budget_fraction = 0.01;
  Micros quantum = 1;
};

// State of one response-rate layer. Index 0 is the lowest priority layer;
// higher index = higher predicted response rate = higher priority.
struct LayerState {
  double response_rate = 0.0;   // p_l, impression-weighted mean predicted ctr
  double ecpc_estimate = 0.0;   // e_l in micros, = cpm/1000/p_l
  double pacing_rate = 0.0;     // r_l in [0,1]
  Micros last_slot_spend = 0;   // c_l

  // Lifetime sums behind the p_l estimate.
  double ctr_weight = 0.0;
  std::int64_t impressions = 0;

  // Most recent slot with non-zero rate and non-zero spend; the basis for
  // trial-rate extrapolation. Seeded from the initialization phase.
  Micros hist_spend = 0;
  double hist_rate = 0.0;
};

// The whole mutable state of one campaign's layered controller. Exactly one
// logical owner mutates it, at slot boundaries only; concurrent readers get
// consistent rates via the RateTable snapshot pushed after each adjustment.
struct PacingState {
  std::vector<LayerState> layers;
  std::vector<double> boundaries;  // ascending, size layers-1 once derived
  int slot_index = 1;              // slot currently being served
  Micros remaining_budget = 0;
  std::optional<int> trial_layer;  // 0-based
  bool initialized = false;        // boundaries derived after slot 1

  int num_layers() const { return static_cast<int>(layers.size()); }
  std::vector<double> rates() const;
  bool all_rates_zero() const;
  // Throws std::logic_error if rates are outside [0,1] or not non-decreasing
  // with priority.
  void check_invariants() const;
};

// Trial rate for a given 0-based layer index, supplied by the orchestrator
// (needs the coming slot's target and the layer's history).
using TrialRateFn = std::function<double(int)>;

// ceil(1/r_G); experiments routinely override with an explicit layer count.
int default_num_layers(double global_init_rate);

// Equal-frequency cut points over observed predicted response rates, lowest
// layer first. Duplicate cut values are merged, which can reduce the
// effective layer count. L=1 yields no boundaries.
std::vector<double> derive_boundaries(std::vector<double> observed_rates, int num_layers);

// Weighted variant over (value, count) pairs sorted ascending by value.
std::vector<double> derive_boundaries_weighted(
    std::span<const std::pair<double, std::int64_t>> rate_counts, int num_layers);

// 0-based layer for a predicted ctr; cut-point values go to the higher layer.
int classify(double ctr, std::span<const double> boundaries);

// min(1, r_hist * (lambda * next_slot_target) / spend_hist). Falls back to
// `fallback_rate` when the layer has no usable history.
double trial_rate(Micros hist_spend, double hist_rate, Micros next_slot_target,
                  double lambda, double fallback_rate);

struct AdjustResult {
  std::vector<double> rates;
  std::optional<int> trial_layer;
};

// Residual-offsetting rate adjustment for campaigns without a performance
// goal. R > 0 raises rates top-down, R < 0 lowers them bottom-up until the
// residual is offset; the layer below the last non-zero layer receives a
// trial rate. Layers that spent nothing are skipped by the scaling
// arithmetic.
AdjustResult adjust_without_goal(std::span<const Micros> spend,
                                 std::span<const double> rates, Micros residual,
                                 const TrialRateFn& trial);

// Expected joint eCPC (micros) of layers from_layer..L-1 if rates move from
// rates_prev to rates_next, extrapolating each layer's spend linearly in its
// rate. Layers with rates_prev == 0 contribute nothing. Returns +infinity
// when the included layers have no projected spend.
double exp_perf(std::span<const Micros> spend, std::span<const double> rates_prev,
                std::span<const double> rates_next, std::span<const double> ecpc,
                int from_layer);

// Goal-capped adjustment: applies adjust_without_goal, then if the projected
// joint eCPC misses the goal, zeroes layers bottom-up and scales the marginal
// layer so the projection lands on the goal. Result satisfies
// exp_perf(..., 0) <= goal or is the all-zero state.
AdjustResult adjust_with_goal(std::span<const Micros> spend,
                              std::span<const double> rates_prev, Micros residual,
                              std::span<const double> ecpc, Micros goal,
                              const TrialRateFn& trial);

// When every rate is zero, restart probing: the top-priority layer gets its
// trial rate, everything else stays zero. Otherwise identity.
void reset_if_dead(PacingState& state, const TrialRateFn& trial);

// Restores r_1 <= r_2 <= ... <= r_L. Zero-spend layers are adjusted first
// (their rate carries no residual information); any remaining violation is
// clamped downward.
void enforce_monotonic(std::vector<double>& rates, std::span<const Micros> spend);

// Orchestrates one slot boundary for a layered campaign: ingest the report,
// replan, compute the residual, adjust rates (with or without goal), apply
// the dead-state reset and monotonicity, then advance the slot index.
class LayeredController {
 public:
  LayeredController(CampaignSpec spec, ControllerConfig cfg);

  // Slot-1 table: one bucket at the global init rate.
  RateTable initial_table() const;

  // Called at the boundary after each slot with that slot's report.
  // `quick_stopped` suppresses the dead-state reset once the budget is gone.
  RateTable on_slot_end(const SlotReport& report, bool quick_stopped = false);

  const PacingState& state() const { return state_; }
  const CampaignSpec& spec() const { return spec_; }
  const ControllerConfig& config() const { return cfg_; }

  // Target spend for the slot about to start (already clamped at zero).
  Micros current_slot_target() const { return current_target_; }

 private:
  void ingest_report(const SlotReport& report);
  void derive_layers_from_init(const SlotReport& report, Micros next_target);
  RateTable table() const;
  TrialRateFn trial_fn(Micros next_target) const;

  CampaignSpec spec_;
  ControllerConfig cfg_;
  PacingState state_;
  Micros current_target_ = 0;
  std::vector<Micros> plan_suffix_;  // plan_suffix_[t] = sum of plan[t..K-1]
};

}  // namespace pacekit
