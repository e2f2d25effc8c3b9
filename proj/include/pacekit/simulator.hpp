#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pacekit/baselines.hpp"
#include "pacekit/controller.hpp"
#include "pacekit/pipeline.hpp"
#include "pacekit/traffic.hpp"

namespace pacekit {

// Any of the controllers the simulator can drive. All of them consume
// SlotReports and emit RateTables at slot boundaries.
using ControllerHandle =
    std::variant<LayeredController, GlobalRateController, FeedbackComparatorController>;

// Per-request decision: participate with the classified layer's rate, win
// with the model's win probability, click with the predicted ctr. Only a won
// impression produces an event.
std::optional<DeliveryEvent> serve(const AdRequest& request, const RateTable& table,
                                   const TrafficModel& model, const CampaignSpec& spec,
                                   Rng& participation, Rng& win, Rng& click);

struct SlotRow {
  int slot = 0;
  Micros planned = 0;  // controller target for the slot (clamped replan)
  Micros spent = 0;
  std::int64_t impressions = 0;
  std::int64_t clicks = 0;
  std::optional<double> ecpc_micros;
  std::vector<double> rates;
};

struct RunArtifacts {
  std::vector<SlotRow> slots;
  Micros total_spend = 0;
  std::int64_t impressions = 0;
  std::int64_t clicks = 0;
  std::int64_t eligible_requests = 0;
  std::int64_t participations = 0;
  double omega = 0.0;    // final penalty vs plan, currency units
  double avg_err = 0.0;  // omega normalized by average planned slot spend
  std::optional<double> ecpc_micros;
  double avg_pacing_rate = 0.0;  // participations / eligible requests
  bool quick_stopped = false;

  // Ground-truth per-slot spend, for conservation checks against the store.
  std::vector<Micros> ground_truth_slot_spend;
};

struct RunOptions {
  PipelineConfig pipeline;
  std::string event_log_path;  // empty = no dump
};

// Drives a full campaign: generates each slot's requests, serves them through
// the bidder's current rate table, feeds deliveries through the pipeline, and
// runs the controller at every slot boundary. Deterministic for a fixed
// RngSpec and configuration.
RunArtifacts run_campaign(const CampaignSpec& spec, const TrafficModel& model,
                          ControllerHandle controller, const RngSpec& rng,
                          const RunOptions& options = {});

}  // namespace pacekit
