#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pacekit/money.hpp"
#include "pacekit/rng.hpp"

namespace pacekit {

// Request-generation model: time-of-day volume shape, the predicted-CTR
// histogram, and the win-rate curve over predicted CTR. The histogram and
// curve stand in for market data; second-price dynamics are not modeled, the
// win-rate curve absorbs competition.
struct TrafficModel {
  std::vector<double> slot_weights;  // one weight per slot, sum > 0
  std::int64_t total_requests = 0;
  std::vector<std::pair<double, double>> ctr_histogram;   // (ctr, mass), ascending ctr
  std::vector<std::pair<double, double>> win_rate_curve;  // (ctr, win prob), ascending ctr

  void validate() const;  // throws std::invalid_argument

  // Piecewise-linear interpolation, clamped at both ends.
  double win_rate(double ctr) const;
};

struct AdRequest {
  int slot = 0;
  double predicted_ctr = 0.0;
  std::int64_t sequence = 0;
};

// An impression that was actually won, flowing into the feedback pipeline.
struct DeliveryEvent {
  int slot = 0;
  int bucket = 0;  // index into the ctr histogram support
  Micros cost = 0;
  bool clicked = false;
  double predicted_ctr = 0.0;
};

// Deterministic request counts per slot: largest-remainder apportionment of
// total_requests over slot_weights (ties broken toward earlier slots).
std::vector<std::int64_t> slot_request_counts(const TrafficModel& model);

// Cumulative histogram masses for bucket sampling.
std::vector<double> cumulative_ctr_mass(const TrafficModel& model);

// Bucket index for one uniform draw in [0,1).
int sample_bucket(std::span<const double> cumulative_mass, double u);

// Materialized request stream for one slot; CTRs are i.i.d. histogram draws,
// so the stream arrives in randomized order by construction.
std::vector<AdRequest> generate_slot(const TrafficModel& model, int slot, Rng& ctr_rng,
                                     std::int64_t sequence_start = 0);

// Smooth double-peaked diurnal shape used by the shipped presets: low
// overnight, midday and evening peaks. Values are arbitrary weights.
std::vector<double> default_day_weights(int num_slots);

// Assumed defaults for the CTR histogram (log-normal-ish mass over a
// geometric ctr grid) and an increasing win-rate curve. Exact market curves
// are not public; scenarios may override both.
std::vector<std::pair<double, double>> default_ctr_histogram();
std::vector<std::pair<double, double>> default_win_rate_curve();

}  // namespace pacekit
