#pragma once

#include <cstdint>
#include <vector>

#include "pacekit/money.hpp"

namespace pacekit {

// Delivery totals for one predicted-response-rate bucket within one slot.
struct BucketDelivery {
  double predicted_ctr = 0.0;
  Micros spend = 0;
  std::int64_t impressions = 0;
  std::int64_t clicks = 0;
};

// Per-slot aggregate handed to a controller at the slot boundary. Buckets are
// ascending by predicted_ctr; the controller folds them into layers using its
// own boundaries.
struct SlotReport {
  int slot = 0;  // the slot this report covers
  Micros spend = 0;
  std::int64_t impressions = 0;
  std::int64_t clicks = 0;
  std::vector<BucketDelivery> buckets;
};

// The unit pushed to bidders at slot boundaries. A bidder swaps the whole
// table at once so readers always observe a consistent boundaries/rates pair.
struct RateTable {
  std::vector<double> boundaries;  // ascending cut points, empty = one bucket
  std::vector<double> rates;       // rates[i] for layer i+1, lowest priority first
  bool stopped = false;

  // Lower-inclusive assignment: a ctr equal to a cut point belongs to the
  // higher layer.
  int classify(double ctr) const {
    int lo = 0, hi = static_cast<int>(boundaries.size());
    while (lo < hi) {
      int mid = (lo + hi) / 2;
      if (boundaries[mid] <= ctr)
        lo = mid + 1;
      else
        hi = mid;
    }
    return lo;  // 0-based layer index
  }

  double rate_for(double ctr) const { return rates[classify(ctr)]; }
};

}  // namespace pacekit
