#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pacekit/money.hpp"

namespace pacekit {

// Budget contract of one campaign: total budget, CPM price, optional eCPC
// target and the per-slot spending plan. The plan entries are non-negative
// and sum to the budget exactly (money-quantum arithmetic).
struct CampaignSpec {
  std::string id;
  Micros budget = 0;
  Micros cpm = 0;  // price per 1000 impressions
  std::optional<Micros> ecpc_goal;
  int num_slots = 0;
  std::vector<Micros> spending_plan;

  Micros cost_per_impression() const { return cpm / 1000; }

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

// Even plan helper: budget split across slots, remainder micros go to the
// earliest slots so the plan still sums exactly.
std::vector<Micros> even_plan(Micros budget, int num_slots);

CampaignSpec make_campaign(std::string id, Micros budget, Micros cpm,
                           std::optional<Micros> ecpc_goal, int num_slots);

// Realized spend per slot plus its running total.
struct SpendingRecord {
  std::vector<Micros> per_slot;
  Micros total = 0;

  void add_slot(Micros amount) {
    per_slot.push_back(amount);
    total += amount;
  }
};

struct PerformanceRecord {
  Micros cost = 0;
  std::int64_t responses = 0;

  // eCPC/eCPA in micros; undefined until at least one response exists.
  std::optional<double> performance() const {
    if (responses <= 0) return std::nullopt;
    return static_cast<double>(cost) / static_cast<double>(responses);
  }
};

}  // namespace pacekit
