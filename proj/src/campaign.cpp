#include "pacekit/campaign.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

namespace pacekit {

void CampaignSpec::validate() const {
  if (budget < 0) throw std::invalid_argument("campaign.budget: must be >= 0");
  if (cpm <= 0) throw std::invalid_argument("campaign.cpm: must be > 0");
  if (cpm % 1000 != 0)
    throw std::invalid_argument(
        "campaign.cpm: must be a whole number of micros per impression");
  if (ecpc_goal && *ecpc_goal <= 0)
    throw std::invalid_argument("campaign.ecpc_goal: must be > 0 when present");
  if (num_slots <= 0) throw std::invalid_argument("campaign.num_slots: must be > 0");
  if (static_cast<int>(spending_plan.size()) != num_slots)
    throw std::invalid_argument("campaign.spending_plan: length must equal num_slots");
  Micros sum = 0;
  for (std::size_t i = 0; i < spending_plan.size(); ++i) {
    if (spending_plan[i] < 0)
      throw std::invalid_argument("campaign.spending_plan[" + std::to_string(i) +
                                  "]: must be >= 0");
    sum += spending_plan[i];
  }
  if (sum != budget)
    throw std::invalid_argument("campaign.spending_plan: must sum to the budget");
}

std::vector<Micros> even_plan(Micros budget, int num_slots) {
  std::vector<Micros> plan(num_slots);
  auto [share, extra] = floor_divmod(budget, num_slots);
  for (int t = 0; t < num_slots; ++t) plan[t] = share + (t < extra ? 1 : 0);
  return plan;
}

CampaignSpec make_campaign(std::string id, Micros budget, Micros cpm,
                           std::optional<Micros> ecpc_goal, int num_slots) {
  CampaignSpec spec;
  spec.id = std::move(id);
  spec.budget = budget;
  spec.cpm = cpm;
  spec.ecpc_goal = ecpc_goal;
  spec.num_slots = num_slots;
  spec.spending_plan = even_plan(budget, num_slots);
  spec.validate();
  return spec;
}

}  // namespace pacekit
