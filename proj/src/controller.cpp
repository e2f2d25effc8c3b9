#include "pacekit/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pacekit/pacing_math.hpp"

namespace pacekit {

namespace {

constexpr double kRateSlack = 1e-12;

// Algorithm step shared by both adjusters: the layer directly below the
// lowest open layer gets a trial rate, provided that would not invert the
// ordering.
void maybe_assign_trial(std::vector<double>& rates, int open_layer,
                        const TrialRateFn& trial, std::optional<int>& marker) {
  if (open_layer <= 0) return;
  double t = trial(open_layer - 1);
  if (rates[open_layer] > t) {
    rates[open_layer - 1] = t;
    marker = open_layer - 1;
  }
}

}  // namespace

std::vector<double> PacingState::rates() const {
  std::vector<double> out;
  out.reserve(layers.size());
  for (const auto& layer : layers) out.push_back(layer.pacing_rate);
  return out;
}

bool PacingState::all_rates_zero() const {
  for (const auto& layer : layers)
    if (layer.pacing_rate > 0.0) return false;
  return true;
}

void PacingState::check_invariants() const {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    double r = layers[l].pacing_rate;
    if (!(r >= 0.0 && r <= 1.0))
      throw std::logic_error("pacing rate out of [0,1] at layer " + std::to_string(l));
    if (l > 0 && layers[l].pacing_rate + kRateSlack < layers[l - 1].pacing_rate)
      throw std::logic_error("pacing rates not monotone at layer " + std::to_string(l));
  }
  for (std::size_t i = 1; i < boundaries.size(); ++i)
    if (!(boundaries[i - 1] < boundaries[i]))
      throw std::logic_error("layer boundaries not strictly increasing");
}

int default_num_layers(double global_init_rate) {
  if (!(global_init_rate > 0.0) || global_init_rate > 1.0)
    throw std::invalid_argument("default_num_layers: rate must be in (0,1]");
  return static_cast<int>(std::ceil(1.0 / global_init_rate));
}

std::vector<double> derive_boundaries(std::vector<double> observed_rates, int num_layers) {
  if (observed_rates.empty())
    throw std::invalid_argument("derive_boundaries: no observations");
  if (num_layers < 1) throw std::invalid_argument("derive_boundaries: num_layers < 1");
  if (num_layers == 1) return {};
  std::sort(observed_rates.begin(), observed_rates.end());
  const std::int64_t n = static_cast<std::int64_t>(observed_rates.size());
  std::vector<double> cuts;
  for (int k = 1; k < num_layers; ++k) {
    double v = observed_rates[static_cast<std::size_t>((k * n) / num_layers)];
    if (cuts.empty() || v > cuts.back()) cuts.push_back(v);  // merge duplicates
  }
  return cuts;
}

std::vector<double> derive_boundaries_weighted(
    std::span<const std::pair<double, std::int64_t>> rate_counts, int num_layers) {
  if (num_layers < 1)
    throw std::invalid_argument("derive_boundaries_weighted: num_layers < 1");
  std::int64_t n = 0;
  for (const auto& [value, count] : rate_counts) n += count;
  if (n <= 0) throw std::invalid_argument("derive_boundaries_weighted: no observations");
  if (num_layers == 1) return {};
  std::vector<double> cuts;
  for (int k = 1; k < num_layers; ++k) {
    std::int64_t target = (k * n) / num_layers;  // index into the expanded list
    std::int64_t cum = 0;
    for (const auto& [value, count] : rate_counts) {
      cum += count;
      if (cum > target) {
        if (cuts.empty() || value > cuts.back()) cuts.push_back(value);
        break;
      }
    }
  }
  return cuts;
}

int classify(double ctr, std::span<const double> boundaries) {
  auto it = std::upper_bound(boundaries.begin(), boundaries.end(), ctr);
  int below_or_equal = static_cast<int>(boundaries.end() - it);
  return static_cast<int>(boundaries.size()) - below_or_equal;
}

double trial_rate(Micros hist_spend, double hist_rate, Micros next_slot_target,
                  double lambda, double fallback_rate) {
  if (hist_spend <= 0 || hist_rate <= 0.0)
    return std::clamp(fallback_rate, 0.0, 1.0);
  double t = hist_rate * (lambda * static_cast<double>(next_slot_target)) /
             static_cast<double>(hist_spend);
  return std::clamp(t, 0.0, 1.0);
}

AdjustResult adjust_without_goal(std::span<const Micros> spend,
                                 std::span<const double> rates, Micros residual,
                                 const TrialRateFn& trial) {
  if (spend.size() != rates.size())
    throw std::invalid_argument("adjust_without_goal: spend/rates length mismatch");
  const int num_layers = static_cast<int>(rates.size());
  AdjustResult result{std::vector<double>(rates.begin(), rates.end()), std::nullopt};
  if (residual == 0) return result;

  int lowest_open = -1;
  for (int l = 0; l < num_layers; ++l) {
    if (rates[l] > 0.0) {
      lowest_open = l;
      break;
    }
  }
  if (lowest_open < 0) return result;  // dead state; the reset rule handles it

  auto& out = result.rates;
  double r_left = static_cast<double>(residual);

  if (residual > 0) {
    // Speed up: raise rates top-down, each layer absorbing as much of the
    // residual as its extrapolated spend allows.
    for (int l = num_layers - 1; l >= lowest_open; --l) {
      if (spend[l] <= 0 || rates[l] <= 0.0) continue;  // no spend basis to scale
      double c = static_cast<double>(spend[l]);
      double next = std::min(1.0, rates[l] * (c + r_left) / c);
      r_left -= c * (next - rates[l]) / rates[l];
      out[l] = next;
    }
    maybe_assign_trial(out, lowest_open, trial, result.trial_layer);
  } else {
    // Slow down: reduce rates bottom-up until the residual is offset.
    int stopped_at = -1;
    for (int l = lowest_open; l < num_layers; ++l) {
      if (spend[l] <= 0 || rates[l] <= 0.0) continue;
      double c = static_cast<double>(spend[l]);
      double next = std::max(0.0, rates[l] * (c + r_left) / c);
      r_left -= c * (next - rates[l]) / rates[l];
      out[l] = next;
      if (r_left >= 0) {
        stopped_at = l;
        break;
      }
    }
    if (stopped_at > 0) maybe_assign_trial(out, stopped_at, trial, result.trial_layer);
  }
  return result;
}

double exp_perf(std::span<const Micros> spend, std::span<const double> rates_prev,
                std::span<const double> rates_next, std::span<const double> ecpc,
                int from_layer) {
  const int num_layers = static_cast<int>(spend.size());
  double projected_spend = 0.0;
  double projected_responses = 0.0;
  for (int j = std::max(from_layer, 0); j < num_layers; ++j) {
    if (rates_prev[j] <= 0.0) continue;  // no extrapolation basis
    double w = static_cast<double>(spend[j]) * rates_next[j] / rates_prev[j];
    projected_spend += w;
    projected_responses += w / ecpc[j];
  }
  if (projected_responses <= 0.0) return std::numeric_limits<double>::infinity();
  return projected_spend / projected_responses;
}

AdjustResult adjust_with_goal(std::span<const Micros> spend,
                              std::span<const double> rates_prev, Micros residual,
                              std::span<const double> ecpc, Micros goal,
                              const TrialRateFn& trial) {
  AdjustResult result = adjust_without_goal(spend, rates_prev, residual, trial);
  const int num_layers = static_cast<int>(rates_prev.size());
  const double goal_value = static_cast<double>(goal);
  auto& out = result.rates;

  if (!(exp_perf(spend, rates_prev, out, ecpc, 0) > goal_value)) return result;

  result.trial_layer.reset();
  for (int l = 0; l < num_layers; ++l) {
    if (exp_perf(spend, rates_prev, out, ecpc, l + 1) > goal_value) {
      out[l] = 0.0;
      continue;
    }
    // Marginal layer: scale it so the joint projection lands on the goal,
    // against the upper layers' already-adjusted rates. A layer whose eCPC
    // does not exceed the goal cannot hurt it; leave such a layer alone.
    if (spend[l] > 0 && rates_prev[l] > 0.0) {
      double upper_slack = 0.0;
      for (int i = l + 1; i < num_layers; ++i) {
        if (rates_prev[i] <= 0.0) continue;
        upper_slack += static_cast<double>(spend[i]) * (out[i] / rates_prev[i]) *
                       (goal_value / ecpc[i] - 1.0);
      }
      double cost_of_self = static_cast<double>(spend[l]) * (1.0 - goal_value / ecpc[l]);
      if (cost_of_self > 0.0)
        out[l] = std::clamp(rates_prev[l] * upper_slack / cost_of_self, 0.0, 1.0);
    }
    maybe_assign_trial(out, l, trial, result.trial_layer);
    break;
  }
  return result;
}

void reset_if_dead(PacingState& state, const TrialRateFn& trial) {
  if (!state.all_rates_zero() || state.layers.empty()) return;
  int top = state.num_layers() - 1;
  state.layers[top].pacing_rate = trial(top);
  state.trial_layer = top;
}

void enforce_monotonic(std::vector<double>& rates, std::span<const Micros> spend) {
  const int num_layers = static_cast<int>(rates.size());
  // Zero-spend layers first: their rate encodes no residual information, so
  // lifting them is free.
  for (int l = 1; l < num_layers; ++l)
    if (spend[l] <= 0 && rates[l] < rates[l - 1]) rates[l] = rates[l - 1];
  for (int l = num_layers - 2; l >= 0; --l)
    if (rates[l] > rates[l + 1]) rates[l] = rates[l + 1];
}

LayeredController::LayeredController(CampaignSpec spec, ControllerConfig cfg)
    : spec_(std::move(spec)), cfg_(cfg) {
  spec_.validate();
  if (!(cfg_.global_init_rate > 0.0) || cfg_.global_init_rate > 1.0)
    throw std::invalid_argument("controller.global_init_rate: must be in (0,1]");
  if (!(cfg_.trial_budget_fraction > 0.0) || cfg_.trial_budget_fraction >= 1.0)
    throw std::invalid_argument("controller.trial_budget_fraction: must be in (0,1)");
  int layers = cfg_.num_layers > 0 ? cfg_.num_layers
                                   : default_num_layers(cfg_.global_init_rate);
  state_.layers.assign(layers, LayerState{});
  for (auto& layer : state_.layers) layer.pacing_rate = cfg_.global_init_rate;
  state_.remaining_budget = spec_.budget;
  state_.slot_index = 1;
  current_target_ = spec_.spending_plan.empty() ? 0 : spec_.spending_plan.front();
}

RateTable LayeredController::initial_table() const {
  RateTable table;
  table.rates = {cfg_.global_init_rate};  // one bucket until boundaries exist
  return table;
}

RateTable LayeredController::table() const {
  RateTable t;
  if (state_.initialized) {
    t.boundaries = state_.boundaries;
    t.rates = state_.rates();
  } else {
    t.rates = {cfg_.global_init_rate};
  }
  return t;
}

TrialRateFn LayeredController::trial_fn(Micros next_target) const {
  return [this, next_target](int layer) {
    const LayerState& ls = state_.layers[layer];
    return trial_rate(ls.hist_spend, ls.hist_rate, next_target,
                      cfg_.trial_budget_fraction, cfg_.global_init_rate);
  };
}

void LayeredController::ingest_report(const SlotReport& report) {
  for (auto& layer : state_.layers) layer.last_slot_spend = 0;
  for (const auto& bucket : report.buckets) {
    int l = classify(bucket.predicted_ctr, state_.boundaries);
    LayerState& layer = state_.layers[l];
    layer.last_slot_spend += bucket.spend;
    layer.ctr_weight += bucket.predicted_ctr * static_cast<double>(bucket.impressions);
    layer.impressions += bucket.impressions;
  }
  for (auto& layer : state_.layers) {
    if (layer.impressions > 0) {
      layer.response_rate = layer.ctr_weight / static_cast<double>(layer.impressions);
      layer.ecpc_estimate =
          static_cast<double>(spec_.cost_per_impression()) / layer.response_rate;
    }
    if (layer.pacing_rate > 0.0 && layer.last_slot_spend > 0) {
      layer.hist_spend = layer.last_slot_spend;
      layer.hist_rate = layer.pacing_rate;
    }
  }
}

void LayeredController::derive_layers_from_init(const SlotReport& report,
                                                Micros next_target) {
  if (report.impressions <= 0) return;  // no data yet, stay in the init phase

  std::vector<std::pair<double, std::int64_t>> observed;
  observed.reserve(report.buckets.size());
  double min_seen = 1.0, max_seen = 0.0;
  for (const auto& bucket : report.buckets) {
    if (bucket.impressions <= 0) continue;
    observed.emplace_back(bucket.predicted_ctr, bucket.impressions);
    min_seen = std::min(min_seen, bucket.predicted_ctr);
    max_seen = std::max(max_seen, bucket.predicted_ctr);
  }
  int requested_layers =
      cfg_.num_layers > 0 ? cfg_.num_layers : default_num_layers(cfg_.global_init_rate);
  state_.boundaries = derive_boundaries_weighted(observed, requested_layers);
  const int effective = static_cast<int>(state_.boundaries.size()) + 1;
  state_.layers.assign(effective, LayerState{});

  // Attribute the initialization slot to the fresh layers.
  for (const auto& bucket : report.buckets) {
    int l = classify(bucket.predicted_ctr, state_.boundaries);
    LayerState& layer = state_.layers[l];
    layer.last_slot_spend += bucket.spend;
    layer.ctr_weight += bucket.predicted_ctr * static_cast<double>(bucket.impressions);
    layer.impressions += bucket.impressions;
  }
  for (int l = 0; l < effective; ++l) {
    LayerState& layer = state_.layers[l];
    if (layer.impressions > 0) {
      layer.response_rate = layer.ctr_weight / static_cast<double>(layer.impressions);
    } else {
      // Never-delivered layer: midpoint of its boundary interval as a prior.
      double lo = l == 0 ? min_seen : state_.boundaries[l - 1];
      double hi = l == effective - 1 ? max_seen : state_.boundaries[l];
      layer.response_rate = std::clamp((lo + hi) / 2.0, 1e-12, 1.0);
    }
    layer.ecpc_estimate =
        static_cast<double>(spec_.cost_per_impression()) / layer.response_rate;
    if (layer.last_slot_spend > 0) {
      layer.hist_spend = layer.last_slot_spend;
      layer.hist_rate = cfg_.global_init_rate;
    }
  }

  // Reassign rates for the coming slot: full rate top-down while the
  // extrapolated spend fits the target, a fractional rate on the marginal
  // layer, zero below.
  double budget_left = static_cast<double>(next_target);
  for (int l = effective - 1; l >= 0; --l) {
    LayerState& layer = state_.layers[l];
    double full_spend =
        static_cast<double>(layer.last_slot_spend) / cfg_.global_init_rate;
    if (budget_left <= 0.0) {
      layer.pacing_rate = 0.0;
    } else if (full_spend <= 0.0) {
      layer.pacing_rate = 1.0;  // no data, no projected cost; keep it open
    } else if (full_spend <= budget_left) {
      layer.pacing_rate = 1.0;
      budget_left -= full_spend;
    } else {
      layer.pacing_rate = budget_left / full_spend;
      budget_left = 0.0;
    }
  }

  state_.trial_layer.reset();
  auto trial = trial_fn(next_target);
  if (state_.all_rates_zero()) {
    reset_if_dead(state_, trial);
  } else {
    int lowest_open = 0;
    while (state_.layers[lowest_open].pacing_rate <= 0.0) ++lowest_open;
    std::vector<double> rates = state_.rates();
    std::optional<int> marker;
    maybe_assign_trial(rates, lowest_open, trial, marker);
    for (int l = 0; l < effective; ++l) state_.layers[l].pacing_rate = rates[l];
    state_.trial_layer = marker;
  }
  state_.initialized = true;
}

RateTable LayeredController::on_slot_end(const SlotReport& report, bool quick_stopped) {
  const int finished_slot = report.slot;
  state_.remaining_budget -= report.spend;
  Micros available = std::max<Micros>(state_.remaining_budget, 0);

  if (finished_slot >= spec_.num_slots) {
    // Day over: nothing left to plan.
    current_target_ = 0;
    if (quick_stopped)
      for (auto& layer : state_.layers) layer.pacing_rate = 0.0;
    state_.slot_index = finished_slot + 1;
    return table();
  }

  Micros target = std::max<Micros>(replan(spec_, finished_slot, available).front(), 0);
  current_target_ = target;

  if (!state_.initialized) {
    derive_layers_from_init(report, target);
    if (quick_stopped)
      for (auto& layer : state_.layers) layer.pacing_rate = 0.0;
    state_.slot_index = finished_slot + 1;
    state_.check_invariants();
    return table();
  }

  ingest_report(report);
  auto trial = trial_fn(target);
  Micros r = residual(target, report.spend);

  std::vector<Micros> spend(state_.layers.size());
  for (std::size_t l = 0; l < state_.layers.size(); ++l)
    spend[l] = state_.layers[l].last_slot_spend;
  std::vector<double> prev_rates = state_.rates();

  AdjustResult adjusted;
  if (spec_.ecpc_goal) {
    std::vector<double> ecpc(state_.layers.size());
    for (std::size_t l = 0; l < state_.layers.size(); ++l)
      ecpc[l] = state_.layers[l].ecpc_estimate;
    adjusted = adjust_with_goal(spend, prev_rates, r, ecpc, *spec_.ecpc_goal, trial);
  } else {
    adjusted = adjust_without_goal(spend, prev_rates, r, trial);
  }

  enforce_monotonic(adjusted.rates, spend);
  for (std::size_t l = 0; l < state_.layers.size(); ++l)
    state_.layers[l].pacing_rate = adjusted.rates[l];
  state_.trial_layer = adjusted.trial_layer;

  if (quick_stopped) {
    // The budget is gone; keep everything closed, no re-probing.
    for (auto& layer : state_.layers) layer.pacing_rate = 0.0;
  } else {
    reset_if_dead(state_, trial);
  }

  state_.slot_index = finished_slot + 1;
  state_.check_invariants();
  return table();
}

}  // namespace pacekit
