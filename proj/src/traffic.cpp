#include "pacekit/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pacekit {

void TrafficModel::validate() const {
  if (slot_weights.empty())
    throw std::invalid_argument("traffic.slot_weights: must not be empty");
  double weight_sum = 0.0;
  for (double w : slot_weights) {
    if (w < 0.0) throw std::invalid_argument("traffic.slot_weights: negative weight");
    weight_sum += w;
  }
  if (!(weight_sum > 0.0))
    throw std::invalid_argument("traffic.slot_weights: weights sum to zero");
  if (total_requests < 0)
    throw std::invalid_argument("traffic.total_requests: must be >= 0");
  if (ctr_histogram.empty())
    throw std::invalid_argument("traffic.ctr_histogram: must not be empty");
  double mass = 0.0;
  double prev = 0.0;
  for (const auto& [ctr, p] : ctr_histogram) {
    if (!(ctr > 0.0) || ctr >= 1.0)
      throw std::invalid_argument("traffic.ctr_histogram: ctr values must be in (0,1)");
    if (ctr <= prev)
      throw std::invalid_argument("traffic.ctr_histogram: ctr values must be ascending");
    if (p < 0.0) throw std::invalid_argument("traffic.ctr_histogram: negative mass");
    prev = ctr;
    mass += p;
  }
  if (std::abs(mass - 1.0) > 1e-9)
    throw std::invalid_argument("traffic.ctr_histogram: masses must sum to 1");
  if (win_rate_curve.empty())
    throw std::invalid_argument("traffic.win_rate_curve: must not be empty");
  prev = 0.0;
  for (std::size_t i = 0; i < win_rate_curve.size(); ++i) {
    const auto& [ctr, w] = win_rate_curve[i];
    if (i > 0 && ctr <= prev)
      throw std::invalid_argument("traffic.win_rate_curve: ctr values must be ascending");
    if (w < 0.0 || w > 1.0)
      throw std::invalid_argument("traffic.win_rate_curve: win rates must be in [0,1]");
    prev = ctr;
  }
}

double TrafficModel::win_rate(double ctr) const {
  const auto& curve = win_rate_curve;
  if (ctr <= curve.front().first) return curve.front().second;
  if (ctr >= curve.back().first) return curve.back().second;
  auto it = std::upper_bound(curve.begin(), curve.end(), ctr,
                             [](double v, const auto& p) { return v < p.first; });
  const auto& [x1, y1] = *(it - 1);
  const auto& [x2, y2] = *it;
  double t = (ctr - x1) / (x2 - x1);
  return y1 + t * (y2 - y1);
}

std::vector<std::int64_t> slot_request_counts(const TrafficModel& model) {
  const std::size_t slots = model.slot_weights.size();
  double weight_sum = std::accumulate(model.slot_weights.begin(),
                                      model.slot_weights.end(), 0.0);
  std::vector<std::int64_t> counts(slots, 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  remainders.reserve(slots);
  std::int64_t assigned = 0;
  for (std::size_t t = 0; t < slots; ++t) {
    double exact = static_cast<double>(model.total_requests) * model.slot_weights[t] /
                   weight_sum;
    counts[t] = static_cast<std::int64_t>(std::floor(exact));
    assigned += counts[t];
    remainders.emplace_back(exact - std::floor(exact), t);
  }
  // Largest remainder first; ties go to the earlier slot.
  std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (std::int64_t i = 0; i < model.total_requests - assigned; ++i)
    counts[remainders[static_cast<std::size_t>(i)].second] += 1;
  return counts;
}

std::vector<double> cumulative_ctr_mass(const TrafficModel& model) {
  std::vector<double> cumulative;
  cumulative.reserve(model.ctr_histogram.size());
  double sum = 0.0;
  for (const auto& [ctr, mass] : model.ctr_histogram) {
    sum += mass;
    cumulative.push_back(sum);
  }
  cumulative.back() = 1.0;
  return cumulative;
}

int sample_bucket(std::span<const double> cumulative_mass, double u) {
  auto it = std::upper_bound(cumulative_mass.begin(), cumulative_mass.end(), u);
  if (it == cumulative_mass.end()) --it;
  return static_cast<int>(it - cumulative_mass.begin());
}

std::vector<AdRequest> generate_slot(const TrafficModel& model, int slot, Rng& ctr_rng,
                                     std::int64_t sequence_start) {
  auto counts = slot_request_counts(model);
  if (slot < 1 || slot > static_cast<int>(counts.size()))
    throw std::invalid_argument("generate_slot: slot out of range");
  auto cumulative = cumulative_ctr_mass(model);
  std::vector<AdRequest> requests;
  requests.reserve(static_cast<std::size_t>(counts[slot - 1]));
  for (std::int64_t i = 0; i < counts[slot - 1]; ++i) {
    int bucket = sample_bucket(cumulative, ctr_rng.next_unit());
    requests.push_back(AdRequest{slot, model.ctr_histogram[bucket].first,
                                 sequence_start + i});
  }
  return requests;
}

std::vector<double> default_day_weights(int num_slots) {
  if (num_slots <= 0) throw std::invalid_argument("default_day_weights: bad slot count");
  std::vector<double> weights(num_slots);
  for (int t = 0; t < num_slots; ++t) {
    double f = (static_cast<double>(t) + 0.5) / static_cast<double>(num_slots);
    double midday = std::exp(-std::pow((f - 0.56) / 0.16, 2));
    double evening = std::exp(-std::pow((f - 0.85) / 0.09, 2));
    double overnight_dip = 0.22 * std::exp(-std::pow((f - 0.13) / 0.10, 2));
    weights[t] = 0.32 + 0.95 * midday + 0.55 * evening - overnight_dip;
  }
  return weights;
}

std::vector<std::pair<double, double>> default_ctr_histogram() {
  // Log-normal-ish mass over a geometric grid. The grid is deliberately fine
  // (360 support points) so even very deep layerings see distinct values.
  constexpr int kPoints = 360;
  constexpr double kLo = 1.5e-4;
  constexpr double kHi = 6.0e-2;
  constexpr double kLogMedian = -6.645;  // ln(0.0013)
  constexpr double kLogSigma = 1.15;
  std::vector<std::pair<double, double>> histogram;
  histogram.reserve(kPoints);
  double log_lo = std::log(kLo), log_hi = std::log(kHi);
  double total = 0.0;
  for (int i = 0; i < kPoints; ++i) {
    double log_ctr = log_lo + (log_hi - log_lo) * (i + 0.5) / kPoints;
    double z = (log_ctr - kLogMedian) / kLogSigma;
    double mass = std::exp(-0.5 * z * z);
    histogram.emplace_back(std::exp(log_ctr), mass);
    total += mass;
  }
  for (auto& [ctr, mass] : histogram) mass /= total;
  return histogram;
}

std::vector<std::pair<double, double>> default_win_rate_curve() {
  // Win rate rising with predicted CTR, log-linear between the endpoints.
  constexpr int kPoints = 17;
  constexpr double kLo = 1.5e-4;
  constexpr double kHi = 6.0e-2;
  constexpr double kWinLo = 0.10;
  constexpr double kWinHi = 0.42;
  std::vector<std::pair<double, double>> curve;
  curve.reserve(kPoints);
  double log_lo = std::log(kLo), log_hi = std::log(kHi);
  for (int i = 0; i < kPoints; ++i) {
    double log_ctr = log_lo + (log_hi - log_lo) * i / (kPoints - 1);
    double t = static_cast<double>(i) / (kPoints - 1);
    curve.emplace_back(std::exp(log_ctr), kWinLo + (kWinHi - kWinLo) * t);
  }
  return curve;
}

}  // namespace pacekit
