#include "pacekit/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace pacekit {

AggregateStore::AggregateStore(int num_buckets, int window_slots)
    : num_buckets_(num_buckets), window_slots_(std::max(window_slots, 1)) {}

void AggregateStore::apply(const Batch& batch) {
  if (batch.messages.empty()) throw std::invalid_argument("apply: empty batch");
  auto& expected = next_sequence_[batch.producer];
  if (expected == 0) expected = 1;
  const std::uint64_t first = batch.first_sequence();
  if (first < expected) return;  // duplicate delivery, already applied
  if (first > expected) {
    held_[batch.producer].emplace(first, batch);  // hold until the gap fills
    return;
  }
  apply_in_order(batch);
  expected = batch.last_sequence() + 1;

  // Release any held batches that are now contiguous.
  auto held = held_.find(batch.producer);
  while (held != held_.end()) {
    auto next = held->second.find(expected);
    if (next == held->second.end()) break;
    apply_in_order(next->second);
    expected = next->second.last_sequence() + 1;
    held->second.erase(next);
  }
}

void AggregateStore::apply_in_order(const Batch& batch) {
  for (const DeliveryMessage& message : batch.messages) {
    CampaignAgg& agg = campaigns_[message.campaign];
    if (agg.lifetime.empty()) agg.lifetime.assign(num_buckets_, Totals{});
    auto& rows = agg.recent[message.slot];
    if (rows.empty()) rows.assign(num_buckets_, Totals{});
    Totals& row = rows.at(message.bucket);
    row.spend += message.cost;
    row.impressions += message.impressions;
    row.clicks += message.clicks;
    Totals& life = agg.lifetime.at(message.bucket);
    life.spend += message.cost;
    life.impressions += message.impressions;
    life.clicks += message.clicks;
    Totals& slot_total = agg.per_slot[message.slot];
    slot_total.spend += message.cost;
    slot_total.impressions += message.impressions;
    slot_total.clicks += message.clicks;
    agg.total.spend += message.cost;
    agg.total.impressions += message.impressions;
    agg.total.clicks += message.clicks;
  }
}

Micros AggregateStore::spend(std::int32_t campaign) const {
  auto it = campaigns_.find(campaign);
  return it == campaigns_.end() ? 0 : it->second.total.spend;
}

Totals AggregateStore::total(std::int32_t campaign) const {
  auto it = campaigns_.find(campaign);
  return it == campaigns_.end() ? Totals{} : it->second.total;
}

std::vector<Micros> AggregateStore::per_slot_spend(std::int32_t campaign) const {
  auto it = campaigns_.find(campaign);
  if (it == campaigns_.end()) return {};
  int max_slot = 0;
  for (const auto& [slot, totals] : it->second.per_slot) max_slot = std::max(max_slot, slot);
  std::vector<Micros> spend(max_slot, 0);
  for (const auto& [slot, totals] : it->second.per_slot) spend[slot - 1] = totals.spend;
  return spend;
}

const std::vector<Totals>* AggregateStore::lifetime_buckets(std::int32_t campaign) const {
  auto it = campaigns_.find(campaign);
  return it == campaigns_.end() ? nullptr : &it->second.lifetime;
}

SlotReport AggregateStore::slot_report(std::int32_t campaign, int slot,
                                       std::span<const double> bucket_ctrs) const {
  SlotReport report;
  report.slot = slot;
  auto it = campaigns_.find(campaign);
  if (it == campaigns_.end()) return report;
  auto rows = it->second.recent.find(slot);
  if (rows == it->second.recent.end()) return report;
  for (int b = 0; b < static_cast<int>(rows->second.size()); ++b) {
    const Totals& row = rows->second[b];
    if (row.impressions == 0 && row.spend == 0) continue;
    report.buckets.push_back(BucketDelivery{bucket_ctrs[b], row.spend,
                                            row.impressions, row.clicks});
    report.spend += row.spend;
    report.impressions += row.impressions;
    report.clicks += row.clicks;
  }
  return report;
}

void AggregateStore::trim_window(int current_slot) {
  for (auto& [campaign, agg] : campaigns_) {
    for (auto it = agg.recent.begin(); it != agg.recent.end();) {
      if (it->first <= current_slot - window_slots_)
        it = agg.recent.erase(it);
      else
        ++it;
    }
  }
}

std::uint64_t AggregateStore::applied_through(int producer) const {
  auto it = next_sequence_.find(producer);
  return it == next_sequence_.end() || it->second == 0 ? 0 : it->second - 1;
}

bool AggregateStore::has_held_batches() const {
  for (const auto& [producer, held] : held_)
    if (!held.empty()) return true;
  return false;
}

bool AggregateStore::operator==(const AggregateStore& other) const {
  auto next_of = [](const std::map<int, std::uint64_t>& m) {
    std::map<int, std::uint64_t> cleaned;
    for (const auto& [producer, seq] : m)
      if (seq > 1) cleaned.emplace(producer, seq);
    return cleaned;
  };
  return num_buckets_ == other.num_buckets_ && window_slots_ == other.window_slots_ &&
         campaigns_ == other.campaigns_ && next_of(next_sequence_) == next_of(other.next_sequence_);
}

AggregateStore recover(const AggregateStore& snapshot, std::span<const Batch> log_tail) {
  AggregateStore restored = snapshot;
  for (const Batch& batch : log_tail) restored.apply(batch);
  if (restored.has_held_batches())
    throw std::runtime_error("recover: missing log segment, state unrecoverable");
  return restored;
}

void MessageQueue::publish(Batch batch) {
  std::lock_guard lock(mu_);
  log_.push_back(std::move(batch));
}

int MessageQueue::drain_due(std::int64_t now,
                            const std::function<void(const Batch&)>& consume) {
  std::lock_guard lock(mu_);
  int delivered = 0;
  while (next_undelivered_ < log_.size() &&
         log_[next_undelivered_].created_tick + delay_ticks_ <= now) {
    consume(log_[next_undelivered_]);
    ++next_undelivered_;
    ++delivered;
  }
  return delivered;
}

int MessageQueue::drain_all(const std::function<void(const Batch&)>& consume) {
  std::lock_guard lock(mu_);
  int delivered = 0;
  while (next_undelivered_ < log_.size()) {
    consume(log_[next_undelivered_]);
    ++next_undelivered_;
    ++delivered;
  }
  return delivered;
}

std::int64_t MessageQueue::next_due() const {
  std::lock_guard lock(mu_);
  if (next_undelivered_ >= log_.size()) return std::numeric_limits<std::int64_t>::max();
  return log_[next_undelivered_].created_tick + delay_ticks_;
}

std::vector<Batch> MessageQueue::log_copy() const {
  std::lock_guard lock(mu_);
  return log_;
}

std::size_t MessageQueue::published() const {
  std::lock_guard lock(mu_);
  return log_.size();
}

DeliveryProducer::DeliveryProducer(int id, const PipelineConfig& cfg, MessageQueue* queue)
    : id_(id), cfg_(cfg), queue_(queue) {}

void DeliveryProducer::record(std::int32_t campaign, int slot, int bucket, Micros cost,
                              bool clicked, std::int64_t now) {
  if (window_open_tick_ < 0) window_open_tick_ = now;
  if (cfg_.micro_aggregation) {
    DeliveryMessage& message = pending_agg_[{campaign, slot, bucket}];
    message.campaign = campaign;
    message.slot = slot;
    message.bucket = bucket;
    message.cost += cost;
    message.impressions += 1;
    message.clicks += clicked ? 1 : 0;
  } else {
    pending_raw_.push_back(DeliveryMessage{campaign, slot, bucket, cost,
                                           1, clicked ? 1 : 0, 0});
  }
  ++pending_events_;
  std::int64_t pending_messages = cfg_.micro_aggregation
                                      ? static_cast<std::int64_t>(pending_agg_.size())
                                      : static_cast<std::int64_t>(pending_raw_.size());
  if (pending_messages >= cfg_.max_batch_size) flush(now);
}

void DeliveryProducer::maybe_flush(std::int64_t now) {
  if (window_open_tick_ < 0) return;
  if (now - window_open_tick_ >= cfg_.flush_ticks) flush(now);
}

void DeliveryProducer::flush(std::int64_t now) {
  std::vector<DeliveryMessage> messages;
  if (cfg_.micro_aggregation) {
    messages.reserve(pending_agg_.size());
    for (auto& [key, message] : pending_agg_) messages.push_back(message);
    pending_agg_.clear();
  } else {
    messages = std::move(pending_raw_);
    pending_raw_.clear();
  }
  pending_events_ = 0;
  window_open_tick_ = -1;
  if (messages.empty()) return;

  for (auto& message : messages) message.sequence = next_sequence_++;
  std::size_t offset = 0;
  while (offset < messages.size()) {
    std::size_t len = std::min<std::size_t>(cfg_.max_batch_size, messages.size() - offset);
    Batch batch;
    batch.producer = id_;
    batch.created_tick = now;
    batch.messages.assign(messages.begin() + offset, messages.begin() + offset + len);
    queue_->publish(std::move(batch));
    offset += len;
  }
}

std::vector<int> BidderRegistry::push_rates(const RateTable& table) {
  std::vector<int> failed;
  for (int i = 0; i < count(); ++i) {
    BidderView& bidder = bidders_[i];
    if (bidder.pending_push_failures > 0) {
      --bidder.pending_push_failures;
      failed.push_back(i);  // old table stays active on this bidder
      continue;
    }
    bool stopped = bidder.stopped;
    bidder.table = table;
    bidder.stopped = stopped || table.stopped;
  }
  return failed;
}

std::vector<int> BidderRegistry::push_stop(const QuickStopNotice&) {
  std::vector<int> failed;
  for (auto& bidder : bidders_) bidder.stopped = true;
  return failed;
}

void BidderRegistry::inject_push_failure(int bidder, int failures) {
  bidders_.at(bidder).pending_push_failures = failures;
}

std::optional<QuickStopNotice> check_quick_stop(const AggregateStore& store,
                                                std::int32_t campaign, Micros budget,
                                                bool already_issued, std::int64_t now) {
  if (already_issued) return std::nullopt;
  if (store.spend(campaign) < budget) return std::nullopt;
  return QuickStopNotice{campaign, now};
}

FeedbackPipeline::FeedbackPipeline(const PipelineConfig& cfg, std::int32_t campaign,
                                   Micros budget, int num_buckets,
                                   std::vector<double> bucket_ctrs, int num_bidders,
                                   int num_producers)
    : cfg_(cfg),
      campaign_(campaign),
      budget_(budget),
      bucket_ctrs_(std::move(bucket_ctrs)),
      queue_(cfg.delivery_delay_ticks),
      store_(num_buckets),
      bidders_(num_bidders) {
  producers_.reserve(num_producers);
  for (int i = 0; i < num_producers; ++i) producers_.emplace_back(i, cfg_, &queue_);
}

void FeedbackPipeline::open_event_log(const std::string& path) {
  event_log_path_ = path;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);  // start fresh
}

void FeedbackPipeline::consume(const Batch& batch) {
  store_.apply(batch);
  if (!event_log_path_.empty()) {
    std::ofstream out(event_log_path_, std::ios::binary | std::ios::app);
    for (const DeliveryMessage& m : batch.messages) {
      // Fixed 36-byte record: campaign, slot, bucket, cost, imps, clicks, seq.
      char record[36];
      std::memcpy(record + 0, &m.campaign, 4);
      std::memcpy(record + 4, &m.slot, 4);
      std::memcpy(record + 8, &m.bucket, 4);
      std::memcpy(record + 12, &m.cost, 8);
      std::memcpy(record + 20, &m.impressions, 4);
      std::memcpy(record + 24, &m.clicks, 4);
      std::memcpy(record + 28, &m.sequence, 8);
      out.write(record, sizeof(record));
    }
  }
}

void FeedbackPipeline::check_quick_stop(std::int64_t now) {
  auto notice =
      pacekit::check_quick_stop(store_, campaign_, budget_, stop_notice_.has_value(), now);
  if (notice) {
    stop_notice_ = notice;
    bidders_.push_stop(*notice);  // synchronous: all bidders acknowledge
  }
}

void FeedbackPipeline::advance(std::int64_t now) {
  now_ = now;
  for (auto& producer : producers_) producer.maybe_flush(now);
  if (queue_.next_due() <= now) {
    queue_.drain_due(now, [this](const Batch& batch) { consume(batch); });
    check_quick_stop(now);
  }
  if (cfg_.snapshot_every_ticks > 0 && now - last_snapshot_tick_ >= cfg_.snapshot_every_ticks) {
    snapshots_.emplace_back(now, store_);
    last_snapshot_tick_ = now;
  }
}

SlotReport FeedbackPipeline::close_slot(int slot, std::int64_t now) {
  for (auto& producer : producers_) producer.flush(now);
  queue_.drain_due(now, [this](const Batch& batch) { consume(batch); });
  check_quick_stop(now);
  SlotReport report = store_.slot_report(campaign_, slot, bucket_ctrs_);
  store_.trim_window(slot);
  return report;
}

void FeedbackPipeline::drain_all(std::int64_t now) {
  for (auto& producer : producers_) producer.flush(now);
  queue_.drain_all([this](const Batch& batch) { consume(batch); });
  check_quick_stop(now);
}

std::vector<int> FeedbackPipeline::push_rates(const RateTable& table) {
  return bidders_.push_rates(table);
}

}  // namespace pacekit
