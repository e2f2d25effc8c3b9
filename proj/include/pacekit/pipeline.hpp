#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pacekit/money.hpp"
#include "pacekit/report.hpp"

namespace pacekit {

// In-process simulation of the serving feedback loop: an asynchronous,
// lossless delivery-message queue with batching and micro-aggregation feeding
// an in-memory aggregate store, plus synchronous rate/quick-stop distribution
// to bidders. Time is a virtual tick counter supplied by the driver, so runs
// are deterministic; no sockets.
struct PipelineConfig {
  int max_batch_size = 500;
  std::int64_t flush_ticks = 256;          // producer batch window
  std::int64_t delivery_delay_ticks = 0;   // queue transit time
  bool micro_aggregation = true;
  std::int64_t snapshot_every_ticks = 0;   // 0 = snapshots only on demand
};

struct DeliveryMessage {
  std::int32_t campaign = 0;
  std::int32_t slot = 0;
  std::int32_t bucket = 0;  // predicted-response-rate bucket
  Micros cost = 0;
  std::int32_t impressions = 0;
  std::int32_t clicks = 0;
  std::uint64_t sequence = 0;  // strictly increasing per producer

  bool operator==(const DeliveryMessage&) const = default;
};

struct Batch {
  int producer = 0;
  std::int64_t created_tick = 0;
  std::vector<DeliveryMessage> messages;  // never empty, size <= max_batch_size

  std::uint64_t first_sequence() const { return messages.front().sequence; }
  std::uint64_t last_sequence() const { return messages.back().sequence; }
};

struct Totals {
  Micros spend = 0;
  std::int64_t impressions = 0;
  std::int64_t clicks = 0;

  bool operator==(const Totals&) const = default;
};

// Per-campaign aggregates: raw per-bucket rows for the recent slot window,
// aggregated history beyond it, and per-producer sequence tracking. Duplicate
// batches are ignored; a sequence gap holds the batch until the gap fills, so
// replaying the commit log from any snapshot reproduces the store exactly.
class AggregateStore {
 public:
  AggregateStore() = default;
  explicit AggregateStore(int num_buckets, int window_slots = 1);

  void apply(const Batch& batch);

  Micros spend(std::int32_t campaign) const;
  Totals total(std::int32_t campaign) const;
  std::vector<Micros> per_slot_spend(std::int32_t campaign) const;
  const std::vector<Totals>* lifetime_buckets(std::int32_t campaign) const;

  // Report for one slot from the raw window. bucket_ctrs maps bucket index to
  // its predicted response rate; buckets with no deliveries are omitted.
  SlotReport slot_report(std::int32_t campaign, int slot,
                         std::span<const double> bucket_ctrs) const;

  std::uint64_t applied_through(int producer) const;
  bool has_held_batches() const;

  bool operator==(const AggregateStore& other) const;

 private:
  void apply_in_order(const Batch& batch);

  struct CampaignAgg {
    std::map<int, std::vector<Totals>> recent;  // slot -> per-bucket rows
    std::vector<Totals> lifetime;               // per-bucket, whole campaign
    std::map<int, Totals> per_slot;
    Totals total;
    int max_slot = 0;  // drives window trimming; a pure function of the feed

    bool operator==(const CampaignAgg&) const = default;
  };

  int num_buckets_ = 0;
  int window_slots_ = 1;
  std::map<std::int32_t, CampaignAgg> campaigns_;
  std::map<int, std::uint64_t> next_sequence_;          // per producer
  std::map<int, std::map<std::uint64_t, Batch>> held_;  // gap buffer
};

// Snapshot + commit-log recovery: start from the snapshot copy and replay the
// retained queue log; already-applied sequences are skipped idempotently.
// Throws std::runtime_error if the tail leaves an unfillable gap.
AggregateStore recover(const AggregateStore& snapshot, std::span<const Batch> log_tail);

// Asynchronous queue under the virtual clock. publish() never blocks the
// producer; delivery happens when the driver advances time. The retained
// history doubles as the commit log.
class MessageQueue {
 public:
  explicit MessageQueue(std::int64_t delay_ticks) : delay_ticks_(delay_ticks) {}

  void publish(Batch batch);

  // Delivers every batch due at or before `now`, in publish order.
  int drain_due(std::int64_t now, const std::function<void(const Batch&)>& consume);
  int drain_all(const std::function<void(const Batch&)>& consume);

  std::int64_t next_due() const;
  std::vector<Batch> log_copy() const;
  std::size_t published() const;

 private:
  mutable std::mutex mu_;
  std::int64_t delay_ticks_ = 0;
  std::vector<Batch> log_;
  std::size_t next_undelivered_ = 0;
};

// Serving-box side: micro-aggregates events of the same campaign and
// predicted-response-rate bucket within a batch window, assigns sequence
// numbers at flush time, splits oversized flushes into max_batch_size chunks.
class DeliveryProducer {
 public:
  DeliveryProducer(int id, const PipelineConfig& cfg, MessageQueue* queue);

  void record(std::int32_t campaign, int slot, int bucket, Micros cost, bool clicked,
              std::int64_t now);
  void flush(std::int64_t now);
  // Flushes when the batch window has aged out; called by the driver.
  void maybe_flush(std::int64_t now);

  int id() const { return id_; }
  std::uint64_t next_sequence() const { return next_sequence_; }
  // Tick the current batch window opened at, -1 when nothing is pending.
  std::int64_t window_open_tick() const { return window_open_tick_; }

 private:
  int id_ = 0;
  PipelineConfig cfg_;
  MessageQueue* queue_ = nullptr;
  std::uint64_t next_sequence_ = 1;
  std::int64_t window_open_tick_ = -1;
  // key (campaign, slot, bucket) when aggregating; insertion order otherwise
  std::map<std::tuple<std::int32_t, int, int>, DeliveryMessage> pending_agg_;
  std::vector<DeliveryMessage> pending_raw_;
  std::int64_t pending_events_ = 0;
};

struct QuickStopNotice {
  std::int32_t campaign = 0;
  std::int64_t issued_tick = 0;
};

// A bidder's view of the campaign: the last acknowledged rate table and stop
// flag. Push failures leave the previous table active on that bidder.
struct BidderView {
  RateTable table;
  bool stopped = false;
  int pending_push_failures = 0;  // fault injection
};

class BidderRegistry {
 public:
  explicit BidderRegistry(int count) : bidders_(count) {}

  // Synchronous: every healthy bidder applies the table and acknowledges.
  // Returns the ids that failed (they keep their old table).
  std::vector<int> push_rates(const RateTable& table);
  std::vector<int> push_stop(const QuickStopNotice& notice);

  void inject_push_failure(int bidder, int failures);
  const BidderView& view(int bidder) const { return bidders_.at(bidder); }
  BidderView& view(int bidder) { return bidders_.at(bidder); }
  int count() const { return static_cast<int>(bidders_.size()); }

 private:
  std::vector<BidderView> bidders_;
};

// Glues producer, queue, store, bidders and the quick-stop rule together for
// one campaign. The driver advances the virtual clock; the pipeline flushes
// and applies whatever is due and stops the campaign the moment aggregated
// spend reaches budget.
class FeedbackPipeline {
 public:
  FeedbackPipeline(const PipelineConfig& cfg, std::int32_t campaign, Micros budget,
                   int num_buckets, std::vector<double> bucket_ctrs,
                   int num_bidders = 1, int num_producers = 1);

  DeliveryProducer& producer(int i = 0) { return producers_[i]; }
  BidderRegistry& bidders() { return bidders_; }
  AggregateStore& store() { return store_; }
  const AggregateStore& store() const { return store_; }
  MessageQueue& queue() { return queue_; }

  // Producer-side entry for the default producer; keeps the internal event
  // deadline current so advance() stays a single comparison per tick.
  void record(int slot, int bucket, Micros cost, bool clicked, std::int64_t now);

  void advance(std::int64_t now) {
    if (now < next_event_tick_) return;
    advance_slow(now);
  }

  // Slot boundary: force-flush producers, deliver what is due, report.
  SlotReport close_slot(int slot, std::int64_t now);

  // End of run: deliver everything still in flight regardless of delay.
  void drain_all(std::int64_t now);

  std::vector<int> push_rates(const RateTable& table);

  bool stopped() const { return stop_notice_.has_value(); }
  const std::optional<QuickStopNotice>& stop_notice() const { return stop_notice_; }

  // Periodic snapshots (cfg.snapshot_every_ticks) for recovery testing.
  const std::vector<std::pair<std::int64_t, AggregateStore>>& snapshots() const {
    return snapshots_;
  }

  // Optional append-only dump, one fixed 40-byte record per applied message.
  void open_event_log(const std::string& path);

 private:
  void consume(const Batch& batch);
  void check_quick_stop(std::int64_t now);
  void advance_slow(std::int64_t now);
  void refresh_deadline();

  PipelineConfig cfg_;
  std::int32_t campaign_ = 0;
  Micros budget_ = 0;
  std::vector<double> bucket_ctrs_;
  MessageQueue queue_;
  AggregateStore store_;
  std::vector<DeliveryProducer> producers_;
  BidderRegistry bidders_;
  std::optional<QuickStopNotice> stop_notice_;
  std::int64_t last_snapshot_tick_ = 0;
  std::vector<std::pair<std::int64_t, AggregateStore>> snapshots_;
  std::string event_log_path_;
  std::int64_t next_event_tick_ = 0;
};

// Spend threshold check used by the pipeline; exposed for direct testing.
// A notice is issued exactly once, the first time spend >= budget.
std::optional<QuickStopNotice> check_quick_stop(const AggregateStore& store,
                                                std::int32_t campaign, Micros budget,
                                                bool already_issued, std::int64_t now);

}  // namespace pacekit
