#pragma once
// Mini-slot discrete-event simulation of n buffered nodes running slotted
// non-persistent CSMA with K-exponential backoff.  Nodes see the channel
// with one mini-slot of delay; a transmission occupies the channel for
// M+1 mini-slots (one slot plus propagation).

#include <array>
#include <cstdint>
#include <deque>
#include <vector>

#include "csma/types.hpp"

namespace csma {

struct SimConfig {
  NetworkParams params;
  int64_t horizon = 10'000'000;  // mini-slots simulated
  int64_t warmup = 1'000'000;    // mini-slots discarded before measuring
  uint64_t seed = 1;
  bool trace_attempts = false;   // record per-slot attempt counts
  // draw arrivals once per slot but place each uniformly on the slot's
  // mini-slots; false pins arrivals to slot boundaries
  bool spread_arrivals = true;
  int backlog_samples = 512;     // entries in backlog_trace
};

enum class HolMode { empty, sensing, transmitting, waiting };

struct NodeState {
  std::deque<int64_t> queue;  // arrival mini-slot of each buffered packet
  int hol_phase = 0;
  HolMode hol_mode = HolMode::empty;
  int64_t wake_at = -1;         // next mini-slot this node acts in
  int64_t service_start = -1;   // first sensing mini-slot of the HOL packet
};

struct AttemptRateStats {
  double mean_attempt_rate = 0;  // attempts per slot
  double variance = 0;
  double three_sigma_coverage = 1.0;
};

struct PhaseOccupancy {
  // fractions of node time, clipped to the measurement window
  double sensing = 0;
  double transmitting = 0;
  double waiting = 0;
};

struct SimReport {
  double throughput = 0;             // delivered packets per slot
  double mean_delay = 0;             // arrival to delivery, slots
  double delay_second_moment = 0;
  double service_mean = 0;           // HOL lifetime, slots
  double service_second = 0;
  double mean_backlog = 0;           // time average packets in system
  std::vector<std::pair<int64_t, int64_t>> backlog_trace;  // (mini-slot, packets)
  std::vector<PhaseOccupancy> phase_occupancy;  // indexed by backoff phase
  double empty_fraction = 0;         // node time with nothing buffered
  double occ_idle = 0;               // channel time shares; sum to 1
  double occ_suc = 0;
  double occ_col = 0;
  double sensed_idle_fraction = 0;   // mini-slots perceived idle
  double measured_p = 0;             // successful busy periods / busy periods
  int64_t packets_arrived = 0;
  int64_t packets_delivered = 0;     // whole run, for conservation
  int64_t final_backlog = 0;
  int64_t busy_periods = 0;
  int64_t collisions = 0;
  int64_t min_busy_gap = 0;          // smallest spacing of busy-period starts
  std::vector<uint32_t> attempt_trace;  // per-slot counts when traced
  AttemptRateStats attempt_stats;
  bool has_attempt_stats = false;
};

SimReport run_simulation(const SimConfig& config);

// Sample mean/variance of the per-slot attempt counts and the fraction of
// slots within mean + 3*sqrt(mean*(1-mean/n)).  Counts are scaled by
// 1/idle_fraction first: attempts only happen in perceived-idle mini-slots,
// so raw counts understate the attempt rate the balance equations use.
AttemptRateStats attempt_rate_stats(const std::vector<uint32_t>& per_slot_counts,
                                    double n, double idle_fraction = 1.0);

}  // namespace csma
