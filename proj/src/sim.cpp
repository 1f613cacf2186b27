#include "csma/sim.hpp"

#include <algorithm>
#include <cmath>

#include "csma/rng.hpp"

namespace csma {

namespace {

constexpr int kPhaseBuckets = 41;  // deeper phases lump into the last bucket
constexpr int kMaxPowTable = 2048;

struct WindowedCount {
  int64_t lo = 0;
  int64_t hi = 0;  // [lo, hi) measurement window

  // overlap of [from, to] (inclusive) with the window, in mini-slots
  int64_t overlap(int64_t from, int64_t to) const {
    int64_t b = std::max(from, lo);
    int64_t e = std::min(to + 1, hi);
    return e > b ? e - b : 0;
  }
  bool contains(int64_t t) const { return t >= lo && t < hi; }
};

}  // namespace

AttemptRateStats attempt_rate_stats(const std::vector<uint32_t>& per_slot_counts,
                                    double n, double idle_fraction) {
  if (per_slot_counts.empty())
    throw OutOfRange("attempt_rate_stats needs a non-empty trace");
  if (!(idle_fraction > 0.0) || !(idle_fraction <= 1.0))
    throw OutOfRange("idle_fraction must be in (0, 1]");

  const double scale = 1.0 / idle_fraction;
  const size_t count = per_slot_counts.size();
  double sum = 0.0;
  for (uint32_t c : per_slot_counts) sum += c;
  const double mean = scale * sum / static_cast<double>(count);

  double var_acc = 0.0;
  for (uint32_t c : per_slot_counts) {
    double d = scale * c - mean;
    var_acc += d * d;
  }
  AttemptRateStats stats;
  stats.mean_attempt_rate = mean;
  stats.variance = count > 1 ? var_acc / static_cast<double>(count - 1) : 0.0;

  double band = mean * (1.0 - mean / n);
  double cutoff = mean + 3.0 * std::sqrt(std::max(band, 0.0));
  size_t inside = 0;
  for (uint32_t c : per_slot_counts)
    if (scale * c <= cutoff) ++inside;
  stats.three_sigma_coverage =
      static_cast<double>(inside) / static_cast<double>(count);
  return stats;
}

SimReport run_simulation(const SimConfig& config) {
  const NetworkParams& par = config.params;
  const int n = static_cast<int>(par.n);
  if (!(par.n >= 1.0) || std::isinf(par.n) || n != par.n)
    throw OutOfRange("simulation needs a finite integer node count");
  int m = par.m;
  if (m == 0 && par.a > 0.0) m = static_cast<int>(std::lround(1.0 / par.a));
  if (m < 1) throw OutOfRange("mini-slots per slot must be >= 1");
  const double lambda = par.lambda_hat / n;
  if (!(lambda >= 0.0) || lambda > 1.0)
    throw OutOfRange("per-node arrival probability must be in [0, 1]");
  if (!(par.q > 0.0) || par.q > 1.0)
    throw OutOfRange("retransmission factor must be in (0, 1]");
  if (config.warmup < 0 || config.warmup >= config.horizon)
    throw OutOfRange("need 0 <= warmup < horizon");

  int cap;
  switch (par.scheme) {
    case Scheme::geometric: cap = 1; break;
    case Scheme::exponential: cap = std::numeric_limits<int>::max(); break;
    default:
      cap = par.phase_cap;
      if (cap < 1) throw OutOfRange("phase cap must be >= 1");
  }

  // attempt probabilities by phase; beyond the table q^i underflows anyway
  std::vector<double> q_pow(std::min<int64_t>(cap, kMaxPowTable) + 1);
  for (size_t i = 0; i < q_pow.size(); ++i)
    q_pow[i] = std::pow(par.q, static_cast<double>(i));

  const int64_t horizon = config.horizon;
  const WindowedCount window{config.warmup, horizon};
  const double window_slots =
      static_cast<double>(horizon - config.warmup) / m;

  std::vector<NodeState> nodes(n);
  std::vector<Xoshiro256ss> rng;
  rng.reserve(n);
  for (int i = 0; i < n; ++i)
    rng.push_back(Xoshiro256ss::for_stream(config.seed, i));

  // event wheel: every wake is at most M+1 mini-slots ahead
  const int wheel_size = m + 2;
  std::vector<std::vector<int32_t>> wheel(wheel_size);
  auto schedule = [&](int node, int64_t when) {
    nodes[node].wake_at = when;
    wheel[when % wheel_size].push_back(node);
  };

  // arrivals materialized per mini-slot offset within the current slot
  std::vector<std::vector<int32_t>> arrivals(m);

  // channel state: the one mini-slot of delay means the perceived state at t
  // is the actual state at t-1, i.e. busy iff t in [start+1, start+m]
  int64_t last_busy_start = -2 * (m + 2);
  int cur_tx_count = 0;
  int64_t prev_busy_start = -1;
  int64_t min_busy_gap = std::numeric_limits<int64_t>::max();

  SimReport rep;
  int64_t in_system = 0;
  int64_t delivered_window = 0;
  double delay_sum = 0, delay_sq_sum = 0;
  double service_sum = 0, service_sq_sum = 0;
  int64_t service_count = 0;
  int64_t busy_suc_minislots = 0, busy_col_minislots = 0;
  int64_t perceived_busy_minislots = 0;
  int64_t backlog_acc = 0;
  std::vector<std::array<double, 3>> phase_time(kPhaseBuckets,
                                                {0.0, 0.0, 0.0});
  uint32_t slot_attempts = 0;
  const int64_t sample_every =
      std::max<int64_t>(1, horizon / std::max(config.backlog_samples, 1));

  std::vector<int32_t> act_now;
  act_now.reserve(n);

  auto flush_slot = [&](int64_t slot_start) {
    if (!config.trace_attempts) return;
    if (slot_start >= config.warmup && slot_start + m <= horizon)
      rep.attempt_trace.push_back(slot_attempts);
  };

  for (int64_t t = 0; t < horizon; ++t) {
    const bool slot_boundary = (t % m) == 0;
    if (slot_boundary) {
      if (t > 0) flush_slot(t - m);
      slot_attempts = 0;
      for (auto& bucket : arrivals) bucket.clear();
      if (lambda > 0.0) {
        for (int i = 0; i < n; ++i) {
          if (!rng[i].bernoulli(lambda)) continue;
          uint32_t off = 0;
          if (config.spread_arrivals && m > 1)
            off = rng[i].below(static_cast<uint32_t>(m));
          arrivals[off].push_back(i);
        }
      }
    }

    act_now.clear();

    // scheduled wakes: completions first resolve the just-ended busy period
    auto& bucket = wheel[t % wheel_size];
    for (int32_t id : bucket) {
      NodeState& node = nodes[id];
      if (node.wake_at != t) continue;  // stale entry from a wrapped lap
      if (node.hol_mode == HolMode::transmitting) {
        if (cur_tx_count == 1) {
          int64_t arrived = node.queue.front();
          node.queue.pop_front();
          --in_system;
          ++rep.packets_delivered;
          if (window.contains(t)) {
            ++delivered_window;
            double delay_slots = static_cast<double>(t - arrived) / m;
            delay_sum += delay_slots;
            delay_sq_sum += delay_slots * delay_slots;
            double service_slots =
                static_cast<double>(t - node.service_start) / m;
            service_sum += service_slots;
            service_sq_sum += service_slots * service_slots;
            ++service_count;
          }
          if (node.queue.empty()) {
            node.hol_mode = HolMode::empty;
            node.hol_phase = 0;
            node.service_start = -1;
            continue;
          }
          node.hol_phase = 0;
          node.service_start = t;
        } else {
          if (node.hol_phase < cap) ++node.hol_phase;
        }
      }
      node.hol_mode = HolMode::sensing;
      act_now.push_back(id);
    }
    bucket.clear();

    // arrivals due this mini-slot; a packet reaching an empty buffer starts
    // sensing immediately
    if (!arrivals[t % m].empty()) {
      for (int32_t id : arrivals[t % m]) {
        NodeState& node = nodes[id];
        node.queue.push_back(t);
        ++rep.packets_arrived;
        ++in_system;
        if (node.queue.size() == 1) {
          node.hol_phase = 0;
          node.hol_mode = HolMode::sensing;
          node.service_start = t;
          act_now.push_back(id);
        }
      }
    }

    if (!act_now.empty()) {
      const bool perceived_busy =
          t > last_busy_start && t <= last_busy_start + m;
      int first_attempt = -1;
      int attempt_count = 0;
      for (int32_t id : act_now) {
        NodeState& node = nodes[id];
        const int pidx = std::min(node.hol_phase, kPhaseBuckets - 1);
        if (window.contains(t)) phase_time[pidx][0] += 1.0;
        if (perceived_busy) {
          node.hol_mode = HolMode::waiting;
          phase_time[pidx][2] += window.overlap(t + 1, t + m);
          schedule(id, t + m + 1);
          continue;
        }
        double attempt_prob =
            q_pow[std::min<int>(node.hol_phase, q_pow.size() - 1)];
        bool attempt = node.hol_phase == 0 || rng[id].bernoulli(attempt_prob);
        if (attempt) {
          node.hol_mode = HolMode::transmitting;
          phase_time[pidx][1] += window.overlap(t + 1, t + m);
          schedule(id, t + m + 1);
          if (first_attempt < 0) first_attempt = id;
          ++attempt_count;
        } else {
          schedule(id, t + 1);
        }
      }

      if (attempt_count > 0) {
        if (prev_busy_start >= 0)
          min_busy_gap = std::min(min_busy_gap, t - prev_busy_start);
        prev_busy_start = t;
        last_busy_start = t;
        cur_tx_count = attempt_count;
        ++rep.busy_periods;
        slot_attempts += static_cast<uint32_t>(attempt_count);
        int64_t busy_overlap = window.overlap(t, t + m);
        if (attempt_count == 1) {
          busy_suc_minislots += busy_overlap;
        } else {
          ++rep.collisions;
          busy_col_minislots += busy_overlap;
        }
        perceived_busy_minislots += window.overlap(t + 1, t + m);
      }
    }

    if (window.contains(t)) backlog_acc += in_system;
    if ((t + 1) % sample_every == 0)
      rep.backlog_trace.emplace_back(t + 1, in_system);
  }
  if (horizon % m == 0) flush_slot(horizon - m);

  rep.final_backlog = in_system;
  rep.min_busy_gap =
      min_busy_gap == std::numeric_limits<int64_t>::max() ? 0 : min_busy_gap;
  rep.throughput = delivered_window / window_slots;
  if (delivered_window > 0) {
    rep.mean_delay = delay_sum / delivered_window;
    rep.delay_second_moment = delay_sq_sum / delivered_window;
  }
  if (service_count > 0) {
    rep.service_mean = service_sum / service_count;
    rep.service_second = service_sq_sum / service_count;
  }
  const double window_minislots = static_cast<double>(horizon - config.warmup);
  rep.mean_backlog = backlog_acc / window_minislots;
  rep.occ_suc = busy_suc_minislots / window_minislots;
  rep.occ_col = busy_col_minislots / window_minislots;
  rep.occ_idle = 1.0 - rep.occ_suc - rep.occ_col;
  rep.sensed_idle_fraction = 1.0 - perceived_busy_minislots / window_minislots;
  rep.measured_p =
      rep.busy_periods > 0
          ? static_cast<double>(rep.busy_periods - rep.collisions) /
                static_cast<double>(rep.busy_periods)
          : 0.0;

  rep.phase_occupancy.resize(kPhaseBuckets);
  double occupied = 0.0;
  for (int i = 0; i < kPhaseBuckets; ++i) {
    double denom = window_minislots * n;
    rep.phase_occupancy[i].sensing = phase_time[i][0] / denom;
    rep.phase_occupancy[i].transmitting = phase_time[i][1] / denom;
    rep.phase_occupancy[i].waiting = phase_time[i][2] / denom;
    occupied += phase_time[i][0] + phase_time[i][1] + phase_time[i][2];
  }
  rep.empty_fraction = 1.0 - occupied / (window_minislots * n);
  while (rep.phase_occupancy.size() > 1) {
    const PhaseOccupancy& back = rep.phase_occupancy.back();
    if (back.sensing != 0.0 || back.transmitting != 0.0 || back.waiting != 0.0)
      break;
    rep.phase_occupancy.pop_back();
  }

  if (config.trace_attempts && !rep.attempt_trace.empty()) {
    rep.attempt_stats =
        attempt_rate_stats(rep.attempt_trace, n, rep.sensed_idle_fraction);
    rep.has_attempt_stats = true;
  }
  return rep;
}

}  // namespace csma
