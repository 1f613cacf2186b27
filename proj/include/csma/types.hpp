#pragma once
// Shared types for the slotted non-persistent CSMA model with K-exponential
// backoff.  Conventions used throughout:
//   - time unit is one slot (= packet transmission time); a slot is split
//     into M mini-slots of length a = 1/M (a is also the propagation delay)
//   - G is the aggregate attempt rate seen by the channel, in packets/slot
//   - p = exp(-a*G) is the per-attempt success probability
//   - q is the base retry probability; a node in backoff phase i re-senses
//     an idle mini-slot with probability q^i, phases capped at K
//   - K = phase_cap; phase_cap_infinite selects the unbounded-backoff limit

#include <limits>
#include <stdexcept>
#include <string>

namespace csma {

enum class Scheme {
  geometric,      // single phase, constant retry probability (K = 1)
  k_exponential,  // finite cap K
  exponential     // unbounded backoff (K -> infinity)
};

// sentinel for the K -> infinity limit where an op accepts a finite cap
inline constexpr int phase_cap_infinite = std::numeric_limits<int>::max();

struct NetworkParams {
  double n = 0;            // number of nodes (may be +inf for limit results)
  double a = 0;            // mini-slot / propagation time, slots; a = 1/m
  int m = 0;               // mini-slots per slot
  double lambda_hat = 0;   // aggregate arrival rate, packets/slot
  double q = 0;            // base retry probability
  Scheme scheme = Scheme::geometric;
  int phase_cap = 1;       // K; ignored for geometric (=1) and exponential

  double lambda_per_node() const { return lambda_hat / n; }
};

// ---- error taxonomy ------------------------------------------------------
// All model errors derive from ModelError so callers can catch one type.

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// offered load >= 1 for every positive arrival rate (p + q <= 1 with K = inf)
struct NotErgodic : ModelError {
  using ModelError::ModelError;
};

// requested throughput exceeds the channel capacity for this a
struct NoStableRate : ModelError {
  using ModelError::ModelError;
};

// a computed probability left (0,1) and no clamping was requested
struct OutOfRange : ModelError {
  using ModelError::ModelError;
};

// a root search found no sign change in the admissible range
struct NoFixedPoint : ModelError {
  using ModelError::ModelError;
};

// service-time second moment diverges at this operating point
struct UnboundedDelay : ModelError {
  using ModelError::ModelError;
};

// queue utilization >= 1; the waiting time has no stationary mean
struct Unstable : ModelError {
  using ModelError::ModelError;
};

// parameter combination sits on a removable singularity of a closed form
struct SingularParameter : ModelError {
  using ModelError::ModelError;
};

}  // namespace csma
