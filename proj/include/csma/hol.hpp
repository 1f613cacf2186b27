#pragma once
// Markov chain of a head-of-line packet: sensing (S_i), transmitting (F_i)
// and waiting (W_i) states for backoff phases i = 0..K.  A phase-i packet
// re-senses an idle mini-slot with probability q^i; collisions push i to
// min(i+1, K).  Closed forms for the time-average state probabilities, the
// offered load, and the first two moments of the HOL service time.

#include <vector>

#include "csma/types.hpp"

namespace csma {

struct HolEquilibrium {
  std::vector<double> f_tilde;  // transmitting, per phase 0..K
  std::vector<double> s_tilde;  // sensing
  std::vector<double> w_tilde;  // waiting
  std::vector<double> phi;      // phase distribution s_tilde[i] / sum(s_tilde)
  double d_norm = 0;            // common normalizer of the closed forms
};

struct OfferedLoad {
  double rho = 0;
  bool overload = false;  // rho > 1; reported as a flag so sweeps can cross it
};

struct ServiceMoments {
  double mean = 0;    // E[X], slots
  double second = 0;  // E[X^2], slots^2; +inf when divergent
  bool divergent = false;
};

struct DelayEstimate {
  double mean_delay = 0;   // E[T], slots
  double utilization = 0;  // lambda * E[X]
};

// Time-average state probabilities.  Requires p + q > 1 + 1e-9 (NotErgodic
// otherwise) and finite phase_cap >= 1.
HolEquilibrium hol_equilibrium(double p, double q, int phase_cap, double alpha,
                               double a);

// rho = lambda / f_tilde[0].  Evaluated algebraically, so finite phase_cap
// works on both sides of p + q = 1 (the finite chain is always ergodic; the
// gate applies only to phase_cap_infinite).  Overload is a flag, not an error.
OfferedLoad offered_load(double lambda, double p, double q, int phase_cap,
                         double alpha, double a);

// Closed forms for the single-backoff-phase scheme (phase cap 1).
ServiceMoments service_moments_geometric(double p, double q, int m,
                                         double alpha);

// Closed forms for unbounded backoff (phase cap -> infinity).  The second
// moment is finite iff q^2 > 1 - p; otherwise divergent is set and second is
// +inf.  Throws SingularParameter when |p + q^2 - 1| <= 1e-9.
ServiceMoments service_moments_exponential(double p, double q, int m,
                                           double alpha);

// Moments for any finite phase cap, from the generating functions of the
// per-phase service completion times: a backward pass over the phase rows
// evaluated at z = 1 yields the first two derivatives exactly.
ServiceMoments service_moments_numeric(double p, double q, int phase_cap,
                                       int m, double alpha);

// Mean sojourn of a Geo/G/1 queue:
// E[T] = E[X] + lambda*E[X^2] / (2*(1 - lambda*E[X])).
DelayEstimate pk_mean_delay(double lambda, const ServiceMoments& moments);

}  // namespace csma
