#pragma once
// Channel-level equilibrium of the slotted NP-CSMA collision channel driven
// by an aggregate Poisson attempt rate G.  Everything here is a scalar
// function of (G, a); the population enters only through G.

#include "csma/types.hpp"

namespace csma {

// Embedded channel chain state probabilities at attempt rate G.
// pi_* are per channel state (idle = one mini-slot, success/collision = one
// busy period of M+1 mini-slots).  alpha is the fraction of mini-slots a
// sensing node perceives as idle, a/(1 + a - p).
struct ChannelEquilibrium {
  double g = 0;
  double p = 0;        // exp(-a*G), per-attempt success probability
  double pi_idle = 0;
  double pi_suc = 0;
  double pi_col = 0;
  double alpha = 0;
};

// Fractions of channel *time* (not embedded states) spent idle, in
// successful busy periods, and in collided busy periods.  Sums to 1.
struct TimeAverageOccupancy {
  double idle = 0;
  double suc = 0;
  double col = 0;
};

struct MaxThroughput {
  double lambda_max = 0;  // peak of throughput_of_attempt_rate over G
  double g_peak = 0;      // argmax
};

// Both solutions of throughput(G) = lambda_hat plus the peak.
// g_small <= g_peak <= g_large; p_small/p_large are exp(-a*g) at each root
// (so p_small is the larger probability, belonging to the light-traffic root).
struct ThroughputRoots {
  double g_small = 0;
  double g_large = 0;
  double p_small = 0;
  double p_large = 0;
  double g_peak = 0;
  double lambda_max = 0;
};

// The two fixed points of p = exp(-lambda_hat*(1+a-p)/p).
// high corresponds to g_small (light traffic), low to g_large.
struct SuccessProbPair {
  double high = 0;
  double low = 0;
};

ChannelEquilibrium channel_equilibrium(double g, double a);
TimeAverageOccupancy time_average_occupancy(double g, double a);

// Channel output rate in packets/slot: a*G*exp(-a*G) / (1 + a - exp(-a*G)).
double throughput_of_attempt_rate(double g, double a);

// Principal branch W0 on [-1/e, inf); Halley iteration, residual
// |w*e^w - x| <= 1e-12 * max(1, |x|).  Throws OutOfRange below the branch point.
double lambert_w0(double x);

MaxThroughput max_throughput(double a);

// Throws NoStableRate when lambda_hat > lambda_max(a).  A rate within 1e-9
// of the peak is treated as the tangent case (g_small = g_large = g_peak).
ThroughputRoots attempt_rate_roots(double lambda_hat, double a);

SuccessProbPair equilibrium_success_prob(double lambda_hat, double a);

}  // namespace csma
