#pragma once
// Mappings between the aggregate attempt rate G and the retransmission
// factor q, and the stable-throughput / bounded-delay regions of q.
// Region II differs from region I by replacing the upper rate G_large with
// a conservative value three standard deviations of the per-slot attempt
// count below it.

#include "csma/types.hpp"

namespace csma {

enum class RegionKind { region_i, region_ii, bounded_delay };

struct StableInterval {
  double lo = 1.0;
  double hi = 0.0;
  RegionKind kind = RegionKind::region_i;
  bool empty = true;    // lo > hi
  bool clamped = false; // an endpoint left (0,1) and was clamped
};

struct RegionReport {
  StableInterval region_i;
  StableInterval region_ii;
  StableInterval region_delay;
  double g_small = 0;
  double g_large = 0;
  double g_hat_large = 0;
  Scheme scheme = Scheme::geometric;
};

// q that sustains attempt rate G with n nodes at aggregate input lambda_hat,
// single backoff phase.  Throws OutOfRange when the value leaves (0,1).
double q_of_g_geometric(double g, double n, double lambda_hat, double a);

// Same for unbounded backoff; n may be +inf (limit 1 - exp(-a*G)).
double q_of_g_exponential(double g, double n, double lambda_hat, double a);

// Inverse mapping.  Geometric and exponential invert the closed h forms by
// bisection (round trip to 1e-9); the finite-cap scheme solves the general
// balance condition for the smallest positive root.
double attempt_rate_from_q(double q, double n, double lambda_hat, double a,
                           Scheme scheme, int phase_cap = 1);

// Largest mean attempt rate whose three-sigma fluctuation band still stays
// below g_large, with per-slot attempt counts Binomial(n, g/n).
// Satisfies g_large = g_hat + 3*sqrt(g_hat*(1 - g_hat/n)).
double conservative_upper_attempt_rate(double g_large, double n);

RegionReport stable_regions_geometric(double n, double lambda_hat, double a);
RegionReport stable_regions_exponential(double n, double lambda_hat, double a);

}  // namespace csma
