#include "csma/stability.hpp"

#include <cmath>
#include <limits>

#include "csma/analytic.hpp"

namespace csma {

namespace {

void check_inputs(double g, double n, double a) {
  if (!(g >= 0.0)) throw OutOfRange("attempt rate G must be >= 0");
  if (!(n >= 1.0)) throw OutOfRange("node count n must be >= 1");
  if (!(a > 0.0) || !(a <= 1.0))
    throw OutOfRange("mini-slot ratio a must be in (0, 1]");
}

double require_open_unit(double q) {
  if (!(q > 0.0) || !(q < 1.0))
    throw OutOfRange("computed retransmission factor left (0, 1)");
  return q;
}

}  // namespace

double q_of_g_geometric(double g, double n, double lambda_hat, double a) {
  check_inputs(g, n, a);
  if (g == 0.0) return 0.0;
  double p = std::exp(-a * g);
  double one_minus_p = -std::expm1(-a * g);
  double denom = n + (lambda_hat - g) * p / one_minus_p;
  if (!(denom > 0.0))
    throw OutOfRange("backlog balance has no admissible q at this G");
  return require_open_unit(g / denom);
}

double q_of_g_exponential(double g, double n, double lambda_hat, double a) {
  check_inputs(g, n, a);
  if (g == 0.0) return 0.0;
  double p = std::exp(-a * g);
  double one_minus_p = -std::expm1(-a * g);
  if (std::isinf(n)) return require_open_unit(one_minus_p);
  double z = n * one_minus_p + lambda_hat * p;
  double denom = 1.0 - g * p / z;
  if (!(denom > 0.0))
    throw OutOfRange("backlog balance has no admissible q at this G");
  return require_open_unit(one_minus_p / denom);
}

namespace {

// residual of the general balance condition at finite phase cap K:
//   G*[qp + (p+q-1-qp)*((1-p)/q)^K] - [n(1-p)+lambda_hat*p]*(p+q-1)
double cap_residual(double g, double q, double n, double lambda_hat, double a,
                    int cap) {
  double p = std::exp(-a * g);
  double one_minus_p = -std::expm1(-a * g);
  double r = std::pow(one_minus_p / q, cap);
  double lhs = g * (q * p + (p + q - 1.0 - q * p) * r);
  double rhs = (n * one_minus_p + lambda_hat * p) * (p + q - 1.0);
  return lhs - rhs;
}

double invert_monotone_h(double q, double n, double lambda_hat, double a,
                         bool geometric) {
  auto h_at_least = [&](double g) {
    // h may leave (0,1) above the root; treat that as "past the target"
    try {
      double h = geometric ? q_of_g_geometric(g, n, lambda_hat, a)
                           : q_of_g_exponential(g, n, lambda_hat, a);
      return h >= q;
    } catch (const OutOfRange&) {
      return true;
    }
  };
  double hi = 1.0;
  int it = 0;
  for (; it < 64 && !h_at_least(hi); ++it) hi *= 2.0;
  if (it == 64) throw NoFixedPoint("q exceeds the attainable range of h(G)");
  double lo = 0.0;
  for (int k = 0; k < 200; ++k) {
    double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (h_at_least(mid))
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double attempt_rate_from_q(double q, double n, double lambda_hat, double a,
                           Scheme scheme, int phase_cap) {
  if (!(q > 0.0) || !(q < 1.0))
    throw OutOfRange("retransmission factor q must be in (0, 1)");
  check_inputs(0.0, n, a);

  if (scheme == Scheme::geometric)
    return invert_monotone_h(q, n, lambda_hat, a, true);
  if (scheme == Scheme::exponential)
    return invert_monotone_h(q, n, lambda_hat, a, false);

  if (phase_cap < 1 || phase_cap == phase_cap_infinite)
    throw OutOfRange("finite-cap scheme needs a finite phase cap >= 1");
  // smallest positive root by log-grid sign scan, then bisection
  auto res = [&](double g) {
    return cap_residual(g, q, n, lambda_hat, a, phase_cap);
  };
  double g_lo = 1e-9;
  double f_lo = res(g_lo);
  double g_hi_limit = 16.0 * n / a;
  double lo = g_lo, hi = 0.0;
  bool bracketed = false;
  for (double g = 2e-9; g <= g_hi_limit; g *= 1.05) {
    double f = res(g);
    if ((f_lo <= 0.0 && f >= 0.0) || (f_lo >= 0.0 && f <= 0.0)) {
      hi = g;
      bracketed = true;
      break;
    }
    lo = g;
    f_lo = f;
  }
  if (!bracketed)
    throw NoFixedPoint("no attempt rate balances this q and input rate");
  for (int k = 0; k < 200; ++k) {
    double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if ((res(mid) < 0.0) == (f_lo < 0.0))
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double conservative_upper_attempt_rate(double g_large, double n) {
  if (!(g_large > 0.0)) throw OutOfRange("g_large must be > 0");
  if (std::isinf(n)) {
    // binomial variance degenerates to g itself: solve g + 3*sqrt(g) = G_L
    double s = 0.5 * (-3.0 + std::sqrt(9.0 + 4.0 * g_large));
    return s * s;
  }
  if (!(n >= 1.0)) throw OutOfRange("node count n must be >= 1");
  if (g_large > n)
    throw OutOfRange("g_large exceeds n: attempt count cannot exceed n");
  double disc = 4.0 * n * n * g_large + 9.0 * n * n - 4.0 * n * g_large * g_large;
  return (2.0 * n * g_large + 9.0 * n - 3.0 * std::sqrt(disc)) / (2.0 * n + 18.0);
}

namespace {

StableInterval make_interval(double lo, double hi, RegionKind kind) {
  StableInterval iv;
  iv.kind = kind;
  iv.clamped = false;
  if (lo <= 0.0) {
    lo = 1e-12;
    iv.clamped = true;
  }
  if (hi >= 1.0) {
    hi = 1.0 - 1e-12;
    iv.clamped = true;
  }
  iv.lo = lo;
  iv.hi = hi;
  iv.empty = !(lo <= hi);
  return iv;
}

StableInterval empty_interval(RegionKind kind) {
  StableInterval iv;
  iv.kind = kind;
  return iv;
}

}  // namespace

RegionReport stable_regions_geometric(double n, double lambda_hat, double a) {
  ThroughputRoots roots = attempt_rate_roots(lambda_hat, a);
  RegionReport rep;
  rep.scheme = Scheme::geometric;
  rep.g_small = roots.g_small;
  rep.g_large = roots.g_large;

  if (std::isinf(n)) {
    // q/(1) * n -> any fixed q drives G past g_large: no stable q survives
    rep.g_hat_large = conservative_upper_attempt_rate(roots.g_large, n);
    rep.region_i = empty_interval(RegionKind::region_i);
    rep.region_ii = empty_interval(RegionKind::region_ii);
    rep.region_delay = empty_interval(RegionKind::bounded_delay);
    return rep;
  }

  double g_for_hat = roots.g_large;
  bool hat_clamped = false;
  if (g_for_hat > n) {
    g_for_hat = n;  // attempt counts are capped by the population
    hat_clamped = true;
  }
  rep.g_hat_large = conservative_upper_attempt_rate(g_for_hat, n);

  double lo = q_of_g_geometric(roots.g_small, n, lambda_hat, a);
  double hi_i = q_of_g_geometric(roots.g_large, n, lambda_hat, a);
  double hi_ii = q_of_g_geometric(rep.g_hat_large, n, lambda_hat, a);
  rep.region_i = make_interval(lo, hi_i, RegionKind::region_i);
  rep.region_ii = make_interval(lo, hi_ii, RegionKind::region_ii);
  rep.region_ii.clamped = rep.region_ii.clamped || hat_clamped;
  rep.region_delay = rep.region_ii;
  rep.region_delay.kind = RegionKind::bounded_delay;
  return rep;
}

RegionReport stable_regions_exponential(double n, double lambda_hat, double a) {
  ThroughputRoots roots = attempt_rate_roots(lambda_hat, a);
  RegionReport rep;
  rep.scheme = Scheme::exponential;
  rep.g_small = roots.g_small;
  rep.g_large = roots.g_large;

  double lo, hi_i, hi_ii;
  if (std::isinf(n)) {
    rep.g_hat_large = conservative_upper_attempt_rate(roots.g_large, n);
    lo = -std::expm1(-a * roots.g_small);
    hi_i = -std::expm1(-a * roots.g_large);
    hi_ii = -std::expm1(-a * rep.g_hat_large);
  } else {
    double g_for_hat = roots.g_large;
    if (g_for_hat > n) g_for_hat = n;
    rep.g_hat_large = conservative_upper_attempt_rate(g_for_hat, n);
    lo = q_of_g_exponential(roots.g_small, n, lambda_hat, a);
    hi_i = q_of_g_exponential(roots.g_large, n, lambda_hat, a);
    hi_ii = q_of_g_exponential(rep.g_hat_large, n, lambda_hat, a);
  }
  rep.region_i = make_interval(lo, hi_i, RegionKind::region_i);
  rep.region_ii = make_interval(lo, hi_ii, RegionKind::region_ii);

  // bounded delay additionally needs q^2 > 1 - p at the light-traffic root
  double delay_lo = std::sqrt(-std::expm1(-a * roots.g_small));
  rep.region_delay = make_interval(std::max(delay_lo, rep.region_ii.lo),
                                   rep.region_ii.hi, RegionKind::bounded_delay);
  return rep;
}

}  // namespace csma
