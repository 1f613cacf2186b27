#include "csma/analytic.hpp"

#include <cmath>
#include <limits>

namespace csma {

namespace {

void check_a(double a) {
  if (!(a > 0.0) || !(a <= 1.0))
    throw OutOfRange("mini-slot ratio a must be in (0, 1]");
}

}  // namespace

ChannelEquilibrium channel_equilibrium(double g, double a) {
  check_a(a);
  if (!(g >= 0.0)) throw OutOfRange("attempt rate G must be >= 0");
  ChannelEquilibrium eq;
  eq.g = g;
  eq.p = std::exp(-a * g);
  eq.pi_idle = eq.p;
  eq.pi_suc = a * g * eq.p;
  eq.pi_col = 1.0 - eq.pi_idle - eq.pi_suc;
  // -expm1 keeps 1 - p accurate for small aG
  eq.alpha = a / (a - std::expm1(-a * g));
  return eq;
}

TimeAverageOccupancy time_average_occupancy(double g, double a) {
  ChannelEquilibrium eq = channel_equilibrium(g, a);
  // idle states last one mini-slot, busy periods 1+a slots; the cycle-length
  // normalizer is a*pi_I + (1+a)*(1-pi_I) = 1 + a - pi_I
  double denom = 1.0 + a - eq.pi_idle;
  TimeAverageOccupancy occ;
  occ.idle = a * eq.pi_idle / denom;
  occ.suc = (1.0 + a) * eq.pi_suc / denom;
  occ.col = (1.0 + a) * eq.pi_col / denom;
  return occ;
}

double throughput_of_attempt_rate(double g, double a) {
  check_a(a);
  if (!(g >= 0.0)) throw OutOfRange("attempt rate G must be >= 0");
  if (g == 0.0) return 0.0;
  double ag = a * g;
  return a * g * std::exp(-ag) / (a - std::expm1(-ag));
}

double lambert_w0(double x) {
  constexpr double inv_e = 0.36787944117144233;  // 1/e
  if (std::isnan(x)) throw OutOfRange("lambert_w0: NaN argument");
  double ex1 = 1.0 + x / inv_e;  // e*x + 1, scaled
  if (ex1 < 0.0) {
    // allow tiny negative rounding slop at the branch point
    if (ex1 > -1e-9) return -1.0;
    throw OutOfRange("lambert_w0: argument below -1/e");
  }
  if (x == 0.0) return 0.0;

  double w;
  if (x < -0.25) {
    // branch-point series in rho = sqrt(2(ex+1))
    double rho = std::sqrt(2.0 * ex1);
    w = -1.0 + rho - rho * rho / 3.0 + 11.0 / 72.0 * rho * rho * rho;
  } else if (x < 3.0) {
    w = x / (1.0 + x);  // crude but inside the Halley basin
  } else {
    double l1 = std::log(x);
    double l2 = std::log(l1);
    w = l1 - l2 + l2 / l1;
  }

  double tol = 1e-13 * std::max(1.0, std::fabs(x));
  for (int it = 0; it < 50; ++it) {
    double e = std::exp(w);
    double f = w * e - x;
    if (std::fabs(f) <= tol) break;
    double w1 = w + 1.0;
    // Halley step; w1 stays > 0 for x > -1/e on the principal branch
    double step = f / (e * w1 - (w + 2.0) * f / (2.0 * w1));
    w -= step;
    if (std::fabs(step) <= 1e-16 * std::max(1.0, std::fabs(w))) break;
  }
  return w;
}

MaxThroughput max_throughput(double a) {
  check_a(a);
  // The stationary condition d(throughput)/dG = 0 reduces to
  // w*e^w = -e^{-1}/(1+a) with w = -a*g_peak - ... ; the peak throughput
  // equals -w and the maximizing rate is (1+w)/a.
  double w = lambert_w0(-std::exp(-1.0) / (1.0 + a));
  MaxThroughput mt;
  mt.lambda_max = -w;
  mt.g_peak = (1.0 + w) / a;
  return mt;
}

ThroughputRoots attempt_rate_roots(double lambda_hat, double a) {
  check_a(a);
  if (!(lambda_hat > 0.0))
    throw OutOfRange("aggregate rate lambda_hat must be > 0");
  MaxThroughput mt = max_throughput(a);
  ThroughputRoots roots;
  roots.g_peak = mt.g_peak;
  roots.lambda_max = mt.lambda_max;

  if (lambda_hat > mt.lambda_max + 1e-9 * mt.lambda_max)
    throw NoStableRate("requested throughput exceeds the channel maximum");
  if (lambda_hat >= mt.lambda_max - 1e-9 * mt.lambda_max) {
    // tangent case: the two roots coincide at the peak
    roots.g_small = roots.g_large = mt.g_peak;
  } else {
    // left branch: throughput increasing on (0, g_peak]
    double lo = mt.g_peak;
    for (int it = 0; it < 64 && throughput_of_attempt_rate(lo, a) >= lambda_hat;
         ++it)
      lo *= 0.5;
    double hi = mt.g_peak;
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      if (throughput_of_attempt_rate(mid, a) < lambda_hat)
        lo = mid;
      else
        hi = mid;
    }
    roots.g_small = 0.5 * (lo + hi);

    // right branch: throughput decreasing on [g_peak, inf)
    lo = mt.g_peak;
    hi = mt.g_peak;
    for (int it = 0; it < 64 && throughput_of_attempt_rate(hi, a) >= lambda_hat;
         ++it)
      hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      if (throughput_of_attempt_rate(mid, a) >= lambda_hat)
        lo = mid;
      else
        hi = mid;
    }
    roots.g_large = 0.5 * (lo + hi);
  }

  roots.p_small = std::exp(-a * roots.g_small);
  roots.p_large = std::exp(-a * roots.g_large);
  return roots;
}

SuccessProbPair equilibrium_success_prob(double lambda_hat, double a) {
  ThroughputRoots roots = attempt_rate_roots(lambda_hat, a);
  return SuccessProbPair{roots.p_small, roots.p_large};
}

}  // namespace csma
