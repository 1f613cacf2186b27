#include "csma/hol.hpp"

#include <cmath>
#include <limits>

namespace csma {

namespace {

void check_common(double p, double q, double alpha) {
  if (!(p > 0.0) || !(p <= 1.0))
    throw OutOfRange("success probability p must be in (0, 1]");
  if (!(q > 0.0) || !(q < 1.0))
    throw OutOfRange("retransmission factor q must be in (0, 1)");
  if (!(alpha > 0.0) || !(alpha <= 1.0))
    throw OutOfRange("sensed-idle probability alpha must be in (0, 1]");
}

void check_ergodic(double p, double q) {
  if (p + q <= 1.0 + 1e-9)
    throw NotErgodic("p + q <= 1: backoff phases are not positive recurrent");
}

// B(K) = p*q - (1-q)(1-p)((1-p)/q)^K, the phase-cap dependent part of the
// normalizer D = (1+a-alpha)*B + alpha*(p+q-1).  For the unbounded cap the
// power term vanishes (ergodicity makes (1-p)/q < 1).
double cap_term(double p, double q, int phase_cap) {
  if (phase_cap == phase_cap_infinite) return p * q;
  double r = (1.0 - p) / q;
  return p * q - (1.0 - q) * (1.0 - p) * std::pow(r, phase_cap);
}

}  // namespace

HolEquilibrium hol_equilibrium(double p, double q, int phase_cap, double alpha,
                               double a) {
  check_common(p, q, alpha);
  if (!(a > 0.0) || !(a <= 1.0))
    throw OutOfRange("mini-slot ratio a must be in (0, 1]");
  if (phase_cap < 1 || phase_cap == phase_cap_infinite)
    throw OutOfRange("phase cap must be a finite integer >= 1");
  check_ergodic(p, q);

  const int cap = phase_cap;
  const double d = (1.0 + a - alpha) * cap_term(p, q, cap) +
                   alpha * (p + q - 1.0);

  HolEquilibrium eq;
  eq.d_norm = d;
  eq.f_tilde.resize(cap + 1);
  eq.s_tilde.resize(cap + 1);
  eq.w_tilde.resize(cap + 1);
  eq.phi.resize(cap + 1);

  // common factor (p+q-1)(1-p)^i / D; the cap row drops one factor of p
  // because phase-K collisions loop back to phase K
  double s_sum = 0.0;
  for (int i = 0; i <= cap; ++i) {
    double base = (p + q - 1.0) * std::pow(1.0 - p, i) / d;
    if (i < cap) base *= p;
    double qi = std::pow(q, i);
    eq.f_tilde[i] = alpha * base;
    eq.s_tilde[i] = a * base / qi;
    eq.w_tilde[i] = (1.0 - alpha) * base / qi;
    s_sum += eq.s_tilde[i];
  }
  for (int i = 0; i <= cap; ++i) eq.phi[i] = eq.s_tilde[i] / s_sum;
  return eq;
}

OfferedLoad offered_load(double lambda, double p, double q, int phase_cap,
                         double alpha, double a) {
  check_common(p, q, alpha);
  if (!(a > 0.0) || !(a <= 1.0))
    throw OutOfRange("mini-slot ratio a must be in (0, 1]");
  if (phase_cap < 1) throw OutOfRange("phase cap must be >= 1");
  if (!(lambda >= 0.0)) throw OutOfRange("arrival rate lambda must be >= 0");
  if (phase_cap == phase_cap_infinite) check_ergodic(p, q);

  // rho = lambda * D / (alpha * p * (p+q-1)).  B/(p+q-1) has a removable
  // singularity on p + q = 1 for finite caps; take the limit branch there.
  double t = p + q - 1.0;
  double ratio;  // B(K) / (p+q-1)
  if (phase_cap != phase_cap_infinite && std::fabs(t) <= 1e-9) {
    ratio = 1.0 + p * phase_cap;
  } else {
    ratio = cap_term(p, q, phase_cap) / t;
  }
  OfferedLoad load;
  load.rho = lambda * ((1.0 + a - alpha) * ratio / (alpha * p) + 1.0 / p);
  load.overload = load.rho > 1.0;
  return load;
}

ServiceMoments service_moments_geometric(double p, double q, int m,
                                         double alpha) {
  check_common(p, q, alpha);
  if (q >= 1.0 - 1e-9)
    throw OutOfRange("q too close to 1 for the closed forms");
  if (m < 1) throw OutOfRange("mini-slots per slot must be >= 1");
  check_ergodic(p, q);

  const double a = 1.0 / m;
  ServiceMoments sm;
  sm.mean = (a * (1.0 - p) * (m + 1.0 + m * alpha * q - m * alpha) +
             a * p * q * (m + 1.0)) /
            (alpha * p * q);

  const double am = alpha * m;
  const double big = 1.0 + m - am;  // mini-slots not hidden by sensing
  double poly =
      alpha * q * (4.0 * m + p) * (1.0 - p) * big +
      2.0 * (1.0 - p) * (big * big + alpha * q * m * alpha * q * m) +
      alpha * p * q * q * (1.0 + m) * (2.0 * m - am + p) +
      p * q * (2.0 * m - am + 2.0) * (p * q + 1.0 - p) * (1.0 - alpha) *
          (1.0 + m) +
      alpha * alpha * p * q * q * m * (1.0 - p);
  sm.second = a * a * poly / (alpha * alpha * p * p * q * q);
  sm.divergent = false;
  return sm;
}

ServiceMoments service_moments_exponential(double p, double q, int m,
                                           double alpha) {
  check_common(p, q, alpha);
  if (q >= 1.0 - 1e-9)
    throw OutOfRange("q too close to 1 for the closed forms");
  if (m < 1) throw OutOfRange("mini-slots per slot must be >= 1");
  check_ergodic(p, q);
  if (std::fabs(p + q * q - 1.0) <= 1e-9)
    throw SingularParameter("p + q^2 = 1: second-moment denominator vanishes");

  const double a = 1.0 / m;
  const double g1 = (m + 1.0 - m * alpha) / alpha;
  const double u0 = m / p;
  const double u1 = g1 * q / (p + q - 1.0);

  ServiceMoments sm;
  sm.mean = a * (u0 + u1);
  if (q * q < 1.0 - p) {
    // deep phases are revisited too often: E[X^2] has no finite value
    sm.divergent = true;
    sm.second = std::numeric_limits<double>::infinity();
    return sm;
  }

  // second factorial moment as three geometric sums over the phase index:
  // constant, (1-p)/q-weighted and ((1-p)/q^2)-weighted components
  const double w0 = (m + 1.0) * m + 2.0 * u0 * ((m + 1.0) * (1.0 - p) - 1.0);
  const double w1 = 2.0 * (m + 1.0) * (1.0 - p) * u1 / q +
                    (1.0 - alpha) * (m + 1.0) * m / alpha +
                    2.0 * (g1 * u0 - u1);
  const double w2 = 2.0 * g1 * u1;
  const double v0 = w0 / p + w1 * q / (p + q - 1.0) +
                    w2 * q * q / (p + q * q - 1.0);
  sm.second = a * a * (v0 + u0 + u1);
  sm.divergent = false;
  return sm;
}

ServiceMoments service_moments_numeric(double p, double q, int phase_cap,
                                       int m, double alpha) {
  check_common(p, q, alpha);
  if (m < 1) throw OutOfRange("mini-slots per slot must be >= 1");
  if (phase_cap < 1 || phase_cap == phase_cap_infinite)
    throw OutOfRange("phase cap must be a finite integer >= 1");
  check_ergodic(p, q);

  // Phase-i generating function rows S_i(z)*Den_i(z) = Num_i(z) with
  //   Den_i(z) = 1 - alpha(1-q^i) z - (1-alpha) z^{M+1}
  //   Num_i(z) = alpha q^i z^{M+1} (p + (1-p) S_{i+1}(z)),
  // the cap row keeping its collision term on the Den side.  Evaluating the
  // first two derivatives at z = 1 gives a backward recurrence in i for
  // u_i = S_i'(1) and v_i = S_i''(1).
  const int cap = phase_cap;
  const double m1 = m + 1.0;
  double u_next = 0.0, v_next = 0.0;
  double u = 0.0, v = 0.0;
  for (int i = cap; i >= 0; --i) {
    double qi = std::pow(q, i);
    double d, dp1, dp2, np1, np2;
    if (i == cap) {
      d = alpha * qi * p;
      dp1 = -alpha * (1.0 - qi) - (1.0 - alpha) * m1 -
            alpha * qi * (1.0 - p) * m1;
      dp2 = -(1.0 - alpha) * m1 * m - alpha * qi * (1.0 - p) * m1 * m;
      np1 = alpha * qi * p * m1;
      np2 = alpha * qi * p * m1 * m;
    } else {
      d = alpha * qi;
      dp1 = -alpha * (1.0 - qi) - (1.0 - alpha) * m1;
      dp2 = -(1.0 - alpha) * m1 * m;
      np1 = alpha * qi * (m1 + (1.0 - p) * u_next);
      np2 = alpha * qi *
            (m1 * m + 2.0 * m1 * (1.0 - p) * u_next + (1.0 - p) * v_next);
    }
    if (d <= 0.0 || !std::isfinite(1.0 / d))
      throw SingularParameter("phase row normalizer vanished");
    u = (np1 - dp1) / d;
    v = (np2 - dp2) / d - 2.0 * dp1 * u / d;
    u_next = u;
    v_next = v;
  }

  const double a = 1.0 / m;
  ServiceMoments sm;
  sm.mean = a * u;
  sm.second = a * a * (v + u);
  sm.divergent = false;
  return sm;
}

DelayEstimate pk_mean_delay(double lambda, const ServiceMoments& moments) {
  if (!(lambda >= 0.0)) throw OutOfRange("arrival rate lambda must be >= 0");
  if (moments.divergent)
    throw UnboundedDelay("service second moment diverges");
  DelayEstimate est;
  est.utilization = lambda * moments.mean;
  if (lambda > 0.0 && est.utilization >= 1.0)
    throw Unstable("utilization >= 1: no stationary waiting time");
  est.mean_delay = moments.mean;
  if (lambda > 0.0)
    est.mean_delay +=
        lambda * moments.second / (2.0 * (1.0 - est.utilization));
  return est;
}

}  // namespace csma
