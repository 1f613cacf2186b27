#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "csma/analytic.hpp"
#include "csma/hol.hpp"

using namespace csma;

namespace {

// Stationary state-time fractions of the per-packet chain computed the slow
// way: build the embedded jump chain over (mode, phase), solve pi P = pi by
// elimination, then weight each state by its sojourn (sensing = a slots,
// transmitting = waiting = 1 slot).  Independent of every closed form.
struct BruteForce {
  std::vector<double> s, f, w;
};

BruteForce brute_force_equilibrium(double p, double q, int cap, double alpha,
                                   double a) {
  const int n = 3 * (cap + 1);  // S_i, F_i, W_i
  auto S = [](int i) { return 3 * i; };
  auto F = [](int i) { return 3 * i + 1; };
  auto W = [](int i) { return 3 * i + 2; };

  std::vector<double> P(n * n, 0.0);
  for (int i = 0; i <= cap; ++i) {
    double qi = std::pow(q, i);
    P[S(i) * n + F(i)] = alpha * qi;
    P[S(i) * n + S(i)] = alpha * (1.0 - qi);
    P[S(i) * n + W(i)] = 1.0 - alpha;
    P[W(i) * n + S(i)] = 1.0;
    int next = i + 1 <= cap ? i + 1 : cap;
    P[F(i) * n + S(0)] += p;           // success: fresh packet
    P[F(i) * n + S(next)] += 1.0 - p;  // collision: deeper phase
  }

  // (P^T - I) pi = 0 with the last row replaced by sum(pi) = 1
  std::vector<double> A(n * n, 0.0), b(n, 0.0);
  for (int r = 0; r < n - 1; ++r)
    for (int c = 0; c < n; ++c)
      A[r * n + c] = P[c * n + r] - (r == c ? 1.0 : 0.0);
  for (int c = 0; c < n; ++c) A[(n - 1) * n + c] = 1.0;
  b[n - 1] = 1.0;

  for (int col = 0; col < n; ++col) {  // elimination with partial pivoting
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(A[r * n + col]) > std::fabs(A[piv * n + col])) piv = r;
    for (int c = 0; c < n; ++c) std::swap(A[col * n + c], A[piv * n + c]);
    std::swap(b[col], b[piv]);
    for (int r = col + 1; r < n; ++r) {
      double factor = A[r * n + col] / A[col * n + col];
      for (int c = col; c < n; ++c) A[r * n + c] -= factor * A[col * n + c];
      b[r] -= factor * b[col];
    }
  }
  std::vector<double> pi(n, 0.0);
  for (int r = n - 1; r >= 0; --r) {
    double acc = b[r];
    for (int c = r + 1; c < n; ++c) acc -= A[r * n + c] * pi[c];
    pi[r] = acc / A[r * n + r];
  }

  BruteForce out;
  out.s.resize(cap + 1);
  out.f.resize(cap + 1);
  out.w.resize(cap + 1);
  double total = 0.0;
  for (int i = 0; i <= cap; ++i) {
    out.s[i] = pi[S(i)] * a;
    out.f[i] = pi[F(i)];
    out.w[i] = pi[W(i)];
    total += out.s[i] + out.f[i] + out.w[i];
  }
  for (int i = 0; i <= cap; ++i) {
    out.s[i] /= total;
    out.f[i] /= total;
    out.w[i] /= total;
  }
  return out;
}

}  // namespace

TEST_CASE("state-time fractions, hand-frozen single-cap case") {
  HolEquilibrium eq = hol_equilibrium(0.5, 0.8, 1, 0.5, 0.1);
  CHECK(eq.f_tilde[0] == doctest::Approx(0.21276595744680851).epsilon(1e-13));
  CHECK(eq.f_tilde[1] == doctest::Approx(0.21276595744680851).epsilon(1e-13));
  CHECK(eq.s_tilde[0] == doctest::Approx(0.042553191489361702).epsilon(1e-13));
  CHECK(eq.s_tilde[1] == doctest::Approx(0.053191489361702128).epsilon(1e-13));
  CHECK(eq.w_tilde[0] == doctest::Approx(0.21276595744680851).epsilon(1e-13));
  CHECK(eq.w_tilde[1] == doctest::Approx(0.26595744680851064).epsilon(1e-13));
  CHECK(eq.d_norm == doctest::Approx(0.3525).epsilon(1e-13));
}

TEST_CASE("closed forms agree with the jump-chain solve") {
  struct Case {
    double p, q, alpha, a;
    int cap;
  };
  const Case cases[] = {
      {0.5, 0.8, 0.5, 0.1, 1},  {0.7, 0.6, 0.9, 0.2, 2},
      {0.9, 0.4, 0.3, 0.1, 3},  {0.95, 0.2, 0.7, 0.05, 4},
      {0.99, 0.85, 1.0, 0.5, 2},
  };
  for (const Case& c : cases) {
    HolEquilibrium eq = hol_equilibrium(c.p, c.q, c.cap, c.alpha, c.a);
    BruteForce bf = brute_force_equilibrium(c.p, c.q, c.cap, c.alpha, c.a);
    for (int i = 0; i <= c.cap; ++i) {
      CHECK(eq.s_tilde[i] == doctest::Approx(bf.s[i]).epsilon(1e-10));
      CHECK(eq.f_tilde[i] == doctest::Approx(bf.f[i]).epsilon(1e-10));
      CHECK(eq.w_tilde[i] == doctest::Approx(bf.w[i]).epsilon(1e-10));
    }
  }
}

TEST_CASE("state-time fractions normalize and stay positive") {
  for (double p : {0.3, 0.6, 0.9}) {
    for (double q : {0.45, 0.7, 0.95}) {
      if (p + q <= 1.001) continue;
      for (int cap : {1, 2, 8}) {
        HolEquilibrium eq = hol_equilibrium(p, q, cap, 0.6, 0.1);
        double sum = 0.0, phi_sum = 0.0;
        for (int i = 0; i <= cap; ++i) {
          CHECK(eq.s_tilde[i] > 0.0);
          CHECK(eq.f_tilde[i] > 0.0);
          CHECK(eq.w_tilde[i] >= 0.0);
          sum += eq.s_tilde[i] + eq.f_tilde[i] + eq.w_tilde[i];
          phi_sum += eq.phi[i];
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(phi_sum == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("transmit fractions fall geometrically, cap row keeps its mass") {
  // f ratios are (1-p) between interior phases and (1-p)/p onto the cap row,
  // where collisions loop instead of escaping
  HolEquilibrium eq = hol_equilibrium(0.8, 0.9, 4, 0.5, 0.1);
  for (int i = 0; i + 1 < 4; ++i)
    CHECK(eq.f_tilde[i + 1] / eq.f_tilde[i] ==
          doctest::Approx(0.2).epsilon(1e-12));
  CHECK(eq.f_tilde[4] / eq.f_tilde[3] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("non-ergodic and invalid parameters are rejected") {
  CHECK_THROWS_AS(hol_equilibrium(0.4, 0.5, 1, 0.5, 0.1), NotErgodic);
  CHECK_THROWS_AS(hol_equilibrium(0.5, 0.5, 3, 0.5, 0.1), NotErgodic);
  CHECK_NOTHROW(hol_equilibrium(0.6, 0.5, 3, 0.5, 0.1));
  CHECK_THROWS_AS(hol_equilibrium(0.0, 0.8, 1, 0.5, 0.1), OutOfRange);
  CHECK_THROWS_AS(hol_equilibrium(1.1, 0.8, 1, 0.5, 0.1), OutOfRange);
  CHECK_THROWS_AS(hol_equilibrium(0.9, 0.0, 1, 0.5, 0.1), OutOfRange);
  CHECK_THROWS_AS(hol_equilibrium(0.9, 1.0, 1, 0.5, 0.1), OutOfRange);
  CHECK_THROWS_AS(hol_equilibrium(0.9, 0.8, 0, 0.5, 0.1), OutOfRange);
  CHECK_THROWS_AS(hol_equilibrium(0.9, 0.8, 1, 0.0, 0.1), OutOfRange);
  CHECK_THROWS_AS(hol_equilibrium(0.9, 0.8, 1, 0.5, 0.0), OutOfRange);
  CHECK_THROWS_AS(hol_equilibrium(0.9, 0.8, phase_cap_infinite, 0.5, 0.1),
                  OutOfRange);
}

TEST_CASE("offered load: basics and the 1/f0 round trip") {
  CHECK(offered_load(0.0, 0.9, 0.5, 2, 0.7, 0.1).rho == 0.0);
  for (double p : {0.7, 0.9, 0.99}) {
    for (double q : {0.5, 0.8}) {
      for (int cap : {1, 3}) {
        HolEquilibrium eq = hol_equilibrium(p, q, cap, 0.6, 0.1);
        OfferedLoad load = offered_load(0.01, p, q, cap, 0.6, 0.1);
        CHECK(load.rho ==
              doctest::Approx(0.01 / eq.f_tilde[0]).epsilon(1e-12));
        CHECK_FALSE(load.overload);
      }
    }
  }
}

TEST_CASE("offered load works below the ergodic line for finite caps") {
  // congested example: p from the heavy root band, small q
  double alpha = channel_equilibrium(10.32, 0.1).alpha;
  OfferedLoad load = offered_load(0.006, 0.1506, 0.233, 1, alpha, 0.1);
  CHECK(load.rho == doctest::Approx(1.1258515447852266).epsilon(1e-12));
  CHECK(load.overload);
  // the unbounded-cap path must still refuse that regime
  CHECK_THROWS_AS(offered_load(0.006, 0.1506, 0.233, phase_cap_infinite,
                               alpha, 0.1),
                  NotErgodic);
}

TEST_CASE("offered load is continuous across p + q = 1 for finite caps") {
  const double lambda = 0.01, alpha = 0.5, a = 0.1;
  const int cap = 3;
  double at = offered_load(lambda, 0.6, 0.4, cap, alpha, a).rho;
  double above = offered_load(lambda, 0.6, 0.4 + 1e-7, cap, alpha, a).rho;
  double below = offered_load(lambda, 0.6, 0.4 - 1e-7, cap, alpha, a).rho;
  CHECK(above == doctest::Approx(at).epsilon(1e-5));
  CHECK(below == doctest::Approx(at).epsilon(1e-5));
}

TEST_CASE("offered load: unbounded cap equals the deep finite-cap limit") {
  double inf_rho = offered_load(0.02, 0.9, 0.4, phase_cap_infinite, 0.6, 0.1).rho;
  double deep_rho = offered_load(0.02, 0.9, 0.4, 500, 0.6, 0.1).rho;
  CHECK(inf_rho == doctest::Approx(deep_rho).epsilon(1e-12));
}

TEST_CASE("single-phase closed moments match the recurrence") {
  for (double p : {0.2, 0.5, 0.9, 0.99}) {
    for (double q : {0.3, 0.7, 0.95}) {
      if (p + q <= 1.001) continue;
      for (double alpha : {0.3, 1.0}) {
        for (int m : {2, 10}) {
          ServiceMoments closed = service_moments_geometric(p, q, m, alpha);
          ServiceMoments numeric = service_moments_numeric(p, q, 1, m, alpha);
          CHECK(closed.mean == doctest::Approx(numeric.mean).epsilon(1e-10));
          CHECK(closed.second == doctest::Approx(numeric.second).epsilon(1e-10));
        }
      }
    }
  }
}

TEST_CASE("frozen single-phase moments") {
  ServiceMoments sm = service_moments_geometric(0.6, 0.7, 10, 0.5);
  CHECK(sm.mean == doctest::Approx(4.0095238095238095).epsilon(1e-13));
  CHECK(sm.second == doctest::Approx(29.574739229024943).epsilon(1e-13));
  sm = service_moments_geometric(0.9, 0.95, 2, 1.0);
  CHECK(sm.mean == doctest::Approx(1.6695906432748538).epsilon(1e-13));
  CHECK(sm.second == doctest::Approx(3.0766817140316679).epsilon(1e-13));
  sm = service_moments_geometric(0.99, 0.6, 100, 0.3);
  CHECK(sm.mean == doctest::Approx(3.4166105499438833).epsilon(1e-13));
  CHECK(sm.second == doctest::Approx(20.053212002806466).epsilon(1e-13));
}

TEST_CASE("frozen unbounded-backoff moments") {
  ServiceMoments sm = service_moments_exponential(0.7, 0.8, 10, 0.5);
  CHECK(sm.mean == doctest::Approx(3.3485714285714286).epsilon(1e-13));
  CHECK(sm.second == doctest::Approx(20.684657863145258).epsilon(1e-13));
  CHECK_FALSE(sm.divergent);
  sm = service_moments_exponential(0.9, 0.95, 10, 0.7);
  CHECK(sm.mean == doctest::Approx(1.7497665732959851).epsilon(1e-13));
  CHECK(sm.second == doctest::Approx(4.2114003608488373).epsilon(1e-13));
}

TEST_CASE("deep finite caps converge to the unbounded forms from below") {
  ServiceMoments inf = service_moments_exponential(0.7, 0.8, 10, 0.5);
  double prev = 0.0;
  for (int cap : {5, 10, 20}) {  // gaps shrink like ((1-p)/q)^cap, keep them visible
    ServiceMoments fin = service_moments_numeric(0.7, 0.8, cap, 10, 0.5);
    CHECK(fin.mean > prev);
    CHECK(fin.mean < inf.mean + 1e-12);
    prev = fin.mean;
  }
  ServiceMoments deep = service_moments_numeric(0.7, 0.8, 200, 10, 0.5);
  CHECK(deep.mean == doctest::Approx(inf.mean).epsilon(1e-10));
  CHECK(deep.second == doctest::Approx(inf.second).epsilon(1e-10));
}

TEST_CASE("mean service time is the reciprocal fresh-transmit fraction") {
  for (double p : {0.6, 0.9, 0.99}) {
    for (double q : {0.5, 0.8}) {
      for (int cap : {1, 2, 6}) {
        HolEquilibrium eq = hol_equilibrium(p, q, cap, 0.7, 0.1);
        ServiceMoments sm = service_moments_numeric(p, q, cap, 10, 0.7);
        CHECK(sm.mean == doctest::Approx(1.0 / eq.f_tilde[0]).epsilon(1e-10));
      }
    }
  }
  // light-traffic operating point of the reference network
  ServiceMoments sm = service_moments_exponential(0.95572128539147227, 0.4, 10,
                                                  0.6931029311657688);
  CHECK(sm.mean == doctest::Approx(1.7064715456559656).epsilon(1e-12));
  CHECK(sm.second == doctest::Approx(4.2424267567709657).epsilon(1e-12));
}

TEST_CASE("certain success collapses to the one-shot service time") {
  // p = 1: every attempt succeeds, service = (M+1)/M slots over alpha
  ServiceMoments sm = service_moments_geometric(1.0, 0.5, 10, 1.0);
  CHECK(sm.mean == doctest::Approx(1.1).epsilon(1e-13));
  HolEquilibrium eq = hol_equilibrium(1.0, 0.5, 1, 1.0, 0.1);
  CHECK(eq.f_tilde[0] == doctest::Approx(0.90909090909090909).epsilon(1e-13));
  for (double alpha : {0.25, 0.5, 1.0}) {
    // busy rounds cost a sense plus a one-slot wait each, so E[X] = (1+a)/alpha
    ServiceMoments one = service_moments_numeric(1.0, 0.3, 4, 10, alpha);
    CHECK(one.mean == doctest::Approx(1.1 / alpha).epsilon(1e-12));
  }
}

TEST_CASE("monte carlo episodes reproduce the closed-form moments") {
  // direct simulation of the per-packet chain: sense (1 mini-slot, idle with
  // probability alpha), attempt with probability q^i, transmit (M mini-slots),
  // wait (M mini-slots) on busy; collision deepens the phase, no cap
  const double p = 0.95572128539147227, q = 0.4, alpha = 0.6931029311657688;
  const int m = 10;
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int episodes = 200000;
  double sum = 0.0, sum2 = 0.0, sum4 = 0.0;
  for (int e = 0; e < episodes; ++e) {
    int64_t mini = 0;
    int phase = 0;
    double retry = 1.0;  // q^phase
    for (;;) {
      mini += 1;  // sensing round
      if (u(rng) >= alpha) {
        mini += m;  // perceived busy: wait a slot
        continue;
      }
      if (phase != 0 && u(rng) >= retry) continue;  // hold back
      mini += m;  // transmission
      if (u(rng) < p) break;
      ++phase;
      retry *= q;
    }
    double x = mini * 0.1;
    sum += x;
    sum2 += x * x;
    sum4 += x * x * x * x;
  }
  double mc_mean = sum / episodes;
  double mc_second = sum2 / episodes;
  ServiceMoments sm = service_moments_exponential(p, q, m, alpha);
  double se_mean = std::sqrt((mc_second - mc_mean * mc_mean) / episodes);
  CHECK(std::fabs(mc_mean - sm.mean) < 5.0 * se_mean);
  double var2 = sum4 / episodes - mc_second * mc_second;
  double se_second = std::sqrt(var2 / episodes);
  CHECK(std::fabs(mc_second - sm.second) < 6.0 * se_second);
}

TEST_CASE("second moment diverges when deep phases are revisited too often") {
  // finite iff q^2 > 1 - p
  ServiceMoments div = service_moments_exponential(0.95572128539147227, 0.08,
                                                   10, 0.6931029311657688);
  CHECK(div.divergent);
  CHECK(std::isinf(div.second));
  CHECK(div.mean == doctest::Approx(2.3610999992364402).epsilon(1e-12));

  CHECK_FALSE(service_moments_exponential(0.92, 0.3, 10, 0.6).divergent);
  CHECK(service_moments_exponential(0.92, 0.28, 10, 0.6).divergent);
  // q^2 = 1 - p exactly: the closed form has a pole
  CHECK_THROWS_AS(service_moments_exponential(0.96, 0.2, 10, 0.6),
                  SingularParameter);
}

TEST_CASE("variance is nonnegative across the ergodic grid") {
  for (double p : {0.55, 0.8, 0.99}) {
    for (double q : {0.5, 0.7, 0.9}) {
      if (p + q <= 1.001) continue;
      for (int cap : {1, 2, 5, 20}) {
        ServiceMoments sm = service_moments_numeric(p, q, cap, 10, 0.6);
        CHECK(sm.second - sm.mean * sm.mean >= -1e-9);
      }
    }
  }
}

TEST_CASE("service shortens as success or retry probability grows") {
  double prev = 1e300;
  for (double p : {0.55, 0.7, 0.85, 0.99}) {
    double mean = service_moments_numeric(p, 0.6, 3, 10, 0.7).mean;
    CHECK(mean < prev);
    prev = mean;
  }
  prev = 1e300;
  for (double q : {0.45, 0.6, 0.75, 0.9}) {
    double mean = service_moments_numeric(0.9, q, 3, 10, 0.7).mean;
    CHECK(mean < prev);
    prev = mean;
  }
}

TEST_CASE("mean sojourn of the node queue") {
  ServiceMoments sm;
  sm.mean = 2.0;
  sm.second = 5.0;
  DelayEstimate est = pk_mean_delay(0.3, sm);
  CHECK(est.mean_delay == doctest::Approx(3.875).epsilon(1e-13));
  CHECK(est.utilization == doctest::Approx(0.6).epsilon(1e-13));

  CHECK(pk_mean_delay(0.0, sm).mean_delay == doctest::Approx(2.0));
  CHECK_THROWS_AS(pk_mean_delay(0.6, sm), Unstable);

  ServiceMoments div;
  div.mean = 2.0;
  div.second = std::numeric_limits<double>::infinity();
  div.divergent = true;
  CHECK_THROWS_AS(pk_mean_delay(0.1, div), UnboundedDelay);
  CHECK_THROWS_AS(pk_mean_delay(0.9, div), UnboundedDelay);
  CHECK_THROWS_AS(pk_mean_delay(-0.1, sm), OutOfRange);
}
