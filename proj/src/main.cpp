// Command-line front end: stable-region reports, parameter sweeps, seeded
// simulations, and analysis-vs-simulation validation.  Flags can come from a
// JSON config file (--config); explicit flags win over config values.

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "csma/analytic.hpp"
#include "csma/csv.hpp"
#include "csma/hol.hpp"
#include "csma/sim.hpp"
#include "csma/stability.hpp"
#include "csma/types.hpp"

namespace {

using nlohmann::json;

struct Options {
  std::string scheme = "exp";
  double n = 50;
  double a = 0.1;
  double lambda_hat = 0.3;
  double q = 0.4;
  int cap_k = 1;
  int64_t horizon = 10'000'000;
  int64_t warmup = 1'000'000;
  uint64_t seed = 1;
  std::string out;
  std::string config_path;
  // sweep
  std::string var = "q";
  double start = 0.05;
  double stop = 0.95;
  double step = 0.05;
  bool with_sim = false;
  int steps = 50;
  // simulate extras
  std::string trace_backlog;
  std::string trace_attempts;
  bool boundary_arrivals = false;
};

csma::Scheme parse_scheme(const std::string& s) {
  if (s == "geo") return csma::Scheme::geometric;
  if (s == "exp") return csma::Scheme::exponential;
  if (s == "k") return csma::Scheme::k_exponential;
  throw CLI::ValidationError("--scheme", "must be one of geo|exp|k");
}

int slots_per_packet(double a) {
  double m = 1.0 / a;
  int mi = static_cast<int>(std::lround(m));
  if (mi < 1 || std::fabs(m - mi) > 1e-6 * m)
    throw CLI::ValidationError("--a", "must equal 1/M for an integer M >= 1");
  return mi;
}

csma::NetworkParams make_params(const Options& o) {
  csma::NetworkParams par;
  par.scheme = parse_scheme(o.scheme);
  par.n = o.n;
  par.a = o.a;
  par.m = slots_per_packet(o.a);
  par.lambda_hat = o.lambda_hat;
  par.q = o.q;
  par.phase_cap = o.cap_k;
  return par;
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--scheme", o.scheme, "backoff scheme: geo|exp|k");
  cmd->add_option("--n", o.n, "number of nodes (inf allowed where meaningful)");
  cmd->add_option("--a", o.a, "mini-slot / propagation ratio, 1/M");
  cmd->add_option("--lambda-hat", o.lambda_hat, "aggregate input rate, packets/slot");
  cmd->add_option("--q", o.q, "retransmission factor");
  cmd->add_option("--cap-k", o.cap_k, "backoff phase cap for --scheme k");
  cmd->add_option("--horizon", o.horizon, "simulated mini-slots");
  cmd->add_option("--warmup", o.warmup, "discarded mini-slots");
  cmd->add_option("--seed", o.seed, "master RNG seed");
  cmd->add_option("--out", o.out, "CSV output path");
  cmd->add_option("--config", o.config_path, "JSON config file; flags override");
}

// fill options the user did not pass from the JSON config
void apply_config(CLI::App* cmd, Options& o) {
  if (o.config_path.empty()) return;
  std::ifstream in(o.config_path);
  if (!in) throw CLI::ValidationError("--config", "cannot read " + o.config_path);
  json j = json::parse(in);

  auto untouched = [&](const std::string& flag) {
    const CLI::Option* opt = cmd->get_option_no_throw(flag);
    return opt != nullptr && opt->count() == 0;
  };
  auto lookup = [&](const std::string& key) -> const json* {
    if (j.contains(key)) return &j.at(key);
    std::string alt = key;
    for (char& c : alt)
      if (c == '-') c = '_';
    if (j.contains(alt)) return &j.at(alt);
    return nullptr;
  };
  auto pull = [&](const std::string& flag, auto& var) {
    if (!untouched("--" + flag)) return;
    if (const json* v = lookup(flag)) var = v->get<std::decay_t<decltype(var)>>();
  };

  pull("scheme", o.scheme);
  pull("n", o.n);
  pull("a", o.a);
  pull("lambda-hat", o.lambda_hat);
  pull("q", o.q);
  pull("cap-k", o.cap_k);
  pull("horizon", o.horizon);
  pull("warmup", o.warmup);
  pull("seed", o.seed);
  pull("out", o.out);
  pull("var", o.var);
  pull("start", o.start);
  pull("stop", o.stop);
  pull("step", o.step);
  pull("steps", o.steps);
  pull("with-sim", o.with_sim);
  pull("trace-backlog", o.trace_backlog);
  pull("trace-attempts", o.trace_attempts);
  pull("boundary-arrivals", o.boundary_arrivals);
}

double interval_value(const csma::StableInterval& iv, bool lo) {
  if (iv.empty) return std::numeric_limits<double>::quiet_NaN();
  return lo ? iv.lo : iv.hi;
}

csma::RegionReport regions_for(csma::Scheme scheme, double n, double lambda_hat,
                               double a) {
  if (scheme == csma::Scheme::geometric)
    return csma::stable_regions_geometric(n, lambda_hat, a);
  if (scheme == csma::Scheme::exponential)
    return csma::stable_regions_exponential(n, lambda_hat, a);
  throw CLI::ValidationError("--scheme", "regions supports geo|exp only");
}

int cmd_regions(const Options& o) {
  csma::Scheme scheme = parse_scheme(o.scheme);
  if (scheme == csma::Scheme::k_exponential)
    throw CLI::ValidationError("--scheme", "regions supports geo|exp only");
  slots_per_packet(o.a);

  csma::MaxThroughput mt = csma::max_throughput(o.a);
  if (!o.out.empty()) {
    csma::CsvWriter csv(o.out);
    csv.comment("stable retransmission-factor regions vs aggregate input rate");
    csv.comment("scheme=" + o.scheme + " n=" + csma::csv_format(o.n) +
                " a=" + csma::csv_format(o.a));
    csv.comment("empty cells: no stable attempt rate at this input rate");
    csv.header({"lambda_hat", "g_small", "g_large", "g_hat_large", "qi_lo",
                "qi_hi", "qii_lo", "qii_hi", "qd_lo", "qd_hi", "feasible"});
    const int steps = std::max(o.steps, 2);
    for (int k = 1; k <= steps; ++k) {
      // run slightly past the peak so the infeasible tail shows up explicitly
      double lam = 1.02 * mt.lambda_max * k / steps;
      try {
        csma::RegionReport rep = regions_for(scheme, o.n, lam, o.a);
        csv.row({lam, rep.g_small, rep.g_large, rep.g_hat_large,
                 interval_value(rep.region_i, true),
                 interval_value(rep.region_i, false),
                 interval_value(rep.region_ii, true),
                 interval_value(rep.region_ii, false),
                 interval_value(rep.region_delay, true),
                 interval_value(rep.region_delay, false), 1.0});
      } catch (const csma::NoStableRate&) {
        double nan = std::numeric_limits<double>::quiet_NaN();
        csv.row({lam, nan, nan, nan, nan, nan, nan, nan, nan, nan, 0.0});
      }
    }
  }

  auto print_iv = [](const char* name, const csma::StableInterval& iv) {
    if (iv.empty)
      std::printf("%-14s empty\n", name);
    else
      std::printf("%-14s [%.12g, %.12g]%s\n", name, iv.lo, iv.hi,
                  iv.clamped ? "  (clamped)" : "");
  };
  try {
    csma::RegionReport rep = regions_for(scheme, o.n, o.lambda_hat, o.a);
    std::printf("scheme=%s n=%g a=%g lambda_hat=%g\n", o.scheme.c_str(), o.n,
                o.a, o.lambda_hat);
    std::printf("attempt rates  g_small=%.12g g_large=%.12g g_hat_large=%.12g\n",
                rep.g_small, rep.g_large, rep.g_hat_large);
    print_iv("region I", rep.region_i);
    print_iv("region II", rep.region_ii);
    print_iv("bounded delay", rep.region_delay);
  } catch (const csma::NoStableRate&) {
    std::printf("scheme=%s n=%g a=%g lambda_hat=%g\n", o.scheme.c_str(), o.n,
                o.a, o.lambda_hat);
    std::printf("input rate exceeds lambda_max=%.12g: no stable region\n",
                mt.lambda_max);
  }
  return 0;
}

csma::ServiceMoments moments_at(csma::Scheme scheme, double p, double q,
                                int cap, int m, double alpha) {
  switch (scheme) {
    case csma::Scheme::geometric:
      return csma::service_moments_geometric(p, q, m, alpha);
    case csma::Scheme::exponential:
      return csma::service_moments_exponential(p, q, m, alpha);
    default:
      return csma::service_moments_numeric(p, q, cap, m, alpha);
  }
}

int cmd_sweep(const Options& o) {
  if (o.out.empty())
    throw CLI::ValidationError("--out", "sweep requires an output path");
  if (!(o.step > 0.0) || !(o.stop >= o.start))
    throw CLI::ValidationError("--step", "need start <= stop and step > 0");
  const int count = static_cast<int>(std::floor((o.stop - o.start) / o.step + 1e-9)) + 1;
  if (count < 1) throw CLI::ValidationError("--step", "empty sweep range");
  const double nan = std::numeric_limits<double>::quiet_NaN();

  csma::CsvWriter csv(o.out);
  if (o.var == "g") {
    csv.comment("channel throughput vs aggregate attempt rate, a=" +
                csma::csv_format(o.a));
    csv.header({"g", "throughput"});
    for (int i = 0; i < count; ++i) {
      double g = o.start + i * o.step;
      csv.row({g, csma::throughput_of_attempt_rate(g, o.a)});
    }
    return 0;
  }
  if (o.var != "q")
    throw CLI::ValidationError("--var", "must be g or q");

  csma::Scheme scheme = parse_scheme(o.scheme);
  int m = slots_per_packet(o.a);
  csma::RegionReport rep = regions_for(
      scheme == csma::Scheme::k_exponential ? csma::Scheme::geometric : scheme,
      o.n, o.lambda_hat, o.a);
  csma::ChannelEquilibrium light = csma::channel_equilibrium(rep.g_small, o.a);

  csv.comment("per-q behavior at the light-traffic operating point");
  csv.comment("scheme=" + o.scheme + " n=" + csma::csv_format(o.n) +
              " a=" + csma::csv_format(o.a) +
              " lambda_hat=" + csma::csv_format(o.lambda_hat));
  csv.comment("empty cells: moments diverge or queue unstable at that q");
  std::vector<std::string> cols = {"q",         "in_region_i", "in_region_ii",
                                   "in_delay",  "service_mean", "service_second",
                                   "pk_delay"};
  if (o.with_sim) {
    cols.push_back("sim_throughput");
    cols.push_back("sim_mean_backlog");
    cols.push_back("sim_mean_delay");
  }
  csv.header(cols);

  auto inside = [](const csma::StableInterval& iv, double q) {
    return !iv.empty && q >= iv.lo && q <= iv.hi ? 1.0 : 0.0;
  };
  for (int i = 0; i < count; ++i) {
    double q = o.start + i * o.step;
    std::vector<double> row = {q, inside(rep.region_i, q),
                               inside(rep.region_ii, q),
                               inside(rep.region_delay, q)};
    double mean = nan, second = nan, delay = nan;
    try {
      csma::ServiceMoments sm =
          moments_at(scheme, light.p, q, o.cap_k, m, light.alpha);
      mean = sm.mean;
      second = sm.divergent ? nan : sm.second;
      csma::DelayEstimate est = csma::pk_mean_delay(o.lambda_hat / o.n, sm);
      delay = est.mean_delay;
    } catch (const csma::ModelError&) {
    }
    row.push_back(mean);
    row.push_back(second);
    row.push_back(delay);
    if (o.with_sim) {
      csma::SimConfig sc;
      sc.params = make_params(o);
      sc.params.q = q;
      sc.horizon = o.horizon;
      sc.warmup = o.warmup;
      sc.seed = o.seed + 1000003ULL * static_cast<uint64_t>(i);
      csma::SimReport sim = csma::run_simulation(sc);
      row.push_back(sim.throughput);
      row.push_back(sim.mean_backlog);
      row.push_back(sim.packets_delivered > 0 ? sim.mean_delay : nan);
    }
    csv.row(row);
  }
  return 0;
}

int cmd_simulate(const Options& o) {
  csma::SimConfig sc;
  sc.params = make_params(o);
  sc.horizon = o.horizon;
  sc.warmup = o.warmup;
  sc.seed = o.seed;
  sc.trace_attempts = true;
  sc.spread_arrivals = !o.boundary_arrivals;

  csma::SimReport rep = csma::run_simulation(sc);

  std::printf("scheme=%s n=%g a=%g lambda_hat=%g q=%g", o.scheme.c_str(),
              o.n, o.a, o.lambda_hat, o.q);
  if (parse_scheme(o.scheme) == csma::Scheme::k_exponential)
    std::printf(" cap_k=%d", o.cap_k);
  std::printf(" seed=%" PRIu64 "\n", o.seed);
  std::printf("horizon=%" PRId64 " warmup=%" PRId64 " mini-slots\n", o.horizon,
              o.warmup);
  std::printf("throughput      %.6g packets/slot\n", rep.throughput);
  std::printf("mean_delay      %.6g slots (second moment %.6g)\n",
              rep.mean_delay, rep.delay_second_moment);
  std::printf("service_mean    %.6g slots (second moment %.6g)\n",
              rep.service_mean, rep.service_second);
  std::printf("mean_backlog    %.6g packets (final %" PRId64 ")\n",
              rep.mean_backlog, rep.final_backlog);
  std::printf("channel         idle=%.4f suc=%.4f col=%.4f\n", rep.occ_idle,
              rep.occ_suc, rep.occ_col);
  std::printf("sensed idle     %.6g\n", rep.sensed_idle_fraction);
  std::printf("measured p      %.6g (busy periods %" PRId64 ", collisions %" PRId64
              ")\n",
              rep.measured_p, rep.busy_periods, rep.collisions);
  if (rep.has_attempt_stats) {
    double g_hat = rep.attempt_stats.mean_attempt_rate;
    double binom = g_hat * (1.0 - g_hat / o.n);
    std::printf("attempt rate    g_hat=%.6g var=%.6g binom_ratio=%.4f "
                "coverage=%.4f\n",
                g_hat, rep.attempt_stats.variance,
                binom > 0 ? rep.attempt_stats.variance / binom : 0.0,
                rep.attempt_stats.three_sigma_coverage);
  }
  std::printf("conservation    arrived=%" PRId64 " delivered=%" PRId64
              " backlog=%" PRId64 "\n",
              rep.packets_arrived, rep.packets_delivered, rep.final_backlog);

  if (!o.out.empty()) {
    csma::CsvWriter csv(o.out);
    csv.comment("single simulation run summary");
    csv.header({"throughput", "mean_delay", "delay_second", "service_mean",
                "service_second", "mean_backlog", "occ_idle", "occ_suc",
                "occ_col", "sensed_idle", "measured_p", "g_hat", "var_g",
                "coverage", "arrived", "delivered", "final_backlog"});
    csv.row({rep.throughput, rep.mean_delay, rep.delay_second_moment,
             rep.service_mean, rep.service_second, rep.mean_backlog,
             rep.occ_idle, rep.occ_suc, rep.occ_col, rep.sensed_idle_fraction,
             rep.measured_p,
             rep.has_attempt_stats ? rep.attempt_stats.mean_attempt_rate : 0.0,
             rep.has_attempt_stats ? rep.attempt_stats.variance : 0.0,
             rep.has_attempt_stats ? rep.attempt_stats.three_sigma_coverage : 1.0,
             static_cast<double>(rep.packets_arrived),
             static_cast<double>(rep.packets_delivered),
             static_cast<double>(rep.final_backlog)});
  }
  if (!o.trace_backlog.empty()) {
    csma::CsvWriter csv(o.trace_backlog);
    csv.comment("total packets in system, sampled over the whole run");
    csv.header({"mini_slot", "backlog"});
    for (const auto& [t, b] : rep.backlog_trace)
      csv.row({static_cast<double>(t), static_cast<double>(b)});
  }
  if (!o.trace_attempts.empty()) {
    csma::CsvWriter csv(o.trace_attempts);
    csv.comment("per-slot attempt counts inside the measurement window");
    csv.header({"slot", "attempts"});
    int m = slots_per_packet(o.a);
    int64_t first_slot = (o.warmup + m - 1) / m;
    for (size_t i = 0; i < rep.attempt_trace.size(); ++i)
      csv.row({static_cast<double>(first_slot + static_cast<int64_t>(i)),
               static_cast<double>(rep.attempt_trace[i])});
  }
  return 0;
}

struct Checker {
  int failures = 0;

  void near(const std::string& name, double measured, double expected,
            double tol, const char* tol_kind = "abs") {
    double err = std::fabs(measured - expected);
    if (std::string(tol_kind) == "rel")
      err = err / std::max(std::fabs(expected), 1e-300);
    bool ok = err <= tol;
    report(name, ok,
           "measured=" + csma::csv_format(measured) +
               " expected=" + csma::csv_format(expected) + " " + tol_kind +
               "_err=" + csma::csv_format(err) + " tol=" + csma::csv_format(tol));
  }

  void in_range(const std::string& name, double measured, double lo, double hi) {
    bool ok = measured >= lo && measured <= hi;
    report(name, ok,
           "measured=" + csma::csv_format(measured) + " range=[" +
               csma::csv_format(lo) + ", " + csma::csv_format(hi) + "]");
  }

  void below(const std::string& name, double measured, double bound) {
    report(name, measured <= bound,
           "measured=" + csma::csv_format(measured) +
               " bound=" + csma::csv_format(bound));
  }

  void report(const std::string& name, bool ok, const std::string& detail) {
    std::printf("[%s] %-44s %s\n", ok ? "PASS" : "FAIL", name.c_str(),
                detail.c_str());
    if (!ok) ++failures;
  }
};

int cmd_validate(const Options& o) {
  Checker ck;

  {
    csma::ThroughputRoots roots = csma::attempt_rate_roots(0.3, 0.1);
    ck.in_range("roots.g_small(0.3,0.1)", roots.g_small, 0.44, 0.51);
    ck.in_range("roots.g_large(0.3,0.1)", roots.g_large, 18.8, 19.0);
  }
  {
    double worst = 0.0;
    for (double lam : {0.1, 0.2, 0.3, 0.5})
      for (double a : {0.05, 0.1, 0.2}) {
        csma::SuccessProbPair pp = csma::equilibrium_success_prob(lam, a);
        for (double p : {pp.high, pp.low}) {
          double res = std::fabs(p - std::exp(-lam * (1.0 + a - p) / p));
          worst = std::max(worst, res);
        }
      }
    ck.below("success-prob fixed-point residual", worst, 1e-10);
  }
  {
    double worst = 0.0;
    for (double p : {0.5, 0.7, 0.9, 0.99})
      for (double q : {0.6, 0.8, 0.95})
        for (double alpha : {0.3, 0.7, 1.0})
          for (int m : {2, 10, 100}) {
            if (p + q <= 1.0 + 1e-9) continue;
            csma::ServiceMoments closed =
                csma::service_moments_geometric(p, q, m, alpha);
            csma::ServiceMoments numeric =
                csma::service_moments_numeric(p, q, 1, m, alpha);
            worst = std::max(worst, std::fabs(closed.mean - numeric.mean) /
                                        numeric.mean);
            worst = std::max(worst, std::fabs(closed.second - numeric.second) /
                                        numeric.second);
          }
    ck.below("single-phase closed forms vs numeric", worst, 1e-8);
  }
  {
    double worst_mean = 0.0, worst_second = 0.0;
    for (double p : {0.5, 0.7, 0.9, 0.99})
      for (double q : {0.6, 0.8, 0.95})
        for (double alpha : {0.3, 0.7, 1.0})
          for (int m : {2, 10, 100}) {
            if (p + q <= 1.0 + 1e-9) continue;
            if (q * q <= 1.0 - p + 0.05) continue;
            csma::ServiceMoments closed =
                csma::service_moments_exponential(p, q, m, alpha);
            csma::ServiceMoments numeric =
                csma::service_moments_numeric(p, q, 200, m, alpha);
            worst_mean = std::max(
                worst_mean, std::fabs(closed.mean - numeric.mean) / numeric.mean);
            worst_second =
                std::max(worst_second,
                         std::fabs(closed.second - numeric.second) / numeric.second);
          }
    ck.below("unbounded-backoff mean vs numeric K=200", worst_mean, 1e-6);
    ck.below("unbounded-backoff second vs numeric K=200", worst_second, 1e-5);
  }
  {
    csma::MaxThroughput mt = csma::max_throughput(0.1);
    double best = 0.0;
    for (int i = 1; i <= 100000; ++i)
      best = std::max(best,
                      csma::throughput_of_attempt_rate(20.0 * i / 100000.0, 0.1));
    ck.near("peak throughput vs 1e5-point grid", mt.lambda_max, best, 1e-6);
  }
  {
    double worst = 0.0;
    for (double q : {0.05, 0.1, 0.232, 0.4, 0.7}) {
      double g = csma::attempt_rate_from_q(q, 50, 0.3, 0.1,
                                           csma::Scheme::geometric);
      worst = std::max(worst,
                       std::fabs(csma::q_of_g_geometric(g, 50, 0.3, 0.1) - q));
      g = csma::attempt_rate_from_q(q, 50, 0.3, 0.1, csma::Scheme::exponential);
      worst = std::max(worst,
                       std::fabs(csma::q_of_g_exponential(g, 50, 0.3, 0.1) - q));
    }
    ck.below("attempt-rate round trip |h(G(q)) - q|", worst, 1e-9);
  }
  {
    csma::RegionReport geo = csma::stable_regions_geometric(50, 0.3, 0.1);
    ck.in_range("geometric region_ii.hi", geo.region_ii.hi, 0.228, 0.238);
    csma::RegionReport exp = csma::stable_regions_exponential(50, 0.3, 0.1);
    ck.in_range("exponential region_ii.lo", exp.region_ii.lo, 0.049, 0.057);
    ck.in_range("exponential delay region lo", exp.region_delay.lo, 0.21, 0.23);
    ck.in_range("exponential delay region hi", exp.region_delay.hi, 0.72, 0.74);
  }

  if (o.with_sim) {
    Options so = o;
    so.scheme = "exp";
    so.n = 50;
    so.a = 0.1;
    so.lambda_hat = 0.3;
    so.q = 0.4;
    csma::SimConfig sc;
    sc.params = make_params(so);
    sc.horizon = so.horizon;
    sc.warmup = so.warmup;
    sc.seed = so.seed;
    sc.trace_attempts = true;
    csma::SimReport rep = csma::run_simulation(sc);

    ck.near("sim throughput vs input rate", rep.throughput, 0.3, 0.03, "rel");
    double g_hat = rep.attempt_stats.mean_attempt_rate;
    csma::ChannelEquilibrium ch = csma::channel_equilibrium(g_hat, so.a);
    csma::ServiceMoments sm =
        csma::service_moments_exponential(ch.p, so.q, 10, ch.alpha);
    ck.near("sim service mean vs analysis", rep.service_mean, sm.mean, 0.05,
            "rel");
    csma::DelayEstimate est = csma::pk_mean_delay(so.lambda_hat / so.n, sm);
    ck.near("sim mean delay vs queueing formula", rep.mean_delay,
            est.mean_delay, 0.15, "rel");
    double binom = g_hat * (1.0 - g_hat / so.n);
    ck.in_range("attempt variance / binomial variance",
                rep.attempt_stats.variance / binom, 0.85, 1.15);
    ck.in_range("three-sigma coverage",
                rep.attempt_stats.three_sigma_coverage, 0.97, 1.0);
  }

  std::printf("%s: %d check(s) failed\n", ck.failures ? "FAIL" : "OK",
              ck.failures);
  return ck.failures ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slotted non-persistent CSMA with K-exponential backoff"};
  app.require_subcommand(1);
  Options o;

  CLI::App* regions =
      app.add_subcommand("regions", "stable retransmission-factor regions");
  regions->add_option("--steps", o.steps, "rows in the input-rate sweep");
  add_common(regions, o);

  CLI::App* sweep = app.add_subcommand("sweep", "one-dimensional parameter sweep");
  sweep->add_option("--var", o.var, "swept variable: g or q");
  sweep->add_option("--start", o.start, "sweep start");
  sweep->add_option("--stop", o.stop, "sweep stop (inclusive)");
  sweep->add_option("--step", o.step, "sweep step");
  sweep->add_flag("--sim", o.with_sim, "add simulated columns");
  add_common(sweep, o);

  CLI::App* simulate = app.add_subcommand("simulate", "run one seeded simulation");
  simulate->add_option("--trace-backlog", o.trace_backlog,
                       "write backlog trace CSV here");
  simulate->add_option("--trace-attempts", o.trace_attempts,
                       "write per-slot attempt counts CSV here");
  simulate->add_flag("--boundary-arrivals", o.boundary_arrivals,
                     "pin arrivals to slot boundaries instead of spreading");
  add_common(simulate, o);

  CLI::App* validate =
      app.add_subcommand("validate", "check analysis against oracles");
  validate->add_flag("--with-sim", o.with_sim,
                     "include simulation cross-checks");
  add_common(validate, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(regions)) {
      apply_config(regions, o);
      return cmd_regions(o);
    }
    if (app.got_subcommand(sweep)) {
      apply_config(sweep, o);
      return cmd_sweep(o);
    }
    if (app.got_subcommand(simulate)) {
      apply_config(simulate, o);
      return cmd_simulate(o);
    }
    apply_config(validate, o);
    return cmd_validate(o);
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const csma::ModelError& e) {
    std::fprintf(stderr, "model error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
