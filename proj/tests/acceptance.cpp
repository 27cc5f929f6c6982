// Acceptance run: prints one PASS/FAIL line per criterion.
//
//   acceptance [--only 1,6,...] [--expect-fail 2,9] [--seed N] [--out DIR]
//
// Exit status is 0 when every evaluated criterion passes, or fails only where
// listed in --expect-fail; otherwise 1.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "keceni/experiments.hpp"
#include "keceni/parallel.hpp"
#include "keceni/transport.hpp"
#include "oracle_world.hpp"
#include "oracles.hpp"
#include "properties.hpp"

using namespace keceni;
using keceni::testing::OracleWorld;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string num(double v, int prec = 4) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

Outcome combine(const std::vector<Check>& checks, double seconds, double limit) {
  Outcome o;
  o.pass = seconds <= limit;
  std::string failed;
  for (const auto& c : checks) {
    o.pass = o.pass && c.pass;
    if (!c.pass) failed += (failed.empty() ? "" : "; ") + c.name + " = " + c.detail;
  }
  std::ostringstream os;
  os << "runtime " << std::fixed << std::setprecision(1) << seconds << " s";
  if (std::isfinite(limit)) os << " (limit " << limit << " s)";
  if (!failed.empty()) os << "; failed: " << failed;
  else if (!checks.empty()) os << "; " << checks.front().name << " = " << checks.front().detail;
  o.detail = os.str();
  return o;
}

// ---- 6: pseudo-outcome double robustness ----

struct PatternStats {
  double sum = 0.0, sum2 = 0.0;
  std::size_t count = 0;
};

Outcome criterion6(std::uint64_t seed) {
  const auto t0 = Clock::now();
  const auto world = OracleWorld::six_nodes();
  const auto law = world.law();
  struct Setting {
    const char* name;
    OracleWorld::OutcomeFn mu;
    OracleWorld::PropensityFn pi;
  };
  const Setting settings[3] = {{"true mu, wrong pi", OracleWorld::mu_true, OracleWorld::pi_wrong},
                               {"wrong mu, true pi", OracleWorld::mu_wrong, OracleWorld::pi_true},
                               {"wrong mu, wrong pi", OracleWorld::mu_wrong, OracleWorld::pi_wrong}};
  std::vector<NuisanceBundle> bundles;
  for (const auto& s : settings)
    bundles.push_back({OracleWorld::outcome_model(s.mu), OracleWorld::propensity_model(s.pi), law});

  const std::size_t worlds = 10000;
  std::vector<std::map<std::pair<NodeId, std::size_t>, PatternStats>> stats(3);
  McOptions exact;  // every two-hop set here has at most 2^6 profiles
  for (std::size_t w = 0; w < worlds; ++w) {
    auto rng = make_rng(seed, Stream::oracle, w);
    const auto d = world.draw(rng);
    const auto ds = world.dataset(d);
    const NeighborhoodIndex index(ds);
    for (NodeId i = 0; i < static_cast<NodeId>(world.size()); ++i) {
      const auto key = std::make_pair(i, world.pattern(i, d.t));
      for (int s = 0; s < 3; ++s) {
        const auto po = pseudo_outcome(ds, index, bundles[s], i, exact, seed);
        if (!po.exact) return {false, "integral was not enumerated exactly"};
        auto& st = stats[s][key];
        st.sum += po.xi;
        st.sum2 += po.xi * po.xi;
        ++st.count;
      }
    }
  }

  double max_z[3] = {0, 0, 0};
  std::size_t tested = 0;
  for (int s = 0; s < 3; ++s) {
    for (const auto& [key, st] : stats[s]) {
      if (st.count < 30) continue;
      const double mean = st.sum / st.count;
      const double var = (st.sum2 - st.count * mean * mean) / (st.count - 1);
      const double se = std::sqrt(var / st.count);
      const double truth = world.theta(key.first, world.pattern_treatments(key.first, key.second));
      const double z = std::abs(mean - truth) / se;
      max_z[s] = std::max(max_z[s], z);
      if (s == 0) ++tested;
    }
  }
  const double secs = since(t0);
  Outcome o;
  o.pass = max_z[0] <= 4.0 && max_z[1] <= 4.0 && max_z[2] > 4.0 && secs <= 120.0;
  o.detail = std::to_string(worlds) + " worlds, " + std::to_string(tested) + " (node, pattern) cells; max |z|: " +
             settings[0].name + " " + num(max_z[0], 3) + ", " + settings[1].name + " " + num(max_z[1], 3) + ", " +
             settings[2].name + " " + num(max_z[2], 3) + "; runtime " + num(secs, 3) + " s";
  return o;
}

// ---- 7: Monte Carlo integrals against exact enumeration ----

Outcome criterion7(std::uint64_t seed) {
  const auto world = OracleWorld::six_nodes();
  const NuisanceBundle nb{OracleWorld::outcome_model(OracleWorld::mu_true),
                          OracleWorld::propensity_model(OracleWorld::pi_true), world.law()};
  auto rng = make_rng(seed, Stream::oracle, 1u << 30);
  const auto d = world.draw(rng);
  const auto ds = world.dataset(d);
  const NeighborhoodIndex index(ds);
  McOptions exact;
  McOptions mc;
  mc.draws = 10000;
  mc.exact_limit = 0;
  double max_z = 0.0, max_exact_err = 0.0;
  for (NodeId i = 0; i < static_cast<NodeId>(world.size()); ++i) {
    const auto pe = pseudo_outcome(ds, index, nb, i, exact, seed);
    const auto pm = pseudo_outcome(ds, index, nb, i, mc, seed);
    const auto m_true = world.enumerate(i, [&](const std::vector<double>& x) { return world.mu_at(OracleWorld::mu_true, i, d.t, x); });
    const auto v_true =
        world.enumerate(i, [&](const std::vector<double>& x) { return world.joint_prob(OracleWorld::pi_true, i, d.t, x); });
    max_exact_err = std::max({max_exact_err, std::abs(pe.m - m_true.mean), std::abs(pe.varpi - v_true.mean)});
    const double se_m = std::sqrt(m_true.var / mc.draws), se_v = std::sqrt(v_true.var / mc.draws);
    auto z = [](double a, double b, double se) { return se > 0 ? std::abs(a - b) / se : (a == b ? 0.0 : 1e300); };
    max_z = std::max({max_z, z(pm.m, m_true.mean, se_m), z(pm.varpi, v_true.mean, se_v)});
    if (pe.exact != true || pm.exact != false || pm.mc_draws != mc.draws) return {false, "integration mode mismatch"};
  }
  Outcome o;
  o.pass = max_z <= 4.0 && max_exact_err < 1e-12;
  o.detail = "6 nodes, m = 10^4: max |z| = " + num(max_z, 3) + ", exact path vs enumeration error " + num(max_exact_err, 3);
  return o;
}

// ---- 8: optimal transport ----

Outcome criterion8(std::uint64_t seed) {
  auto rng = make_rng(seed, Stream::oracle, 7);
  double worst = 0.0;
  for (int r = 0; r < 200; ++r) {
    const auto a = testing::random_multiset(rng, 3, 4, 3, r % 2 == 0);
    const auto b = testing::random_multiset(rng, 3, 4, 3, r % 2 == 0);
    worst = std::max(worst, std::abs(w1_discrete(a, b) - testing::brute_force_w1(a, b)));
  }
  int violations = 0;
  for (int r = 0; r < 500; ++r) {
    const auto a = testing::random_multiset(rng, 3, 4, 3, r % 3 == 0);
    const auto b = testing::random_multiset(rng, 3, 4, 3, r % 3 == 0);
    const auto c = testing::random_multiset(rng, 3, 4, 3, r % 3 == 0);
    const double ab = w1_discrete(a, b), ba = w1_discrete(b, a), ac = w1_discrete(a, c), cb = w1_discrete(c, b);
    if (std::abs(w1_discrete(a, a)) > 1e-12) ++violations;
    if (ab < 0.0 || std::abs(ab - ba) > 1e-12) ++violations;
    if (ab > ac + cb + 1e-9) ++violations;
  }
  return {worst <= 1e-9 && violations == 0,
          "200 instances, max |flow - brute force| = " + num(worst, 3) + "; 500 triples, axiom violations " +
              std::to_string(violations)};
}

// ---- 10: property suites ----

Outcome criterion10() {
  Outcome o{true, ""};
  for (const auto& c : testing::property_suite()) {
    o.pass = o.pass && c.pass;
    o.detail += (o.detail.empty() ? "" : "; ") + c.name + (c.pass ? " ok" : " FAILED (" + c.detail + ")");
  }
  return o;
}

std::set<int> parse_list(const std::string& s) {
  std::set<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.insert(std::stoi(tok));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only, expect_fail;
  RunOptions opts;
  std::filesystem::path out;
  for (int k = 1; k < argc; ++k) {
    const std::string a = argv[k];
    auto next = [&]() -> std::string {
      if (k + 1 >= argc) {
        std::cerr << "missing value for " << a << "\n";
        std::exit(2);
      }
      return argv[++k];
    };
    if (a == "--only") only = parse_list(next());
    else if (a == "--expect-fail") expect_fail = parse_list(next());
    else if (a == "--seed") opts.seed = std::stoull(next());
    else if (a == "--out") out = next();
    else {
      std::cerr << "unknown argument " << a << "\n";
      return 2;
    }
  }
  opts.threads = resolve_threads(0);
  auto wanted = [&](int c) { return only.empty() || only.count(c) > 0; };

  std::map<int, Outcome> results;
  auto report = [&](int c, const std::string& title, Outcome o) {
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c << " (" << title << "): " << o.detail << std::endl;
    results[c] = std::move(o);
  };

  if (wanted(1) || wanted(5)) {
    const auto r = run_nodewise(NodewiseConfig::at(Scale::desk), opts);
    if (wanted(1)) report(1, "node-wise recovery", combine(nodewise_checks(r), r.seconds, 600));
    if (wanted(5)) report(5, "SUTVA-AIPW negative control", combine(sutva_checks(r), r.seconds, 600));
    if (!out.empty()) {
      std::filesystem::create_directories(out);
      write_estimates_csv(out / "nodewise_estimates.csv", r.rows);
    }
  }
  if (wanted(2)) {
    const auto r = run_scaling(ScalingConfig::at(Scale::desk), opts);
    auto checks = scaling_checks(r);
    std::string seq;
    for (std::size_t k = 0; k < r.sizes.size(); ++k) seq += (k ? ", " : "") + std::to_string(r.sizes[k]) + ":" + num(r.rmse[k], 3);
    checks.push_back({"rmse by n", true, seq});
    auto o = combine(checks, r.seconds, 1200);
    o.detail += "; slope " + num(r.slope, 3) + "; rmse " + seq;
    report(2, "consistency slope", o);
    if (!out.empty()) write_scaling_csv(out / "scaling.csv", r);
  }
  if (wanted(3)) {
    auto cfg = DrConfig::at(Scale::desk);
    cfg.alphas = {0.0, 0.5, 1.0};
    const auto r = run_dr_grid(cfg, opts);
    auto o = combine(dr_checks(r), r.seconds, std::numeric_limits<double>::infinity());
    o.detail += "; KECENI rmse (0,0) " + num(r.cell(0, 0).rmse_keceni, 3) + ", (0,1) " + num(r.cell(0, 1).rmse_keceni, 3) +
                ", (1,0) " + num(r.cell(1, 0).rmse_keceni, 3) + ", (1,1) " + num(r.cell(1, 1).rmse_keceni, 3);
    report(3, "double robustness grid", o);
    if (!out.empty()) write_rmse_grid_csv(out / "rmse_grid.csv", r);
  }
  if (wanted(4)) {
    const auto r = run_ate(AteConfig::at(Scale::desk), opts);
    auto o = combine(ate_checks(r), r.seconds, 1800);
    o.detail += "; means " + num(r.avg0(), 4) + " / " + num(r.avg1(), 4) + ", ATE " + num(r.ate(), 4);
    report(4, "ATE study", o);
  }
  if (wanted(6)) report(6, "pseudo-outcome double robustness", criterion6(opts.seed));
  if (wanted(7)) report(7, "exact-integral oracle", criterion7(opts.seed));
  if (wanted(8)) report(8, "optimal transport oracle", criterion8(opts.seed));
  if (wanted(9)) {
    const auto r = run_coverage(CoverageConfig::at(Scale::desk), opts);
    auto o = combine(coverage_checks(r), r.seconds, std::numeric_limits<double>::infinity());
    std::string cov;
    for (const auto& row : r.rows)
      cov += (cov.empty() ? "" : ", ") + row.setting + "/" + row.estimand + " " + num(row.coverage, 3) + " (sigma " +
             num(row.mean_sigma, 3) + ", sd " + num(row.sd_estimate, 3) + ")";
    o.detail += "; coverage " + cov;
    report(9, "variance coverage", o);
    if (!out.empty()) write_coverage_csv(out / "coverage.csv", r);
  }
  if (wanted(10)) report(10, "property suites", criterion10());

  int passed = 0, unexpected = 0;
  for (const auto& [c, o] : results) {
    if (o.pass) ++passed;
    else if (!expect_fail.count(c)) ++unexpected;
  }
  std::cout << passed << "/" << results.size() << " criteria passed";
  if (!expect_fail.empty()) {
    std::cout << "; failures expected for";
    for (int c : expect_fail) std::cout << ' ' << c;
  }
  std::cout << "; unexpected failures " << unexpected << std::endl;
  return unexpected == 0 ? 0 : 1;
}
