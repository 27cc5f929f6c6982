#include "keceni/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

#include "keceni/error.hpp"
#include "keceni/parallel.hpp"

namespace keceni {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void report(const RunOptions& o, const std::string& msg) {
  if (o.progress) o.progress(msg);
}

double mean(std::span<const double> v) { return v.empty() ? std::numeric_limits<double>::quiet_NaN() : pairwise_sum(v) / static_cast<double>(v.size()); }

double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

Check within(const std::string& name, double v, double lo, double hi) {
  return {name, v >= lo && v <= hi, fmt(v) + " in [" + fmt(lo) + ", " + fmt(hi) + "]"};
}

double lambda_above(std::span<const double> grid, double min_delta) {
  for (double l : grid)
    if (l > min_delta) return l;
  return min_delta > 0.0 ? 2.0 * min_delta : 1.0;
}

Estimate smooth_with_fallback(std::span<const double> delta, std::span<const PseudoOutcome> po, KernelShape shape,
                              const CVResult& cv) {
  try {
    return kernel_smooth(delta, po, Kernel{shape, cv.chosen});
  } catch (const EmptyKernelError& e) {
    if (!std::isfinite(e.min_delta())) throw;
    return kernel_smooth(delta, po, Kernel{shape, lambda_above(cv.grid, e.min_delta())});
  }
}

NuisanceSpec dr_spec(double alpha_pi, double alpha_mu) {
  NuisanceSpec s;
  s.outcome_map = "dr-outcome";
  s.alpha_mu = alpha_mu;
  s.propensity_map = "dr-propensity";
  s.alpha_pi = alpha_pi;
  return s;
}

EstimateRow make_row(std::size_t rep, const Estimate& est, const std::string& label) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return {rep, est.scenario.target, label, est.theta, est.d_hat, est.lambda, nan, nan, nan};
}

void attach(EstimateRow& row, const VarianceReport& v) {
  row.sigma = v.sigma();
  row.ci_lo = v.ci_lo;
  row.ci_hi = v.ci_hi;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << std::setprecision(12);
  return out;
}

}  // namespace

Scale parse_scale(std::string_view name) {
  if (name == "smoke") return Scale::smoke;
  if (name == "desk") return Scale::desk;
  if (name == "full") return Scale::full;
  throw InputError("unknown scale '" + std::string(name) + "' (smoke, desk, full)");
}

std::string to_string(Scale scale) {
  switch (scale) {
    case Scale::smoke: return "smoke";
    case Scale::desk: return "desk";
    case Scale::full: return "full";
  }
  return "desk";
}

void write_estimates_csv(const std::filesystem::path& path, const std::vector<EstimateRow>& rows) {
  auto out = open_out(path);
  out << "rep,target,scenario,theta,d_hat,lambda,sigma,ci_lo,ci_hi\n";
  auto num = [&](double v) -> std::ostream& {
    if (std::isnan(v)) return out;
    return out << v;
  };
  for (const auto& r : rows) {
    out << r.rep << ',' << r.target << ',' << r.scenario << ',';
    num(r.theta) << ',';
    num(r.d_hat) << ',';
    num(r.lambda) << ',';
    num(r.sigma) << ',';
    num(r.ci_lo) << ',';
    num(r.ci_hi) << '\n';
  }
}

FittedReplication fit_replication(const Dataset& ds, const NuisanceSpec& spec, const DissimilarityMetric& metric,
                                  const RunOptions& opts, std::uint64_t seed) {
  FittedReplication f;
  f.index = NeighborhoodIndex(ds);
  f.nuisances = fit_nuisances(ds, f.index, spec);
  f.po = pseudo_outcomes(ds, f.index, f.nuisances, opts.mc, seed, opts.threads);
  const auto grid = default_bandwidth_grid(ds, metric);
  f.cv = cv_select(ds, f.index, f.po, metric, opts.shape, grid, opts.threads);
  return f;
}

Estimate estimate_with_fallback(const Dataset& ds, const FittedReplication& fit, const DissimilarityMetric& metric,
                                KernelShape shape, const TreatmentScenario& sc) {
  validate_scenario(ds.graph, sc);
  const auto observed = observed_local_treatments(ds);
  const auto delta = dissimilarities(observed, metric, sc.local());
  auto est = smooth_with_fallback(delta, fit.po, shape, fit.cv);
  est.scenario = sc;
  est.metric = metric.name();
  return est;
}

// ---------------------------------------------------------------------------

NodewiseConfig NodewiseConfig::at(Scale scale) {
  NodewiseConfig c;
  if (scale == Scale::smoke) {
    c.n = 150;
    c.reps = 3;
  } else if (scale == Scale::full) {
    c.n = 1000;
    c.reps = 80;
  }
  return c;
}

double NodewiseResult::mean1() const { return mean(theta1); }
double NodewiseResult::mean0() const { return mean(theta0); }
double NodewiseResult::mean_difference() const { return mean1() - mean0(); }
double NodewiseResult::mean_aipw() const { return mean(aipw); }

NodewiseResult run_nodewise(const NodewiseConfig& cfg, const RunOptions& opts) {
  const auto t0 = Clock::now();
  const auto net = gen_latent_network(cfg.n, cfg.rho, cfg.beta, opts.seed);
  const auto& g = net.graph;
  NodewiseResult res;
  res.target = select_target(net.z);
  res.target_degree = g.degree(res.target);
  const auto sc1 = all_treated(g, res.target);
  const auto sc0 = none_treated(g, res.target);
  res.truth1 = true_theta_nodewise(g, cfg.coef, sc1);
  res.truth0 = true_theta_nodewise(g, cfg.coef, sc0);
  const auto metric = DissimilarityMetric::parse("summary-l1");
  VarianceOptions vo;

  for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
    const auto seed = replication_seed(opts.seed, rep);
    const auto ds = gen_nodewise_data(g, cfg.coef, seed);
    const auto fit = fit_replication(ds, NuisanceSpec{}, metric, opts, seed);
    for (const auto* sc : {&sc1, &sc0}) {
      const auto est = estimate_with_fallback(ds, fit, metric, opts.shape, *sc);
      const auto iv = influence_vector(ds, fit.index, fit.nuisances, fit.po, est, vo, seed, opts.threads);
      auto row = make_row(rep, est, sc == &sc1 ? "all_treated" : "none_treated");
      attach(row, hac_variance(iv, g, vo.radius, vo.level, est.theta));
      res.rows.push_back(row);
      (sc == &sc1 ? res.theta1 : res.theta0).push_back(est.theta);
    }
    res.aipw.push_back(aipw_sutva(ds).difference);
    report(opts, "nodewise rep " + std::to_string(rep + 1) + "/" + std::to_string(cfg.reps) + " lambda=" + fmt(fit.cv.chosen));
  }
  res.seconds = seconds_since(t0);
  return res;
}

// ---------------------------------------------------------------------------

DrConfig DrConfig::at(Scale scale) {
  DrConfig c;
  c.alphas.clear();
  if (scale == Scale::smoke) {
    c.n = 150;
    c.reps = 2;
    c.alphas = {0.0, 1.0};
    c.g_draws = 400;
    return c;
  }
  for (int k = 0; k <= 10; ++k) c.alphas.push_back(k / 10.0);
  if (scale == Scale::full) {
    c.n = 1000;
    c.reps = 80;
  }
  return c;
}

const DrCell& DrResult::cell(double alpha_pi, double alpha_mu) const {
  for (const auto& c : cells)
    if (std::abs(c.alpha_pi - alpha_pi) < 1e-9 && std::abs(c.alpha_mu - alpha_mu) < 1e-9) return c;
  throw std::out_of_range("no grid cell at alpha_pi=" + fmt(alpha_pi) + ", alpha_mu=" + fmt(alpha_mu));
}

DrResult run_dr_grid(const DrConfig& cfg, const RunOptions& opts) {
  const auto t0 = Clock::now();
  const auto net = gen_latent_network(cfg.n, cfg.rho, cfg.beta, opts.seed);
  const auto& g = net.graph;
  DrResult res;
  res.target = select_target(net.z);
  const auto [sc0, sc1] = half_treated_pair(g, res.target);
  res.truth0 = true_theta_nodewise(g, cfg.coef, sc0);
  res.truth1 = true_theta_nodewise(g, cfg.coef, sc1);
  const auto metric = DissimilarityMetric::parse("summary-l1");
  const McOptions gmc{cfg.g_draws, opts.mc.exact_limit};

  const std::size_t A = cfg.alphas.size();
  std::vector<double> sse_k(A * A, 0.0), sse_g(A * A, 0.0);
  for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
    const auto seed = replication_seed(opts.seed, rep);
    const auto ds = gen_nodewise_data(g, cfg.coef, seed);
    for (std::size_t a = 0; a < A; ++a) {
      for (std::size_t b = 0; b < A; ++b) {
        const double api = cfg.alphas[a], amu = cfg.alphas[b];
        const auto fit = fit_replication(ds, dr_spec(api, amu), metric, opts, seed);
        const std::string cell = "pi=" + fmt(api) + ";mu=" + fmt(amu);
        for (const auto& [sc, truth, tag] : {std::tuple{&sc0, res.truth0, "t0"}, std::tuple{&sc1, res.truth1, "t1"}}) {
          const auto est = estimate_with_fallback(ds, fit, metric, opts.shape, *sc);
          const double gc = g_computation(ds, fit.index, fit.nuisances, *sc, gmc, seed);
          sse_k[a * A + b] += (est.theta - truth) * (est.theta - truth);
          sse_g[a * A + b] += (gc - truth) * (gc - truth);
          res.rows.push_back(make_row(rep, est, cell + ";" + tag + ";keceni"));
          auto grow = make_row(rep, est, cell + ";" + tag + ";gcomp");
          grow.theta = gc;
          grow.d_hat = grow.lambda = std::numeric_limits<double>::quiet_NaN();
          res.rows.push_back(grow);
        }
      }
    }
    report(opts, "dr rep " + std::to_string(rep + 1) + "/" + std::to_string(cfg.reps));
  }
  const double denom = 2.0 * static_cast<double>(std::max<std::size_t>(cfg.reps, 1));
  for (std::size_t a = 0; a < A; ++a)
    for (std::size_t b = 0; b < A; ++b)
      res.cells.push_back({cfg.alphas[a], cfg.alphas[b], std::sqrt(sse_g[a * A + b] / denom),
                           std::sqrt(sse_k[a * A + b] / denom)});
  res.seconds = seconds_since(t0);
  return res;
}

// ---------------------------------------------------------------------------

CoverageConfig CoverageConfig::at(Scale scale) {
  CoverageConfig c;
  if (scale == Scale::smoke) {
    c.n = 150;
    c.reps = 3;
  } else if (scale == Scale::full) {
    c.n = 1000;
    c.reps = 80;
    c.settings = {{0.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}, {1.0, 1.0}};
  }
  return c;
}

std::string coverage_setting(double alpha_pi, double alpha_mu, VarianceMode mode) {
  return "pi=" + fmt(alpha_pi) + ";mu=" + fmt(alpha_mu) + ";" + to_string(mode);
}

double CoverageResult::coverage(const std::string& setting, const std::string& estimand) const {
  for (const auto& r : rows)
    if (r.setting == setting && r.estimand == estimand) return r.coverage;
  throw std::out_of_range("no coverage row for " + setting + " / " + estimand);
}

CoverageResult run_coverage(const CoverageConfig& cfg, const RunOptions& opts) {
  const auto t0 = Clock::now();
  const auto net = gen_latent_network(cfg.n, cfg.rho, cfg.beta, opts.seed);
  const auto& g = net.graph;
  const NodeId target = select_target(net.z);
  const auto [sc0, sc1] = half_treated_pair(g, target);
  CoverageResult res;
  res.truth0 = true_theta_nodewise(g, cfg.coef, sc0);
  res.truth1 = true_theta_nodewise(g, cfg.coef, sc1);
  const double truth_d = res.truth1 - res.truth0;
  const auto metric = DissimilarityMetric::parse("summary-l1");
  static const char* kEstimands[] = {"theta0", "theta1", "difference"};

  struct Tally {
    std::array<std::size_t, 3> hits{};
    std::array<std::vector<double>, 3> sigmas, estimates;
  };
  std::map<std::string, Tally> tallies;
  std::vector<std::string> order;

  for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
    const auto seed = replication_seed(opts.seed, rep);
    const auto ds = gen_nodewise_data(g, cfg.coef, seed);
    for (const auto& [api, amu] : cfg.settings) {
      const auto fit = fit_replication(ds, dr_spec(api, amu), metric, opts, seed);
      const auto e0 = estimate_with_fallback(ds, fit, metric, opts.shape, sc0);
      const auto e1 = estimate_with_fallback(ds, fit, metric, opts.shape, sc1);
      for (VarianceMode mode : cfg.modes) {
        auto vo = cfg.variance;
        vo.mode = mode;
        vo.mc = opts.mc;
        const auto vseed = derive_seed(seed, Stream::hajek, 0);
        const auto iv0 = influence_vector(ds, fit.index, fit.nuisances, fit.po, e0, vo, vseed, opts.threads);
        const auto iv1 = influence_vector(ds, fit.index, fit.nuisances, fit.po, e1, vo, vseed, opts.threads);
        const std::array<VarianceReport, 3> reports{
            hac_variance(iv0, g, vo.radius, vo.level, e0.theta), hac_variance(iv1, g, vo.radius, vo.level, e1.theta),
            hac_variance(difference(iv1, iv0), g, vo.radius, vo.level, e1.theta - e0.theta)};
        const std::array<double, 3> truths{res.truth0, res.truth1, truth_d};
        const std::array<double, 3> thetas{e0.theta, e1.theta, e1.theta - e0.theta};
        const auto key = coverage_setting(api, amu, mode);
        if (!tallies.count(key)) order.push_back(key);
        auto& t = tallies[key];
        for (int k = 0; k < 3; ++k) {
          if (reports[k].ci_lo <= truths[k] && truths[k] <= reports[k].ci_hi) ++t.hits[k];
          t.sigmas[k].push_back(reports[k].sigma());
          t.estimates[k].push_back(thetas[k]);
        }
        for (int k = 0; k < 2; ++k) {
          auto row = make_row(rep, k == 0 ? e0 : e1, key + ";" + kEstimands[k]);
          attach(row, reports[k]);
          res.estimates.push_back(row);
        }
      }
    }
    report(opts, "coverage rep " + std::to_string(rep + 1) + "/" + std::to_string(cfg.reps));
  }
  for (const auto& key : order) {
    const auto& t = tallies[key];
    for (int k = 0; k < 3; ++k)
      res.rows.push_back({key, kEstimands[k], static_cast<double>(t.hits[k]) / static_cast<double>(cfg.reps),
                          mean(t.sigmas[k]), sample_sd(t.estimates[k])});
  }
  res.seconds = seconds_since(t0);
  return res;
}

// ---------------------------------------------------------------------------

NuisanceSpec AteConfig::default_spec() {
  NuisanceSpec s;
  s.outcome_kind = ModelKind::kernel;
  s.outcome_map = "ate-summary";
  s.propensity_kind = ModelKind::kernel;
  s.propensity_map = "ate-summary-propensity";
  s.key_mode = KeyMode::wasserstein;
  s.bandwidth_rule = BandwidthRule::loocv;
  return s;
}

AteConfig AteConfig::at(Scale scale) {
  AteConfig c;
  if (scale == Scale::smoke) {
    c.n = 300;
    c.reps = 1;
  } else if (scale == Scale::full) {
    c.n = 4000;
    c.reps = 40;
  }
  return c;
}

double AteResult::avg0() const { return mean(mean0); }
double AteResult::avg1() const { return mean(mean1); }

AteResult run_ate(const AteConfig& cfg, const RunOptions& opts) {
  const auto t0 = Clock::now();
  const auto net = gen_latent_network(cfg.n, cfg.rho, cfg.beta, opts.seed);
  const auto& g = net.graph;
  AteResult res;
  res.truth0 = average_theta_ate(g, cfg.coef, 0);
  res.truth1 = average_theta_ate(g, cfg.coef, 1);
  const auto metric = DissimilarityMetric::parse("wasserstein-treatment");

  for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
    const auto seed = replication_seed(opts.seed, rep);
    const auto ds = gen_ate_data(g, cfg.coef, seed);
    const auto fit = fit_replication(ds, cfg.nuisance, metric, opts, seed);
    const auto observed = observed_local_treatments(ds);
    for (int t : {0, 1}) {
      // θ̂_i depends on the target only through its local configuration.
      std::map<std::size_t, double> memo;
      std::vector<double> theta(ds.size());
      for (std::size_t i = 0; i < ds.size(); ++i) {
        const std::size_t k = g.degree(static_cast<NodeId>(i));
        auto it = memo.find(k);
        if (it == memo.end()) {
          const LocalTreatment target{t, std::vector<int>(k, t)};
          const auto delta = dissimilarities(observed, metric, target);
          it = memo.emplace(k, smooth_with_fallback(delta, fit.po, opts.shape, fit.cv).theta).first;
        }
        theta[i] = it->second;
      }
      (t == 0 ? res.mean0 : res.mean1).push_back(mean(theta));
    }
    res.lambda.push_back(fit.cv.chosen);
    report(opts, "ate rep " + std::to_string(rep + 1) + "/" + std::to_string(cfg.reps) + " means=" + fmt(res.mean0.back()) +
                     "/" + fmt(res.mean1.back()) + " lambda=" + fmt(fit.cv.chosen));
  }
  res.seconds = seconds_since(t0);
  return res;
}

// ---------------------------------------------------------------------------

ScalingConfig ScalingConfig::at(Scale scale) {
  ScalingConfig c;
  if (scale == Scale::smoke) {
    c.sizes = {100, 200};
    c.reps = 2;
    c.pre_n = 400;
  } else if (scale == Scale::full) {
    c.sizes = {250, 500, 750, 1000, 2000, 3000, 4000};
    c.reps = 80;
  }
  return c;
}

double ols_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InputError("slope needs at least two paired points");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
  }
  if (!(sxx > 0.0)) throw InputError("slope needs distinct x values");
  return sxy / sxx;
}

ScalingResult run_scaling(const ScalingConfig& cfg, const RunOptions& opts) {
  const auto t0 = Clock::now();
  const auto pre = gen_latent_network(cfg.pre_n, cfg.rho, cfg.beta, opts.seed, cfg.half_width);
  const auto metric = DissimilarityMetric::parse("summary-l1");
  ScalingResult res;
  res.sizes = cfg.sizes;
  for (std::size_t n : cfg.sizes) {
    const auto sub = nested_subnetwork(pre, n);
    const auto& g = sub.graph;
    const NodeId target = select_target(sub.z);
    res.target_degree.push_back(g.degree(target));
    const auto sc1 = all_treated(g, target);
    const auto sc0 = none_treated(g, target);
    const double truth1 = true_theta_nodewise(g, cfg.coef, sc1);
    const double truth0 = true_theta_nodewise(g, cfg.coef, sc0);
    const auto size_seed = derive_seed(opts.seed, Stream::replication, n);
    double sse = 0.0;
    for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
      const auto seed = replication_seed(size_seed, rep);
      const auto ds = gen_nodewise_data(g, cfg.coef, seed);
      const auto fit = fit_replication(ds, NuisanceSpec{}, metric, opts, seed);
      const double e1 = estimate_with_fallback(ds, fit, metric, opts.shape, sc1).theta - truth1;
      const double e0 = estimate_with_fallback(ds, fit, metric, opts.shape, sc0).theta - truth0;
      sse += e1 * e1 + e0 * e0;
    }
    res.rmse.push_back(std::sqrt(sse / (2.0 * static_cast<double>(std::max<std::size_t>(cfg.reps, 1)))));
    report(opts, "scaling n=" + std::to_string(n) + " rmse=" + fmt(res.rmse.back()));
  }
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < res.sizes.size(); ++k) {
    lx.push_back(std::log(static_cast<double>(res.sizes[k])));
    ly.push_back(std::log(res.rmse[k]));
  }
  res.slope = lx.size() >= 2 ? ols_slope(lx, ly) : std::numeric_limits<double>::quiet_NaN();
  res.seconds = seconds_since(t0);
  return res;
}

// ---------------------------------------------------------------------------

std::vector<Check> nodewise_checks(const NodewiseResult& r) {
  return {within("mean theta(all treated)", r.mean1(), 1.4, 2.4), within("mean theta(none treated)", r.mean0(), -2.4, -1.4),
          within("mean difference", r.mean_difference(), 2.8, 4.2)};
}

std::vector<Check> sutva_checks(const NodewiseResult& r) {
  const double m = r.mean_aipw();
  return {within("SUTVA-AIPW mean difference", m, 1.6, 2.4),
          {"gap to total effect 4", std::abs(m - 4.0) >= 1.2, "|" + fmt(m) + " - 4| >= 1.2"}};
}

std::vector<Check> dr_checks(const DrResult& r) {
  std::vector<Check> out;
  const double base = r.cell(0, 0).rmse_keceni;
  for (auto [api, amu] : {std::pair{0.0, 1.0}, std::pair{1.0, 0.0}}) {
    const double v = r.cell(api, amu).rmse_keceni;
    out.push_back({"KECENI rmse(" + fmt(api) + "," + fmt(amu) + ") <= 2 x rmse(0,0)", v <= 2.0 * base,
                   fmt(v) + " vs " + fmt(base)});
  }
  const double both = r.cell(1, 1).rmse_keceni;
  out.push_back({"KECENI rmse(1,1) >= 2.5 x rmse(0,0)", both >= 2.5 * base, fmt(both) + " vs " + fmt(base)});
  for (double api : {0.0, 1.0}) {
    const double g0 = r.cell(api, 0).rmse_g, g1 = r.cell(api, 1).rmse_g;
    out.push_back({"G-comp rmse(" + fmt(api) + ",1) >= 2.5 x rmse(" + fmt(api) + ",0)", g1 >= 2.5 * g0,
                   fmt(g1) + " vs " + fmt(g0)});
  }
  for (double amu : {0.0, 1.0}) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& c : r.cells)
      if (std::abs(c.alpha_mu - amu) < 1e-9) {
        lo = std::min(lo, c.rmse_g);
        hi = std::max(hi, c.rmse_g);
      }
    out.push_back({"G-comp insensitive to alpha_pi at alpha_mu=" + fmt(amu), hi <= 1.3 * lo,
                   "max/min = " + fmt(hi / lo)});
  }
  return out;
}

std::vector<Check> coverage_checks(const CoverageResult& r) {
  std::vector<Check> out;
  const auto simple = coverage_setting(0, 0, VarianceMode::simple);
  const auto full = coverage_setting(0, 0, VarianceMode::full);
  for (const char* e : {"theta0", "theta1", "difference"}) {
    const double s = r.coverage(simple, e);
    out.push_back({std::string("simple coverage ") + e + " >= 0.85", s >= 0.85, fmt(s)});
    bool has_full = false;
    for (const auto& row : r.rows) has_full = has_full || row.setting == full;
    if (has_full) {
      const double f = r.coverage(full, e);
      out.push_back({std::string("full coverage ") + e + " >= simple - 0.05", f >= s - 0.05, fmt(f) + " vs " + fmt(s)});
    }
  }
  return out;
}

std::vector<Check> ate_checks(const AteResult& r) {
  return {{"ATE within 0.08 of 0.188", std::abs(r.ate() - 0.188) <= 0.08, fmt(r.ate())},
          {"none-treated mean within 0.06 of 0.406", std::abs(r.avg0() - 0.406) <= 0.06, fmt(r.avg0())},
          {"all-treated mean within 0.06 of 0.594", std::abs(r.avg1() - 0.594) <= 0.06, fmt(r.avg1())}};
}

std::vector<Check> scaling_checks(const ScalingResult& r) {
  bool decreasing = true;
  std::string seq;
  for (std::size_t k = 0; k < r.rmse.size(); ++k) {
    if (k > 0 && !(r.rmse[k] < r.rmse[k - 1])) decreasing = false;
    seq += (k ? " > " : "") + fmt(r.rmse[k]);
  }
  return {within("log-log slope", r.slope, -0.50, -0.12), {"rmse strictly decreasing", decreasing, seq}};
}

void write_rmse_grid_csv(const std::filesystem::path& path, const DrResult& r) {
  auto out = open_out(path);
  out << "alpha_pi,alpha_mu,rmse_g,rmse_keceni\n";
  for (const auto& c : r.cells) out << c.alpha_pi << ',' << c.alpha_mu << ',' << c.rmse_g << ',' << c.rmse_keceni << '\n';
}

void write_scaling_csv(const std::filesystem::path& path, const ScalingResult& r) {
  auto out = open_out(path);
  out << "n,rmse\n";
  for (std::size_t k = 0; k < r.sizes.size(); ++k) out << r.sizes[k] << ',' << r.rmse[k] << '\n';
}

void write_coverage_csv(const std::filesystem::path& path, const CoverageResult& r) {
  auto out = open_out(path);
  out << "setting,estimand,coverage\n";
  for (const auto& row : r.rows) out << row.setting << ',' << row.estimand << ',' << row.coverage << '\n';
}

void write_checks(const std::filesystem::path& path, const std::vector<Check>& checks) {
  auto out = open_out(path);
  for (const auto& c : checks) out << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
}

}  // namespace keceni
