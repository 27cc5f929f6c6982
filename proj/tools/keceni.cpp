// keceni command-line driver: simulate, estimate, cv, reproduce.
//
// Config precedence (highest first): command-line flags, then `--config FILE`
// entries, then built-in defaults. The config file is flat `key = value`
// lines; keys are long flag names without the leading dashes, `#` starts a
// comment, and boolean flags take true/false.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "keceni/bandwidth_cv.hpp"
#include "keceni/error.hpp"
#include "keceni/estimator.hpp"
#include "keceni/experiments.hpp"
#include "keceni/parallel.hpp"
#include "keceni/random.hpp"
#include "keceni/simgen.hpp"
#include "keceni/variance.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace keceni;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::pair<std::string, std::string>> read_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path.string());
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InputError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    while (key.starts_with("-")) key.erase(0, 1);
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (key.empty()) throw InputError(path.string() + ":" + std::to_string(lineno) + ": empty key");
    out.emplace_back(key, value);
  }
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw InputError("expected a boolean, got '" + v + "'");
}

// Resolved value of every long option of a subcommand.
json resolved_options(const CLI::App* sub) {
  json j = json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_single_name();
    if (!opt->nonpositional() || name.empty() || name == "help" || name == "config") continue;
    if (opt->count() > 0) {
      const auto& res = opt->results();
      if (opt->get_type_size_max() == 0 || opt->get_expected_max() == 0) {
        j[name] = true;
      } else if (opt->get_expected_max() > 1) {
        j[name] = res;
      } else {
        j[name] = res.empty() ? std::string() : res.back();
      }
    } else {
      if (opt->get_expected_max() == 0) {
        j[name] = false;
      } else {
        j[name] = opt->get_default_str();
      }
    }
  }
  return j;
}

// Arguments that reproduce the run without the config file.
std::vector<std::string> rerun_args(const std::string& command, const json& options, const std::vector<std::string>& positionals) {
  std::vector<std::string> args{"keceni", command};
  for (const auto& p : positionals) args.push_back(p);
  for (const auto& [key, value] : options.items()) {
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back("--" + key);
    } else if (value.is_array()) {
      for (const auto& v : value) {
        args.push_back("--" + key);
        args.push_back(v.get<std::string>());
      }
    } else if (!value.get<std::string>().empty()) {
      args.push_back("--" + key);
      args.push_back(value.get<std::string>());
    }
  }
  return args;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string fmt(double v) {
  if (std::isnan(v)) return "NA";
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory " + dir.string() + ": " + ec.message());
}

// ---- options shared by estimate and cv ----

struct DataOptions {
  std::string nodes, edges;
  bool standardize = false;
};

struct NuisanceOptions {
  std::string outcome_model = "linear";
  std::string propensity_model = "logistic";
  std::string outcome_map = "nodewise-outcome";
  std::string propensity_map = "nodewise-propensity";
  std::string key_mode = "wasserstein";
  std::string bandwidth_rule = "median";
  double alpha_mu = 0.0;
  double alpha_pi = 0.0;
  double epsilon = 1e-3;
};

struct SmoothOptions {
  std::string metric = "summary-l1";
  std::string kernel = "triangular";
  std::size_t mc_draws = 200;
  std::uint64_t seed = 1;
  int threads = 0;
  std::string out = "keceni_out";
};

void add_data_options(CLI::App* sub, DataOptions& d) {
  sub->add_option("--nodes", d.nodes, "node CSV (id,y,t,x1..xp)")->required();
  sub->add_option("--edges", d.edges, "edge CSV (src,dst)")->required();
  sub->add_flag("--standardize", d.standardize, "z-score covariate columns before fitting");
}

void add_nuisance_options(CLI::App* sub, NuisanceOptions& o) {
  sub->add_option("--outcome-model", o.outcome_model, "linear | logistic | kernel | path to a model JSON")->capture_default_str();
  sub->add_option("--propensity-model", o.propensity_model, "logistic | kernel | path to a model JSON")->capture_default_str();
  sub->add_option("--outcome-map", o.outcome_map, "outcome feature map")->capture_default_str();
  sub->add_option("--propensity-map", o.propensity_map, "propensity feature map")->capture_default_str();
  sub->add_option("--key-mode", o.key_mode, "kernel nuisance keys: summary | wasserstein")->capture_default_str();
  sub->add_option("--nuisance-bandwidth", o.bandwidth_rule, "kernel nuisance bandwidth rule: median | loocv")
      ->check(CLI::IsMember({"median", "loocv"}))
      ->capture_default_str();
  sub->add_option("--alpha-mu", o.alpha_mu, "outcome misspecification weight")->capture_default_str();
  sub->add_option("--alpha-pi", o.alpha_pi, "propensity misspecification weight")->capture_default_str();
  sub->add_option("--epsilon", o.epsilon, "propensity clamp")->capture_default_str();
}

void add_smooth_options(CLI::App* sub, SmoothOptions& s) {
  sub->add_option("--metric", s.metric, "summary-l1 | wasserstein-treatment")->capture_default_str();
  sub->add_option("--kernel", s.kernel, "triangular | box")->capture_default_str();
  sub->add_option("--mc-draws", s.mc_draws, "Monte Carlo draws per integral")->capture_default_str();
  sub->add_option("--seed", s.seed, "master seed")->capture_default_str();
  sub->add_option("--threads", s.threads, "worker cap (0: KECENI_THREADS or 1)")->capture_default_str();
  sub->add_option("--out", s.out, "output directory")->capture_default_str();
}

Dataset load_data(const DataOptions& d) {
  Dataset ds = load_dataset(d.nodes, d.edges);
  if (d.standardize) standardize_covariates(ds);
  return ds;
}

bool looks_like_file(const std::string& v) { return v.ends_with(".json") || fs::is_regular_file(v); }

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

NuisanceBundle build_nuisances(const Dataset& ds, const NeighborhoodIndex& index, const NuisanceOptions& o) {
  NuisanceSpec spec;
  spec.outcome_map = o.outcome_map;
  spec.propensity_map = o.propensity_map;
  spec.alpha_mu = o.alpha_mu;
  spec.alpha_pi = o.alpha_pi;
  spec.epsilon = o.epsilon;
  spec.key_mode = parse_key_mode(o.key_mode);
  spec.bandwidth_rule = o.bandwidth_rule == "loocv" ? BandwidthRule::loocv : BandwidthRule::median;

  const std::size_t p = ds.covariate_width();
  std::shared_ptr<const OutcomeModel> mu;
  std::shared_ptr<const PropensityModel> pi;
  if (looks_like_file(o.outcome_model)) {
    mu = std::make_shared<OutcomeModel>(OutcomeModel::from_json(read_json_file(o.outcome_model), p));
  } else {
    spec.outcome_kind = parse_model_kind(o.outcome_model);
    mu = std::make_shared<OutcomeModel>(fit_outcome_model(ds, index, spec));
  }
  if (looks_like_file(o.propensity_model)) {
    pi = std::make_shared<PropensityModel>(PropensityModel::from_json(read_json_file(o.propensity_model), p));
  } else {
    spec.propensity_kind = parse_model_kind(o.propensity_model);
    pi = std::make_shared<PropensityModel>(fit_propensity_model(ds, index, spec));
  }
  auto cov = std::make_shared<CovariateDistribution>(CovariateDistribution::empirical(ds.x));
  return NuisanceBundle{mu, pi, cov};
}

json manifest(const std::string& command, const CLI::App* sub, const std::vector<std::string>& positionals, const json& extra) {
  json m;
  m["program"] = "keceni";
  m["version"] = kVersion;
  m["command"] = command;
  m["config"] = resolved_options(sub);
  m["rerun"] = rerun_args(command, m["config"], positionals);
  for (const auto& [k, v] : extra.items()) m[k] = v;
  return m;
}

// ---- simulate ----

struct SimulateArgs {
  std::string experiment = "nodewise";
  std::size_t n = 500;
  std::size_t reps = 1;
  std::uint64_t seed = 1;
  double rho = 2.0;
  double beta = 10.0;
  double half_width = 1.0;
  std::string out = "keceni_sim";
};

int cmd_simulate(const SimulateArgs& a, const CLI::App* sub) {
  if (a.n == 0) throw InputError("--n must be positive");
  if (!(a.rho > 0.0)) throw InputError("--rho must be positive");
  SimConfig cfg;
  cfg.experiment = a.experiment;
  cfg.n = a.n;
  cfg.reps = a.reps;
  cfg.seed = a.seed;
  cfg.rho = a.rho;
  cfg.beta = a.beta;
  cfg.half_width = a.half_width;

  const fs::path out = a.out;
  ensure_dir(out);
  const auto net = gen_latent_network(cfg.n, cfg.rho, cfg.beta, cfg.seed, cfg.half_width);
  const NodeId target = select_target(net.z);

  std::vector<std::pair<std::string, TreatmentScenario>> scenarios;
  if (a.experiment == "dr") {
    auto [sc0, sc1] = half_treated_pair(net.graph, target);
    scenarios = {{"half_ego0", sc0}, {"half_ego1", sc1}};
  } else {
    scenarios = {{"all_treated", all_treated(net.graph, target)}, {"none_treated", none_treated(net.graph, target)}};
  }

  json truths = json::object();
  for (const auto& [name, sc] : scenarios) {
    truths[name] = a.experiment == "ate" ? true_theta_ate(net.graph, cfg.ate, sc) : true_theta_nodewise(net.graph, cfg.nodewise, sc);
  }
  if (a.experiment == "ate") {
    truths["average_none_treated"] = average_theta_ate(net.graph, cfg.ate, 0);
    truths["average_all_treated"] = average_theta_ate(net.graph, cfg.ate, 1);
  }

  json files = json::array();
  for (std::size_t r = 0; r < cfg.reps; ++r) {
    const auto rseed = replication_seed(cfg.seed, r);
    Dataset ds = a.experiment == "ate" ? gen_ate_data(net.graph, cfg.ate, rseed) : gen_nodewise_data(net.graph, cfg.nodewise, rseed);
    std::ostringstream stem;
    stem << "rep" << std::setw(3) << std::setfill('0') << r;
    const auto nodes = stem.str() + "_nodes.csv";
    const auto edges = stem.str() + "_edges.csv";
    write_dataset(ds, out / nodes, out / edges);
    files.push_back({{"rep", r}, {"nodes", nodes}, {"edges", edges}});

    if (r == 0) {
      for (const auto& [name, sc] : scenarios) write_text(out / ("scenario_" + name + ".json"), scenario_to_json(sc, ds) + "\n");
    }
  }

  json extra;
  extra["simulation"] = cfg.to_json();
  extra["target"] = {{"index", target}, {"degree", net.graph.degree(target)}};
  extra["truths"] = truths;
  extra["datasets"] = files;
  json scen = json::array();
  for (const auto& [name, sc] : scenarios) scen.push_back("scenario_" + name + ".json");
  extra["scenarios"] = scen;
  write_json(out / "manifest.json", manifest("simulate", sub, {}, extra));
  std::cout << "wrote " << cfg.reps << " dataset(s) to " << out.string() << "\n";
  return 0;
}

// ---- estimate / cv ----

struct EstimateArgs {
  DataOptions data;
  NuisanceOptions nuisance;
  SmoothOptions smooth;
  std::vector<std::string> scenarios;
  std::string lambda = "cv";
  std::string variance = "none";
  int hac_radius = 2;
  double level = 0.95;
};

struct CvArgs {
  DataOptions data;
  NuisanceOptions nuisance;
  SmoothOptions smooth;
  std::vector<double> grid;
};

double parse_lambda(const std::string& v) {
  double lam = 0.0;
  try {
    std::size_t used = 0;
    lam = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
  } catch (const std::exception&) {
    throw InputError("--lambda expects a positive number or 'cv', got '" + v + "'");
  }
  if (!(lam > 0.0) || !std::isfinite(lam)) throw InputError("--lambda must be positive");
  return lam;
}

void write_node_csv(const fs::path& path, const Dataset& ds, const Estimate& est) {
  std::ostringstream os;
  os << "id,delta,weight,xi\n";
  for (std::size_t j = 0; j < ds.size(); ++j) {
    os << ds.ids[j] << ',' << fmt(est.delta[j]) << ',' << fmt(est.weight[j]) << ',' << fmt(est.xi[j]) << '\n';
  }
  write_text(path, os.str());
}

int cmd_estimate(const EstimateArgs& a, const CLI::App* sub) {
  const Dataset ds = load_data(a.data);
  if (a.scenarios.empty()) throw InputError("at least one --scenario file is required");
  std::vector<TreatmentScenario> scs;
  for (const auto& path : a.scenarios) scs.push_back(load_scenario(path, ds));

  const auto metric = DissimilarityMetric::parse(a.smooth.metric);
  const auto shape = parse_kernel_shape(a.smooth.kernel);
  const bool use_cv = a.lambda == "cv";
  const double fixed_lambda = use_cv ? 0.0 : parse_lambda(a.lambda);
  std::optional<VarianceMode> vmode;
  if (a.variance != "none") vmode = parse_variance_mode(a.variance);
  if (a.hac_radius < 0) throw InputError("--hac-radius must be nonnegative");
  const int threads = resolve_threads(a.smooth.threads);

  const fs::path out = a.smooth.out;
  ensure_dir(out);

  NeighborhoodIndex index(ds);
  const NuisanceBundle nb = build_nuisances(ds, index, a.nuisance);
  McOptions mc;
  mc.draws = a.smooth.mc_draws;
  const auto po = pseudo_outcomes(ds, index, nb, mc, a.smooth.seed, threads);

  double lambda = fixed_lambda;
  json extra;
  if (use_cv) {
    const auto grid = default_bandwidth_grid(ds, metric);
    const CVResult cv = cv_select(ds, index, po, metric, shape, grid, threads);
    lambda = cv.chosen;
    cv.write_csv(out / "cv.csv");
    write_json(out / "cv.json", cv.to_json());
    extra["cv_lambda"] = lambda;
  }
  const Kernel kernel{shape, lambda};

  json results = json::array();
  std::vector<EstimateRow> rows;
  for (std::size_t k = 0; k < scs.size(); ++k) {
    const Estimate est = keceni_estimate(ds, po, metric, kernel, scs[k]);
    json r;
    r["scenario_file"] = a.scenarios[k];
    r["estimate"] = est.to_json(ds, false);
    EstimateRow row;
    row.rep = 0;
    row.target = scs[k].target;
    row.scenario = fs::path(a.scenarios[k]).stem().string();
    row.theta = est.theta;
    row.d_hat = est.d_hat;
    row.lambda = est.lambda;
    row.sigma = row.ci_lo = row.ci_hi = std::nan("");
    if (vmode) {
      VarianceOptions vo;
      vo.mode = *vmode;
      vo.mc = mc;
      vo.radius = a.hac_radius;
      vo.level = a.level;
      const auto vseed = derive_seed(a.smooth.seed, Stream::hajek, k);
      const auto iv = influence_vector(ds, index, nb, po, est, vo, vseed, threads);
      const auto rep = hac_variance(iv, ds.graph, a.hac_radius, a.level, est.theta);
      r["variance"] = rep.to_json();
      row.sigma = rep.sigma();
      row.ci_lo = rep.ci_lo;
      row.ci_hi = rep.ci_hi;
    }
    results.push_back(r);
    rows.push_back(row);
    write_node_csv(out / ("nodes_" + std::to_string(k) + ".csv"), ds, est);
    std::cout << row.scenario << ": theta=" << fmt(est.theta) << " lambda=" << fmt(lambda);
    if (vmode) std::cout << " sigma=" << fmt(row.sigma);
    std::cout << "\n";
  }
  write_json(out / "estimate.json", results);
  write_estimates_csv(out / "estimates.csv", rows);
  write_json(out / "outcome_model.json", nb.outcome->to_json());
  write_json(out / "propensity_model.json", nb.propensity->to_json());
  extra["threads"] = threads;
  write_json(out / "manifest.json", manifest("estimate", sub, {}, extra));
  return 0;
}

int cmd_cv(const CvArgs& a, const CLI::App* sub) {
  const Dataset ds = load_data(a.data);
  const auto metric = DissimilarityMetric::parse(a.smooth.metric);
  const auto shape = parse_kernel_shape(a.smooth.kernel);
  const int threads = resolve_threads(a.smooth.threads);
  for (double g : a.grid) {
    if (!(g > 0.0)) throw InputError("--grid values must be positive");
  }
  const fs::path out = a.smooth.out;
  ensure_dir(out);

  NeighborhoodIndex index(ds);
  const NuisanceBundle nb = build_nuisances(ds, index, a.nuisance);
  McOptions mc;
  mc.draws = a.smooth.mc_draws;
  const auto po = pseudo_outcomes(ds, index, nb, mc, a.smooth.seed, threads);
  std::vector<double> grid = a.grid;
  if (grid.empty()) {
    grid = default_bandwidth_grid(ds, metric);
  } else {
    std::sort(grid.begin(), grid.end());
  }
  const CVResult cv = cv_select(ds, index, po, metric, shape, grid, threads);
  cv.write_csv(out / "cv.csv");
  write_json(out / "cv.json", cv.to_json());
  write_json(out / "manifest.json", manifest("cv", sub, {}, {{"chosen_lambda", cv.chosen}, {"threads", threads}}));
  std::cout << "lambda=" << fmt(cv.chosen) << "\n";
  return 0;
}

// ---- reproduce ----

struct ReproduceArgs {
  std::string id;
  std::string scale = "desk";
  std::uint64_t seed = RunOptions{}.seed;
  int threads = 0;
  std::string out = "keceni_reproduce";
  bool quiet = false;
};

std::string check_report(const std::string& title, const std::vector<Check>& checks, const std::string& body) {
  std::ostringstream os;
  os << title << "\n\n" << body << "\n";
  for (const auto& c : checks) os << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
  return os.str();
}

int cmd_reproduce(const ReproduceArgs& a, const CLI::App* sub) {
  const Scale scale = parse_scale(a.scale);
  RunOptions opts;
  opts.seed = a.seed;
  opts.threads = resolve_threads(a.threads);
  if (!a.quiet) opts.progress = [](const std::string& msg) { std::cerr << msg << "\n"; };
  const fs::path out = a.out;
  ensure_dir(out);

  std::vector<Check> checks;
  std::ostringstream body;
  json extra;
  double seconds = 0.0;

  if (a.id == "A1" || a.id == "A5") {
    const auto r = run_nodewise(NodewiseConfig::at(scale), opts);
    seconds = r.seconds;
    write_estimates_csv(out / "estimates.csv", r.rows);
    body << "target " << r.target << " (degree " << r.target_degree << ")\n"
         << "truth all-treated " << fmt(r.truth1) << ", none-treated " << fmt(r.truth0) << "\n"
         << "mean theta all-treated " << fmt(r.mean1()) << ", none-treated " << fmt(r.mean0()) << ", difference "
         << fmt(r.mean_difference()) << "\n";
    if (a.id == "A1") {
      checks = nodewise_checks(r);
    } else {
      std::ostringstream csv;
      csv << "rep,aipw_difference\n";
      for (std::size_t k = 0; k < r.aipw.size(); ++k) csv << k << ',' << fmt(r.aipw[k]) << '\n';
      write_text(out / "sutva.csv", csv.str());
      body << "mean no-interference AIPW difference " << fmt(r.mean_aipw()) << "\n";
      checks = sutva_checks(r);
    }
  } else if (a.id == "A2") {
    const auto r = run_dr_grid(DrConfig::at(scale), opts);
    seconds = r.seconds;
    write_rmse_grid_csv(out / "rmse_grid.csv", r);
    write_estimates_csv(out / "estimates.csv", r.rows);
    body << "target " << r.target << ", truths " << fmt(r.truth0) << " / " << fmt(r.truth1) << "\n";
    checks = dr_checks(r);
  } else if (a.id == "A3") {
    const auto r = run_ate(AteConfig::at(scale), opts);
    seconds = r.seconds;
    std::ostringstream csv;
    csv << "rep,mean_none,mean_all,ate,lambda\n";
    for (std::size_t k = 0; k < r.mean0.size(); ++k) {
      csv << k << ',' << fmt(r.mean0[k]) << ',' << fmt(r.mean1[k]) << ',' << fmt(r.mean1[k] - r.mean0[k]) << ','
          << fmt(r.lambda[k]) << '\n';
    }
    write_text(out / "ate.csv", csv.str());
    body << "truths none " << fmt(r.truth0) << ", all " << fmt(r.truth1) << ", ATE " << fmt(r.truth1 - r.truth0) << "\n"
         << "estimates none " << fmt(r.avg0()) << ", all " << fmt(r.avg1()) << ", ATE " << fmt(r.ate()) << "\n";
    checks = ate_checks(r);
  } else if (a.id == "A4") {
    const auto r = run_scaling(ScalingConfig::at(scale), opts);
    seconds = r.seconds;
    write_scaling_csv(out / "scaling.csv", r);
    body << "log-log slope " << fmt(r.slope) << "\n";
    extra["slope"] = r.slope;
    checks = scaling_checks(r);
  } else if (a.id == "A6") {
    const auto r = run_coverage(CoverageConfig::at(scale), opts);
    seconds = r.seconds;
    write_coverage_csv(out / "coverage.csv", r);
    write_estimates_csv(out / "estimates.csv", r.estimates);
    body << "truths " << fmt(r.truth0) << " / " << fmt(r.truth1) << "\n";
    for (const auto& row : r.rows) {
      body << row.setting << ' ' << row.estimand << ": coverage " << fmt(row.coverage) << ", mean sigma "
           << fmt(row.mean_sigma) << ", sd of estimates " << fmt(row.sd_estimate) << "\n";
    }
    checks = coverage_checks(r);
  } else {
    throw InputError("unknown experiment id '" + a.id + "'");
  }

  body << "runtime " << std::fixed << std::setprecision(1) << seconds << " s\n";
  if (scale == Scale::smoke) body << "note: thresholds are calibrated for desk scale; smoke runs only exercise the pipeline\n";
  const std::string report = check_report("experiment " + a.id + " at " + to_string(scale) + " scale", checks, body.str());
  write_text(out / "report.txt", report);
  std::cout << report;
  extra["threads"] = opts.threads;
  json cj = json::array();
  for (const auto& c : checks) cj.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  extra["checks"] = cj;
  write_json(out / "manifest.json", manifest("reproduce", sub, {a.id}, extra));
  return 0;
}

// Splices config-file entries in front of the user's flags so flags win.
std::vector<std::string> expand_config(CLI::App& app, const std::vector<std::string>& args) {
  std::string config_path;
  std::string subname;
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] == "--config" && k + 1 < args.size()) config_path = args[k + 1];
    if (args[k].starts_with("--config=")) config_path = args[k].substr(9);
    if (subname.empty() && !args[k].starts_with("-")) subname = args[k];
  }
  if (config_path.empty()) return args;
  if (subname.empty()) throw InputError("--config needs a subcommand");
  CLI::App* sub = nullptr;
  try {
    sub = app.get_subcommand(subname);
  } catch (const CLI::OptionNotFound&) {
    return args;  // the parser reports the unknown subcommand
  }
  std::vector<std::string> injected;
  for (const auto& [key, value] : read_config_file(config_path)) {
    const CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config") throw InputError("config key '" + key + "' is not an option of '" + subname + "'");
    if (opt->get_expected_max() == 0) {
      if (parse_bool(value)) injected.push_back("--" + key);
    } else {
      injected.push_back("--" + key);
      injected.push_back(value);
    }
  }
  std::vector<std::string> out;
  bool placed = false;
  for (const auto& s : args) {
    out.push_back(s);
    if (!placed && s == subname) {
      out.insert(out.end(), injected.begin(), injected.end());
      placed = true;
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"KECENI: kernel-smoothed doubly robust counterfactual means under network interference", "keceni"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "generate synthetic network datasets");
  simulate->add_option("--experiment", sim.experiment, "nodewise | dr | ate")
      ->check(CLI::IsMember({"nodewise", "dr", "ate"}));
  simulate->add_option("--n", sim.n, "number of nodes");
  simulate->add_option("--reps", sim.reps, "number of datasets");
  simulate->add_option("--seed", sim.seed, "master seed");
  simulate->add_option("--rho", sim.rho, "edge-probability scale");
  simulate->add_option("--beta", sim.beta, "edge-probability decay");
  simulate->add_option("--half-width", sim.half_width, "latent square half width");
  simulate->add_option("--out", sim.out, "output directory");

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "estimate counterfactual means for scenario files");
  add_data_options(estimate, est.data);
  add_nuisance_options(estimate, est.nuisance);
  add_smooth_options(estimate, est.smooth);
  estimate->add_option("--scenario", est.scenarios, "scenario JSON (repeatable)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  estimate->add_option("--lambda", est.lambda, "bandwidth value or 'cv'");
  estimate->add_option("--variance", est.variance, "none | simple | full")
      ->check(CLI::IsMember({"none", "simple", "full"}));
  estimate->add_option("--hac-radius", est.hac_radius, "HAC neighborhood radius");
  estimate->add_option("--level", est.level, "confidence level")->check(CLI::Range(0.5, 0.9999));

  CvArgs cvargs;
  auto* cv = app.add_subcommand("cv", "leave-neighborhood-out bandwidth selection");
  add_data_options(cv, cvargs.data);
  add_nuisance_options(cv, cvargs.nuisance);
  add_smooth_options(cv, cvargs.smooth);
  cv->add_option("--grid", cvargs.grid, "candidate bandwidths (default: 10 geometric points)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

  ReproduceArgs rep;
  auto* reproduce = app.add_subcommand("reproduce", "rerun a simulation study and check it against its thresholds");
  reproduce->add_option("id", rep.id, "A1 | A2 | A3 | A4 | A5 | A6")
      ->required()
      ->check(CLI::IsMember({"A1", "A2", "A3", "A4", "A5", "A6"}));
  reproduce->add_option("--scale", rep.scale, "smoke | desk | full")->check(CLI::IsMember({"smoke", "desk", "full"}));
  reproduce->add_option("--seed", rep.seed, "master seed");
  reproduce->add_option("--threads", rep.threads, "worker cap (0: KECENI_THREADS or 1)");
  reproduce->add_option("--out", rep.out, "output directory");
  reproduce->add_flag("--quiet", rep.quiet, "suppress progress lines");

  std::string config_unused;
  for (auto* sub : {simulate, estimate, cv, reproduce}) {
    sub->add_option("--config", config_unused, "flat key = value file; flags override it");
  }

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(app, args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim, simulate);
    if (estimate->parsed()) return cmd_estimate(est, estimate);
    if (cv->parsed()) return cmd_cv(cvargs, cv);
    if (reproduce->parsed()) return cmd_reproduce(rep, reproduce);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
