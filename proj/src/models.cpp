#include "keceni/models.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "keceni/error.hpp"

namespace keceni {
namespace {

std::vector<double>& scratch() {
  thread_local std::vector<double> buf;
  return buf;
}

double dot(std::span<const double> z, const Eigen::VectorXd& beta) {
  double s = 0.0;
  for (std::size_t c = 0; c < z.size(); ++c) s += z[c] * beta(static_cast<Eigen::Index>(c));
  return s;
}

Eigen::MatrixXd expand_scores(const Eigen::MatrixXd& scores, const std::vector<NodeId>& rows, std::size_t n) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), scores.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(rows[r]) = scores.row(static_cast<Eigen::Index>(r));
  return out;
}

double resolve_bandwidth(double fixed, BandwidthRule rule, const std::vector<KernelKey>& keys, const std::vector<double>& targets,
                         KeyMetric metric) {
  if (fixed > 0.0) return fixed;
  const double med = median_pairwise_distance(keys, metric, {});
  if (rule == BandwidthRule::median) return med;
  std::vector<double> grid;
  for (double f : {0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.75, 1.0, 1.5}) grid.push_back(f * med);
  return select_bandwidth_loocv(keys, targets, metric, {}, grid);
}

KeyMetric metric_for(KeyMode mode) { return mode == KeyMode::wasserstein ? KeyMetric::wasserstein : KeyMetric::l1; }

nlohmann::json beta_json(const Eigen::VectorXd& b) {
  auto arr = nlohmann::json::array();
  for (Eigen::Index k = 0; k < b.size(); ++k) arr.push_back(b(k));
  return arr;
}

Eigen::VectorXd beta_from_json(const nlohmann::json& j, std::size_t width) {
  const auto& arr = j.at("beta");
  if (!arr.is_array() || arr.size() != width) throw InputError("model JSON: beta has the wrong length for its feature map");
  Eigen::VectorXd b(static_cast<Eigen::Index>(width));
  for (std::size_t k = 0; k < width; ++k) b(static_cast<Eigen::Index>(k)) = arr[k].get<double>();
  return b;
}

}  // namespace

ModelKind parse_model_kind(std::string_view name) {
  if (name == "linear") return ModelKind::linear;
  if (name == "logistic") return ModelKind::logistic;
  if (name == "kernel" || name == "kernel-nw") return ModelKind::kernel;
  throw InputError("unknown model kind '" + std::string(name) + "' (expected linear|logistic|kernel)");
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::linear: return "linear";
    case ModelKind::logistic: return "logistic";
    case ModelKind::kernel: return "kernel";
    case ModelKind::custom: return "custom";
  }
  return "custom";
}

KeyMode parse_key_mode(std::string_view name) {
  if (name == "summary") return KeyMode::summary;
  if (name == "wasserstein") return KeyMode::wasserstein;
  throw InputError("unknown key mode '" + std::string(name) + "' (expected summary|wasserstein)");
}

KernelKey outcome_key(const OutcomeContext& ctx, KeyMode mode, const FeatureMap& fm) {
  KernelKey key;
  const std::size_t p = fm.covariate_width();
  if (mode == KeyMode::summary) {
    key.ego.resize(fm.width());
    fm.outcome(ctx, key.ego);
    return key;
  }
  key.ego.reserve(p + 1);
  key.ego.push_back(ctx.t_self);
  key.ego.insert(key.ego.end(), ctx.x_self, ctx.x_self + p);
  key.neighbors = PointMultiset(p + 1);
  std::vector<double> pt(p + 1);
  for (std::size_t k = 0; k < ctx.x_neighbors.size(); ++k) {
    pt[0] = ctx.t_neighbors[k];
    std::copy(ctx.x_neighbors[k], ctx.x_neighbors[k] + p, pt.begin() + 1);
    key.neighbors.add(pt);
  }
  return key;
}

KernelKey node_key(const NodeContext& ctx, KeyMode mode, const FeatureMap& fm) {
  KernelKey key;
  const std::size_t p = fm.covariate_width();
  if (mode == KeyMode::summary) {
    key.ego.resize(fm.width());
    fm.node(ctx, key.ego);
    return key;
  }
  key.ego.assign(ctx.x_self, ctx.x_self + p);
  key.neighbors = PointMultiset(p);
  for (const double* r : ctx.x_neighbors) key.neighbors.add(std::span<const double>(r, p));
  return key;
}

// ---- outcome ----

OutcomeModel OutcomeModel::parametric(ModelKind kind, FeatureMap fm, Eigen::VectorXd beta, std::optional<Linearization> lin) {
  if (kind != ModelKind::linear && kind != ModelKind::logistic) throw InputError("parametric outcome model must be linear or logistic");
  if (fm.target() != FeatureTarget::outcome) throw InputError("feature map '" + fm.name() + "' is not an outcome map");
  if (static_cast<std::size_t>(beta.size()) != fm.width()) throw InputError("outcome beta length does not match feature map");
  OutcomeModel m;
  m.kind_ = kind;
  m.fm_ = std::move(fm);
  m.beta_ = std::move(beta);
  m.lin_ = std::move(lin);
  return m;
}

OutcomeModel OutcomeModel::nonparametric(std::shared_ptr<const KernelRegressor> reg, KeyMode mode, FeatureMap fm) {
  OutcomeModel m;
  m.kind_ = ModelKind::kernel;
  m.reg_ = std::move(reg);
  m.mode_ = mode;
  m.fm_ = std::move(fm);
  return m;
}

OutcomeModel OutcomeModel::custom(Function f) {
  OutcomeModel m;
  m.kind_ = ModelKind::custom;
  m.fn_ = std::move(f);
  return m;
}

double OutcomeModel::predict(const OutcomeContext& ctx) const {
  switch (kind_) {
    case ModelKind::linear:
    case ModelKind::logistic: {
      auto& z = scratch();
      z.resize(fm_.width());
      fm_.outcome(ctx, z);
      const double eta = dot(z, beta_);
      return kind_ == ModelKind::linear ? eta : expit(eta);
    }
    case ModelKind::kernel:
      return reg_->predict(outcome_key(ctx, mode_, fm_));
    case ModelKind::custom:
      return fn_(ctx);
  }
  return 0.0;
}

void OutcomeModel::gradient(const OutcomeContext& ctx, std::span<double> out) const {
  if (!is_parametric()) throw InputError("outcome gradient needs a parametric model");
  fm_.outcome(ctx, out);
  if (kind_ == ModelKind::logistic) {
    const double p = expit(dot(out, beta_));
    for (auto& v : out) v *= p * (1.0 - p);
  }
}

nlohmann::json OutcomeModel::to_json() const {
  nlohmann::json j;
  j["kind"] = to_string(kind_);
  if (kind_ == ModelKind::custom) return j;
  j["feature_map"] = fm_.name();
  j["alpha"] = fm_.alpha();
  if (is_parametric()) {
    j["beta"] = beta_json(beta_);
    j["columns"] = fm_.column_names();
  } else {
    j["bandwidth"] = reg_->bandwidth();
    j["key_mode"] = mode_ == KeyMode::summary ? "summary" : "wasserstein";
    j["distinct_keys"] = reg_->distinct_keys();
  }
  return j;
}

OutcomeModel OutcomeModel::from_json(const nlohmann::json& j, std::size_t covariate_width) {
  try {
    const auto kind = parse_model_kind(j.at("kind").get<std::string>());
    if (kind == ModelKind::kernel) throw InputError("kernel outcome models are refit from data, not loaded");
    auto fm = FeatureMap::from_name(j.at("feature_map").get<std::string>(), covariate_width, j.value("alpha", 0.0));
    auto beta = beta_from_json(j, fm.width());
    return parametric(kind, std::move(fm), std::move(beta));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("outcome model JSON: ") + e.what());
  }
}

// ---- propensity ----

PropensityModel PropensityModel::parametric(FeatureMap fm, Eigen::VectorXd beta, double epsilon, std::optional<Linearization> lin) {
  if (fm.target() != FeatureTarget::node) throw InputError("feature map '" + fm.name() + "' is not a node-level map");
  if (static_cast<std::size_t>(beta.size()) != fm.width()) throw InputError("propensity beta length does not match feature map");
  if (!(epsilon >= 0.0 && epsilon < 0.5)) throw InputError("propensity clamp epsilon must lie in [0, 0.5)");
  PropensityModel m;
  m.kind_ = ModelKind::logistic;
  m.fm_ = std::move(fm);
  m.beta_ = std::move(beta);
  m.lin_ = std::move(lin);
  m.eps_ = epsilon;
  return m;
}

PropensityModel PropensityModel::nonparametric(std::shared_ptr<const KernelRegressor> reg, KeyMode mode, FeatureMap fm, double epsilon) {
  PropensityModel m;
  m.kind_ = ModelKind::kernel;
  m.reg_ = std::move(reg);
  m.mode_ = mode;
  m.fm_ = std::move(fm);
  m.eps_ = epsilon;
  return m;
}

PropensityModel PropensityModel::custom(Function f, double epsilon) {
  PropensityModel m;
  m.kind_ = ModelKind::custom;
  m.fn_ = std::move(f);
  m.eps_ = epsilon;
  return m;
}

double PropensityModel::raw_probability(const NodeContext& ctx) const {
  switch (kind_) {
    case ModelKind::logistic: {
      auto& z = scratch();
      z.resize(fm_.width());
      fm_.node(ctx, z);
      return expit(dot(z, beta_));
    }
    case ModelKind::kernel:
      return reg_->predict(node_key(ctx, mode_, fm_));
    default:
      return fn_(ctx);
  }
}

double PropensityModel::treated_probability(const NodeContext& ctx) const {
  return std::clamp(raw_probability(ctx), eps_, 1.0 - eps_);
}

double PropensityModel::probability(int t, const NodeContext& ctx) const {
  const double p = treated_probability(ctx);
  return t == 1 ? p : 1.0 - p;
}

void PropensityModel::log_gradient(int t, const NodeContext& ctx, std::span<double> out) const {
  if (!is_parametric()) throw InputError("propensity gradient needs a parametric model");
  fm_.node(ctx, out);
  const double p = expit(dot(out, beta_));
  if (p < eps_ || p > 1.0 - eps_) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  for (auto& v : out) v *= t - p;
}

nlohmann::json PropensityModel::to_json() const {
  nlohmann::json j;
  j["kind"] = to_string(kind_);
  j["epsilon"] = eps_;
  if (kind_ == ModelKind::custom) return j;
  j["feature_map"] = fm_.name();
  j["alpha"] = fm_.alpha();
  if (is_parametric()) {
    j["beta"] = beta_json(beta_);
    j["columns"] = fm_.column_names();
  } else {
    j["bandwidth"] = reg_->bandwidth();
    j["key_mode"] = mode_ == KeyMode::summary ? "summary" : "wasserstein";
    j["distinct_keys"] = reg_->distinct_keys();
  }
  return j;
}

PropensityModel PropensityModel::from_json(const nlohmann::json& j, std::size_t covariate_width) {
  try {
    const auto kind = parse_model_kind(j.at("kind").get<std::string>());
    if (kind != ModelKind::logistic) throw InputError("only logistic propensity models can be loaded");
    auto fm = FeatureMap::from_name(j.at("feature_map").get<std::string>(), covariate_width, j.value("alpha", 0.0));
    auto beta = beta_from_json(j, fm.width());
    return parametric(std::move(fm), std::move(beta), j.value("epsilon", 1e-3));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("propensity model JSON: ") + e.what());
  }
}

double joint_propensity(const PropensityModel& pm, const LocalFrame& frame, std::span<const int> hood_t) {
  double prod = 1.0;
  for (std::size_t k = 0; k < hood_t.size(); ++k) prod *= pm.probability(hood_t[k], frame.node_context(k));
  return prod;
}

// ---- fitting ----

OutcomeModel fit_outcome_model(const Dataset& ds, const NeighborhoodIndex& index, const NuisanceSpec& spec) {
  auto fm = FeatureMap::from_name(spec.outcome_map, ds.covariate_width(), spec.alpha_mu);
  std::vector<NodeId> rows;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (ds.has_outcome(static_cast<NodeId>(i))) rows.push_back(static_cast<NodeId>(i));
  if (rows.empty()) throw InputError("no observed outcomes to fit the outcome model");

  if (spec.outcome_kind == ModelKind::kernel) {
    std::vector<KernelKey> keys;
    std::vector<double> targets;
    for (NodeId i : rows) {
      LocalFrame frame(index.at(i));
      frame.bind_observed(index);
      const auto t = index.hood_treatments(ds, i);
      keys.push_back(outcome_key(frame.outcome_context(t), spec.key_mode, fm));
      targets.push_back(ds.y[i]);
    }
    const auto metric = metric_for(spec.key_mode);
    const double bw = resolve_bandwidth(spec.outcome_bandwidth, spec.bandwidth_rule, keys, targets, metric);
    auto reg = std::make_shared<KernelRegressor>(std::move(keys), std::move(targets), bw, metric);
    return OutcomeModel::nonparametric(std::move(reg), spec.key_mode, std::move(fm));
  }

  Eigen::MatrixXd z(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(fm.width()));
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  std::vector<double> buf(fm.width());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const NodeId i = rows[r];
    LocalFrame frame(index.at(i));
    frame.bind_observed(index);
    const auto t = index.hood_treatments(ds, i);
    fm.outcome(frame.outcome_context(t), buf);
    for (std::size_t c = 0; c < buf.size(); ++c) z(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = buf[c];
    y(static_cast<Eigen::Index>(r)) = ds.y[i];
  }
  ParametricFit fit;
  if (spec.outcome_kind == ModelKind::linear) fit = fit_least_squares(z, y, fm.column_names());
  else if (spec.outcome_kind == ModelKind::logistic) fit = fit_logistic_regression(z, y, spec.logistic);
  else throw InputError("outcome model kind must be linear, logistic or kernel");
  fit.linearization.scores = expand_scores(fit.linearization.scores, rows, ds.size());
  return OutcomeModel::parametric(spec.outcome_kind, std::move(fm), fit.beta, std::move(fit.linearization));
}

PropensityModel fit_propensity_model(const Dataset& ds, const NeighborhoodIndex& index, const NuisanceSpec& spec) {
  auto fm = FeatureMap::from_name(spec.propensity_map, ds.covariate_width(), spec.alpha_pi);
  const std::size_t n = ds.size();
  std::vector<LocalFrame> frames;
  frames.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    frames.emplace_back(index.at(static_cast<NodeId>(i)));
    frames.back().bind_observed(index);
  }

  if (spec.propensity_kind == ModelKind::kernel) {
    std::vector<KernelKey> keys;
    std::vector<double> targets;
    for (std::size_t i = 0; i < n; ++i) {
      keys.push_back(node_key(frames[i].node_context(0), spec.key_mode, fm));
      targets.push_back(ds.t[i]);
    }
    const auto metric = metric_for(spec.key_mode);
    const double bw = resolve_bandwidth(spec.propensity_bandwidth, spec.bandwidth_rule, keys, targets, metric);
    auto reg = std::make_shared<KernelRegressor>(std::move(keys), std::move(targets), bw, metric);
    return PropensityModel::nonparametric(std::move(reg), spec.key_mode, std::move(fm), spec.epsilon);
  }
  if (spec.propensity_kind != ModelKind::logistic) throw InputError("propensity model kind must be logistic or kernel");

  Eigen::MatrixXd z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(fm.width()));
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  std::vector<double> buf(fm.width());
  for (std::size_t i = 0; i < n; ++i) {
    fm.node(frames[i].node_context(0), buf);
    for (std::size_t c = 0; c < buf.size(); ++c) z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = buf[c];
    y(static_cast<Eigen::Index>(i)) = ds.t[i];
  }
  auto fit = fit_logistic_regression(z, y, spec.logistic);
  return PropensityModel::parametric(std::move(fm), fit.beta, spec.epsilon, std::move(fit.linearization));
}

NuisanceBundle fit_nuisances(const Dataset& ds, const NeighborhoodIndex& index, const NuisanceSpec& spec) {
  NuisanceBundle nb;
  nb.outcome = std::make_shared<OutcomeModel>(fit_outcome_model(ds, index, spec));
  nb.propensity = std::make_shared<PropensityModel>(fit_propensity_model(ds, index, spec));
  nb.covariates = std::make_shared<CovariateDistribution>(CovariateDistribution::empirical(ds.x));
  return nb;
}

}  // namespace keceni
