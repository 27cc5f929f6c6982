#include "keceni/features.hpp"

#include <string>

#include "keceni/error.hpp"

namespace keceni {

double neighbor_average(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

std::vector<std::string> builtin_feature_maps() {
  return {"nodewise-outcome", "dr-outcome",  "nodewise-propensity", "dr-propensity",          "ate-outcome",
          "ate-propensity",   "ate-summary", "ate-summary-propensity", "sutva-covariates"};
}

FeatureMap FeatureMap::from_name(std::string_view name, std::size_t covariate_width, double alpha) {
  FeatureMap fm;
  fm.name_ = std::string(name);
  fm.p_ = covariate_width;
  const std::size_t p = covariate_width;
  auto xcols = [&](const std::string& prefix) {
    for (std::size_t c = 0; c < p; ++c) fm.columns_.push_back(prefix + std::to_string(c + 1));
  };
  if (name == "nodewise-outcome" || name == "dr-outcome") {
    fm.kind_ = Kind::mixed_outcome;
    fm.target_ = FeatureTarget::outcome;
    fm.alpha_ = name == "dr-outcome" ? alpha : 0.0;
    fm.columns_ = {"intercept", "t_self", "avg_t_neighbors"};
    xcols("x_self_");
    xcols("avg_x_two_hop_");
  } else if (name == "nodewise-propensity" || name == "dr-propensity") {
    fm.kind_ = Kind::mixed_node;
    fm.alpha_ = name == "dr-propensity" ? alpha : 0.0;
    fm.columns_ = {"intercept"};
    xcols("x_self_");
    xcols("avg_x_neighbors_");
  } else if (name == "ate-outcome" || name == "ate-propensity") {
    if (p < 2) throw InputError(fm.name_ + " needs at least two covariates");
    if (name == "ate-outcome") {
      fm.kind_ = Kind::ate_outcome;
      fm.target_ = FeatureTarget::outcome;
      fm.columns_ = {"intercept", "t_self", "avg_t_neighbors", "w_self", "avg_w_neighbors"};
    } else {
      fm.kind_ = Kind::ate_node;
      fm.columns_ = {"intercept", "w_self", "avg_w_neighbors"};
    }
  } else if (name == "ate-summary") {
    fm.kind_ = Kind::summary_outcome;
    fm.target_ = FeatureTarget::outcome;
    fm.columns_ = {"t_self", "avg_t_neighbors"};
    xcols("x_self_");
    xcols("avg_x_neighbors_");
  } else if (name == "ate-summary-propensity") {
    fm.kind_ = Kind::summary_node;
    xcols("x_self_");
    xcols("avg_x_neighbors_");
  } else if (name == "sutva-covariates") {
    fm.kind_ = Kind::sutva;
    fm.columns_ = {"intercept"};
    xcols("x_self_");
  } else {
    throw InputError("unknown feature map '" + fm.name_ + "'");
  }
  if (fm.alpha_ < 0.0 || fm.alpha_ > 1.0) throw InputError("feature map alpha must lie in [0, 1]");
  fm.width_ = fm.columns_.size();
  return fm;
}

void FeatureMap::outcome(const OutcomeContext& ctx, std::span<double> out) const {
  if (target_ != FeatureTarget::outcome) throw InputError("feature map '" + name_ + "' is not an outcome map");
  double avg_t = 0.0;
  for (int v : ctx.t_neighbors) avg_t += v - 0.5;
  if (!ctx.t_neighbors.empty()) avg_t /= static_cast<double>(ctx.t_neighbors.size());

  switch (kind_) {
    case Kind::mixed_outcome: {
      out[0] = 1.0;
      out[1] = ctx.t_self - 0.5;
      out[2] = avg_t;
      for (std::size_t c = 0; c < p_; ++c) {
        out[3 + c] = transform(ctx.x_self[c]);
        double s = 0.0;
        for (const double* r : ctx.x_outer) s += transform(r[c]);
        out[3 + p_ + c] = ctx.x_outer.empty() ? 0.0 : s / static_cast<double>(ctx.x_outer.size());
      }
      break;
    }
    case Kind::ate_outcome: {
      out[0] = 1.0;
      out[1] = ctx.t_self - 0.5;
      out[2] = avg_t;
      out[3] = interaction(ctx.x_self);
      double s = 0.0;
      for (const double* r : ctx.x_neighbors) s += interaction(r);
      out[4] = ctx.x_neighbors.empty() ? 0.0 : s / static_cast<double>(ctx.x_neighbors.size());
      break;
    }
    case Kind::summary_outcome: {
      out[0] = ctx.t_self;
      out[1] = avg_t;
      for (std::size_t c = 0; c < p_; ++c) {
        out[2 + c] = ctx.x_self[c];
        double s = 0.0;
        for (const double* r : ctx.x_neighbors) s += r[c];
        out[2 + p_ + c] = ctx.x_neighbors.empty() ? 0.0 : s / static_cast<double>(ctx.x_neighbors.size());
      }
      break;
    }
    default:
      break;
  }
}

void FeatureMap::node(const NodeContext& ctx, std::span<double> out) const {
  if (target_ != FeatureTarget::node) throw InputError("feature map '" + name_ + "' is not a node-level map");
  const auto k = static_cast<double>(ctx.x_neighbors.size());
  switch (kind_) {
    case Kind::mixed_node: {
      out[0] = 1.0;
      for (std::size_t c = 0; c < p_; ++c) {
        out[1 + c] = transform(ctx.x_self[c]);
        double s = 0.0;
        for (const double* r : ctx.x_neighbors) s += transform(r[c]);
        out[1 + p_ + c] = k > 0 ? s / k : 0.0;
      }
      break;
    }
    case Kind::ate_node: {
      out[0] = 1.0;
      out[1] = interaction(ctx.x_self);
      double s = 0.0;
      for (const double* r : ctx.x_neighbors) s += interaction(r);
      out[2] = k > 0 ? s / k : 0.0;
      break;
    }
    case Kind::summary_node: {
      for (std::size_t c = 0; c < p_; ++c) {
        out[c] = ctx.x_self[c];
        double s = 0.0;
        for (const double* r : ctx.x_neighbors) s += r[c];
        out[p_ + c] = k > 0 ? s / k : 0.0;
      }
      break;
    }
    case Kind::sutva: {
      out[0] = 1.0;
      for (std::size_t c = 0; c < p_; ++c) out[1 + c] = ctx.x_self[c];
      break;
    }
    default:
      break;
  }
}

}  // namespace keceni
