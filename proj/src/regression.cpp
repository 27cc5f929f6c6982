#include "keceni/regression.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "keceni/error.hpp"
#include "keceni/features.hpp"

namespace keceni {
namespace {

double softplus(double v) { return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); }

double condition_of(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double lo = std::abs(ev.minCoeff());
  const double hi = std::abs(ev.maxCoeff());
  return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

std::string column_label(std::span<const std::string> names, Eigen::Index c) {
  if (c < static_cast<Eigen::Index>(names.size())) return names[static_cast<std::size_t>(c)];
  return "column " + std::to_string(c);
}

void append_bytes(std::string& s, double v) {
  if (v == 0.0) v = 0.0;  // fold -0
  char buf[sizeof(double)];
  std::memcpy(buf, &v, sizeof(double));
  s.append(buf, sizeof(double));
}

constexpr std::size_t kMemoCap = 4'000'000;

}  // namespace

ParametricFit fit_least_squares(const Eigen::MatrixXd& z, const Eigen::VectorXd& y, std::span<const std::string> column_names) {
  if (z.rows() != y.size()) throw InputError("least squares: design and response lengths differ");
  if (z.rows() < z.cols()) throw NumericError("least squares: fewer observations than regressors");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(z);
  qr.setThreshold(1e-10);
  if (qr.rank() < z.cols()) {
    std::ostringstream msg;
    msg << "least squares: design matrix is rank deficient (rank " << qr.rank() << " of " << z.cols()
        << "); collinear columns:";
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = qr.rank(); k < z.cols(); ++k) msg << ' ' << column_label(column_names, perm(k));
    throw NumericError(msg.str());
  }
  ParametricFit fit;
  fit.beta = qr.solve(y);
  // One step of iterative refinement keeps Zᵀr at rounding level.
  Eigen::VectorXd r = y - z * fit.beta;
  fit.beta += qr.solve(r);
  r = y - z * fit.beta;

  const Eigen::MatrixXd gram = z.transpose() * z;
  fit.linearization.bread_inverse = gram.ldlt().solve(Eigen::MatrixXd::Identity(z.cols(), z.cols()));
  fit.linearization.scores = z.array().colwise() * r.array();
  fit.linearization.condition_number = condition_of(gram);
  fit.gradient_norm = (z.transpose() * r).lpNorm<Eigen::Infinity>();
  return fit;
}

double logistic_log_likelihood(const Eigen::MatrixXd& z, const Eigen::VectorXd& y, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = z * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) ll += y(i) * eta(i) - softplus(eta(i));
  return ll;
}

Eigen::VectorXd logistic_gradient(const Eigen::MatrixXd& z, const Eigen::VectorXd& y, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = z * beta;
  Eigen::VectorXd resid(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) resid(i) = y(i) - expit(eta(i));
  return z.transpose() * resid;
}

ParametricFit fit_logistic_regression(const Eigen::MatrixXd& z, const Eigen::VectorXd& y, const LogisticOptions& opts) {
  if (z.rows() != y.size()) throw InputError("logistic regression: design and response lengths differ");
  bool has0 = false, has1 = false;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) == 0.0) has0 = true;
    else if (y(i) == 1.0) has1 = true;
    else throw InputError("logistic regression: targets must be 0/1");
  }
  if (!has0 || !has1) throw InputError("logistic regression: targets need at least one 0 and one 1");

  const auto p = z.cols();
  const Eigen::MatrixXd ridge_eye = opts.ridge * Eigen::MatrixXd::Identity(p, p);
  auto objective = [&](const Eigen::VectorXd& b) { return logistic_log_likelihood(z, y, b) - 0.5 * opts.ridge * b.squaredNorm(); };

  ParametricFit fit;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd prob(z.rows());
  Eigen::VectorXd grad;
  bool converged = false;
  for (int iter = 0; iter <= opts.max_iterations; ++iter) {
    const Eigen::VectorXd eta = z * beta;
    for (Eigen::Index i = 0; i < eta.size(); ++i) prob(i) = expit(eta(i));
    grad = z.transpose() * (y - prob) - opts.ridge * beta;
    fit.iterations = iter;
    fit.gradient_norm = grad.lpNorm<Eigen::Infinity>();
    if (fit.gradient_norm < opts.tolerance) {
      converged = true;
      break;
    }
    if (iter == opts.max_iterations) break;
    const Eigen::VectorXd w = prob.array() * (1.0 - prob.array());
    const Eigen::MatrixXd info = z.transpose() * (z.array().colwise() * w.array()).matrix() + ridge_eye;
    const Eigen::VectorXd step = info.ldlt().solve(grad);
    const double base = objective(beta);
    double scale = 1.0;
    Eigen::VectorXd next = beta + step;
    for (int h = 0; h < 40 && objective(next) < base - 1e-12 * std::abs(base); ++h) {
      scale *= 0.5;
      next = beta + scale * step;
    }
    beta = next;
    if (!beta.allFinite() || beta.norm() > 1e6)
      throw NumericError("logistic regression diverged (complete separation?); increase the ridge penalty");
  }
  if (!converged)
    throw NumericError("logistic regression did not converge in " + std::to_string(opts.max_iterations) +
                       " iterations (last gradient sup-norm " + std::to_string(fit.gradient_norm) + ")");

  const Eigen::VectorXd eta = z * beta;
  bool separated = true;
  for (Eigen::Index i = 0; i < eta.size() && separated; ++i) separated = (2.0 * y(i) - 1.0) * eta(i) > 0.0;
  if (separated && beta.norm() > opts.separation_norm)
    throw NumericError("logistic regression: complete separation detected (|beta| = " + std::to_string(beta.norm()) +
                       "); increase the ridge penalty");

  fit.beta = beta;
  const Eigen::VectorXd w = prob.array() * (1.0 - prob.array());
  const Eigen::MatrixXd info = z.transpose() * (z.array().colwise() * w.array()).matrix() + ridge_eye;
  fit.linearization.bread_inverse = info.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  fit.linearization.scores = z.array().colwise() * (y - prob).array();
  fit.linearization.condition_number = condition_of(info);
  return fit;
}

namespace {

void append_sorted_points(std::string& s, const PointMultiset& m, std::int64_t divisor) {
  std::vector<std::size_t> order(m.distinct());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto pa = m.point(a);
    const auto pb = m.point(b);
    return std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end());
  });
  for (auto k : order) {
    for (double v : m.point(k)) append_bytes(s, v);
    append_bytes(s, static_cast<double>(m.count(k) / divisor));
  }
}

}  // namespace

std::string canonical_key(const KernelKey& key) {
  std::string s;
  s.reserve((key.ego.size() + key.neighbors.distinct() * (key.neighbors.dim() + 1) + 1) * sizeof(double));
  for (double v : key.ego) append_bytes(s, v);
  s.push_back('|');
  append_sorted_points(s, key.neighbors, 1);
  return s;
}

std::string canonical_measure(const PointMultiset& m) {
  std::int64_t g = 0;
  for (std::size_t k = 0; k < m.distinct(); ++k) g = std::gcd(g, m.count(k));
  std::string s;
  append_bytes(s, static_cast<double>(m.dim()));
  append_sorted_points(s, m, g > 0 ? g : 1);
  return s;
}

namespace {

double ego_l1(const KernelKey& a, const KernelKey& b) {
  double d = 0.0;
  for (std::size_t c = 0; c < a.ego.size(); ++c) d += std::abs(a.ego[c] - b.ego[c]);
  return d;
}

double anchor_distance(const PointMultiset& m, std::span<const double> anchor) {
  double acc = 0.0;
  for (std::size_t k = 0; k < m.distinct(); ++k) {
    const auto p = m.point(k);
    double c = 0.0;
    for (std::size_t d = 0; d < p.size(); ++d) c += std::abs(p[d] - (d < anchor.size() ? anchor[d] : 0.5));
    acc += static_cast<double>(m.count(k)) * c;
  }
  return acc / static_cast<double>(m.total());
}

double neighbor_w1(const PointMultiset& a, const PointMultiset& b) {
  if (a.dim() == b.dim() && on_binary_cube(a) && on_binary_cube(b)) return w1_binary_cube(a, b);
  TransportOptions opts;
  opts.size_cap = std::numeric_limits<std::int64_t>::max() / 4;
  return w1_discrete(a, b, opts);
}

/// Neighbor part of the Wasserstein key distance; `w1` is only called when
/// both sides are nonempty.
template <class W1>
double neighbor_term(const PointMultiset& a, const PointMultiset& b, std::span<const double> anchor, W1&& w1) {
  const bool ea = a.empty();
  const bool eb = b.empty();
  if (ea && eb) return 0.0;
  if (ea) return anchor_distance(b, anchor);
  if (eb) return anchor_distance(a, anchor);
  return w1();
}

double key_distance(const KernelKey& a, const KernelKey& b, KeyMetric metric, std::span<const double> anchor) {
  const double ego = ego_l1(a, b);
  if (metric == KeyMetric::l1) return ego;
  return ego + neighbor_term(a.neighbors, b.neighbors, anchor, [&] { return neighbor_w1(a.neighbors, b.neighbors); });
}

constexpr std::size_t kW1CacheCap = 20'000'000;

}  // namespace

KernelRegressor::KernelRegressor(std::vector<KernelKey> keys, std::vector<double> targets, double bandwidth, KeyMetric metric,
                                 KernelShape shape, std::vector<double> empty_anchor)
    : bandwidth_(bandwidth), metric_(metric), shape_(shape), anchor_(std::move(empty_anchor)) {
  if (keys.empty() || keys.size() != targets.size()) throw InputError("kernel regressor: training table is empty or misaligned");
  if (!(bandwidth > 0.0)) throw InputError("kernel regressor: bandwidth must be positive");
  std::map<std::string, std::size_t> index;
  for (std::size_t k = 0; k < keys.size(); ++k) {
    auto [it, fresh] = index.emplace(canonical_key(keys[k]), groups_.size());
    if (fresh) {
      Group g;
      g.neighbor_mean = keys[k].neighbors.mean();
      g.set_id = intern(keys[k].neighbors);
      if (metric_ == KeyMetric::wasserstein && !keys[k].neighbors.empty() && on_binary_cube(keys[k].neighbors))
        g.potentials = cube_potentials(keys[k].neighbors);
      g.key = std::move(keys[k]);
      groups_.push_back(std::move(g));
    }
    groups_[it->second].target_sum += targets[k];
    groups_[it->second].count += 1.0;
  }
  target_min_ = *std::min_element(targets.begin(), targets.end());
  target_max_ = *std::max_element(targets.begin(), targets.end());
}

double KernelRegressor::distance(const KernelKey& a, const KernelKey& b) const { return key_distance(a, b, metric_, anchor_); }

std::uint32_t KernelRegressor::intern(const PointMultiset& m) const {
  auto key = canonical_measure(m);
  std::lock_guard lock(memo_mutex_);
  return set_ids_.emplace(std::move(key), static_cast<std::uint32_t>(set_ids_.size())).first->second;
}

double KernelRegressor::group_distance(const KernelKey& q, std::uint32_t q_set, std::span<const double> q_potentials,
                                       const Group& g) const {
  const double ego = ego_l1(q, g.key);
  if (metric_ == KeyMetric::l1) return ego;
  return ego + neighbor_term(q.neighbors, g.key.neighbors, anchor_, [&] {
           if (q_set == g.set_id) return 0.0;
           if (!q_potentials.empty() && q_potentials.size() == g.potentials.size()) return cube_w1(q_potentials, g.potentials);
           const auto lo = std::min(q_set, g.set_id), hi = std::max(q_set, g.set_id);
           const std::uint64_t slot = (static_cast<std::uint64_t>(lo) << 32) | hi;
           {
             std::lock_guard lock(memo_mutex_);
             const auto it = w1_cache_.find(slot);
             if (it != w1_cache_.end()) return it->second;
           }
           const double w = neighbor_w1(q.neighbors, g.key.neighbors);
           std::lock_guard lock(memo_mutex_);
           if (w1_cache_.size() < kW1CacheCap) w1_cache_.emplace(slot, w);
           return w;
         });
}

double KernelRegressor::lower_bound(const KernelKey& q, const std::vector<double>& q_mean, const Group& g) const {
  double lb = ego_l1(q, g.key);
  if (metric_ == KeyMetric::wasserstein && !q.neighbors.empty() && !g.key.neighbors.empty())
    for (std::size_t d = 0; d < q_mean.size(); ++d) lb += std::abs(q_mean[d] - g.neighbor_mean[d]);
  return lb;
}

double KernelRegressor::predict_uncached(const KernelKey& query) const {
  const auto q_mean = query.neighbors.mean();
  const std::uint32_t q_set = metric_ == KeyMetric::wasserstein ? intern(query.neighbors) : 0;
  std::vector<double> q_potentials;
  if (metric_ == KeyMetric::wasserstein && !query.neighbors.empty() && on_binary_cube(query.neighbors))
    q_potentials = cube_potentials(query.neighbors);
  std::vector<double> lb(groups_.size());
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < groups_.size(); ++k) {
    const auto& g = groups_[k];
    lb[k] = lower_bound(query, q_mean, g);
    if (kernel_profile(shape_, lb[k] / bandwidth_) == 0.0) continue;
    const double w = kernel_profile(shape_, group_distance(query, q_set, q_potentials, g) / bandwidth_);
    num += w * g.target_sum;
    den += w * g.count;
  }
  if (den > 0.0) return num / den;
  // Nearest key, visiting groups by increasing lower bound.
  std::vector<std::size_t> order(groups_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return lb[a] < lb[b] || (lb[a] == lb[b] && a < b); });
  double best = std::numeric_limits<double>::infinity();
  double value = 0.0;
  for (std::size_t k : order) {
    if (lb[k] >= best) break;
    const double d = group_distance(query, q_set, q_potentials, groups_[k]);
    if (d < best) {
      best = d;
      value = groups_[k].target_sum / groups_[k].count;
    }
  }
  return value;
}

double KernelRegressor::predict(const KernelKey& query) const {
  const auto key = canonical_key(query);
  {
    std::lock_guard lock(memo_mutex_);
    const auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
  }
  const double v = predict_uncached(query);
  std::lock_guard lock(memo_mutex_);
  if (memo_.size() < kMemoCap) memo_.emplace(key, v);
  return v;
}

double median_pairwise_distance(std::span<const KernelKey> keys, KeyMetric metric, std::span<const double> anchor,
                                std::size_t max_points) {
  if (keys.size() < 2) return 1.0;
  const std::size_t m = std::min(max_points, keys.size());
  std::vector<std::size_t> pick(m);
  for (std::size_t k = 0; k < m; ++k) pick[k] = k * keys.size() / m;
  std::vector<double> d;
  d.reserve(m * (m - 1) / 2);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b) d.push_back(key_distance(keys[pick[a]], keys[pick[b]], metric, anchor));
  auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  return *mid > 0.0 ? *mid : 1.0;
}

double select_bandwidth_loocv(std::span<const KernelKey> keys, std::span<const double> targets, KeyMetric metric,
                              std::span<const double> anchor, std::span<const double> grid, KernelShape shape) {
  if (grid.empty()) throw InputError("bandwidth grid is empty");
  // Group identical keys; LOO removes one unit from its own group.
  std::map<std::string, std::size_t> index;
  std::vector<const KernelKey*> rep;
  std::vector<std::vector<double>> members;
  for (std::size_t k = 0; k < keys.size(); ++k) {
    auto [it, fresh] = index.emplace(canonical_key(keys[k]), rep.size());
    if (fresh) {
      rep.push_back(&keys[k]);
      members.emplace_back();
    }
    members[it->second].push_back(targets[k]);
  }
  const std::size_t G = rep.size();
  std::vector<double> sums(G), counts(G);
  for (std::size_t g = 0; g < G; ++g) {
    sums[g] = std::accumulate(members[g].begin(), members[g].end(), 0.0);
    counts[g] = static_cast<double>(members[g].size());
  }
  // W1 depends only on the neighbor proportions, so compute it once per pair
  // of distinct measures.
  std::map<std::string, std::size_t> set_index;
  std::vector<std::size_t> set_of(G);
  for (std::size_t g = 0; g < G; ++g)
    set_of[g] = set_index.emplace(canonical_measure(rep[g]->neighbors), set_index.size()).first->second;
  const std::size_t U = set_index.size();
  std::vector<double> w1(metric == KeyMetric::wasserstein ? U * U : 0, -1.0);
  std::vector<double> dist(G * G, 0.0);
  for (std::size_t a = 0; a < G; ++a) {
    for (std::size_t b = a + 1; b < G; ++b) {
      double d = ego_l1(*rep[a], *rep[b]);
      if (metric == KeyMetric::wasserstein) {
        d += neighbor_term(rep[a]->neighbors, rep[b]->neighbors, anchor, [&] {
          const std::size_t sa = set_of[a], sb = set_of[b];
          if (sa == sb) return 0.0;
          double& slot = w1[std::min(sa, sb) * U + std::max(sa, sb)];
          if (slot < 0.0) slot = neighbor_w1(rep[a]->neighbors, rep[b]->neighbors);
          return slot;
        });
      }
      dist[a * G + b] = dist[b * G + a] = d;
    }
  }

  double best_bw = grid.front();
  double best_err = std::numeric_limits<double>::infinity();
  std::vector<double> sorted(grid.begin(), grid.end());
  std::sort(sorted.begin(), sorted.end());
  for (double bw : sorted) {
    double err = 0.0;
    for (std::size_t g = 0; g < G; ++g) {
      double num = 0.0, den = 0.0;
      for (std::size_t h = 0; h < G; ++h) {
        const double w = kernel_profile(shape, dist[g * G + h] / bw);
        num += w * sums[h];
        den += w * counts[h];
      }
      for (double yi : members[g]) {
        const double n_loo = num - yi;  // κ(0) = 1 for the unit itself
        const double d_loo = den - 1.0;
        double pred;
        if (d_loo > 1e-12) {
          pred = n_loo / d_loo;
        } else {
          double nearest = std::numeric_limits<double>::infinity();
          pred = 0.0;
          for (std::size_t h = 0; h < G; ++h) {
            if (h == g && counts[h] < 2.0) continue;
            const double d = dist[g * G + h];
            if (d < nearest) {
              nearest = d;
              pred = h == g ? (sums[h] - yi) / (counts[h] - 1.0) : sums[h] / counts[h];
            }
          }
        }
        err += (yi - pred) * (yi - pred);
      }
    }
    if (err < best_err) {
      best_err = err;
      best_bw = bw;
    }
  }
  return best_bw;
}

}  // namespace keceni
