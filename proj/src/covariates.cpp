#include "keceni/covariates.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "keceni/error.hpp"

namespace keceni {

CovariateDistribution CovariateDistribution::empirical(const Eigen::MatrixXd& x) {
  if (x.rows() == 0) throw InputError("empirical covariate law needs at least one row");
  CovariateDistribution cd;
  cd.p_ = static_cast<std::size_t>(x.cols());
  std::map<std::vector<double>, std::size_t> seen;
  cd.data_to_support_.resize(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    std::vector<double> r(cd.p_);
    for (std::size_t c = 0; c < cd.p_; ++c) r[c] = x(i, static_cast<Eigen::Index>(c));
    auto [it, fresh] = seen.emplace(r, cd.weights_.size());
    if (fresh) {
      cd.support_.insert(cd.support_.end(), r.begin(), r.end());
      cd.weights_.push_back(0.0);
    }
    cd.weights_[it->second] += 1.0;
    cd.data_to_support_[static_cast<std::size_t>(i)] = it->second;
  }
  cd.uniform_ = std::all_of(cd.weights_.begin(), cd.weights_.end(), [](double w) { return w == 1.0; });
  const double n = static_cast<double>(x.rows());
  for (auto& w : cd.weights_) w /= n;
  cd.cumulative_.resize(cd.weights_.size());
  std::partial_sum(cd.weights_.begin(), cd.weights_.end(), cd.cumulative_.begin());
  return cd;
}

CovariateDistribution CovariateDistribution::finite_law(const Eigen::MatrixXd& support, std::vector<double> weights) {
  if (support.rows() == 0 || static_cast<std::size_t>(support.rows()) != weights.size())
    throw InputError("finite covariate law: support and weights must be nonempty and aligned");
  CovariateDistribution cd;
  cd.p_ = static_cast<std::size_t>(support.cols());
  for (Eigen::Index i = 0; i < support.rows(); ++i)
    for (std::size_t c = 0; c < cd.p_; ++c) cd.support_.push_back(support(i, static_cast<Eigen::Index>(c)));
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) throw InputError("finite covariate law: weights must have positive total");
  for (auto& w : weights) {
    if (w < 0.0) throw InputError("finite covariate law: negative weight");
    w /= total;
  }
  cd.weights_ = std::move(weights);
  cd.uniform_ = false;
  cd.cumulative_.resize(cd.weights_.size());
  std::partial_sum(cd.weights_.begin(), cd.weights_.end(), cd.cumulative_.begin());
  return cd;
}

std::size_t CovariateDistribution::sample(Rng& rng) const {
  if (uniform_) return std::uniform_int_distribution<std::size_t>(0, weights_.size() - 1)(rng);
  const double u = std::uniform_real_distribution<double>(0.0, cumulative_.back())(rng);
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return std::min(static_cast<std::size_t>(it - cumulative_.begin()), weights_.size() - 1);
}

std::vector<std::vector<std::size_t>> sample_covariate_profiles(const CovariateDistribution& cd, std::size_t positions,
                                                                std::size_t m, std::uint64_t seed) {
  auto rng = make_rng(seed, Stream::covariates, 0);
  std::vector<std::vector<std::size_t>> out(m, std::vector<std::size_t>(positions));
  for (auto& profile : out)
    for (auto& k : profile) k = cd.sample(rng);
  return out;
}

}  // namespace keceni
