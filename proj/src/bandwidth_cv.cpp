#include "keceni/bandwidth_cv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

#include "keceni/error.hpp"
#include "keceni/parallel.hpp"

namespace keceni {

std::vector<double> default_bandwidth_grid(const Dataset& ds, const DissimilarityMetric& metric, std::size_t points) {
  const auto observed = observed_local_treatments(ds);
  const std::size_t n = observed.size();
  const std::size_t targets = std::min<std::size_t>(n, 500);
  std::vector<double> pooled;
  double hi = 0.0;
  for (std::size_t k = 0; k < targets; ++k) {
    const auto& target = observed[k * n / targets];
    for (const auto& o : observed) {
      const double d = metric(o, target);
      if (d > 0.0 && std::isfinite(d)) {
        pooled.push_back(d);
        hi = std::max(hi, d);
      }
    }
  }
  if (pooled.empty()) return {1.0};
  const auto at = static_cast<std::size_t>(0.05 * static_cast<double>(pooled.size() - 1));
  std::nth_element(pooled.begin(), pooled.begin() + static_cast<std::ptrdiff_t>(at), pooled.end());
  const double lo = pooled[at];
  if (points < 2 || !(hi > lo)) return {hi};
  std::vector<double> grid(points);
  for (std::size_t k = 0; k < points; ++k)
    grid[k] = lo * std::pow(hi / lo, static_cast<double>(k) / static_cast<double>(points - 1));
  grid.back() = hi;
  return grid;
}

CVResult cv_select(const Dataset& ds, const NeighborhoodIndex& index, std::span<const PseudoOutcome> po,
                   const DissimilarityMetric& metric, KernelShape shape, std::span<const double> grid, int threads) {
  if (grid.empty()) throw InputError("bandwidth grid is empty");
  for (double l : grid)
    if (!(l > 0.0)) throw InputError("bandwidth grid values must be positive");
  if (po.size() != ds.size()) throw InputError("pseudo-outcomes do not match the dataset");

  CVResult res;
  res.grid.assign(grid.begin(), grid.end());
  std::sort(res.grid.begin(), res.grid.end());
  res.grid.erase(std::unique(res.grid.begin(), res.grid.end()), res.grid.end());
  const std::size_t L = res.grid.size();

  for (std::size_t i = 0; i < ds.size(); ++i)
    if (po[i].valid()) res.nodes.push_back(static_cast<NodeId>(i));
  const auto observed = observed_local_treatments(ds);
  const std::size_t n = ds.size();
  // Averages are taken around a common centre so that constant ξ̂ reproduce exactly.
  double centre = std::numeric_limits<double>::infinity();
  for (NodeId i : res.nodes) centre = std::min(centre, po[i].xi);

  res.xi.resize(res.nodes.size());
  res.theta_minus.assign(res.nodes.size(), std::vector<double>(L, std::numeric_limits<double>::quiet_NaN()));
  parallel_for(res.nodes.size(), threads, [&](std::size_t r) {
    const NodeId i = res.nodes[r];
    res.xi[r] = po[i].xi;
    std::vector<char> excluded(n, 0);
    for (NodeId j : index.at(i).members) excluded[j] = 1;
    std::vector<double> delta(n);
    for (std::size_t j = 0; j < n; ++j) delta[j] = metric(observed[j], observed[i]);
    std::vector<double> w(n), wx(n);
    for (std::size_t l = 0; l < L; ++l) {
      const Kernel kernel{shape, res.grid[l]};
      for (std::size_t j = 0; j < n; ++j) {
        const bool ok = !excluded[j] && po[j].valid() && std::isfinite(delta[j]);
        w[j] = ok ? kernel(delta[j]) : 0.0;
        wx[j] = ok ? w[j] * (po[j].xi - centre) : 0.0;
      }
      const double d = pairwise_sum(w);
      if (d > 0.0) res.theta_minus[r][l] = centre + pairwise_sum(wx) / d;
    }
  });

  res.mse.assign(L, std::numeric_limits<double>::infinity());
  res.n_used.assign(L, 0);
  res.n_skipped.assign(L, 0);
  for (std::size_t l = 0; l < L; ++l) {
    std::vector<double> sq;
    for (std::size_t r = 0; r < res.nodes.size(); ++r) {
      const double th = res.theta_minus[r][l];
      if (std::isnan(th)) {
        ++res.n_skipped[l];
        continue;
      }
      sq.push_back((res.xi[r] - th) * (res.xi[r] - th));
    }
    res.n_used[l] = sq.size();
    if (!sq.empty()) res.mse[l] = pairwise_sum(sq) / static_cast<double>(sq.size());
  }

  std::size_t best = L;
  for (std::size_t l = 0; l < L; ++l)
    if (std::isfinite(res.mse[l]) && (best == L || res.mse[l] < res.mse[best])) best = l;
  if (best == L) throw NumericError("bandwidth grid too narrow: no node has kernel mass at any candidate lambda");
  res.chosen = res.grid[best];
  return res;
}

nlohmann::json CVResult::to_json() const {
  nlohmann::json j;
  j["chosen"] = chosen;
  auto rows = nlohmann::json::array();
  for (std::size_t l = 0; l < grid.size(); ++l) {
    nlohmann::json r{{"lambda", grid[l]}, {"n_used", n_used[l]}, {"n_skipped", n_skipped[l]}};
    r["mse"] = std::isfinite(mse[l]) ? nlohmann::json(mse[l]) : nlohmann::json(nullptr);
    rows.push_back(std::move(r));
  }
  j["grid"] = std::move(rows);
  return j;
}

void CVResult::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << std::setprecision(17) << "lambda,mse,n_used\n";
  for (std::size_t l = 0; l < grid.size(); ++l) {
    out << grid[l] << ',';
    if (std::isfinite(mse[l])) out << mse[l];
    else out << "inf";
    out << ',' << n_used[l] << '\n';
  }
}

}  // namespace keceni
