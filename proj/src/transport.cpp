#include "keceni/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include "keceni/error.hpp"

namespace keceni {

PointMultiset PointMultiset::from_points(std::size_t dim, std::span<const double> flat) {
  PointMultiset m(dim);
  if (dim == 0) return m;
  for (std::size_t k = 0; k + dim <= flat.size(); k += dim) m.add(flat.subspan(k, dim));
  return m;
}

void PointMultiset::add(std::span<const double> point, std::int64_t count) {
  for (std::size_t k = 0; k < counts_.size(); ++k) {
    if (std::equal(point.begin(), point.end(), coords_.begin() + static_cast<std::ptrdiff_t>(k * dim_))) {
      counts_[k] += count;
      total_ += count;
      return;
    }
  }
  coords_.insert(coords_.end(), point.begin(), point.end());
  counts_.push_back(count);
  total_ += count;
}

std::vector<double> PointMultiset::mean() const {
  std::vector<double> m(dim_, 0.0);
  if (total_ == 0) return m;
  for (std::size_t k = 0; k < counts_.size(); ++k)
    for (std::size_t d = 0; d < dim_; ++d) m[d] += static_cast<double>(counts_[k]) * coords_[k * dim_ + d];
  for (auto& v : m) v /= static_cast<double>(total_);
  return m;
}

double w1_real_line(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InputError("w1_real_line needs two nonempty samples");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const auto na = static_cast<std::int64_t>(sa.size());
  const auto nb = static_cast<std::int64_t>(sb.size());
  // Quantile levels measured in units of 1/(na*nb): a's k-th step ends at (k+1)*nb.
  std::int64_t i = 0, j = 0, level = 0;
  double acc = 0.0;
  while (i < na && j < nb) {
    const std::int64_t end_a = (i + 1) * nb;
    const std::int64_t end_b = (j + 1) * na;
    const std::int64_t next = std::min(end_a, end_b);
    acc += static_cast<double>(next - level) * std::abs(sa[i] - sb[j]);
    level = next;
    if (end_a == next) ++i;
    if (end_b == next) ++j;
  }
  return acc / static_cast<double>(na * nb);
}

double min_cost_transport(std::span<const std::int64_t> supply, std::span<const std::int64_t> demand,
                          std::span<const double> cost, double certify_tol) {
  const std::size_t K = supply.size();
  const std::size_t L = demand.size();
  if (cost.size() != K * L) throw InputError("transport cost matrix has the wrong size");
  const std::int64_t total = std::accumulate(supply.begin(), supply.end(), std::int64_t{0});
  if (total != std::accumulate(demand.begin(), demand.end(), std::int64_t{0}))
    throw InputError("transport supplies and demands must balance");

  // Node layout: 0 = source, 1..K = supply, K+1..K+L = demand, K+L+1 = sink.
  const std::size_t V = K + L + 2;
  const std::size_t src = 0, sink = K + L + 1;
  std::vector<std::int64_t> sup(supply.begin(), supply.end());
  std::vector<std::int64_t> dem(demand.begin(), demand.end());
  std::vector<std::int64_t> flow(K * L, 0);
  std::vector<double> pot(V, 0.0);
  std::vector<double> dist(V);
  std::vector<std::size_t> prev(V);
  std::vector<char> done(V);
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double max_cost = cost.empty() ? 0.0 : *std::max_element(cost.begin(), cost.end());

  std::int64_t remaining = total;
  while (remaining > 0) {
    std::fill(dist.begin(), dist.end(), inf);
    std::fill(done.begin(), done.end(), 0);
    dist[src] = 0.0;
    auto relax = [&](std::size_t u, std::size_t v, double c) {
      const double nd = dist[u] + std::max(0.0, c + pot[u] - pot[v]);
      if (nd < dist[v]) {
        dist[v] = nd;
        prev[v] = u;
      }
    };
    for (std::size_t iter = 0; iter < V; ++iter) {
      std::size_t u = V;
      for (std::size_t v = 0; v < V; ++v)
        if (!done[v] && dist[v] < inf && (u == V || dist[v] < dist[u])) u = v;
      if (u == V) break;
      done[u] = 1;
      if (u == src) {
        for (std::size_t k = 0; k < K; ++k)
          if (sup[k] > 0) relax(src, 1 + k, 0.0);
      } else if (u <= K) {
        const std::size_t k = u - 1;
        for (std::size_t l = 0; l < L; ++l) relax(u, 1 + K + l, cost[k * L + l]);
      } else if (u < sink) {
        const std::size_t l = u - 1 - K;
        for (std::size_t k = 0; k < K; ++k)
          if (flow[k * L + l] > 0) relax(u, 1 + k, -cost[k * L + l]);
        if (dem[l] > 0) relax(u, sink, 0.0);
      }
    }
    if (!(dist[sink] < inf)) throw NumericError("transport: no augmenting path although mass remains");
    for (std::size_t v = 0; v < V; ++v) pot[v] += std::min(dist[v], dist[sink]);

    std::int64_t push = remaining;
    for (std::size_t v = sink; v != src; v = prev[v]) {
      const std::size_t u = prev[v];
      if (u == src) push = std::min(push, sup[v - 1]);
      else if (v == sink) push = std::min(push, dem[u - 1 - K]);
      else if (u > K) push = std::min(push, flow[(v - 1) * L + (u - 1 - K)]);
    }
    for (std::size_t v = sink; v != src; v = prev[v]) {
      const std::size_t u = prev[v];
      if (u == src) sup[v - 1] -= push;
      else if (v == sink) dem[u - 1 - K] -= push;
      else if (u <= K) flow[(u - 1) * L + (v - 1 - K)] += push;
      else flow[(v - 1) * L + (u - 1 - K)] -= push;
    }
    remaining -= push;
  }

  // Certificate: reduced costs nonnegative on every residual arc.
  const double tol = certify_tol * (1.0 + max_cost);
  double value = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t l = 0; l < L; ++l) {
      const double c = cost[k * L + l];
      const double rc = c + pot[1 + k] - pot[1 + K + l];
      if (rc < -tol || (flow[k * L + l] > 0 && rc > tol))
        throw NumericError("transport: optimality certificate failed (reduced cost " + std::to_string(rc) + ")");
      value += static_cast<double>(flow[k * L + l]) * c;
    }
  }
  return value;
}

double w1_discrete(const PointMultiset& a, const PointMultiset& b, const TransportOptions& opts) {
  if (a.empty() || b.empty()) throw InputError("w1_discrete needs two nonempty multisets");
  if (a.dim() != b.dim()) throw InputError("w1_discrete: dimension mismatch");
  if (a.total() > opts.size_cap || b.total() > opts.size_cap)
    throw InputError("w1_discrete: multiset size exceeds the cap of " + std::to_string(opts.size_cap));
  const std::int64_t lcm = std::lcm(a.total(), b.total());
  const std::int64_t sa = lcm / a.total();
  const std::int64_t sb = lcm / b.total();
  std::vector<std::int64_t> supply(a.distinct()), demand(b.distinct());
  for (std::size_t k = 0; k < a.distinct(); ++k) supply[k] = a.count(k) * sa;
  for (std::size_t l = 0; l < b.distinct(); ++l) demand[l] = b.count(l) * sb;
  std::vector<double> cost(a.distinct() * b.distinct());
  for (std::size_t k = 0; k < a.distinct(); ++k) {
    const auto p = a.point(k);
    for (std::size_t l = 0; l < b.distinct(); ++l) {
      const auto q = b.point(l);
      double c = 0.0;
      for (std::size_t d = 0; d < p.size(); ++d) c += std::abs(p[d] - q[d]);
      cost[k * b.distinct() + l] = c;
    }
  }
  return min_cost_transport(supply, demand, cost, opts.certify_tol) / static_cast<double>(lcm);
}

namespace {

/// Candidate dual potentials on {0,1}^d with φ(0) = 0: the integer 1-Lipschitz
/// functions (graph metric of the cube) that are not the midpoint of two
/// others. Every vertex of the Lipschitz polytope is among them.
std::vector<std::vector<double>> make_cube_potentials(std::size_t d) {
  const std::size_t V = std::size_t{1} << d;
  const int span = static_cast<int>(d);
  std::vector<std::vector<int>> all;
  std::vector<int> f(V, 0);
  const std::size_t free = V - 1;
  std::size_t combos = 1;
  for (std::size_t k = 0; k < free; ++k) combos *= static_cast<std::size_t>(2 * span + 1);
  for (std::size_t c = 0; c < combos; ++c) {
    std::size_t r = c;
    for (std::size_t v = 1; v < V; ++v) {
      f[v] = static_cast<int>(r % static_cast<std::size_t>(2 * span + 1)) - span;
      r /= static_cast<std::size_t>(2 * span + 1);
    }
    bool ok = true;
    for (std::size_t u = 0; u < V && ok; ++u)
      for (std::size_t b = 0; b < d && ok; ++b) ok = std::abs(f[u] - f[u ^ (std::size_t{1} << b)]) <= 1;
    if (ok) all.push_back(f);
  }
  const std::set<std::vector<int>> lookup(all.begin(), all.end());
  std::vector<std::vector<double>> out;
  for (const auto& g : all) {
    bool midpoint = false;
    for (const auto& h : all) {
      if (&h == &g) continue;
      std::vector<int> mirror(V);
      for (std::size_t v = 0; v < V; ++v) mirror[v] = 2 * g[v] - h[v];
      if (lookup.count(mirror)) {
        midpoint = true;
        break;
      }
    }
    if (!midpoint) out.emplace_back(g.begin(), g.end());
  }
  return out;
}

const std::vector<std::vector<double>>& cube_potential_table(std::size_t d) {
  static const std::vector<std::vector<std::vector<double>>> tables = [] {
    std::vector<std::vector<std::vector<double>>> t;
    for (std::size_t k = 0; k <= kMaxCubeDim; ++k) t.push_back(make_cube_potentials(k));
    return t;
  }();
  return tables.at(d);
}

}  // namespace

bool on_binary_cube(const PointMultiset& m) {
  if (m.dim() == 0 || m.dim() > kMaxCubeDim) return false;
  for (std::size_t k = 0; k < m.distinct(); ++k)
    for (double v : m.point(k))
      if (v != 0.0 && v != 1.0) return false;
  return true;
}

std::vector<double> cube_potentials(const PointMultiset& m) {
  if (m.empty() || !on_binary_cube(m)) throw InputError("cube_potentials needs a nonempty multiset on {0,1}^d, d <= 3");
  const std::size_t V = std::size_t{1} << m.dim();
  std::vector<double> mass(V, 0.0);
  for (std::size_t k = 0; k < m.distinct(); ++k) {
    std::size_t v = 0;
    const auto p = m.point(k);
    for (std::size_t b = 0; b < p.size(); ++b)
      if (p[b] == 1.0) v |= std::size_t{1} << b;
    mass[v] += static_cast<double>(m.count(k));
  }
  for (double& w : mass) w /= static_cast<double>(m.total());
  const auto& table = cube_potential_table(m.dim());
  std::vector<double> out(table.size());
  for (std::size_t k = 0; k < table.size(); ++k) {
    double s = 0.0;
    for (std::size_t v = 0; v < V; ++v) s += table[k][v] * mass[v];
    out[k] = s;
  }
  return out;
}

double cube_w1(std::span<const double> pa, std::span<const double> pb) {
  if (pa.size() != pb.size()) throw InputError("cube_w1: potential vectors of different cubes");
  double best = 0.0;
  for (std::size_t k = 0; k < pa.size(); ++k) best = std::max(best, pa[k] - pb[k]);
  return best;
}

double w1_binary_cube(const PointMultiset& a, const PointMultiset& b) {
  if (a.dim() != b.dim()) throw InputError("w1_binary_cube: dimension mismatch");
  return cube_w1(cube_potentials(a), cube_potentials(b));
}

}  // namespace keceni
