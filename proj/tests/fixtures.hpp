#pragma once

#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "keceni/dataset.hpp"
#include "keceni/graph.hpp"
#include "keceni/random.hpp"

namespace keceni::testing {

inline Graph path_graph(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i + 1 < n; ++i) e.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(i + 1));
  return Graph::build(n, e);
}

inline Graph ring_graph(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i < n; ++i) e.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>((i + 1) % n));
  return Graph::build(n, e);
}

inline Graph random_graph(std::size_t n, double p, std::uint64_t seed) {
  Rng rng(seed);
  std::bernoulli_distribution coin(p);
  std::vector<Edge> e;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (coin(rng)) e.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
  return Graph::build(n, e);
}

/// Linear-world data on `g`: binary or Gaussian covariates, coin-flip
/// treatments with a covariate tilt, outcome linear in own and neighbor terms.
inline Dataset linear_world(const Graph& g, std::uint64_t seed, bool binary_x, std::size_t p = 1) {
  const std::size_t n = g.size();
  Rng rng(seed);
  std::normal_distribution<double> gauss;
  std::bernoulli_distribution half(0.5);
  Eigen::MatrixXd x(n, p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < p; ++c) x(i, c) = binary_x ? (half(rng) ? 1.0 : 0.0) : gauss(rng);
  std::vector<int> t(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::bernoulli_distribution coin(x(i, 0) > 0.5 ? 0.65 : 0.35);
    t[i] = coin(rng) ? 1 : 0;
  }
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double avg = 0.0;
    const auto nb = g.neighbors(static_cast<NodeId>(i));
    for (NodeId j : nb) avg += t[j] - 0.5;
    if (!nb.empty()) avg /= static_cast<double>(nb.size());
    y[i] = 2.0 * (t[i] - 0.5) + 2.0 * avg - x(i, 0) + gauss(rng);
  }
  return make_dataset(g, std::move(y), std::move(t), std::move(x));
}

/// Same data under the relabeling old node k -> new node perm[k].
inline Dataset relabel(const Dataset& ds, const std::vector<NodeId>& perm) {
  const std::size_t n = ds.size();
  std::vector<Edge> e;
  for (const auto& [a, b] : ds.graph.edges()) e.emplace_back(perm[a], perm[b]);
  Graph g = Graph::build(n, e);
  std::vector<double> y(n);
  std::vector<int> t(n);
  Eigen::MatrixXd x(n, ds.x.cols());
  for (std::size_t k = 0; k < n; ++k) {
    y[perm[k]] = ds.y[k];
    t[perm[k]] = ds.t[k];
    x.row(perm[k]) = ds.x.row(static_cast<Eigen::Index>(k));
  }
  return make_dataset(std::move(g), std::move(y), std::move(t), std::move(x));
}

inline std::vector<NodeId> random_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<NodeId> p(n);
  std::iota(p.begin(), p.end(), 0);
  Rng rng(seed);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("keceni_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace keceni::testing
