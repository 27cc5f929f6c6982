#pragma once

#include <array>
#include <cstdint>
#include <string>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "keceni/dataset.hpp"
#include "keceni/scenario.hpp"

namespace keceni {

/// Pr[(i,j) ∈ E] = min(1, ρ exp(-e^{β d})), d = ‖Z_i - Z_j‖_∞.
double edge_probability(double dist_inf, double rho, double beta);

struct LatentNetwork {
  Graph graph;
  Eigen::MatrixXd z;  // n x 2 latent positions
};

/// Z_i iid uniform on [-half_width, half_width]², independent edge coins.
LatentNetwork gen_latent_network(std::size_t n, double rho, double beta, std::uint64_t seed, double half_width = 1.0);

/// The n nodes with the smallest ‖Z‖_∞ (index breaks ties), relabeled in that
/// order, with the induced subgraph. Nested across n by construction.
LatentNetwork nested_subnetwork(const LatentNetwork& pre, std::size_t n);

/// argmin ‖Z_i‖_∞, lowest index on ties.
NodeId select_target(const Eigen::MatrixXd& z);

struct NodewiseCoefficients {
  double pi0 = 0.0;
  std::array<double, 3> pi1{0.5, 0.5, 0.5};
  std::array<double, 3> pi2{0.0, 0.0, 0.0};
  double mu0 = 0.0;
  double mu1 = 2.0;
  double mu2 = 2.0;
  std::array<double, 3> mu3{-1.55, -1.55, -1.55};
  std::array<double, 3> mu4{-1.55, -1.55, -1.55};
};

/// X ~ N(0, I₃); T_i ~ Bernoulli(expit(π0 + π1·x_i + π2·Avg x_{N_i\i}));
/// Y_i = μ0 + μ1(t_i-.5) + μ2 Avg(t-.5) + μ3·x_i + μ4·Avg x_{N_i^{(2)}\i} + N(0,1).
Dataset gen_nodewise_data(const Graph& g, const NodewiseCoefficients& c, std::uint64_t seed);

/// Closed form of the linear world (covariates have mean zero).
double true_theta_nodewise(const Graph& g, const NodewiseCoefficients& c, const TreatmentScenario& sc);

struct AteCoefficients {
  double beta_pi = 5.0;
  double mu1 = 1.0;
  double mu2 = -7.0;
};

/// X ∈ {0,1}² with Bernoulli(.5) entries; T_i ~ Bernoulli(expit(β_π Avg w(x_{N_i\i})));
/// Y_i ~ Bernoulli(expit(μ1(t_i-.5) + μ2 Avg w(x_{N_i\i}))), w(x) = (x1-.5)(x2-.5).
Dataset gen_ate_data(const Graph& g, const AteCoefficients& c, std::uint64_t seed);

/// Exact θ_i(t*) of the binary world: w(X_j) is ±1/4 with probability 1/2,
/// so the neighbor average is a scaled binomial.
double true_theta_ate(const Graph& g, const AteCoefficients& c, const TreatmentScenario& sc);

/// n^{-1} Σ_i θ_i under the all-treated (t = 1) or none-treated (t = 0) scenario.
double average_theta_ate(const Graph& g, const AteCoefficients& c, int t);

struct SimConfig {
  std::string experiment = "nodewise";  // nodewise | dr | ate
  std::size_t n = 500;
  double rho = 2.0;
  double beta = 10.0;
  double half_width = 1.0;
  NodewiseCoefficients nodewise;
  AteCoefficients ate;
  double alpha_pi = 0.0;  // fitting-stage only
  double alpha_mu = 0.0;
  std::size_t reps = 1;
  std::uint64_t seed = 1;

  nlohmann::json to_json() const;
};

/// Seed of replication `rep` (data only; the network is drawn once from cfg.seed).
std::uint64_t replication_seed(std::uint64_t seed, std::size_t rep);

}  // namespace keceni
