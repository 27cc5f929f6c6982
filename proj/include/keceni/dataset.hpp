#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "keceni/graph.hpp"

namespace keceni {

/// Observed network data: outcome, binary treatment and a fixed-width
/// covariate row per node, bound to the graph they live on.
struct Dataset {
  Graph graph;
  std::vector<double> y;  // NaN marks a missing outcome
  std::vector<int> t;
  Eigen::MatrixXd x;      // n x p, row i is node i
  std::vector<std::string> ids;
  std::vector<std::string> covariate_names;

  std::size_t size() const { return graph.size(); }
  std::size_t covariate_width() const { return static_cast<std::size_t>(x.cols()); }
  bool has_outcome(NodeId i) const;

  /// Throws InputError unless array lengths, treatment values and covariates
  /// are consistent with the graph.
  void validate() const;
};

/// Builds a dataset with ids "0".."n-1" (zero padded so they sort numerically).
Dataset make_dataset(Graph graph, std::vector<double> y, std::vector<int> t, Eigen::MatrixXd x);

/// Reads `id,y,t,x1..xp` and `src,dst` CSV files. String ids are remapped to
/// dense integers in sorted order. A blank y marks a missing outcome.
Dataset load_dataset(const std::filesystem::path& node_csv, const std::filesystem::path& edge_csv);

/// Writes the two CSV files with rows sorted by dense id and edges as (i<j).
void write_dataset(const Dataset& ds, const std::filesystem::path& node_csv, const std::filesystem::path& edge_csv);

/// Index of `id` in ds.ids; throws InputError if absent.
NodeId node_index(const Dataset& ds, const std::string& id);

/// Z-scores every covariate column in place (constant columns are centered only).
void standardize_covariates(Dataset& ds);

}  // namespace keceni
