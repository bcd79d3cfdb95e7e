#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "cpte/cross_plot.hpp"

namespace cpte {

// Undirected simple graph on n nodes.
class BinaryNetwork {
 public:
  BinaryNetwork() = default;
  explicit BinaryNetwork(std::size_t n, double threshold = 0.0);

  static BinaryNetwork from_edges(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges);

  std::size_t size() const { return n_; }
  double threshold() const { return threshold_; }
  bool edge(std::size_t i, std::size_t j) const { return adj_[i * n_ + j] != 0; }
  void set_edge(std::size_t i, std::size_t j, bool on);
  std::size_t degree(std::size_t i) const;
  std::size_t edge_count() const;
  const std::vector<std::uint8_t>& adjacency() const { return adj_; }

 private:
  std::size_t n_ = 0;
  double threshold_ = 0.0;
  std::vector<std::uint8_t> adj_;
};

// Channels i != j are connected iff m(i, j) <= th.
BinaryNetwork binarize(const SyncMatrix& m, double th);

// 2 t_k / (p_k (p_k - 1)); 0 for nodes of degree < 2.
std::vector<double> clustering_coefficients(const BinaryNetwork& g);

// Diagonal of exp(A) via the symmetric eigendecomposition.
std::vector<double> subgraph_centrality(const BinaryNetwork& g);

// Trace of exp(A): the network-level summary of subgraph centrality.
double estrada_index(const BinaryNetwork& g);

struct EigenvectorCentrality {
  std::vector<double> values;  // max entry 1, nonnegative
  double eigenvalue = 0.0;
  int iterations = 0;
  bool empty_network = false;  // no edges: values are all zero
};

// Power iteration on A + I from the uniform vector; throws on non-convergence.
EigenvectorCentrality eigenvector_centrality(const BinaryNetwork& g);

// Active edges over n(n-1)/2.
double connectivity_density(const BinaryNetwork& g);

struct NodeMeasures {
  std::vector<double> cc;
  std::vector<double> sc;
  std::vector<double> ec;
};

NodeMeasures node_measures(const BinaryNetwork& g);

}  // namespace cpte
