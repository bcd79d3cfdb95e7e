#include "cpte/netmetrics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "cpte/error.hpp"

namespace cpte {

BinaryNetwork::BinaryNetwork(std::size_t n, double threshold)
    : n_(n), threshold_(threshold), adj_(n * n, 0) {}

BinaryNetwork BinaryNetwork::from_edges(std::size_t n,
                                        const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  BinaryNetwork g(n);
  for (const auto& [i, j] : edges) {
    if (i >= n || j >= n || i == j) throw Error("bad_edge", "edge endpoints must be distinct nodes < n");
    g.set_edge(i, j, true);
  }
  return g;
}

void BinaryNetwork::set_edge(std::size_t i, std::size_t j, bool on) {
  adj_[i * n_ + j] = on;
  adj_[j * n_ + i] = on;
}

std::size_t BinaryNetwork::degree(std::size_t i) const {
  std::size_t d = 0;
  for (std::size_t j = 0; j < n_; ++j) d += adj_[i * n_ + j];
  return d;
}

std::size_t BinaryNetwork::edge_count() const {
  std::size_t e = 0;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j) e += adj_[i * n_ + j];
  return e;
}

BinaryNetwork binarize(const SyncMatrix& m, double th) {
  if (!(th >= 0.0 && th <= 1.0)) throw Error("bad_threshold", "threshold must lie in [0, 1]");
  BinaryNetwork g(m.n, th);
  for (std::size_t i = 0; i < m.n; ++i)
    for (std::size_t j = i + 1; j < m.n; ++j)
      if (m(i, j) <= th) g.set_edge(i, j, true);
  return g;
}

std::vector<double> clustering_coefficients(const BinaryNetwork& g) {
  const std::size_t n = g.size();
  std::vector<double> cc(n, 0.0);
  std::vector<std::size_t> nbrs;
  for (std::size_t k = 0; k < n; ++k) {
    nbrs.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (g.edge(k, j)) nbrs.push_back(j);
    const std::size_t p = nbrs.size();
    if (p < 2) continue;
    std::size_t t = 0;
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = a + 1; b < p; ++b) t += g.edge(nbrs[a], nbrs[b]);
    cc[k] = 2.0 * static_cast<double>(t) / static_cast<double>(p * (p - 1));
  }
  return cc;
}

namespace {

Eigen::MatrixXd dense(const BinaryNetwork& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      a(i, j) = g.edge(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) ? 1.0 : 0.0;
  return a;
}

}  // namespace

std::vector<double> subgraph_centrality(const BinaryNetwork& g) {
  const std::size_t n = g.size();
  if (n == 0) return {};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(g));
  if (es.info() != Eigen::Success) throw Error("eigen_failure", "symmetric eigendecomposition did not converge");
  const Eigen::VectorXd w = es.eigenvalues().array().exp();
  const Eigen::MatrixXd v2 = es.eigenvectors().array().square();
  const Eigen::VectorXd sc = v2 * w;
  return {sc.data(), sc.data() + n};
}

double estrada_index(const BinaryNetwork& g) {
  const std::vector<double> sc = subgraph_centrality(g);
  double s = 0.0;
  for (double v : sc) s += v;
  return s;
}

EigenvectorCentrality eigenvector_centrality(const BinaryNetwork& g) {
  constexpr int kMaxIterations = 10000;
  constexpr double kTolerance = 1e-12;

  const std::size_t n = g.size();
  EigenvectorCentrality out;
  out.values.assign(n, 0.0);
  if (g.edge_count() == 0) {
    out.empty_network = true;
    return out;
  }

  // The +I shift separates lambda_max from -lambda_max on bipartite graphs,
  // where plain power iteration oscillates.
  std::vector<double> x(n, 1.0), next(n);
  for (int it = 1; it <= kMaxIterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = x[i];
      for (std::size_t j = 0; j < n; ++j)
        if (g.edge(i, j)) s += x[j];
      next[i] = s;
    }
    const double peak = *std::max_element(next.begin(), next.end());
    double diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] /= peak;
      diff = std::max(diff, std::abs(next[i] - x[i]));
    }
    x.swap(next);
    if (diff < kTolerance) {
      out.values = x;
      out.eigenvalue = peak - 1.0;
      out.iterations = it;
      return out;
    }
  }
  throw Error("eigen_nonconvergence", "eigenvector centrality did not converge within the iteration cap");
}

double connectivity_density(const BinaryNetwork& g) {
  const std::size_t n = g.size();
  if (n < 2) return 0.0;
  const double possible = static_cast<double>(n * (n - 1) / 2);
  return static_cast<double>(g.edge_count()) / possible;
}

NodeMeasures node_measures(const BinaryNetwork& g) {
  return {clustering_coefficients(g), subgraph_centrality(g), eigenvector_centrality(g).values};
}

}  // namespace cpte
