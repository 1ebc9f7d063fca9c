#pragma once

#include <Eigen/Core>
#include <numeric>
#include <vector>

#include "stot/block_measure.hpp"
#include "stot/cost.hpp"
#include "stot/markov.hpp"
#include "stot/rng.hpp"
#include "stot/transport_plan.hpp"

namespace test_support {

using namespace stot;

inline Alphabet binary() { return Alphabet({"0", "1"}); }

inline Alphabet letters(int n) {
  std::vector<std::string> tokens;
  for (int i = 0; i < n; ++i) tokens.push_back(std::string(1, static_cast<char>('a' + i)));
  return Alphabet(std::move(tokens));
}

inline Block block_of(std::initializer_list<SymbolId> ids, int width = 1) {
  return encode_block(std::vector<SymbolId>(ids), width);
}

// Random measure on k-blocks of an alphabet with the given support size.
inline BlockMeasure random_measure(Rng& rng, const Alphabet& alphabet, int k,
                                   std::size_t support) {
  const std::size_t space = static_cast<std::size_t>(std::pow(alphabet.size(), k));
  std::vector<std::size_t> codes(space);
  std::iota(codes.begin(), codes.end(), 0);
  for (std::size_t i = 0; i < codes.size(); ++i) {
    std::swap(codes[i], codes[i + rng.next_index(codes.size() - i)]);
  }
  support = std::min(support, space);
  std::vector<BlockMeasure::Atom> atoms;
  double total = 0.0;
  for (std::size_t s = 0; s < support; ++s) {
    std::vector<SymbolId> ids(static_cast<std::size_t>(k));
    std::size_t code = codes[s];
    for (int i = k - 1; i >= 0; --i) {
      ids[static_cast<std::size_t>(i)] = static_cast<SymbolId>(code % alphabet.size());
      code /= alphabet.size();
    }
    const double mass = 0.05 + rng.next_double();
    total += mass;
    atoms.push_back({encode_block(ids, alphabet.encoded_width()), mass});
  }
  double run = 0.0;
  for (std::size_t i = 0; i + 1 < atoms.size(); ++i) {
    atoms[i].mass /= total;
    run += atoms[i].mass;
  }
  atoms.back().mass = 1.0 - run;
  return BlockMeasure(alphabet, k, std::move(atoms));
}

inline Eigen::MatrixXd random_cost_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols,
                                          double scale = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = scale * rng.next_double();
  }
  return m;
}

// Dense cost oracle over two supports given an arbitrary matrix.
inline BlockCost matrix_oracle(const BlockMeasure& a, const BlockMeasure& b,
                               Eigen::MatrixXd costs) {
  return [&a, &b, costs = std::move(costs)](const Block& x, const Block& y) {
    return costs(static_cast<Eigen::Index>(a.find(x)), static_cast<Eigen::Index>(b.find(y)));
  };
}

// Minimum over all permutation couplings; exact for uniform marginals.
inline double permutation_oracle(const Eigen::MatrixXd& costs) {
  const Eigen::Index n = costs.rows();
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) total += costs(i, perm[static_cast<std::size_t>(i)]);
    best = std::min(best, total / static_cast<double>(n));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Exact transportation value by enumerating the basic feasible solutions
// (spanning trees of the complete bipartite support graph).
inline double vertex_enumeration_oracle(const std::vector<double>& a,
                                        const std::vector<double>& b,
                                        const Eigen::MatrixXd& costs) {
  const int m = static_cast<int>(a.size());
  const int n = static_cast<int>(b.size());
  const int edges = m * n;
  const int basis_size = m + n - 1;
  double best = std::numeric_limits<double>::infinity();

  std::vector<int> pick(static_cast<std::size_t>(basis_size));
  std::iota(pick.begin(), pick.end(), 0);
  auto advance = [&]() {
    int i = basis_size - 1;
    while (i >= 0 && pick[static_cast<std::size_t>(i)] == edges - basis_size + i) --i;
    if (i < 0) return false;
    ++pick[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < basis_size; ++j) {
      pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
    }
    return true;
  };

  std::vector<std::vector<std::pair<int, int>>> adjacency;  // node -> (other, edge)
  do {
    adjacency.assign(static_cast<std::size_t>(m + n), {});
    for (int e : pick) {
      const int r = e / n;
      const int c = m + e % n;
      adjacency[static_cast<std::size_t>(r)].push_back({c, e});
      adjacency[static_cast<std::size_t>(c)].push_back({r, e});
    }
    // Leaf elimination solves the tree flows; failure means a cycle or a
    // disconnected pick.
    std::vector<double> net(static_cast<std::size_t>(m + n));
    for (int i = 0; i < m; ++i) net[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i)];
    for (int j = 0; j < n; ++j) net[static_cast<std::size_t>(m + j)] = -b[static_cast<std::size_t>(j)];
    std::vector<int> degree(static_cast<std::size_t>(m + n), 0);
    for (int v = 0; v < m + n; ++v) degree[static_cast<std::size_t>(v)] = static_cast<int>(adjacency[static_cast<std::size_t>(v)].size());
    std::vector<bool> removed_node(static_cast<std::size_t>(m + n), false);
    std::vector<bool> removed_edge(static_cast<std::size_t>(edges), false);
    std::vector<double> flow(static_cast<std::size_t>(edges), 0.0);
    std::vector<int> leaves;
    for (int v = 0; v < m + n; ++v) {
      if (degree[static_cast<std::size_t>(v)] == 1) leaves.push_back(v);
    }
    int eliminated = 0;
    bool ok = true;
    while (!leaves.empty()) {
      const int v = leaves.back();
      leaves.pop_back();
      if (removed_node[static_cast<std::size_t>(v)]) continue;
      int edge = -1, other = -1;
      for (auto [o, e] : adjacency[static_cast<std::size_t>(v)]) {
        if (!removed_edge[static_cast<std::size_t>(e)] && !removed_node[static_cast<std::size_t>(o)]) {
          edge = e;
          other = o;
          break;
        }
      }
      if (edge < 0) break;
      // Flow on the leaf edge equals the leaf's net supply, signed from the
      // row side.
      const double x = v < m ? net[static_cast<std::size_t>(v)] : -net[static_cast<std::size_t>(v)];
      flow[static_cast<std::size_t>(edge)] = x;
      if (x < -1e-12) ok = false;
      net[static_cast<std::size_t>(other)] += net[static_cast<std::size_t>(v)];
      removed_node[static_cast<std::size_t>(v)] = true;
      removed_edge[static_cast<std::size_t>(edge)] = true;
      ++eliminated;
      if (--degree[static_cast<std::size_t>(other)] == 1) leaves.push_back(other);
    }
    if (!ok || eliminated != basis_size) continue;  // infeasible or not a tree
    double total = 0.0;
    for (int e = 0; e < edges; ++e) {
      total += flow[static_cast<std::size_t>(e)] * costs(e / n, e % n);
    }
    best = std::min(best, total);
  } while (advance());
  return best;
}

inline MarkovModel symmetric_chain(double q) {
  Eigen::MatrixXd p(2, 2);
  p << 1 - q, q, q, 1 - q;
  return MarkovModel(binary(), std::move(p));
}

inline MarkovModel bernoulli(double p1) {
  Eigen::VectorXd p(2);
  p << 1 - p1, p1;
  return MarkovModel::iid(binary(), std::move(p));
}

inline MarkovModel alternating_chain() {
  Eigen::MatrixXd p(2, 2);
  p << 0, 1, 1, 0;
  return MarkovModel(binary(), std::move(p));
}

}  // namespace test_support
