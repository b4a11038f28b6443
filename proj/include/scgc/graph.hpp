#pragma once

#include "scgc/matrix.hpp"
#include "scgc/rng.hpp"

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace scgc {

/// Undirected simple graph. Edges are stored once as (i, j) with i < j;
/// symmetry is structural. No self-loops.
class SparseGraph {
public:
    SparseGraph() = default;
    explicit SparseGraph(std::size_t n) : n_(n), adjacency_(n) {}

    std::size_t node_count() const { return n_; }
    std::size_t edge_count() const { return edge_count_; }

    /// Adds the undirected edge {i, j}. Returns false for self-loops and
    /// duplicates (which are ignored). Throws on out-of-range indices.
    bool add_edge(std::size_t i, std::size_t j);
    bool has_edge(std::size_t i, std::size_t j) const;

    /// Sorted neighbor list of node i.
    const std::vector<std::size_t>& neighbors(std::size_t i) const { return adjacency_.at(i); }
    std::size_t degree(std::size_t i) const { return adjacency_.at(i).size(); }

    /// Edge list with i < j, sorted lexicographically.
    std::vector<std::pair<std::size_t, std::size_t>> edges() const;

    friend bool operator==(const SparseGraph&, const SparseGraph&) = default;

private:
    std::size_t n_ = 0;
    std::size_t edge_count_ = 0;
    std::vector<std::vector<std::size_t>> adjacency_;
};

enum class InfluenceMode { Cumulative, SinglePower };

const char* to_string(InfluenceMode mode);

/// Dense influence weights between every pair of nodes.
struct InfluenceMatrix {
    Matrix gamma;
    std::size_t hops = 0;
    InfluenceMode mode = InfluenceMode::Cumulative;

    std::size_t node_count() const { return gamma.rows(); }
};

/// D^{-1/2} (A + I) D^{-1/2}, with D the degree matrix of A + I.
Matrix normalize_adjacency(const SparseGraph& g);

/// Sum of the first `hops` powers of a_hat.
InfluenceMatrix cumulative_influence(const Matrix& a_hat, std::size_t hops);

/// The single power a_hat^hops.
InfluenceMatrix single_power_influence(const Matrix& a_hat, std::size_t hops);

/// Number of influence matrices computed by this process so far.
std::size_t influence_computation_count();

/// Union-symmetrized k-nearest-neighbor graph over Euclidean distance.
/// Distance ties resolve toward the lower node index.
SparseGraph build_knn_graph(const Matrix& features, std::size_t k);

struct SbmSample {
    SparseGraph graph;
    Matrix features;
    std::vector<int> labels;
};

struct SbmParams {
    std::vector<std::size_t> block_sizes;
    double p_in = 0.1;
    double p_out = 0.01;
    std::size_t feature_dim = 16;
    double noise_sigma = 0.5;
};

/// Stochastic block model graph with one-hot-plus-noise node features.
SbmSample sbm_generate(const SbmParams& params, Rng& rng);

/// Reads "i j" pairs, one per line; '#' starts a comment. Throws with the
/// offending line number on malformed or out-of-range entries.
SparseGraph read_edge_list(std::istream& in, std::size_t node_count);
void write_edge_list(std::ostream& out, const SparseGraph& g);

}  // namespace scgc
