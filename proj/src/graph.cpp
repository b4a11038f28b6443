#include "scgc/graph.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace scgc {

namespace {

std::atomic<std::size_t> g_influence_computations{0};

void check_influence_input(const Matrix& a_hat, std::size_t hops, const char* op) {
    if (hops == 0) throw std::invalid_argument(std::string(op) + ": hop count must be >= 1");
    if (a_hat.rows() != a_hat.cols()) {
        throw std::invalid_argument(std::string(op) + ": normalized adjacency must be square, got " +
                                    a_hat.shape_string());
    }
    if (!is_symmetric(a_hat, 1e-12)) {
        throw std::invalid_argument(std::string(op) + ": normalized adjacency must be symmetric");
    }
}

}  // namespace

bool SparseGraph::add_edge(std::size_t i, std::size_t j) {
    if (i >= n_ || j >= n_) {
        throw std::out_of_range("SparseGraph::add_edge: edge (" + std::to_string(i) + ", " +
                                std::to_string(j) + ") out of range for " + std::to_string(n_) + " nodes");
    }
    if (i == j) return false;
    auto& ni = adjacency_[i];
    auto pos = std::lower_bound(ni.begin(), ni.end(), j);
    if (pos != ni.end() && *pos == j) return false;
    ni.insert(pos, j);
    auto& nj = adjacency_[j];
    nj.insert(std::lower_bound(nj.begin(), nj.end(), i), i);
    ++edge_count_;
    return true;
}

bool SparseGraph::has_edge(std::size_t i, std::size_t j) const {
    if (i >= n_ || j >= n_) return false;
    return std::binary_search(adjacency_[i].begin(), adjacency_[i].end(), j);
}

std::vector<std::pair<std::size_t, std::size_t>> SparseGraph::edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(edge_count_);
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j : adjacency_[i])
            if (i < j) out.emplace_back(i, j);
    return out;
}

const char* to_string(InfluenceMode mode) {
    return mode == InfluenceMode::Cumulative ? "cumulative" : "single-power";
}

Matrix normalize_adjacency(const SparseGraph& g) {
    const std::size_t n = g.node_count();
    std::vector<double> inv_sqrt_degree(n);
    for (std::size_t i = 0; i < n; ++i)
        inv_sqrt_degree[i] = 1.0 / std::sqrt(static_cast<double>(g.degree(i) + 1));

    Matrix a_hat(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        a_hat(i, i) = inv_sqrt_degree[i] * inv_sqrt_degree[i];
        for (std::size_t j : g.neighbors(i)) a_hat(i, j) = inv_sqrt_degree[i] * inv_sqrt_degree[j];
    }
    return a_hat;
}

InfluenceMatrix cumulative_influence(const Matrix& a_hat, std::size_t hops) {
    check_influence_input(a_hat, hops, "cumulative_influence");
    Matrix power = a_hat;
    Matrix total = a_hat;
    for (std::size_t r = 2; r <= hops; ++r) {
        power = matmul(power, a_hat);
        add_in_place(total, power);
    }
    ++g_influence_computations;
    return {std::move(total), hops, InfluenceMode::Cumulative};
}

InfluenceMatrix single_power_influence(const Matrix& a_hat, std::size_t hops) {
    check_influence_input(a_hat, hops, "single_power_influence");
    Matrix power = a_hat;
    for (std::size_t r = 2; r <= hops; ++r) power = matmul(power, a_hat);
    ++g_influence_computations;
    return {std::move(power), hops, InfluenceMode::SinglePower};
}

std::size_t influence_computation_count() {
    return g_influence_computations.load();
}

SparseGraph build_knn_graph(const Matrix& features, std::size_t k) {
    const std::size_t n = features.rows();
    if (k == 0) throw std::invalid_argument("build_knn_graph: k must be >= 1");
    if (k >= n) {
        throw std::invalid_argument("build_knn_graph: k = " + std::to_string(k) + " must be below node count " +
                                    std::to_string(n));
    }
    if (!all_finite(features)) throw std::invalid_argument("build_knn_graph: non-finite features");

    SparseGraph g(n);
    std::vector<std::pair<double, std::size_t>> candidates;
    candidates.reserve(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        candidates.clear();
        auto xi = features.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            auto xj = features.row(j);
            double d2 = 0.0;
            for (std::size_t c = 0; c < xi.size(); ++c) {
                const double diff = xi[c] - xj[c];
                d2 += diff * diff;
            }
            candidates.emplace_back(d2, j);
        }
        // pair ordering breaks distance ties by index
        std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k),
                          candidates.end());
        for (std::size_t m = 0; m < k; ++m) g.add_edge(i, candidates[m].second);
    }
    return g;
}

SbmSample sbm_generate(const SbmParams& params, Rng& rng) {
    const auto& blocks = params.block_sizes;
    if (blocks.empty()) throw std::invalid_argument("sbm_generate: no blocks given");
    for (std::size_t b : blocks)
        if (b == 0) throw std::invalid_argument("sbm_generate: empty block");
    if (!(params.p_out >= 0.0 && params.p_out < params.p_in && params.p_in <= 1.0)) {
        throw std::invalid_argument("sbm_generate: require 0 <= p_out < p_in <= 1");
    }
    if (params.feature_dim < blocks.size()) {
        throw std::invalid_argument("sbm_generate: feature_dim must be >= number of blocks");
    }
    if (!(params.noise_sigma >= 0.0)) throw std::invalid_argument("sbm_generate: noise_sigma must be >= 0");

    SbmSample out;
    for (std::size_t b = 0; b < blocks.size(); ++b)
        out.labels.insert(out.labels.end(), blocks[b], static_cast<int>(b));
    const std::size_t n = out.labels.size();

    out.graph = SparseGraph(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double p = out.labels[i] == out.labels[j] ? params.p_in : params.p_out;
            if (rng.uniform() < p) out.graph.add_edge(i, j);
        }
    }

    out.features = Matrix(n, params.feature_dim);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = out.features.row(i);
        for (double& v : row) v = params.noise_sigma > 0.0 ? params.noise_sigma * rng.normal() : 0.0;
        row[static_cast<std::size_t>(out.labels[i])] += 1.0;
    }
    return out;
}

SparseGraph read_edge_list(std::istream& in, std::size_t node_count) {
    SparseGraph g(node_count);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        long long i = 0, j = 0;
        if (!(fields >> i)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            throw std::runtime_error("edge list line " + std::to_string(line_no) + ": expected two indices");
        }
        std::string rest;
        if (!(fields >> j) || (fields >> rest)) {
            throw std::runtime_error("edge list line " + std::to_string(line_no) + ": expected two indices");
        }
        if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= node_count ||
            static_cast<std::size_t>(j) >= node_count) {
            throw std::runtime_error("edge list line " + std::to_string(line_no) + ": index out of range for " +
                                     std::to_string(node_count) + " nodes");
        }
        g.add_edge(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
    return g;
}

void write_edge_list(std::ostream& out, const SparseGraph& g) {
    out << "# " << g.node_count() << " nodes, " << g.edge_count() << " undirected edges\n";
    for (const auto& [i, j] : g.edges()) out << i << ' ' << j << '\n';
}

}  // namespace scgc
