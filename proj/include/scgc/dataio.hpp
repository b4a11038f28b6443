#pragma once

#include "scgc/graph.hpp"
#include "scgc/matrix.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace scgc {

/// A dataset directory holds:
///   features.tsv  first line "n<TAB>d", then n rows of d tab-separated values
///   edges.txt     optional edge list ("i j" per line, '#' comments)
///   labels.txt    optional, one integer label per line
///   meta.json     optional {"name": ..., "class_count": ...}
struct Dataset {
    std::string name;
    Matrix features;
    SparseGraph graph;
    std::optional<std::vector<int>> labels;
    std::size_t class_count = 0;

    /// Checks label range and graph/feature row agreement.
    void validate() const;

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

inline constexpr const char* kFeaturesFile = "features.tsv";
inline constexpr const char* kEdgesFile = "edges.txt";
inline constexpr const char* kLabelsFile = "labels.txt";
inline constexpr const char* kMetaFile = "meta.json";

/// Loads a dataset directory. The graph comes from edges.txt, or from a
/// k-nearest-neighbor graph when knn_k is given and no edge file exists.
/// Supplying both, or neither, is an error.
Dataset load_dataset(const std::filesystem::path& dir, std::optional<std::size_t> knn_k = std::nullopt);
void save_dataset(const std::filesystem::path& dir, const Dataset& dataset);

/// Features and labels only; the structure files are never opened.
struct NodeData {
    std::string name;
    Matrix features;
    std::optional<std::vector<int>> labels;
    std::size_t class_count = 0;
};

NodeData load_node_data(const std::filesystem::path& dir);

Matrix read_matrix_tsv(std::istream& in);
/// Header-free TSV of the rows, values printed with round-trip precision.
void write_rows_tsv(std::ostream& out, const Matrix& m);
void write_matrix_tsv(std::ostream& out, const Matrix& m);
std::vector<int> read_labels(std::istream& in);

}  // namespace scgc
