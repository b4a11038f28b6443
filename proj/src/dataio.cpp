#include "scgc/dataio.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace scgc {

namespace fs = std::filesystem;

namespace {

std::ifstream open_input(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return in;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

void append_double(std::string& buf, double v) {
    char tmp[32];
    auto res = std::to_chars(tmp, tmp + sizeof(tmp), v);
    buf.append(tmp, res.ptr);
}

}  // namespace

void Dataset::validate() const {
    if (graph.node_count() != features.rows()) {
        throw std::invalid_argument("dataset '" + name + "': graph has " + std::to_string(graph.node_count()) +
                                    " nodes but features have " + std::to_string(features.rows()) + " rows");
    }
    if (labels) {
        if (labels->size() != features.rows()) {
            throw std::invalid_argument("dataset '" + name + "': label count does not match feature rows");
        }
        for (int l : *labels)
            if (l < 0 || static_cast<std::size_t>(l) >= class_count)
                throw std::invalid_argument("dataset '" + name + "': label " + std::to_string(l) +
                                            " outside [0, " + std::to_string(class_count) + ")");
    }
}

Matrix read_matrix_tsv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("features: missing 'n d' header");
    std::istringstream header(line);
    std::size_t n = 0, d = 0;
    if (!(header >> n >> d)) throw std::runtime_error("features line 1: expected 'n d' header");

    Matrix m(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::getline(in, line)) {
            throw std::runtime_error("features: expected " + std::to_string(n) + " rows, found " + std::to_string(i));
        }
        const char* p = line.data();
        const char* end = line.data() + line.size();
        for (std::size_t c = 0; c < d; ++c) {
            while (p < end && (*p == ' ' || *p == '\t')) ++p;
            auto res = std::from_chars(p, end, m(i, c));
            if (res.ec != std::errc{}) {
                throw std::runtime_error("features line " + std::to_string(i + 2) + ": expected " +
                                         std::to_string(d) + " numeric columns");
            }
            p = res.ptr;
        }
        while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
        if (p != end) throw std::runtime_error("features line " + std::to_string(i + 2) + ": too many columns");
    }
    return m;
}

void write_rows_tsv(std::ostream& out, const Matrix& m) {
    std::string buf;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        buf.clear();
        auto row = m.row(i);
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) buf.push_back('\t');
            append_double(buf, row[c]);
        }
        buf.push_back('\n');
        out << buf;
    }
}

void write_matrix_tsv(std::ostream& out, const Matrix& m) {
    out << m.rows() << '\t' << m.cols() << '\n';
    write_rows_tsv(out, m);
}

std::vector<int> read_labels(std::istream& in) {
    std::vector<int> labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream fields(line);
        int v = 0;
        std::string rest;
        if (!(fields >> v) || (fields >> rest) || v < 0) {
            throw std::runtime_error("labels line " + std::to_string(line_no) + ": expected a non-negative integer");
        }
        labels.push_back(v);
    }
    return labels;
}

NodeData load_node_data(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw std::runtime_error("dataset directory not found: " + dir.string());
    const fs::path features_path = dir / kFeaturesFile;
    const fs::path labels_path = dir / kLabelsFile;
    const fs::path meta_path = dir / kMetaFile;
    if (!fs::exists(features_path)) throw std::runtime_error("missing " + features_path.string());

    NodeData data;
    data.name = dir.filename().string();
    if (data.name.empty()) data.name = dir.parent_path().filename().string();
    {
        auto in = open_input(features_path);
        data.features = read_matrix_tsv(in);
    }
    if (fs::exists(labels_path)) {
        auto in = open_input(labels_path);
        data.labels = read_labels(in);
        if (data.labels->size() != data.features.rows()) {
            throw std::runtime_error(labels_path.string() + ": " + std::to_string(data.labels->size()) +
                                     " labels for " + std::to_string(data.features.rows()) + " feature rows");
        }
        int top = -1;
        for (int l : *data.labels) top = std::max(top, l);
        data.class_count = static_cast<std::size_t>(top + 1);
    }
    if (fs::exists(meta_path)) {
        auto in = open_input(meta_path);
        const auto meta = nlohmann::json::parse(in);
        data.name = meta.value("name", data.name);
        if (meta.contains("class_count")) data.class_count = meta.at("class_count").get<std::size_t>();
    }
    return data;
}

Dataset load_dataset(const fs::path& dir, std::optional<std::size_t> knn_k) {
    const bool has_edges = fs::exists(dir / kEdgesFile);
    if (has_edges && knn_k) {
        throw std::invalid_argument("dataset " + dir.string() +
                                    " has an edge file and a KNN k was given; choose one structure source");
    }
    if (fs::is_directory(dir) && !has_edges && !knn_k) {
        throw std::invalid_argument("dataset " + dir.string() + " has no edge file; pass a KNN k to build one");
    }

    auto data = load_node_data(dir);
    Dataset ds;
    ds.name = std::move(data.name);
    ds.features = std::move(data.features);
    ds.labels = std::move(data.labels);
    ds.class_count = data.class_count;
    if (has_edges) {
        auto in = open_input(dir / kEdgesFile);
        ds.graph = read_edge_list(in, ds.features.rows());
    } else {
        ds.graph = build_knn_graph(ds.features, *knn_k);
    }
    ds.validate();
    return ds;
}

void save_dataset(const fs::path& dir, const Dataset& ds) {
    ds.validate();
    fs::create_directories(dir);
    {
        auto out = open_output(dir / kFeaturesFile);
        write_matrix_tsv(out, ds.features);
    }
    {
        auto out = open_output(dir / kEdgesFile);
        write_edge_list(out, ds.graph);
    }
    if (ds.labels) {
        auto out = open_output(dir / kLabelsFile);
        for (int l : *ds.labels) out << l << '\n';
    }
    auto out = open_output(dir / kMetaFile);
    out << nlohmann::json{{"name", ds.name}, {"class_count", ds.class_count}}.dump(2) << '\n';
}

}  // namespace scgc
