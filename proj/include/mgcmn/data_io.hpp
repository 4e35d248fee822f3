#pragma once

#include "mgcmn/dataset.hpp"
#include "mgcmn/dense_matrix.hpp"
#include "mgcmn/graph.hpp"
#include "mgcmn/neural.hpp"
#include "mgcmn/pickle.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace mgcmn {

/// Missing files, malformed contents, or statistics that fail validation.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct LoadedDataset {
    Dataset dataset;
    Splits splits;
};

namespace detail {

inline std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return in;
}

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_whitespace(std::string_view line) {
    std::vector<std::string> out;
    std::istringstream in{std::string(line)};
    for (std::string tok; in >> tok;) out.push_back(std::move(tok));
    return out;
}

inline std::vector<std::string> split_csv(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

inline double parse_double(const std::string& tok, const std::string& where) {
    try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size() || !std::isfinite(v)) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw DataError(where + ": '" + tok + "' is not a finite number");
    }
}

inline std::optional<long long> parse_integer(std::string_view tok) {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) return std::nullopt;
    return v;
}

/// Skips blank lines and '#' comments; calls fn(line_number, trimmed_line).
template <typename Fn>
void for_each_record(const std::filesystem::path& path, Fn&& fn) {
    auto in = open_input(path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        fn(line_no, t);
    }
}

/// Dense indices for arbitrary string IDs, in order of first appearance.
class IdMap {
public:
    NodeId intern(const std::string& id) {
        auto [it, inserted] = index_.try_emplace(id, ids_.size());
        if (inserted) ids_.push_back(id);
        return it->second;
    }
    std::optional<NodeId> find(const std::string& id) const {
        auto it = index_.find(id);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }
    std::size_t size() const { return ids_.size(); }
    const std::vector<std::string>& ids() const { return ids_; }

private:
    std::unordered_map<std::string, NodeId> index_;
    std::vector<std::string> ids_;
};

/// Class names ordered numerically when all are integers, otherwise lexically.
inline std::vector<std::string> order_class_names(std::vector<std::string> names) {
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    const bool numeric = std::all_of(names.begin(), names.end(), [](const std::string& s) { return parse_integer(s).has_value(); });
    if (numeric)
        std::sort(names.begin(), names.end(), [](const std::string& a, const std::string& b) { return *parse_integer(a) < *parse_integer(b); });
    return names;
}

inline void add_cleanup_warnings(Dataset& ds) {
    const auto& c = ds.graph.cleanup();
    if (c.duplicates_dropped)
        ds.warnings.push_back("dropped " + std::to_string(c.duplicates_dropped) + " duplicate edge(s)");
    if (c.self_loops_dropped)
        ds.warnings.push_back("dropped " + std::to_string(c.self_loops_dropped) + " self-loop(s)");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Generic text format (see docs/generic_format.md)

struct GenericOptions {
    bool normalize_features = false;
};

/// Edge list "u v" per line, features "id,f1,...,fT", labels "id,label".
/// IDs are arbitrary tokens mapped to contiguous indices in order of first
/// appearance (edges, then features, then labels). Nodes that appear only in
/// the label or feature file become isolated nodes. An empty feature path
/// gives every node the single constant feature 1.
inline Dataset load_generic(const std::filesystem::path& edge_file, const std::filesystem::path& feature_file,
                            const std::filesystem::path& label_file, const GenericOptions& opt = {},
                            std::string name = "generic") {
    Dataset ds;
    ds.name = std::move(name);
    detail::IdMap ids;
    std::vector<Edge> edges;

    detail::for_each_record(edge_file, [&](std::size_t line_no, std::string_view line) {
        const auto tok = detail::split_whitespace(line);
        if (tok.size() != 2)
            throw DataError(edge_file.string() + ":" + std::to_string(line_no) + ": expected 'u v', got " +
                            std::to_string(tok.size()) + " field(s)");
        const NodeId u = ids.intern(tok[0]);
        const NodeId v = ids.intern(tok[1]);
        edges.emplace_back(u, v);
    });
    ds.raw_edge_records = edges.size();

    std::vector<std::pair<NodeId, std::vector<double>>> feature_rows;
    std::size_t feature_dim = 0;
    if (!feature_file.empty()) {
        detail::for_each_record(feature_file, [&](std::size_t line_no, std::string_view line) {
            const std::string where = feature_file.string() + ":" + std::to_string(line_no);
            const auto tok = detail::split_csv(line);
            if (tok.size() < 2) throw DataError(where + ": expected 'id,f1,...', got no feature values");
            if (feature_dim == 0) feature_dim = tok.size() - 1;
            if (tok.size() - 1 != feature_dim)
                throw DataError(where + ": expected " + std::to_string(feature_dim) + " feature values, got " +
                                std::to_string(tok.size() - 1));
            std::vector<double> row;
            row.reserve(feature_dim);
            for (std::size_t i = 1; i < tok.size(); ++i) row.push_back(detail::parse_double(tok[i], where));
            feature_rows.emplace_back(ids.intern(tok[0]), std::move(row));
        });
        if (feature_rows.empty()) throw DataError(feature_file.string() + ": no feature rows");
    }

    std::vector<std::pair<NodeId, std::string>> label_rows;
    detail::for_each_record(label_file, [&](std::size_t line_no, std::string_view line) {
        const auto tok = detail::split_csv(line);
        if (tok.size() != 2 || tok[1].empty())
            throw DataError(label_file.string() + ":" + std::to_string(line_no) + ": expected 'id,label'");
        label_rows.emplace_back(ids.intern(tok[0]), tok[1]);
    });

    const std::size_t n = ids.size();
    if (n == 0) throw DataError("generic dataset has no nodes");

    DenseMatrix features;
    if (feature_file.empty()) {
        features = DenseMatrix(n, 1);
        for (std::size_t v = 0; v < n; ++v) features(v, 0) = 1.0;
    } else {
        features = DenseMatrix(n, feature_dim);
        std::vector<char> seen(n, 0);
        for (auto& [v, row] : feature_rows) {
            if (seen[v]) throw DataError(feature_file.string() + ": node '" + ids.ids()[v] + "' listed twice");
            seen[v] = 1;
            std::copy(row.begin(), row.end(), features.row(v).begin());
        }
        const auto missing = static_cast<std::size_t>(std::count(seen.begin(), seen.end(), 0));
        if (missing) ds.warnings.push_back(std::to_string(missing) + " node(s) without features got zero rows");
        if (opt.normalize_features) features = row_normalize(std::move(features));
    }

    std::vector<std::string> names;
    for (auto& [v, label] : label_rows) names.push_back(label);
    ds.class_names = detail::order_class_names(std::move(names));
    std::map<std::string, int> class_index;
    for (std::size_t c = 0; c < ds.class_names.size(); ++c) class_index.emplace(ds.class_names[c], static_cast<int>(c));
    std::vector<int> labels(n, kUnlabeled);
    for (auto& [v, label] : label_rows) {
        const int cls = class_index.at(label);
        if (labels[v] != kUnlabeled && labels[v] != cls)
            throw DataError(label_file.string() + ": node '" + ids.ids()[v] + "' has conflicting labels");
        labels[v] = cls;
    }

    ds.graph = Graph(n, edges, std::move(features), std::move(labels), static_cast<int>(ds.class_names.size()));
    ds.node_ids = ids.ids();
    detail::add_cleanup_warnings(ds);
    return ds;
}

// ---------------------------------------------------------------------------
// Planetoid citation files (ind.<name>.{x,y,tx,ty,allx,ally,graph,test.index})

struct PlanetoidStats {
    std::size_t nodes, edges, features, classes;
};

/// Reference statistics for the three public citation datasets.
inline std::optional<PlanetoidStats> planetoid_reference(std::string_view name) {
    if (name == "cora") return PlanetoidStats{2708, 5429, 1433, 7};
    if (name == "citeseer") return PlanetoidStats{3327, 4732, 3703, 6};
    if (name == "pubmed") return PlanetoidStats{19717, 44338, 500, 3};
    return std::nullopt;
}

struct PlanetoidOptions {
    bool normalize_features = true;
    std::size_t validation_size = 500;
    /// Throw instead of warn when the edge count misses the reference by more
    /// than 1% under both counting conventions.
    bool strict_edge_check = false;
};

/// Result of comparing a loaded edge count with a reference value.
struct EdgeGate {
    std::size_t expected = 0;
    std::size_t raw_records = 0;   // adjacency-list entries / 2, before cleaning
    std::size_t unique_edges = 0;  // after symmetrization, deduplication, self-loop removal
    bool passed = true;

    static bool within(std::size_t got, std::size_t want) {
        return std::abs(static_cast<double>(got) - static_cast<double>(want)) <= 0.01 * static_cast<double>(want);
    }
};

inline EdgeGate check_edge_count(std::size_t expected, std::size_t raw_records, std::size_t unique_edges) {
    EdgeGate g{expected, raw_records, unique_edges, true};
    g.passed = EdgeGate::within(raw_records, expected) || EdgeGate::within(unique_edges, expected);
    return g;
}

namespace detail {

inline pickle::ValuePtr load_planetoid_object(const std::filesystem::path& dir, const std::string& name,
                                              const std::string& part) {
    const auto path = dir / ("ind." + name + "." + part);
    if (!std::filesystem::exists(path)) throw DataError("missing Planetoid file " + path.string());
    try {
        return pickle::load_file(path.string());
    } catch (const pickle::PickleError& e) {
        throw DataError(std::string("cannot decode ") + e.what());
    }
}

inline DenseMatrix planetoid_matrix(const pickle::ValuePtr& v, const std::string& what) {
    try {
        return pickle::as_dense_matrix(v);
    } catch (const pickle::PickleError& e) {
        throw DataError("ind." + what + ": " + e.what());
    }
}

inline DenseMatrix stack_rows(const DenseMatrix& a, const DenseMatrix& b) {
    DenseMatrix out(a.rows() + b.rows(), a.cols());
    std::copy(a.values().begin(), a.values().end(), out.values().begin());
    std::copy(b.values().begin(), b.values().end(), out.values().begin() + static_cast<std::ptrdiff_t>(a.size()));
    return out;
}

}  // namespace detail

/// Reads the standard Planetoid file set and reproduces the reference
/// preprocessing: test rows are moved to the positions listed in
/// ind.<name>.test.index; when those positions leave gaps (Citeseer), the
/// missing nodes get zero features and no label. The public split is the
/// first |y| nodes for training, the next `validation_size` for validation,
/// and the sorted test indices for testing.
inline LoadedDataset load_planetoid(const std::filesystem::path& dir, const std::string& name,
                                    const PlanetoidOptions& opt = {}) {
    const std::string tag = name + ".";
    const DenseMatrix x = detail::planetoid_matrix(detail::load_planetoid_object(dir, name, "x"), tag + "x");
    const DenseMatrix y = detail::planetoid_matrix(detail::load_planetoid_object(dir, name, "y"), tag + "y");
    const DenseMatrix tx = detail::planetoid_matrix(detail::load_planetoid_object(dir, name, "tx"), tag + "tx");
    const DenseMatrix ty = detail::planetoid_matrix(detail::load_planetoid_object(dir, name, "ty"), tag + "ty");
    const DenseMatrix allx = detail::planetoid_matrix(detail::load_planetoid_object(dir, name, "allx"), tag + "allx");
    const DenseMatrix ally = detail::planetoid_matrix(detail::load_planetoid_object(dir, name, "ally"), tag + "ally");
    const auto graph_obj = detail::load_planetoid_object(dir, name, "graph");

    std::vector<NodeId> test_reorder;
    const auto index_path = dir / ("ind." + name + ".test.index");
    detail::for_each_record(index_path, [&](std::size_t line_no, std::string_view line) {
        const auto v = detail::parse_integer(line);
        if (!v || *v < 0) throw DataError(index_path.string() + ":" + std::to_string(line_no) + ": bad node index");
        test_reorder.push_back(static_cast<NodeId>(*v));
    });
    if (test_reorder.empty()) throw DataError(index_path.string() + ": no test indices");

    auto shape_error = [&](const std::string& what) { return DataError("Planetoid '" + name + "': " + what); };
    if (x.rows() != y.rows()) throw shape_error("x and y row counts differ");
    if (allx.rows() != ally.rows()) throw shape_error("allx and ally row counts differ");
    if (tx.rows() != ty.rows()) throw shape_error("tx and ty row counts differ");
    if (tx.rows() != test_reorder.size()) throw shape_error("tx rows differ from the number of test indices");
    if (x.cols() != allx.cols() || tx.cols() != allx.cols()) throw shape_error("feature widths differ");
    if (y.cols() != ally.cols() || ty.cols() != ally.cols()) throw shape_error("label widths differ");
    if (ally.cols() < 2) throw shape_error("fewer than two classes");

    std::vector<NodeId> test_sorted = test_reorder;
    std::sort(test_sorted.begin(), test_sorted.end());
    if (std::adjacent_find(test_sorted.begin(), test_sorted.end()) != test_sorted.end())
        throw shape_error("duplicate test index");
    const NodeId lo = test_sorted.front(), hi = test_sorted.back();

    // Pad the test block to a contiguous index range when it has gaps.
    DenseMatrix tx_ext = tx, ty_ext = ty;
    const std::size_t span_len = hi - lo + 1;
    if (span_len != test_sorted.size()) {
        tx_ext = DenseMatrix(span_len, tx.cols());
        ty_ext = DenseMatrix(span_len, ty.cols());
        for (std::size_t i = 0; i < test_sorted.size(); ++i) {
            std::copy(tx.row(i).begin(), tx.row(i).end(), tx_ext.row(test_sorted[i] - lo).begin());
            std::copy(ty.row(i).begin(), ty.row(i).end(), ty_ext.row(test_sorted[i] - lo).begin());
        }
    }
    const DenseMatrix stacked_x = detail::stack_rows(allx, tx_ext);
    const DenseMatrix stacked_y = detail::stack_rows(ally, ty_ext);
    const std::size_t n = stacked_x.rows();
    if (hi >= n) throw shape_error("test index " + std::to_string(hi) + " beyond node count " + std::to_string(n));

    DenseMatrix features = stacked_x;
    DenseMatrix onehot = stacked_y;
    for (std::size_t i = 0; i < test_reorder.size(); ++i) {
        const auto src_x = stacked_x.row(test_sorted[i]);
        std::copy(src_x.begin(), src_x.end(), features.row(test_reorder[i]).begin());
        const auto src_y = stacked_y.row(test_sorted[i]);
        std::copy(src_y.begin(), src_y.end(), onehot.row(test_reorder[i]).begin());
    }

    std::vector<int> labels(n, kUnlabeled);
    std::size_t unlabeled = 0;
    for (std::size_t v = 0; v < n; ++v) {
        const auto r = onehot.row(v);
        const auto best = std::max_element(r.begin(), r.end());
        if (*best > 0.0) labels[v] = static_cast<int>(best - r.begin());
        else ++unlabeled;
    }

    std::vector<Edge> edges;
    std::size_t list_entries = 0;
    try {
        for (const auto& [node, nbrs] : pickle::as_adjacency_lists(graph_obj)) {
            for (auto u : nbrs) {
                if (node < 0 || u < 0 || static_cast<std::size_t>(node) >= n || static_cast<std::size_t>(u) >= n)
                    throw shape_error("graph references node outside [0," + std::to_string(n) + ")");
                edges.emplace_back(static_cast<NodeId>(node), static_cast<NodeId>(u));
                ++list_entries;
            }
        }
    } catch (const pickle::PickleError& e) {
        throw DataError("ind." + name + ".graph: " + e.what());
    }

    if (opt.normalize_features) features = row_normalize(std::move(features));

    LoadedDataset out;
    Dataset& ds = out.dataset;
    ds.name = name;
    ds.graph = Graph(n, edges, std::move(features), std::move(labels), static_cast<int>(ally.cols()));
    ds.raw_edge_records = (list_entries + 1) / 2;
    for (std::size_t c = 0; c < ally.cols(); ++c) ds.class_names.push_back(std::to_string(c));
    if (unlabeled) ds.warnings.push_back(std::to_string(unlabeled) + " node(s) without a label (padding rows)");
    if (ds.graph.cleanup().self_loops_dropped)
        ds.warnings.push_back("dropped " + std::to_string(ds.graph.cleanup().self_loops_dropped) + " self-loop record(s)");

    if (const auto ref = planetoid_reference(name)) {
        if (n != ref->nodes) throw shape_error("expected " + std::to_string(ref->nodes) + " nodes, found " + std::to_string(n));
        if (ds.graph.feature_dim() != ref->features)
            throw shape_error("expected " + std::to_string(ref->features) + " features, found " +
                              std::to_string(ds.graph.feature_dim()));
        if (static_cast<std::size_t>(ds.graph.n_classes()) != ref->classes)
            throw shape_error("expected " + std::to_string(ref->classes) + " classes");
        const auto gate = check_edge_count(ref->edges, ds.raw_edge_records, ds.graph.n_edges());
        if (!gate.passed) {
            const std::string msg = "edge count outside 1% of " + std::to_string(ref->edges) + " (" +
                                    std::to_string(gate.raw_records) + " raw records, " +
                                    std::to_string(gate.unique_edges) + " unique edges)";
            if (opt.strict_edge_check) throw shape_error(msg);
            ds.warnings.push_back(msg);
        }
    }

    Splits& s = out.splits;
    const std::size_t n_train = y.rows();
    if (n_train + opt.validation_size > n) throw shape_error("not enough nodes for the validation range");
    auto keep_labeled = [&](NodeId v) { return ds.graph.labels()[v] != kUnlabeled; };
    for (NodeId v = 0; v < n_train; ++v)
        if (keep_labeled(v)) s.train.push_back(v);
    for (NodeId v = n_train; v < n_train + opt.validation_size; ++v)
        if (keep_labeled(v)) s.validation.push_back(v);
    for (NodeId v : test_sorted)
        if (keep_labeled(v)) s.test.push_back(v);
    s.validate(n);
    return out;
}

// ---------------------------------------------------------------------------
// Facebook ego networks (<id>.edges, .feat, .egofeat, .circles, .featnames)

enum class CircleRule { kLowestIndex, kLargestCircle };

inline std::string_view to_string(CircleRule r) { return r == CircleRule::kLowestIndex ? "lowest-index" : "largest"; }

inline CircleRule parse_circle_rule(std::string_view text) {
    if (text == "lowest-index") return CircleRule::kLowestIndex;
    if (text == "largest") return CircleRule::kLargestCircle;
    throw std::invalid_argument("unknown circle rule '" + std::string(text) + "' (expected lowest-index or largest)");
}

struct EgoOptions {
    CircleRule circle_rule = CircleRule::kLowestIndex;
    /// Add the ego node itself (features from .egofeat, linked to every alter).
    bool include_ego = false;
    /// Remove nodes that belong to no circle; otherwise keep them unlabeled.
    bool drop_unlabeled = true;
    bool normalize_features = false;
};

/// Loads one ego network. Nodes are the rows of <id>.feat; each node takes
/// the class of one of its circles (chosen by `circle_rule`). Nodes without
/// a circle or without features are removed, classes are renumbered to the
/// circles that still label some node, and node indices are compacted in
/// ascending order of original ID.
inline Dataset load_ego_facebook(const std::filesystem::path& dir, const std::string& ego_id, const EgoOptions& opt = {}) {
    const auto file = [&](const char* ext) {
        const auto p = dir / (ego_id + ext);
        if (!std::filesystem::exists(p)) throw DataError("missing ego-network file " + p.string());
        return p;
    };
    const auto feat_path = file(".feat");
    const auto edges_path = file(".edges");
    const auto circles_path = file(".circles");

    // Features: "<node> f1 ... fT".
    std::map<long long, std::vector<double>> feats;
    std::size_t dim = 0;
    detail::for_each_record(feat_path, [&](std::size_t line_no, std::string_view line) {
        const std::string where = feat_path.string() + ":" + std::to_string(line_no);
        const auto tok = detail::split_whitespace(line);
        if (tok.size() < 2) throw DataError(where + ": expected '<node> f1 ... fT'");
        if (dim == 0) dim = tok.size() - 1;
        if (tok.size() - 1 != dim) throw DataError(where + ": inconsistent feature width");
        const auto id = detail::parse_integer(tok[0]);
        if (!id) throw DataError(where + ": bad node id '" + tok[0] + "'");
        std::vector<double> row;
        row.reserve(dim);
        for (std::size_t i = 1; i < tok.size(); ++i) row.push_back(detail::parse_double(tok[i], where));
        feats[*id] = std::move(row);
    });

    const long long ego = detail::parse_integer(ego_id).value_or(-1);
    if (opt.include_ego) {
        const auto egofeat_path = file(".egofeat");
        std::vector<double> row;
        detail::for_each_record(egofeat_path, [&](std::size_t line_no, std::string_view line) {
            for (const auto& t : detail::split_whitespace(line))
                row.push_back(detail::parse_double(t, egofeat_path.string() + ":" + std::to_string(line_no)));
        });
        if (row.size() != dim) throw DataError(egofeat_path.string() + ": feature width differs from .feat");
        feats[ego] = std::move(row);
    }

    // Circles: "<name> n1 n2 ...".
    std::vector<std::string> circle_names;
    std::vector<std::vector<long long>> circle_members;
    detail::for_each_record(circles_path, [&](std::size_t line_no, std::string_view line) {
        auto tok = detail::split_whitespace(line);
        circle_names.push_back(tok[0]);
        std::vector<long long> members;
        for (std::size_t i = 1; i < tok.size(); ++i) {
            const auto id = detail::parse_integer(tok[i]);
            if (!id) throw DataError(circles_path.string() + ":" + std::to_string(line_no) + ": bad node id '" + tok[i] + "'");
            members.push_back(*id);
        }
        circle_members.push_back(std::move(members));
    });

    std::map<long long, std::size_t> circle_of;
    for (std::size_t c = 0; c < circle_members.size(); ++c)
        for (long long v : circle_members[c]) {
            auto [it, inserted] = circle_of.try_emplace(v, c);
            if (!inserted && opt.circle_rule == CircleRule::kLargestCircle &&
                circle_members[c].size() > circle_members[it->second].size())
                it->second = c;
        }

    std::vector<std::pair<long long, long long>> raw_edges;
    detail::for_each_record(edges_path, [&](std::size_t line_no, std::string_view line) {
        const auto tok = detail::split_whitespace(line);
        const auto a = tok.size() == 2 ? detail::parse_integer(tok[0]) : std::nullopt;
        const auto b = tok.size() == 2 ? detail::parse_integer(tok[1]) : std::nullopt;
        if (!a || !b) throw DataError(edges_path.string() + ":" + std::to_string(line_no) + ": expected '<u> <v>'");
        raw_edges.emplace_back(*a, *b);
    });

    Dataset ds;
    ds.name = "ego" + ego_id;
    ds.raw_edge_records = raw_edges.size();

    // Keep nodes with features (and a circle, unless told otherwise).
    std::map<long long, NodeId> index;
    std::size_t dropped_unlabeled = 0;
    for (const auto& [id, row] : feats) {
        if (opt.drop_unlabeled && !circle_of.count(id)) {
            ++dropped_unlabeled;
            continue;
        }
        index.emplace(id, index.size());
    }
    std::size_t edge_nodes_without_features = 0;
    {
        std::map<long long, bool> seen;
        for (auto [a, b] : raw_edges)
            for (long long v : {a, b})
                if (!feats.count(v) && seen.emplace(v, true).second) ++edge_nodes_without_features;
    }

    const std::size_t n = index.size();
    DenseMatrix features(n, dim);
    for (const auto& [id, v] : index) std::copy(feats[id].begin(), feats[id].end(), features.row(v).begin());
    if (opt.normalize_features) features = row_normalize(std::move(features));

    // Compact classes to the circles actually used, in circle-file order.
    std::vector<int> remap(circle_members.size(), -1);
    for (const auto& [id, v] : index)
        if (auto it = circle_of.find(id); it != circle_of.end()) remap[it->second] = 0;
    int next = 0;
    for (std::size_t c = 0; c < remap.size(); ++c)
        if (remap[c] == 0) {
            remap[c] = next++;
            ds.class_names.push_back(circle_names[c]);
        }
    std::vector<int> labels(n, kUnlabeled);
    for (const auto& [id, v] : index)
        if (auto it = circle_of.find(id); it != circle_of.end()) labels[v] = remap[it->second];

    std::vector<Edge> edges;
    for (auto [a, b] : raw_edges) {
        auto ia = index.find(a), ib = index.find(b);
        if (ia != index.end() && ib != index.end()) edges.emplace_back(ia->second, ib->second);
    }
    if (opt.include_ego) {
        if (auto ie = index.find(ego); ie != index.end())
            for (const auto& [id, v] : index)
                if (v != ie->second) edges.emplace_back(ie->second, v);
    }

    ds.graph = Graph(n, edges, std::move(features), std::move(labels), next);
    ds.node_ids.reserve(n);
    for (const auto& [id, v] : index) ds.node_ids.push_back(std::to_string(id));
    detail::add_cleanup_warnings(ds);
    if (dropped_unlabeled) ds.warnings.push_back("removed " + std::to_string(dropped_unlabeled) + " node(s) in no circle");
    if (edge_nodes_without_features)
        ds.warnings.push_back("ignored edges of " + std::to_string(edge_nodes_without_features) + " node(s) without features");
    ds.warnings.push_back(std::string("multi-circle nodes labeled by the ") + std::string(to_string(opt.circle_rule)) +
                          " rule");
    if (ds.classes_present() < 2) throw DataError("ego network " + ego_id + " has fewer than two labeled classes");
    return ds;
}

// ---------------------------------------------------------------------------
// Splits

/// Two modes. With per_class_train > 0, exactly that many nodes per class
/// train and validation/test fractions are taken from the pooled remainder
/// (fractions of all labeled nodes). With per_class_train == 0, every class is
/// divided by train/val/test fractions independently (stratified).
struct SplitSpec {
    std::size_t per_class_train = 0;
    double train_fraction = 0.5;
    double val_fraction = 0.2;
    double test_fraction = 0.3;

    void validate() const {
        for (double f : {train_fraction, val_fraction, test_fraction})
            if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument("split fractions must lie in [0,1]");
        const double used = (per_class_train ? 0.0 : train_fraction) + val_fraction + test_fraction;
        if (used > 1.0 + 1e-9) throw std::invalid_argument("split fractions sum to more than 1");
        if (!per_class_train && train_fraction <= 0.0) throw std::invalid_argument("train_fraction must be positive");
    }

    friend bool operator==(const SplitSpec&, const SplitSpec&) = default;
};

inline Splits make_splits(const Dataset& ds, const SplitSpec& spec, std::uint64_t seed) {
    spec.validate();
    const auto& labels = ds.graph.labels();
    const int n_classes = ds.graph.n_classes();
    std::vector<std::vector<NodeId>> by_class(static_cast<std::size_t>(std::max(n_classes, 0)));
    std::size_t labeled = 0;
    for (NodeId v = 0; v < labels.size(); ++v)
        if (labels[v] != kUnlabeled) {
            by_class[static_cast<std::size_t>(labels[v])].push_back(v);
            ++labeled;
        }
    auto class_name = [&](std::size_t c) {
        return c < ds.class_names.size() ? "'" + ds.class_names[c] + "'" : std::to_string(c);
    };
    auto round_count = [](double f, std::size_t total) { return static_cast<std::size_t>(std::floor(f * static_cast<double>(total) + 0.5)); };

    Rng rng(seed);
    Splits s;
    if (spec.per_class_train > 0) {
        std::vector<NodeId> pool;
        for (std::size_t c = 0; c < by_class.size(); ++c) {
            auto members = by_class[c];
            if (members.empty()) continue;
            if (members.size() < spec.per_class_train)
                throw std::invalid_argument("class " + class_name(c) + " has " + std::to_string(members.size()) +
                                            " labeled node(s), fewer than per_class_train=" +
                                            std::to_string(spec.per_class_train));
            shuffle(members, rng);
            s.train.insert(s.train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(spec.per_class_train));
            pool.insert(pool.end(), members.begin() + static_cast<std::ptrdiff_t>(spec.per_class_train), members.end());
        }
        shuffle(pool, rng);
        const std::size_t n_val = std::min(round_count(spec.val_fraction, labeled), pool.size());
        const std::size_t n_test = std::min(round_count(spec.test_fraction, labeled), pool.size() - n_val);
        s.validation.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_val));
        s.test.assign(pool.begin() + static_cast<std::ptrdiff_t>(n_val),
                      pool.begin() + static_cast<std::ptrdiff_t>(n_val + n_test));
    } else {
        for (auto members : by_class) {
            if (members.empty()) continue;
            shuffle(members, rng);
            const std::size_t c = members.size();
            const std::size_t n_train = std::min(c, std::max<std::size_t>(1, round_count(spec.train_fraction, c)));
            const std::size_t n_val = std::min(c - n_train, round_count(spec.val_fraction, c));
            const std::size_t n_test = std::min(c - n_train - n_val, round_count(spec.test_fraction, c));
            auto it = members.begin();
            s.train.insert(s.train.end(), it, it + static_cast<std::ptrdiff_t>(n_train));
            it += static_cast<std::ptrdiff_t>(n_train);
            s.validation.insert(s.validation.end(), it, it + static_cast<std::ptrdiff_t>(n_val));
            it += static_cast<std::ptrdiff_t>(n_val);
            s.test.insert(s.test.end(), it, it + static_cast<std::ptrdiff_t>(n_test));
        }
    }
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.validation.begin(), s.validation.end());
    std::sort(s.test.begin(), s.test.end());
    s.validate(labels.size());
    return s;
}

// ---------------------------------------------------------------------------
// Synthetic planted-partition graphs

struct SyntheticSpec {
    std::size_t nodes_per_class = 10;
    std::size_t classes = 2;
    double p_in = 0.5;
    double p_out = 0.02;
    std::size_t feature_dim = 8;
    /// Mean of the class-indicating feature block relative to unit noise.
    double signal = 1.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (classes < 2) throw std::invalid_argument("synthetic: need at least two classes");
        if (nodes_per_class < 1) throw std::invalid_argument("synthetic: nodes_per_class must be positive");
        if (feature_dim < classes) throw std::invalid_argument("synthetic: feature_dim must be >= classes");
        for (double p : {p_in, p_out})
            if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("synthetic: edge probabilities must lie in [0,1]");
    }
};

/// Stochastic block model with noisy class-indicating features. Nodes are
/// grouped by class: node v has class v / nodes_per_class.
inline Dataset make_planted_partition(const SyntheticSpec& spec) {
    spec.validate();
    const std::size_t n = spec.nodes_per_class * spec.classes;
    Rng rng(mix_seed(spec.seed, 0x5b3));
    std::vector<int> labels(n);
    for (NodeId v = 0; v < n; ++v) labels[v] = static_cast<int>(v / spec.nodes_per_class);
    std::vector<Edge> edges;
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v)
            if (rng.uniform() < (labels[u] == labels[v] ? spec.p_in : spec.p_out)) edges.emplace_back(u, v);
    const std::size_t block = spec.feature_dim / spec.classes;
    DenseMatrix x(n, spec.feature_dim);
    for (NodeId v = 0; v < n; ++v)
        for (std::size_t f = 0; f < spec.feature_dim; ++f) {
            const bool own = f / block == static_cast<std::size_t>(labels[v]);
            x(v, f) = rng.uniform() + (own ? spec.signal : 0.0);
        }
    Dataset ds;
    ds.name = "synthetic";
    ds.raw_edge_records = edges.size();
    ds.graph = Graph(n, edges, std::move(x), std::move(labels), static_cast<int>(spec.classes));
    for (std::size_t c = 0; c < spec.classes; ++c) ds.class_names.push_back(std::to_string(c));
    return ds;
}

}  // namespace mgcmn
