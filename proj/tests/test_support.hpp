#pragma once

// Shared helpers for the unit tests: fixture paths and small reference
// implementations written independently of the library code they check.

#include "mgcmn/mgcmn.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace mgcmn::testing {

inline std::filesystem::path source_dir() { return MGCMN_SOURCE_DIR; }
inline std::filesystem::path fixture(const std::string& rel) { return source_dir() / "tests/fixtures" / rel; }
inline std::filesystem::path data_fixture(const std::string& rel) { return source_dir() / "data/fixtures" / rel; }

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("mgcmn_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    out << text;
}

inline Graph make_graph(std::size_t n, std::vector<Edge> edges) { return Graph(n, edges); }

inline Graph complete_graph(std::size_t n) {
    std::vector<Edge> e;
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v) e.emplace_back(u, v);
    return Graph(n, e);
}

inline Graph path_graph(std::size_t n) {
    std::vector<Edge> e;
    for (NodeId u = 0; u + 1 < n; ++u) e.emplace_back(u, u + 1);
    return Graph(n, e);
}

inline Graph star_graph(std::size_t leaves) {
    std::vector<Edge> e;
    for (NodeId u = 1; u <= leaves; ++u) e.emplace_back(0, u);
    return Graph(leaves + 1, e);
}

/// Dense D^{-1/2} (M [+ I]) D^{-1/2}, written straight from the definition.
inline DenseMatrix dense_sym_normalize(DenseMatrix m, bool self_loops) {
    const std::size_t n = m.rows();
    if (self_loops)
        for (std::size_t i = 0; i < n; ++i) m(i, i) += 1.0;
    std::vector<double> d(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) d[i] += m(i, j);
    DenseMatrix out(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (d[i] > 0 && d[j] > 0) out(i, j) = m(i, j) / std::sqrt(d[i] * d[j]);
    return out;
}

/// Plain triple-loop product.
inline DenseMatrix naive_matmul(const DenseMatrix& a, const DenseMatrix& b) {
    DenseMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
            c(i, j) = s;
        }
    return c;
}

inline DenseMatrix random_dense(std::size_t r, std::size_t c, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    Rng rng(seed);
    DenseMatrix m(r, c);
    for (auto& v : m.values()) v = rng.uniform(lo, hi);
    return m;
}

}  // namespace mgcmn::testing
