#pragma once

#include "mgcmn/dense_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace mgcmn {

/// Square symmetric matrix in CSR form.
///
/// Invariants (checked by every factory): column indices sorted and unique
/// within a row, no stored zeros, and the pattern and values symmetric to
/// within `kSymmetryTolerance`.
class SparseMatrix {
public:
    static constexpr double kSymmetryTolerance = 1e-12;

    struct Triplet {
        std::size_t row;
        std::size_t col;
        double value;
    };

    SparseMatrix() : row_offsets_(1, 0) {}

    /// Empty n×n matrix.
    explicit SparseMatrix(std::size_t n) : n_(n), row_offsets_(n + 1, 0) {}

    /// Takes ownership of CSR arrays and validates them.
    SparseMatrix(std::size_t n, std::vector<std::size_t> row_offsets,
                 std::vector<std::size_t> col_indices, std::vector<double> values)
        : n_(n),
          row_offsets_(std::move(row_offsets)),
          col_indices_(std::move(col_indices)),
          values_(std::move(values)) {
        validate();
    }

    /// Sums duplicate coordinates in input order and drops entries that sum to zero.
    static SparseMatrix from_triplets(std::size_t n, std::vector<Triplet> triplets) {
        for (const auto& t : triplets)
            if (t.row >= n || t.col >= n)
                throw std::out_of_range("SparseMatrix: triplet index out of range");
        std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
            return std::tie(a.row, a.col) < std::tie(b.row, b.col);
        });
        std::vector<std::size_t> offsets(n + 1, 0);
        std::vector<std::size_t> cols;
        std::vector<double> vals;
        cols.reserve(triplets.size());
        vals.reserve(triplets.size());
        for (std::size_t i = 0; i < triplets.size();) {
            std::size_t j = i;
            double sum = 0.0;
            while (j < triplets.size() && triplets[j].row == triplets[i].row &&
                   triplets[j].col == triplets[i].col)
                sum += triplets[j++].value;
            if (sum != 0.0) {
                cols.push_back(triplets[i].col);
                vals.push_back(sum);
                ++offsets[triplets[i].row + 1];
            }
            i = j;
        }
        for (std::size_t r = 0; r < n; ++r) offsets[r + 1] += offsets[r];
        return SparseMatrix(n, std::move(offsets), std::move(cols), std::move(vals));
    }

    static SparseMatrix from_dense(const DenseMatrix& d) {
        if (d.rows() != d.cols()) throw std::invalid_argument("SparseMatrix: dense input must be square");
        std::vector<std::size_t> offsets(d.rows() + 1, 0);
        std::vector<std::size_t> cols;
        std::vector<double> vals;
        for (std::size_t i = 0; i < d.rows(); ++i) {
            for (std::size_t j = 0; j < d.cols(); ++j) {
                if (d(i, j) != 0.0) {
                    cols.push_back(j);
                    vals.push_back(d(i, j));
                }
            }
            offsets[i + 1] = cols.size();
        }
        return SparseMatrix(d.rows(), std::move(offsets), std::move(cols), std::move(vals));
    }

    static SparseMatrix identity(std::size_t n) {
        std::vector<std::size_t> offsets(n + 1), cols(n);
        for (std::size_t i = 0; i < n; ++i) {
            offsets[i + 1] = i + 1;
            cols[i] = i;
        }
        return SparseMatrix(n, std::move(offsets), std::move(cols), std::vector<double>(n, 1.0));
    }

    std::size_t n() const noexcept { return n_; }
    std::size_t nnz() const noexcept { return values_.size(); }

    const std::vector<std::size_t>& row_offsets() const noexcept { return row_offsets_; }
    const std::vector<std::size_t>& col_indices() const noexcept { return col_indices_; }
    const std::vector<double>& values() const noexcept { return values_; }

    std::span<const std::size_t> row_cols(std::size_t r) const {
        return {col_indices_.data() + row_offsets_[r], row_offsets_[r + 1] - row_offsets_[r]};
    }
    std::span<const double> row_values(std::size_t r) const {
        return {values_.data() + row_offsets_[r], row_offsets_[r + 1] - row_offsets_[r]};
    }

    /// Binary search within the row; returns 0 for structural zeros.
    double at(std::size_t r, std::size_t c) const {
        auto cols = row_cols(r);
        auto it = std::lower_bound(cols.begin(), cols.end(), c);
        if (it == cols.end() || *it != c) return 0.0;
        return values_[row_offsets_[r] + static_cast<std::size_t>(it - cols.begin())];
    }

    double row_sum(std::size_t r) const {
        double s = 0.0;
        for (double v : row_values(r)) s += v;
        return s;
    }

    DenseMatrix to_dense() const {
        DenseMatrix d(n_, n_);
        for (std::size_t r = 0; r < n_; ++r) {
            auto cols = row_cols(r);
            auto vals = row_values(r);
            for (std::size_t k = 0; k < cols.size(); ++k) d(r, cols[k]) = vals[k];
        }
        return d;
    }

    bool same_structure(const SparseMatrix& other) const {
        return n_ == other.n_ && row_offsets_ == other.row_offsets_ && col_indices_ == other.col_indices_;
    }

    friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

private:
    void validate() const {
        if (row_offsets_.size() != n_ + 1 || row_offsets_.front() != 0 ||
            row_offsets_.back() != col_indices_.size() || col_indices_.size() != values_.size())
            throw std::invalid_argument("SparseMatrix: inconsistent CSR arrays");
        for (std::size_t r = 0; r < n_; ++r) {
            if (row_offsets_[r] > row_offsets_[r + 1])
                throw std::invalid_argument("SparseMatrix: row offsets not monotone");
            for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
                if (col_indices_[k] >= n_) throw std::out_of_range("SparseMatrix: column index out of range");
                if (k > row_offsets_[r] && col_indices_[k] <= col_indices_[k - 1])
                    throw std::invalid_argument("SparseMatrix: columns not strictly sorted in row " +
                                                std::to_string(r));
                if (values_[k] == 0.0) throw std::invalid_argument("SparseMatrix: explicit zero stored");
                if (!std::isfinite(values_[k])) throw std::invalid_argument("SparseMatrix: non-finite value");
            }
        }
        for (std::size_t r = 0; r < n_; ++r) {
            auto cols = row_cols(r);
            auto vals = row_values(r);
            for (std::size_t k = 0; k < cols.size(); ++k) {
                auto mirror_cols = row_cols(cols[k]);
                auto it = std::lower_bound(mirror_cols.begin(), mirror_cols.end(), r);
                if (it == mirror_cols.end() || *it != r)
                    throw std::invalid_argument("SparseMatrix: pattern not symmetric at (" + std::to_string(r) +
                                                "," + std::to_string(cols[k]) + ")");
                const double mirror = row_values(cols[k])[static_cast<std::size_t>(it - mirror_cols.begin())];
                const double scale = std::max({1.0, std::abs(vals[k]), std::abs(mirror)});
                if (std::abs(mirror - vals[k]) > kSymmetryTolerance * scale)
                    throw std::invalid_argument("SparseMatrix: values not symmetric at (" + std::to_string(r) +
                                                "," + std::to_string(cols[k]) + ")");
            }
        }
    }

    std::size_t n_ = 0;
    std::vector<std::size_t> row_offsets_;
    std::vector<std::size_t> col_indices_;
    std::vector<double> values_;
};

/// Sparse-dense product s * x.
inline DenseMatrix spmm(const SparseMatrix& s, const DenseMatrix& x) {
    detail::require_shape(s.n() == x.rows(), "spmm");
    DenseMatrix out(x.rows(), x.cols());
    for (std::size_t r = 0; r < s.n(); ++r) {
        auto out_row = out.row(r);
        auto cols = s.row_cols(r);
        auto vals = s.row_values(r);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            auto x_row = x.row(cols[k]);
            const double w = vals[k];
            for (std::size_t j = 0; j < x.cols(); ++j) out_row[j] += w * x_row[j];
        }
    }
    return out;
}

}  // namespace mgcmn
