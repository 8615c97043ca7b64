#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hicl {

/// Base error for everything raised by the library.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid configuration: unknown key, out-of-range value, missing required key.
struct config_error : error {
    using error::error;
};

/// Bad input data: missing file, unparsable cell, unsatisfiable stratification.
struct data_error : error {
    using error::error;
};

/// Numerical failure: degenerate scatter, empty training side, non-finite result.
struct numeric_error : error {
    using error::error;
};

/// Dense row-major matrix of doubles. Rows are instances, columns are features.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
        Matrix m;
        if (rows.empty()) return m;
        m.rows_ = rows.size();
        m.cols_ = rows.front().size();
        m.data_.reserve(m.rows_ * m.cols_);
        for (const auto& r : rows) {
            if (r.size() != m.cols_) throw data_error("Matrix::from_rows: ragged rows");
            m.data_.insert(m.data_.end(), r.begin(), r.end());
        }
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    void push_row(std::span<const double> r) {
        if (rows_ == 0 && cols_ == 0) cols_ = r.size();
        if (r.size() != cols_) throw data_error("Matrix::push_row: ragged rows");
        data_.insert(data_.end(), r.begin(), r.end());
        ++rows_;
    }

    /// New matrix holding the listed rows, in order (duplicates allowed).
    Matrix select_rows(std::span<const int> idx) const {
        Matrix out(idx.size(), cols_);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            auto src = row(static_cast<std::size_t>(idx[i]));
            std::copy(src.begin(), src.end(), out.row(i).begin());
        }
        return out;
    }

    const double* data() const { return data_.data(); }
    double* data() { return data_.data(); }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

/// Index of the largest value; ties resolve to the lowest index.
inline int argmax_lowest(std::span<const double> v) {
    int best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = static_cast<int>(i);
    return best;
}

inline bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

/// FNV-1a over a string, as a fixed-width hex fingerprint.
inline std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

}  // namespace hicl
