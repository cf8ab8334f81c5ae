#include "kaczmarz/matrix.hpp"

#include "kaczmarz/factorizations.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace kaczmarz {

namespace {

void require_positive_shape(std::size_t rows, std::size_t cols) {
    if (rows == 0 || cols == 0) throw std::invalid_argument("matrix dimensions must be positive");
}

void require_length(std::size_t got, std::size_t want, const char* what) {
    if (got != want)
        throw std::invalid_argument(std::string(what) + ": length " + std::to_string(got) + ", expected " +
                                    std::to_string(want));
}

} // namespace

Matrix Matrix::dense(std::size_t rows, std::size_t cols, std::vector<double> col_major) {
    require_positive_shape(rows, cols);
    require_length(col_major.size(), rows * cols, "dense matrix storage");
    Matrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.col_major_ = std::move(col_major);
    m.row_major_.resize(rows * cols);
    for (std::size_t j = 0; j < cols; ++j)
        for (std::size_t i = 0; i < rows; ++i) m.row_major_[i * cols + j] = m.col_major_[j * rows + i];
    return m;
}

Matrix Matrix::dense_row_major(std::size_t rows, std::size_t cols, std::span<const double> row_major) {
    require_positive_shape(rows, cols);
    require_length(row_major.size(), rows * cols, "dense matrix storage");
    std::vector<double> cm(rows * cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) cm[j * rows + i] = row_major[i * cols + j];
    return dense(rows, cols, std::move(cm));
}

Matrix Matrix::identity(std::size_t n) {
    std::vector<double> cm(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) cm[i * n + i] = 1.0;
    return dense(n, n, std::move(cm));
}

Matrix Matrix::zeros(std::size_t rows, std::size_t cols) {
    return dense(rows, cols, std::vector<double>(rows * cols, 0.0));
}

Matrix Matrix::csr(std::size_t rows, std::size_t cols, std::vector<std::size_t> offsets,
                   std::vector<std::size_t> indices, std::vector<double> values) {
    require_positive_shape(rows, cols);
    require_length(offsets.size(), rows + 1, "CSR offsets");
    require_length(values.size(), indices.size(), "CSR values");
    if (offsets.front() != 0 || offsets.back() != indices.size())
        throw std::invalid_argument("CSR offsets must start at 0 and end at the entry count");

    Matrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.sparse_ = true;
    m.csr_offsets_.reserve(rows + 1);
    m.csr_offsets_.push_back(0);
    for (std::size_t i = 0; i < rows; ++i) {
        if (offsets[i + 1] < offsets[i]) throw std::invalid_argument("CSR offsets must be nondecreasing");
        for (std::size_t p = offsets[i]; p < offsets[i + 1]; ++p) {
            if (indices[p] >= cols) throw std::invalid_argument("CSR column index out of range");
            if (p > offsets[i] && indices[p] <= indices[p - 1])
                throw std::invalid_argument("CSR column indices must be strictly increasing within a row");
            if (!std::isfinite(values[p])) throw std::invalid_argument("non-finite matrix entry");
            if (values[p] == 0.0) continue;
            m.csr_indices_.push_back(indices[p]);
            m.csr_values_.push_back(values[p]);
        }
        m.csr_offsets_.push_back(m.csr_indices_.size());
    }
    m.build_csc_twin();
    return m;
}

Matrix Matrix::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> entries) {
    require_positive_shape(rows, cols);
    for (const auto& t : entries)
        if (t.row >= rows || t.col >= cols) throw std::invalid_argument("triplet index out of range");
    std::stable_sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::vector<std::size_t> offsets(rows + 1, 0);
    std::vector<std::size_t> indices;
    std::vector<double> values;
    for (std::size_t p = 0; p < entries.size();) {
        const auto [r, c, v0] = entries[p];
        double sum = v0;
        std::size_t q = p + 1;
        for (; q < entries.size() && entries[q].row == r && entries[q].col == c; ++q) sum += entries[q].value;
        indices.push_back(c);
        values.push_back(sum);
        ++offsets[r + 1];
        p = q;
    }
    std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
    return csr(rows, cols, std::move(offsets), std::move(indices), std::move(values));
}

void Matrix::build_csc_twin() {
    csc_offsets_.assign(cols_ + 1, 0);
    for (std::size_t c : csr_indices_) ++csc_offsets_[c + 1];
    std::partial_sum(csc_offsets_.begin(), csc_offsets_.end(), csc_offsets_.begin());
    csc_indices_.resize(csr_indices_.size());
    csc_values_.resize(csr_values_.size());
    std::vector<std::size_t> next(csc_offsets_.begin(), csc_offsets_.end() - 1);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t p = csr_offsets_[i]; p < csr_offsets_[i + 1]; ++p) {
            const std::size_t q = next[csr_indices_[p]]++;
            csc_indices_[q] = i;
            csc_values_[q] = csr_values_[p];
        }
    }
}

std::size_t Matrix::nnz() const {
    if (sparse_) return csr_values_.size();
    return static_cast<std::size_t>(
        std::count_if(col_major_.begin(), col_major_.end(), [](double v) { return v != 0.0; }));
}

double Matrix::at(std::size_t i, std::size_t j) const {
    if (i >= rows_ || j >= cols_) throw std::out_of_range("matrix index out of range");
    if (!sparse_) return col_major_[j * rows_ + i];
    const auto first = csr_indices_.begin() + static_cast<std::ptrdiff_t>(csr_offsets_[i]);
    const auto last = csr_indices_.begin() + static_cast<std::ptrdiff_t>(csr_offsets_[i + 1]);
    const auto it = std::lower_bound(first, last, j);
    if (it == last || *it != j) return 0.0;
    return csr_values_[static_cast<std::size_t>(it - csr_indices_.begin())];
}

double Matrix::row_dot(std::size_t i, std::span<const double> x) const {
    double s = 0.0;
    if (sparse_) {
        for (std::size_t p = csr_offsets_[i]; p < csr_offsets_[i + 1]; ++p) s += csr_values_[p] * x[csr_indices_[p]];
    } else {
        const double* row = row_major_.data() + i * cols_;
        for (std::size_t j = 0; j < cols_; ++j) s += row[j] * x[j];
    }
    return s;
}

void Matrix::row_axpy(std::size_t i, double s, std::span<double> y) const {
    if (sparse_) {
        for (std::size_t p = csr_offsets_[i]; p < csr_offsets_[i + 1]; ++p) y[csr_indices_[p]] += s * csr_values_[p];
    } else {
        const double* row = row_major_.data() + i * cols_;
        for (std::size_t j = 0; j < cols_; ++j) y[j] += s * row[j];
    }
}

double Matrix::col_dot(std::size_t j, std::span<const double> z) const {
    double s = 0.0;
    if (sparse_) {
        for (std::size_t p = csc_offsets_[j]; p < csc_offsets_[j + 1]; ++p) s += csc_values_[p] * z[csc_indices_[p]];
    } else {
        const double* col = col_major_.data() + j * rows_;
        for (std::size_t i = 0; i < rows_; ++i) s += col[i] * z[i];
    }
    return s;
}

void Matrix::col_axpy(std::size_t j, double s, std::span<double> z) const {
    if (sparse_) {
        for (std::size_t p = csc_offsets_[j]; p < csc_offsets_[j + 1]; ++p) z[csc_indices_[p]] += s * csc_values_[p];
    } else {
        const double* col = col_major_.data() + j * rows_;
        for (std::size_t i = 0; i < rows_; ++i) z[i] += s * col[i];
    }
}

double Matrix::row_norm_sq(std::size_t i) const {
    double s = 0.0;
    for_each_in_row(i, [&](std::size_t, double v) { s += v * v; });
    return s;
}

double Matrix::col_norm_sq(std::size_t j) const {
    double s = 0.0;
    if (sparse_) {
        for (std::size_t p = csc_offsets_[j]; p < csc_offsets_[j + 1]; ++p) s += csc_values_[p] * csc_values_[p];
    } else {
        const double* col = col_major_.data() + j * rows_;
        for (std::size_t i = 0; i < rows_; ++i) s += col[i] * col[i];
    }
    return s;
}

Vector Matrix::multiply(std::span<const double> x) const {
    require_length(x.size(), cols_, "multiply");
    Vector y(rows_);
    for (std::size_t i = 0; i < rows_; ++i) y[i] = row_dot(i, x);
    return y;
}

Vector Matrix::multiply_transposed(std::span<const double> y) const {
    require_length(y.size(), rows_, "multiply_transposed");
    Vector x(cols_);
    for (std::size_t j = 0; j < cols_; ++j) x[j] = col_dot(j, y);
    return x;
}

std::vector<double> Matrix::to_dense_col_major() const {
    if (!sparse_) return col_major_;
    std::vector<double> out(rows_ * cols_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t p = csr_offsets_[i]; p < csr_offsets_[i + 1]; ++p)
            out[csr_indices_[p] * rows_ + i] = csr_values_[p];
    return out;
}

Matrix Matrix::to_dense() const {
    if (!sparse_) return *this;
    return dense(rows_, cols_, to_dense_col_major());
}

Matrix Matrix::to_sparse() const {
    if (sparse_) return *this;
    std::vector<std::size_t> offsets(rows_ + 1, 0);
    std::vector<std::size_t> indices;
    std::vector<double> values;
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) {
            const double v = row_major_[i * cols_ + j];
            if (v == 0.0) continue;
            indices.push_back(j);
            values.push_back(v);
        }
        offsets[i + 1] = indices.size();
    }
    return csr(rows_, cols_, std::move(offsets), std::move(indices), std::move(values));
}

BlockView::BlockView(const Matrix& parent, Axis axis, std::span<const std::size_t> indices)
    : parent_(&parent), axis_(axis), indices_(indices), contiguous_(true) {
    const std::size_t limit = axis == Axis::Row ? parent.rows() : parent.cols();
    if (indices.empty()) throw std::invalid_argument("block must not be empty");
    std::vector<bool> seen(limit, false);
    for (std::size_t k = 0; k < indices.size(); ++k) {
        const std::size_t idx = indices[k];
        if (idx >= limit) throw std::out_of_range("block index out of range");
        if (seen[idx]) throw std::invalid_argument("block indices must be distinct");
        seen[idx] = true;
        if (k > 0 && idx != indices[k - 1] + 1) contiguous_ = false;
    }
}

double frobenius_norm_sq(const Matrix& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) s += m.row_norm_sq(i);
    return s;
}

double block_frobenius_sq(const Matrix& m, const BlockView& block) {
    if (&block.parent() != &m) throw std::invalid_argument("block belongs to a different matrix");
    double s = 0.0;
    if (block.axis() == Axis::Row) {
        for (std::size_t i : block.indices()) s += m.row_norm_sq(i);
    } else {
        for (std::size_t j : block.indices()) s += m.col_norm_sq(j);
    }
    return s;
}

Vector block_apply(const Matrix& m, const BlockView& block, std::span<const double> v, bool transposed) {
    if (&block.parent() != &m) throw std::invalid_argument("block belongs to a different matrix");
    const auto idx = block.indices();
    if (block.axis() == Axis::Row) {
        if (!transposed) {
            require_length(v.size(), m.cols(), "block_apply");
            Vector out(idx.size());
            for (std::size_t k = 0; k < idx.size(); ++k) out[k] = m.row_dot(idx[k], v);
            return out;
        }
        require_length(v.size(), idx.size(), "block_apply");
        Vector out(m.cols(), 0.0);
        for (std::size_t k = 0; k < idx.size(); ++k) m.row_axpy(idx[k], v[k], out);
        return out;
    }
    if (!transposed) {
        require_length(v.size(), idx.size(), "block_apply");
        Vector out(m.rows(), 0.0);
        for (std::size_t k = 0; k < idx.size(); ++k) m.col_axpy(idx[k], v[k], out);
        return out;
    }
    require_length(v.size(), m.rows(), "block_apply");
    Vector out(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) out[k] = m.col_dot(idx[k], v);
    return out;
}

Matrix extract_block(const BlockView& block) {
    const Matrix& m = block.parent();
    const auto idx = block.indices();
    if (block.axis() == Axis::Row) {
        if (!m.is_sparse()) {
            std::vector<double> rm(idx.size() * m.cols(), 0.0);
            for (std::size_t k = 0; k < idx.size(); ++k)
                m.for_each_in_row(idx[k], [&](std::size_t j, double v) { rm[k * m.cols() + j] = v; });
            return Matrix::dense_row_major(idx.size(), m.cols(), rm);
        }
        std::vector<Triplet> t;
        for (std::size_t k = 0; k < idx.size(); ++k)
            m.for_each_in_row(idx[k], [&](std::size_t j, double v) { t.push_back({k, j, v}); });
        return Matrix::from_triplets(idx.size(), m.cols(), std::move(t));
    }
    std::vector<double> cm(m.rows() * idx.size(), 0.0);
    for (std::size_t k = 0; k < idx.size(); ++k) {
        std::span<double> col(cm.data() + k * m.rows(), m.rows());
        m.col_axpy(idx[k], 1.0, col);
    }
    Matrix out = Matrix::dense(m.rows(), idx.size(), std::move(cm));
    return m.is_sparse() ? out.to_sparse() : out;
}

double spectral_norm_sq(const Matrix& m) {
    const Svd f = svd(m);
    return f.sigma.front() * f.sigma.front();
}

double dot(std::span<const double> a, std::span<const double> b) {
    require_length(b.size(), a.size(), "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2_sq(std::span<const double> a) { return dot(a, a); }

double norm2(std::span<const double> a) { return std::sqrt(norm2_sq(a)); }

Vector subtract(std::span<const double> a, std::span<const double> b) {
    require_length(b.size(), a.size(), "subtract");
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

} // namespace kaczmarz
