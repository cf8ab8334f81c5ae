#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace kaczmarz {

using Vector = std::vector<double>;

enum class Axis { Row, Column };

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/// Real m x n matrix, immutable after construction.
///
/// Dense storage is column-major with a row-major twin; sparse storage is
/// compressed-sparse-rows with a compressed-sparse-columns twin. Both twins
/// are built once so row sweeps and column sweeps each touch contiguous
/// memory. Sparse storage never holds explicit zeros.
class Matrix {
public:
    Matrix() = default;

    static Matrix dense(std::size_t rows, std::size_t cols, std::vector<double> col_major);
    static Matrix dense_row_major(std::size_t rows, std::size_t cols, std::span<const double> row_major);
    static Matrix identity(std::size_t n);
    static Matrix zeros(std::size_t rows, std::size_t cols);

    /// Validates the CSR arrays and strips explicit zeros.
    static Matrix csr(std::size_t rows, std::size_t cols, std::vector<std::size_t> offsets,
                      std::vector<std::size_t> indices, std::vector<double> values);
    /// Duplicate (row, col) entries are summed; resulting zeros are dropped.
    static Matrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> entries);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool is_sparse() const { return sparse_; }
    std::size_t nnz() const;

    double at(std::size_t i, std::size_t j) const;

    /// A_{i,:} . x
    double row_dot(std::size_t i, std::span<const double> x) const;
    /// y += s * (A_{i,:})^T
    void row_axpy(std::size_t i, double s, std::span<double> y) const;
    /// (A_{:,j})^T . z
    double col_dot(std::size_t j, std::span<const double> z) const;
    /// z += s * A_{:,j}
    void col_axpy(std::size_t j, double s, std::span<double> z) const;

    double row_norm_sq(std::size_t i) const;
    double col_norm_sq(std::size_t j) const;

    /// Calls f(col, value) for every stored entry of row i (all columns when dense).
    template <typename F>
    void for_each_in_row(std::size_t i, F&& f) const {
        if (sparse_) {
            for (std::size_t p = csr_offsets_[i]; p < csr_offsets_[i + 1]; ++p)
                f(csr_indices_[p], csr_values_[p]);
        } else {
            const double* row = row_major_.data() + i * cols_;
            for (std::size_t j = 0; j < cols_; ++j) f(j, row[j]);
        }
    }

    /// y = A x
    Vector multiply(std::span<const double> x) const;
    /// x = A^T y
    Vector multiply_transposed(std::span<const double> y) const;

    std::vector<double> to_dense_col_major() const;
    Matrix to_sparse() const;
    Matrix to_dense() const;

    // Raw access for I/O and bindings.
    std::span<const std::size_t> csr_offsets() const { return csr_offsets_; }
    std::span<const std::size_t> csr_indices() const { return csr_indices_; }
    std::span<const double> csr_values() const { return csr_values_; }

private:
    void build_csc_twin();

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    bool sparse_ = false;

    std::vector<double> col_major_;
    std::vector<double> row_major_;

    std::vector<std::size_t> csr_offsets_;
    std::vector<std::size_t> csr_indices_;
    std::vector<double> csr_values_;
    std::vector<std::size_t> csc_offsets_;
    std::vector<std::size_t> csc_indices_;
    std::vector<double> csc_values_;
};

/// An ordered, duplicate-free set of row or column indices of a parent matrix.
/// The view does not own its indices.
class BlockView {
public:
    BlockView(const Matrix& parent, Axis axis, std::span<const std::size_t> indices);

    const Matrix& parent() const { return *parent_; }
    Axis axis() const { return axis_; }
    std::span<const std::size_t> indices() const { return indices_; }
    std::size_t size() const { return indices_.size(); }
    bool contiguous() const { return contiguous_; }

private:
    const Matrix* parent_;
    Axis axis_;
    std::span<const std::size_t> indices_;
    bool contiguous_;
};

double frobenius_norm_sq(const Matrix& m);
double block_frobenius_sq(const Matrix& m, const BlockView& block);

/// Block-restricted product.
///   Row block I:    transposed=false -> A_{I,:} v   (v has n entries, result |I|)
///                   transposed=true  -> A_{I,:}^T v (v has |I| entries, result n)
///   Column block J: transposed=false -> A_{:,J} v   (v has |J| entries, result m)
///                   transposed=true  -> A_{:,J}^T v (v has m entries, result |J|)
Vector block_apply(const Matrix& m, const BlockView& block, std::span<const double> v, bool transposed);

/// Copies the block into a standalone matrix with the parent's storage kind.
/// Contiguous dense row blocks are sliced straight out of the row-major twin.
Matrix extract_block(const BlockView& block);

/// sigma_1(M)^2, via the SVD in factorizations. Throws on the zero matrix.
double spectral_norm_sq(const Matrix& m);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm2_sq(std::span<const double> a);
Vector subtract(std::span<const double> a, std::span<const double> b);

} // namespace kaczmarz
