#pragma once

#include <cstddef>
#include <vector>

namespace sepspec {

// Dense row-major matrix of doubles. All heavy kernels in this project run on
// contiguous rows, so row-major is the only layout used anywhere.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* row(std::size_t r) { return data_.data() + r * cols_; }
    const double* row(std::size_t r) const { return data_.data() + r * cols_; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    void resize(std::size_t rows, std::size_t cols, double fill = 0.0) {
        rows_ = rows;
        cols_ = cols;
        data_.assign(rows * cols, fill);
    }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    bool all_finite() const;

    Matrix transposed() const;

    // Column c as a standalone vector.
    std::vector<double> col(std::size_t c) const;

    static Matrix identity(std::size_t n);

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// C = A * B. C is resized and overwritten.
void matmul(const Matrix& a, const Matrix& b, Matrix& c);

// C = A^T * B.
void matmul_tn(const Matrix& a, const Matrix& b, Matrix& c);

// C += A^T * B. C must already have the product's shape.
void matmul_tn_add(const Matrix& a, const Matrix& b, Matrix& c);

// C = A * B^T.
void matmul_nt(const Matrix& a, const Matrix& b, Matrix& c);

double frobenius_norm(const Matrix& m);

// Max absolute entry.
double max_abs(const Matrix& m);

}  // namespace sepspec
