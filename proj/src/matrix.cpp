#include "sepspec/matrix.hpp"

#include <cmath>
#include <stdexcept>

namespace sepspec {

bool Matrix::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        const double* src = row(r);
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = src[c];
    }
    return t;
}

std::vector<double> Matrix::col(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

namespace {

// C += A * B over four A rows at a time: each loaded row of B feeds four
// output rows, cutting B traffic 4x while the j loop stays packed-FMA
// friendly. C must already hold the desired initial values.
void accumulate_product(const Matrix& a, const Matrix& b, Matrix& c) {
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
        const double* a0 = a.row(i);
        const double* a1 = a.row(i + 1);
        const double* a2 = a.row(i + 2);
        const double* a3 = a.row(i + 3);
        double* c0 = c.row(i);
        double* c1 = c.row(i + 1);
        double* c2 = c.row(i + 2);
        double* c3 = c.row(i + 3);
        for (std::size_t p = 0; p < k; ++p) {
            const double av0 = a0[p], av1 = a1[p], av2 = a2[p], av3 = a3[p];
            const double* brow = b.row(p);
            for (std::size_t j = 0; j < n; ++j) {
                const double bv = brow[j];
                c0[j] += av0 * bv;
                c1[j] += av1 * bv;
                c2[j] += av2 * bv;
                c3[j] += av3 * bv;
            }
        }
    }
    for (; i < m; ++i) {
        const double* arow = a.row(i);
        double* crow = c.row(i);
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            const double* brow = b.row(p);
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

}  // namespace

void matmul(const Matrix& a, const Matrix& b, Matrix& c) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimensions differ");
    c.resize(a.rows(), b.cols());
    accumulate_product(a, b, c);
}

void matmul_tn(const Matrix& a, const Matrix& b, Matrix& c) {
    if (a.rows() != b.rows()) throw std::invalid_argument("matmul_tn: row counts differ");
    c.resize(a.cols(), b.cols());
    matmul_tn_add(a, b, c);
}

void matmul_tn_add(const Matrix& a, const Matrix& b, Matrix& c) {
    if (a.rows() != b.rows()) throw std::invalid_argument("matmul_tn_add: row counts differ");
    const std::size_t m = a.cols(), k = a.rows(), n = b.cols();
    if (c.rows() != m || c.cols() != n) throw std::invalid_argument("matmul_tn_add: bad shape");
    // Rank-1 accumulation fused over four shared rows: each pass over C
    // applies four updates, cutting C traffic 4x with accesses contiguous.
    std::size_t p = 0;
    for (; p + 4 <= k; p += 4) {
        const double* a0 = a.row(p);
        const double* a1 = a.row(p + 1);
        const double* a2 = a.row(p + 2);
        const double* a3 = a.row(p + 3);
        const double* b0 = b.row(p);
        const double* b1 = b.row(p + 1);
        const double* b2 = b.row(p + 2);
        const double* b3 = b.row(p + 3);
        for (std::size_t i = 0; i < m; ++i) {
            const double av0 = a0[i], av1 = a1[i], av2 = a2[i], av3 = a3[i];
            double* crow = c.row(i);
            for (std::size_t j = 0; j < n; ++j) {
                crow[j] += av0 * b0[j] + av1 * b1[j] + av2 * b2[j] + av3 * b3[j];
            }
        }
    }
    for (; p < k; ++p) {
        const double* arow = a.row(p);
        const double* brow = b.row(p);
        for (std::size_t i = 0; i < m; ++i) {
            const double av = arow[i];
            double* crow = c.row(i);
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& c) {
    if (a.cols() != b.cols()) throw std::invalid_argument("matmul_nt: column counts differ");
    // Transposing B first turns the product into the blocked streaming kernel;
    // the transpose is a single pass and B is the small operand at every call
    // site (a weight matrix or the ortho layer).
    thread_local Matrix bt;
    bt.resize(b.cols(), b.rows());
    for (std::size_t r = 0; r < b.rows(); ++r) {
        const double* src = b.row(r);
        for (std::size_t j = 0; j < b.cols(); ++j) bt(j, r) = src[j];
    }
    c.resize(a.rows(), b.rows());
    accumulate_product(a, bt, c);
}

double frobenius_norm(const Matrix& m) {
    double s = 0.0;
    const double* p = m.data();
    for (std::size_t i = 0; i < m.size(); ++i) s += p[i] * p[i];
    return std::sqrt(s);
}

double max_abs(const Matrix& m) {
    double best = 0.0;
    const double* p = m.data();
    for (std::size_t i = 0; i < m.size(); ++i) best = std::max(best, std::fabs(p[i]));
    return best;
}

}  // namespace sepspec
