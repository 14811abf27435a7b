#include "sepspec/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "sepspec/error.hpp"

namespace sepspec {

namespace {

// Householder reduction of the symmetric matrix held in `a` (destroyed) to
// tridiagonal form. On return d holds the diagonal, e[i] the subdiagonal
// entry coupling rows i-1 and i (e[0] = 0), and the reflectors are stored in
// the lower rows of `a` with their 1/h factors in `hinv`.
void tridiagonalize(Matrix& a, std::vector<double>& d, std::vector<double>& e,
                    std::vector<double>& hinv) {
    const std::size_t n = a.rows();
    d.assign(n, 0.0);
    e.assign(n, 0.0);
    hinv.assign(n, 0.0);

    std::vector<double> p(n), w(n);
    for (std::size_t i = n - 1; i >= 1; --i) {
        const std::size_t l = i;  // active length: components 0..i-1
        double* xi = a.row(i);
        if (l == 1) {
            e[i] = xi[0];
            continue;
        }
        double scale = 0.0;
        for (std::size_t j = 0; j < l; ++j) scale += std::fabs(xi[j]);
        if (scale == 0.0) {
            e[i] = 0.0;
            continue;
        }
        for (std::size_t j = 0; j < l; ++j) xi[j] /= scale;
        double sigma = 0.0;
        for (std::size_t j = 0; j < l; ++j) sigma += xi[j] * xi[j];
        const double f = xi[l - 1];
        const double g = f >= 0.0 ? -std::sqrt(sigma) : std::sqrt(sigma);
        e[i] = scale * g;
        const double h = sigma - f * g;  // = |v|^2 / 2
        xi[l - 1] = f - g;               // v now lives in row i
        hinv[i] = 1.0 / h;

        // p = A v / h over the leading l-by-l block (both triangles are kept
        // up to date, so plain row dots suffice).
        for (std::size_t r = 0; r < l; ++r) {
            const double* ar = a.row(r);
            double acc = 0.0;
            for (std::size_t c = 0; c < l; ++c) acc += ar[c] * xi[c];
            p[r] = acc / h;
        }
        double k = 0.0;
        for (std::size_t j = 0; j < l; ++j) k += xi[j] * p[j];
        k /= 2.0 * h;
        for (std::size_t j = 0; j < l; ++j) w[j] = p[j] - k * xi[j];
        // Rank-2 update A <- A - v w^T - w v^T.
        for (std::size_t r = 0; r < l; ++r) {
            const double vr = xi[r], wr = w[r];
            double* ar = a.row(r);
            for (std::size_t c = 0; c < l; ++c) ar[c] -= vr * w[c] + wr * xi[c];
        }
    }
    for (std::size_t j = 0; j < n; ++j) d[j] = a(j, j);
}

// Accumulates the tridiagonalization transform: returns Z with rows equal to
// the columns of the orthogonal Q satisfying A = Q T Q^T. Row layout keeps
// the QL rotations contiguous.
Matrix accumulate_transform(const Matrix& a, const std::vector<double>& hinv) {
    const std::size_t n = a.rows();
    Matrix zt = Matrix::identity(n);
    // Q^T = H_1 H_2 ... H_{n-1}; right-multiplying the identity by each
    // reflector in ascending order only ever touches the leading block.
    for (std::size_t i = 1; i < n; ++i) {
        if (hinv[i] == 0.0) continue;
        const double* v = a.row(i);  // reflector, components 0..i-1
        const std::size_t l = i;
        for (std::size_t r = 0; r < l; ++r) {
            double* zr = zt.row(r);
            double s = 0.0;
            for (std::size_t c = 0; c < l; ++c) s += zr[c] * v[c];
            s *= hinv[i];
            for (std::size_t c = 0; c < l; ++c) zr[c] -= s * v[c];
        }
    }
    return zt;
}

// QL iteration with implicit shifts on the tridiagonal (d, e); e[i] couples
// d[i] and d[i+1] here. Eigenvector rows of zt are rotated alongside.
void ql_implicit(std::vector<double>& d, std::vector<double>& e, Matrix& zt) {
    const std::size_t n = d.size();
    const double eps = std::numeric_limits<double>::epsilon();
    if (n == 0) return;
    e[n - 1] = 0.0;

    for (std::size_t l = 0; l < n; ++l) {
        int iter = 0;
        while (true) {
            std::size_t m = l;
            for (; m + 1 < n; ++m) {
                const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
                if (std::fabs(e[m]) <= eps * dd) break;
            }
            if (m == l) break;
            if (++iter > 50) throw NumericError("eig_sym: QL iteration failed to converge");

            double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            double r = std::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
            double s = 1.0, c = 1.0, p = 0.0;
            bool underflow = false;
            for (std::size_t i = m; i-- > l;) {
                double f = s * e[i];
                const double b = c * e[i];
                r = std::hypot(f, g);
                e[i + 1] = r;
                if (r == 0.0) {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                double* lo = zt.row(i);
                double* hi = zt.row(i + 1);
                for (std::size_t k = 0; k < zt.cols(); ++k) {
                    f = hi[k];
                    hi[k] = s * lo[k] + c * f;
                    lo[k] = c * lo[k] - s * f;
                }
            }
            if (underflow) continue;
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}

void sign_fix_row(double* v, std::size_t n) {
    std::size_t best = 0;
    double mag = std::fabs(v[0]);
    for (std::size_t j = 1; j < n; ++j) {
        if (std::fabs(v[j]) > mag) {
            mag = std::fabs(v[j]);
            best = j;
        }
    }
    if (v[best] < 0.0) {
        for (std::size_t j = 0; j < n; ++j) v[j] = -v[j];
    }
}

}  // namespace

EigResult eig_sym(const Matrix& m) {
    const std::size_t n = m.rows();
    if (n == 0 || m.cols() != n) throw std::invalid_argument("eig_sym: square matrix required");

    const double scale = std::max(1.0, max_abs(m));
    double asym = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            asym = std::max(asym, std::fabs(m(i, j) - m(j, i)));
        }
    }
    if (asym > 1e-8 * scale) throw NumericError("eig_sym: input is not symmetric");

    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (m(i, j) + m(j, i));
    }

    EigResult out;
    if (n == 1) {
        out.values = {a(0, 0)};
        out.vectors = Matrix(1, 1, 1.0);
        return out;
    }

    std::vector<double> d, e, hinv;
    tridiagonalize(a, d, e, hinv);
    Matrix zt = accumulate_transform(a, hinv);
    // Shift e so that e[i] couples d[i] and d[i+1].
    for (std::size_t i = 0; i + 1 < n; ++i) e[i] = e[i + 1];
    e[n - 1] = 0.0;
    ql_implicit(d, e, zt);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return d[x] < d[y]; });

    out.values.resize(n);
    out.vectors.resize(n, n);
    for (std::size_t c = 0; c < n; ++c) {
        const std::size_t src = order[c];
        out.values[c] = d[src];
        sign_fix_row(zt.row(src), n);
        const double* vec = zt.row(src);
        for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = vec[r];
    }
    return out;
}

QrResult qr(const Matrix& a, bool want_q) {
    const std::size_t m = a.rows(), p = a.cols();
    if (m < p || p == 0) throw std::invalid_argument("qr: need rows >= cols >= 1");
    const double rank_tol = 1e-12 * frobenius_norm(a);

    Matrix work = a;
    std::vector<std::vector<double>> reflectors(p);
    QrResult out;
    out.r.resize(p, p);

    for (std::size_t j = 0; j < p; ++j) {
        // Householder vector for column j below the diagonal.
        double norm2 = 0.0;
        for (std::size_t i = j; i < m; ++i) norm2 += work(i, j) * work(i, j);
        const double norm = std::sqrt(norm2);
        if (norm <= rank_tol) {
            throw RankDeficientError("qr: rank-deficient input (diagonal " + std::to_string(j) + ")");
        }
        const double x0 = work(j, j);
        const double alpha = x0 >= 0.0 ? -norm : norm;
        std::vector<double> v(m - j);
        v[0] = x0 - alpha;
        for (std::size_t i = j + 1; i < m; ++i) v[i - j] = work(i, j);
        double vnorm = 0.0;
        for (double t : v) vnorm += t * t;
        vnorm = std::sqrt(vnorm);
        for (double& t : v) t /= vnorm;

        work(j, j) = alpha;
        for (std::size_t i = j + 1; i < m; ++i) work(i, j) = 0.0;
        for (std::size_t c = j + 1; c < p; ++c) {
            double s = 0.0;
            for (std::size_t i = j; i < m; ++i) s += v[i - j] * work(i, c);
            s *= 2.0;
            for (std::size_t i = j; i < m; ++i) work(i, c) -= s * v[i - j];
        }
        reflectors[j] = std::move(v);
    }

    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = i; j < p; ++j) out.r(i, j) = work(i, j);
    }

    // Fix the diagonal sign of R; record the flips for Q.
    std::vector<bool> flip(p, false);
    for (std::size_t j = 0; j < p; ++j) {
        if (out.r(j, j) < 0.0) {
            flip[j] = true;
            for (std::size_t c = j; c < p; ++c) out.r(j, c) = -out.r(j, c);
        }
    }

    if (want_q) {
        out.q.resize(m, p);
        for (std::size_t j = 0; j < p; ++j) out.q(j, j) = 1.0;
        for (std::size_t j = p; j-- > 0;) {
            const auto& v = reflectors[j];
            for (std::size_t c = 0; c < p; ++c) {
                double s = 0.0;
                for (std::size_t i = j; i < m; ++i) s += v[i - j] * out.q(i, c);
                s *= 2.0;
                for (std::size_t i = j; i < m; ++i) out.q(i, c) -= s * v[i - j];
            }
        }
        for (std::size_t j = 0; j < p; ++j) {
            if (!flip[j]) continue;
            for (std::size_t i = 0; i < m; ++i) out.q(i, j) = -out.q(i, j);
        }
    }
    return out;
}

Matrix solve_upper(const Matrix& r, const Matrix& b) {
    const std::size_t p = r.rows();
    if (r.cols() != p || b.rows() != p) throw std::invalid_argument("solve_upper: shape mismatch");
    Matrix x = b;
    for (std::size_t i = p; i-- > 0;) {
        const double diag = r(i, i);
        if (diag == 0.0) throw NumericError("solve_upper: zero diagonal");
        for (std::size_t c = 0; c < b.cols(); ++c) {
            double acc = x(i, c);
            for (std::size_t j = i + 1; j < p; ++j) acc -= r(i, j) * x(j, c);
            x(i, c) = acc / diag;
        }
    }
    return x;
}

namespace {

Matrix orthonormalized(const Matrix& a) {
    Matrix gram;
    matmul_tn(a, a, gram);
    double dev = 0.0;
    for (std::size_t i = 0; i < gram.rows(); ++i) {
        for (std::size_t j = 0; j < gram.cols(); ++j) {
            dev = std::max(dev, std::fabs(gram(i, j) - (i == j ? 1.0 : 0.0)));
        }
    }
    if (dev <= 1e-6) return a;
    return qr(a).q;
}

}  // namespace

std::vector<double> principal_angles(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw std::invalid_argument("principal_angles: row counts differ");
    if (a.cols() == 0 || b.cols() == 0) throw std::invalid_argument("principal_angles: empty basis");
    const Matrix qa = orthonormalized(a);
    const Matrix qb = orthonormalized(b);

    Matrix m, gram;
    matmul_tn(qa, qb, m);
    matmul_tn(m, m, gram);  // (Qa^T Qb)^T (Qa^T Qb), eigenvalues are cos^2
    EigResult eig = eig_sym(gram);

    const std::size_t k = std::min(qa.cols(), qb.cols());
    std::vector<double> angles;
    angles.reserve(k);
    // Largest cosines first come from the top of the ascending eigenvalues.
    for (std::size_t i = 0; i < k; ++i) {
        const double c2 = std::clamp(eig.values[eig.values.size() - 1 - i], 0.0, 1.0);
        angles.push_back(std::acos(std::sqrt(c2)));
    }
    std::sort(angles.begin(), angles.end());
    return angles;
}

SpectralResult spectral_oracle(const Laplacian& lap, std::size_t k, bool includes_trivial) {
    const std::size_t n = lap.n();
    if (k == 0) throw std::invalid_argument("spectral_oracle: k must be positive");
    const std::size_t need = includes_trivial ? k : k + 1;
    if (need > n) throw std::invalid_argument("spectral_oracle: k too large for the graph");

    Matrix dense;
    const bool rw = lap.variant == LaplacianVariant::random_walk;
    if (rw) {
        // Solve the symmetric similarity transform D^-1/2 L D^-1/2 and map
        // the eigenvectors back with D^-1/2.
        Laplacian sym = lap;
        sym.variant = LaplacianVariant::symmetric;
        dense = sym.dense();
    } else {
        dense = lap.dense();
    }
    EigResult eig = eig_sym(dense);

    SpectralResult out;
    out.variant = lap.variant;
    out.includes_trivial = includes_trivial;
    const std::size_t first = includes_trivial ? 0 : 1;

    double vmax = 0.0;
    for (double v : eig.values) vmax = std::max(vmax, std::fabs(v));
    const double neg_tol = 1e-8 * std::max(1.0, vmax);

    out.values.resize(k);
    out.vectors.resize(n, k);
    for (std::size_t c = 0; c < k; ++c) {
        double lambda = eig.values[first + c];
        if (lambda < -neg_tol) throw NumericError("spectral_oracle: negative eigenvalue");
        out.values[c] = std::max(0.0, lambda);
        for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = eig.vectors(r, first + c);
    }
    if (rw) {
        // v = D^-1/2 u, then renormalize and restore the sign convention.
        for (std::size_t c = 0; c < k; ++c) {
            double norm2 = 0.0;
            for (std::size_t r = 0; r < n; ++r) {
                const double d = lap.degrees[r];
                const double scale = d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
                out.vectors(r, c) *= scale;
                norm2 += out.vectors(r, c) * out.vectors(r, c);
            }
            if (norm2 == 0.0) throw NumericError("spectral_oracle: zero eigenvector after rescaling");
            const double inv = 1.0 / std::sqrt(norm2);
            for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) *= inv;
        }
        for (std::size_t c = 0; c < k; ++c) {
            std::vector<double> col = out.vectors.col(c);
            sign_fix_row(col.data(), n);
            for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = col[r];
        }
    }

    const std::size_t cut = first + k;  // index of the first discarded pair
    if (cut < n) {
        out.boundary_gap = eig.values[cut] - eig.values[cut - 1];
        out.boundary_gap_degenerate = out.boundary_gap < 1e-10;
    } else {
        out.boundary_gap = 0.0;
        out.boundary_gap_degenerate = false;
    }
    return out;
}

}  // namespace sepspec
