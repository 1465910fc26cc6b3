#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace degen {

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double max_abs(std::span<const double> a) {
    double m = 0;
    for (double v : a) m = std::fmax(m, std::fabs(v));
    return m;
}

/// Compressed sparse rows; the diagonal entry is stored first in every row.
struct CsrMatrix {
    std::size_t rows = 0;
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::size_t> cols;
    std::vector<double> vals;

    void multiply(std::span<const double> x, std::span<double> y) const {
        for (std::size_t i = 0; i < rows; ++i) {
            double s = 0;
            for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += vals[k] * x[cols[k]];
            y[i] = s;
        }
    }

    double diagonal(std::size_t i) const { return vals[row_ptr[i]]; }

    /// x^T A x
    double quadratic_form(std::span<const double> x, std::span<double> scratch) const {
        multiply(x, scratch);
        return dot(x, scratch);
    }
};

struct CgResult {
    std::size_t iterations = 0;
    double relative_residual = 0;
    bool converged = false;
};

/// Jacobi-preconditioned conjugate gradients for a symmetric positive definite A;
/// `x` holds the initial guess and receives the solution.
inline CgResult conjugate_gradient(const CsrMatrix& a, std::span<const double> b, std::span<double> x,
                                   double rel_tol, std::size_t max_iter) {
    const std::size_t n = a.rows;
    std::vector<double> r(n), z(n), p(n), q(n);
    a.multiply(x, q);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
    const double bnorm = std::sqrt(dot(b, b));
    CgResult res;
    if (bnorm == 0) {
        for (auto& v : x) v = 0;
        res.converged = true;
        return res;
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / a.diagonal(i);
    p = z;
    double rz = dot(r, z);
    for (res.iterations = 0; res.iterations < max_iter; ++res.iterations) {
        res.relative_residual = std::sqrt(dot(r, r)) / bnorm;
        if (res.relative_residual <= rel_tol) {
            res.converged = true;
            return res;
        }
        a.multiply(p, q);
        const double alpha = rz / dot(p, q);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / a.diagonal(i);
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    res.relative_residual = std::sqrt(dot(r, r)) / bnorm;
    res.converged = res.relative_residual <= rel_tol;
    return res;
}

} // namespace degen
