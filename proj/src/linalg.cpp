#include "skewimpute/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "skewimpute/errors.hpp"

namespace skewimpute {

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix cholesky_lower(const Matrix& A) {
    if (A.rows() != A.cols()) throw InvalidInput("cholesky_lower: matrix must be square");
    const int n = A.rows();
    Matrix l(n, n);
    for (int j = 0; j < n; ++j) {
        double d = A(j, j);
        for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        // Pivot measured against the column's own diagonal: diagonal scales
        // here differ by many orders of magnitude (intercept vs squared
        // covariates), and a global yardstick would flag healthy matrices.
        if (!(d > 1e-10 * std::fabs(A(j, j))) || !(d > 0.0))
            throw SingularDesign("cholesky_lower: matrix is not positive definite");
        l(j, j) = std::sqrt(d);
        for (int i = j + 1; i < n; ++i) {
            double s = A(i, j);
            for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

std::vector<double> cholesky_solve(const Matrix& L, std::vector<double> b) {
    const int n = L.rows();
    if (static_cast<int>(b.size()) != n) throw InvalidInput("cholesky_solve: dimension mismatch");
    // Forward pass in place, then the back-substitution.
    for (int i = 0; i < n; ++i) {
        double s = b[i];
        for (int k = 0; k < i; ++k) s -= L(i, k) * b[k];
        b[i] = s / L(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int k = i + 1; k < n; ++k) s -= L(k, i) * b[k];
        b[i] = s / L(i, i);
    }
    return b;
}

Matrix cholesky_inverse(const Matrix& L) {
    const int n = L.rows();
    Matrix inv(n, n);
    std::vector<double> e(n, 0.0);
    for (int j = 0; j < n; ++j) {
        e[j] = 1.0;
        const std::vector<double> col = cholesky_solve(L, e);
        for (int i = 0; i < n; ++i) inv(i, j) = col[i];
        e[j] = 0.0;
    }
    // Symmetrize: round-trip solves leave asymmetry at machine-epsilon scale.
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double v = 0.5 * (inv(i, j) + inv(j, i));
            inv(i, j) = v;
            inv(j, i) = v;
        }
    return inv;
}

}  // namespace skewimpute
