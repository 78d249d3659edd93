#pragma once

#include <vector>

namespace skewimpute {

// Dense row-major matrix. Designs here have at most a handful of columns,
// so everything below is the straightforward O(n^3) arithmetic.
class Matrix {
public:
    Matrix() : rows_(0), cols_(0) {}
    Matrix(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols, 0.0) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

    static Matrix identity(int n);

private:
    int rows_, cols_;
    std::vector<double> a_;
};

// Lower Cholesky factor of a symmetric positive definite matrix. Throws
// SingularDesign when a pivot falls below 1e-10 relative to its column's
// diagonal entry.
Matrix cholesky_lower(const Matrix& A);

// Solve A x = b given the lower factor L of A.
std::vector<double> cholesky_solve(const Matrix& L, std::vector<double> b);

// Inverse of A given its lower factor L.
Matrix cholesky_inverse(const Matrix& L);

}  // namespace skewimpute
