#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace latk {

// Dense row-major matrix of 64-bit reals.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }
    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    std::size_t size() const { return data.size(); }
    void fill(double v) { std::fill(data.begin(), data.end(), v); }
    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

// out = M x, out[i] = dot(M.row(i), x)
void matvec(const Matrix& m, const double* x, double* out);
// out += M x
void matvec_acc(const Matrix& m, const double* x, double* out);
// out += M^T x
void matvec_t_acc(const Matrix& m, const double* x, double* out);
// M += x y^T
void outer_acc(const double* x, const double* y, Matrix& m);
// C = A B
Matrix matmul(const Matrix& a, const Matrix& b);
// C += A^T B
void matmul_at_b_acc(const Matrix& a, const Matrix& b, Matrix& c);
// C = A B^T
Matrix matmul_abt(const Matrix& a, const Matrix& b);
// A += s B
void add_scaled(Matrix& a, double s, const Matrix& b);
// sum of squared entries
double frob_sq(const Matrix& a);
// sum of squared entrywise differences
double diff_frob_sq(const Matrix& a, const Matrix& b);

bool all_finite(const Matrix& a);
// throws NumericError naming `what` when a non-finite entry exists
void require_finite(const Matrix& a, const char* what);

}  // namespace latk
