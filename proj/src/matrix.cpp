#include "latk/matrix.hpp"

#include <cmath>
#include <string>

#include "latk/error.hpp"
#include "latk/kernels.hpp"

namespace latk {

namespace {

void require_shape(bool ok, const char* what) {
    if (!ok) throw ShapeError(std::string("shape mismatch in ") + what);
}

}  // namespace

void matvec(const Matrix& m, const double* x, double* out) {
    for (std::size_t i = 0; i < m.rows; ++i) out[i] = kernels::dot(m.row(i), x, m.cols);
}

void matvec_acc(const Matrix& m, const double* x, double* out) {
    for (std::size_t i = 0; i < m.rows; ++i) out[i] += kernels::dot(m.row(i), x, m.cols);
}

void matvec_t_acc(const Matrix& m, const double* x, double* out) {
    for (std::size_t i = 0; i < m.rows; ++i) kernels::axpy(x[i], m.row(i), out, m.cols);
}

void outer_acc(const double* x, const double* y, Matrix& m) {
    for (std::size_t i = 0; i < m.rows; ++i) kernels::axpy(x[i], y, m.row(i), m.cols);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    require_shape(a.cols == b.rows, "matmul");
    Matrix c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* ai = a.row(i);
        double* ci = c.row(i);
        for (std::size_t k = 0; k < a.cols; ++k) kernels::axpy(ai[k], b.row(k), ci, b.cols);
    }
    return c;
}

void matmul_at_b_acc(const Matrix& a, const Matrix& b, Matrix& c) {
    require_shape(a.rows == b.rows && c.rows == a.cols && c.cols == b.cols, "matmul_at_b_acc");
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* ai = a.row(i);
        const double* bi = b.row(i);
        for (std::size_t j = 0; j < a.cols; ++j) kernels::axpy(ai[j], bi, c.row(j), b.cols);
    }
}

Matrix matmul_abt(const Matrix& a, const Matrix& b) {
    require_shape(a.cols == b.cols, "matmul_abt");
    Matrix c(a.rows, b.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* ai = a.row(i);
        double* ci = c.row(i);
        for (std::size_t j = 0; j < b.rows; ++j) ci[j] = kernels::dot(ai, b.row(j), a.cols);
    }
    return c;
}

void add_scaled(Matrix& a, double s, const Matrix& b) {
    require_shape(a.same_shape(b), "add_scaled");
    kernels::axpy(s, b.data.data(), a.data.data(), a.size());
}

double frob_sq(const Matrix& a) { return kernels::dot(a.data.data(), a.data.data(), a.size()); }

double diff_frob_sq(const Matrix& a, const Matrix& b) {
    require_shape(a.same_shape(b), "diff_frob_sq");
    return kernels::sqdist(a.data.data(), b.data.data(), a.size());
}

bool all_finite(const Matrix& a) {
    for (double v : a.data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void require_finite(const Matrix& a, const char* what) {
    if (!all_finite(a)) throw NumericError(std::string("non-finite entry in ") + what);
}

}  // namespace latk
