#pragma once

#include <cstddef>
#include <string>

// Low-level f64 loops behind a runtime backend switch. Every routine has a
// scalar reference version; the AVX2 versions must agree with it (bit-exact
// for elementwise ops, within round-off for reductions).

namespace latk::kernels {

enum class Backend { scalar, avx2 };

bool avx2_supported();
Backend active_backend();
void set_backend(Backend b);
std::string backend_name(Backend b);

// dot(x, y) over n entries.
double dot(const double* x, const double* y, std::size_t n);
// sum of x over n entries.
double sum(const double* x, std::size_t n);
// squared euclidean distance between x and y.
double sqdist(const double* x, const double* y, std::size_t n);
// y += a * x.
void axpy(double a, const double* x, double* y, std::size_t n);
// x *= a.
void scale(double a, double* x, std::size_t n);
// acc += g*g; p -= lr * g / sqrt(acc + eps), per entry.
void adagrad_update(double* p, double* acc, const double* g, double lr,
                    double eps, std::size_t n);

namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
double sum(const double* x, std::size_t n);
double sqdist(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void scale(double a, double* x, std::size_t n);
void adagrad_update(double* p, double* acc, const double* g, double lr,
                    double eps, std::size_t n);
}  // namespace scalar

namespace avx2 {
double dot(const double* x, const double* y, std::size_t n);
double sum(const double* x, std::size_t n);
double sqdist(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void scale(double a, double* x, std::size_t n);
void adagrad_update(double* p, double* acc, const double* g, double lr,
                    double eps, std::size_t n);
}  // namespace avx2

}  // namespace latk::kernels
