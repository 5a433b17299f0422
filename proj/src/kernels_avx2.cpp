#include <cstddef>

#include "latk/error.hpp"
#include "latk/kernels.hpp"

#if defined(__x86_64__)

#include <immintrin.h>

namespace latk::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sw = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sw));
}

}  // namespace

double dot(const double* x, const double* y, std::size_t n) {
    __m256d vacc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vx = _mm256_loadu_pd(x + i);
        __m256d vy = _mm256_loadu_pd(y + i);
        vacc = _mm256_add_pd(vacc, _mm256_mul_pd(vx, vy));
    }
    double acc = hsum(vacc);
    for (; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

double sum(const double* x, std::size_t n) {
    __m256d vacc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        vacc = _mm256_add_pd(vacc, _mm256_loadu_pd(x + i));
    }
    double acc = hsum(vacc);
    for (; i < n; ++i) acc += x[i];
    return acc;
}

double sqdist(const double* x, const double* y, std::size_t n) {
    __m256d vacc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vd = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        vacc = _mm256_add_pd(vacc, _mm256_mul_pd(vd, vd));
    }
    double acc = hsum(vacc);
    for (; i < n; ++i) {
        double d = x[i] - y[i];
        acc += d * d;
    }
    return acc;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_add_pd(vy, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void scale(double a, double* x, std::size_t n) {
    __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    }
    for (; i < n; ++i) x[i] *= a;
}

void adagrad_update(double* p, double* acc, const double* g, double lr,
                    double eps, std::size_t n) {
    __m256d vlr = _mm256_set1_pd(lr);
    __m256d veps = _mm256_set1_pd(eps);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vg = _mm256_loadu_pd(g + i);
        __m256d va = _mm256_loadu_pd(acc + i);
        va = _mm256_add_pd(va, _mm256_mul_pd(vg, vg));
        _mm256_storeu_pd(acc + i, va);
        __m256d denom = _mm256_sqrt_pd(_mm256_add_pd(va, veps));
        __m256d step = _mm256_div_pd(_mm256_mul_pd(vlr, vg), denom);
        _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
    }
    scalar::adagrad_update(p + i, acc + i, g + i, lr, eps, n - i);
}

}  // namespace latk::kernels::avx2

#else

namespace latk::kernels::avx2 {

namespace {
[[noreturn]] void unavailable() { throw latk::Error("avx2 backend not built on this platform"); }
}  // namespace

double dot(const double*, const double*, std::size_t) { unavailable(); }
double sum(const double*, std::size_t) { unavailable(); }
double sqdist(const double*, const double*, std::size_t) { unavailable(); }
void axpy(double, const double*, double*, std::size_t) { unavailable(); }
void scale(double, double*, std::size_t) { unavailable(); }
void adagrad_update(double*, double*, const double*, double, double, std::size_t) { unavailable(); }

}  // namespace latk::kernels::avx2

#endif
