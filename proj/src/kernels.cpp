#include "latk/kernels.hpp"

#include <cstdlib>
#include <cstring>

#include "latk/error.hpp"

namespace latk::kernels {

bool avx2_supported() {
#if defined(__x86_64__)
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
}

namespace {

Backend pick_initial() {
    const char* env = std::getenv("LATK_KERNELS");
    if (env != nullptr && *env != '\0') {
        if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
        if (std::strcmp(env, "avx2") == 0) {
            if (!avx2_supported()) throw ConfigError("LATK_KERNELS=avx2 but cpu lacks avx2");
            return Backend::avx2;
        }
        throw ConfigError(std::string("unknown LATK_KERNELS value: ") + env);
    }
    return avx2_supported() ? Backend::avx2 : Backend::scalar;
}

Backend& current() {
    static Backend b = pick_initial();
    return b;
}

}  // namespace

Backend active_backend() { return current(); }

void set_backend(Backend b) {
    if (b == Backend::avx2 && !avx2_supported()) {
        throw ConfigError("set_backend(avx2): cpu lacks avx2");
    }
    current() = b;
}

std::string backend_name(Backend b) {
    return b == Backend::avx2 ? "avx2" : "scalar";
}

double dot(const double* x, const double* y, std::size_t n) {
    return current() == Backend::avx2 ? avx2::dot(x, y, n) : scalar::dot(x, y, n);
}

double sum(const double* x, std::size_t n) {
    return current() == Backend::avx2 ? avx2::sum(x, n) : scalar::sum(x, n);
}

double sqdist(const double* x, const double* y, std::size_t n) {
    return current() == Backend::avx2 ? avx2::sqdist(x, y, n) : scalar::sqdist(x, y, n);
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    current() == Backend::avx2 ? avx2::axpy(a, x, y, n) : scalar::axpy(a, x, y, n);
}

void scale(double a, double* x, std::size_t n) {
    current() == Backend::avx2 ? avx2::scale(a, x, n) : scalar::scale(a, x, n);
}

void adagrad_update(double* p, double* acc, const double* g, double lr,
                    double eps, std::size_t n) {
    current() == Backend::avx2 ? avx2::adagrad_update(p, acc, g, lr, eps, n)
                               : scalar::adagrad_update(p, acc, g, lr, eps, n);
}

}  // namespace latk::kernels
