#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "latk/matrix.hpp"

namespace latk {

// exp(-||x-y||^2 / (2 bandwidth^2)); bandwidth > 0, dims must match.
double rbf_kernel(const double* x, const double* y, std::size_t dim, double bandwidth);
double rbf_kernel(const std::vector<double>& x, const std::vector<double>& y, double bandwidth);

// sqrt(median of pairwise squared distances / 2), lower-median on even
// counts. Returns the sentinel 1.0 when the median distance is 0 (all or
// most samples identical), since a zero bandwidth is unusable.
double median_bandwidth(const std::vector<const double*>& samples, std::size_t dim);
double median_bandwidth(const std::vector<std::vector<double>>& samples);

struct AdaGradState {
    double learning_rate;
    double epsilon_num;
    Matrix accumulators;  // sum of squared gradients, parameter-shaped

    AdaGradState(std::size_t rows, std::size_t cols, double lr, double eps = 1e-8);
};

// Pure form: per entry acc' = acc + g^2, p' = p - lr*g/sqrt(acc'+eps).
std::pair<Matrix, AdaGradState> adagrad_step(const Matrix& param, const Matrix& grad,
                                             const AdaGradState& state);
// In-place form for the training loop.
void adagrad_step_inplace(Matrix& param, const Matrix& grad, AdaGradState& state);

// Max over coordinates of |analytic - central_difference| / max(1, |a|, |d|).
// Throws NumericError if the loss is non-finite at any probe point.
double grad_check(const std::function<double(const std::vector<double>&)>& loss_fn,
                  const std::vector<double>& analytic_grad, std::vector<double> point,
                  double step = 1e-5);

}  // namespace latk
