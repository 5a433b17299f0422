#include "latk/numerics.hpp"

#include <algorithm>
#include <cmath>

#include "latk/error.hpp"
#include "latk/kernels.hpp"

namespace latk {

double rbf_kernel(const double* x, const double* y, std::size_t dim, double bandwidth) {
    if (!(bandwidth > 0.0)) throw ParamError("rbf_kernel: bandwidth must be positive");
    double d2 = kernels::sqdist(x, y, dim);
    return std::exp(-d2 / (2.0 * bandwidth * bandwidth));
}

double rbf_kernel(const std::vector<double>& x, const std::vector<double>& y, double bandwidth) {
    if (x.size() != y.size()) throw ShapeError("rbf_kernel: dimension mismatch");
    return rbf_kernel(x.data(), y.data(), x.size(), bandwidth);
}

double median_bandwidth(const std::vector<const double*>& samples, std::size_t dim) {
    if (samples.size() < 2) throw ParamError("median_bandwidth: need at least 2 samples");
    std::vector<double> d2;
    d2.reserve(samples.size() * (samples.size() - 1) / 2);
    for (std::size_t i = 0; i < samples.size(); ++i)
        for (std::size_t j = i + 1; j < samples.size(); ++j)
            d2.push_back(kernels::sqdist(samples[i], samples[j], dim));
    std::size_t mid = (d2.size() - 1) / 2;
    std::nth_element(d2.begin(), d2.begin() + mid, d2.end());
    double med = d2[mid];
    if (med <= 0.0) return 1.0;
    return std::sqrt(med / 2.0);
}

double median_bandwidth(const std::vector<std::vector<double>>& samples) {
    if (samples.size() < 2) throw ParamError("median_bandwidth: need at least 2 samples");
    std::size_t dim = samples[0].size();
    std::vector<const double*> ptrs;
    ptrs.reserve(samples.size());
    for (const auto& s : samples) {
        if (s.size() != dim) throw ShapeError("median_bandwidth: ragged samples");
        ptrs.push_back(s.data());
    }
    return median_bandwidth(ptrs, dim);
}

AdaGradState::AdaGradState(std::size_t rows, std::size_t cols, double lr, double eps)
    : learning_rate(lr), epsilon_num(eps), accumulators(rows, cols) {
    if (!(lr >= 0.0)) throw ParamError("AdaGradState: learning_rate must be non-negative");
    if (!(eps > 0.0)) throw ParamError("AdaGradState: epsilon_num must be positive");
}

void adagrad_step_inplace(Matrix& param, const Matrix& grad, AdaGradState& state) {
    if (!param.same_shape(grad) || !param.same_shape(state.accumulators))
        throw ShapeError("adagrad_step: shape mismatch");
    kernels::adagrad_update(param.data.data(), state.accumulators.data.data(), grad.data.data(),
                            state.learning_rate, state.epsilon_num, param.size());
}

std::pair<Matrix, AdaGradState> adagrad_step(const Matrix& param, const Matrix& grad,
                                             const AdaGradState& state) {
    Matrix p = param;
    AdaGradState s = state;
    adagrad_step_inplace(p, grad, s);
    return {std::move(p), std::move(s)};
}

double grad_check(const std::function<double(const std::vector<double>&)>& loss_fn,
                  const std::vector<double>& analytic_grad, std::vector<double> point,
                  double step) {
    if (analytic_grad.size() != point.size())
        throw ShapeError("grad_check: gradient/point size mismatch");
    if (!(step > 0.0)) throw ParamError("grad_check: step must be positive");
    double worst = 0.0;
    for (std::size_t i = 0; i < point.size(); ++i) {
        double saved = point[i];
        point[i] = saved + step;
        double fp = loss_fn(point);
        point[i] = saved - step;
        double fm = loss_fn(point);
        point[i] = saved;
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw NumericError("grad_check: non-finite loss at probe point");
        double d = (fp - fm) / (2.0 * step);
        double a = analytic_grad[i];
        double rel = std::fabs(a - d) / std::max({1.0, std::fabs(a), std::fabs(d)});
        worst = std::max(worst, rel);
    }
    return worst;
}

}  // namespace latk
