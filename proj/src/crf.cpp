#include "latk/crf.hpp"

#include <algorithm>
#include <cmath>

#include "latk/error.hpp"

namespace latk {

namespace {

double log_sum_exp(const double* x, std::size_t n) {
    double mx = x[0];
    for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, x[i]);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::exp(x[i] - mx);
    return mx + std::log(s);
}

void check_chain(const Matrix& e, const Matrix& a) {
    if (e.rows == 0) throw ShapeError("empty emission matrix");
    if (a.rows != a.cols) throw ShapeError("transition matrix must be square");
    if (a.rows != e.cols) throw ShapeError("emission and transition label counts differ");
}

void check_labels(const Matrix& e, const std::vector<std::size_t>& y) {
    if (y.size() != e.rows) throw ShapeError("label sequence length differs from emissions");
    for (std::size_t v : y)
        if (v >= e.cols) throw ParamError("label index out of range");
}

// alpha[i][k] = log sum of exp(score of all prefixes ending in label k at i)
Matrix forward_lattice(const Matrix& e, const Matrix& a) {
    const std::size_t n = e.rows, m = e.cols;
    Matrix alpha(n, m);
    for (std::size_t k = 0; k < m; ++k) alpha(0, k) = e(0, k);
    std::vector<double> tmp(m);
    for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t k = 0; k < m; ++k) {
            for (std::size_t p = 0; p < m; ++p) tmp[p] = alpha(i - 1, p) + a(p, k);
            alpha(i, k) = e(i, k) + log_sum_exp(tmp.data(), m);
        }
    }
    return alpha;
}

}  // namespace

Matrix emission(const Matrix& h, const Matrix& w) {
    return matmul(h, w);
}

double score(const Matrix& e, const Matrix& a, const std::vector<std::size_t>& y) {
    check_chain(e, a);
    check_labels(e, y);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += e(i, y[i]);
    for (std::size_t i = 0; i + 1 < y.size(); ++i) s += a(y[i], y[i + 1]);
    return s;
}

double log_partition(const Matrix& e, const Matrix& a) {
    check_chain(e, a);
    Matrix alpha = forward_lattice(e, a);
    return log_sum_exp(alpha.row(e.rows - 1), e.cols);
}

double log_likelihood(const Matrix& e, const Matrix& a, const std::vector<std::size_t>& y) {
    return score(e, a, y) - log_partition(e, a);
}

CrfGradients crf_gradients(const Matrix& h, const Matrix& w, const Matrix& a,
                           const std::vector<std::size_t>& y) {
    Matrix e = emission(h, w);
    check_chain(e, a);
    check_labels(e, y);
    const std::size_t n = e.rows, m = e.cols;

    Matrix alpha = forward_lattice(e, a);
    Matrix beta(n, m);
    std::vector<double> tmp(m);
    for (std::size_t i = n - 1; i-- > 0;) {
        for (std::size_t p = 0; p < m; ++p) {
            for (std::size_t q = 0; q < m; ++q)
                tmp[q] = a(p, q) + e(i + 1, q) + beta(i + 1, q);
            beta(i, p) = log_sum_exp(tmp.data(), m);
        }
    }
    double log_z = log_sum_exp(alpha.row(n - 1), m);

    Matrix de(n, m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < m; ++k)
            de(i, k) = std::exp(alpha(i, k) + beta(i, k) - log_z) - (y[i] == k ? 1.0 : 0.0);

    CrfGradients g;
    g.da = Matrix(m, m);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t p = 0; p < m; ++p)
            for (std::size_t q = 0; q < m; ++q)
                g.da(p, q) += std::exp(alpha(i, p) + a(p, q) + e(i + 1, q) + beta(i + 1, q) - log_z);
        g.da(y[i], y[i + 1]) -= 1.0;
    }

    g.dw = Matrix(w.rows, w.cols);
    matmul_at_b_acc(h, de, g.dw);
    g.dh = matmul_abt(de, w);
    g.nll = log_z - score(e, a, y);
    return g;
}

ViterbiResult viterbi(const Matrix& e, const Matrix& a) {
    check_chain(e, a);
    const std::size_t n = e.rows, m = e.cols;
    Matrix delta(n, m);
    std::vector<std::vector<std::size_t>> back(n, std::vector<std::size_t>(m, 0));
    for (std::size_t k = 0; k < m; ++k) delta(0, k) = e(0, k);
    for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t k = 0; k < m; ++k) {
            double best = delta(i - 1, 0) + a(0, k);
            std::size_t arg = 0;
            for (std::size_t p = 1; p < m; ++p) {
                double v = delta(i - 1, p) + a(p, k);
                if (v > best) {
                    best = v;
                    arg = p;
                }
            }
            delta(i, k) = e(i, k) + best;
            back[i][k] = arg;
        }
    }

    ViterbiResult r;
    r.labels.assign(n, 0);
    std::size_t last = 0;
    double best = delta(n - 1, 0);
    for (std::size_t k = 1; k < m; ++k) {
        if (delta(n - 1, k) > best) {
            best = delta(n - 1, k);
            last = k;
        }
    }
    r.score = best;
    r.labels[n - 1] = last;
    for (std::size_t i = n - 1; i > 0; --i) r.labels[i - 1] = back[i][r.labels[i]];
    return r;
}

}  // namespace latk
