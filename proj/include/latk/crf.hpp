#pragma once

#include <cstddef>
#include <vector>

#include "latk/matrix.hpp"

namespace latk {

// Linear-chain CRF head. A[p][q] scores label p followed by q; the sequence
// score has no extra start or stop terms.
struct CrfParams {
    Matrix w;  // 2*d_lstm × m
    Matrix a;  // m × m
};

// E = HW, one emission row per token.
Matrix emission(const Matrix& h, const Matrix& w);

// sum_i E[i][y_i] + sum_i A[y_i][y_{i+1}]
double score(const Matrix& e, const Matrix& a, const std::vector<std::size_t>& y);

// log of the sum of exp(score) over all m^n label sequences, by the forward
// recursion in log-space with max-subtraction.
double log_partition(const Matrix& e, const Matrix& a);

// score(E,A,y) - log_partition(E,A); never positive.
double log_likelihood(const Matrix& e, const Matrix& a, const std::vector<std::size_t>& y);

// Gradients of L = -log_likelihood via forward-backward marginals:
// dL/dE[i][k] = P(y_i=k) - 1{y_i=k}, dW = H^T dE, dH = dE W^T,
// dL/dA[p][q] = sum_i P(y_i=p, y_{i+1}=q) - gold count of (p,q).
struct CrfGradients {
    Matrix dw;
    Matrix da;
    Matrix dh;
    double nll = 0.0;
};

CrfGradients crf_gradients(const Matrix& h, const Matrix& w, const Matrix& a,
                           const std::vector<std::size_t>& y);

// Max-scoring label sequence; ties resolve toward the smaller label index at
// every backtracking choice, so decoding is deterministic.
struct ViterbiResult {
    std::vector<std::size_t> labels;
    double score = 0.0;
};

ViterbiResult viterbi(const Matrix& e, const Matrix& a);

}  // namespace latk
