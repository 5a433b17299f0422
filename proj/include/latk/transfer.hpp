#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "latk/crf.hpp"
#include "latk/matrix.hpp"

namespace latk {

// Hidden vectors of one domain's mini-batch grouped by gold label index.
// Entries point into the caller's hidden matrices and must stay alive for
// the duration of the call.
struct DomainPools {
    std::vector<std::vector<const double*>> by_label;
    std::size_t dim = 0;
};

// Gradient sinks aligned entry-for-entry with a DomainPools.
using PoolGrads = std::vector<std::vector<double*>>;

struct MmdConfig {
    enum class Bandwidth { fixed, median };
    Bandwidth policy = Bandwidth::median;
    double fixed_bandwidth = 1.0;
    std::vector<double> mu;            // per-label weight; 1.0 where omitted
    std::vector<std::size_t> matched;  // label indices compared across domains
};

// Biased squared-MMD estimate under an RBF kernel, diagonal terms included:
// (1/Ns^2) sum k(s,s') + (1/Nt^2) sum k(t,t') - (2/(Ns Nt)) sum k(s,t).
double mmd_sq(const std::vector<const double*>& xs, const std::vector<const double*>& xt,
              std::size_t dim, double bandwidth);
double mmd_sq(const std::vector<std::vector<double>>& xs,
              const std::vector<std::vector<double>>& xt, double bandwidth);

// Returns weight * mmd_sq and adds weight * d(mmd_sq)/d(vector) into the
// sinks. The bandwidth is a constant as far as the gradient is concerned.
// Null sinks skip the accumulation.
double mmd_sq_weighted(const std::vector<const double*>& xs,
                       const std::vector<const double*>& xt, std::size_t dim, double bandwidth,
                       double weight, const std::vector<double*>* gs,
                       const std::vector<double*>* gt);

// The bandwidth la_mmd and vanilla_mmd will use for the given batch: the
// configured constant, or the median heuristic over the union of every
// pooled vector from both domains.
double resolve_bandwidth(const DomainPools& source, const DomainPools& target,
                         const MmdConfig& config);

// sum over matched labels y with both pools non-empty of
// mu_y * mmd_sq(R_y^s, R_y^t); labels missing on either side contribute 0.
double la_mmd(const DomainPools& source, const DomainPools& target, const MmdConfig& config,
              const PoolGrads* source_grads, const PoolGrads* target_grads);

// Label-blind variant: one squared MMD between the two domains' full pools.
double vanilla_mmd(const DomainPools& source, const DomainPools& target, const MmdConfig& config,
                   const PoolGrads* source_grads, const PoolGrads* target_grads);

// L_p = ||Ws-Wt||_F^2 + ||As-At||_F^2 with gradients +2*diff toward the
// source head and -2*diff toward the target head.
struct ParamPenalty {
    double value = 0.0;
    Matrix dw_s, da_s;
    Matrix dw_t, da_t;
};

ParamPenalty param_penalty(const Matrix& ws, const Matrix& as, const Matrix& wt,
                           const Matrix& at);

// Mismatched-scheme variant: only the W columns and A entries indexed by the
// paired labels (source index, target index) are compared; everything else
// carries no penalty and gets zero gradient.
ParamPenalty param_penalty_mapped(const Matrix& ws, const Matrix& as, const Matrix& wt,
                                  const Matrix& at,
                                  const std::vector<std::pair<std::size_t, std::size_t>>& pairs);

// Numerical certificate that KL(p_s(.|H) || p_t(.|H)) stays below
// c * sqrt(||dW||_F^2 + ||dA||_F^2). The KL is exact (all m^n sequences are
// enumerated through both heads) and c = 2*sqrt(c1) with
// c1 = 2 * max_y max(||H_W(y)||_F^2, ||H_A(y)||_F^2), where H_W(y)[j][k]
// sums H[i][j] over positions labelled k and H_A(y)[p][q] counts p->q
// transitions in y.
struct BoundCertificate {
    std::size_t n = 0;
    std::size_t m = 0;
    double exact_kl = 0.0;
    double bound = 0.0;
    double constant_c = 0.0;
    bool pass = false;
};

BoundCertificate certify_kl_bound(const Matrix& h, const CrfParams& source,
                                  const CrfParams& target);

// "n m exact_kl bound c pass|fail", reals at 17 significant digits.
std::string certificate_line(const BoundCertificate& cert);

}  // namespace latk
