#include "latk/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "latk/error.hpp"
#include "latk/kernels.hpp"
#include "latk/numerics.hpp"

namespace latk {

namespace {

void check_pool_dims(const std::vector<const double*>& xs, const std::vector<const double*>& xt) {
    if (xs.empty() || xt.empty()) throw ParamError("mmd_sq requires two non-empty sets");
}

void check_grad_shape(const DomainPools& pools, const PoolGrads* grads, const char* side) {
    if (!grads) return;
    if (grads->size() != pools.by_label.size())
        throw ShapeError(std::string("gradient sink label count mismatch for ") + side);
    for (std::size_t y = 0; y < grads->size(); ++y)
        if ((*grads)[y].size() != pools.by_label[y].size())
            throw ShapeError(std::string("gradient sink pool size mismatch for ") + side);
}

}  // namespace

double mmd_sq(const std::vector<const double*>& xs, const std::vector<const double*>& xt,
              std::size_t dim, double bandwidth) {
    return mmd_sq_weighted(xs, xt, dim, bandwidth, 1.0, nullptr, nullptr);
}

double mmd_sq(const std::vector<std::vector<double>>& xs,
              const std::vector<std::vector<double>>& xt, double bandwidth) {
    if (xs.empty() || xt.empty()) throw ParamError("mmd_sq requires two non-empty sets");
    const std::size_t dim = xs[0].size();
    std::vector<const double*> ps, pt;
    for (const auto& v : xs) {
        if (v.size() != dim) throw ShapeError("mmd_sq sample dimensions differ");
        ps.push_back(v.data());
    }
    for (const auto& v : xt) {
        if (v.size() != dim) throw ShapeError("mmd_sq sample dimensions differ");
        pt.push_back(v.data());
    }
    return mmd_sq(ps, pt, dim, bandwidth);
}

double mmd_sq_weighted(const std::vector<const double*>& xs,
                       const std::vector<const double*>& xt, std::size_t dim, double bandwidth,
                       double weight, const std::vector<double*>* gs,
                       const std::vector<double*>* gt) {
    check_pool_dims(xs, xt);
    if (bandwidth <= 0.0) throw ParamError("bandwidth must be positive");
    const std::size_t ns = xs.size(), nt = xt.size();
    const double inv_ss = 1.0 / (static_cast<double>(ns) * static_cast<double>(ns));
    const double inv_tt = 1.0 / (static_cast<double>(nt) * static_cast<double>(nt));
    const double inv_st = 2.0 / (static_cast<double>(ns) * static_cast<double>(nt));

    double kss = 0.0, ktt = 0.0, kst = 0.0;
    for (std::size_t i = 0; i < ns; ++i)
        for (std::size_t j = 0; j < ns; ++j) kss += rbf_kernel(xs[i], xs[j], dim, bandwidth);
    for (std::size_t i = 0; i < nt; ++i)
        for (std::size_t j = 0; j < nt; ++j) ktt += rbf_kernel(xt[i], xt[j], dim, bandwidth);
    for (std::size_t i = 0; i < ns; ++i)
        for (std::size_t j = 0; j < nt; ++j) kst += rbf_kernel(xs[i], xt[j], dim, bandwidth);
    double value = inv_ss * kss + inv_tt * ktt - inv_st * kst;

    if (gs || gt) {
        const double inv_bw2 = 1.0 / (bandwidth * bandwidth);
        std::vector<double> acc(dim);
        auto pull = [&](const double* from, const double* to, double coef) {
            // adds coef * k(from,to) * (to - from) / bw^2 into acc
            double k = rbf_kernel(from, to, dim, bandwidth) * coef * inv_bw2;
            for (std::size_t j = 0; j < dim; ++j) acc[j] += k * (to[j] - from[j]);
        };
        if (gs) {
            for (std::size_t a = 0; a < ns; ++a) {
                std::fill(acc.begin(), acc.end(), 0.0);
                for (std::size_t j = 0; j < ns; ++j) pull(xs[a], xs[j], 2.0 * inv_ss);
                for (std::size_t j = 0; j < nt; ++j) pull(xs[a], xt[j], -inv_st);
                kernels::axpy(weight, acc.data(), (*gs)[a], dim);
            }
        }
        if (gt) {
            for (std::size_t b = 0; b < nt; ++b) {
                std::fill(acc.begin(), acc.end(), 0.0);
                for (std::size_t j = 0; j < nt; ++j) pull(xt[b], xt[j], 2.0 * inv_tt);
                for (std::size_t i = 0; i < ns; ++i) pull(xt[b], xs[i], -inv_st);
                kernels::axpy(weight, acc.data(), (*gt)[b], dim);
            }
        }
    }
    return weight * value;
}

double resolve_bandwidth(const DomainPools& source, const DomainPools& target,
                         const MmdConfig& config) {
    if (config.policy == MmdConfig::Bandwidth::fixed) {
        if (config.fixed_bandwidth <= 0.0) throw ParamError("bandwidth must be positive");
        return config.fixed_bandwidth;
    }
    std::vector<const double*> all;
    for (const auto& pool : source.by_label) all.insert(all.end(), pool.begin(), pool.end());
    for (const auto& pool : target.by_label) all.insert(all.end(), pool.begin(), pool.end());
    if (all.size() < 2) return 1.0;
    return median_bandwidth(all, source.dim);
}

namespace {

double mmd_over_pools(const DomainPools& source, const DomainPools& target,
                      const MmdConfig& config, const PoolGrads* source_grads,
                      const PoolGrads* target_grads, bool label_aware) {
    if (source.dim != target.dim) throw ShapeError("pool dimensions differ across domains");
    check_grad_shape(source, source_grads, "source");
    check_grad_shape(target, target_grads, "target");
    for (double w : config.mu)
        if (w < 0.0) throw ParamError("label weights must be non-negative");

    double bandwidth = resolve_bandwidth(source, target, config);

    if (!label_aware) {
        std::vector<const double*> xs, xt;
        std::vector<double*> gs, gt;
        for (std::size_t y = 0; y < source.by_label.size(); ++y) {
            const auto& pool = source.by_label[y];
            xs.insert(xs.end(), pool.begin(), pool.end());
            if (source_grads)
                gs.insert(gs.end(), (*source_grads)[y].begin(), (*source_grads)[y].end());
        }
        for (std::size_t y = 0; y < target.by_label.size(); ++y) {
            const auto& pool = target.by_label[y];
            xt.insert(xt.end(), pool.begin(), pool.end());
            if (target_grads)
                gt.insert(gt.end(), (*target_grads)[y].begin(), (*target_grads)[y].end());
        }
        if (xs.empty() || xt.empty()) return 0.0;
        return mmd_sq_weighted(xs, xt, source.dim, bandwidth, 1.0,
                               source_grads ? &gs : nullptr, target_grads ? &gt : nullptr);
    }

    double total = 0.0;
    for (std::size_t y : config.matched) {
        if (y >= source.by_label.size() || y >= target.by_label.size())
            throw ParamError("matched label index out of range");
        const auto& ps = source.by_label[y];
        const auto& pt = target.by_label[y];
        if (ps.empty() || pt.empty()) continue;
        double mu = y < config.mu.size() ? config.mu[y] : 1.0;
        if (mu == 0.0) continue;
        total += mmd_sq_weighted(ps, pt, source.dim, bandwidth, mu,
                                 source_grads ? &(*source_grads)[y] : nullptr,
                                 target_grads ? &(*target_grads)[y] : nullptr);
    }
    return total;
}

}  // namespace

double la_mmd(const DomainPools& source, const DomainPools& target, const MmdConfig& config,
              const PoolGrads* source_grads, const PoolGrads* target_grads) {
    return mmd_over_pools(source, target, config, source_grads, target_grads, true);
}

double vanilla_mmd(const DomainPools& source, const DomainPools& target, const MmdConfig& config,
                   const PoolGrads* source_grads, const PoolGrads* target_grads) {
    return mmd_over_pools(source, target, config, source_grads, target_grads, false);
}

ParamPenalty param_penalty(const Matrix& ws, const Matrix& as, const Matrix& wt,
                           const Matrix& at) {
    if (!ws.same_shape(wt) || !as.same_shape(at))
        throw ConfigError("CRF heads must share shapes for the parameter penalty");
    ParamPenalty p;
    p.value = diff_frob_sq(ws, wt) + diff_frob_sq(as, at);
    p.dw_s = ws;
    add_scaled(p.dw_s, -1.0, wt);
    p.dw_t = p.dw_s;
    for (auto& v : p.dw_s.data) v *= 2.0;
    for (auto& v : p.dw_t.data) v *= -2.0;
    p.da_s = as;
    add_scaled(p.da_s, -1.0, at);
    p.da_t = p.da_s;
    for (auto& v : p.da_s.data) v *= 2.0;
    for (auto& v : p.da_t.data) v *= -2.0;
    return p;
}

ParamPenalty param_penalty_mapped(const Matrix& ws, const Matrix& as, const Matrix& wt,
                                  const Matrix& at,
                                  const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
    if (ws.rows != wt.rows) throw ConfigError("CRF heads must share the hidden dimension");
    for (const auto& [p, q] : pairs)
        if (p >= ws.cols || q >= wt.cols) throw ConfigError("label pair index out of range");
    ParamPenalty out;
    out.dw_s = Matrix(ws.rows, ws.cols);
    out.dw_t = Matrix(wt.rows, wt.cols);
    out.da_s = Matrix(as.rows, as.cols);
    out.da_t = Matrix(at.rows, at.cols);
    for (const auto& [p, q] : pairs) {
        for (std::size_t j = 0; j < ws.rows; ++j) {
            double d = ws(j, p) - wt(j, q);
            out.value += d * d;
            out.dw_s(j, p) += 2.0 * d;
            out.dw_t(j, q) -= 2.0 * d;
        }
    }
    for (const auto& [p, q] : pairs) {
        for (const auto& [p2, q2] : pairs) {
            double d = as(p, p2) - at(q, q2);
            out.value += d * d;
            out.da_s(p, p2) += 2.0 * d;
            out.da_t(q, q2) -= 2.0 * d;
        }
    }
    return out;
}

BoundCertificate certify_kl_bound(const Matrix& h, const CrfParams& source,
                                  const CrfParams& target) {
    const std::size_t n = h.rows, m = source.a.rows;
    if (n == 0) throw ShapeError("empty hidden sequence");
    if (n > 8 || m > 5) throw SizeError("certifier handles only n <= 8 and m <= 5");
    if (source.a.cols != m || target.a.rows != m || target.a.cols != m)
        throw ShapeError("transition matrices must be square and equal-sized");
    if (source.w.rows != h.cols || target.w.rows != h.cols || source.w.cols != m ||
        target.w.cols != m)
        throw ShapeError("emission weights disagree with hidden dim or label count");

    Matrix es = emission(h, source.w);
    Matrix et = emission(h, target.w);
    double lzs = log_partition(es, source.a);
    double lzt = log_partition(et, target.a);

    double kl = 0.0;
    double c1 = 0.0;
    std::vector<double> col(h.cols);
    std::vector<double> counts(m * m);
    std::vector<std::size_t> y(n, 0);
    while (true) {
        double ss = 0.0, st = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            ss += es(i, y[i]);
            st += et(i, y[i]);
        }
        for (std::size_t i = 0; i + 1 < n; ++i) {
            ss += source.a(y[i], y[i + 1]);
            st += target.a(y[i], y[i + 1]);
        }
        double lps = ss - lzs, lpt = st - lzt;
        kl += std::exp(lps) * (lps - lpt);

        double hw = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            std::fill(col.begin(), col.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i)
                if (y[i] == k) kernels::axpy(1.0, h.row(i), col.data(), h.cols);
            hw += kernels::dot(col.data(), col.data(), h.cols);
        }
        std::fill(counts.begin(), counts.end(), 0.0);
        for (std::size_t i = 0; i + 1 < n; ++i) counts[y[i] * m + y[i + 1]] += 1.0;
        double ha = kernels::dot(counts.data(), counts.data(), counts.size());
        c1 = std::max(c1, std::max(hw, ha));

        std::size_t i = n;
        while (i > 0 && ++y[i - 1] == m) y[--i] = 0;
        if (i == 0) break;
    }

    BoundCertificate cert;
    cert.n = n;
    cert.m = m;
    cert.exact_kl = kl;
    cert.constant_c = 2.0 * std::sqrt(2.0 * c1);
    cert.bound =
        cert.constant_c * std::sqrt(diff_frob_sq(source.w, target.w) +
                                    diff_frob_sq(source.a, target.a));
    cert.pass = cert.exact_kl <= cert.bound + 1e-9;
    return cert;
}

std::string certificate_line(const BoundCertificate& cert) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%zu %zu %.17g %.17g %.17g %s", cert.n, cert.m,
                  cert.exact_kl, cert.bound, cert.constant_c, cert.pass ? "pass" : "fail");
    return buf;
}

}  // namespace latk
