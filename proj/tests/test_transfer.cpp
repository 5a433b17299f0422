#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "latk/error.hpp"
#include "latk/numerics.hpp"
#include "latk/rng.hpp"
#include "latk/transfer.hpp"
#include "oracles.hpp"

using namespace latk;

namespace {

std::vector<std::vector<double>> random_vectors(Rng& rng, std::size_t count, std::size_t dim,
                                                double lo = -1.0, double hi = 1.0) {
    std::vector<std::vector<double>> out(count, std::vector<double>(dim));
    for (auto& v : out)
        for (auto& x : v) x = rng.uniform(lo, hi);
    return out;
}

std::vector<const double*> ptrs(const std::vector<std::vector<double>>& vs) {
    std::vector<const double*> p;
    for (const auto& v : vs) p.push_back(v.data());
    return p;
}

Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c, double lo = -1.0, double hi = 1.0) {
    Matrix m(r, c);
    for (auto& v : m.data) v = rng.uniform(lo, hi);
    return m;
}

// pools over `m` labels; storage[domain][label] stays alive for the caller
struct PoolFixture {
    std::vector<std::vector<std::vector<double>>> source, target;
    DomainPools sp, tp;

    PoolFixture(Rng& rng, std::size_t m, std::size_t dim,
                const std::vector<std::size_t>& source_counts,
                const std::vector<std::size_t>& target_counts) {
        sp.dim = tp.dim = dim;
        sp.by_label.resize(m);
        tp.by_label.resize(m);
        for (std::size_t y = 0; y < m; ++y) {
            source.push_back(random_vectors(rng, source_counts[y], dim));
            target.push_back(random_vectors(rng, target_counts[y], dim));
        }
        for (std::size_t y = 0; y < m; ++y) {
            sp.by_label[y] = ptrs(source[y]);
            tp.by_label[y] = ptrs(target[y]);
        }
    }
};

}  // namespace

TEST_SUITE("transfer") {

TEST_CASE("mmd_sq agrees with a naive double-loop evaluation") {
    Rng rng(80);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t dim = 1 + rng.uniform_index(6);
        auto xs = random_vectors(rng, 1 + rng.uniform_index(7), dim);
        auto xt = random_vectors(rng, 1 + rng.uniform_index(7), dim);
        double bw = rng.uniform(0.4, 2.0);
        CHECK(std::fabs(mmd_sq(xs, xt, bw) - oracles::naive_mmd_sq(xs, xt, bw)) < 1e-10);
    }
}

TEST_CASE("mmd_sq closed forms and invariants") {
    Rng rng(81);
    auto xs = random_vectors(rng, 6, 4);
    CHECK(std::fabs(mmd_sq(xs, xs, 1.0)) <= 1e-12);

    auto x = random_vectors(rng, 1, 4);
    auto y = random_vectors(rng, 1, 4);
    double k = rbf_kernel(x[0], y[0], 0.8);
    CHECK(mmd_sq(x, y, 0.8) == doctest::Approx(2.0 - 2.0 * k).epsilon(1e-12));

    auto xt = random_vectors(rng, 4, 4);
    CHECK(mmd_sq(xs, xt, 1.2) == doctest::Approx(mmd_sq(xt, xs, 1.2)).epsilon(1e-13));
    CHECK(mmd_sq(xs, xt, 1.2) >= -1e-12);

    CHECK_THROWS_AS(mmd_sq({}, xt, 1.0), ParamError);
    CHECK_THROWS_AS(mmd_sq(xs, {}, 1.0), ParamError);
    CHECK_THROWS_AS(mmd_sq(xs, xt, 0.0), ParamError);
    auto bad = random_vectors(rng, 2, 3);
    CHECK_THROWS_AS(mmd_sq(xs, bad, 1.0), ShapeError);
}

TEST_CASE("la_mmd adds weighted per-label terms and skips empty pools") {
    Rng rng(82);
    PoolFixture f(rng, 3, 4, {3, 4, 2}, {2, 3, 0});
    MmdConfig cfg;
    cfg.policy = MmdConfig::Bandwidth::fixed;
    cfg.fixed_bandwidth = 1.1;
    cfg.matched = {0, 1, 2};
    cfg.mu = {1.0, 2.5, 7.0};

    double expect = oracles::naive_mmd_sq(f.source[0], f.target[0], 1.1) +
                    2.5 * oracles::naive_mmd_sq(f.source[1], f.target[1], 1.1);
    // label 2 has no target pool, so its term vanishes despite mu = 7
    CHECK(la_mmd(f.sp, f.tp, cfg, nullptr, nullptr) ==
          doctest::Approx(expect).epsilon(1e-12));

    cfg.matched = {1};
    CHECK(la_mmd(f.sp, f.tp, cfg, nullptr, nullptr) ==
          doctest::Approx(2.5 * oracles::naive_mmd_sq(f.source[1], f.target[1], 1.1))
              .epsilon(1e-12));

    cfg.matched = {0, 1};
    cfg.mu = {0.0};  // mu 0 silences label 0, label 1 defaults to weight 1
    CHECK(la_mmd(f.sp, f.tp, cfg, nullptr, nullptr) ==
          doctest::Approx(oracles::naive_mmd_sq(f.source[1], f.target[1], 1.1)).epsilon(1e-12));

    cfg.mu = {-0.5};
    CHECK_THROWS_AS(la_mmd(f.sp, f.tp, cfg, nullptr, nullptr), ParamError);
    cfg.mu.clear();
    cfg.matched = {5};
    CHECK_THROWS_AS(la_mmd(f.sp, f.tp, cfg, nullptr, nullptr), ParamError);
}

TEST_CASE("la_mmd is invariant to permutations within a pool") {
    Rng rng(83);
    PoolFixture f(rng, 2, 3, {4, 3}, {3, 2});
    MmdConfig cfg;
    cfg.matched = {0, 1};
    double before = la_mmd(f.sp, f.tp, cfg, nullptr, nullptr);
    std::reverse(f.sp.by_label[0].begin(), f.sp.by_label[0].end());
    std::swap(f.tp.by_label[1][0], f.tp.by_label[1][1]);
    CHECK(la_mmd(f.sp, f.tp, cfg, nullptr, nullptr) == doctest::Approx(before).epsilon(1e-13));
}

TEST_CASE("median bandwidth policy freezes the union median") {
    Rng rng(84);
    PoolFixture f(rng, 2, 3, {3, 2}, {2, 2});
    MmdConfig med;
    med.matched = {0, 1};
    std::vector<const double*> all;
    for (const auto& p : f.sp.by_label) all.insert(all.end(), p.begin(), p.end());
    for (const auto& p : f.tp.by_label) all.insert(all.end(), p.begin(), p.end());
    MmdConfig fixed;
    fixed.matched = {0, 1};
    fixed.policy = MmdConfig::Bandwidth::fixed;
    fixed.fixed_bandwidth = median_bandwidth(all, 3);
    CHECK(resolve_bandwidth(f.sp, f.tp, med) == fixed.fixed_bandwidth);
    CHECK(la_mmd(f.sp, f.tp, med, nullptr, nullptr) ==
          doctest::Approx(la_mmd(f.sp, f.tp, fixed, nullptr, nullptr)).epsilon(1e-13));
}

TEST_CASE("la_mmd gradient matches finite differences") {
    Rng rng(85);
    const std::size_t m = 2, dim = 3;
    PoolFixture f(rng, m, dim, {3, 2}, {2, 2});
    MmdConfig cfg;
    cfg.policy = MmdConfig::Bandwidth::fixed;
    cfg.fixed_bandwidth = 0.9;
    cfg.matched = {0, 1};
    cfg.mu = {1.0, 1.7};

    std::vector<double> point;
    for (const auto& dom : {f.source, f.target})
        for (const auto& pool : dom)
            for (const auto& v : pool) point.insert(point.end(), v.begin(), v.end());

    auto loss_fn = [&](const std::vector<double>& v) {
        DomainPools sp, tp;
        sp.dim = tp.dim = dim;
        sp.by_label.resize(m);
        tp.by_label.resize(m);
        std::size_t off = 0;
        for (std::size_t y = 0; y < m; ++y)
            for (std::size_t i = 0; i < f.source[y].size(); ++i, off += dim)
                sp.by_label[y].push_back(v.data() + off);
        for (std::size_t y = 0; y < m; ++y)
            for (std::size_t i = 0; i < f.target[y].size(); ++i, off += dim)
                tp.by_label[y].push_back(v.data() + off);
        return la_mmd(sp, tp, cfg, nullptr, nullptr);
    };

    std::vector<double> grad(point.size(), 0.0);
    PoolGrads sg(m), tg(m);
    std::size_t off = 0;
    for (std::size_t y = 0; y < m; ++y)
        for (std::size_t i = 0; i < f.source[y].size(); ++i, off += dim)
            sg[y].push_back(grad.data() + off);
    for (std::size_t y = 0; y < m; ++y)
        for (std::size_t i = 0; i < f.target[y].size(); ++i, off += dim)
            tg[y].push_back(grad.data() + off);

    la_mmd(f.sp, f.tp, cfg, &sg, &tg);
    CHECK(grad_check(loss_fn, grad, point) < 1e-4);
}

TEST_CASE("vanilla_mmd ignores the label partition") {
    Rng rng(86);
    PoolFixture f(rng, 3, 4, {2, 3, 1}, {1, 2, 2});
    MmdConfig cfg;
    cfg.policy = MmdConfig::Bandwidth::fixed;
    cfg.fixed_bandwidth = 1.3;

    std::vector<std::vector<double>> xs, xt;
    for (const auto& pool : f.source) xs.insert(xs.end(), pool.begin(), pool.end());
    for (const auto& pool : f.target) xt.insert(xt.end(), pool.begin(), pool.end());
    CHECK(vanilla_mmd(f.sp, f.tp, cfg, nullptr, nullptr) ==
          doctest::Approx(oracles::naive_mmd_sq(xs, xt, 1.3)).epsilon(1e-12));

    // with every token under one label, the label-aware sum collapses to it
    PoolFixture g(rng, 2, 3, {4, 0}, {3, 0});
    cfg.matched = {0, 1};
    CHECK(la_mmd(g.sp, g.tp, cfg, nullptr, nullptr) ==
          doctest::Approx(vanilla_mmd(g.sp, g.tp, cfg, nullptr, nullptr)).epsilon(1e-12));

    DomainPools empty;
    empty.dim = 4;
    empty.by_label.resize(3);
    CHECK(vanilla_mmd(empty, f.tp, cfg, nullptr, nullptr) == 0.0);
}

TEST_CASE("vanilla_mmd gradient matches finite differences") {
    Rng rng(87);
    const std::size_t m = 2, dim = 3;
    PoolFixture f(rng, m, dim, {2, 2}, {3, 1});
    MmdConfig cfg;
    cfg.policy = MmdConfig::Bandwidth::fixed;
    cfg.fixed_bandwidth = 1.0;

    std::vector<double> point;
    for (const auto& dom : {f.source, f.target})
        for (const auto& pool : dom)
            for (const auto& v : pool) point.insert(point.end(), v.begin(), v.end());

    auto loss_fn = [&](const std::vector<double>& v) {
        DomainPools sp, tp;
        sp.dim = tp.dim = dim;
        sp.by_label.resize(m);
        tp.by_label.resize(m);
        std::size_t off = 0;
        for (std::size_t y = 0; y < m; ++y)
            for (std::size_t i = 0; i < f.source[y].size(); ++i, off += dim)
                sp.by_label[y].push_back(v.data() + off);
        for (std::size_t y = 0; y < m; ++y)
            for (std::size_t i = 0; i < f.target[y].size(); ++i, off += dim)
                tp.by_label[y].push_back(v.data() + off);
        return vanilla_mmd(sp, tp, cfg, nullptr, nullptr);
    };

    std::vector<double> grad(point.size(), 0.0);
    PoolGrads sg(m), tg(m);
    std::size_t off = 0;
    for (std::size_t y = 0; y < m; ++y)
        for (std::size_t i = 0; i < f.source[y].size(); ++i, off += dim)
            sg[y].push_back(grad.data() + off);
    for (std::size_t y = 0; y < m; ++y)
        for (std::size_t i = 0; i < f.target[y].size(); ++i, off += dim)
            tg[y].push_back(grad.data() + off);

    vanilla_mmd(f.sp, f.tp, cfg, &sg, &tg);
    CHECK(grad_check(loss_fn, grad, point) < 1e-4);
}

TEST_CASE("param_penalty values and gradients") {
    Rng rng(88);
    Matrix ws = random_matrix(rng, 4, 3), as = random_matrix(rng, 3, 3);
    CHECK(param_penalty(ws, as, ws, as).value == 0.0);

    Matrix wt = ws, at = as;
    wt(2, 1) += 3.0;
    ParamPenalty p = param_penalty(ws, as, wt, at);
    CHECK(p.value == doctest::Approx(9.0).epsilon(1e-12));
    CHECK(p.dw_s(2, 1) == doctest::Approx(-6.0).epsilon(1e-12));
    CHECK(p.dw_t(2, 1) == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(p.dw_s(0, 0) == 0.0);

    // scaling every difference by t scales the penalty by t^2
    Matrix wt2 = random_matrix(rng, 4, 3), at2 = random_matrix(rng, 3, 3);
    double base = param_penalty(ws, as, wt2, at2).value;
    Matrix wh = ws, ah = as;
    for (std::size_t i = 0; i < wh.size(); ++i) wh.data[i] += 0.5 * (wt2.data[i] - ws.data[i]);
    for (std::size_t i = 0; i < ah.size(); ++i) ah.data[i] += 0.5 * (at2.data[i] - as.data[i]);
    CHECK(param_penalty(ws, as, wh, ah).value == doctest::Approx(0.25 * base).epsilon(1e-12));

    CHECK_THROWS_AS(param_penalty(ws, as, random_matrix(rng, 4, 2), at2), ConfigError);

    std::vector<double> point;
    for (const Matrix* mm : {&ws, &as, &wt2, &at2})
        point.insert(point.end(), mm->data.begin(), mm->data.end());
    auto loss_fn = [&](const std::vector<double>& v) {
        Matrix a = ws, b = as, c = wt2, d = at2;
        std::size_t off = 0;
        for (Matrix* mm : {&a, &b, &c, &d}) {
            std::copy(v.begin() + off, v.begin() + off + mm->size(), mm->data.begin());
            off += mm->size();
        }
        return param_penalty(a, b, c, d).value;
    };
    ParamPenalty g = param_penalty(ws, as, wt2, at2);
    std::vector<double> analytic;
    for (const Matrix* mm : {&g.dw_s, &g.da_s, &g.dw_t, &g.da_t})
        analytic.insert(analytic.end(), mm->data.begin(), mm->data.end());
    CHECK(grad_check(loss_fn, analytic, point) < 1e-4);
}

TEST_CASE("mapped param_penalty covers only paired labels") {
    Rng rng(89);
    Matrix ws = random_matrix(rng, 3, 4), as = random_matrix(rng, 4, 4);
    Matrix wt = random_matrix(rng, 3, 3), at = random_matrix(rng, 3, 3);
    std::vector<std::pair<std::size_t, std::size_t>> pairs{{0, 0}, {2, 1}};

    double expect = 0.0;
    for (auto [p, q] : pairs)
        for (std::size_t j = 0; j < 3; ++j)
            expect += (ws(j, p) - wt(j, q)) * (ws(j, p) - wt(j, q));
    for (auto [p, q] : pairs)
        for (auto [p2, q2] : pairs) expect += (as(p, p2) - at(q, q2)) * (as(p, p2) - at(q, q2));

    ParamPenalty m = param_penalty_mapped(ws, as, wt, at, pairs);
    CHECK(m.value == doctest::Approx(expect).epsilon(1e-12));
    // unmatched labels receive no gradient
    CHECK(m.dw_s(0, 1) == 0.0);
    CHECK(m.dw_s(0, 3) == 0.0);
    CHECK(m.da_t(2, 2) == 0.0);

    // identity pairing over equal schemes reproduces the full penalty
    Matrix wt4 = random_matrix(rng, 3, 4), at4 = random_matrix(rng, 4, 4);
    std::vector<std::pair<std::size_t, std::size_t>> all{{0, 0}, {1, 1}, {2, 2}, {3, 3}};
    CHECK(param_penalty_mapped(ws, as, wt4, at4, all).value ==
          doctest::Approx(param_penalty(ws, as, wt4, at4).value).epsilon(1e-12));

    CHECK_THROWS_AS(param_penalty_mapped(ws, as, wt, at, {{0, 5}}), ConfigError);
}

TEST_CASE("kl certificate on identical heads") {
    Rng rng(90);
    CrfParams head;
    head.w = random_matrix(rng, 4, 3);
    head.a = random_matrix(rng, 3, 3);
    Matrix h = random_matrix(rng, 3, 4);
    BoundCertificate cert = certify_kl_bound(h, head, head);
    CHECK(cert.exact_kl == 0.0);
    CHECK(cert.bound == 0.0);
    CHECK(cert.pass);
    CHECK(cert.n == 3);
    CHECK(cert.m == 3);
}

TEST_CASE("kl certificate holds on random instances") {
    Rng rng(91);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = 1 + rng.uniform_index(6);
        std::size_t m = 2 + rng.uniform_index(3);
        std::size_t d = 2 + rng.uniform_index(3);
        Matrix h = random_matrix(rng, n, d);
        CrfParams s{random_matrix(rng, d, m), random_matrix(rng, m, m)};
        CrfParams t{random_matrix(rng, d, m), random_matrix(rng, m, m)};
        BoundCertificate cert = certify_kl_bound(h, s, t);
        CHECK(cert.exact_kl >= -1e-12);
        CHECK(cert.pass);
    }
}

TEST_CASE("kl shrinks quadratically while the bound shrinks linearly") {
    Rng rng(92);
    Matrix h = random_matrix(rng, 4, 3);
    CrfParams s{random_matrix(rng, 3, 3), random_matrix(rng, 3, 3)};
    double prev_ratio = 1.0;
    for (double delta : {1e-1, 1e-2, 1e-3}) {
        CrfParams t = s;
        t.w(1, 2) += delta;
        BoundCertificate cert = certify_kl_bound(h, s, t);
        CHECK(cert.pass);
        double ratio = cert.exact_kl / cert.bound;
        CHECK(ratio < prev_ratio);
        prev_ratio = ratio;
    }
}

TEST_CASE("certifier size and shape guards") {
    Rng rng(93);
    CrfParams s{random_matrix(rng, 2, 3), random_matrix(rng, 3, 3)};
    CHECK_THROWS_AS(certify_kl_bound(random_matrix(rng, 9, 2), s, s), SizeError);
    CrfParams big{random_matrix(rng, 2, 6), random_matrix(rng, 6, 6)};
    CHECK_THROWS_AS(certify_kl_bound(random_matrix(rng, 2, 2), big, big), SizeError);
    CHECK_THROWS_AS(certify_kl_bound(random_matrix(rng, 2, 4), s, s), ShapeError);
    CrfParams other{random_matrix(rng, 2, 4), random_matrix(rng, 4, 4)};
    CHECK_THROWS_AS(certify_kl_bound(random_matrix(rng, 2, 2), s, other), ShapeError);
}

TEST_CASE("certificate line format") {
    BoundCertificate cert;
    cert.n = 4;
    cert.m = 3;
    cert.exact_kl = 0.125;
    cert.bound = 2.5;
    cert.constant_c = 10.0;
    cert.pass = true;
    CHECK(certificate_line(cert) == "4 3 0.125 2.5 10 pass");
    cert.pass = false;
    cert.exact_kl = 1.0 / 3.0;
    CHECK(certificate_line(cert) == "4 3 0.33333333333333331 2.5 10 fail");
}

}  // TEST_SUITE
