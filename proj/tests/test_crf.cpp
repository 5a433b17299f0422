#include <cmath>
#include <vector>

#include "doctest.h"
#include "latk/crf.hpp"
#include "latk/error.hpp"
#include "latk/numerics.hpp"
#include "latk/rng.hpp"
#include "oracles.hpp"

using namespace latk;

namespace {

Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c, double lo = -1.0, double hi = 1.0) {
    Matrix m(r, c);
    for (auto& v : m.data) v = rng.uniform(lo, hi);
    return m;
}

double brute_log_partition(const Matrix& e, const Matrix& a) {
    double mx = -1e300;
    std::vector<double> scores;
    oracles::for_each_sequence(e.rows, e.cols, [&](const std::vector<std::size_t>& y) {
        double s = score(e, a, y);
        scores.push_back(s);
        if (s > mx) mx = s;
    });
    double sum = 0.0;
    for (double s : scores) sum += std::exp(s - mx);
    return mx + std::log(sum);
}

}  // namespace

TEST_SUITE("crf") {

TEST_CASE("emission") {
    Rng rng(70);
    Matrix h = random_matrix(rng, 3, 4);
    CHECK(emission(h, Matrix(4, 2)).data == std::vector<double>(6, 0.0));

    Matrix h1(1, 2);
    h1(0, 0) = 1.0;
    Matrix w(2, 2);
    w(0, 0) = 3.0;
    w(0, 1) = -2.0;
    w(1, 0) = 7.0;
    w(1, 1) = 5.0;
    Matrix e1 = emission(h1, w);
    CHECK(e1(0, 0) == 3.0);
    CHECK(e1(0, 1) == -2.0);

    Matrix w2 = random_matrix(rng, 4, 2);
    Matrix e = emission(h, w2);
    Matrix ref = oracles::naive_matmul(h, w2);
    for (std::size_t i = 0; i < e.size(); ++i)
        CHECK(e.data[i] == doctest::Approx(ref.data[i]).epsilon(1e-12));

    CHECK_THROWS_AS(emission(h, Matrix(3, 2)), ShapeError);
}

TEST_CASE("sequence score") {
    CHECK(score(Matrix(4, 3), Matrix(3, 3), {0, 2, 1, 0}) == 0.0);

    Matrix e1(1, 2);
    e1(0, 1) = 4.5;
    CHECK(score(e1, Matrix(2, 2), {1}) == 4.5);

    Matrix e(3, 2);
    e(0, 0) = 1.0;
    e(0, 1) = 2.0;
    e(1, 0) = 3.0;
    e(1, 1) = 4.0;
    e(2, 0) = 5.0;
    e(2, 1) = 6.0;
    Matrix a(2, 2);
    a(0, 0) = 0.1;
    a(0, 1) = 0.2;
    a(1, 0) = 0.3;
    a(1, 1) = 0.4;
    // emissions 2 + 3 + 6, transitions A[1][0] + A[0][1]
    CHECK(score(e, a, {1, 0, 1}) == doctest::Approx(11.5).epsilon(1e-15));

    CHECK_THROWS_AS(score(e, a, {0, 1}), ShapeError);
    CHECK_THROWS_AS(score(e, a, {0, 1, 2}), ParamError);
}

TEST_CASE("log partition closed forms") {
    Matrix e(1, 2);
    CHECK(log_partition(e, Matrix(2, 2)) == doctest::Approx(std::log(2.0)).epsilon(1e-15));

    // adding c to one emission row shifts logZ by exactly c
    Rng rng(71);
    Matrix e2 = random_matrix(rng, 4, 3);
    Matrix a = random_matrix(rng, 3, 3);
    double base = log_partition(e2, a);
    for (std::size_t k = 0; k < 3; ++k) e2(2, k) += 0.75;
    CHECK(log_partition(e2, a) == doctest::Approx(base + 0.75).epsilon(1e-12));
}

TEST_CASE("log partition matches exhaustive enumeration") {
    Rng rng(72);
    for (int trial = 0; trial < 60; ++trial) {
        std::size_t n = 1 + rng.uniform_index(6);
        std::size_t m = 1 + rng.uniform_index(5);
        Matrix e = random_matrix(rng, n, m, -2.0, 2.0);
        Matrix a = random_matrix(rng, m, m, -2.0, 2.0);
        CHECK(std::fabs(log_partition(e, a) - brute_log_partition(e, a)) < 1e-8);
    }
}

TEST_CASE("log likelihood") {
    Matrix e(1, 2);
    CHECK(log_likelihood(e, Matrix(2, 2), {0}) == doctest::Approx(-std::log(2.0)).epsilon(1e-15));

    Rng rng(73);
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t n = 1 + rng.uniform_index(4);
        std::size_t m = 1 + rng.uniform_index(4);
        Matrix em = random_matrix(rng, n, m, -2.0, 2.0);
        Matrix a = random_matrix(rng, m, m, -2.0, 2.0);
        double total = 0.0;
        oracles::for_each_sequence(n, m, [&](const std::vector<std::size_t>& y) {
            double ll = log_likelihood(em, a, y);
            CHECK(ll <= 1e-12);
            total += std::exp(ll);
        });
        CHECK(std::fabs(total - 1.0) < 1e-10);
    }

    // raising the gold emission strictly increases the likelihood
    Matrix em = random_matrix(rng, 3, 3);
    Matrix a = random_matrix(rng, 3, 3);
    std::vector<std::size_t> y{2, 0, 1};
    double before = log_likelihood(em, a, y);
    em(0, 2) += 1.0;
    CHECK(log_likelihood(em, a, y) > before);
}

TEST_CASE("gradients match finite differences") {
    Rng rng(74);
    for (int trial = 0; trial < 8; ++trial) {
        std::size_t n = 1 + rng.uniform_index(4);
        std::size_t d = 2 + rng.uniform_index(3);
        std::size_t m = 2 + rng.uniform_index(3);
        Matrix h = random_matrix(rng, n, d, -0.5, 0.5);
        Matrix w = random_matrix(rng, d, m, -0.5, 0.5);
        Matrix a = random_matrix(rng, m, m, -0.5, 0.5);
        std::vector<std::size_t> y(n);
        for (auto& v : y) v = rng.uniform_index(m);

        std::vector<double> point;
        point.insert(point.end(), w.data.begin(), w.data.end());
        point.insert(point.end(), a.data.begin(), a.data.end());
        point.insert(point.end(), h.data.begin(), h.data.end());

        auto loss_fn = [&](const std::vector<double>& v) {
            Matrix wq = w, aq = a, hq = h;
            std::size_t off = 0;
            std::copy(v.begin(), v.begin() + wq.size(), wq.data.begin());
            off += wq.size();
            std::copy(v.begin() + off, v.begin() + off + aq.size(), aq.data.begin());
            off += aq.size();
            std::copy(v.begin() + off, v.end(), hq.data.begin());
            return -log_likelihood(emission(hq, wq), aq, y);
        };

        CrfGradients g = crf_gradients(h, w, a, y);
        CHECK(g.nll == doctest::Approx(-log_likelihood(emission(h, w), a, y)).epsilon(1e-12));
        std::vector<double> analytic;
        analytic.insert(analytic.end(), g.dw.data.begin(), g.dw.data.end());
        analytic.insert(analytic.end(), g.da.data.begin(), g.da.data.end());
        analytic.insert(analytic.end(), g.dh.data.begin(), g.dh.data.end());
        CHECK(grad_check(loss_fn, analytic, point) < 1e-4);
    }
}

TEST_CASE("saturated model has vanishing gradients") {
    // identity H and a huge diagonal W make the gold labels near-certain
    Matrix h(2, 2);
    h(0, 0) = 1.0;
    h(1, 1) = 1.0;
    Matrix w(2, 2);
    w(0, 0) = 60.0;
    w(1, 1) = 60.0;
    CrfGradients g = crf_gradients(h, w, Matrix(2, 2), {0, 1});
    for (double v : g.dw.data) CHECK(std::fabs(v) < 1e-12);
    for (double v : g.da.data) CHECK(std::fabs(v) < 1e-12);
    for (double v : g.dh.data) CHECK(std::fabs(v) < 1e-12);
    CHECK(g.nll < 1e-12);
}

TEST_CASE("emission gradient rows are mean-centered") {
    // dL/dH = dE W^T with identity W exposes dE; each row sums to zero
    Rng rng(75);
    std::size_t m = 4, n = 5;
    Matrix h = random_matrix(rng, n, m);
    Matrix w(m, m);
    for (std::size_t k = 0; k < m; ++k) w(k, k) = 1.0;
    Matrix a = random_matrix(rng, m, m);
    std::vector<std::size_t> y(n);
    for (auto& v : y) v = rng.uniform_index(m);
    CrfGradients g = crf_gradients(h, w, a, y);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < m; ++k) s += g.dh(i, k);
        CHECK(std::fabs(s) < 1e-12);
    }
}

TEST_CASE("viterbi") {
    // m = 1: only one sequence exists
    Matrix e1(3, 1);
    e1(0, 0) = 0.5;
    e1(1, 0) = -1.0;
    e1(2, 0) = 2.0;
    Matrix a1(1, 1);
    a1(0, 0) = 0.25;
    ViterbiResult r1 = viterbi(e1, a1);
    CHECK(r1.labels == std::vector<std::size_t>{0, 0, 0});
    CHECK(r1.score == doctest::Approx(2.0).epsilon(1e-15));

    // zero transitions reduce to per-position argmax
    Rng rng(76);
    Matrix e = random_matrix(rng, 6, 4);
    ViterbiResult r = viterbi(e, Matrix(4, 4));
    for (std::size_t i = 0; i < 6; ++i) {
        std::size_t arg = 0;
        for (std::size_t k = 1; k < 4; ++k)
            if (e(i, k) > e(i, arg)) arg = k;
        CHECK(r.labels[i] == arg);
    }
}

TEST_CASE("viterbi matches exhaustive search") {
    Rng rng(77);
    for (int trial = 0; trial < 60; ++trial) {
        std::size_t n = 1 + rng.uniform_index(6);
        std::size_t m = 1 + rng.uniform_index(5);
        Matrix e = random_matrix(rng, n, m, -2.0, 2.0);
        Matrix a = random_matrix(rng, m, m, -2.0, 2.0);
        ViterbiResult r = viterbi(e, a);
        double best = -1e300;
        oracles::for_each_sequence(n, m, [&](const std::vector<std::size_t>& y) {
            best = std::max(best, score(e, a, y));
        });
        CHECK(r.score == doctest::Approx(best).epsilon(1e-10));
        CHECK(score(e, a, r.labels) == doctest::Approx(r.score).epsilon(1e-10));
    }
}

TEST_CASE("viterbi ties break toward smaller labels") {
    CHECK(viterbi(Matrix(4, 3), Matrix(3, 3)).labels == std::vector<std::size_t>{0, 0, 0, 0});

    // labels 1 and 2 tie for the optimum; the backtrace must pick 1
    Matrix e(2, 3);
    e(0, 1) = 1.0;
    e(0, 2) = 1.0;
    e(1, 1) = 1.0;
    e(1, 2) = 1.0;
    ViterbiResult r = viterbi(e, Matrix(3, 3));
    CHECK(r.labels == std::vector<std::size_t>{1, 1});
    CHECK(r.score == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("partition bounds and shift invariance") {
    Rng rng(78);
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t n = 1 + rng.uniform_index(5);
        std::size_t m = 2 + rng.uniform_index(3);
        Matrix e = random_matrix(rng, n, m, -2.0, 2.0);
        Matrix a = random_matrix(rng, m, m, -2.0, 2.0);
        double log_z = log_partition(e, a);
        ViterbiResult r = viterbi(e, a);
        CHECK(log_z >= r.score - 1e-12);
        CHECK(log_z <= r.score + static_cast<double>(n) * std::log(static_cast<double>(m)) + 1e-12);

        Matrix es = e, as = a;
        for (auto& v : es.data) v += 1.3;
        for (auto& v : as.data) v += 0.7;
        ViterbiResult rs = viterbi(es, as);
        CHECK(rs.labels == r.labels);
        double shift = 1.3 * static_cast<double>(n) + 0.7 * static_cast<double>(n - 1);
        CHECK(rs.score == doctest::Approx(r.score + shift).epsilon(1e-12));
    }
}

}  // TEST_SUITE
