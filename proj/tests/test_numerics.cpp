#include <cmath>
#include <vector>

#include "doctest.h"
#include "latk/error.hpp"
#include "latk/numerics.hpp"
#include "latk/rng.hpp"
#include "oracles.hpp"

using latk::Matrix;

TEST_SUITE("numerics") {

TEST_CASE("rbf_kernel closed-form values") {
    std::vector<double> a{3.0, -1.0};
    CHECK(latk::rbf_kernel(a, a, 0.7) == 1.0);
    CHECK(latk::rbf_kernel({0.0}, {2.0}, 1.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
    CHECK(latk::rbf_kernel({1.0, 0.0}, {0.0, 1.0}, 1.0) ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("rbf_kernel symmetry, range, errors") {
    latk::Rng rng(21);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> x(5), y(5);
        for (auto& v : x) v = rng.uniform(-1.0, 1.0);
        for (auto& v : y) v = rng.uniform(-1.0, 1.0);
        double bw = rng.uniform(0.5, 2.0);
        double kxy = latk::rbf_kernel(x, y, bw);
        CHECK(kxy == latk::rbf_kernel(y, x, bw));
        CHECK(kxy > 0.0);
        CHECK(kxy <= 1.0);
        CHECK(latk::rbf_kernel(x, x, bw) == 1.0);
    }
    CHECK_THROWS_AS(latk::rbf_kernel({1.0}, {1.0, 2.0}, 1.0), latk::ShapeError);
    CHECK_THROWS_AS(latk::rbf_kernel({1.0}, {2.0}, 0.0), latk::ParamError);
    CHECK_THROWS_AS(latk::rbf_kernel({1.0}, {2.0}, -1.0), latk::ParamError);
}

TEST_CASE("rbf gram matrices are positive semi-definite") {
    latk::Rng rng(22);
    for (int t = 0; t < 10; ++t) {
        std::vector<std::vector<double>> pts(10, std::vector<double>(4));
        for (auto& p : pts)
            for (auto& v : p) v = rng.uniform(-2.0, 2.0);
        double bw = latk::median_bandwidth(pts);
        Matrix gram(10, 10);
        for (std::size_t i = 0; i < 10; ++i)
            for (std::size_t j = 0; j < 10; ++j) gram(i, j) = latk::rbf_kernel(pts[i], pts[j], bw);
        auto ev = oracles::sym_eigenvalues(gram);
        CHECK(ev.front() >= -1e-9);
    }
}

TEST_CASE("median_bandwidth worked examples") {
    CHECK(latk::median_bandwidth({{0.0}, {2.0}}) == doctest::Approx(std::sqrt(2.0)));
    CHECK(latk::median_bandwidth({{0.0}, {0.0}, {0.0}}) == 1.0);
    CHECK(latk::median_bandwidth({{0.0}, {1.0}, {3.0}}) == doctest::Approx(std::sqrt(2.0)));
    // even pair count takes the lower median: dists sorted {1,4,4,9,9,25}, index 2 -> 4
    CHECK(latk::median_bandwidth({{0.0}, {1.0}, {3.0}, {-2.0}}) ==
          doctest::Approx(std::sqrt(4.0 / 2.0)));
    // zero median from repeated points falls back to the sentinel
    CHECK(latk::median_bandwidth({{0.0}, {0.0}, {0.0}, {5.0}}) == 1.0);
    CHECK_THROWS_AS(latk::median_bandwidth({{1.0}}), latk::ParamError);
    CHECK_THROWS_AS(latk::median_bandwidth({{1.0}, {1.0, 2.0}}), latk::ShapeError);
}

TEST_CASE("adagrad closed-form steps") {
    Matrix p(1, 1), g(1, 1);
    latk::AdaGradState st(1, 1, 0.1);
    g(0, 0) = 1.0;
    auto [p1, st1] = latk::adagrad_step(p, g, st);
    CHECK(p1(0, 0) == doctest::Approx(-0.1 / std::sqrt(1.0 + 1e-8)).epsilon(1e-14));
    CHECK(st1.accumulators(0, 0) == 1.0);
    CHECK(p(0, 0) == 0.0);  // pure form leaves inputs alone
    auto [p2, st2] = latk::adagrad_step(p1, g, st1);
    CHECK(p2(0, 0) ==
          doctest::Approx(-0.1 / std::sqrt(1.0 + 1e-8) - 0.1 / std::sqrt(2.0 + 1e-8)).epsilon(1e-14));
    CHECK(p2(0, 0) == doctest::Approx(-0.170710).epsilon(1e-5));
}

TEST_CASE("adagrad invariants") {
    latk::Rng rng(23);
    Matrix p(3, 4), g(3, 4);
    for (auto& v : p.data) v = rng.uniform(-1.0, 1.0);

    // zero gradient changes nothing
    latk::AdaGradState st(3, 4, 0.1);
    Matrix before = p;
    latk::adagrad_step_inplace(p, g, st);
    CHECK(p.data == before.data);
    CHECK(st.accumulators.data == Matrix(3, 4).data);

    // zero learning rate freezes params but accumulators still grow
    for (auto& v : g.data) v = rng.uniform(-1.0, 1.0);
    latk::AdaGradState frozen(3, 4, 0.0);
    latk::adagrad_step_inplace(p, g, frozen);
    CHECK(p.data == before.data);
    double acc_sum = 0.0;
    for (double v : frozen.accumulators.data) {
        CHECK(v >= 0.0);
        acc_sum += v;
    }
    CHECK(acc_sum > 0.0);

    // accumulators never decrease across steps
    latk::AdaGradState st2(3, 4, 0.05);
    Matrix prev_acc = st2.accumulators;
    for (int i = 0; i < 5; ++i) {
        for (auto& v : g.data) v = rng.uniform(-1.0, 1.0);
        latk::adagrad_step_inplace(p, g, st2);
        for (std::size_t k = 0; k < prev_acc.size(); ++k)
            CHECK(st2.accumulators.data[k] >= prev_acc.data[k]);
        prev_acc = st2.accumulators;
    }

    Matrix wrong(2, 2);
    CHECK_THROWS_AS(latk::adagrad_step_inplace(p, wrong, st2), latk::ShapeError);
}

TEST_CASE("grad_check on quadratics") {
    auto loss = [](const std::vector<double>& x) { return x[0] * x[0]; };
    CHECK(latk::grad_check(loss, {6.0}, {3.0}) <= 1e-8);
    CHECK(latk::grad_check(loss, {9.0}, {3.0}) == doctest::Approx(1.0 / 3.0).epsilon(1e-6));

    auto bad = [](const std::vector<double>& x) { return std::log(x[0]); };
    CHECK_THROWS_AS(latk::grad_check(bad, {0.0}, {-1.0}), latk::NumericError);
    CHECK_THROWS_AS(latk::grad_check(loss, {1.0, 2.0}, {3.0}), latk::ShapeError);
}

}  // TEST_SUITE
