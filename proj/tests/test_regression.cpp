#include <doctest.h>

#include "lcsmd/dataset.hpp"
#include "lcsmd/direction.hpp"
#include "lcsmd/kernel_ridge.hpp"
#include "lcsmd/rng.hpp"

#include <cmath>

using namespace lcsmd;

TEST_CASE("kernel ridge recovers tanh within the noise floor") {
    SplitMix rng(3);
    const int n = 1200, hold = 400;
    Eigen::MatrixXd X(n, 1);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = rng.uniform(-3, 3);
        y(i) = std::tanh(X(i, 0)) + rng.uniform(-1, 1);
    }
    KernelRidge m = KernelRidge::fit(X.topRows(n - hold), y.head(n - hold), nullptr, 7);
    Eigen::VectorXd pred = m.predict(X.bottomRows(hold));
    double sse = (pred - y.tail(hold)).squaredNorm();
    double rmse = std::sqrt(sse / hold);
    const double noiseSd = std::sqrt(1.0 / 3.0); // U(-1,1)
    CHECK(rmse < noiseSd * 1.15);
    CHECK(rmse > noiseSd * 0.85);
}

TEST_CASE("kernel ridge on a constant target") {
    Eigen::MatrixXd X(50, 1);
    Eigen::VectorXd y = Eigen::VectorXd::Constant(50, 4.2);
    SplitMix rng(4);
    for (int i = 0; i < 50; ++i) X(i, 0) = rng.normal();
    KernelRidge m = KernelRidge::fit(X, y, nullptr, 1);
    Eigen::VectorXd res = m.residuals(X, y);
    CHECK(res.cwiseAbs().maxCoeff() == 0.0);
    CHECK(m.train_residual_variance() == 0.0);
}

TEST_CASE("kernel ridge recovers a linear slope within two percent") {
    SplitMix rng(5);
    const int n = 600;
    Eigen::MatrixXd X(n, 1);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = rng.uniform(-2, 2);
        y(i) = 2.0 * X(i, 0);
    }
    KernelRidge m = KernelRidge::fit(X, y, nullptr, 11);
    // slope over the interior of the training range
    Eigen::MatrixXd grid(21, 1);
    for (int i = 0; i <= 20; ++i) grid(i, 0) = -1.5 + 3.0 * i / 20.0;
    Eigen::VectorXd f = m.predict(grid);
    double sxy = 0, sxx = 0;
    double mx = grid.col(0).mean(), mf = f.mean();
    for (int i = 0; i <= 20; ++i) {
        sxy += (grid(i, 0) - mx) * (f(i) - mf);
        sxx += (grid(i, 0) - mx) * (grid(i, 0) - mx);
    }
    CHECK(sxy / sxx == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("fit_regressor applies deletion and validates") {
    SplitMix rng(6);
    const int n = 500;
    Eigen::MatrixXd v(n, 2);
    std::vector<std::uint8_t> mask(2 * n, 0);
    for (int i = 0; i < n; ++i) {
        v(i, 0) = rng.uniform(-2, 2);
        v(i, 1) = std::tanh(v(i, 0)) + 0.3 * rng.normal();
        if (i % 5 == 0) mask[2 * i] = 1;
    }
    Dataset d(v, mask, {"X", "Y"});
    TestConfig cfg;
    Regressor r = fit_regressor(d, 1, {0}, 3, cfg);
    CHECK(r.output == 1);
    CHECK(r.inputs == std::vector<int>{0});
    CHECK(r.trainResidualVariance < 0.2);

    CHECK_THROWS_AS(fit_regressor(d, 1, {}, 3, cfg), std::invalid_argument);
    CHECK_THROWS_AS(fit_regressor(d, 1, {1}, 3, cfg), std::invalid_argument);

    Eigen::MatrixXd tiny(5, 2);
    tiny.setZero();
    Dataset td(tiny, std::vector<std::uint8_t>(10, 0), {"X", "Y"});
    CHECK_THROWS_AS(fit_regressor(td, 1, {0}, 3, cfg), insufficient_data);
}

TEST_CASE("weights suppress a contaminated subset") {
    // half the rows carry a large systematic offset but near-zero weight; the
    // weighted fit must track the clean half
    const int n = 240;
    Eigen::MatrixXd X(n, 1);
    Eigen::VectorXd y(n), w(n);
    SplitMix rng(8);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = rng.uniform(-2, 2);
        bool clean = i % 2 == 0;
        y(i) = std::sin(X(i, 0)) + (clean ? 0.02 * rng.normal() : 5.0);
        w(i) = clean ? 1.0 : 1e-8;
    }
    KernelRidge weighted = KernelRidge::fit(X, y, &w, 9);
    KernelRidge plain = KernelRidge::fit(X, y, nullptr, 9);
    Eigen::MatrixXd grid(9, 1);
    for (int i = 0; i < 9; ++i) grid(i, 0) = -1.6 + 0.4 * i;
    double errW = 0, errP = 0;
    Eigen::VectorXd fw = weighted.predict(grid), fp = plain.predict(grid);
    for (int i = 0; i < 9; ++i) {
        errW = std::max(errW, std::abs(fw(i) - std::sin(grid(i, 0))));
        errP = std::max(errP, std::abs(fp(i) - std::sin(grid(i, 0))));
    }
    CHECK(errW < 1.0);
    CHECK(errP > 1.0);
}
