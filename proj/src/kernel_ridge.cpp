#include "lcsmd/kernel_ridge.hpp"

#include "lcsmd/rng.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace lcsmd {

namespace {

Eigen::MatrixXd gaussian_gram(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double sigma) {
    // exp(-|a-b|^2 / (2 sigma^2))
    Eigen::VectorXd a2 = A.rowwise().squaredNorm();
    Eigen::VectorXd b2 = B.rowwise().squaredNorm();
    Eigen::MatrixXd D = a2.replicate(1, B.rows()) + b2.transpose().replicate(A.rows(), 1) -
                        2.0 * (A * B.transpose());
    const double inv = 1.0 / (2.0 * sigma * sigma);
    return (-D.cwiseMax(0.0) * inv).array().exp();
}

const double kRidgeGrid[] = {1e-4, 1e-3, 1e-2, 1e-1};

} // namespace

double median_pairwise_distance(const Eigen::MatrixXd& X) {
    const int n = static_cast<int>(X.rows());
    std::vector<double> d2;
    d2.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) d2.push_back((X.row(i) - X.row(j)).squaredNorm());
    if (d2.empty()) return 0.0;
    std::nth_element(d2.begin(), d2.begin() + d2.size() / 2, d2.end());
    return std::sqrt(d2[d2.size() / 2]);
}

double median_pairwise_distance(const Eigen::VectorXd& x) {
    return median_pairwise_distance(Eigen::MatrixXd(x));
}

Eigen::MatrixXd KernelRidge::standardize(const Eigen::MatrixXd& X) const {
    Eigen::MatrixXd Z = X;
    for (int c = 0; c < Z.cols(); ++c)
        Z.col(c) = (Z.col(c).array() - xMean_(c)) / xStd_(c);
    return Z;
}

KernelRidge KernelRidge::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const Eigen::VectorXd* weights, std::uint64_t seed) {
    const int n = static_cast<int>(X.rows());
    if (n != y.size()) throw std::invalid_argument("input/output length mismatch");
    if (n < 3) throw std::invalid_argument("too few rows for regression");
    if (X.hasNaN() || y.hasNaN()) throw std::invalid_argument("missing values reached the regressor");

    KernelRidge m;
    m.xMean_ = X.colwise().mean();
    m.xStd_.resize(X.cols());
    for (int c = 0; c < X.cols(); ++c) {
        double var = (X.col(c).array() - m.xMean_(c)).square().sum() / n;
        m.xStd_(c) = var > 0 ? std::sqrt(var) : 1.0;
    }
    m.yMean_ = y.mean();
    bool yConstant = true;
    for (int i = 1; i < n && yConstant; ++i) yConstant = y(i) == y(0);
    if (yConstant) { // constant target: predict the constant
        m.yMean_ = y(0);
        m.constant_ = true;
        m.trainResidualVariance_ = 0.0;
        return m;
    }
    double yVar = (y.array() - m.yMean_).square().sum() / n;
    m.yStd_ = yVar > 0 ? std::sqrt(yVar) : 1.0;

    m.trainX_ = m.standardize(X);
    Eigen::VectorXd ys = (y.array() - m.yMean_) / m.yStd_;

    m.sigma_ = median_pairwise_distance(m.trainX_);
    if (m.sigma_ <= 0) m.sigma_ = 1.0;

    Eigen::VectorXd w = weights ? *weights : Eigen::VectorXd::Ones(n);
    if (weights && (w.minCoeff() < 0 || w.sum() <= 0))
        throw std::invalid_argument("weights must be nonnegative and not all zero");
    w = w.cwiseMax(1e-12);

    // pick the ridge level on a held-out quarter, then refit on everything
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    SplitMix rng(hash_mix(seed, 0x6b726964ULL));
    shuffle_inplace(order, rng);
    const int nVal = std::max(1, n / 4);
    const int nTr = n - nVal;

    double bestLambda = kRidgeGrid[1];
    if (nTr >= 8) {
        Eigen::MatrixXd Xtr(nTr, X.cols());
        Eigen::VectorXd ytr(nTr), wtr(nTr);
        Eigen::MatrixXd Xval(nVal, X.cols());
        Eigen::VectorXd yval(nVal);
        for (int i = 0; i < nTr; ++i) {
            Xtr.row(i) = m.trainX_.row(order[i]);
            ytr(i) = ys(order[i]);
            wtr(i) = w(order[i]);
        }
        for (int i = 0; i < nVal; ++i) {
            Xval.row(i) = m.trainX_.row(order[nTr + i]);
            yval(i) = ys(order[nTr + i]);
        }
        Eigen::MatrixXd Ktr = gaussian_gram(Xtr, Xtr, m.sigma_);
        Eigen::MatrixXd Kval = gaussian_gram(Xval, Xtr, m.sigma_);
        Eigen::VectorXd sw = wtr.cwiseSqrt();
        Eigen::MatrixXd Kw = sw.asDiagonal() * Ktr * sw.asDiagonal();
        double bestErr = std::numeric_limits<double>::infinity();
        for (double lam : kRidgeGrid) {
            Eigen::MatrixXd A = Kw;
            A.diagonal().array() += lam * nTr;
            Eigen::VectorXd gamma = A.llt().solve(sw.cwiseProduct(ytr));
            Eigen::VectorXd alpha = sw.cwiseProduct(gamma);
            double err = (Kval * alpha - yval).squaredNorm();
            if (err < bestErr) { bestErr = err; bestLambda = lam; }
        }
    }
    m.lambda_ = bestLambda;

    Eigen::MatrixXd K = gaussian_gram(m.trainX_, m.trainX_, m.sigma_);
    Eigen::VectorXd sw = w.cwiseSqrt();
    Eigen::MatrixXd A = sw.asDiagonal() * K * sw.asDiagonal();
    A.diagonal().array() += m.lambda_ * n;
    Eigen::VectorXd gamma = A.llt().solve(sw.cwiseProduct(ys));
    m.alpha_ = sw.cwiseProduct(gamma);

    Eigen::VectorXd fit = K * m.alpha_;
    m.trainResidualVariance_ = ((ys - fit).array().square().sum() / n) * m.yStd_ * m.yStd_;
    return m;
}

Eigen::VectorXd KernelRidge::predict(const Eigen::MatrixXd& X) const {
    if (constant_) return Eigen::VectorXd::Constant(X.rows(), yMean_);
    Eigen::MatrixXd Z = standardize(X);
    Eigen::MatrixXd K = gaussian_gram(Z, trainX_, sigma_);
    return (K * alpha_).array() * yStd_ + yMean_;
}

Eigen::VectorXd KernelRidge::residuals(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) const {
    return y - predict(X);
}

} // namespace lcsmd
