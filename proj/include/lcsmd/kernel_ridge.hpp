#ifndef LCSMD_KERNEL_RIDGE_HPP
#define LCSMD_KERNEL_RIDGE_HPP

#include <Eigen/Dense>

#include <cstdint>

namespace lcsmd {

// Gaussian-kernel ridge regression. Inputs and output are standardized
// internally; the ridge level is picked from a small fixed grid on a held-out
// fold, then the model is refit on all rows.
class KernelRidge {
public:
    static KernelRidge fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                           const Eigen::VectorXd* weights, std::uint64_t seed);

    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
    Eigen::VectorXd residuals(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) const;

    double train_residual_variance() const { return trainResidualVariance_; }
    double bandwidth() const { return sigma_; }
    double ridge() const { return lambda_; }

private:
    Eigen::MatrixXd trainX_; // standardized
    Eigen::VectorXd alpha_;
    Eigen::VectorXd xMean_, xStd_;
    double yMean_ = 0, yStd_ = 1;
    double sigma_ = 1, lambda_ = 0;
    bool constant_ = false;
    double trainResidualVariance_ = 0;

    Eigen::MatrixXd standardize(const Eigen::MatrixXd& X) const;
};

// median of pairwise Euclidean distances; 0 when all points coincide
double median_pairwise_distance(const Eigen::MatrixXd& X);
double median_pairwise_distance(const Eigen::VectorXd& x);

} // namespace lcsmd

#endif
