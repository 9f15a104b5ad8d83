#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "causaldii/errors.hpp"

namespace causaldii {

// Multi-response least squares Y ~ X B fitted through a column-pivoted QR
// factorisation. Rank problems surface as errors instead of silently
// producing a minimum-norm solution.
struct OlsFit {
    Eigen::MatrixXd beta;      // k x M coefficients
    Eigen::MatrixXd residuals; // n x M
    Eigen::VectorXd rss;       // per-response residual sum of squares
    Eigen::MatrixXd xtx_inv;   // (X'X)^{-1}, for coefficient covariances
    double condition = 0.0;    // |R11|/|Rkk| estimate from the pivoted QR
};

inline OlsFit ols(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                  double condition_limit = 1e12) {
    const Eigen::Index n = x.rows(), k = x.cols();
    if (y.rows() != n)
        throw DimensionMismatchError("ols: X has " + std::to_string(n) +
                                     " rows, Y has " + std::to_string(y.rows()));
    if (n <= k)
        throw InsufficientDataError("ols: " + std::to_string(n) +
                                    " observations for " + std::to_string(k) +
                                    " parameters");

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    const Eigen::MatrixXd& qrm = qr.matrixQR();
    const double r_first = std::abs(qrm(0, 0));
    const double r_last = std::abs(qrm(k - 1, k - 1));
    if (r_last == 0.0 || r_first / r_last > condition_limit)
        throw SingularDesignError(
            "design matrix is singular or near-singular (condition estimate " +
            std::to_string(r_last == 0.0
                               ? std::numeric_limits<double>::infinity()
                               : r_first / r_last) +
            ")");

    OlsFit fit;
    fit.condition = r_first / r_last;
    fit.beta = qr.solve(y);
    fit.residuals = y - x * fit.beta;
    fit.rss = fit.residuals.colwise().squaredNorm();

    // X P = Q R  =>  X'X = P R'R P'  =>  (X'X)^{-1} = P (R'R)^{-1} P'
    Eigen::MatrixXd rinv = qrm.topLeftCorner(k, k)
                               .triangularView<Eigen::Upper>()
                               .solve(Eigen::MatrixXd::Identity(k, k));
    Eigen::MatrixXd core = rinv * rinv.transpose();
    fit.xtx_inv = qr.colsPermutation() * core *
                  qr.colsPermutation().transpose();
    return fit;
}

} // namespace causaldii
