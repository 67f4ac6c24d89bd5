#pragma once

#include <Eigen/Dense>

namespace psb {

/// Numerically stable softmax of one logit vector.
template <typename Derived>
Eigen::VectorXd softmax(const Eigen::MatrixBase<Derived>& logits) {
    Eigen::VectorXd z = logits.template cast<double>();
    const double m = z.maxCoeff();
    Eigen::VectorXd e = (z.array() - m).exp();
    return e / e.sum();
}

/// Column-wise stable softmax: each column of `logits` is one sample.
template <typename Derived>
Eigen::MatrixXd softmax_columns(const Eigen::MatrixBase<Derived>& logits) {
    Eigen::MatrixXd z = logits.template cast<double>();
    Eigen::RowVectorXd m = z.colwise().maxCoeff();
    Eigen::MatrixXd e = (z.rowwise() - m).array().exp();
    Eigen::RowVectorXd s = e.colwise().sum();
    return e.array().rowwise() / s.array();
}

/// Column-wise stable log-sum-exp.
template <typename Derived>
Eigen::RowVectorXd log_sum_exp_columns(const Eigen::MatrixBase<Derived>& logits) {
    Eigen::MatrixXd z = logits.template cast<double>();
    Eigen::RowVectorXd m = z.colwise().maxCoeff();
    Eigen::RowVectorXd s = (z.rowwise() - m).array().exp().colwise().sum();
    return m.array() + s.array().log();
}

template <typename Derived>
auto relu(const Eigen::MatrixBase<Derived>& x) {
    return x.cwiseMax(typename Derived::Scalar(0));
}

}  // namespace psb
