#pragma once

#include <Eigen/Dense>

#include "sink/kernel_types.hpp"

namespace sink {

// Stationary covariance sigma2 * C(h).
//
// TensorProduct: C(h) = prod_j C1(|h_j| / theta_j), one length-scale per
// input dimension.
// Isotropic: C(h) = C1(||h|| / theta), theta must hold exactly one entry.
struct KernelSpec {
    Smoothness nu = Smoothness::FiveHalves;
    Eigen::VectorXd theta;
    double sigma2 = 1.0;
    Composition composition = Composition::TensorProduct;

    // Throws ConfigError when theta or sigma2 are not positive and finite,
    // or when an isotropic spec carries more than one length-scale.
    void validate() const;

    // Input dimension the spec is tied to; 0 for isotropic (any dimension).
    Eigen::Index dim() const;
};

// One-dimensional Matérn correlation at scaled distance t = |h| / theta.
// The closed forms use the argument sqrt(2 nu) * t.
double matern_corr(Smoothness nu, double t);

double cov(const KernelSpec& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& y);

// X holds one point per row. Assembly goes through the runtime-selected
// batch kernel in sink/simd/cov_batch.hpp.
Eigen::MatrixXd cov_matrix(const KernelSpec& spec, const Eigen::MatrixXd& X);
Eigen::VectorXd cov_vector(const KernelSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& x0);

// Cross covariance between the rows of A and the rows of B (|A| x |B|).
Eigen::MatrixXd cov_cross(const KernelSpec& spec, const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

}  // namespace sink
