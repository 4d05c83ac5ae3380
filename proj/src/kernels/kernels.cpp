#include "sink/kernels.hpp"

#include <cmath>
#include <string>

#include "sink/errors.hpp"
#include "sink/simd/cov_batch.hpp"

namespace sink {

Smoothness smoothness_from_value(double nu) {
    if (nu == 0.5) {
        return Smoothness::Half;
    }
    if (nu == 1.5) {
        return Smoothness::ThreeHalves;
    }
    if (nu == 2.5) {
        return Smoothness::FiveHalves;
    }
    throw ConfigError("unsupported Matérn smoothness nu=" + std::to_string(nu) + " (expected 0.5, 1.5 or 2.5)");
}

double smoothness_value(Smoothness nu) {
    switch (nu) {
    case Smoothness::Half:
        return 0.5;
    case Smoothness::ThreeHalves:
        return 1.5;
    case Smoothness::FiveHalves:
        break;
    }
    return 2.5;
}

Composition composition_from_name(std::string_view name) {
    if (name == "tensor") {
        return Composition::TensorProduct;
    }
    if (name == "isotropic") {
        return Composition::Isotropic;
    }
    throw ConfigError("unknown kernel composition '" + std::string(name) + "'");
}

std::string_view composition_name(Composition c) {
    return c == Composition::Isotropic ? "isotropic" : "tensor";
}

void KernelSpec::validate() const {
    if (theta.size() == 0) {
        throw ConfigError("kernel needs at least one length-scale");
    }
    if (composition == Composition::Isotropic && theta.size() != 1) {
        throw ConfigError("isotropic kernel takes a single length-scale, got " + std::to_string(theta.size()));
    }
    for (Eigen::Index j = 0; j < theta.size(); ++j) {
        if (!(theta[j] > 0.0) || !std::isfinite(theta[j])) {
            throw ConfigError("length-scale theta[" + std::to_string(j) + "] must be positive and finite");
        }
    }
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
        throw ConfigError("kernel variance sigma2 must be positive and finite");
    }
}

Eigen::Index KernelSpec::dim() const {
    return composition == Composition::Isotropic ? 0 : theta.size();
}

double matern_corr(Smoothness nu, double t) {
    if (!(t >= 0.0)) {
        throw InputError("Matérn correlation needs a nonnegative scaled distance");
    }
    switch (nu) {
    case Smoothness::Half:
        return std::exp(-t);
    case Smoothness::ThreeHalves: {
        const double s = std::sqrt(3.0) * t;
        return (1.0 + s) * std::exp(-s);
    }
    case Smoothness::FiveHalves:
        break;
    }
    const double s = std::sqrt(5.0) * t;
    return (1.0 + s + s * s / 3.0) * std::exp(-s);
}

namespace {

void check_dims(const KernelSpec& spec, Eigen::Index a, Eigen::Index b) {
    if (a != b) {
        throw InputError("point dimension mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
    }
    if (spec.composition == Composition::TensorProduct && a != spec.theta.size()) {
        throw InputError("point dimension " + std::to_string(a) + " does not match " +
                         std::to_string(spec.theta.size()) + " length-scales");
    }
}

Eigen::VectorXd inverse_scales(const KernelSpec& spec) {
    const double root = std::sqrt(2.0 * smoothness_value(spec.nu));
    return root * spec.theta.cwiseInverse();
}

simd::CovBatch make_batch(const KernelSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& inv_scale,
                          const double* query) {
    simd::CovBatch b;
    b.points = X.data();
    b.ld = static_cast<std::size_t>(X.rows());
    b.count = static_cast<std::size_t>(X.rows());
    b.dim = static_cast<std::size_t>(X.cols());
    b.query = query;
    b.inv_scale = inv_scale.data();
    b.nu = spec.nu;
    b.composition = spec.composition;
    b.sigma2 = spec.sigma2;
    return b;
}

}  // namespace

double cov(const KernelSpec& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    check_dims(spec, x.size(), y.size());
    if (spec.composition == Composition::Isotropic) {
        return spec.sigma2 * matern_corr(spec.nu, (x - y).norm() / spec.theta[0]);
    }
    double c = 1.0;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        c *= matern_corr(spec.nu, std::fabs(x[j] - y[j]) / spec.theta[j]);
    }
    return spec.sigma2 * c;
}

Eigen::MatrixXd cov_matrix(const KernelSpec& spec, const Eigen::MatrixXd& X) {
    const Eigen::Index n = X.rows();
    if (n > 0) {
        check_dims(spec, X.cols(), X.cols());
    }
    const Eigen::VectorXd inv_scale = inverse_scales(spec);
    Eigen::MatrixXd K(n, n);
    Eigen::VectorXd query(X.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        query = X.row(i).transpose();
        simd::CovBatch b = make_batch(spec, X, inv_scale, query.data());
        b.points = X.data() + i;
        b.count = static_cast<std::size_t>(n - i);
        simd::cov_batch(b, K.col(i).data() + i);
        K(i, i) = spec.sigma2;
        K.row(i).tail(n - i - 1) = K.col(i).tail(n - i - 1).transpose();
    }
    return K;
}

Eigen::VectorXd cov_vector(const KernelSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& x0) {
    check_dims(spec, X.cols(), x0.size());
    const Eigen::VectorXd inv_scale = inverse_scales(spec);
    Eigen::VectorXd k(X.rows());
    simd::cov_batch(make_batch(spec, X, inv_scale, x0.data()), k.data());
    return k;
}

Eigen::MatrixXd cov_cross(const KernelSpec& spec, const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    check_dims(spec, A.cols(), B.cols());
    const Eigen::VectorXd inv_scale = inverse_scales(spec);
    Eigen::MatrixXd out(A.rows(), B.rows());
    Eigen::VectorXd query(B.cols());
    for (Eigen::Index j = 0; j < B.rows(); ++j) {
        query = B.row(j).transpose();
        simd::cov_batch(make_batch(spec, A, inv_scale, query.data()), out.col(j).data());
    }
    return out;
}

}  // namespace sink
