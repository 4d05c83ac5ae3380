#pragma once

// Helpers shared by the unit and acceptance tests: random problem
// generators and small dense oracles that do not go through the library's
// factorizations.

#include <cmath>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sink/gp_model.hpp"
#include "sink/kernels.hpp"
#include "sink/random.hpp"

namespace test_support {

inline Eigen::MatrixXd uniform_points(sink::Rng& rng, Eigen::Index n, Eigen::Index d, double lo = 0.0,
                                      double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Eigen::MatrixXd X(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            X(i, j) = u(rng);
        }
    }
    return X;
}

inline Eigen::VectorXd normal_vector(sink::Rng& rng, Eigen::Index n) {
    std::normal_distribution<double> z;
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v(i) = z(rng);
    }
    return v;
}

inline sink::KernelSpec random_spec(sink::Rng& rng, Eigen::Index d) {
    std::uniform_real_distribution<double> th(0.15, 0.8);
    std::uniform_real_distribution<double> s2(0.3, 3.0);
    std::uniform_int_distribution<int> nu(0, 2);
    sink::KernelSpec spec;
    spec.nu = static_cast<sink::Smoothness>(nu(rng));
    spec.theta.resize(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        spec.theta(j) = th(rng);
    }
    spec.sigma2 = s2(rng);
    return spec;
}

// Random model with a GLS mean; y is arbitrary (not a GP draw).
inline sink::FittedModel random_model(sink::Rng& rng, Eigen::Index n, Eigen::Index d) {
    const Eigen::MatrixXd X = uniform_points(rng, n, d);
    const sink::KernelSpec spec = random_spec(rng, d);
    std::uniform_real_distribution<double> shift(-5.0, 5.0);
    const Eigen::VectorXd y = normal_vector(rng, n).array() * 2.0 + shift(rng);
    return sink::fit_fixed(X, y, spec);
}

// Gaussian elimination with partial pivoting.
inline Eigen::VectorXd dense_solve(Eigen::MatrixXd A, Eigen::VectorXd b) {
    const Eigen::Index n = A.rows();
    for (Eigen::Index c = 0; c < n; ++c) {
        Eigen::Index p = c;
        for (Eigen::Index r = c + 1; r < n; ++r) {
            if (std::abs(A(r, c)) > std::abs(A(p, c))) {
                p = r;
            }
        }
        A.row(c).swap(A.row(p));
        std::swap(b(c), b(p));
        for (Eigen::Index r = c + 1; r < n; ++r) {
            const double f = A(r, c) / A(c, c);
            for (Eigen::Index k = c; k < n; ++k) {
                A(r, k) -= f * A(c, k);
            }
            b(r) -= f * b(c);
        }
    }
    Eigen::VectorXd x(n);
    for (Eigen::Index r = n - 1; r >= 0; --r) {
        double s = b(r);
        for (Eigen::Index k = r + 1; k < n; ++k) {
            s -= A(r, k) * x(k);
        }
        x(r) = s / A(r, r);
    }
    return x;
}

// log |det A| by elimination with partial pivoting.
inline double dense_log_abs_det(Eigen::MatrixXd A) {
    const Eigen::Index n = A.rows();
    double acc = 0.0;
    for (Eigen::Index c = 0; c < n; ++c) {
        Eigen::Index p = c;
        for (Eigen::Index r = c + 1; r < n; ++r) {
            if (std::abs(A(r, c)) > std::abs(A(p, c))) {
                p = r;
            }
        }
        A.row(c).swap(A.row(p));
        acc += std::log(std::abs(A(c, c)));
        for (Eigen::Index r = c + 1; r < n; ++r) {
            const double f = A(r, c) / A(c, c);
            A.row(r).tail(n - c) -= f * A.row(c).tail(n - c);
        }
    }
    return acc;
}

// Laplace expansion along the first row.
inline double cofactor_det(const Eigen::MatrixXd& A) {
    const Eigen::Index n = A.rows();
    if (n == 1) {
        return A(0, 0);
    }
    double det = 0.0;
    for (Eigen::Index c = 0; c < n; ++c) {
        Eigen::MatrixXd minor(n - 1, n - 1);
        for (Eigen::Index r = 1; r < n; ++r) {
            Eigen::Index cc = 0;
            for (Eigen::Index k = 0; k < n; ++k) {
                if (k != c) {
                    minor(r - 1, cc++) = A(r, k);
                }
            }
        }
        det += ((c % 2) ? -1.0 : 1.0) * A(0, c) * cofactor_det(minor);
    }
    return det;
}

// Maximiser of a unimodal f on [lo, hi].
inline double golden_max(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-10) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol * (1.0 + std::abs(a) + std::abs(b))) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

// Root of a continuous f with a sign change on [lo, hi].
inline double bisect(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
    double flo = f(lo);
    for (int i = 0; i < iters; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// One-point model in 1-d with the exponential kernel (theta = 1). The
// training point sits at log(r), so a query at the origin has correlation r.
inline sink::FittedModel one_point_model(double r, double y1, double beta, double sigma2 = 1.0) {
    sink::KernelSpec spec;
    spec.nu = sink::Smoothness::Half;
    spec.theta = Eigen::VectorXd::Constant(1, 1.0);
    spec.sigma2 = sigma2;
    Eigen::MatrixXd X(1, 1);
    X(0, 0) = std::log(r);  // query at the origin
    return sink::fit_fixed(X, Eigen::VectorXd::Constant(1, y1), spec, beta);
}

inline Eigen::VectorXd origin(Eigen::Index d = 1) { return Eigen::VectorXd::Zero(d); }

}  // namespace test_support
