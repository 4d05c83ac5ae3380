#pragma once

// Per-point arithmetic shared by every batch flavour. Internal linkage on
// purpose: each translation unit is built with different target flags and
// must keep its own copy.

#include <cmath>
#include <cstddef>

#include "sink/simd/cov_batch.hpp"

namespace sink::simd {
namespace {

// Above this summed scaled distance the polynomial product may overflow
// before it meets exp(-S); those points take the per-dimension route.
constexpr double kExpSumGuard = 700.0;
constexpr double kThird = 1.0 / 3.0;

inline double matern_poly(Smoothness nu, double s) {
    switch (nu) {
    case Smoothness::Half:
        return 1.0;
    case Smoothness::ThreeHalves:
        return 1.0 + s;
    case Smoothness::FiveHalves:
        break;
    }
    return 1.0 + s + s * s * kThird;
}

inline double tensor_guarded(const CovBatch& b, std::size_t i) {
    double prod = 1.0;
    for (std::size_t j = 0; j < b.dim; ++j) {
        const double s = std::fabs(b.points[j * b.ld + i] - b.query[j]) * b.inv_scale[j];
        prod *= matern_poly(b.nu, s) * std::exp(-s);
    }
    return b.sigma2 * prod;
}

// Finishes a tensor-product point from its accumulated sum and product.
inline double tensor_finish(const CovBatch& b, std::size_t i, double sum, double poly) {
    if (!(sum <= kExpSumGuard)) {
        return tensor_guarded(b, i);
    }
    return b.sigma2 * (poly * std::exp(-sum));
}

inline double isotropic_finish(const CovBatch& b, double r2) {
    const double s = std::sqrt(r2) * b.inv_scale[0];
    return b.sigma2 * (matern_poly(b.nu, s) * std::exp(-s));
}

inline double point_scalar(const CovBatch& b, std::size_t i) {
    if (b.composition == Composition::Isotropic) {
        double r2 = 0.0;
        for (std::size_t j = 0; j < b.dim; ++j) {
            const double h = b.points[j * b.ld + i] - b.query[j];
            r2 += h * h;
        }
        return isotropic_finish(b, r2);
    }
    double sum = 0.0;
    double poly = 1.0;
    for (std::size_t j = 0; j < b.dim; ++j) {
        const double s = std::fabs(b.points[j * b.ld + i] - b.query[j]) * b.inv_scale[j];
        sum += s;
        poly *= matern_poly(b.nu, s);
    }
    return tensor_finish(b, i, sum, poly);
}

}  // namespace
}  // namespace sink::simd
