// AArch64 only; NEON is part of the base ISA there.
#include <arm_neon.h>

#include "cov_batch_point.hpp"

namespace sink::simd {
namespace {

inline float64x2_t poly_neon(Smoothness nu, float64x2_t s) {
    const float64x2_t one = vdupq_n_f64(1.0);
    switch (nu) {
    case Smoothness::Half:
        return one;
    case Smoothness::ThreeHalves:
        return vaddq_f64(one, s);
    case Smoothness::FiveHalves:
        break;
    }
    const float64x2_t sq = vmulq_f64(vmulq_f64(s, s), vdupq_n_f64(kThird));
    return vaddq_f64(vaddq_f64(one, s), sq);
}

}  // namespace

void cov_batch_neon(const CovBatch& b, double* out) {
    constexpr std::size_t kLanes = 2;
    const std::size_t full = b.count - b.count % kLanes;
    double lane_a[kLanes];
    double lane_b[kLanes];

    for (std::size_t i = 0; i < full; i += kLanes) {
        if (b.composition == Composition::Isotropic) {
            float64x2_t r2 = vdupq_n_f64(0.0);
            for (std::size_t j = 0; j < b.dim; ++j) {
                const float64x2_t h = vsubq_f64(vld1q_f64(b.points + j * b.ld + i), vdupq_n_f64(b.query[j]));
                r2 = vaddq_f64(r2, vmulq_f64(h, h));
            }
            vst1q_f64(lane_a, r2);
            for (std::size_t l = 0; l < kLanes; ++l) {
                out[i + l] = isotropic_finish(b, lane_a[l]);
            }
            continue;
        }
        float64x2_t sum = vdupq_n_f64(0.0);
        float64x2_t poly = vdupq_n_f64(1.0);
        for (std::size_t j = 0; j < b.dim; ++j) {
            const float64x2_t h = vabsq_f64(vsubq_f64(vld1q_f64(b.points + j * b.ld + i), vdupq_n_f64(b.query[j])));
            const float64x2_t s = vmulq_f64(h, vdupq_n_f64(b.inv_scale[j]));
            sum = vaddq_f64(sum, s);
            poly = vmulq_f64(poly, poly_neon(b.nu, s));
        }
        vst1q_f64(lane_a, sum);
        vst1q_f64(lane_b, poly);
        for (std::size_t l = 0; l < kLanes; ++l) {
            out[i + l] = tensor_finish(b, i + l, lane_a[l], lane_b[l]);
        }
    }
    for (std::size_t i = full; i < b.count; ++i) {
        out[i] = point_scalar(b, i);
    }
}

}  // namespace sink::simd
