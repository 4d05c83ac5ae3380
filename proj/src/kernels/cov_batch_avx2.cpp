// Built with -mavx2. Only reached after a runtime CPU check.
#include <immintrin.h>

#include "cov_batch_point.hpp"

namespace sink::simd {
namespace {

inline __m256d poly_avx2(Smoothness nu, __m256d s) {
    const __m256d one = _mm256_set1_pd(1.0);
    switch (nu) {
    case Smoothness::Half:
        return one;
    case Smoothness::ThreeHalves:
        return _mm256_add_pd(one, s);
    case Smoothness::FiveHalves:
        break;
    }
    // 1 + s + s*s*(1/3), same association as the scalar path
    const __m256d sq = _mm256_mul_pd(_mm256_mul_pd(s, s), _mm256_set1_pd(kThird));
    return _mm256_add_pd(_mm256_add_pd(one, s), sq);
}

}  // namespace

void cov_batch_avx2(const CovBatch& b, double* out) {
    constexpr std::size_t kLanes = 4;
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    const std::size_t full = b.count - b.count % kLanes;
    alignas(32) double lane_a[kLanes];
    alignas(32) double lane_b[kLanes];

    for (std::size_t i = 0; i < full; i += kLanes) {
        if (b.composition == Composition::Isotropic) {
            __m256d r2 = _mm256_setzero_pd();
            for (std::size_t j = 0; j < b.dim; ++j) {
                const __m256d x = _mm256_loadu_pd(b.points + j * b.ld + i);
                const __m256d h = _mm256_sub_pd(x, _mm256_set1_pd(b.query[j]));
                r2 = _mm256_add_pd(r2, _mm256_mul_pd(h, h));
            }
            _mm256_store_pd(lane_a, r2);
            for (std::size_t l = 0; l < kLanes; ++l) {
                out[i + l] = isotropic_finish(b, lane_a[l]);
            }
            continue;
        }
        __m256d sum = _mm256_setzero_pd();
        __m256d poly = _mm256_set1_pd(1.0);
        for (std::size_t j = 0; j < b.dim; ++j) {
            const __m256d x = _mm256_loadu_pd(b.points + j * b.ld + i);
            const __m256d h = _mm256_andnot_pd(sign_mask, _mm256_sub_pd(x, _mm256_set1_pd(b.query[j])));
            const __m256d s = _mm256_mul_pd(h, _mm256_set1_pd(b.inv_scale[j]));
            sum = _mm256_add_pd(sum, s);
            poly = _mm256_mul_pd(poly, poly_avx2(b.nu, s));
        }
        _mm256_store_pd(lane_a, sum);
        _mm256_store_pd(lane_b, poly);
        for (std::size_t l = 0; l < kLanes; ++l) {
            out[i + l] = tensor_finish(b, i + l, lane_a[l], lane_b[l]);
        }
    }
    for (std::size_t i = full; i < b.count; ++i) {
        out[i] = point_scalar(b, i);
    }
}

}  // namespace sink::simd
