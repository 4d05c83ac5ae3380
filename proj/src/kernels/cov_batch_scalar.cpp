#include "cov_batch_point.hpp"

namespace sink::simd {

void cov_batch_scalar(const CovBatch& batch, double* out) {
    for (std::size_t i = 0; i < batch.count; ++i) {
        out[i] = point_scalar(batch, i);
    }
}

}  // namespace sink::simd
