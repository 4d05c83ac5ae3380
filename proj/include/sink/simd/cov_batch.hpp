#pragma once

// Batched covariance evaluation between one query point and a block of
// points stored column-major (structure of arrays). This is the inner loop
// of matrix assembly, likelihood evaluation and prediction, so it comes in a
// scalar reference flavour plus SIMD flavours picked at runtime.
//
// All flavours perform the same floating-point operations in the same order
// and call std::exp lane by lane, so their outputs are bitwise identical.
// The tensor-product form uses
//     prod_j p(s_j) exp(-s_j) = (prod_j p(s_j)) * exp(-sum_j s_j)
// to pay for one exponential per point instead of one per dimension.

#include <cstddef>
#include <string_view>
#include <vector>

#include "sink/kernel_types.hpp"

namespace sink::simd {

struct CovBatch {
    const double* points = nullptr;   // coordinate j of point i at points[j * ld + i]
    std::size_t ld = 0;
    std::size_t count = 0;
    std::size_t dim = 0;
    const double* query = nullptr;      // dim entries
    const double* inv_scale = nullptr;  // sqrt(2 nu) / theta_j; one entry when isotropic
    Smoothness nu = Smoothness::FiveHalves;
    Composition composition = Composition::TensorProduct;
    double sigma2 = 1.0;
};

using CovBatchFn = void (*)(const CovBatch&, double* out);

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa);

// ISAs compiled in and supported by the running CPU, scalar first.
std::vector<Isa> available_isas();

// Throws ConfigError when the ISA is unavailable.
CovBatchFn resolve(Isa isa);

// Best available ISA, unless SINK_SIMD=scalar|avx2|neon says otherwise.
Isa active_isa();

void cov_batch(const CovBatch& batch, double* out);

void cov_batch_scalar(const CovBatch& batch, double* out);
#if defined(SINK_HAVE_AVX2)
void cov_batch_avx2(const CovBatch& batch, double* out);
#endif
#if defined(SINK_HAVE_NEON)
void cov_batch_neon(const CovBatch& batch, double* out);
#endif

}  // namespace sink::simd
