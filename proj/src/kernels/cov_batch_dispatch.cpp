#include <cstdlib>
#include <string>

#include "sink/errors.hpp"
#include "sink/simd/cov_batch.hpp"

namespace sink::simd {
namespace {

bool cpu_supports(Isa isa) {
    switch (isa) {
    case Isa::Scalar:
        return true;
    case Isa::Avx2:
#if defined(SINK_HAVE_AVX2)
        return __builtin_cpu_supports("avx2");
#else
        return false;
#endif
    case Isa::Neon:
#if defined(SINK_HAVE_NEON)
        return true;
#else
        return false;
#endif
    }
    return false;
}

Isa pick_isa() {
    if (const char* env = std::getenv("SINK_SIMD")) {
        const std::string want(env);
        for (Isa isa : available_isas()) {
            if (isa_name(isa) == want) {
                return isa;
            }
        }
    }
    return available_isas().back();
}

}  // namespace

std::string_view isa_name(Isa isa) {
    switch (isa) {
    case Isa::Scalar:
        return "scalar";
    case Isa::Avx2:
        return "avx2";
    case Isa::Neon:
        return "neon";
    }
    return "unknown";
}

std::vector<Isa> available_isas() {
    std::vector<Isa> out;
    for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon}) {
        if (cpu_supports(isa)) {
            out.push_back(isa);
        }
    }
    return out;
}

CovBatchFn resolve(Isa isa) {
    if (!cpu_supports(isa)) {
        throw ConfigError("SIMD flavour '" + std::string(isa_name(isa)) + "' is not available on this machine");
    }
    switch (isa) {
    case Isa::Scalar:
        return &cov_batch_scalar;
#if defined(SINK_HAVE_AVX2)
    case Isa::Avx2:
        return &cov_batch_avx2;
#endif
#if defined(SINK_HAVE_NEON)
    case Isa::Neon:
        return &cov_batch_neon;
#endif
    default:
        break;
    }
    return &cov_batch_scalar;
}

Isa active_isa() {
    static const Isa isa = pick_isa();
    return isa;
}

void cov_batch(const CovBatch& batch, double* out) {
    static const CovBatchFn fn = resolve(active_isa());
    fn(batch, out);
}

}  // namespace sink::simd
