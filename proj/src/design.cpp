#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include "sink/errors.hpp"
#include "sink/random.hpp"
#include "sink/testbed.hpp"

namespace sink {
namespace {

constexpr int kDigits = 12;

bool is_prime(int b) {
    if (b < 2) {
        return false;
    }
    for (int f = 2; f * f <= b; ++f) {
        if (b % f == 0) {
            return false;
        }
    }
    return true;
}

Eigen::MatrixXd uniform_design(const DesignSpec& spec) {
    Rng rng = make_rng(spec.seed, 0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::MatrixXd U(spec.n, spec.dim);
    for (Eigen::Index i = 0; i < spec.n; ++i) {
        for (Eigen::Index j = 0; j < spec.dim; ++j) {
            U(i, j) = unif(rng);
        }
    }
    return U;
}

Eigen::MatrixXd faure_design(const DesignSpec& spec) {
    const int b = spec.base;
    if (!is_prime(b)) {
        throw ConfigError("Faure base must be prime, got " + std::to_string(b));
    }
    if (b < spec.dim) {
        throw ConfigError("Faure base " + std::to_string(b) + " is smaller than the dimension " +
                          std::to_string(spec.dim));
    }
    if (static_cast<double>(spec.n) > std::pow(static_cast<double>(b), kDigits)) {
        throw ConfigError("Faure design size exceeds the digit depth");
    }

    // binom(k, r) mod b for k, r < kDigits
    std::array<std::array<int, kDigits>, kDigits> binom{};
    for (int k = 0; k < kDigits; ++k) {
        binom[k][0] = 1;
        for (int r = 1; r <= k; ++r) {
            binom[k][r] = (binom[k - 1][r - 1] + (r < k ? binom[k - 1][r] : 0)) % b;
        }
    }

    // Generator matrix for coordinate j is the j-th power of the Pascal
    // matrix: C_j(r, k) = binom(k, r) j^(k - r) mod b.
    const auto dim = static_cast<std::size_t>(spec.dim);
    std::vector<std::array<std::array<int, kDigits>, kDigits>> gen(dim);
    for (std::size_t j = 0; j < dim; ++j) {
        for (int r = 0; r < kDigits; ++r) {
            int power = 1;  // j^(k - r), with 0^0 = 1
            for (int k = r; k < kDigits; ++k) {
                gen[j][r][k] = binom[k][r] * power % b;
                power = power * static_cast<int>(j) % b;
            }
        }
    }

    // Per-dimension, per-digit random permutation and shift.
    Rng rng = make_rng(spec.seed, 1);
    std::vector<std::array<std::vector<int>, kDigits>> perm(dim);
    std::vector<std::array<int, kDigits>> shift(dim);
    std::uniform_int_distribution<int> digit(0, b - 1);
    for (std::size_t j = 0; j < dim; ++j) {
        for (int r = 0; r < kDigits; ++r) {
            perm[j][r].resize(static_cast<std::size_t>(b));
            std::iota(perm[j][r].begin(), perm[j][r].end(), 0);
            std::shuffle(perm[j][r].begin(), perm[j][r].end(), rng);
            shift[j][r] = digit(rng);
        }
    }

    Eigen::MatrixXd U(spec.n, spec.dim);
    std::array<int, kDigits> a{};
    for (Eigen::Index i = 0; i < spec.n; ++i) {
        auto idx = static_cast<long long>(i);
        for (int k = 0; k < kDigits; ++k) {
            a[k] = static_cast<int>(idx % b);
            idx /= b;
        }
        for (std::size_t j = 0; j < dim; ++j) {
            double x = 0.0;
            double scale = 1.0 / b;
            for (int r = 0; r < kDigits; ++r) {
                int y = 0;
                for (int k = r; k < kDigits; ++k) {
                    y += gen[j][r][k] * a[k];
                }
                y = (perm[j][r][static_cast<std::size_t>(y % b)] + shift[j][r]) % b;
                x += y * scale;
                scale /= b;
            }
            U(i, static_cast<Eigen::Index>(j)) = x;
        }
    }
    return U;
}

}  // namespace

DesignKind design_kind_from_name(std::string_view name) {
    if (name == "uniform") {
        return DesignKind::Uniform;
    }
    if (name == "faure") {
        return DesignKind::Faure;
    }
    throw ConfigError("unknown design kind '" + std::string(name) + "'");
}

std::string_view design_kind_name(DesignKind kind) {
    return kind == DesignKind::Faure ? "faure" : "uniform";
}

Eigen::MatrixXd design(const DesignSpec& spec) {
    if (spec.n < 1 || spec.dim < 1) {
        throw ConfigError("design needs n >= 1 and dim >= 1");
    }
    return spec.kind == DesignKind::Faure ? faure_design(spec) : uniform_design(spec);
}

}  // namespace sink
