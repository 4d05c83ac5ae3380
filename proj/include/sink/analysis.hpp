#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "sink/gp_model.hpp"
#include "sink/predictors.hpp"

namespace sink {

// ---------------------------------------------------------------------------
// Closed-form theory. z is the standardized deviation |y0 - beta| / sqrt(k00)
// and M a threshold on it.
// ---------------------------------------------------------------------------

enum class MspeKind { Kriging, Sink };

// E[(Yhat - Y0)^2 | Y0 = y0]:
//   Kriging: k00 (rho^2 - rho^4 + z^2 (1 - rho^2)^2)
//   SiNK:    k00 (1 - rho^2 + z^2 (1 - rho)^2)
double cond_mspe(MspeKind kind, double rho, double z, double k00);

// The z beyond which SiNK's conditional MSPE is no larger than Kriging's,
// sqrt((1+rho)^2 / ((1+rho)^2 - 1)). +infinity at rho = 0.
double critical_z(double rho);

// 1 - Phi(x), accurate in the upper tail.
double normal_upper_tail(double x);
double normal_pdf(double x);
// Phi^-1(p) for p in (0, 1).
double normal_quantile(double p);

// E[Z^2 | Z > M] for standard normal Z: (M phi(M) + 1 - Phi(M)) / (1 - Phi(M)).
double tail_second_moment(double M);

// Threshold rho above which the region-conditional (Z >= M) MSPE of SiNK is
// no larger than Kriging's: -1 + sqrt(1 + (1 - Phi(M)) / (M phi(M))).
double critical_rho_region(double M);

// CMSPE_SiNK / CMSPE_K over the region Z >= M. Defined as 1 at rho = 1,
// where both sides vanish.
double cmspe_ratio(double rho, double M);

struct RatioGrid {
    std::vector<double> rho;
    std::vector<double> M;
    Eigen::MatrixXd ratio;  // ratio(i, j) at (rho[i], M[j])
    std::string note = "ratio at rho=1 is defined as 1 by continuity";
};

RatioGrid cmspe_ratio_grid(const std::vector<double>& rho_grid, const std::vector<double>& M_grid);

// Long format: rho,M,ratio
void write_ratio_grid_csv(std::ostream& out, const RatioGrid& grid);
// rho,critical_z
void write_critical_z_csv(std::ostream& out, const std::vector<double>& rho_grid);
// M,critical_rho
void write_critical_rho_csv(std::ostream& out, const std::vector<double>& M_grid);

// ---------------------------------------------------------------------------
// Monte Carlo oracles. Draws are split into a fixed number of chunks, each
// with its own RNG stream; chunks run in parallel and are reduced in order,
// so results depend only on (seed, n_draws, chunks).
// ---------------------------------------------------------------------------

struct McConfig {
    std::size_t n_draws = 100000;
    std::uint64_t seed = 0;
    Eigen::MatrixXd queries;  // one query point per row
    std::size_t chunks = 16;
    // SiNK floor used by the sampled predictor.
    double epsilon = 0.0;
};

struct Estimate {
    double mean = 0.0;
    double se = 0.0;  // standard error of the mean
};

struct McJointResult {
    double rho = 0.0;
    double var_kriging = 0.0;  // analytic s^2, for reference
    Estimate mspe_kriging;
    Estimate mspe_sink;
    // Per-draw ratio of means is not a mean; this is mspe_sink / mspe_kriging.
    double ratio = 0.0;
};

// Samples (Y(x0), y) from their joint Gaussian law under the model's kernel
// and mean, and averages both predictors' squared errors. The joint
// covariance is factorized on its own (pivoted LDL'), independent of the
// model's factor. Nothing is refit.
std::vector<McJointResult> mc_joint_mspe(const FittedModel& model, const McConfig& cfg);

struct FixedTarget {
    double y0 = 0.0;
};
struct RegionTarget {
    double M = 2.0;
};
using ConditionalTarget = std::variant<FixedTarget, RegionTarget>;

struct McConditionalResult {
    double rho = 0.0;
    double k00 = 0.0;
    Estimate mean_y0;  // E[Y0 | target]
    Estimate mean_kriging;
    Estimate mean_sink;
    Estimate mean_cmle;  // NaN when CMLE is undefined at this query
    Estimate bias_kriging;  // E[Yhat - Y0 | target]
    Estimate bias_sink;
    Estimate bias_cmle;
    Estimate mspe_kriging;  // E[(Yhat - Y0)^2 | target]
    Estimate mspe_sink;
    Estimate mspe_cmle;
    // E[(Yhat_S - Y0)^2 - (Yhat_K - Y0)^2 | target] on common draws.
    Estimate mspe_difference;
};

// Cholesky factor of K~ = K - k k' / k00, by rank-one downdate of the
// model's factor. Throws DegenerateConditioningError when rho >= 1 - 1e-8
// or the downdate breaks down.
Eigen::LLT<Eigen::MatrixXd> conditional_factor(const FittedModel& model, const QueryTerms& terms);

// Samples y from N(m~, K~) given Y(x0) = y0 (fixed) or given |Z| >= M
// (region; Z drawn from the truncated normal by inverse CDF), and
// estimates conditional means, biases and MSPEs of Kriging, SiNK and CMLE.
std::vector<McConditionalResult> mc_conditional(const FittedModel& model, const McConfig& cfg,
                                                const ConditionalTarget& target);

}  // namespace sink
