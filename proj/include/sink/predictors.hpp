#pragma once

#include <iosfwd>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "sink/gp_model.hpp"

namespace sink {

// Every predictor in the family has the form
//     beta + w(x0) * k(x0)' K^-1 (y - beta 1)
// and differs only in the residual inflation w.
struct Kriging {};
struct Cmle {};
struct Cbpk {
    // Constant penalty ratio delta >= 0; nullopt means the spatial choice
    // delta = 1 / rho(x0), which reproduces SiNK.
    std::optional<double> delta = 1.0;
    static Cbpk spatial() { return Cbpk{std::nullopt}; }
};
struct Limit {};
struct Sink {
    double epsilon = 1e-3;
};
using PredictorKind = std::variant<Kriging, Cmle, Cbpk, Limit, Sink>;

// Quantities shared by all predictors at one query point.
struct QueryTerms {
    Eigen::VectorXd k;   // k(x0)
    Eigen::VectorXd v;   // L^-1 k(x0), L the Cholesky factor of K
    double k00 = 0.0;    // k(x0, x0)
    double kKk = 0.0;    // k' K^-1 k
    double rho = 0.0;    // sqrt(kKk / k00), clamped into [0, 1]
    double residual = 0.0;     // k' K^-1 (y - beta 1)
    double k_kinv_ones = 0.0;  // k' K^-1 1
};

QueryTerms query_terms(const FittedModel& model, const Eigen::VectorXd& x0);
// Same, for a covariance vector supplied directly (synthetic queries).
QueryTerms query_terms_from_k(const FittedModel& model, Eigen::VectorXd k, double k00);

double rho(const FittedModel& model, const Eigen::VectorXd& x0);

// Residual inflation for `kind` at a query. Throws UndefinedPredictorError
// for CMLE with rho < 1e-6, Limit with |k'K^-1 1| < 1e-12 and the spatial
// CBPK or SiNK(epsilon = 0) at rho = 0; ConfigError for delta < 0 or
// epsilon outside [0, 1).
double residual_weight(const PredictorKind& kind, const QueryTerms& terms);

struct PredictionBundle {
    Eigen::VectorXd x0;
    double rho = 0.0;
    double mean_kriging = std::numeric_limits<double>::quiet_NaN();
    double mean_cmle = std::numeric_limits<double>::quiet_NaN();
    double mean_cbpk = std::numeric_limits<double>::quiet_NaN();
    double mean_limit = std::numeric_limits<double>::quiet_NaN();
    double mean_sink = std::numeric_limits<double>::quiet_NaN();
    double var_kriging = 0.0;
    // (2 / (1 + rho)) * var_kriging with the unclipped rho.
    double mspe_sink = 0.0;
    double weight_used = 1.0;
    bool epsilon_clipped = false;
};

// Fills rho, variances and the mean for `kind` only.
PredictionBundle predict(const FittedModel& model, const Eigen::VectorXd& x0, const PredictorKind& kind);

struct PredictAllOptions {
    double epsilon = 1e-3;
    double cbpk_delta = 1.0;
};

// Fills every mean. CMLE and Limit are left NaN where their weight is
// undefined instead of throwing; weight_used reports the SiNK weight.
PredictionBundle predict_all(const FittedModel& model, const Eigen::VectorXd& x0, const PredictAllOptions& options = {});

// predict_all over the rows of Xq, in parallel.
std::vector<PredictionBundle> predict_batch(const FittedModel& model, const Eigen::MatrixXd& Xq,
                                            const PredictAllOptions& options = {});

// Columns: x0_1..x0_d, rho, kriging, sink, limit, cmle, cbpk, var_kriging,
// mspe_sink, epsilon_clipped.
void write_predictions_csv(std::ostream& out, const std::vector<PredictionBundle>& rows);

// Log-likelihood of the training data conditioned on Y(x0) = y0, with the
// full Gaussian normaliser of the conditional covariance. Uses the
// Woodbury form; never builds the conditional inverse.
double conditional_loglik(const FittedModel& model, const Eigen::VectorXd& x0, double y0);
double conditional_loglik(const FittedModel& model, const QueryTerms& terms, double y0);

}  // namespace sink
