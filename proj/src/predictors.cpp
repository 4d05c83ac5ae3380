#include "sink/predictors.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "sink/errors.hpp"
#include "sink/parallel.hpp"

namespace sink {
namespace {

constexpr double kRhoRoundoff = 1e-8;
constexpr double kCmleMinRho = 1e-6;
constexpr double kLimitMinDenominator = 1e-12;
constexpr double kDegenerateRho = 1.0 - 1e-8;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double clamp_variance(double var, double sigma2) {
    if (var < -kRhoRoundoff * sigma2) {
        std::ostringstream msg;
        msg << "Kriging variance " << var << " is negative beyond roundoff";
        throw NumericalError(msg.str());
    }
    return var < 0.0 ? 0.0 : var;
}

}  // namespace

QueryTerms query_terms_from_k(const FittedModel& model, Eigen::VectorXd k, double k00) {
    if (k.size() != model.n()) {
        throw InputError("covariance vector length does not match the training set");
    }
    QueryTerms t;
    t.k = std::move(k);
    t.k00 = k00;
    t.v = model.factor().matrixL().solve(t.k);
    t.kKk = t.v.squaredNorm();
    double r = std::sqrt(t.kKk / k00);
    if (r > 1.0 + kRhoRoundoff || !std::isfinite(r)) {
        std::ostringstream msg;
        msg << "rho = " << r << " exceeds 1 beyond roundoff";
        throw NumericalError(msg.str());
    }
    t.rho = r > 1.0 ? 1.0 : r;
    t.residual = t.k.dot(model.alpha());
    t.k_kinv_ones = t.k.dot(model.kinv_ones());
    return t;
}

QueryTerms query_terms(const FittedModel& model, const Eigen::VectorXd& x0) {
    return query_terms_from_k(model, model.cov_vector(x0), model.spec().sigma2);
}

double rho(const FittedModel& model, const Eigen::VectorXd& x0) {
    return query_terms(model, x0).rho;
}

double residual_weight(const PredictorKind& kind, const QueryTerms& t) {
    return std::visit(
        overloaded{
            [](const Kriging&) { return 1.0; },
            [&](const Cmle&) {
                if (t.rho < kCmleMinRho) {
                    throw UndefinedPredictorError("CMLE is unbounded at rho < 1e-6");
                }
                return 1.0 / (t.rho * t.rho);
            },
            [&](const Cbpk& c) {
                double delta = 0.0;
                if (c.delta) {
                    delta = *c.delta;
                    if (!(delta >= 0.0)) {
                        throw ConfigError("CBPK penalty ratio delta must be nonnegative");
                    }
                } else {
                    if (t.rho == 0.0) {
                        throw UndefinedPredictorError("spatial CBPK needs rho > 0");
                    }
                    delta = 1.0 / t.rho;
                }
                return (delta + 1.0) / (delta * t.rho * t.rho + 1.0);
            },
            [&](const Limit&) {
                if (std::fabs(t.k_kinv_ones) < kLimitMinDenominator) {
                    throw UndefinedPredictorError("Limit Kriging weight undefined: |k'K^-1 1| < 1e-12");
                }
                return 1.0 / t.k_kinv_ones;
            },
            [&](const Sink& s) {
                if (!(s.epsilon >= 0.0 && s.epsilon < 1.0)) {
                    throw ConfigError("SiNK epsilon must lie in [0, 1)");
                }
                const double floor = std::max(t.rho, s.epsilon);
                if (floor == 0.0) {
                    throw UndefinedPredictorError("SiNK with epsilon = 0 needs rho > 0");
                }
                return 1.0 / floor;
            },
        },
        kind);
}

namespace {

PredictionBundle base_bundle(const FittedModel& model, const Eigen::VectorXd& x0, const QueryTerms& t) {
    PredictionBundle b;
    b.x0 = x0;
    b.rho = t.rho;
    b.var_kriging = clamp_variance(t.k00 - t.kKk, model.spec().sigma2);
    b.mspe_sink = 2.0 / (1.0 + t.rho) * b.var_kriging;
    return b;
}

}  // namespace

PredictionBundle predict(const FittedModel& model, const Eigen::VectorXd& x0, const PredictorKind& kind) {
    const QueryTerms t = query_terms(model, x0);
    PredictionBundle b = base_bundle(model, x0, t);
    const double w = residual_weight(kind, t);
    const double mean = model.beta() + w * t.residual;
    b.weight_used = w;
    std::visit(overloaded{
                   [&](const Kriging&) { b.mean_kriging = mean; },
                   [&](const Cmle&) { b.mean_cmle = mean; },
                   [&](const Cbpk&) { b.mean_cbpk = mean; },
                   [&](const Limit&) { b.mean_limit = mean; },
                   [&](const Sink& s) {
                       b.mean_sink = mean;
                       b.epsilon_clipped = t.rho < s.epsilon;
                   },
               },
               kind);
    return b;
}

PredictionBundle predict_all(const FittedModel& model, const Eigen::VectorXd& x0, const PredictAllOptions& options) {
    const QueryTerms t = query_terms(model, x0);
    PredictionBundle b = base_bundle(model, x0, t);
    const double beta = model.beta();
    auto mean_or_nan = [&](const PredictorKind& kind) {
        try {
            return beta + residual_weight(kind, t) * t.residual;
        } catch (const UndefinedPredictorError&) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };
    b.mean_kriging = beta + t.residual;
    b.mean_cmle = mean_or_nan(Cmle{});
    b.mean_cbpk = beta + residual_weight(Cbpk{options.cbpk_delta}, t) * t.residual;
    b.mean_limit = mean_or_nan(Limit{});
    b.weight_used = residual_weight(Sink{options.epsilon}, t);
    b.mean_sink = beta + b.weight_used * t.residual;
    b.epsilon_clipped = t.rho < options.epsilon;
    return b;
}

std::vector<PredictionBundle> predict_batch(const FittedModel& model, const Eigen::MatrixXd& Xq,
                                            const PredictAllOptions& options) {
    std::vector<PredictionBundle> out(static_cast<std::size_t>(Xq.rows()));
    parallel_for(out.size(), [&](std::size_t i) {
        out[i] = predict_all(model, Xq.row(static_cast<Eigen::Index>(i)).transpose(), options);
    });
    return out;
}

void write_predictions_csv(std::ostream& out, const std::vector<PredictionBundle>& rows) {
    const Eigen::Index d = rows.empty() ? 0 : rows.front().x0.size();
    for (Eigen::Index j = 0; j < d; ++j) {
        out << "x0_" << (j + 1) << ',';
    }
    out << "rho,kriging,sink,limit,cmle,cbpk,var_kriging,mspe_sink,epsilon_clipped\n";
    out << std::setprecision(17);
    for (const auto& r : rows) {
        for (Eigen::Index j = 0; j < d; ++j) {
            out << r.x0[j] << ',';
        }
        out << r.rho << ',' << r.mean_kriging << ',' << r.mean_sink << ',' << r.mean_limit << ',' << r.mean_cmle
            << ',' << r.mean_cbpk << ',' << r.var_kriging << ',' << r.mspe_sink << ','
            << (r.epsilon_clipped ? 1 : 0) << '\n';
    }
}

double conditional_loglik(const FittedModel& model, const QueryTerms& t, double y0) {
    if (t.rho >= kDegenerateRho) {
        throw DegenerateConditioningError("conditioning on the target is degenerate at rho >= 1 - 1e-8");
    }
    const double n = static_cast<double>(model.n());
    const double c = (y0 - model.beta()) / t.k00;
    // d = (y - beta 1) - c k, and K~^-1 = K^-1 + u u' / s2 with u = K^-1 k.
    const double dKd = model.residual_quad() - 2.0 * c * t.residual + c * c * t.kKk;
    const double ud = t.residual - c * t.kKk;
    const double s2 = t.k00 - t.kKk;
    const double quad = dKd + ud * ud / s2;
    const double log_det = model.log_det() + std::log1p(-t.rho * t.rho);
    return -0.5 * quad - 0.5 * log_det - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

double conditional_loglik(const FittedModel& model, const Eigen::VectorXd& x0, double y0) {
    return conditional_loglik(model, query_terms(model, x0), y0);
}

}  // namespace sink
