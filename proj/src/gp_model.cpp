#include "sink/gp_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "sink/errors.hpp"
#include "sink/nelder_mead.hpp"
#include "sink/random.hpp"

namespace sink {
namespace {

constexpr double kFirstJitter = 1e-10;
constexpr double kMaxJitter = 1e-6;
constexpr double kDuplicateTol = 1e-12;

double coordinate_range(const Eigen::MatrixXd& X) {
    if (X.rows() == 0) {
        return 1.0;
    }
    const double r = (X.colwise().maxCoeff() - X.colwise().minCoeff()).maxCoeff();
    return r > 0.0 ? r : 1.0;
}

bool llt_ok(const Eigen::LLT<Eigen::MatrixXd>& llt) {
    if (llt.info() != Eigen::Success) {
        return false;
    }
    const auto diag = llt.matrixLLT().diagonal();
    return diag.allFinite() && (diag.array() > 0.0).all();
}

double log_det_from(const Eigen::LLT<Eigen::MatrixXd>& llt) {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

struct Profile {
    Factorization fac;
    Eigen::VectorXd kinv_ones;
    double beta = 0.0;
    double quad = 0.0;
    double log_det = 0.0;
};

// Shared core of fit_fixed and the profile likelihood; no data checks.
Profile solve_core(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const KernelSpec& spec,
                   std::optional<double> beta, double min_jitter) {
    Profile p;
    const Eigen::MatrixXd K = cov_matrix(spec, X);
    p.fac = factorize(K, spec.sigma2, X, min_jitter);
    p.kinv_ones = p.fac.llt.solve(Eigen::VectorXd::Ones(X.rows()));
    p.beta = beta ? *beta : p.kinv_ones.dot(y) / p.kinv_ones.sum();
    const Eigen::VectorXd r = y.array() - p.beta;
    p.quad = r.dot(p.fac.llt.solve(r));
    p.log_det = log_det_from(p.fac.llt);
    return p;
}

void check_spec_dims(const KernelSpec& spec, const Eigen::MatrixXd& X) {
    spec.validate();
    if (spec.composition == Composition::TensorProduct && spec.theta.size() != X.cols()) {
        throw InputError("kernel has " + std::to_string(spec.theta.size()) + " length-scales for " +
                         std::to_string(X.cols()) + "-dimensional inputs");
    }
}

}  // namespace

void FitOptions::validate() const {
    for (const auto& [lo, hi] : theta_bounds) {
        if (!(lo > 0.0) || !(lo < hi) || !std::isfinite(hi)) {
            throw ConfigError("theta bounds need 0 < lo < hi < inf");
        }
    }
    if (n_restarts < 1) {
        throw ConfigError("n_restarts must be at least 1");
    }
    if (!(tol > 0.0)) {
        throw ConfigError("tol must be positive");
    }
    if (max_evals < 0) {
        throw ConfigError("max_evals must be nonnegative");
    }
}

Eigen::VectorXd FittedModel::cov_vector(const Eigen::VectorXd& x0) const {
    return sink::cov_vector(spec_, x_, x0);
}

Factorization factorize(const Eigen::MatrixXd& K, double sigma2, const Eigen::MatrixXd& X, double min_jitter) {
    const Eigen::Index n = K.rows();
    double jitter = min_jitter > 0.0 ? min_jitter : 0.0;
    Factorization out;
    while (true) {
        if (jitter == 0.0) {
            out.llt.compute(K);
        } else {
            Eigen::MatrixXd Kj = K;
            Kj.diagonal().array() += jitter;
            out.llt.compute(Kj);
        }
        if (llt_ok(out.llt)) {
            out.jitter = jitter;
            return out;
        }
        if (jitter >= kMaxJitter * sigma2) {
            break;
        }
        jitter = jitter == 0.0 ? kFirstJitter * sigma2 : std::min(jitter * 10.0, kMaxJitter * sigma2);
    }

    Eigen::Index bi = 0;
    Eigen::Index bj = n > 1 ? 1 : 0;
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = j + 1; i < n; ++i) {
            if (K(i, j) > best) {
                best = K(i, j);
                bi = i;
                bj = j;
            }
        }
    }
    std::ostringstream msg;
    msg << "covariance matrix is singular even with jitter " << kMaxJitter << "*sigma2; most correlated pair is rows "
        << bj << " and " << bi << " (correlation " << best / sigma2 << ")";
    if (X.rows() == n && n > 1) {
        msg << ": [" << X.row(bj) << "] vs [" << X.row(bi) << "]";
    }
    throw SingularModelError(msg.str());
}

void check_training_data(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (X.rows() < 1) {
        throw InputError("need at least one training point");
    }
    if (X.rows() != y.size()) {
        throw InputError("training inputs and outputs differ in length");
    }
    if (!X.allFinite() || !y.allFinite()) {
        throw InputError("training data must be finite");
    }
    const double tol = kDuplicateTol * coordinate_range(X);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < X.rows(); ++j) {
            if ((X.row(i) - X.row(j)).norm() < tol) {
                std::ostringstream msg;
                msg << "duplicate training rows " << i << " and " << j << ": [" << X.row(i) << "]";
                throw InputError(msg.str());
            }
        }
    }
}

FittedModel fit_fixed_with_jitter(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const KernelSpec& spec,
                                  std::optional<double> beta, double min_jitter) {
    check_spec_dims(spec, X);
    check_training_data(X, y);
    Profile p = solve_core(X, y, spec, beta, min_jitter);

    FittedModel m;
    m.x_ = X;
    m.y_ = y;
    m.spec_ = spec;
    m.beta_ = p.beta;
    m.jitter_ = p.fac.jitter;
    m.llt_ = std::move(p.fac.llt);
    m.kinv_ones_ = std::move(p.kinv_ones);
    m.alpha_ = m.llt_.solve((y.array() - p.beta).matrix());
    m.residual_quad_ = p.quad;
    m.log_det_ = p.log_det;
    return m;
}

FittedModel fit_fixed(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const KernelSpec& spec,
                      std::optional<double> beta) {
    return fit_fixed_with_jitter(X, y, spec, beta, 0.0);
}

double log_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const KernelSpec& spec, double beta) {
    const FittedModel m = fit_fixed(X, y, spec, beta);
    const double n = static_cast<double>(X.rows());
    return -0.5 * m.residual_quad() - 0.5 * m.log_det() - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

ProfileResult profile_log_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const KernelSpec& spec,
                                     std::optional<double> beta) {
    KernelSpec corr = spec;
    corr.sigma2 = 1.0;
    check_spec_dims(corr, X);
    const Profile p = solve_core(X, y, corr, beta, 0.0);
    const double n = static_cast<double>(X.rows());
    ProfileResult out;
    out.beta = p.beta;
    out.sigma2 = std::max(p.quad / n, std::numeric_limits<double>::min());
    out.log_likelihood = -0.5 * n * std::log(out.sigma2) - 0.5 * p.log_det -
                         0.5 * n * (std::log(2.0 * std::numbers::pi) + 1.0);
    return out;
}

std::vector<std::pair<double, double>> default_theta_bounds(const Eigen::MatrixXd& X) {
    std::vector<std::pair<double, double>> bounds;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        double span = X.rows() > 0 ? X.col(j).maxCoeff() - X.col(j).minCoeff() : 0.0;
        if (!(span > 0.0)) {
            span = 1.0;
        }
        bounds.emplace_back(1e-2 * span, 10.0 * span);
    }
    return bounds;
}

FittedModel mle_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Smoothness nu, const FitOptions& options) {
    options.validate();
    check_training_data(X, y);
    const Eigen::Index d = X.cols();
    const bool iso = options.composition == Composition::Isotropic;
    const Eigen::Index p = iso ? 1 : d;
    const std::optional<double> fixed_beta =
        options.estimate_beta ? std::nullopt : std::optional<double>(options.beta);

    FitDiagnostics diag;
    if (X.rows() < d + 2) {
        diag.warnings.push_back("fewer than d+2 training points; length-scale estimates are poorly determined");
    }

    KernelSpec spec;
    spec.nu = nu;
    spec.composition = options.composition;

    if (options.fixed_theta) {
        spec.theta = *options.fixed_theta;
        spec.sigma2 = 1.0;
        const ProfileResult pr = profile_log_likelihood(X, y, spec, fixed_beta);
        spec.sigma2 = pr.sigma2;
        FittedModel m = fit_fixed(X, y, spec, fixed_beta);
        diag.profile_log_likelihood = pr.log_likelihood;
        diag.midpoint_log_likelihood = pr.log_likelihood;
        m.diagnostics_ = std::move(diag);
        return m;
    }

    std::vector<std::pair<double, double>> bounds = options.theta_bounds;
    if (bounds.empty()) {
        bounds = default_theta_bounds(X);
        if (iso) {
            double lo = bounds.front().first;
            double hi = bounds.front().second;
            for (const auto& [l, h] : bounds) {
                lo = std::max(lo, l);
                hi = std::max(hi, h);
            }
            bounds.assign(1, {lo, hi});
        }
    }
    if (static_cast<Eigen::Index>(bounds.size()) != p) {
        throw ConfigError("theta_bounds has " + std::to_string(bounds.size()) + " entries, expected " +
                          std::to_string(p));
    }
    Eigen::VectorXd lower(p);
    Eigen::VectorXd upper(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        lower[j] = std::log(bounds[static_cast<std::size_t>(j)].first);
        upper[j] = std::log(bounds[static_cast<std::size_t>(j)].second);
    }

    auto objective = [&](const Eigen::VectorXd& log_theta) {
        KernelSpec s = spec;
        s.theta = log_theta.array().exp();
        s.sigma2 = 1.0;
        try {
            return -profile_log_likelihood(X, y, s, fixed_beta).log_likelihood;
        } catch (const NumericalError&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    const Eigen::VectorXd midpoint = 0.5 * (lower + upper);
    const double mid_value = objective(midpoint);
    diag.midpoint_log_likelihood = -mid_value;
    diag.evaluations = 1;

    // Latin-hypercube starts in the log box.
    const int R = options.n_restarts;
    Rng rng = make_rng(options.seed, 0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<Eigen::VectorXd> starts(static_cast<std::size_t>(R), Eigen::VectorXd(p));
    std::vector<int> strata(static_cast<std::size_t>(R));
    for (Eigen::Index j = 0; j < p; ++j) {
        for (int r = 0; r < R; ++r) {
            strata[static_cast<std::size_t>(r)] = r;
        }
        std::shuffle(strata.begin(), strata.end(), rng);
        for (int r = 0; r < R; ++r) {
            const double u = (strata[static_cast<std::size_t>(r)] + unif(rng)) / R;
            starts[static_cast<std::size_t>(r)][j] = lower[j] + u * (upper[j] - lower[j]);
        }
    }

    NelderMeadOptions nm;
    nm.max_evals = options.max_evals > 0 ? options.max_evals : 150 * static_cast<int>(p + 1);
    nm.ftol = options.tol;

    Eigen::VectorXd best_x = midpoint;
    double best_f = mid_value;
    bool improved = false;
    for (int r = 0; r < R; ++r) {
        const NelderMeadResult res = nelder_mead(objective, starts[static_cast<std::size_t>(r)], lower, upper, nm);
        diag.evaluations += res.evals;
        std::vector<double> trace(res.trace.size());
        std::transform(res.trace.begin(), res.trace.end(), trace.begin(), [](double v) { return -v; });
        diag.restart_traces.push_back(std::move(trace));
        diag.restart_best.push_back(-res.f);
        if (res.f < best_f) {
            best_f = res.f;
            best_x = res.x;
            improved = true;
        }
    }
    if (!improved) {
        diag.degraded = true;
        diag.warnings.push_back("no restart improved on the midpoint start; returning the midpoint fit");
    }
    if (!std::isfinite(best_f)) {
        throw SingularModelError("likelihood could not be evaluated anywhere in the length-scale box");
    }

    spec.theta = best_x.array().exp();
    spec.sigma2 = 1.0;
    const ProfileResult pr = profile_log_likelihood(X, y, spec, fixed_beta);
    spec.sigma2 = pr.sigma2;
    diag.profile_log_likelihood = pr.log_likelihood;
    FittedModel m = fit_fixed(X, y, spec, fixed_beta);
    m.diagnostics_ = std::move(diag);
    return m;
}

nlohmann::json model_to_json(const FittedModel& model) {
    nlohmann::json doc;
    doc["schema_version"] = 1;
    doc["nu"] = smoothness_value(model.spec().nu);
    doc["theta"] = std::vector<double>(model.spec().theta.data(), model.spec().theta.data() + model.spec().theta.size());
    doc["sigma2"] = model.spec().sigma2;
    doc["beta"] = model.beta();
    doc["composition"] = std::string(composition_name(model.spec().composition));
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < model.n(); ++i) {
        std::vector<double> row(static_cast<std::size_t>(model.dim()));
        for (Eigen::Index j = 0; j < model.dim(); ++j) {
            row[static_cast<std::size_t>(j)] = model.X()(i, j);
        }
        rows.push_back(row);
    }
    doc["X"] = std::move(rows);
    doc["y"] = std::vector<double>(model.y().data(), model.y().data() + model.y().size());
    doc["jitter_used"] = model.jitter_used();
    return doc;
}

FittedModel model_from_json(const nlohmann::json& doc) {
    try {
        if (doc.at("schema_version").get<int>() != 1) {
            throw ConfigError("unsupported model schema_version " + doc.at("schema_version").dump());
        }
        KernelSpec spec;
        spec.nu = smoothness_from_value(doc.at("nu").get<double>());
        const auto theta = doc.at("theta").get<std::vector<double>>();
        spec.theta = Eigen::Map<const Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size()));
        spec.sigma2 = doc.at("sigma2").get<double>();
        spec.composition = composition_from_name(doc.at("composition").get<std::string>());
        const auto rows = doc.at("X").get<std::vector<std::vector<double>>>();
        const auto yv = doc.at("y").get<std::vector<double>>();
        if (rows.empty()) {
            throw ConfigError("model document has no training points");
        }
        Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != rows.front().size()) {
                throw ConfigError("ragged X in model document");
            }
            for (std::size_t j = 0; j < rows[i].size(); ++j) {
                X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
            }
        }
        const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(yv.data(), static_cast<Eigen::Index>(yv.size()));
        return fit_fixed_with_jitter(X, y, spec, doc.at("beta").get<double>(), doc.value("jitter_used", 0.0));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed model document: ") + e.what());
    }
}

}  // namespace sink
