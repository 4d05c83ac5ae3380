#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "sink/kernels.hpp"

namespace sink {

struct FitOptions {
    // Per-dimension [lo, hi] for theta. Empty: [1e-2 * span_j, 10 * span_j]
    // where span_j is the coordinate range of the training inputs.
    std::vector<std::pair<double, double>> theta_bounds;
    int n_restarts = 10;
    // Convergence tolerance on the profile log-likelihood.
    double tol = 1e-6;
    bool estimate_beta = true;
    // Used when estimate_beta is false.
    double beta = 0.0;
    std::optional<Eigen::VectorXd> fixed_theta;
    Composition composition = Composition::TensorProduct;
    std::uint64_t seed = 0;
    // Objective evaluations per restart; 0 picks 150 * (d + 1).
    int max_evals = 0;

    void validate() const;
};

struct FitDiagnostics {
    double profile_log_likelihood = 0.0;
    // Profile log-likelihood at the centre of the log-theta box.
    double midpoint_log_likelihood = 0.0;
    // Best log-likelihood after each optimizer iteration, one list per restart.
    std::vector<std::vector<double>> restart_traces;
    std::vector<double> restart_best;
    int evaluations = 0;
    // No restart improved on the midpoint start.
    bool degraded = false;
    std::vector<std::string> warnings;
};

// Immutable fitted Gaussian-process interpolator with constant mean beta.
class FittedModel {
public:
    const Eigen::MatrixXd& X() const { return x_; }
    const Eigen::VectorXd& y() const { return y_; }
    const KernelSpec& spec() const { return spec_; }
    double beta() const { return beta_; }
    double jitter_used() const { return jitter_; }
    const Eigen::LLT<Eigen::MatrixXd>& factor() const { return llt_; }
    // (K + jitter I)^-1 (y - beta 1)
    const Eigen::VectorXd& alpha() const { return alpha_; }
    // (K + jitter I)^-1 1
    const Eigen::VectorXd& kinv_ones() const { return kinv_ones_; }
    // (y - beta 1)' K^-1 (y - beta 1)
    double residual_quad() const { return residual_quad_; }
    double log_det() const { return log_det_; }
    Eigen::Index n() const { return x_.rows(); }
    Eigen::Index dim() const { return x_.cols(); }
    const FitDiagnostics& diagnostics() const { return diagnostics_; }

    // k(x0) for this model's training inputs.
    Eigen::VectorXd cov_vector(const Eigen::VectorXd& x0) const;

private:
    friend FittedModel fit_fixed_with_jitter(const Eigen::MatrixXd&, const Eigen::VectorXd&, const KernelSpec&,
                                             std::optional<double>, double);
    friend FittedModel mle_fit(const Eigen::MatrixXd&, const Eigen::VectorXd&, Smoothness, const FitOptions&);

    Eigen::MatrixXd x_;
    Eigen::VectorXd y_;
    KernelSpec spec_;
    double beta_ = 0.0;
    double jitter_ = 0.0;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::VectorXd alpha_;
    Eigen::VectorXd kinv_ones_;
    double residual_quad_ = 0.0;
    double log_det_ = 0.0;
    FitDiagnostics diagnostics_;
};

// Cholesky factor of K with the escalating jitter policy: try 0, then
// 1e-10 sigma2, growing tenfold up to 1e-6 sigma2.
struct Factorization {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter = 0.0;
};

// Throws SingularModelError when even the largest jitter fails. `X` is used
// to name the most strongly correlated pair in the message.
Factorization factorize(const Eigen::MatrixXd& K, double sigma2, const Eigen::MatrixXd& X, double min_jitter = 0.0);

// Throws InputError when two rows of X are closer than 1e-12 times the
// coordinate range, or when X and y disagree in length.
void check_training_data(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// Factorizes K at fixed hyperparameters. beta defaults to the GLS estimate
// (1' K^-1 1)^-1 1' K^-1 y.
FittedModel fit_fixed(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const KernelSpec& spec,
                      std::optional<double> beta = std::nullopt);

// As fit_fixed, but the jitter search starts at `min_jitter` (used when
// reloading a saved model).
FittedModel fit_fixed_with_jitter(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const KernelSpec& spec,
                                  std::optional<double> beta, double min_jitter);

// Gaussian log-density of y under N(beta 1, K).
double log_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const KernelSpec& spec, double beta);

struct ProfileResult {
    double log_likelihood = 0.0;
    double beta = 0.0;
    double sigma2 = 0.0;
};

// Log-likelihood with sigma2 (and beta unless given) maximised in closed
// form for the correlation defined by `spec` (its sigma2 is ignored).
ProfileResult profile_log_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const KernelSpec& spec,
                                     std::optional<double> beta = std::nullopt);

// Default log-theta box for mle_fit.
std::vector<std::pair<double, double>> default_theta_bounds(const Eigen::MatrixXd& X);

// Profile maximum likelihood over log theta: midpoint start plus
// n_restarts Latin-hypercube Nelder-Mead runs.
FittedModel mle_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Smoothness nu, const FitOptions& options);

// Model document: {schema_version, nu, theta, sigma2, beta, composition, X,
// y, jitter_used}. Loading re-factorizes.
nlohmann::json model_to_json(const FittedModel& model);
FittedModel model_from_json(const nlohmann::json& doc);

}  // namespace sink
