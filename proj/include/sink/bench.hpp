#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "sink/gp_model.hpp"
#include "sink/testbed.hpp"

namespace sink {

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

// Mean squared error. Throws InputError on empty or mismatched input.
double eise(const Eigen::VectorXd& predictions, const Eigen::VectorXd& truths);

// 1 - EISE / Var(truths), population variance. Throws InputError below two
// points and NumericalError when the truths have zero variance.
double r_squared(const Eigen::VectorXd& predictions, const Eigen::VectorXd& truths);

// Indices j with |truths_j - beta| / sqrt(sigma2) > M (strict).
std::vector<Eigen::Index> extreme_subset(const Eigen::VectorXd& truths, double beta, double sigma2, double M);

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

// Draw of a zero-noise GP at train and test points jointly.
struct GpSource {
    Eigen::Index dim = 7;
    Eigen::VectorXd theta;
    double sigma2 = 1.0;
    double beta = 0.0;
};

enum class FitMode { Mle, Fixed };

struct ExperimentConfig {
    static constexpr int kSchemaVersion = 1;

    std::string name = "experiment";
    // Exactly one of function / gp is set.
    std::optional<TestFunctionId> function;
    Eigen::Index function_dim = 0;
    std::optional<GpSource> gp;

    DesignKind train_kind = DesignKind::Uniform;
    Eigen::Index n_train = 10;
    DesignKind test_kind = DesignKind::Uniform;
    Eigen::Index n_test = 100;
    int faure_base = 7;
    bool test_equals_train = false;

    Smoothness nu = Smoothness::FiveHalves;
    FitMode fit_mode = FitMode::Mle;
    // Fixed mode: length-scales and mean. For a GP source they default to
    // the true hyperparameters.
    std::optional<Eigen::VectorXd> fixed_theta;
    std::optional<double> fixed_beta;
    int n_restarts = 10;
    int max_evals = 0;

    double epsilon = 1e-3;
    double threshold_m = 2.0;
    int replications = 20;
    std::uint64_t seed = 1;

    Eigen::Index dim() const;
    // Throws ConfigError.
    void validate() const;
};

nlohmann::json config_to_json(const ExperimentConfig& cfg);
// Throws ConfigError on schema violations.
ExperimentConfig config_from_json(const nlohmann::json& doc);

// Per-method scores. Limit Kriging may be undefined at isolated points;
// those points are excluded from its EISE and counted.
struct MethodScores {
    double kriging = 0.0;
    double sink = 0.0;
    double limit = 0.0;
};

struct PointRecord {
    double truth = 0.0;
    double kriging = 0.0;
    double sink = 0.0;
    double limit = 0.0;
    double var_kriging = 0.0;
    double rho = 0.0;
    bool extreme = false;
};

struct ReplicationResult {
    int index = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;

    Eigen::VectorXd theta;
    double sigma2 = 0.0;
    double beta = 0.0;
    double jitter = 0.0;
    bool degraded_fit = false;

    MethodScores eise;
    MethodScores r2;
    double ratio_sink = 0.0;   // EISE SiNK / OK
    double ratio_limit = 0.0;  // EISE Limit / OK
    Eigen::Index extreme_count = 0;
    bool nan_extreme = false;
    MethodScores extreme_eise;
    double extreme_ratio_sink = 0.0;  // NaN when the subset is empty
    double extreme_ratio_limit = 0.0;
    Eigen::Index limit_undefined = 0;
    Eigen::Index sink_clipped = 0;
    double mean_var_kriging = 0.0;

    std::vector<PointRecord> points;
};

struct SummaryStat {
    double median = 0.0;
    double mean = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
    int count = 0;  // finite values summarised
};

// Median / mean / interquartile range over the finite entries.
SummaryStat summarize(const std::vector<double>& values);

struct BenchReport {
    ExperimentConfig config;
    std::vector<ReplicationResult> replications;
    int failed = 0;
    int nan_extreme_count = 0;
    // Share of replications with a defined extreme ratio below one.
    double extreme_sink_below_one = 0.0;
    SummaryStat r2_kriging, r2_sink, r2_limit;
    SummaryStat ratio_sink, ratio_limit;
    SummaryStat extreme_ratio_sink, extreme_ratio_limit;
    SummaryStat extreme_count;
};

ReplicationResult run_replication(const ExperimentConfig& cfg, int index);
BenchReport run_experiment(const ExperimentConfig& cfg);

// Report without per-point data; byte-stable for a given config and seed.
nlohmann::json report_to_json(const BenchReport& report);
// rep,point,truth,kriging,sink,limit,var_kriging,rho,extreme
void write_points_csv(std::ostream& out, const BenchReport& report);
// One human-readable line per metric.
void print_summary(std::ostream& out, const BenchReport& report);

// Preset configurations reproducing the two comparison tables.
std::vector<ExperimentConfig> table_configs(int which, bool include_slow);

// ---------------------------------------------------------------------------
// Localness illustration on the 2-d Zakharov function with four design
// points at the edge midpoints of the unit square.
// ---------------------------------------------------------------------------

struct GridPoint {
    double x1 = 0.0;
    double x2 = 0.0;
    double truth = 0.0;
    double ordinary = 0.0;
    double sink = 0.0;
    double rho = 0.0;
    Eigen::Index nearest = 0;  // design point with the largest covariance
    // Second-largest over largest covariance to the design points.
    double runner_up_ratio = 0.0;
};

struct GridPanel {
    double theta = 0.0;
    double beta = 0.0;
    Eigen::MatrixXd design;
    Eigen::VectorXd y;
    std::vector<GridPoint> points;
};

// Fits both panels (theta = 1 and 0.05 unless given) with fixed
// length-scales, GLS mean and tensor Matérn 5/2; evaluates a resolution x
// resolution grid over [0, 1]^2.
std::vector<GridPanel> grid_predictions(int resolution = 41, double epsilon = 0.0,
                                        const std::vector<double>& thetas = {1.0, 0.05});

// theta,x1,x2,truth,ordinary,sink,rho,nearest,runner_up_ratio
void write_grid_csv(std::ostream& out, const std::vector<GridPanel>& panels);

}  // namespace sink
