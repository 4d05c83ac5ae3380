// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "sink/analysis.hpp"
#include "sink/bench.hpp"
#include "sink/errors.hpp"
#include "sink/predictors.hpp"
#include "test_support.hpp"

using namespace sink;
using namespace test_support;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(4);
    s << v;
    return s.str();
}

// Query on the segment from training point `from` towards `dir` whose rho
// equals `target` (bisection on the step length).
Eigen::VectorXd query_with_rho(const FittedModel& m, Eigen::Index from, const Eigen::VectorXd& dir, double target) {
    const Eigen::VectorXd x = m.X().row(from).transpose();
    double lo = 0.0, hi = 1.0;
    while (rho(m, x + hi * dir) > target) {
        hi *= 2.0;
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (rho(m, x + mid * dir) > target ? lo : hi) = mid;
    }
    return x + 0.5 * (lo + hi) * dir;
}

FittedModel spread_model(std::uint64_t seed) {
    // Points on a jittered grid keep K well conditioned.
    Rng rng = make_rng(seed);
    std::uniform_real_distribution<double> u(-0.1, 0.1);
    Eigen::MatrixXd X(9, 2);
    for (int i = 0; i < 9; ++i) {
        X(i, 0) = (i % 3) + u(rng);
        X(i, 1) = (i / 3) + u(rng);
    }
    KernelSpec spec{Smoothness::FiveHalves, Eigen::Vector2d(0.6, 0.8), 2.5, Composition::TensorProduct};
    const Factorization f = factorize(cov_matrix(spec, X), spec.sigma2, X);
    const Eigen::VectorXd y = (f.llt.matrixL() * normal_vector(rng, 9)).array() + 1.0;
    return fit_fixed(X, y, spec);
}

// ---------------------------------------------------------------------------

Outcome one_point_identities() {
    const auto t0 = Clock::now();
    Rng rng = make_rng(101);
    std::uniform_real_distribution<double> ub(-5.0, 5.0), ur(0.05, 0.99), uy(-10.0, 10.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double beta = ub(rng), r = ur(rng), y1 = uy(rng);
        const FittedModel m = one_point_model(r, y1, beta);
        const Eigen::VectorXd x0 = origin();
        const double rr = rho(m, x0);
        auto err = [&](const PredictorKind& k, double want) {
            const PredictionBundle b = predict(m, x0, k);
            const double got = std::isfinite(b.mean_kriging) ? b.mean_kriging
                               : std::isfinite(b.mean_cmle)  ? b.mean_cmle
                                                             : b.mean_sink;
            return std::abs(got - want) / std::max(1.0, std::abs(want));
        };
        worst = std::max(worst, std::abs(rr - r));
        worst = std::max(worst, err(Kriging{}, beta + r * (y1 - beta)));
        worst = std::max(worst, err(Cmle{}, beta + (y1 - beta) / r));
        worst = std::max(worst, err(Sink{}, y1));
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-12 && secs < 1.0, "max error " + fmt(worst) + ", " + fmt(secs) + " s"};
}

Outcome spatial_cbpk_equals_sink() {
    Rng rng = make_rng(102);
    std::uniform_int_distribution<int> un(1, 30), ud(1, 8);
    double worst = 0.0;
    int done = 0;
    while (done < 500) {
        const FittedModel m = random_model(rng, un(rng), ud(rng));
        const QueryTerms t = query_terms(m, uniform_points(rng, 1, m.dim()).row(0).transpose());
        if (t.rho == 0.0) {
            continue;
        }
        const double s = m.beta() + residual_weight(Sink{0.0}, t) * t.residual;
        const double c = m.beta() + residual_weight(Cbpk::spatial(), t) * t.residual;
        worst = std::max(worst, std::abs(s - c) / std::max(std::abs(s), 1e-300));
        ++done;
    }
    return {worst <= 1e-12, "500 instances, max relative difference " + fmt(worst)};
}

Outcome woodbury_and_cbpk_weight() {
    Rng rng = make_rng(103);
    std::uniform_int_distribution<int> un(2, 20), ud(2, 6);
    std::uniform_real_distribution<double> udelta(0.0, 5.0);
    double wb = 0.0, ll = 0.0, lam = 0.0, wgt = 0.0;
    int done = 0;
    while (done < 200) {
        const Eigen::Index n = un(rng), d = ud(rng);
        const Eigen::MatrixXd X = uniform_points(rng, n, d);
        KernelSpec spec = random_spec(rng, d);
        spec.theta *= 0.5;  // moderate conditioning for the dense oracle
        const Eigen::VectorXd y = normal_vector(rng, n);
        const FittedModel m = fit_fixed(X, y, spec);
        const QueryTerms t = query_terms(m, uniform_points(rng, 1, d).row(0).transpose());
        if (m.jitter_used() != 0.0 || t.rho > 0.99 || t.rho < 1e-3) {
            continue;
        }
        const Eigen::MatrixXd K = cov_matrix(spec, X);
        const Eigen::MatrixXd Kt = K - t.k * t.k.transpose() / t.k00;
        // k' K~^-1 against (1 / (1 - rho^2)) k' K^-1.
        const Eigen::VectorXd lhs = dense_solve(Kt, t.k);
        const Eigen::VectorXd rhs = dense_solve(K, t.k) / (1.0 - t.rho * t.rho);
        wb = std::max(wb, (lhs - rhs).cwiseAbs().maxCoeff() / std::max(1.0, rhs.cwiseAbs().maxCoeff()));

        // Conditional log-likelihood against a dense Gaussian density.
        const double y0 = m.beta() + normal_vector(rng, 1)(0) * std::sqrt(t.k00);
        const Eigen::VectorXd mt = (m.beta() + t.k.array() * (y0 - m.beta()) / t.k00).matrix();
        const Eigen::VectorXd dev = y - mt;
        const double dense = -0.5 * dev.dot(dense_solve(Kt, dev)) - 0.5 * dense_log_abs_det(Kt) -
                             0.5 * static_cast<double>(n) * std::log(2 * std::numbers::pi);
        ll = std::max(ll, std::abs(conditional_loglik(m, t, y0) - dense) / std::max(1.0, std::abs(dense)));

        // CBPK weight: dense lambda against the closed-form inflation.
        const double delta = udelta(rng);
        const Eigen::MatrixXd A = K + (delta / t.k00) * t.k * t.k.transpose();
        const Eigen::VectorXd lam_dense = dense_solve(A, (1.0 + delta) * t.k);
        const double w = (delta + 1.0) / (delta * t.rho * t.rho + 1.0);
        const Eigen::VectorXd lam_closed = w * dense_solve(K, t.k);
        lam = std::max(lam, (lam_dense - lam_closed).cwiseAbs().maxCoeff() /
                                std::max(1.0, lam_closed.cwiseAbs().maxCoeff()));
        const double mean_dense = m.beta() + lam_dense.dot((y.array() - m.beta()).matrix());
        const double mean_lib = m.beta() + residual_weight(Cbpk{delta}, t) * t.residual;
        wgt = std::max(wgt, std::abs(mean_dense - mean_lib) / std::max(1.0, std::abs(mean_dense)));
        ++done;
    }
    const double worst = std::max({wb, ll, lam, wgt});
    return {worst <= 1e-8, "200 instances; Woodbury " + fmt(wb) + ", cond. loglik " + fmt(ll) + ", lambda " +
                               fmt(lam) + ", CBPK mean " + fmt(wgt)};
}

Outcome mspe_law() {
    const auto t0 = Clock::now();
    const FittedModel m = spread_model(104);
    const double targets[] = {0.1, 0.3, 0.6, 0.85, 0.99};
    McConfig cfg;
    cfg.n_draws = 200000;
    cfg.seed = 104;
    cfg.queries.resize(5, 2);
    for (int i = 0; i < 5; ++i) {
        cfg.queries.row(i) = query_with_rho(m, 4, Eigen::Vector2d(0.6, 0.8), targets[i]).transpose();
    }
    const auto res = mc_joint_mspe(m, cfg);
    double worst = 0.0;
    std::string detail;
    for (const auto& r : res) {
        const double rel = r.ratio / (2.0 / (1.0 + r.rho));
        worst = std::max(worst, std::abs(rel - 1.0));
        detail += " rho=" + fmt(r.rho) + ":" + fmt(rel);
    }
    const double secs = seconds_since(t0);
    return {worst <= 0.02 && secs < 60.0, "ratio/(2/(1+rho))" + detail + ", " + fmt(secs) + " s"};
}

Outcome conditional_formulas() {
    const FittedModel m = spread_model(105);
    const double targets[] = {0.7, 0.8, 0.9};
    const double z = 2.5;
    McConfig cfg;
    cfg.n_draws = 100000;
    cfg.seed = 105;
    cfg.queries.resize(3, 2);
    for (int i = 0; i < 3; ++i) {
        cfg.queries.row(i) = query_with_rho(m, 4, Eigen::Vector2d(-0.8, 0.6), targets[i]).transpose();
    }
    double worst_bias = 0.0, worst_mspe = 0.0, worst_cmle = 0.0;
    for (Eigen::Index i = 0; i < 3; ++i) {
        McConfig one = cfg;
        one.queries = cfg.queries.row(i);
        const QueryTerms t = query_terms(m, one.queries.row(0).transpose());
        const double sd = std::sqrt(t.k00);
        const double y0 = m.beta() + z * sd;
        const auto r = mc_conditional(m, one, FixedTarget{y0})[0];
        const double bias_k = (t.rho * t.rho - 1.0) * (y0 - m.beta());
        const double bias_s = (t.rho - 1.0) * (y0 - m.beta());
        worst_bias = std::max({worst_bias, std::abs(r.bias_kriging.mean / bias_k - 1.0),
                               std::abs(r.bias_sink.mean / bias_s - 1.0)});
        worst_mspe = std::max({worst_mspe,
                               std::abs(r.mspe_kriging.mean / cond_mspe(MspeKind::Kriging, t.rho, z, t.k00) - 1.0),
                               std::abs(r.mspe_sink.mean / cond_mspe(MspeKind::Sink, t.rho, z, t.k00) - 1.0)});
        worst_cmle = std::max(worst_cmle, std::abs(r.bias_cmle.mean) / sd);
    }
    return {worst_bias <= 0.02 && worst_mspe <= 0.02 && worst_cmle <= 0.01,
            "rho in {0.7,0.8,0.9}, z=2.5: bias rel err " + fmt(worst_bias) + ", MSPE rel err " + fmt(worst_mspe) +
                ", CMLE |bias|/sqrt(k00) " + fmt(worst_cmle)};
}

Outcome threshold_curves() {
    // (a) closed-form crossing
    double worst_z = 0.0;
    // At rho = 1 both errors vanish identically, so the scan stops short.
    for (int i = 1; i <= 99; ++i) {
        const double r = 0.01 * i;
        auto diff = [&](double zz) {
            return cond_mspe(MspeKind::Sink, r, zz, 1.0) - cond_mspe(MspeKind::Kriging, r, zz, 1.0);
        };
        const double root = bisect(diff, 0.0, 1e3);
        worst_z = std::max(worst_z, std::abs(root - critical_z(r)));
    }
    // (b) region Monte Carlo sign change
    double worst_rho = 0.0;
    std::string roots;
    for (double M : {1.0, 2.0, 3.0}) {
        const double rc = critical_rho_region(M);
        double prev_r = -1.0, prev_d = 0.0, root = std::nan("");
        for (int s = -10; s <= 10; ++s) {
            const double r = rc + 0.005 * s;
            if (r <= 0.0) {
                continue;
            }
            const FittedModel m = one_point_model(r, 0.0, 0.0);
            McConfig cfg;
            cfg.n_draws = 1000000;
            cfg.seed = 106;
            cfg.queries = Eigen::MatrixXd::Zero(1, 1);
            const double d = mc_conditional(m, cfg, RegionTarget{M})[0].mspe_difference.mean;
            if (prev_r > 0.0 && std::isnan(root) && prev_d > 0.0 && d <= 0.0) {
                root = prev_r + (r - prev_r) * prev_d / (prev_d - d);
            }
            prev_r = r;
            prev_d = d;
        }
        worst_rho = std::isnan(root) ? 1.0 : std::max(worst_rho, std::abs(root - rc));
        roots += " M=" + fmt(M) + ":" + fmt(root) + " (" + fmt(rc) + ")";
    }
    // (c) monotone ratio columns
    std::vector<double> rg, Mg;
    for (int i = 1; i <= 100; ++i) {
        rg.push_back(0.01 * i);
    }
    for (int j = 1; j <= 200; ++j) {
        Mg.push_back(0.025 * j);
    }
    const RatioGrid g = cmspe_ratio_grid(rg, Mg);
    int violations = 0;
    for (Eigen::Index i = 0; i < g.ratio.rows(); ++i) {
        for (Eigen::Index j = 1; j < g.ratio.cols(); ++j) {
            violations += g.ratio(i, j) > g.ratio(i, j - 1);
        }
    }
    return {worst_z <= 1e-8 && worst_rho <= 0.02 && violations == 0,
            "critical_z err " + fmt(worst_z) + "; region roots" + roots + "; monotonicity violations " +
                std::to_string(violations)};
}

Outcome boundedness_and_rays() {
    Rng rng = make_rng(107);
    int bound_viol = 0, ray_viol = 0, bounded = 0, rays = 0;
    while (bounded < 10000 || rays < 10000) {
        const FittedModel m = random_model(rng, 10, 3);
        const double env = std::sqrt(m.spec().sigma2) * std::sqrt(m.residual_quad());
        for (int q = 0; q < 100; ++q) {
            const QueryTerms t = query_terms(m, uniform_points(rng, 1, 3, -0.5, 1.5).row(0).transpose());
            if (t.rho == 0.0) {
                continue;
            }
            const double s = m.beta() + residual_weight(Sink{0.0}, t) * t.residual;
            if (bounded < 10000) {
                bound_viol += std::abs(s - m.beta()) > env + 1e-8;
                ++bounded;
            }
            if (rays < 10000) {
                const double c = std::uniform_real_distribution<double>(0.01, 1.0)(rng);
                const QueryTerms tc = query_terms_from_k(m, c * t.k, t.k00);
                const double sc = m.beta() + residual_weight(Sink{0.0}, tc) * tc.residual;
                // Relative 1e-12 on the prediction, with a floor of a few ulps of
                // beta; the residual k'alpha is judged against the magnitude of
                // its own summands since it may cancel.
                const double tol = 1e-12 * std::abs(s - m.beta()) + 1e-14 * (1.0 + std::abs(m.beta()));
                bool bad = std::abs(sc - s) > tol;
                const double dot_scale = (t.k.cwiseAbs().array() * m.alpha().cwiseAbs().array()).sum();
                bad = bad || std::abs(tc.residual - c * t.residual) > 1e-12 * dot_scale;
                // A power-of-two scale is reproduced bit for bit.
                const QueryTerms th = query_terms_from_k(m, 0.25 * t.k, t.k00);
                bad = bad || (m.beta() + residual_weight(Sink{0.0}, th) * th.residual) != s;
                ray_viol += bad;
                ++rays;
            }
        }
    }
    return {bound_viol == 0 && ray_viol == 0, "boundedness violations " + std::to_string(bound_viol) +
                                                  "/10000, ray violations " + std::to_string(ray_viol) + "/10000"};
}

Outcome localness() {
    const auto t0 = Clock::now();
    const auto panels = grid_predictions(101, 0.0, {0.05});
    const GridPanel& p = panels.front();
    const double spread = p.y.maxCoeff() - p.y.minCoeff();
    int eligible = 0, far = 0, ok_fail = 0, sink_fail = 0, far_fail = 0;
    for (const GridPoint& g : p.points) {
        if (g.rho >= 1e-3) {
            continue;
        }
        ++far;
        const bool ok_good = std::abs(g.ordinary - p.beta) <= 1e-2 * spread;
        const bool sink_good = std::abs(g.sink - p.y(g.nearest)) <= 1e-2 * spread;
        far_fail += !(ok_good && sink_good);
        if (g.runner_up_ratio > 1e-2) {
            continue;  // no single nearest design point
        }
        ++eligible;
        ok_fail += !ok_good;
        sink_fail += !sink_good;
    }
    const double secs = seconds_since(t0);
    return {eligible > 0 && ok_fail == 0 && sink_fail == 0 && secs < 10.0,
            std::to_string(eligible) + " grid points with rho<1e-3 and a dominant nearest point: OK misses " +
                std::to_string(ok_fail) + ", SiNK misses " + std::to_string(sink_fail) + "; including ties " +
                std::to_string(far - far_fail) + "/" + std::to_string(far) + " satisfy both; " + fmt(secs) + " s"};
}

Outcome table1() {
    const auto t0 = Clock::now();
    ExperimentConfig cfg = table_configs(1, false).front();
    cfg.replications = 20;
    const BenchReport r = run_experiment(cfg);
    const double secs = seconds_since(t0);
    const bool pass = r.failed == 0 && r.ratio_sink.median >= 0.95 && r.ratio_sink.median <= 1.10 &&
                      r.extreme_ratio_sink.median < 1.0 && r.extreme_sink_below_one >= 0.7 && secs < 600.0;
    return {pass, "median overall " + fmt(r.ratio_sink.median) + ", median extreme " +
                      fmt(r.extreme_ratio_sink.median) + ", extreme<1 in " + fmt(100 * r.extreme_sink_below_one) +
                      "% of 20, failed " + std::to_string(r.failed) + ", " + fmt(secs) + " s"};
}

Outcome table3() {
    const auto t0 = Clock::now();
    bool pass = true;
    std::string detail;
    for (ExperimentConfig cfg : table_configs(3, false)) {
        if (cfg.function == TestFunctionId::Piston) {
            continue;
        }
        cfg.replications = 10;
        const BenchReport r = run_experiment(cfg);
        pass = pass && r.failed == 0;
        if (cfg.function == TestFunctionId::Friedman) {
            pass = pass && r.nan_extreme_count > 0;
            detail += " friedman: " + std::to_string(r.nan_extreme_count) + "/10 empty extreme sets;";
        } else {
            pass = pass && r.ratio_sink.median < 1.0 && r.extreme_ratio_sink.median < r.ratio_sink.median;
            detail += " " + std::string(test_function_name(*cfg.function)) + ": overall " +
                      fmt(r.ratio_sink.median) + ", extreme " + fmt(r.extreme_ratio_sink.median) + " (" +
                      std::to_string(r.extreme_ratio_sink.count) + " defined);";
        }
    }
    const double secs = seconds_since(t0);
    return {pass && secs < 1200.0, detail + " " + fmt(secs) + " s"};
}

Outcome blup_calibration() {
    ExperimentConfig cfg = table_configs(1, false).front();
    cfg.name = "blup_calibration";
    cfg.fit_mode = FitMode::Fixed;
    cfg.replications = 20;
    cfg.seed = 111;
    const BenchReport r = run_experiment(cfg);
    std::vector<double> diff;
    double mse = 0.0, s2 = 0.0;
    for (const auto& rep : r.replications) {
        if (rep.ok) {
            diff.push_back(rep.eise.kriging - rep.mean_var_kriging);
            mse += rep.eise.kriging;
            s2 += rep.mean_var_kriging;
        }
    }
    const double R = static_cast<double>(diff.size());
    double mean = 0.0;
    for (double v : diff) {
        mean += v / R;
    }
    double var = 0.0;
    for (double v : diff) {
        var += (v - mean) * (v - mean) / (R - 1.0);
    }
    const double se = std::sqrt(var / R);
    return {r.failed == 0 && std::abs(mean) <= 3.0 * se,
            "mean e^2 " + fmt(mse / R) + ", mean s^2 " + fmt(s2 / R) + ", difference " + fmt(mean) + " (SE " +
                fmt(se) + ")"};
}

}  // namespace

int main(int argc, char** argv) {
    // Optional criterion ids on the command line restrict the run.
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) {
        only.push_back(std::atoi(argv[i]));
    }
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "one-point exact identities", one_point_identities},
        {2, "spatial CBPK equals SiNK", spatial_cbpk_equals_sink},
        {3, "Woodbury and CBPK weight vs dense oracle", woodbury_and_cbpk_weight},
        {4, "joint MSPE ratio 2/(1+rho)", mspe_law},
        {5, "conditional bias and MSPE", conditional_formulas},
        {6, "threshold curves", threshold_curves},
        {7, "boundedness and ray invariance", boundedness_and_rays},
        {8, "localness on the Zakharov grid", localness},
        {9, "GP table replication", table1},
        {10, "test-function table replication", table3},
        {11, "BLUP calibration", blup_calibration},
    };
    int failed = 0, ran = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) {
            continue;
        }
        ++ran;
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %d criteria passed\n", ran - failed, ran);
    return failed == 0 ? 0 : 1;
}
