#include "sink/bench.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "sink/errors.hpp"
#include "sink/parallel.hpp"
#include "sink/predictors.hpp"
#include "sink/random.hpp"

namespace sink {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double quantile_sorted(const std::vector<double>& v, double p) {
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] + frac * (v[hi] - v[lo]);
}

double ratio_or_nan(double num, double den) {
    if (!std::isfinite(num) || !std::isfinite(den) || den <= 0.0) {
        return kNaN;
    }
    return num / den;
}

// EISE over the entries where `pred` is finite.
double eise_finite(const std::vector<double>& pred, const std::vector<double>& truth) {
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t j = 0; j < pred.size(); ++j) {
        if (std::isfinite(pred[j])) {
            const double e = pred[j] - truth[j];
            sum += e * e;
            ++used;
        }
    }
    return used ? sum / static_cast<double>(used) : kNaN;
}

struct Sample {
    Eigen::MatrixXd train;
    Eigen::VectorXd y_train;
    Eigen::MatrixXd test;
    Eigen::VectorXd y_test;
};

Sample draw_sample(const ExperimentConfig& cfg, std::uint64_t sub) {
    Sample s;
    const Eigen::Index d = cfg.dim();
    s.train = design({cfg.train_kind, cfg.n_train, d, sub, cfg.faure_base});
    if (cfg.test_equals_train) {
        s.test = s.train;
    } else {
        s.test = design({cfg.test_kind, cfg.n_test, d, sub ^ 0x9e3779b97f4a7c15ULL, cfg.faure_base});
    }

    if (cfg.function) {
        const TestFunction fn = make_test_function(*cfg.function, cfg.function_dim);
        s.y_train = eval_rows(fn, s.train);
        s.y_test = eval_rows(fn, s.test);
        return s;
    }

    // Joint draw at train and test points; duplicated test points (when
    // test = train) reuse the training values.
    const GpSource& gp = *cfg.gp;
    KernelSpec truth{cfg.nu, gp.theta, gp.sigma2, Composition::TensorProduct};
    const Eigen::Index nt = s.train.rows();
    const Eigen::Index nq = cfg.test_equals_train ? 0 : s.test.rows();
    Eigen::MatrixXd all(nt + nq, d);
    all.topRows(nt) = s.train;
    if (nq) {
        all.bottomRows(nq) = s.test;
    }
    const Factorization fac = factorize(cov_matrix(truth, all), gp.sigma2, all);
    Rng rng = make_rng(sub, 7);
    std::normal_distribution<double> normal;
    Eigen::VectorXd z(all.rows());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        z(i) = normal(rng);
    }
    const Eigen::VectorXd y = (fac.llt.matrixL() * z).array() + gp.beta;
    s.y_train = y.head(nt);
    s.y_test = cfg.test_equals_train ? s.y_train : Eigen::VectorXd(y.tail(nq));
    return s;
}

FittedModel fit(const ExperimentConfig& cfg, const Sample& s, std::uint64_t sub) {
    if (cfg.fit_mode == FitMode::Mle) {
        FitOptions opts;
        opts.n_restarts = cfg.n_restarts;
        opts.max_evals = cfg.max_evals;
        opts.seed = sub + 3;
        if (cfg.fixed_beta) {
            opts.estimate_beta = false;
            opts.beta = *cfg.fixed_beta;
        }
        return mle_fit(s.train, s.y_train, cfg.nu, opts);
    }
    KernelSpec spec;
    spec.nu = cfg.nu;
    if (cfg.gp) {
        spec.theta = cfg.fixed_theta ? *cfg.fixed_theta : cfg.gp->theta;
        spec.sigma2 = cfg.gp->sigma2;
        const double beta = cfg.fixed_beta ? *cfg.fixed_beta : cfg.gp->beta;
        return fit_fixed(s.train, s.y_train, spec, beta);
    }
    spec.theta = *cfg.fixed_theta;
    const ProfileResult prof = profile_log_likelihood(s.train, s.y_train, spec, cfg.fixed_beta);
    spec.sigma2 = prof.sigma2;
    return fit_fixed(s.train, s.y_train, spec, prof.beta);
}

std::uint64_t replication_seed(std::uint64_t seed, int index) {
    Rng rng = make_rng(seed, 1000 + static_cast<std::uint64_t>(index));
    return rng();
}

nlohmann::json stat_json(const SummaryStat& s) {
    return {{"median", s.median}, {"mean", s.mean}, {"q25", s.q25}, {"q75", s.q75}, {"count", s.count}};
}

nlohmann::json scores_json(const MethodScores& m) {
    return {{"ordinary", m.kriging}, {"sink", m.sink}, {"limit", m.limit}};
}

}  // namespace

double eise(const Eigen::VectorXd& predictions, const Eigen::VectorXd& truths) {
    if (predictions.size() != truths.size()) {
        throw InputError("eise: predictions and truths differ in length");
    }
    if (truths.size() == 0) {
        throw InputError("eise: empty input");
    }
    return (predictions - truths).squaredNorm() / static_cast<double>(truths.size());
}

double r_squared(const Eigen::VectorXd& predictions, const Eigen::VectorXd& truths) {
    if (truths.size() < 2) {
        throw InputError("r_squared: need at least two points");
    }
    const double e = eise(predictions, truths);
    const double var = (truths.array() - truths.mean()).square().mean();
    if (!(var > 0.0)) {
        throw NumericalError("r_squared: truths have zero variance, R^2 undefined");
    }
    return 1.0 - e / var;
}

std::vector<Eigen::Index> extreme_subset(const Eigen::VectorXd& truths, double beta, double sigma2, double M) {
    if (!(sigma2 > 0.0)) {
        throw InputError("extreme_subset: sigma2 must be positive");
    }
    const double sd = std::sqrt(sigma2);
    std::vector<Eigen::Index> out;
    for (Eigen::Index j = 0; j < truths.size(); ++j) {
        if (std::abs(truths(j) - beta) / sd > M) {
            out.push_back(j);
        }
    }
    return out;
}

SummaryStat summarize(const std::vector<double>& values) {
    std::vector<double> v;
    for (double x : values) {
        if (std::isfinite(x)) {
            v.push_back(x);
        }
    }
    SummaryStat s;
    s.count = static_cast<int>(v.size());
    if (v.empty()) {
        s.median = s.mean = s.q25 = s.q75 = kNaN;
        return s;
    }
    std::sort(v.begin(), v.end());
    double sum = 0.0;
    for (double x : v) {
        sum += x;
    }
    s.mean = sum / static_cast<double>(v.size());
    s.median = quantile_sorted(v, 0.5);
    s.q25 = quantile_sorted(v, 0.25);
    s.q75 = quantile_sorted(v, 0.75);
    return s;
}

ReplicationResult run_replication(const ExperimentConfig& cfg, int index) {
    ReplicationResult r;
    r.index = index;
    r.seed = replication_seed(cfg.seed, index);
    try {
        const Sample s = draw_sample(cfg, r.seed);
        const FittedModel model = fit(cfg, s, r.seed);
        r.theta = model.spec().theta;
        r.sigma2 = model.spec().sigma2;
        r.beta = model.beta();
        r.jitter = model.jitter_used();
        r.degraded_fit = model.diagnostics().degraded;

        PredictAllOptions popts;
        popts.epsilon = cfg.epsilon;
        const std::vector<PredictionBundle> preds = predict_batch(model, s.test, popts);

        const std::size_t n = preds.size();
        std::vector<double> truth(n), ok(n), sk(n), lim(n);
        double var_sum = 0.0;
        r.points.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            const PredictionBundle& p = preds[j];
            truth[j] = s.y_test(static_cast<Eigen::Index>(j));
            ok[j] = p.mean_kriging;
            sk[j] = p.mean_sink;
            lim[j] = p.mean_limit;
            if (!std::isfinite(p.mean_kriging) || !std::isfinite(p.mean_sink)) {
                throw NumericalError("non-finite prediction at test point " + std::to_string(j));
            }
            if (!std::isfinite(p.mean_limit)) {
                ++r.limit_undefined;
            }
            if (p.epsilon_clipped) {
                ++r.sink_clipped;
            }
            var_sum += p.var_kriging;
            r.points[j] = {truth[j], ok[j], sk[j], lim[j], p.var_kriging, p.rho, false};
        }
        r.mean_var_kriging = var_sum / static_cast<double>(n);

        const Eigen::Map<const Eigen::VectorXd> t(truth.data(), static_cast<Eigen::Index>(n));
        const Eigen::Map<const Eigen::VectorXd> pk(ok.data(), static_cast<Eigen::Index>(n));
        const Eigen::Map<const Eigen::VectorXd> ps(sk.data(), static_cast<Eigen::Index>(n));
        r.eise = {eise(pk, t), eise(ps, t), eise_finite(lim, truth)};
        const double var = (t.array() - t.mean()).square().mean();
        if (var > 0.0) {
            r.r2 = {1.0 - r.eise.kriging / var, 1.0 - r.eise.sink / var, 1.0 - r.eise.limit / var};
        } else {
            // Only reachable with a constant response; R^2 is undefined.
            r.r2 = {kNaN, kNaN, kNaN};
        }
        r.ratio_sink = ratio_or_nan(r.eise.sink, r.eise.kriging);
        r.ratio_limit = ratio_or_nan(r.eise.limit, r.eise.kriging);

        const std::vector<Eigen::Index> ext = extreme_subset(t, r.beta, r.sigma2, cfg.threshold_m);
        r.extreme_count = static_cast<Eigen::Index>(ext.size());
        r.nan_extreme = ext.empty();
        if (ext.empty()) {
            r.extreme_eise = {kNaN, kNaN, kNaN};
            r.extreme_ratio_sink = kNaN;
            r.extreme_ratio_limit = kNaN;
        } else {
            std::vector<double> et, ek, es, el;
            for (Eigen::Index j : ext) {
                const auto u = static_cast<std::size_t>(j);
                r.points[u].extreme = true;
                et.push_back(truth[u]);
                ek.push_back(ok[u]);
                es.push_back(sk[u]);
                el.push_back(lim[u]);
            }
            r.extreme_eise = {eise_finite(ek, et), eise_finite(es, et), eise_finite(el, et)};
            r.extreme_ratio_sink = ratio_or_nan(r.extreme_eise.sink, r.extreme_eise.kriging);
            r.extreme_ratio_limit = ratio_or_nan(r.extreme_eise.limit, r.extreme_eise.kriging);
        }
        r.ok = true;
    } catch (const Error& e) {
        r.ok = false;
        r.error = e.what();
        r.points.clear();
    }
    return r;
}

BenchReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    BenchReport report;
    report.config = cfg;
    report.replications.resize(static_cast<std::size_t>(cfg.replications));
    parallel_for(report.replications.size(),
                 [&](std::size_t i) { report.replications[i] = run_replication(cfg, static_cast<int>(i)); });

    std::vector<double> r2k, r2s, r2l, rs, rl, ers, erl, ec;
    int below = 0;
    for (const ReplicationResult& r : report.replications) {
        if (!r.ok) {
            ++report.failed;
            continue;
        }
        r2k.push_back(r.r2.kriging);
        r2s.push_back(r.r2.sink);
        r2l.push_back(r.r2.limit);
        rs.push_back(r.ratio_sink);
        rl.push_back(r.ratio_limit);
        ers.push_back(r.extreme_ratio_sink);
        erl.push_back(r.extreme_ratio_limit);
        ec.push_back(static_cast<double>(r.extreme_count));
        if (r.nan_extreme) {
            ++report.nan_extreme_count;
        } else if (r.extreme_ratio_sink < 1.0) {
            ++below;
        }
    }
    report.extreme_sink_below_one = static_cast<double>(below) / static_cast<double>(cfg.replications);
    report.r2_kriging = summarize(r2k);
    report.r2_sink = summarize(r2s);
    report.r2_limit = summarize(r2l);
    report.ratio_sink = summarize(rs);
    report.ratio_limit = summarize(rl);
    report.extreme_ratio_sink = summarize(ers);
    report.extreme_ratio_limit = summarize(erl);
    report.extreme_count = summarize(ec);
    return report;
}

nlohmann::json report_to_json(const BenchReport& report) {
    nlohmann::json reps = nlohmann::json::array();
    for (const ReplicationResult& r : report.replications) {
        nlohmann::json j;
        j["index"] = r.index;
        j["seed"] = r.seed;
        j["ok"] = r.ok;
        if (!r.ok) {
            j["error"] = r.error;
            reps.push_back(std::move(j));
            continue;
        }
        j["theta"] = std::vector<double>(r.theta.data(), r.theta.data() + r.theta.size());
        j["sigma2"] = r.sigma2;
        j["beta"] = r.beta;
        j["jitter"] = r.jitter;
        j["degraded_fit"] = r.degraded_fit;
        j["eise"] = scores_json(r.eise);
        j["r2"] = scores_json(r.r2);
        j["ratio_sink_ordinary"] = r.ratio_sink;
        j["ratio_limit_ordinary"] = r.ratio_limit;
        j["extreme_count"] = r.extreme_count;
        j["nan_extreme"] = r.nan_extreme;
        j["extreme_eise"] = scores_json(r.extreme_eise);
        j["extreme_ratio_sink_ordinary"] = r.extreme_ratio_sink;
        j["extreme_ratio_limit_ordinary"] = r.extreme_ratio_limit;
        j["limit_undefined"] = r.limit_undefined;
        j["sink_clipped"] = r.sink_clipped;
        j["mean_var_kriging"] = r.mean_var_kriging;
        reps.push_back(std::move(j));
    }
    nlohmann::json doc;
    doc["schema_version"] = 1;
    doc["config"] = config_to_json(report.config);
    doc["z_score_reference"] = "fitted beta and sigma2 of each replication";
    doc["replications"] = std::move(reps);
    doc["summary"] = {
        {"failed", report.failed},
        {"nan_extreme_count", report.nan_extreme_count},
        {"extreme_sink_below_one_fraction", report.extreme_sink_below_one},
        {"r2_ordinary", stat_json(report.r2_kriging)},
        {"r2_sink", stat_json(report.r2_sink)},
        {"r2_limit", stat_json(report.r2_limit)},
        {"ratio_sink_ordinary", stat_json(report.ratio_sink)},
        {"ratio_limit_ordinary", stat_json(report.ratio_limit)},
        {"extreme_ratio_sink_ordinary", stat_json(report.extreme_ratio_sink)},
        {"extreme_ratio_limit_ordinary", stat_json(report.extreme_ratio_limit)},
        {"extreme_count", stat_json(report.extreme_count)},
    };
    return doc;
}

void write_points_csv(std::ostream& out, const BenchReport& report) {
    const auto old = out.precision(17);
    out << "rep,point,truth,kriging,sink,limit,var_kriging,rho,extreme\n";
    for (const ReplicationResult& r : report.replications) {
        for (std::size_t j = 0; j < r.points.size(); ++j) {
            const PointRecord& p = r.points[j];
            out << r.index << ',' << j << ',' << p.truth << ',' << p.kriging << ',' << p.sink << ',' << p.limit << ','
                << p.var_kriging << ',' << p.rho << ',' << (p.extreme ? 1 : 0) << '\n';
        }
    }
    out.precision(old);
}

void print_summary(std::ostream& out, const BenchReport& report) {
    auto line = [&](const char* label, const SummaryStat& s) {
        out << "  " << label << ": median " << s.median << "  mean " << s.mean << "  IQR [" << s.q25 << ", " << s.q75
            << "]  (n=" << s.count << ")\n";
    };
    out << report.config.name << " (" << report.config.replications << " replications, " << report.failed
        << " failed)\n";
    line("R2 ordinary", report.r2_kriging);
    line("R2 sink", report.r2_sink);
    line("R2 limit", report.r2_limit);
    line("EISE ratio sink/ordinary", report.ratio_sink);
    line("EISE ratio limit/ordinary", report.ratio_limit);
    line("extreme ratio sink/ordinary", report.extreme_ratio_sink);
    line("extreme ratio limit/ordinary", report.extreme_ratio_limit);
    line("extreme subset size", report.extreme_count);
    out << "  empty extreme subsets (NaN): " << report.nan_extreme_count << "\n";
    out << "  share with extreme ratio < 1: " << report.extreme_sink_below_one << "\n";
    for (const ReplicationResult& r : report.replications) {
        if (!r.ok) {
            out << "  replication " << r.index << " failed: " << r.error << "\n";
        }
    }
}

std::vector<ExperimentConfig> table_configs(int which, bool include_slow) {
    std::vector<ExperimentConfig> out;
    if (which == 1) {
        ExperimentConfig gp;
        gp.name = "table1_gp";
        gp.gp = GpSource{7, Eigen::VectorXd::Ones(7), 1.0, 0.0};
        gp.n_train = 100;
        gp.n_test = 2000;
        out.push_back(gp);

        ExperimentConfig piston;
        piston.name = "table1_piston";
        piston.function = TestFunctionId::Piston;
        piston.train_kind = DesignKind::Faure;
        piston.test_kind = DesignKind::Faure;
        piston.n_train = 14;
        piston.n_test = 2000;
        out.push_back(piston);
        return out;
    }
    if (which == 3) {
        struct Row {
            const char* name;
            TestFunctionId id;
            Eigen::Index n;
            bool slow;
        };
        const Row rows[] = {{"table3_borehole", TestFunctionId::Borehole, 32, false},
                            {"table3_welch", TestFunctionId::Welch, 320, false},
                            {"table3_piston", TestFunctionId::Piston, 49, false},
                            {"table3_friedman", TestFunctionId::Friedman, 50, false},
                            {"table3_robotarm", TestFunctionId::RobotArm, 512, true}};
        for (const Row& row : rows) {
            if (row.slow && !include_slow) {
                continue;
            }
            ExperimentConfig c;
            c.name = row.name;
            c.function = row.id;
            c.n_train = row.n;
            c.n_test = 5000;
            out.push_back(c);
        }
        return out;
    }
    throw ConfigError("tables: --which must be 1 or 3");
}

std::vector<GridPanel> grid_predictions(int resolution, double epsilon, const std::vector<double>& thetas) {
    if (resolution < 2) {
        throw ConfigError("grid resolution must be at least 2");
    }
    const TestFunction fn = make_test_function(TestFunctionId::Zakharov, 2);
    Eigen::MatrixXd X(4, 2);
    X << 0.5, 0.0, 1.0, 0.5, 0.5, 1.0, 0.0, 0.5;
    const Eigen::VectorXd y = eval_rows(fn, X);

    PredictAllOptions popts;
    popts.epsilon = epsilon;
    std::vector<GridPanel> panels;
    for (double theta : thetas) {
        KernelSpec spec{Smoothness::FiveHalves, Eigen::VectorXd::Constant(2, theta), 1.0,
                        Composition::TensorProduct};
        const ProfileResult prof = profile_log_likelihood(X, y, spec);
        spec.sigma2 = prof.sigma2;
        const FittedModel model = fit_fixed(X, y, spec, prof.beta);

        GridPanel panel;
        panel.theta = theta;
        panel.beta = model.beta();
        panel.design = X;
        panel.y = y;
        for (int i = 0; i < resolution; ++i) {
            for (int j = 0; j < resolution; ++j) {
                Eigen::Vector2d x0(static_cast<double>(i) / (resolution - 1), static_cast<double>(j) / (resolution - 1));
                const PredictionBundle p = predict_all(model, x0, popts);
                const Eigen::VectorXd k = model.cov_vector(x0);
                Eigen::Index best = 0;
                k.maxCoeff(&best);
                double second = 0.0;
                for (Eigen::Index m = 0; m < k.size(); ++m) {
                    if (m != best) {
                        second = std::max(second, k(m));
                    }
                }
                GridPoint g;
                g.x1 = x0(0);
                g.x2 = x0(1);
                g.truth = eval(fn, x0);
                g.ordinary = p.mean_kriging;
                g.sink = p.mean_sink;
                g.rho = p.rho;
                g.nearest = best;
                g.runner_up_ratio = k(best) > 0.0 ? second / k(best) : 1.0;
                panel.points.push_back(g);
            }
        }
        panels.push_back(std::move(panel));
    }
    return panels;
}

void write_grid_csv(std::ostream& out, const std::vector<GridPanel>& panels) {
    const auto old = out.precision(17);
    out << "theta,x1,x2,truth,ordinary,sink,rho,nearest,runner_up_ratio\n";
    for (const GridPanel& panel : panels) {
        for (const GridPoint& g : panel.points) {
            out << panel.theta << ',' << g.x1 << ',' << g.x2 << ',' << g.truth << ',' << g.ordinary << ',' << g.sink
                << ',' << g.rho << ',' << g.nearest << ',' << g.runner_up_ratio << '\n';
        }
    }
    out.precision(old);
}

}  // namespace sink
