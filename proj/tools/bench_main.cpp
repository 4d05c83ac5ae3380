// bench: experiment runner and file-level interface to the library.
//
//   bench run --config cfg.json [--seed S] [--reps R] [--out DIR] [--epsilon E] [--threshold-m M]
//   bench tables --which 1|3 [--include-slow] [same flags]
//   bench fig1 [--out DIR] [--epsilon E] [--resolution G]
//   bench fig2 [--out DIR]
//   bench design --function NAME --n N [--kind uniform|faure] [--seed S] [--base B] [--dim D] [--out FILE]
//   bench fit --design FILE --model FILE [--nu 2.5] [--seed S] [--restarts R]
//   bench predict --model FILE --points FILE [--out FILE] [--epsilon E]
//
// Exit codes: 0 success, 2 configuration or input error, 3 numerical failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sink/analysis.hpp"
#include "sink/bench.hpp"
#include "sink/errors.hpp"
#include "sink/gp_model.hpp"
#include "sink/predictors.hpp"
#include "sink/testbed.hpp"

namespace fs = std::filesystem;

namespace {

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> reps;
    std::optional<double> epsilon;
    std::optional<double> threshold_m;
    std::string out = "results";
};

void add_overrides(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--seed", o.seed, "Base seed");
    cmd->add_option("--reps", o.reps, "Number of replications");
    cmd->add_option("--epsilon", o.epsilon, "SiNK floor on rho");
    cmd->add_option("--threshold-m", o.threshold_m, "Extreme z-score threshold");
    cmd->add_option("--out", o.out, "Output directory");
}

void apply(sink::ExperimentConfig& cfg, const Overrides& o) {
    if (o.seed) {
        cfg.seed = *o.seed;
    }
    if (o.reps) {
        cfg.replications = *o.reps;
    }
    if (o.epsilon) {
        cfg.epsilon = *o.epsilon;
    }
    if (o.threshold_m) {
        cfg.threshold_m = *o.threshold_m;
    }
    cfg.validate();
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream f(path);
    if (!f) {
        throw sink::ConfigError("cannot write " + path.string());
    }
    return f;
}

// Returns false when every replication failed.
bool run_and_write(const sink::ExperimentConfig& cfg, const fs::path& dir) {
    const sink::BenchReport report = sink::run_experiment(cfg);
    open_out(dir / (cfg.name + ".json")) << sink::report_to_json(report).dump(2) << "\n";
    auto csv = open_out(dir / (cfg.name + "_points.csv"));
    sink::write_points_csv(csv, report);
    sink::print_summary(std::cout, report);
    return report.failed < cfg.replications;
}

// Numeric CSV with a header row.
std::vector<std::vector<double>> read_csv(const fs::path& path, std::vector<std::string>& header) {
    std::ifstream f(path);
    if (!f) {
        throw sink::ConfigError("cannot read " + path.string());
    }
    std::string line;
    std::vector<std::vector<double>> rows;
    if (!std::getline(f, line)) {
        throw sink::InputError(path.string() + " is empty");
    }
    std::stringstream hs(line);
    for (std::string cell; std::getline(hs, cell, ',');) {
        header.push_back(cell);
    }
    while (std::getline(f, line)) {
        if (line.empty()) {
            continue;
        }
        std::vector<double> row;
        std::stringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw sink::InputError(path.string() + ": non-numeric cell '" + cell + "'");
            }
        }
        if (row.size() != header.size()) {
            throw sink::InputError(path.string() + ": ragged row");
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    }
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SiNK benchmark runner"};
    app.require_subcommand(1);

    Overrides run_o;
    std::string config_path;
    auto* run = app.add_subcommand("run", "Run one experiment from a JSON config");
    run->add_option("--config", config_path, "Experiment config")->required();
    add_overrides(run, run_o);

    Overrides tab_o;
    int which = 1;
    bool include_slow = false;
    auto* tables = app.add_subcommand("tables", "Run the preset comparison tables");
    tables->add_option("--which", which, "Table number")->required()->check(CLI::IsMember({1, 3}));
    tables->add_flag("--include-slow", include_slow, "Include the slow robot-arm run");
    add_overrides(tables, tab_o);

    std::string fig1_out = "results";
    double fig1_eps = 0.0;
    int fig1_res = 41;
    auto* fig1 = app.add_subcommand("fig1", "Zakharov localness grid");
    fig1->add_option("--out", fig1_out, "Output directory");
    fig1->add_option("--epsilon", fig1_eps, "SiNK floor on rho");
    fig1->add_option("--resolution", fig1_res, "Grid points per axis");

    std::string fig2_out = "results";
    auto* fig2 = app.add_subcommand("fig2", "Conditional MSPE ratio and threshold curves");
    fig2->add_option("--out", fig2_out, "Output directory");

    std::string fn_name, kind_name = "uniform", design_out;
    long long design_n = 0, design_dim = 0;
    std::uint64_t design_seed = 1;
    int design_base = 7;
    auto* des = app.add_subcommand("design", "Write a design and its function values as CSV");
    des->add_option("--function", fn_name, "Test function")->required();
    des->add_option("--n", design_n, "Number of points")->required();
    des->add_option("--kind", kind_name, "uniform or faure");
    des->add_option("--seed", design_seed, "Seed");
    des->add_option("--base", design_base, "Faure base");
    des->add_option("--dim", design_dim, "Dimension (zakharov only)");
    des->add_option("--out", design_out, "Output file (default stdout)");

    std::string fit_design, fit_model;
    double fit_nu = 2.5;
    std::uint64_t fit_seed = 1;
    int fit_restarts = 10;
    auto* fitc = app.add_subcommand("fit", "Fit a model by maximum likelihood on a design CSV");
    fitc->add_option("--design", fit_design, "CSV with u_1..u_d columns and y")->required();
    fitc->add_option("--model", fit_model, "Output model JSON")->required();
    fitc->add_option("--nu", fit_nu, "Smoothness: 0.5, 1.5 or 2.5");
    fitc->add_option("--seed", fit_seed, "Seed");
    fitc->add_option("--restarts", fit_restarts, "Random restarts");

    std::string pred_model, pred_points, pred_out;
    double pred_eps = 1e-3;
    auto* pred = app.add_subcommand("predict", "Predict at points with every predictor");
    pred->add_option("--model", pred_model, "Model JSON")->required();
    pred->add_option("--points", pred_points, "CSV whose first d columns are inputs")->required();
    pred->add_option("--out", pred_out, "Output file (default stdout)");
    pred->add_option("--epsilon", pred_eps, "SiNK floor on rho");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run) {
            std::ifstream f(config_path);
            if (!f) {
                throw sink::ConfigError("cannot read " + config_path);
            }
            nlohmann::json doc;
            try {
                doc = nlohmann::json::parse(f);
            } catch (const nlohmann::json::exception& e) {
                throw sink::ConfigError(std::string("config is not valid JSON: ") + e.what());
            }
            sink::ExperimentConfig cfg = sink::config_from_json(doc);
            apply(cfg, run_o);
            return run_and_write(cfg, run_o.out) ? 0 : 3;
        }
        if (*tables) {
            bool all_ok = true;
            for (sink::ExperimentConfig cfg : sink::table_configs(which, include_slow)) {
                apply(cfg, tab_o);
                all_ok = run_and_write(cfg, tab_o.out) && all_ok;
            }
            return all_ok ? 0 : 3;
        }
        if (*fig1) {
            const auto panels = sink::grid_predictions(fig1_res, fig1_eps);
            auto out = open_out(fs::path(fig1_out) / "fig1_grid.csv");
            sink::write_grid_csv(out, panels);
            for (const auto& p : panels) {
                std::cout << "theta " << p.theta << ": beta_hat " << p.beta << ", " << p.points.size()
                          << " grid points\n";
            }
            return 0;
        }
        if (*fig2) {
            const fs::path dir(fig2_out);
            const auto rho = linspace(0.01, 1.0, 100);
            const auto M = linspace(0.05, 4.0, 80);
            auto grid = open_out(dir / "fig2_ratio_grid.csv");
            sink::write_ratio_grid_csv(grid, sink::cmspe_ratio_grid(rho, M));
            auto cz = open_out(dir / "fig2_critical_z.csv");
            sink::write_critical_z_csv(cz, rho);
            auto cr = open_out(dir / "fig2_critical_rho.csv");
            sink::write_critical_rho_csv(cr, M);
            std::cout << "wrote fig2 CSVs to " << dir.string() << "\n";
            return 0;
        }
        if (*des) {
            const sink::TestFunction fn =
                sink::make_test_function(sink::test_function_from_name(fn_name), design_dim);
            const Eigen::MatrixXd U =
                sink::design({sink::design_kind_from_name(kind_name), design_n, fn.dim, design_seed, design_base});
            if (design_out.empty()) {
                sink::write_design_csv(std::cout, fn, U);
            } else {
                auto out = open_out(design_out);
                sink::write_design_csv(out, fn, U);
            }
            return 0;
        }
        if (*fitc) {
            std::vector<std::string> header;
            const auto rows = read_csv(fit_design, header);
            std::vector<Eigen::Index> ucols;
            Eigen::Index ycol = -1;
            for (std::size_t c = 0; c < header.size(); ++c) {
                if (header[c].rfind("u_", 0) == 0) {
                    ucols.push_back(static_cast<Eigen::Index>(c));
                } else if (header[c] == "y") {
                    ycol = static_cast<Eigen::Index>(c);
                }
            }
            if (ucols.empty() || ycol < 0 || rows.empty()) {
                throw sink::InputError("design CSV needs u_* columns, a y column and at least one row");
            }
            Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(ucols.size()));
            Eigen::VectorXd y(X.rows());
            for (Eigen::Index i = 0; i < X.rows(); ++i) {
                const auto& r = rows[static_cast<std::size_t>(i)];
                for (Eigen::Index j = 0; j < X.cols(); ++j) {
                    X(i, j) = r[static_cast<std::size_t>(ucols[static_cast<std::size_t>(j)])];
                }
                y(i) = r[static_cast<std::size_t>(ycol)];
            }
            sink::FitOptions opts;
            opts.seed = fit_seed;
            opts.n_restarts = fit_restarts;
            const sink::FittedModel model = sink::mle_fit(X, y, sink::smoothness_from_value(fit_nu), opts);
            open_out(fit_model) << sink::model_to_json(model).dump(2) << "\n";
            for (const auto& w : model.diagnostics().warnings) {
                std::cerr << "warning: " << w << "\n";
            }
            return 0;
        }
        if (*pred) {
            std::ifstream mf(pred_model);
            if (!mf) {
                throw sink::ConfigError("cannot read " + pred_model);
            }
            nlohmann::json doc;
            try {
                doc = nlohmann::json::parse(mf);
            } catch (const nlohmann::json::exception& e) {
                throw sink::ConfigError(std::string("model is not valid JSON: ") + e.what());
            }
            const sink::FittedModel model = sink::model_from_json(doc);
            std::vector<std::string> header;
            const auto rows = read_csv(pred_points, header);
            const auto d = static_cast<std::size_t>(model.dim());
            if (header.size() < d) {
                throw sink::InputError("points CSV has fewer columns than the model dimension");
            }
            Eigen::MatrixXd Q(static_cast<Eigen::Index>(rows.size()), model.dim());
            for (std::size_t i = 0; i < rows.size(); ++i) {
                for (std::size_t j = 0; j < d; ++j) {
                    Q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
                }
            }
            sink::PredictAllOptions popts;
            popts.epsilon = pred_eps;
            const auto bundles = sink::predict_batch(model, Q, popts);
            if (pred_out.empty()) {
                sink::write_predictions_csv(std::cout, bundles);
            } else {
                auto out = open_out(pred_out);
                sink::write_predictions_csv(out, bundles);
            }
            return 0;
        }
    } catch (const sink::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const sink::InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const sink::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
