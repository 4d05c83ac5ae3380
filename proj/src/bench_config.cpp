#include <cmath>
#include <set>
#include <string>

#include "sink/bench.hpp"
#include "sink/errors.hpp"

namespace sink {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) {
            throw ConfigError(where + ": unknown key '" + it.key() + "'");
        }
    }
}

const json& require_object(const json& doc, const std::string& key) {
    if (!doc.contains(key) || !doc.at(key).is_object()) {
        throw ConfigError("config: '" + key + "' must be an object");
    }
    return doc.at(key);
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback) {
    if (!obj.contains(key)) {
        return fallback;
    }
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config: bad value for '" + key + "': " + e.what());
    }
}

Eigen::VectorXd vector_from(const json& arr, const std::string& key) {
    if (!arr.is_array() || arr.empty()) {
        throw ConfigError("config: '" + key + "' must be a non-empty array of numbers");
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_number()) {
            throw ConfigError("config: '" + key + "' must hold numbers");
        }
        v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
    }
    return v;
}

json vector_to(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

void parse_design(const json& obj, const std::string& where, DesignKind& kind, Eigen::Index& n, int* base) {
    reject_unknown(obj, {"kind", "n", "base"}, where);
    try {
        kind = design_kind_from_name(get_or<std::string>(obj, "kind", "uniform"));
    } catch (const Error& e) {
        throw ConfigError(where + ": " + e.what());
    }
    if (!obj.contains("n")) {
        throw ConfigError(where + ": 'n' is required");
    }
    n = get_or<Eigen::Index>(obj, "n", 0);
    if (base && obj.contains("base")) {
        *base = get_or<int>(obj, "base", 7);
    }
}

}  // namespace

Eigen::Index ExperimentConfig::dim() const {
    if (gp) {
        return gp->dim;
    }
    if (function) {
        return make_test_function(*function, function_dim).dim;
    }
    return 0;
}

void ExperimentConfig::validate() const {
    if (static_cast<bool>(function) == static_cast<bool>(gp)) {
        throw ConfigError("config: exactly one of a test function or a GP source is required");
    }
    if (gp) {
        if (gp->dim < 1 || gp->theta.size() != gp->dim) {
            throw ConfigError("config: GP theta must have one entry per dimension");
        }
        if (!(gp->theta.array() > 0.0).all() || !gp->theta.allFinite()) {
            throw ConfigError("config: GP theta must be positive");
        }
        if (!(gp->sigma2 > 0.0) || !std::isfinite(gp->sigma2) || !std::isfinite(gp->beta)) {
            throw ConfigError("config: GP sigma2 must be positive and beta finite");
        }
    }
    const Eigen::Index d = dim();
    if (n_train < 2) {
        throw ConfigError("config: need at least two training points");
    }
    if (!test_equals_train && n_test < 1) {
        throw ConfigError("config: need at least one test point");
    }
    if (replications < 1) {
        throw ConfigError("config: replications must be at least 1");
    }
    if (!(threshold_m > 0.0) || !std::isfinite(threshold_m)) {
        throw ConfigError("config: threshold_m must be positive");
    }
    if (!(epsilon >= 0.0 && epsilon < 1.0)) {
        throw ConfigError("config: epsilon must lie in [0, 1)");
    }
    if (n_restarts < 0 || max_evals < 0) {
        throw ConfigError("config: n_restarts and max_evals must be non-negative");
    }
    if (train_kind == DesignKind::Faure || test_kind == DesignKind::Faure) {
        // Surfaces base problems before any replication runs.
        design({DesignKind::Faure, 1, d, 0, faure_base});
    }
    if (fit_mode == FitMode::Fixed && !gp && !fixed_theta) {
        throw ConfigError("config: fixed fit on a test function needs 'theta'");
    }
    if (fixed_theta) {
        if (fixed_theta->size() != d) {
            throw ConfigError("config: fixed theta must have one entry per dimension");
        }
        if (!(fixed_theta->array() > 0.0).all() || !fixed_theta->allFinite()) {
            throw ConfigError("config: fixed theta must be positive");
        }
    }
}

json config_to_json(const ExperimentConfig& cfg) {
    json doc;
    doc["schema_version"] = ExperimentConfig::kSchemaVersion;
    doc["name"] = cfg.name;
    if (cfg.gp) {
        doc["source"] = {{"type", "gp"},
                         {"dim", cfg.gp->dim},
                         {"theta", vector_to(cfg.gp->theta)},
                         {"sigma2", cfg.gp->sigma2},
                         {"beta", cfg.gp->beta}};
    } else if (cfg.function) {
        json src = {{"type", "function"}, {"id", std::string(test_function_name(*cfg.function))}};
        if (cfg.function_dim) {
            src["dim"] = cfg.function_dim;
        }
        doc["source"] = src;
    }
    doc["train"] = {{"kind", std::string(design_kind_name(cfg.train_kind))}, {"n", cfg.n_train}};
    doc["test"] = {{"kind", std::string(design_kind_name(cfg.test_kind))}, {"n", cfg.n_test}};
    doc["faure_base"] = cfg.faure_base;
    doc["test_equals_train"] = cfg.test_equals_train;
    doc["nu"] = smoothness_value(cfg.nu);
    json fit = {{"mode", cfg.fit_mode == FitMode::Mle ? "mle" : "fixed"},
                {"n_restarts", cfg.n_restarts},
                {"max_evals", cfg.max_evals}};
    if (cfg.fixed_theta) {
        fit["theta"] = vector_to(*cfg.fixed_theta);
    }
    if (cfg.fixed_beta) {
        fit["beta"] = *cfg.fixed_beta;
    }
    doc["fit"] = fit;
    doc["epsilon"] = cfg.epsilon;
    doc["threshold_m"] = cfg.threshold_m;
    doc["replications"] = cfg.replications;
    doc["seed"] = cfg.seed;
    return doc;
}

ExperimentConfig config_from_json(const json& doc) {
    if (!doc.is_object()) {
        throw ConfigError("config: document must be a JSON object");
    }
    reject_unknown(doc,
                   {"schema_version", "name", "source", "train", "test", "faure_base", "test_equals_train", "nu", "fit",
                    "epsilon", "threshold_m", "replications", "seed"},
                   "config");
    if (!doc.contains("schema_version")) {
        throw ConfigError("config: missing schema_version");
    }
    const int version = get_or<int>(doc, "schema_version", 0);
    if (version != ExperimentConfig::kSchemaVersion) {
        throw ConfigError("config: unsupported schema_version " + std::to_string(version));
    }

    ExperimentConfig cfg;
    cfg.name = get_or<std::string>(doc, "name", cfg.name);

    const json& src = require_object(doc, "source");
    const std::string type = get_or<std::string>(src, "type", "");
    if (type == "gp") {
        reject_unknown(src, {"type", "dim", "theta", "sigma2", "beta"}, "source");
        GpSource gp;
        gp.dim = get_or<Eigen::Index>(src, "dim", 0);
        if (!src.contains("theta")) {
            throw ConfigError("source: GP requires 'theta'");
        }
        const json& th = src.at("theta");
        gp.theta = th.is_number() ? Eigen::VectorXd::Constant(gp.dim, th.get<double>()) : vector_from(th, "theta");
        gp.sigma2 = get_or<double>(src, "sigma2", 1.0);
        gp.beta = get_or<double>(src, "beta", 0.0);
        cfg.gp = gp;
    } else if (type == "function") {
        reject_unknown(src, {"type", "id", "dim"}, "source");
        try {
            cfg.function = test_function_from_name(get_or<std::string>(src, "id", ""));
        } catch (const Error& e) {
            throw ConfigError(std::string("source: ") + e.what());
        }
        cfg.function_dim = get_or<Eigen::Index>(src, "dim", 0);
    } else {
        throw ConfigError("source: 'type' must be \"gp\" or \"function\"");
    }

    parse_design(require_object(doc, "train"), "train", cfg.train_kind, cfg.n_train, &cfg.faure_base);
    cfg.test_equals_train = get_or<bool>(doc, "test_equals_train", false);
    if (doc.contains("test")) {
        parse_design(require_object(doc, "test"), "test", cfg.test_kind, cfg.n_test, &cfg.faure_base);
    } else if (!cfg.test_equals_train) {
        throw ConfigError("config: 'test' is required unless test_equals_train is set");
    }
    cfg.faure_base = get_or<int>(doc, "faure_base", cfg.faure_base);
    cfg.nu = smoothness_from_value(get_or<double>(doc, "nu", 2.5));

    if (doc.contains("fit")) {
        const json& fit = require_object(doc, "fit");
        reject_unknown(fit, {"mode", "n_restarts", "max_evals", "theta", "beta"}, "fit");
        const std::string mode = get_or<std::string>(fit, "mode", "mle");
        if (mode == "mle") {
            cfg.fit_mode = FitMode::Mle;
        } else if (mode == "fixed") {
            cfg.fit_mode = FitMode::Fixed;
        } else {
            throw ConfigError("fit: mode must be \"mle\" or \"fixed\"");
        }
        cfg.n_restarts = get_or<int>(fit, "n_restarts", cfg.n_restarts);
        cfg.max_evals = get_or<int>(fit, "max_evals", cfg.max_evals);
        if (fit.contains("theta")) {
            cfg.fixed_theta = vector_from(fit.at("theta"), "fit.theta");
        }
        if (fit.contains("beta")) {
            cfg.fixed_beta = get_or<double>(fit, "beta", 0.0);
        }
    }
    cfg.epsilon = get_or<double>(doc, "epsilon", cfg.epsilon);
    cfg.threshold_m = get_or<double>(doc, "threshold_m", cfg.threshold_m);
    cfg.replications = get_or<int>(doc, "replications", cfg.replications);
    cfg.seed = get_or<std::uint64_t>(doc, "seed", cfg.seed);
    cfg.validate();
    return cfg;
}

}  // namespace sink
