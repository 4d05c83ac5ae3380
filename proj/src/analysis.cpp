#include "sink/analysis.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>

#include <boost/math/special_functions/erf.hpp>

#include "sink/errors.hpp"
#include "sink/parallel.hpp"
#include "sink/random.hpp"

namespace sink {

double cond_mspe(MspeKind kind, double rho, double z, double k00) {
    const double r2 = rho * rho;
    if (kind == MspeKind::Kriging) {
        const double one_minus = 1.0 - r2;
        return k00 * (r2 - r2 * r2 + z * z * one_minus * one_minus);
    }
    const double one_minus = 1.0 - rho;
    return k00 * (1.0 - r2 + z * z * one_minus * one_minus);
}

double critical_z(double rho) {
    if (!(rho > 0.0)) {
        return std::numeric_limits<double>::infinity();
    }
    const double a = (1.0 + rho) * (1.0 + rho);
    // (1+rho)^2 - 1 written as rho (2 + rho) to keep precision as rho -> 0
    return std::sqrt(a / (rho * (2.0 + rho)));
}

double normal_upper_tail(double x) {
    return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw InputError("normal quantile needs p in (0, 1)");
    }
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

namespace {

// Mills ratio (1 - Phi(x)) / phi(x). Both factors underflow past x ~ 38, so
// the asymptotic series takes over well before that.
double mills_ratio(double x) {
    if (x < 30.0) {
        return normal_upper_tail(x) / normal_pdf(x);
    }
    const double u = 1.0 / (x * x);
    return (1.0 - u * (1.0 - 3.0 * u * (1.0 - 5.0 * u * (1.0 - 7.0 * u)))) / x;
}

}  // namespace

double tail_second_moment(double M) {
    if (M < 0.0) {
        const double tail = normal_upper_tail(M);
        return (M * normal_pdf(M) + tail) / tail;
    }
    return 1.0 + M / mills_ratio(M);
}

double critical_rho_region(double M) {
    if (!(M > 0.0)) {
        throw InputError("region threshold M must be positive");
    }
    const double ratio = mills_ratio(M) / M;
    return ratio / (1.0 + std::sqrt(1.0 + ratio));  // -1 + sqrt(1 + r) without cancellation
}

double cmspe_ratio(double rho, double M) {
    if (rho >= 1.0) {
        return 1.0;
    }
    const double E = tail_second_moment(M);
    const double r2 = rho * rho;
    const double sink = 1.0 - r2 + E * (1.0 - rho) * (1.0 - rho);
    const double krig = r2 - r2 * r2 + E * (1.0 - r2) * (1.0 - r2);
    return sink / krig;
}

RatioGrid cmspe_ratio_grid(const std::vector<double>& rho_grid, const std::vector<double>& M_grid) {
    for (double r : rho_grid) {
        if (!(r > 0.0 && r <= 1.0)) {
            throw InputError("rho grid must lie in (0, 1]");
        }
    }
    for (double m : M_grid) {
        if (!(m > 0.0) || !std::isfinite(m)) {
            throw InputError("M grid must be positive and finite");
        }
    }
    RatioGrid g;
    g.rho = rho_grid;
    g.M = M_grid;
    g.ratio.resize(static_cast<Eigen::Index>(rho_grid.size()), static_cast<Eigen::Index>(M_grid.size()));
    for (std::size_t i = 0; i < rho_grid.size(); ++i) {
        for (std::size_t j = 0; j < M_grid.size(); ++j) {
            g.ratio(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cmspe_ratio(rho_grid[i], M_grid[j]);
        }
    }
    return g;
}

void write_ratio_grid_csv(std::ostream& out, const RatioGrid& grid) {
    out << "rho,M,ratio\n" << std::setprecision(17);
    for (std::size_t i = 0; i < grid.rho.size(); ++i) {
        for (std::size_t j = 0; j < grid.M.size(); ++j) {
            out << grid.rho[i] << ',' << grid.M[j] << ','
                << grid.ratio(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) << '\n';
        }
    }
}

void write_critical_z_csv(std::ostream& out, const std::vector<double>& rho_grid) {
    out << "rho,critical_z\n" << std::setprecision(17);
    for (double r : rho_grid) {
        out << r << ',' << critical_z(r) << '\n';
    }
}

void write_critical_rho_csv(std::ostream& out, const std::vector<double>& M_grid) {
    out << "M,critical_rho\n" << std::setprecision(17);
    for (double m : M_grid) {
        out << m << ',' << critical_rho_region(m) << '\n';
    }
}

namespace {

constexpr std::size_t kBatch = 512;

// Welford accumulator with Chan's merge.
struct Accumulator {
    double count = 0.0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        count += 1.0;
        const double delta = x - mean;
        mean += delta / count;
        m2 += delta * (x - mean);
    }
    void merge(const Accumulator& o) {
        if (o.count == 0.0) {
            return;
        }
        const double total = count + o.count;
        const double delta = o.mean - mean;
        mean += delta * o.count / total;
        m2 += o.m2 + delta * delta * count * o.count / total;
        count = total;
    }
    Estimate estimate() const {
        Estimate e;
        e.mean = mean;
        e.se = count > 1.0 ? std::sqrt(m2 / (count - 1.0) / count) : 0.0;
        return e;
    }
};

std::size_t chunk_draws(const McConfig& cfg, std::size_t chunk) {
    const std::size_t base = cfg.n_draws / cfg.chunks;
    return base + (chunk < cfg.n_draws % cfg.chunks ? 1 : 0);
}

void check_config(const FittedModel& model, const McConfig& cfg) {
    if (cfg.n_draws < 2 || cfg.chunks < 1) {
        throw ConfigError("Monte Carlo needs at least two draws and one chunk");
    }
    if (cfg.queries.cols() != model.dim()) {
        throw InputError("query dimension does not match the model");
    }
}

Eigen::MatrixXd normal_block(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> normal;
    Eigen::MatrixXd Z(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
        for (Eigen::Index r = 0; r < rows; ++r) {
            Z(r, c) = normal(rng);
        }
    }
    return Z;
}

template <std::size_t N>
std::array<Accumulator, N> run_chunks(const McConfig& cfg, std::uint64_t stream_base,
                                      const std::function<void(Rng&, std::size_t, std::array<Accumulator, N>&)>& body) {
    std::vector<std::array<Accumulator, N>> parts(cfg.chunks);
    parallel_for(cfg.chunks, [&](std::size_t c) {
        Rng rng = make_rng(cfg.seed, stream_base + c);
        body(rng, chunk_draws(cfg, c), parts[c]);
    });
    std::array<Accumulator, N> total{};
    for (const auto& part : parts) {
        for (std::size_t i = 0; i < N; ++i) {
            total[i].merge(part[i]);
        }
    }
    return total;
}

}  // namespace

std::vector<McJointResult> mc_joint_mspe(const FittedModel& model, const McConfig& cfg) {
    check_config(model, cfg);
    const Eigen::Index n = model.n();
    std::vector<McJointResult> out;
    for (Eigen::Index q = 0; q < cfg.queries.rows(); ++q) {
        const Eigen::VectorXd x0 = cfg.queries.row(q).transpose();
        const QueryTerms t = query_terms(model, x0);
        const Eigen::VectorXd lambda = model.factor().solve(t.k);
        const double w_sink = residual_weight(Sink{cfg.epsilon}, t);

        Eigen::MatrixXd joint(n + 1, n + 1);
        joint(0, 0) = t.k00;
        joint.block(1, 0, n, 1) = t.k;
        joint.block(0, 1, 1, n) = t.k.transpose();
        joint.block(1, 1, n, n) = cov_matrix(model.spec(), model.X());
        joint.block(1, 1, n, n).diagonal().array() += model.jitter_used();
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(joint);
        const Eigen::VectorXd sqrt_d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
        const Eigen::MatrixXd L = ldlt.matrixL();

        auto totals = run_chunks<2>(cfg, static_cast<std::uint64_t>(q) << 20,
                                    [&](Rng& rng, std::size_t draws, std::array<Accumulator, 2>& acc) {
                                        for (std::size_t done = 0; done < draws; done += kBatch) {
                                            const auto b = static_cast<Eigen::Index>(std::min(kBatch, draws - done));
                                            Eigen::MatrixXd S = L * (sqrt_d.asDiagonal() * normal_block(rng, n + 1, b));
                                            S = ldlt.transpositionsP().transpose() * S;
                                            const Eigen::RowVectorXd resid = lambda.transpose() * S.bottomRows(n);
                                            for (Eigen::Index j = 0; j < b; ++j) {
                                                const double y0 = S(0, j);
                                                const double ek = resid[j] - y0;
                                                const double es = w_sink * resid[j] - y0;
                                                acc[0].add(ek * ek);
                                                acc[1].add(es * es);
                                            }
                                        }
                                    });
        McJointResult r;
        r.rho = t.rho;
        r.var_kriging = std::max(t.k00 - t.kKk, 0.0);
        r.mspe_kriging = totals[0].estimate();
        r.mspe_sink = totals[1].estimate();
        r.ratio = r.mspe_sink.mean / r.mspe_kriging.mean;
        out.push_back(r);
    }
    return out;
}

Eigen::LLT<Eigen::MatrixXd> conditional_factor(const FittedModel& model, const QueryTerms& terms) {
    if (terms.rho >= 1.0 - 1e-8) {
        throw DegenerateConditioningError("conditioning on the target is degenerate at rho >= 1 - 1e-8");
    }
    Eigen::LLT<Eigen::MatrixXd> llt = model.factor();
    llt.rankUpdate(terms.k / std::sqrt(terms.k00), -1.0);
    if (llt.info() != Eigen::Success || !llt.matrixLLT().diagonal().allFinite()) {
        throw DegenerateConditioningError("rank-one downdate of the covariance factor broke down");
    }
    return llt;
}

std::vector<McConditionalResult> mc_conditional(const FittedModel& model, const McConfig& cfg,
                                                const ConditionalTarget& target) {
    check_config(model, cfg);
    const bool region = std::holds_alternative<RegionTarget>(target);
    const double M = region ? std::get<RegionTarget>(target).M : 0.0;
    if (region && !(M >= 0.0)) {
        throw InputError("region threshold must be nonnegative");
    }
    const double tail = region ? normal_upper_tail(M) : 0.0;
    const double beta = model.beta();

    std::vector<McConditionalResult> out;
    for (Eigen::Index q = 0; q < cfg.queries.rows(); ++q) {
        const Eigen::VectorXd x0 = cfg.queries.row(q).transpose();
        const QueryTerms t = query_terms(model, x0);
        const Eigen::LLT<Eigen::MatrixXd> cond = conditional_factor(model, t);
        const Eigen::MatrixXd Lc = cond.matrixL();
        const Eigen::VectorXd lambda = model.factor().solve(t.k);
        const double w_sink = residual_weight(Sink{cfg.epsilon}, t);
        double w_cmle = std::numeric_limits<double>::quiet_NaN();
        try {
            w_cmle = residual_weight(Cmle{}, t);
        } catch (const UndefinedPredictorError&) {
        }
        const double sd0 = std::sqrt(t.k00);

        enum { kY0, kMeanK, kMeanS, kMeanC, kBiasK, kBiasS, kBiasC, kMseK, kMseS, kMseC, kDiff, kCount };
        auto totals = run_chunks<kCount>(
            cfg, (static_cast<std::uint64_t>(q) << 20) + (1ull << 40),
            [&](Rng& rng, std::size_t draws, std::array<Accumulator, kCount>& acc) {
                std::uniform_real_distribution<double> unif(0.0, 1.0);
                std::bernoulli_distribution coin(0.5);
                std::vector<double> y0s;
                for (std::size_t done = 0; done < draws; done += kBatch) {
                    const auto b = static_cast<Eigen::Index>(std::min(kBatch, draws - done));
                    y0s.resize(static_cast<std::size_t>(b));
                    for (auto& y0 : y0s) {
                        if (region) {
                            const double u = 1.0 - unif(rng);  // (0, 1]
                            const double z = -normal_quantile(u * tail);
                            y0 = beta + (coin(rng) ? sd0 : -sd0) * z;
                        } else {
                            y0 = std::get<FixedTarget>(target).y0;
                        }
                    }
                    const Eigen::MatrixXd R = Lc * normal_block(rng, model.n(), b);
                    const Eigen::RowVectorXd noise = lambda.transpose() * R;
                    for (Eigen::Index j = 0; j < b; ++j) {
                        const double y0 = y0s[static_cast<std::size_t>(j)];
                        // lambda' (y - beta 1) with y - beta 1 = ((y0 - beta) / k00) k + R_j
                        const double resid = (y0 - beta) / t.k00 * t.kKk + noise[j];
                        const double yk = beta + resid;
                        const double ys = beta + w_sink * resid;
                        const double yc = beta + w_cmle * resid;
                        acc[kY0].add(y0);
                        acc[kMeanK].add(yk);
                        acc[kMeanS].add(ys);
                        acc[kMeanC].add(yc);
                        acc[kBiasK].add(yk - y0);
                        acc[kBiasS].add(ys - y0);
                        acc[kBiasC].add(yc - y0);
                        acc[kMseK].add((yk - y0) * (yk - y0));
                        acc[kMseS].add((ys - y0) * (ys - y0));
                        acc[kMseC].add((yc - y0) * (yc - y0));
                        acc[kDiff].add((ys - y0) * (ys - y0) - (yk - y0) * (yk - y0));
                    }
                }
            });
        McConditionalResult r;
        r.rho = t.rho;
        r.k00 = t.k00;
        r.mean_y0 = totals[kY0].estimate();
        r.mean_kriging = totals[kMeanK].estimate();
        r.mean_sink = totals[kMeanS].estimate();
        r.mean_cmle = totals[kMeanC].estimate();
        r.bias_kriging = totals[kBiasK].estimate();
        r.bias_sink = totals[kBiasS].estimate();
        r.bias_cmle = totals[kBiasC].estimate();
        r.mspe_kriging = totals[kMseK].estimate();
        r.mspe_sink = totals[kMseS].estimate();
        r.mspe_cmle = totals[kMseC].estimate();
        r.mspe_difference = totals[kDiff].estimate();
        out.push_back(r);
    }
    return out;
}

}  // namespace sink
