#include "sink/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sink/errors.hpp"

namespace sink {

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& start,
                             const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                             const NelderMeadOptions& options) {
    const Eigen::Index n = start.size();
    if (n == 0 || lower.size() != n || upper.size() != n) {
        throw InputError("nelder_mead: start and bounds must share a nonzero dimension");
    }
    if ((lower.array() > upper.array()).any()) {
        throw ConfigError("nelder_mead: lower bound exceeds upper bound");
    }

    // Gao & Han adaptive coefficients; reduce to the classic 1, 2, 1/2, 1/2 at n = 2.
    const double dn = static_cast<double>(n);
    const double adapt = std::max(dn, 2.0);
    const double alpha = 1.0;
    const double gamma = 1.0 + 2.0 / adapt;
    const double rho = 0.75 - 1.0 / (2.0 * adapt);
    const double shrink = 1.0 - 1.0 / adapt;

    NelderMeadResult result;
    auto project = [&](Eigen::VectorXd x) { return x.cwiseMax(lower).cwiseMin(upper).eval(); };
    auto eval = [&](const Eigen::VectorXd& x) {
        ++result.evals;
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    std::vector<Eigen::VectorXd> simplex(static_cast<std::size_t>(n + 1));
    std::vector<double> values(static_cast<std::size_t>(n + 1));
    simplex[0] = project(start);
    values[0] = eval(simplex[0]);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXd v = simplex[0];
        double step = options.initial_step * (upper[i] - lower[i]);
        if (step == 0.0) {
            step = options.initial_step;
        }
        v[i] += (v[i] + step <= upper[i]) ? step : -step;
        simplex[static_cast<std::size_t>(i + 1)] = project(v);
        values[static_cast<std::size_t>(i + 1)] = eval(simplex[static_cast<std::size_t>(i + 1)]);
    }

    std::vector<std::size_t> order(simplex.size());
    auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        std::vector<Eigen::VectorXd> s2;
        std::vector<double> v2;
        s2.reserve(order.size());
        v2.reserve(order.size());
        for (std::size_t idx : order) {
            s2.push_back(std::move(simplex[idx]));
            v2.push_back(values[idx]);
        }
        simplex = std::move(s2);
        values = std::move(v2);
    };

    sort_simplex();
    result.trace.push_back(values.front());
    const std::size_t worst = simplex.size() - 1;

    while (result.evals < options.max_evals) {
        if (std::isfinite(values[worst]) && values[worst] - values.front() <= options.ftol) {
            result.converged = true;
            break;
        }
        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (std::size_t i = 0; i < worst; ++i) {
            centroid += simplex[i];
        }
        centroid /= dn;

        const Eigen::VectorXd xr = project(centroid + alpha * (centroid - simplex[worst]));
        const double fr = eval(xr);
        if (fr < values.front()) {
            const Eigen::VectorXd xe = project(centroid + gamma * (xr - centroid));
            const double fe = eval(xe);
            if (fe < fr) {
                simplex[worst] = xe;
                values[worst] = fe;
            } else {
                simplex[worst] = xr;
                values[worst] = fr;
            }
        } else if (fr < values[worst - 1]) {
            simplex[worst] = xr;
            values[worst] = fr;
        } else {
            const bool outside = fr < values[worst];
            const Eigen::VectorXd xc = outside ? project(centroid + rho * (xr - centroid))
                                               : project(centroid + rho * (simplex[worst] - centroid));
            const double fc = eval(xc);
            if (fc < (outside ? fr : values[worst])) {
                simplex[worst] = xc;
                values[worst] = fc;
            } else {
                for (std::size_t i = 1; i < simplex.size(); ++i) {
                    simplex[i] = project(simplex[0] + shrink * (simplex[i] - simplex[0]));
                    values[i] = eval(simplex[i]);
                }
            }
        }
        sort_simplex();
        result.trace.push_back(values.front());
    }

    result.x = simplex.front();
    result.f = values.front();
    return result;
}

}  // namespace sink
