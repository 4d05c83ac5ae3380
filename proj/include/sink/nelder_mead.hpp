#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace sink {

struct NelderMeadOptions {
    int max_evals = 2000;
    // Stop once the spread of objective values over the simplex is below this.
    double ftol = 1e-6;
    // Initial edge length as a fraction of each box width.
    double initial_step = 0.1;
};

struct NelderMeadResult {
    Eigen::VectorXd x;
    double f = 0.0;
    int evals = 0;
    bool converged = false;
    // Best objective after each iteration; nonincreasing.
    std::vector<double> trace;
};

// Box-constrained Nelder-Mead minimisation with dimension-adaptive
// coefficients. Trial points are projected onto [lower, upper].
// Non-finite objective values are treated as +infinity.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& start,
                             const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                             const NelderMeadOptions& options = {});

}  // namespace sink
