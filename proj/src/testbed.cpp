#include "sink/testbed.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>

#include "sink/errors.hpp"

namespace sink {

TestFunctionId test_function_from_name(std::string_view name) {
    if (name == "zakharov") {
        return TestFunctionId::Zakharov;
    }
    if (name == "piston") {
        return TestFunctionId::Piston;
    }
    if (name == "borehole") {
        return TestFunctionId::Borehole;
    }
    if (name == "welch") {
        return TestFunctionId::Welch;
    }
    if (name == "friedman") {
        return TestFunctionId::Friedman;
    }
    if (name == "robotarm") {
        return TestFunctionId::RobotArm;
    }
    throw ConfigError("unknown test function '" + std::string(name) + "'");
}

std::string_view test_function_name(TestFunctionId id) {
    switch (id) {
    case TestFunctionId::Zakharov:
        return "zakharov";
    case TestFunctionId::Piston:
        return "piston";
    case TestFunctionId::Borehole:
        return "borehole";
    case TestFunctionId::Welch:
        return "welch";
    case TestFunctionId::Friedman:
        return "friedman";
    case TestFunctionId::RobotArm:
        return "robotarm";
    }
    return "unknown";
}

TestFunction make_test_function(TestFunctionId id, Eigen::Index dim) {
    TestFunction fn;
    fn.id = id;
    auto box = [&](std::initializer_list<std::pair<double, double>> ranges) {
        fn.dim = static_cast<Eigen::Index>(ranges.size());
        fn.lower.resize(fn.dim);
        fn.upper.resize(fn.dim);
        Eigen::Index j = 0;
        for (const auto& [lo, hi] : ranges) {
            fn.lower[j] = lo;
            fn.upper[j] = hi;
            ++j;
        }
    };
    auto cube = [&](Eigen::Index d, double lo, double hi) {
        fn.dim = d;
        fn.lower = Eigen::VectorXd::Constant(d, lo);
        fn.upper = Eigen::VectorXd::Constant(d, hi);
    };
    switch (id) {
    case TestFunctionId::Zakharov:
        if (dim < 0) {
            throw ConfigError("zakharov dimension must be positive");
        }
        cube(dim == 0 ? 2 : dim, 0.0, 1.0);
        return fn;
    case TestFunctionId::Piston:
        // M, S, V0, k, P0, Ta, T0
        box({{30.0, 60.0}, {0.005, 0.020}, {0.002, 0.010}, {1000.0, 5000.0}, {90000.0, 110000.0}, {290.0, 296.0},
             {340.0, 360.0}});
        break;
    case TestFunctionId::Borehole:
        // rw, r, Tu, Hu, Tl, Hl, L, Kw
        box({{0.05, 0.15}, {100.0, 50000.0}, {63070.0, 115600.0}, {990.0, 1110.0}, {63.1, 116.0}, {700.0, 820.0},
             {1120.0, 1680.0}, {9855.0, 12045.0}});
        break;
    case TestFunctionId::Welch:
        cube(20, -0.5, 0.5);
        break;
    case TestFunctionId::Friedman:
        cube(5, 0.0, 1.0);
        break;
    case TestFunctionId::RobotArm: {
        const double two_pi = 2.0 * std::numbers::pi;
        box({{0.0, two_pi}, {0.0, two_pi}, {0.0, two_pi}, {0.0, two_pi}, {0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0},
             {0.0, 1.0}});
        break;
    }
    }
    if (dim != 0 && dim != fn.dim) {
        throw ConfigError(std::string(test_function_name(id)) + " has fixed dimension " + std::to_string(fn.dim));
    }
    return fn;
}

Eigen::VectorXd to_native(const TestFunction& fn, const Eigen::VectorXd& u) {
    return fn.lower.array() + u.array() * (fn.upper - fn.lower).array();
}

Eigen::VectorXd to_unit(const TestFunction& fn, const Eigen::VectorXd& x) {
    return (x - fn.lower).array() / (fn.upper - fn.lower).array();
}

namespace {

double zakharov(const Eigen::VectorXd& x) {
    double sq = 0.0;
    double lin = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        sq += x[i] * x[i];
        lin += 0.5 * static_cast<double>(i + 1) * x[i];
    }
    const double lin2 = lin * lin;
    return sq + lin2 + lin2 * lin2;
}

double piston(const Eigen::VectorXd& x) {
    const double M = x[0], S = x[1], V0 = x[2], k = x[3], P0 = x[4], Ta = x[5], T0 = x[6];
    const double A = P0 * S + 19.62 * M - k * V0 / S;
    const double disc = A * A + 4.0 * k * (P0 * V0 / T0) * Ta;
    if (!(disc > 0.0)) {
        throw NumericalError("piston: negative discriminant inside the domain");
    }
    const double V = S / (2.0 * k) * (std::sqrt(disc) - A);
    return 2.0 * std::numbers::pi * std::sqrt(M / (k + S * S * (P0 * V0 / T0) * (Ta / (V * V))));
}

double borehole(const Eigen::VectorXd& x) {
    const double rw = x[0], r = x[1], Tu = x[2], Hu = x[3], Tl = x[4], Hl = x[5], L = x[6], Kw = x[7];
    const double lg = std::log(r / rw);
    return 2.0 * std::numbers::pi * Tu * (Hu - Hl) / (lg * (1.5 + 2.0 * L * Tu / (lg * rw * rw * Kw) + Tu / Tl));
}

double welch(const Eigen::VectorXd& v) {
    auto x = [&](int i) { return v[i - 1]; };
    return 5.0 * x(12) / (1.0 + x(1)) + 5.0 * (x(4) - x(20)) * (x(4) - x(20)) + x(5) + 40.0 * std::pow(x(19), 3) -
           5.0 * x(19) + 0.05 * x(2) + 0.08 * x(3) - 0.03 * x(6) + 0.03 * x(7) - 0.09 * x(9) - 0.01 * x(10) -
           0.07 * x(11) + 0.25 * x(13) * x(13) - 0.04 * x(14) + 0.06 * x(15) - 0.01 * x(17) - 0.03 * x(18);
}

double friedman(const Eigen::VectorXd& x) {
    return 10.0 * std::sin(std::numbers::pi * x[0] * x[1]) + 20.0 * (x[2] - 0.5) * (x[2] - 0.5) + 10.0 * x[3] +
           5.0 * x[4];
}

double robot_arm(const Eigen::VectorXd& x) {
    double u = 0.0;
    double v = 0.0;
    double angle = 0.0;
    for (int i = 0; i < 4; ++i) {
        angle += x[i];
        u += x[4 + i] * std::cos(angle);
        v += x[4 + i] * std::sin(angle);
    }
    return std::sqrt(u * u + v * v);
}

}  // namespace

double eval_native(const TestFunction& fn, const Eigen::VectorXd& x) {
    if (x.size() != fn.dim) {
        throw InputError(std::string(test_function_name(fn.id)) + " expects " + std::to_string(fn.dim) + " inputs");
    }
    switch (fn.id) {
    case TestFunctionId::Zakharov:
        return zakharov(x);
    case TestFunctionId::Piston:
        return piston(x);
    case TestFunctionId::Borehole:
        return borehole(x);
    case TestFunctionId::Welch:
        return welch(x);
    case TestFunctionId::Friedman:
        return friedman(x);
    case TestFunctionId::RobotArm:
        return robot_arm(x);
    }
    return 0.0;
}

double eval(const TestFunction& fn, const Eigen::VectorXd& u) {
    if (u.size() != fn.dim) {
        throw InputError(std::string(test_function_name(fn.id)) + " expects " + std::to_string(fn.dim) + " inputs");
    }
    if (!((u.array() >= 0.0).all() && (u.array() <= 1.0).all())) {
        throw InputError("test function input lies outside the unit cube");
    }
    return eval_native(fn, to_native(fn, u));
}

Eigen::VectorXd eval_rows(const TestFunction& fn, const Eigen::MatrixXd& U) {
    Eigen::VectorXd y(U.rows());
    for (Eigen::Index i = 0; i < U.rows(); ++i) {
        y[i] = eval(fn, U.row(i).transpose());
    }
    return y;
}

void write_design_csv(std::ostream& out, const TestFunction& fn, const Eigen::MatrixXd& U) {
    const Eigen::Index d = U.cols();
    for (Eigen::Index j = 0; j < d; ++j) {
        out << "u_" << (j + 1) << ',';
    }
    for (Eigen::Index j = 0; j < d; ++j) {
        out << "x_" << (j + 1) << ',';
    }
    out << "y\n" << std::setprecision(17);
    for (Eigen::Index i = 0; i < U.rows(); ++i) {
        const Eigen::VectorXd u = U.row(i).transpose();
        const Eigen::VectorXd x = to_native(fn, u);
        for (Eigen::Index j = 0; j < d; ++j) {
            out << u[j] << ',';
        }
        for (Eigen::Index j = 0; j < d; ++j) {
            out << x[j] << ',';
        }
        out << eval(fn, u) << '\n';
    }
}

}  // namespace sink
