#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace sink {

enum class TestFunctionId { Zakharov, Piston, Borehole, Welch, Friedman, RobotArm };

TestFunctionId test_function_from_name(std::string_view name);
std::string_view test_function_name(TestFunctionId id);

// Deterministic benchmark simulator on a box domain. Inputs are given in
// the unit cube and mapped affinely onto [lower, upper].
struct TestFunction {
    TestFunctionId id = TestFunctionId::Zakharov;
    Eigen::Index dim = 0;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
};

// dim is only honoured for Zakharov (0 means the default of 2); the other
// functions have fixed dimensions and reject a conflicting value.
TestFunction make_test_function(TestFunctionId id, Eigen::Index dim = 0);

Eigen::VectorXd to_native(const TestFunction& fn, const Eigen::VectorXd& u);
Eigen::VectorXd to_unit(const TestFunction& fn, const Eigen::VectorXd& x);

// Throws InputError when u leaves [0, 1]^dim or has the wrong length.
double eval(const TestFunction& fn, const Eigen::VectorXd& u);
// Evaluation at native coordinates.
double eval_native(const TestFunction& fn, const Eigen::VectorXd& x);
Eigen::VectorXd eval_rows(const TestFunction& fn, const Eigen::MatrixXd& U);

enum class DesignKind { Uniform, Faure };

DesignKind design_kind_from_name(std::string_view name);
std::string_view design_kind_name(DesignKind kind);

struct DesignSpec {
    DesignKind kind = DesignKind::Uniform;
    Eigen::Index n = 1;
    Eigen::Index dim = 1;
    std::uint64_t seed = 0;
    int base = 7;  // Faure only; prime and >= dim
};

// n x dim points in [0, 1)^dim. Uniform: i.i.d. from the seeded generator.
// Faure: the first n points of the base-b Faure sequence, randomized per
// seed by a digit permutation at each of 12 digit positions per dimension
// followed by a digital shift. Both preserve the net structure.
Eigen::MatrixXd design(const DesignSpec& spec);

// One row per point: u_1..u_d, x_1..x_d, y.
void write_design_csv(std::ostream& out, const TestFunction& fn, const Eigen::MatrixXd& U);

}  // namespace sink
