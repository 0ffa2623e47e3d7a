#pragma once
// Problem-description expressions: a small shared-subtree DAG with a text
// parser/printer and forward-mode evaluation of value, gradient, and dense
// Hessian.  Variables are x1..xn in the text and 0-based indices internally.
// The only nonsmooth primitive is relu3(t) = max(t,0)^3, which is C^2.

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "tilt/linalg.hpp"

namespace tilt {

enum class Op { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Sqrt, Relu3 };

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    Op op = Op::Const;
    double constant = 0.0;  // Const
    std::size_t var = 0;    // Var
    int exponent = 0;       // Pow, literal integer >= 0
    ExprPtr a, b;
};

ExprPtr make_const(double v);
ExprPtr make_var(std::size_t index);
ExprPtr make_add(ExprPtr a, ExprPtr b);
ExprPtr make_sub(ExprPtr a, ExprPtr b);
ExprPtr make_mul(ExprPtr a, ExprPtr b);
ExprPtr make_div(ExprPtr a, ExprPtr b);
ExprPtr make_neg(ExprPtr a);
ExprPtr make_pow(ExprPtr a, int exponent);
ExprPtr make_sqrt(ExprPtr a);
ExprPtr make_relu3(ExprPtr a);

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, int line, int column);
    int line;
    int column;
};

class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& message) : std::runtime_error(message) {}
};

// `line` seeds error positions when the source came from a larger document.
ExprPtr parse_expression(const std::string& src, std::size_t dimension,
                         const std::map<std::string, double>& params = {},
                         int line = 1);

// Emits an infix form that re-parses to the same function (verified by value
// agreement, not node identity: constants print in shortest round-trip form).
std::string print_expression(const ExprPtr& e);

// Replaces Var(i) by replacement[i]; shared subtrees stay shared.
ExprPtr substitute(const ExprPtr& e, const std::vector<ExprPtr>& replacement);

struct Taylor1 {
    double value = 0.0;
    Vec gradient;
};

struct Taylor2 {
    double value = 0.0;
    Vec gradient;
    Mat hessian;
};

double eval_value(const ExprPtr& e, const Vec& x);
Taylor1 eval_taylor1(const ExprPtr& e, const Vec& x);
Taylor2 eval_taylor(const ExprPtr& e, const Vec& x);

struct ProblemSpec {
    std::size_t dimension = 0;
    ExprPtr objective;
    std::vector<ExprPtr> equalities;    // q_i(x) = 0
    std::vector<ExprPtr> inequalities;  // q_i(x) <= 0
    Vec point;                          // candidate minimizer from the file
    std::map<std::string, double> params;
};

// Text format, one statement per line ('#' starts a comment, arrays may span
// lines):
//   dimension = 3
//   params.a = 2
//   objective = "0.25*x1 + x3 + x3^2 - x1*x2"
//   equalities = []
//   inequalities = ["x1 - x3", "-x1 - x3"]
//   point = [0, 0, 0]
// `paramOverrides` must name params declared in the file.
ProblemSpec parse_problem(const std::string& text,
                          const std::map<std::string, double>& paramOverrides = {});

std::string print_problem(const ProblemSpec& p);

struct ConstraintData {
    double value = 0.0;
    Vec gradient;
    Mat hessian;
};

struct PointData {
    Vec x;
    double objectiveValue = 0.0;
    Vec objectiveGradient;
    Mat objectiveHessian;
    std::vector<ConstraintData> equalities;
    std::vector<ConstraintData> inequalities;
};

// Evaluates objective and every constraint at x.  Hessians are symmetrized.
// Throws DomainError naming the offending piece ("objective", "equality 1",
// "inequality 3") on undefined operations or non-finite results.
PointData eval_point(const ProblemSpec& p, const Vec& x);

}  // namespace tilt
