#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "odegen/activation.hpp"
#include "odegen/lipfun.hpp"
#include "odegen/numerics.hpp"

namespace odegen::odeflow {

// One coordinate map f_i: R^d -> R^d with its tagged constants. Tags are valid
// upper bounds for the Lipschitz constant and the sup on the input ball.
struct FieldComponent {
    std::function<std::vector<double>(const std::vector<double>&)> fn;
    double lipschitz = 1.0;
    double sup_bound = 1.0;
};

enum class FieldKind { generic, neural_time_independent, linear_test };

// Right-hand side basis of dH = sum_i theta_i(t) f_i(H) dt. The neural kind
// keeps only the activation: its components are sigma_ij(x) = sigma(x_j) e_i,
// evaluated in a structured pass rather than one lambda per (i, j).
struct VectorField {
    std::size_t m = 0;     // component count (d*d for the neural kind)
    std::size_t dim = 0;   // d
    FieldKind kind = FieldKind::generic;
    std::vector<FieldComponent> components;   // populated for generic fields
    Activation activation = Activation::relu; // used by the neural kind

    double max_lipschitz() const;
    double max_sup_bound() const;
    void validate() const;
};

enum class Scheme { euler, rk4 };

struct IntegrationConfig {
    std::size_t steps = 100;   // L
    Scheme scheme = Scheme::euler;
    bool keep_trajectory = false;
};

struct FlowResult {
    std::vector<double> output;
    std::vector<std::vector<double>> trajectory;   // filled when requested
};

// Forward map F_theta(x) = H_1 with uniform step 1/steps. Euler samples theta
// at the left endpoint for generic fields and at the right endpoint for the
// neural kind, which makes the discrete recursion match the residual network.
// Throws divergence_error with the step index when the state blows up.
FlowResult integrate(const VectorField& field, const lipfun::ParamFunction& theta,
                     std::span<const double> x, const IntegrationConfig& cfg);

// Field whose constant-parameter integration reproduces dH = W sigma(H) dt with
// theta the row-major flattening of W.
VectorField neural_ode_field(const Matrix& w, Activation activation);

// d = m = 1, f(h) = h: the closed-form test problem.
VectorField linear_test_field();

}  // namespace odegen::odeflow
