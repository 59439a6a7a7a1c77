#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "odegen/errors.hpp"
#include "odegen/odeflow.hpp"
#include "odegen/verify.hpp"

using namespace odegen;
using namespace odegen::odeflow;

namespace {

constexpr double kEuler1000 = 2.7169239322358925;   // (1 + 1/1000)^1000
constexpr double kE = 2.718281828459045235;

double integrate_linear(double theta_value, double x, std::size_t steps, Scheme scheme) {
    const VectorField field = linear_test_field();
    const lipfun::ParamFunction theta = lipfun::ParamFunction::constant({theta_value});
    IntegrationConfig cfg;
    cfg.steps = steps;
    cfg.scheme = scheme;
    return integrate(field, theta, std::vector<double>{x}, cfg).output[0];
}

}  // namespace

TEST_CASE("zero parameter leaves the input unchanged") {
    const VectorField field = linear_test_field();
    const lipfun::ParamFunction zero = lipfun::ParamFunction::constant({0.0});
    for (Scheme scheme : {Scheme::euler, Scheme::rk4}) {
        IntegrationConfig cfg;
        cfg.scheme = scheme;
        cfg.steps = 17;
        const auto out = integrate(field, zero, std::vector<double>{2.5}, cfg);
        CHECK(out.output[0] == 2.5);
    }
}

TEST_CASE("linear ODE against the closed form") {
    // Euler with L = 1000 gives (1 + 1/L)^L exactly.
    CHECK(integrate_linear(1.0, 1.0, 1000, Scheme::euler) ==
          doctest::Approx(kEuler1000).epsilon(1e-12));
    // rk4 at L = 100 sits within 1e-8 of e.
    CHECK(std::abs(integrate_linear(1.0, 1.0, 100, Scheme::rk4) - kE) < 1e-8);
}

TEST_CASE("euler error bound on the unit linear problem") {
    for (std::size_t L : {10u, 100u, 1000u}) {
        const double val = integrate_linear(1.0, 1.0, L, Scheme::euler);
        CHECK(std::abs(val - kE) <= 2.0 / static_cast<double>(L));
    }
}

TEST_CASE("first-order euler convergence with stable constant") {
    std::vector<double> constants;
    for (std::size_t L : {10u, 100u, 1000u}) {
        const double euler = integrate_linear(1.0, 1.0, L, Scheme::euler);
        const double reference = integrate_linear(1.0, 1.0, 10 * L, Scheme::rk4);
        const double err = std::abs(euler - reference);
        CHECK(err <= 2.0 / static_cast<double>(L));
        constants.push_back(err * static_cast<double>(L));
    }
    const double lo = std::min({constants[0], constants[1], constants[2]});
    const double hi = std::max({constants[0], constants[1], constants[2]});
    CHECK(hi / lo < 1.5);
}

TEST_CASE("time-dependent coefficient against the closed form") {
    // dH = theta(t) H with theta(t) = t has solution exp(t^2 / 2); rk4 samples
    // theta at half-steps through the interpolant.
    const VectorField field = linear_test_field();
    lipfun::ParamFunction ramp;
    ramp.m = 1;
    ramp.knots = {0.0, 1.0};
    ramp.values = {{0.0}, {1.0}};
    IntegrationConfig cfg;
    cfg.steps = 100;
    cfg.scheme = Scheme::rk4;
    const double out = integrate(field, ramp, std::vector<double>{1.0}, cfg).output[0];
    CHECK(std::abs(out - std::exp(0.5)) < 1e-8);
}

TEST_CASE("trajectory capture") {
    const VectorField field = linear_test_field();
    const lipfun::ParamFunction one = lipfun::ParamFunction::constant({1.0});
    IntegrationConfig cfg;
    cfg.steps = 4;
    cfg.keep_trajectory = true;
    const auto out = integrate(field, one, std::vector<double>{1.0}, cfg);
    REQUIRE(out.trajectory.size() == 5);
    CHECK(out.trajectory.front()[0] == 1.0);
    CHECK(out.trajectory.back()[0] == out.output[0]);
}

TEST_CASE("neural field zero weights") {
    const Matrix w(3, 3);
    const VectorField field = neural_ode_field(w, Activation::relu);
    const lipfun::ParamFunction theta = lipfun::ParamFunction::constant(w.data);
    IntegrationConfig cfg;
    cfg.steps = 32;
    const std::vector<double> x{0.5, -1.0, 2.0};
    const auto out = integrate(field, theta, x, cfg);
    CHECK(out.output == x);
}

TEST_CASE("neural field scalar closed form") {
    Matrix w(1, 1);
    w(0, 0) = 0.7;
    const VectorField field = neural_ode_field(w, Activation::identity);
    const lipfun::ParamFunction theta = lipfun::ParamFunction::constant({0.7});
    IntegrationConfig cfg;
    cfg.steps = 50;
    const auto out = integrate(field, theta, std::vector<double>{2.0}, cfg);
    CHECK(out.output[0] ==
          doctest::Approx(2.0 * std::pow(1.0 + 0.7 / 50.0, 50)).epsilon(1e-12));
}

TEST_CASE("relu dead regime is stationary") {
    Matrix w(2, 2);
    w(0, 0) = 3.0;
    w(0, 1) = -1.0;
    w(1, 0) = 2.0;
    w(1, 1) = 5.0;
    const VectorField field = neural_ode_field(w, Activation::relu);
    const lipfun::ParamFunction theta = lipfun::ParamFunction::constant(w.data);
    IntegrationConfig cfg;
    cfg.steps = 64;
    const std::vector<double> x{-1.0, -0.5};
    const auto out = integrate(field, theta, x, cfg);
    CHECK(out.output == x);
}

TEST_CASE("non-square neural field is rejected") {
    CHECK_THROWS_AS(neural_ode_field(Matrix(2, 3), Activation::relu),
                    std::invalid_argument);
}

TEST_CASE("divergence guard") {
    VectorField field;
    field.m = 1;
    field.dim = 1;
    FieldComponent comp;
    comp.fn = [](const std::vector<double>& h) {
        return std::vector<double>{h[0] * h[0]};
    };
    comp.lipschitz = 1.0;
    comp.sup_bound = 1.0;
    field.components.push_back(comp);

    const lipfun::ParamFunction one = lipfun::ParamFunction::constant({1.0});
    IntegrationConfig cfg;
    cfg.steps = 10;
    CHECK_THROWS_AS(integrate(field, one, std::vector<double>{1e7}, cfg),
                    divergence_error);
    try {
        integrate(field, one, std::vector<double>{1e7}, cfg);
    } catch (const divergence_error& e) {
        CHECK(e.index() >= 1);
    }
}

TEST_CASE("argument checking") {
    const VectorField field = linear_test_field();
    const lipfun::ParamFunction theta2 = lipfun::ParamFunction::constant({1.0, 2.0});
    IntegrationConfig cfg;
    CHECK_THROWS_AS(integrate(field, theta2, std::vector<double>{1.0}, cfg),
                    std::invalid_argument);
    const lipfun::ParamFunction theta = lipfun::ParamFunction::constant({1.0});
    CHECK_THROWS_AS(integrate(field, theta, std::vector<double>{1.0, 2.0}, cfg),
                    std::invalid_argument);
    const std::vector<double> bad{std::nan("")};
    CHECK_THROWS_AS(integrate(field, theta, bad, cfg), std::invalid_argument);
}

TEST_CASE("prop2 property suite at reduced sample count") {
    const verify::SuiteResult result = verify::run_prop2(60, 17);
    CHECK(result.violations == 0);
    CHECK(result.worst_margin >= 0.0);
}
