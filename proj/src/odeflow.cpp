#include "odegen/odeflow.hpp"

#include <cmath>
#include <stdexcept>

#include "odegen/errors.hpp"

namespace odegen::odeflow {

namespace {

constexpr double kStateGuard = 1e12;

void check_state(const std::vector<double>& h, std::size_t step_index) {
    for (double v : h) {
        if (!std::isfinite(v) || std::abs(v) > kStateGuard) {
            throw divergence_error("ODE state left the finite range", step_index);
        }
    }
}

}  // namespace

double VectorField::max_lipschitz() const {
    if (kind == FieldKind::neural_time_independent) return activation_lipschitz(activation);
    double best = 0.0;
    for (const FieldComponent& c : components) best = std::max(best, c.lipschitz);
    return best;
}

double VectorField::max_sup_bound() const {
    double best = 0.0;
    for (const FieldComponent& c : components) best = std::max(best, c.sup_bound);
    return best;
}

void VectorField::validate() const {
    if (m == 0 || dim == 0) throw std::invalid_argument("VectorField: empty field");
    if (kind != FieldKind::neural_time_independent) {
        if (components.size() != m)
            throw std::invalid_argument("VectorField: need one component per coordinate");
        for (const FieldComponent& c : components) {
            if (!c.fn) throw std::invalid_argument("VectorField: missing component map");
            if (!(c.lipschitz > 0.0) || !std::isfinite(c.lipschitz) ||
                !(c.sup_bound >= 0.0) || !std::isfinite(c.sup_bound)) {
                throw std::invalid_argument("VectorField: bad component tags");
            }
        }
    }
}

namespace {

// rhs(t, h) = sum_i theta_i(t) f_i(h)
std::vector<double> eval_rhs(const VectorField& field, const lipfun::ParamFunction& theta,
                             double t, const std::vector<double>& h) {
    const std::vector<double> coeff = lipfun::eval(theta, t);
    std::vector<double> out(field.dim, 0.0);
    if (field.kind == FieldKind::neural_time_independent) {
        const std::size_t d = field.dim;
        std::vector<double> s(d);
        for (std::size_t i = 0; i < d; ++i) s[i] = activate(field.activation, h[i]);
        for (std::size_t i = 0; i < d; ++i) {
            double acc = 0.0;
            const double* row = coeff.data() + i * d;
            for (std::size_t j = 0; j < d; ++j) acc += row[j] * s[j];
            out[i] = acc;
        }
        return out;
    }
    std::vector<double> fi;
    for (std::size_t i = 0; i < field.m; ++i) {
        if (coeff[i] == 0.0) continue;
        fi = field.components[i].fn(h);
        if (fi.size() != field.dim)
            throw std::invalid_argument("VectorField: component returned wrong dimension");
        for (std::size_t j = 0; j < field.dim; ++j) out[j] += coeff[i] * fi[j];
    }
    return out;
}

}  // namespace

FlowResult integrate(const VectorField& field, const lipfun::ParamFunction& theta,
                     std::span<const double> x, const IntegrationConfig& cfg) {
    field.validate();
    if (theta.m != field.m)
        throw std::invalid_argument("integrate: theta dimension != field component count");
    if (x.size() != field.dim) throw std::invalid_argument("integrate: input length mismatch");
    if (cfg.steps < 1) throw std::invalid_argument("integrate: steps must be >= 1");
    for (double v : x) {
        if (!std::isfinite(v)) throw std::invalid_argument("integrate: non-finite input");
    }

    const std::size_t L = cfg.steps;
    const double step = 1.0 / static_cast<double>(L);
    const bool sample_right = field.kind == FieldKind::neural_time_independent;

    FlowResult result;
    std::vector<double> h(x.begin(), x.end());
    if (cfg.keep_trajectory) result.trajectory.push_back(h);

    std::vector<double> tmp(field.dim);
    for (std::size_t k = 0; k < L; ++k) {
        const double t0 = static_cast<double>(k) / static_cast<double>(L);
        const double t1 = static_cast<double>(k + 1) / static_cast<double>(L);
        if (cfg.scheme == Scheme::euler) {
            const std::vector<double> rhs =
                eval_rhs(field, theta, sample_right ? t1 : t0, h);
            for (std::size_t i = 0; i < field.dim; ++i) h[i] += step * rhs[i];
        } else {
            const double th = (static_cast<double>(k) + 0.5) / static_cast<double>(L);
            const std::vector<double> k1 = eval_rhs(field, theta, t0, h);
            for (std::size_t i = 0; i < field.dim; ++i) tmp[i] = h[i] + 0.5 * step * k1[i];
            const std::vector<double> k2 = eval_rhs(field, theta, th, tmp);
            for (std::size_t i = 0; i < field.dim; ++i) tmp[i] = h[i] + 0.5 * step * k2[i];
            const std::vector<double> k3 = eval_rhs(field, theta, th, tmp);
            for (std::size_t i = 0; i < field.dim; ++i) tmp[i] = h[i] + step * k3[i];
            const std::vector<double> k4 = eval_rhs(field, theta, t1, tmp);
            for (std::size_t i = 0; i < field.dim; ++i) {
                h[i] += step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        check_state(h, k + 1);
        if (cfg.keep_trajectory) result.trajectory.push_back(h);
    }

    result.output = std::move(h);
    return result;
}

VectorField neural_ode_field(const Matrix& w, Activation activation) {
    if (w.empty() || w.rows != w.cols)
        throw std::invalid_argument("neural_ode_field: W must be square and nonempty");
    VectorField field;
    field.m = w.rows * w.cols;
    field.dim = w.rows;
    field.kind = FieldKind::neural_time_independent;
    field.activation = activation;
    return field;
}

VectorField linear_test_field() {
    VectorField field;
    field.m = 1;
    field.dim = 1;
    field.kind = FieldKind::linear_test;
    FieldComponent c;
    c.fn = [](const std::vector<double>& h) { return h; };
    c.lipschitz = 1.0;
    c.sup_bound = 1.0;   // sup of |h| on the unit ball
    field.components.push_back(std::move(c));
    return field;
}

}  // namespace odegen::odeflow
