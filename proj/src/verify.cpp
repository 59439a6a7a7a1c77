#include "odegen/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "odegen/certify.hpp"
#include "odegen/odeflow.hpp"
#include "odegen/resnet.hpp"

namespace odegen::verify {

std::string SuiteResult::summary() const {
    std::ostringstream os;
    os << name << ": " << (passed() ? "pass" : "FAIL") << " (" << violations << "/"
       << samples << " violations, worst margin " << worst_margin << ")";
    return os.str();
}

std::vector<double> random_ball_point(std::size_t dim, double radius, Rng& rng) {
    std::vector<double> x(dim);
    double n = 0.0;
    do {
        for (double& v : x) v = rng.gaussian();
        n = norm_l2(x);
    } while (n == 0.0);
    const double r =
        radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(dim)) / n;
    for (double& v : x) v *= r;
    return x;
}

namespace {

void observe(SuiteResult& result, double margin) {
    result.worst_margin = std::min(result.worst_margin, margin);
    if (margin < 0.0) ++result.violations;
}

// Random field with exactly tagged constants: a mix of affine maps (Lipschitz
// tag from the spectral norm) and diagonal tanh maps.
odeflow::VectorField random_field(std::size_t m, std::size_t d, double R_X, Rng& rng) {
    odeflow::VectorField field;
    field.m = m;
    field.dim = d;
    field.kind = odeflow::FieldKind::generic;
    for (std::size_t i = 0; i < m; ++i) {
        odeflow::FieldComponent comp;
        if (rng.uniform() < 0.5) {
            Matrix a(d, d);
            const double scale = 0.5 / std::sqrt(static_cast<double>(d));
            for (double& v : a.data) v = scale * rng.gaussian();
            std::vector<double> b(d);
            for (double& v : b) v = 0.3 * rng.gaussian();
            const double sigma = spectral_norm(a);
            comp.lipschitz = std::max(sigma, 1e-6);
            comp.sup_bound = std::max(sigma * R_X + norm_l2(b), 1e-6);
            comp.fn = [a, b](const std::vector<double>& h) {
                std::vector<double> out = matvec(a, h);
                for (std::size_t j = 0; j < out.size(); ++j) out[j] += b[j];
                return out;
            };
        } else {
            std::vector<double> c(d);
            double cmax = 0.0;
            double cnorm = 0.0;
            for (double& v : c) {
                v = rng.uniform(-1.0, 1.0);
                cmax = std::max(cmax, std::abs(v));
                cnorm += v * v;
            }
            comp.lipschitz = std::max(cmax, 1e-6);
            comp.sup_bound = std::max(std::sqrt(cnorm), 1e-6);
            comp.fn = [c](const std::vector<double>& h) {
                std::vector<double> out(h.size());
                for (std::size_t j = 0; j < h.size(); ++j) out[j] = c[j] * std::tanh(h[j]);
                return out;
            };
        }
        field.components.push_back(std::move(comp));
    }
    return field;
}

}  // namespace

SuiteResult run_prop2(std::size_t samples, std::uint64_t seed) {
    SuiteResult result;
    result.name = "prop2";
    result.samples = samples;
    result.worst_margin = std::numeric_limits<double>::infinity();
    Rng rng(seed);

    odeflow::IntegrationConfig cfg;
    cfg.steps = 512;
    cfg.scheme = odeflow::Scheme::rk4;

    for (std::size_t s = 0; s < samples; ++s) {
        const std::size_t m = 1 + rng.index(4);
        const std::size_t d = 1 + rng.index(8);

        lipfun::ParamClassSpec spec;
        spec.m = m;
        spec.R_Theta = rng.uniform(1.0, 2.0);
        spec.K_Theta = rng.uniform(0.0, 2.0);
        spec.R_X = 1.0;

        const odeflow::VectorField field = random_field(m, d, spec.R_X, rng);
        spec.K_f = std::max(1.0, field.max_lipschitz());
        spec.M = field.max_sup_bound();

        const lipfun::ParamFunction theta = lipfun::random_member(spec, rng);
        const lipfun::ParamFunction theta_alt = lipfun::random_member(spec, rng);
        const std::vector<double> x = random_ball_point(d, spec.R_X, rng);

        const certify::PropConstants constants = certify::prop_constants(spec);
        const std::vector<double> out = odeflow::integrate(field, theta, x, cfg).output;
        const std::vector<double> out_alt =
            odeflow::integrate(field, theta_alt, x, cfg).output;

        observe(result, constants.output_bound - norm_l2(out));

        std::vector<double> diff(d);
        for (std::size_t j = 0; j < d; ++j) diff[j] = out[j] - out_alt[j];
        const double theta_dist = lipfun::norm_1_inf(lipfun::subtract(theta, theta_alt));
        observe(result, constants.param_lipschitz * theta_dist - norm_l2(diff));
    }
    return result;
}

SuiteResult run_prop5(std::size_t samples, std::uint64_t seed) {
    SuiteResult result;
    result.name = "prop5";
    result.samples = samples;
    result.worst_margin = std::numeric_limits<double>::infinity();
    Rng rng(seed);

    for (std::size_t s = 0; s < samples; ++s) {
        resnet::WeightClassSpec spec;
        spec.d = 1 + rng.index(8);
        spec.L = 4 + rng.index(61);
        spec.R_W = rng.uniform(0.5, 2.0);
        spec.K_sigma = 1.0;
        spec.R_X = 1.0;
        spec.K_W = std::numeric_limits<double>::max();   // not constrained here

        const resnet::WeightTensor w = resnet::random_member(spec, rng);
        const resnet::WeightTensor w_alt = resnet::random_member(spec, rng);
        const std::vector<double> x = random_ball_point(spec.d, spec.R_X, rng);

        resnet::ResNetModel model;
        model.core = w;
        model.activation = rng.uniform() < 0.5 ? Activation::relu : Activation::tanh;

        resnet::ResNetModel model_alt = model;
        model_alt.core = w_alt;

        spec.K_W = 0.0;
        const certify::PropConstants constants = certify::prop_constants(spec);

        const std::vector<double> out = resnet::forward_output(model, x);
        const std::vector<double> out_alt = resnet::forward_output(model_alt, x);

        observe(result, constants.output_bound - norm_l2(out));

        std::vector<double> diff(spec.d);
        for (std::size_t j = 0; j < spec.d; ++j) diff[j] = out[j] - out_alt[j];
        const double w_dist = resnet::distance_11_inf(w, w_alt);
        observe(result, constants.param_lipschitz * w_dist - norm_l2(diff));
    }
    return result;
}

SuiteResult run_isometry(std::size_t samples, std::uint64_t seed) {
    SuiteResult result;
    result.name = "isometry";
    result.samples = samples;
    result.worst_margin = std::numeric_limits<double>::infinity();
    Rng rng(seed);

    for (std::size_t s = 0; s < samples; ++s) {
        const std::size_t d = 1 + rng.index(6);
        const std::size_t L = 2 + rng.index(31);
        const resnet::WeightTensor w =
            rng.uniform() < 0.5 ? resnet::smooth_init(L, d, 0.1, rng.next_u64())
                                : resnet::iid_init(L, d, 1.0, rng.next_u64());
        const resnet::WeightTensor w_alt = resnet::iid_init(L, d, 0.7, rng.next_u64());

        const lipfun::ParamFunction phi = lipfun::embed_weights(w);

        // Isometry between the (1,inf) and (1,1,inf) norms.
        observe(result, 1e-12 - std::abs(lipfun::norm_1_inf(phi) - w.norm_11_inf()));

        // Linearity at the knots.
        const lipfun::ParamFunction phi_sum = lipfun::embed_weights(w + w_alt);
        const lipfun::ParamFunction phi_alt = lipfun::embed_weights(w_alt);
        double linearity_err = 0.0;
        for (std::size_t k = 0; k < phi_sum.values.size(); ++k) {
            for (std::size_t i = 0; i < phi_sum.m; ++i) {
                linearity_err = std::max(
                    linearity_err, std::abs(phi_sum.values[k][i] -
                                            (phi.values[k][i] + phi_alt.values[k][i])));
            }
        }
        observe(result, 1e-12 - linearity_err);

        // Lipschitz transfer: the embedded slopes are L * ||dW||_inf.
        const double expected = resnet::weight_lipschitz(w) * static_cast<double>(L);
        const double got = lipfun::lipschitz_constant(phi);
        observe(result, 1e-9 * std::max(1.0, expected) - std::abs(got - expected));

        // Euler integration of the embedded path equals the residual forward pass.
        resnet::ResNetModel model;
        model.core = w;
        model.activation = rng.uniform() < 0.5 ? Activation::relu : Activation::tanh;
        const std::vector<double> x = random_ball_point(d, 1.0, rng);
        const odeflow::VectorField field = odeflow::neural_ode_field(w.layer(0), model.activation);
        odeflow::IntegrationConfig cfg;
        cfg.steps = L;
        cfg.scheme = odeflow::Scheme::euler;
        const std::vector<double> via_ode = odeflow::integrate(field, phi, x, cfg).output;
        const std::vector<double> via_net = resnet::forward_output(model, x);
        double euler_err = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            euler_err = std::max(euler_err, std::abs(via_ode[j] - via_net[j]));
        }
        observe(result, 1e-12 - euler_err);
    }
    return result;
}

namespace {

double fd_relative_error(resnet::ResNetModel model, const std::vector<double>& x,
                         const std::vector<double>& upstream) {
    const resnet::ForwardResult fwd = resnet::forward(model, x);
    const resnet::Gradients grads = resnet::backward(model, x, upstream, fwd);

    constexpr double h = 1e-5;
    auto scalar = [&]() {
        const std::vector<double> out = resnet::forward_output(model, x);
        return dot(out, upstream);
    };
    auto check_tensor = [&](std::vector<double>& param, const std::vector<double>& analytic) {
        double worst = 0.0;
        for (std::size_t i = 0; i < param.size(); ++i) {
            const double keep = param[i];
            param[i] = keep + h;
            const double up = scalar();
            param[i] = keep - h;
            const double down = scalar();
            param[i] = keep;
            const double fd = (up - down) / (2.0 * h);
            const double denom = std::max({std::abs(fd), std::abs(analytic[i]), 1.0});
            worst = std::max(worst, std::abs(fd - analytic[i]) / denom);
        }
        return worst;
    };

    double worst = 0.0;
    for (std::size_t s = 0; s < model.core.storage_count(); ++s) {
        worst = std::max(worst, check_tensor(model.core.storage(s).data,
                                             grads.layers[s].data));
    }
    if (!model.input_proj.empty()) {
        worst = std::max(worst, check_tensor(model.input_proj.data, grads.input_proj.data));
    }
    if (!model.output_proj.empty()) {
        worst = std::max(worst, check_tensor(model.output_proj.data, grads.output_proj.data));
    }
    return worst;
}

}  // namespace

SuiteResult run_gradients(std::size_t samples, std::uint64_t seed) {
    SuiteResult result;
    result.name = "gradients";
    result.samples = samples;
    result.worst_margin = std::numeric_limits<double>::infinity();
    Rng rng(seed);

    for (std::size_t s = 0; s < samples; ++s) {
        const std::size_t d = 1 + rng.index(6);
        const std::size_t p = 1 + rng.index(6);
        const std::size_t q = 1 + rng.index(6);
        const std::size_t L = 1 + rng.index(8);
        const bool tied = rng.uniform() < 0.25;

        resnet::ResNetModel model;
        if (tied) {
            Matrix shared(d, d);
            for (double& v : shared.data) v = 0.5 * rng.gaussian();
            model.core = resnet::WeightTensor::tied(L, std::move(shared));
        } else {
            model.core = resnet::iid_init(L, d, 1.0, rng.next_u64());
        }
        model.activation = Activation::tanh;
        model.input_proj = Matrix(d, p);
        for (double& v : model.input_proj.data) v = 0.5 * rng.gaussian();
        model.output_proj = Matrix(q, d);
        for (double& v : model.output_proj.data) v = 0.5 * rng.gaussian();

        std::vector<double> x(p);
        for (double& v : x) v = rng.gaussian();
        std::vector<double> upstream(q);
        for (double& v : upstream) v = rng.gaussian();

        const double err = fd_relative_error(std::move(model), x, upstream);
        observe(result, 1e-4 - err);
    }
    return result;
}

SuiteResult run_cover(double R, double K, double eps, std::size_t samples,
                      std::uint64_t seed) {
    SuiteResult result;
    result.name = "cover";
    result.samples = samples;
    result.worst_margin = std::numeric_limits<double>::infinity();
    Rng rng(seed);

    const lipfun::Cover cover = lipfun::build_cover(R, K, eps);
    const double log_bound = lipfun::cover_log_bound(1, R, K, eps);
    const double log_size = std::log(static_cast<double>(cover.size()));
    observe(result, log_bound - log_size);
    {
        std::ostringstream os;
        os << "members " << cover.size() << ", log size " << log_size
           << " <= bound " << log_bound;
        result.notes.push_back(os.str());
    }

    lipfun::ParamClassSpec spec;
    spec.m = 1;
    spec.R_Theta = R;
    spec.K_Theta = K;

    for (std::size_t s = 0; s < samples; ++s) {
        const lipfun::ParamFunction f = lipfun::random_member(spec, rng);
        const lipfun::NearestResult nearest = lipfun::nearest_member(cover, f);
        observe(result, eps - nearest.distance);
    }
    return result;
}

SuiteResult run_suite_by_name(const std::string& name, std::size_t samples,
                              std::uint64_t seed) {
    if (name == "prop2") return run_prop2(samples, seed);
    if (name == "prop5") return run_prop5(samples, seed);
    if (name == "isometry") return run_isometry(samples, seed);
    if (name == "gradients") return run_gradients(samples, seed);
    throw std::invalid_argument("unknown suite: " + name);
}

}  // namespace odegen::verify
