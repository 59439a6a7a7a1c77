#include "odegen/certify.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace odegen::certify {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;

double sum_terms(const std::vector<std::pair<std::string, double>>& terms) {
    double acc = 0.0;
    for (const auto& [name, value] : terms) acc += value;
    return acc;
}

Precondition check_n_threshold(std::uint64_t n, double required) {
    return Precondition{"n >= " + std::to_string(required),
                        static_cast<double>(n) >= required, static_cast<double>(n),
                        required};
}

Precondition check_delta(double delta) {
    return Precondition{"delta in (0,1)", delta > 0.0 && delta < 1.0, delta, 1.0};
}

double confidence_term(double B, std::uint64_t n, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) return 0.0;
    const double nd = static_cast<double>(n);
    return B / std::sqrt(nd) * std::sqrt(std::log(1.0 / delta));
}

}  // namespace

void NeuralOdeSpec::validate() const {
    if (d == 0) throw std::invalid_argument("NeuralOdeSpec: d must be >= 1");
    if (!(R_W > 0.0)) throw std::invalid_argument("NeuralOdeSpec: R_W must be positive");
    if (!(K_sigma > 0.0)) throw std::invalid_argument("NeuralOdeSpec: K_sigma must be positive");
    if (!(M > 0.0)) throw std::invalid_argument("NeuralOdeSpec: M must be positive");
    if (!(R_X > 0.0) || !(R_Y > 0.0) || !(K_loss > 0.0))
        throw std::invalid_argument("NeuralOdeSpec: R_X, R_Y, K_loss must be positive");
}

bool BoundReport::valid() const {
    return std::all_of(preconditions.begin(), preconditions.end(),
                       [](const Precondition& p) { return p.satisfied; });
}

std::string BoundReport::to_json_string(int indent) const {
    nlohmann::json j;
    j["bound_name"] = bound_name;
    j["B"] = B;
    j["terms"] = nlohmann::json::array();
    for (const auto& [name, value] : terms) {
        j["terms"].push_back({{"name", name}, {"value", value}});
    }
    j["total"] = total;
    j["valid"] = valid();
    j["preconditions"] = nlohmann::json::array();
    for (const Precondition& p : preconditions) {
        j["preconditions"].push_back({{"name", p.name},
                                      {"satisfied", p.satisfied},
                                      {"measured", p.measured},
                                      {"required", p.required}});
    }
    j["inputs_echo"] = nlohmann::json::object();
    for (const auto& [name, value] : inputs_echo) j["inputs_echo"][name] = value;
    j["notes"] = notes;
    return j.dump(indent);
}

BoundReport bound_param_ode(const lipfun::ParamClassSpec& spec, std::uint64_t n,
                            double delta) {
    spec.validate();
    const double m = static_cast<double>(spec.m);
    const double nd = static_cast<double>(n);

    BoundReport r;
    r.bound_name = "param_ode";
    r.inputs_echo = {{"m", m},         {"R_Theta", spec.R_Theta}, {"K_Theta", spec.K_Theta},
                     {"K_f", spec.K_f}, {"M", spec.M},            {"R_X", spec.R_X},
                     {"R_Y", spec.R_Y}, {"K_loss", spec.K_loss},  {"n", nd},
                     {"delta", delta}};

    const double n_required = 9.0 * std::max(1.0 / (m * m * spec.R_Theta * spec.R_Theta), 1.0);
    r.preconditions.push_back(check_n_threshold(n, n_required));
    r.preconditions.push_back(check_delta(delta));

    const double expfac = std::exp(spec.K_f * spec.R_Theta);
    r.B = 6.0 * spec.K_loss * spec.K_f * expfac *
          (spec.R_X + spec.M * spec.R_Theta * expfac + spec.R_Y);

    const double log_arg = spec.R_Theta * m * nd;
    const double complexity =
        log_arg > 0.0 ? r.B * std::sqrt((m + 1.0) * std::log(log_arg) / nd) : 0.0;
    const double lipschitz =
        r.B * m * std::sqrt(spec.K_Theta) / std::pow(nd, 0.25);
    r.terms = {{"complexity", complexity},
               {"parameter_lipschitz", lipschitz},
               {"confidence", confidence_term(r.B, n, delta)}};
    r.total = sum_terms(r.terms);
    return r;
}

BoundReport bound_neural_ode(const NeuralOdeSpec& spec, std::uint64_t n, double delta) {
    spec.validate();
    const double d = static_cast<double>(spec.d);
    const double nd = static_cast<double>(n);

    BoundReport r;
    r.bound_name = "neural_ode";
    r.inputs_echo = {{"d", d},          {"R_W", spec.R_W},       {"K_sigma", spec.K_sigma},
                     {"M", spec.M},     {"R_X", spec.R_X},       {"R_Y", spec.R_Y},
                     {"K_loss", spec.K_loss}, {"n", nd},         {"delta", delta}};

    const double n_required =
        9.0 / spec.R_W * std::max(1.0 / (d * d * d * d * spec.R_W), 1.0);
    r.preconditions.push_back(check_n_threshold(n, n_required));
    r.preconditions.push_back(check_delta(delta));

    const double expfac = std::exp(spec.K_sigma * spec.R_W);
    r.B = 6.0 * kSqrt2 * spec.K_loss * spec.K_sigma * expfac *
          (spec.R_X + spec.M * spec.R_W * expfac + spec.R_Y);

    const double log_arg = spec.R_W * d * nd;
    const double complexity =
        log_arg > 0.0 ? r.B * (d + 1.0) * std::sqrt(std::log(log_arg) / nd) : 0.0;
    r.terms = {{"complexity", complexity},
               {"confidence", confidence_term(r.B, n, delta)}};
    r.total = sum_terms(r.terms);
    r.notes.push_back("time-independent class: no n^{-1/4} term");
    return r;
}

BoundReport bound_resnet(const resnet::WeightClassSpec& spec, std::uint64_t n,
                         double delta) {
    spec.validate();
    const double d = static_cast<double>(spec.d);
    const double nd = static_cast<double>(n);

    BoundReport r;
    r.bound_name = "resnet";
    r.inputs_echo = {{"d", d},          {"L", static_cast<double>(spec.L)},
                     {"R_W", spec.R_W}, {"K_W", spec.K_W},
                     {"K_sigma", spec.K_sigma}, {"R_X", spec.R_X},
                     {"R_Y", spec.R_Y}, {"K_loss", spec.K_loss},
                     {"n", nd},         {"delta", delta}};

    const double n_required =
        9.0 / spec.R_W * std::max(1.0 / (d * d * d * d * spec.R_W), 1.0);
    r.preconditions.push_back(check_n_threshold(n, n_required));
    r.preconditions.push_back(check_delta(delta));

    const double expfac = std::exp(spec.K_sigma * spec.R_W);
    r.B = 6.0 * kSqrt2 * spec.K_loss * std::max(expfac / spec.R_W, 1.0) *
          (spec.R_X * expfac + spec.R_Y);

    const double log_arg = spec.R_W * d * nd;
    const double complexity =
        log_arg > 0.0 ? r.B * (d + 1.0) * std::sqrt(std::log(log_arg) / nd) : 0.0;
    const double lipschitz =
        r.B * d * d * std::sqrt(spec.K_W) / std::pow(nd, 0.25);
    r.terms = {{"complexity", complexity},
               {"weight_lipschitz", lipschitz},
               {"confidence", confidence_term(r.B, n, delta)}};
    r.total = sum_terms(r.terms);
    r.notes.push_back("depth L does not appear in the bound");
    return r;
}

double bartlett_capacity(const resnet::WeightTensor& w) {
    const std::size_t L = w.depth();
    const std::size_t d = w.width();
    const double Ld = static_cast<double>(L);
    const Matrix eye = Matrix::identity(d);

    double log_prod = 0.0;
    double sum_term = 0.0;
    for (std::size_t k = 0; k < L; ++k) {
        const Matrix shifted = eye + w.layer(k) * (1.0 / Ld);
        // I + W/L has nearly equal singular values, so the default iteration
        // budget cannot separate them to 1e-9; give it room.
        const double spec_norm = spectral_norm(shifted, 1e-9, 200000);
        log_prod += std::log(spec_norm);

        Matrix transposed(d, d);
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) transposed(j, i) = w.layer(k)(i, j);
        }
        const double n21 = norm_21(transposed);
        sum_term += std::pow(n21, 2.0 / 3.0) /
                    (std::pow(Ld, 2.0 / 3.0) * std::pow(spec_norm, 2.0 / 3.0));
    }
    return std::exp(log_prod) * std::pow(sum_term, 1.5);
}

BoundReport bound_bartlett(const resnet::WeightTensor& w, double R_X, double gamma,
                           std::uint64_t n, double delta) {
    const double nd = static_cast<double>(n);
    const double d = static_cast<double>(w.width());
    const double measured_norm = w.norm_11_inf();

    BoundReport r;
    r.bound_name = "bartlett";
    r.inputs_echo = {{"d", d},
                     {"L", static_cast<double>(w.depth())},
                     {"R_X", R_X},
                     {"gamma", gamma},
                     {"n", nd},
                     {"delta", delta},
                     {"norm_11_inf", measured_norm}};

    r.preconditions.push_back(Precondition{"gamma > 0", gamma > 0.0, gamma, 0.0});
    r.preconditions.push_back(Precondition{"L >= ||W||_{1,1,inf}",
                                           static_cast<double>(w.depth()) >= measured_norm,
                                           static_cast<double>(w.depth()), measured_norm});
    r.preconditions.push_back(check_delta(delta));

    const double capacity = bartlett_capacity(w);
    r.B = capacity;
    const double margin_term =
        gamma > 0.0 ? R_X * capacity * std::log(d) / (gamma * std::sqrt(nd)) : 0.0;
    r.terms = {{"margin", margin_term},
               {"confidence", confidence_term(1.0, n, delta)}};
    r.total = sum_terms(r.terms);
    r.notes.push_back("universal constant C reported as 1: shape-only comparison");
    r.notes.push_back("assumes K_sigma = 1");
    return r;
}

BoundReport bound_bartlett(const resnet::WeightClassSpec& spec, double gamma,
                           std::uint64_t n, double delta) {
    spec.validate();
    const double nd = static_cast<double>(n);
    const double d = static_cast<double>(spec.d);
    const double Ld = static_cast<double>(spec.L);

    BoundReport r;
    r.bound_name = "bartlett_spec";
    r.inputs_echo = {{"d", d},      {"L", Ld},        {"R_W", spec.R_W},
                     {"R_X", spec.R_X}, {"gamma", gamma}, {"n", nd},
                     {"delta", delta}};

    r.preconditions.push_back(Precondition{"gamma > 0", gamma > 0.0, gamma, 0.0});
    r.preconditions.push_back(
        Precondition{"L >= R_W", Ld >= spec.R_W, Ld, spec.R_W});
    r.preconditions.push_back(
        Precondition{"K_sigma == 1", spec.K_sigma == 1.0, spec.K_sigma, 1.0});
    r.preconditions.push_back(check_delta(delta));

    const double capacity = 2.0 * spec.R_W * std::exp(spec.R_W) * std::sqrt(Ld);
    r.B = capacity;
    const double margin_term =
        gamma > 0.0 ? spec.R_X * capacity * std::log(d) / (gamma * std::sqrt(nd)) : 0.0;
    r.terms = {{"margin", margin_term},
               {"confidence", confidence_term(1.0, n, delta)}};
    r.total = sum_terms(r.terms);
    r.notes.push_back("capacity substituted by the majorization 2 R_W exp(R_W) sqrt(L)");
    r.notes.push_back("universal constant C reported as 1: shape-only comparison");
    return r;
}

GolowichRecord golowich_product(const resnet::WeightTensor& w) {
    const std::size_t L = w.depth();
    const std::size_t d = w.width();
    const double Ld = static_cast<double>(L);
    const Matrix eye = Matrix::identity(d);

    GolowichRecord rec;
    rec.measured_R_W = w.norm_11_inf();
    for (std::size_t k = 0; k < L; ++k) {
        rec.log_product += std::log(frobenius_norm(eye + w.layer(k) * (1.0 / Ld)));
    }
    const double root_d = std::sqrt(static_cast<double>(d));
    const double inner = root_d - rec.measured_R_W / Ld;
    rec.lower_bound_defined = inner > 0.0;
    if (rec.lower_bound_defined) rec.lower_bound = Ld * std::log(inner);
    rec.approximation =
        Ld / 2.0 * std::log(static_cast<double>(d)) - rec.measured_R_W / root_d;
    return rec;
}

PropConstants prop_constants(const lipfun::ParamClassSpec& spec) {
    spec.validate();
    PropConstants c;
    c.output_bound = spec.R_X + spec.M * spec.R_Theta * std::exp(spec.K_f * spec.R_Theta);
    c.param_lipschitz = 2.0 * spec.M * spec.K_f * spec.R_Theta *
                        std::exp(2.0 * spec.K_f * spec.R_Theta);
    return c;
}

PropConstants prop_constants(const resnet::WeightClassSpec& spec) {
    spec.validate();
    PropConstants c;
    c.output_bound = spec.R_X * std::exp(spec.K_sigma * spec.R_W);
    c.param_lipschitz = spec.R_X / spec.R_W * std::exp(2.0 * spec.K_sigma * spec.R_W);
    return c;
}

// ---- spec parsing -----------------------------------------------------------

namespace {

double field_or(const nlohmann::json& j, const char* name, double fallback) {
    return j.contains(name) ? j.at(name).get<double>() : fallback;
}

double k_loss_field(const nlohmann::json& j, bool* defaulted) {
    if (j.contains("K_loss")) {
        if (defaulted) *defaulted = false;
        return j.at("K_loss").get<double>();
    }
    if (defaulted) *defaulted = true;
    return kSqrt2;
}

}  // namespace

lipfun::ParamClassSpec param_spec_from_json_string(const std::string& text,
                                                   bool* k_loss_defaulted) {
    const nlohmann::json j = nlohmann::json::parse(text);
    lipfun::ParamClassSpec spec;
    spec.m = static_cast<std::size_t>(j.at("m").get<double>());
    spec.R_Theta = j.at("R_Theta").get<double>();
    spec.K_Theta = field_or(j, "K_Theta", 0.0);
    spec.K_f = j.at("K_f").get<double>();
    spec.M = j.at("M").get<double>();
    spec.R_X = j.at("R_X").get<double>();
    spec.R_Y = j.at("R_Y").get<double>();
    spec.K_loss = k_loss_field(j, k_loss_defaulted);
    spec.validate();
    return spec;
}

resnet::WeightClassSpec weight_spec_from_json_string(const std::string& text,
                                                     bool* k_loss_defaulted) {
    const nlohmann::json j = nlohmann::json::parse(text);
    resnet::WeightClassSpec spec;
    spec.d = static_cast<std::size_t>(j.at("d").get<double>());
    spec.L = static_cast<std::size_t>(j.at("L").get<double>());
    spec.R_W = j.at("R_W").get<double>();
    spec.K_W = field_or(j, "K_W", 0.0);
    spec.K_sigma = j.at("K_sigma").get<double>();
    spec.R_X = j.at("R_X").get<double>();
    spec.R_Y = j.at("R_Y").get<double>();
    spec.K_loss = k_loss_field(j, k_loss_defaulted);
    spec.validate();
    return spec;
}

NeuralOdeSpec neural_spec_from_json_string(const std::string& text,
                                           bool* k_loss_defaulted) {
    const nlohmann::json j = nlohmann::json::parse(text);
    NeuralOdeSpec spec;
    spec.d = static_cast<std::size_t>(j.at("d").get<double>());
    spec.R_W = j.at("R_W").get<double>();
    spec.K_sigma = j.at("K_sigma").get<double>();
    spec.M = j.at("M").get<double>();
    spec.R_X = j.at("R_X").get<double>();
    spec.R_Y = j.at("R_Y").get<double>();
    spec.K_loss = k_loss_field(j, k_loss_defaulted);
    spec.validate();
    return spec;
}

}  // namespace odegen::certify
