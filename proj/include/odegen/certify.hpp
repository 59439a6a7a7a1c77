#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "odegen/lipfun.hpp"
#include "odegen/resnet.hpp"

namespace odegen::certify {

// Class constants of the time-independent neural ODE (single weight matrix).
struct NeuralOdeSpec {
    std::size_t d = 1;
    double R_W = 1.0;
    double K_sigma = 1.0;
    double M = 1.0;
    double R_X = 1.0;
    double R_Y = 1.0;
    double K_loss = 1.0;

    void validate() const;
};

struct Precondition {
    std::string name;
    bool satisfied = false;
    double measured = 0.0;
    double required = 0.0;
};

// A computed certificate: the constant B, the additive terms of the bound's
// right-hand side (without the empirical risk), and the precondition checks.
struct BoundReport {
    std::string bound_name;
    double B = 0.0;
    std::vector<std::pair<std::string, double>> terms;
    double total = 0.0;
    std::vector<Precondition> preconditions;
    std::vector<std::pair<std::string, double>> inputs_echo;
    std::vector<std::string> notes;

    bool valid() const;
    // JSON document with stable field names: bound_name, B, terms[], total,
    // preconditions[], inputs_echo (plus notes).
    std::string to_json_string(int indent = 2) const;
};

BoundReport bound_param_ode(const lipfun::ParamClassSpec& spec, std::uint64_t n,
                            double delta);

BoundReport bound_neural_ode(const NeuralOdeSpec& spec, std::uint64_t n, double delta);

BoundReport bound_resnet(const resnet::WeightClassSpec& spec, std::uint64_t n,
                         double delta);

// Margin-bound diagnostic computed from an explicit tensor. The universal
// constant is reported as 1, so the output is a shape-only comparison.
BoundReport bound_bartlett(const resnet::WeightTensor& w, double R_X, double gamma,
                           std::uint64_t n, double delta);

// Spec-level variant substituting the majorization A <= 2 R_W exp(R_W) sqrt(L).
BoundReport bound_bartlett(const resnet::WeightClassSpec& spec, double gamma,
                           std::uint64_t n, double delta);

// A(W) = (prod_k ||I + W_k/L||) * (sum_k ||W_k^T||_{2,1}^{2/3} /
//         (L^{2/3} ||I + W_k/L||^{2/3}))^{3/2}, accumulated in log domain.
double bartlett_capacity(const resnet::WeightTensor& w);

struct GolowichRecord {
    double log_product = 0.0;       // log prod_k ||I + W_k/L||_F
    double lower_bound = 0.0;       // L log(sqrt(d) - R_W/L), when defined
    bool lower_bound_defined = false;
    double approximation = 0.0;     // (L/2) log d - R_W / sqrt(d)
    double measured_R_W = 0.0;      // ||w||_{1,1,inf}
};

GolowichRecord golowich_product(const resnet::WeightTensor& w);

struct PropConstants {
    double output_bound = 0.0;
    double param_lipschitz = 0.0;
};

// Output bound R_X + M R exp(K_f R) and parameter-Lipschitz constant
// 2 M K_f R exp(2 K_f R) of the ODE class.
PropConstants prop_constants(const lipfun::ParamClassSpec& spec);
// Output bound R_X exp(K_sigma R_W) and Lipschitz constant
// (R_X / R_W) exp(2 K_sigma R_W) of the residual-network class.
PropConstants prop_constants(const resnet::WeightClassSpec& spec);

// Spec files mirror the struct field names. A missing K_loss defaults to
// sqrt(2), the Lipschitz bound of softmax cross-entropy in its logits.
lipfun::ParamClassSpec param_spec_from_json_string(const std::string& text,
                                                   bool* k_loss_defaulted = nullptr);
resnet::WeightClassSpec weight_spec_from_json_string(const std::string& text,
                                                     bool* k_loss_defaulted = nullptr);
NeuralOdeSpec neural_spec_from_json_string(const std::string& text,
                                           bool* k_loss_defaulted = nullptr);

}  // namespace odegen::certify
