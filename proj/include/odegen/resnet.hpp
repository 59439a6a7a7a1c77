#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "odegen/activation.hpp"
#include "odegen/numerics.hpp"

namespace odegen::resnet {

// Depth-indexed stack of d x d matrices. A weight-tied tensor stores one matrix
// that every layer index resolves to.
struct WeightTensor {
    static WeightTensor zeros(std::size_t L, std::size_t d);
    static WeightTensor tied(std::size_t L, Matrix shared);
    static WeightTensor from_layers(std::vector<Matrix> layers);

    std::size_t depth() const { return depth_; }
    std::size_t width() const { return width_; }
    bool weight_tied() const { return tied_; }

    const Matrix& layer(std::size_t k) const { return storage_[tied_ ? 0 : k]; }
    Matrix& mutable_layer(std::size_t k) { return storage_[tied_ ? 0 : k]; }
    // Distinct matrices actually stored (1 when tied, L otherwise).
    std::size_t storage_count() const { return storage_.size(); }
    Matrix& storage(std::size_t i) { return storage_[i]; }
    const Matrix& storage(std::size_t i) const { return storage_[i]; }

    // max_k norm_11(W_k)
    double norm_11_inf() const;

private:
    std::size_t depth_ = 0;
    std::size_t width_ = 0;
    bool tied_ = false;
    std::vector<Matrix> storage_;
};

WeightTensor operator+(const WeightTensor& a, const WeightTensor& b);
WeightTensor operator-(const WeightTensor& a, const WeightTensor& b);
WeightTensor operator*(const WeightTensor& w, double s);

// max_k norm_11(a_k - b_k); both tensors must share (L, d).
double distance_11_inf(const WeightTensor& a, const WeightTensor& b);

// Residual network with optional input/output projections. An empty projection
// matrix means identity (input and output live in dimension d).
struct ResNetModel {
    Matrix input_proj;      // d x p, empty = identity
    WeightTensor core;
    Matrix output_proj;     // q x d, empty = identity
    Activation activation = Activation::relu;
    bool train_projections = false;

    std::size_t input_dim() const {
        return input_proj.empty() ? core.width() : input_proj.cols;
    }
    std::size_t output_dim() const {
        return output_proj.empty() ? core.width() : output_proj.rows;
    }
    void validate() const;
};

struct WeightClassSpec {
    std::size_t d = 1;
    std::size_t L = 1;
    double R_W = 1.0;
    double K_W = 0.0;
    double K_sigma = 1.0;
    double R_X = 1.0;
    double R_Y = 1.0;
    double K_loss = 1.0;

    void validate() const;
};

struct ClassReport {
    bool norm_ok = false;
    bool lipschitz_ok = false;
    double norm_value = 0.0;        // ||W||_{1,1,inf}
    double norm_bound = 0.0;        // R_W
    double lipschitz_value = 0.0;   // L * sup_k ||W_{k+1} - W_k||_inf
    double lipschitz_bound = 0.0;   // K_W

    bool member() const { return norm_ok && lipschitz_ok; }
};

struct ForwardResult {
    std::vector<double> output;
    std::vector<std::vector<double>> trace;   // H_0 .. H_L
};

struct Gradients {
    std::vector<Matrix> layers;   // one per stored matrix (1 when tied)
    Matrix input_proj;            // empty when projection is identity
    Matrix output_proj;
};

enum class PenaltyKind { frob_l2, max_max, maxnorm_l2 };

PenaltyKind penalty_kind_from_name(const std::string& name);
std::string penalty_kind_name(PenaltyKind kind);

// H_{k+1} = H_k + (1/L) W_{k+1} sigma(H_k); output through the projections.
// Throws divergence_error (with the layer index) when the state leaves the
// finite range.
ForwardResult forward(const ResNetModel& model, std::span<const double> x);

// Same recursion without retaining the trace.
std::vector<double> forward_output(const ResNetModel& model, std::span<const double> x);

// Exact reverse-mode gradients of dot(output, upstream) w.r.t. every parameter.
// Requires the trace produced by forward for the same x.
Gradients backward(const ResNetModel& model, std::span<const double> x,
                   std::span<const double> upstream, const ForwardResult& fwd);

// Smooth-in-depth initialization: entry paths are GP samples with the RBF
// kernel, scaled by 1/sqrt(d).
WeightTensor smooth_init(std::size_t L, std::size_t d, double bandwidth,
                         std::uint64_t seed);

// i.i.d. Gaussian entries with variance scale^2 / d.
WeightTensor iid_init(std::size_t L, std::size_t d, double scale, std::uint64_t seed);

// sup_k ||W_{k+1} - W_k||_inf (0 for depth 1 or weight-tied tensors).
double weight_lipschitz(const WeightTensor& w);

double penalty(const WeightTensor& w, PenaltyKind kind);

// Subgradient of the penalty w.r.t. each stored layer. Ties in the max-based
// kinds resolve to the first maximizing index.
std::vector<Matrix> penalty_gradient(const WeightTensor& w, PenaltyKind kind);

ClassReport check_class(const WeightTensor& w, const WeightClassSpec& spec);

// Random class member: smooth_init rescaled so that ||W||_{1,1,inf} = R_W * u
// with u uniform in (0, 1].
WeightTensor random_member(const WeightClassSpec& spec, Rng& rng);

// Flat binary format: magic "ODRN", version, L, d (u32 little-endian), then
// L*d*d doubles, row-major per layer.
void save_weights(std::ostream& os, const WeightTensor& w);
WeightTensor load_weights(std::istream& is);
void save_weights_file(const std::string& path, const WeightTensor& w);
WeightTensor load_weights_file(const std::string& path);

}  // namespace odegen::resnet
