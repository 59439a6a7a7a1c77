#include "odegen/resnet.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "odegen/errors.hpp"

namespace odegen::resnet {

WeightTensor WeightTensor::zeros(std::size_t L, std::size_t d) {
    WeightTensor w;
    w.depth_ = L;
    w.width_ = d;
    w.tied_ = false;
    w.storage_.assign(L, Matrix(d, d));
    return w;
}

WeightTensor WeightTensor::tied(std::size_t L, Matrix shared) {
    if (shared.rows != shared.cols) throw std::invalid_argument("tied: matrix must be square");
    WeightTensor w;
    w.depth_ = L;
    w.width_ = shared.rows;
    w.tied_ = true;
    w.storage_.push_back(std::move(shared));
    return w;
}

WeightTensor WeightTensor::from_layers(std::vector<Matrix> layers) {
    if (layers.empty()) throw std::invalid_argument("from_layers: need at least one layer");
    const std::size_t d = layers.front().rows;
    for (const Matrix& m : layers) {
        if (m.rows != d || m.cols != d)
            throw std::invalid_argument("from_layers: layers must all be d x d");
    }
    WeightTensor w;
    w.depth_ = layers.size();
    w.width_ = d;
    w.tied_ = false;
    w.storage_ = std::move(layers);
    return w;
}

double WeightTensor::norm_11_inf() const {
    double best = 0.0;
    for (std::size_t k = 0; k < depth_; ++k) best = std::max(best, norm_11(layer(k)));
    return best;
}

namespace {

void require_same_shape(const WeightTensor& a, const WeightTensor& b) {
    if (a.depth() != b.depth() || a.width() != b.width())
        throw std::invalid_argument("weight tensor shape mismatch");
}

}  // namespace

WeightTensor operator+(const WeightTensor& a, const WeightTensor& b) {
    require_same_shape(a, b);
    std::vector<Matrix> layers;
    layers.reserve(a.depth());
    for (std::size_t k = 0; k < a.depth(); ++k) layers.push_back(a.layer(k) + b.layer(k));
    return WeightTensor::from_layers(std::move(layers));
}

WeightTensor operator-(const WeightTensor& a, const WeightTensor& b) {
    require_same_shape(a, b);
    std::vector<Matrix> layers;
    layers.reserve(a.depth());
    for (std::size_t k = 0; k < a.depth(); ++k) layers.push_back(a.layer(k) - b.layer(k));
    return WeightTensor::from_layers(std::move(layers));
}

WeightTensor operator*(const WeightTensor& w, double s) {
    std::vector<Matrix> layers;
    layers.reserve(w.depth());
    for (std::size_t k = 0; k < w.depth(); ++k) layers.push_back(w.layer(k) * s);
    WeightTensor out = WeightTensor::from_layers(std::move(layers));
    return out;
}

double distance_11_inf(const WeightTensor& a, const WeightTensor& b) {
    require_same_shape(a, b);
    double best = 0.0;
    for (std::size_t k = 0; k < a.depth(); ++k) {
        best = std::max(best, norm_11(a.layer(k) - b.layer(k)));
    }
    return best;
}

void ResNetModel::validate() const {
    const std::size_t d = core.width();
    if (core.depth() == 0 || d == 0) throw std::invalid_argument("model: empty core");
    if (!input_proj.empty() && input_proj.rows != d)
        throw std::invalid_argument("model: input projection must have d rows");
    if (!output_proj.empty() && output_proj.cols != d)
        throw std::invalid_argument("model: output projection must have d columns");
}

void WeightClassSpec::validate() const {
    if (d == 0 || L == 0) throw std::invalid_argument("WeightClassSpec: d, L must be >= 1");
    if (!(R_W > 0.0)) throw std::invalid_argument("WeightClassSpec: R_W must be positive");
    if (K_W < 0.0) throw std::invalid_argument("WeightClassSpec: K_W must be >= 0");
    if (!(K_sigma > 0.0)) throw std::invalid_argument("WeightClassSpec: K_sigma must be positive");
    if (!(R_X > 0.0) || !(R_Y > 0.0) || !(K_loss > 0.0))
        throw std::invalid_argument("WeightClassSpec: R_X, R_Y, K_loss must be positive");
}

PenaltyKind penalty_kind_from_name(const std::string& name) {
    if (name == "frob_l2") return PenaltyKind::frob_l2;
    if (name == "max_max") return PenaltyKind::max_max;
    if (name == "maxnorm_l2") return PenaltyKind::maxnorm_l2;
    throw std::invalid_argument("unknown penalty kind: " + name);
}

std::string penalty_kind_name(PenaltyKind kind) {
    switch (kind) {
        case PenaltyKind::frob_l2: return "frob_l2";
        case PenaltyKind::max_max: return "max_max";
        case PenaltyKind::maxnorm_l2: return "maxnorm_l2";
    }
    return "frob_l2";
}

namespace {

void check_finite_state(const std::vector<double>& h, std::size_t layer_index) {
    for (double v : h) {
        if (!std::isfinite(v)) {
            throw divergence_error("non-finite residual state", layer_index);
        }
    }
}

}  // namespace

ForwardResult forward(const ResNetModel& model, std::span<const double> x) {
    model.validate();
    if (x.size() != model.input_dim())
        throw std::invalid_argument("forward: input length mismatch");

    const std::size_t L = model.core.depth();
    const std::size_t d = model.core.width();
    const double step = 1.0 / static_cast<double>(L);

    ForwardResult result;
    result.trace.reserve(L + 1);

    std::vector<double> h = model.input_proj.empty()
                                ? std::vector<double>(x.begin(), x.end())
                                : matvec(model.input_proj, x);
    check_finite_state(h, 0);
    result.trace.push_back(h);

    std::vector<double> s(d);
    for (std::size_t k = 0; k < L; ++k) {
        for (std::size_t i = 0; i < d; ++i) s[i] = activate(model.activation, h[i]);
        const std::vector<double> acc = matvec(model.core.layer(k), s);
        for (std::size_t i = 0; i < d; ++i) h[i] += step * acc[i];
        check_finite_state(h, k + 1);
        result.trace.push_back(h);
    }

    result.output = model.output_proj.empty() ? h : matvec(model.output_proj, h);
    return result;
}

std::vector<double> forward_output(const ResNetModel& model, std::span<const double> x) {
    model.validate();
    if (x.size() != model.input_dim())
        throw std::invalid_argument("forward: input length mismatch");

    const std::size_t L = model.core.depth();
    const std::size_t d = model.core.width();
    const double step = 1.0 / static_cast<double>(L);

    std::vector<double> h = model.input_proj.empty()
                                ? std::vector<double>(x.begin(), x.end())
                                : matvec(model.input_proj, x);
    check_finite_state(h, 0);

    std::vector<double> s(d);
    for (std::size_t k = 0; k < L; ++k) {
        for (std::size_t i = 0; i < d; ++i) s[i] = activate(model.activation, h[i]);
        const std::vector<double> acc = matvec(model.core.layer(k), s);
        for (std::size_t i = 0; i < d; ++i) h[i] += step * acc[i];
        check_finite_state(h, k + 1);
    }
    return model.output_proj.empty() ? h : matvec(model.output_proj, h);
}

Gradients backward(const ResNetModel& model, std::span<const double> x,
                   std::span<const double> upstream, const ForwardResult& fwd) {
    model.validate();
    const std::size_t L = model.core.depth();
    const std::size_t d = model.core.width();
    if (fwd.trace.size() != L + 1)
        throw std::logic_error("backward: forward trace missing or of wrong depth");
    if (upstream.size() != model.output_dim())
        throw std::invalid_argument("backward: upstream length mismatch");
    if (x.size() != model.input_dim())
        throw std::invalid_argument("backward: input length mismatch");

    const double step = 1.0 / static_cast<double>(L);

    Gradients grads;
    grads.layers.assign(model.core.storage_count(), Matrix(d, d));
    if (!model.output_proj.empty()) {
        grads.output_proj = Matrix(model.output_proj.rows, model.output_proj.cols);
        add_outer(grads.output_proj, 1.0, upstream, fwd.trace.back());
    }

    std::vector<double> g = model.output_proj.empty()
                                ? std::vector<double>(upstream.begin(), upstream.end())
                                : matvec_transposed(model.output_proj, upstream);

    std::vector<double> s(d);
    for (std::size_t k = L; k-- > 0;) {
        const std::vector<double>& hk = fwd.trace[k];
        for (std::size_t i = 0; i < d; ++i) s[i] = activate(model.activation, hk[i]);
        Matrix& gw = grads.layers[model.core.weight_tied() ? 0 : k];
        add_outer(gw, step, g, s);
        const std::vector<double> wt_g = matvec_transposed(model.core.layer(k), g);
        for (std::size_t i = 0; i < d; ++i) {
            g[i] += step * activate_grad(model.activation, hk[i]) * wt_g[i];
        }
    }

    if (!model.input_proj.empty()) {
        grads.input_proj = Matrix(model.input_proj.rows, model.input_proj.cols);
        add_outer(grads.input_proj, 1.0, g, x);
    }
    return grads;
}

WeightTensor smooth_init(std::size_t L, std::size_t d, double bandwidth,
                         std::uint64_t seed) {
    if (L < 1 || d < 1) throw std::invalid_argument("smooth_init: L, d must be >= 1");
    GpSampler sampler(L, bandwidth, 1e-8);
    Rng rng(seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    std::vector<Matrix> layers(L, Matrix(d, d));
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const std::vector<double> path = sampler.sample(rng);
            for (std::size_t k = 0; k < L; ++k) layers[k](i, j) = scale * path[k];
        }
    }
    return WeightTensor::from_layers(std::move(layers));
}

WeightTensor iid_init(std::size_t L, std::size_t d, double scale, std::uint64_t seed) {
    if (L < 1 || d < 1) throw std::invalid_argument("iid_init: L, d must be >= 1");
    Rng rng(seed);
    const double sd = scale / std::sqrt(static_cast<double>(d));
    std::vector<Matrix> layers(L, Matrix(d, d));
    for (std::size_t k = 0; k < L; ++k) {
        for (double& v : layers[k].data) v = sd * rng.gaussian();
    }
    return WeightTensor::from_layers(std::move(layers));
}

double weight_lipschitz(const WeightTensor& w) {
    if (w.weight_tied() || w.depth() < 2) return 0.0;
    double best = 0.0;
    for (std::size_t k = 0; k + 1 < w.depth(); ++k) {
        best = std::max(best, norm_max(w.layer(k + 1) - w.layer(k)));
    }
    return best;
}

double penalty(const WeightTensor& w, PenaltyKind kind) {
    if (w.weight_tied() || w.depth() < 2) return 0.0;
    switch (kind) {
        case PenaltyKind::frob_l2: {
            double acc = 0.0;
            for (std::size_t k = 0; k + 1 < w.depth(); ++k) {
                const double f = frobenius_norm(w.layer(k + 1) - w.layer(k));
                acc += f * f;
            }
            return std::sqrt(acc);
        }
        case PenaltyKind::max_max:
            return weight_lipschitz(w);
        case PenaltyKind::maxnorm_l2: {
            double acc = 0.0;
            for (std::size_t k = 0; k + 1 < w.depth(); ++k) {
                const double f = norm_max(w.layer(k + 1) - w.layer(k));
                acc += f * f;
            }
            return std::sqrt(acc);
        }
    }
    return 0.0;
}

namespace {

// First maximizing entry of |m| in scan order.
std::pair<std::size_t, std::size_t> argmax_abs(const Matrix& m) {
    std::size_t bi = 0;
    std::size_t bj = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = 0; j < m.cols; ++j) {
            const double v = std::abs(m(i, j));
            if (v > best) {
                best = v;
                bi = i;
                bj = j;
            }
        }
    }
    return {bi, bj};
}

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

std::vector<Matrix> penalty_gradient(const WeightTensor& w, PenaltyKind kind) {
    const std::size_t d = w.width();
    std::vector<Matrix> grads(w.storage_count(), Matrix(d, d));
    if (w.weight_tied() || w.depth() < 2) return grads;

    const std::size_t diff_count = w.depth() - 1;
    switch (kind) {
        case PenaltyKind::frob_l2: {
            const double p = penalty(w, kind);
            if (p == 0.0) return grads;
            for (std::size_t k = 0; k < diff_count; ++k) {
                const Matrix diff = w.layer(k + 1) - w.layer(k);
                for (std::size_t e = 0; e < diff.data.size(); ++e) {
                    grads[k + 1].data[e] += diff.data[e] / p;
                    grads[k].data[e] -= diff.data[e] / p;
                }
            }
            return grads;
        }
        case PenaltyKind::max_max: {
            double best = -1.0;
            std::size_t best_k = 0;
            std::pair<std::size_t, std::size_t> best_ij{0, 0};
            for (std::size_t k = 0; k < diff_count; ++k) {
                const Matrix diff = w.layer(k + 1) - w.layer(k);
                const auto ij = argmax_abs(diff);
                const double v = std::abs(diff(ij.first, ij.second));
                if (v > best) {
                    best = v;
                    best_k = k;
                    best_ij = ij;
                }
            }
            if (best <= 0.0) return grads;
            const double s =
                sign_of(w.layer(best_k + 1)(best_ij.first, best_ij.second) -
                        w.layer(best_k)(best_ij.first, best_ij.second));
            grads[best_k + 1](best_ij.first, best_ij.second) += s;
            grads[best_k](best_ij.first, best_ij.second) -= s;
            return grads;
        }
        case PenaltyKind::maxnorm_l2: {
            const double p = penalty(w, kind);
            if (p == 0.0) return grads;
            for (std::size_t k = 0; k < diff_count; ++k) {
                const Matrix diff = w.layer(k + 1) - w.layer(k);
                const auto ij = argmax_abs(diff);
                const double mk = std::abs(diff(ij.first, ij.second));
                if (mk == 0.0) continue;
                const double s = sign_of(diff(ij.first, ij.second)) * mk / p;
                grads[k + 1](ij.first, ij.second) += s;
                grads[k](ij.first, ij.second) -= s;
            }
            return grads;
        }
    }
    return grads;
}

ClassReport check_class(const WeightTensor& w, const WeightClassSpec& spec) {
    if (w.depth() != spec.L || w.width() != spec.d)
        throw std::invalid_argument("check_class: shape mismatch with spec");
    constexpr double slack = 1e-12;
    ClassReport r;
    r.norm_value = w.norm_11_inf();
    r.norm_bound = spec.R_W;
    r.norm_ok = r.norm_value <= spec.R_W + slack;
    r.lipschitz_value = weight_lipschitz(w) * static_cast<double>(spec.L);
    r.lipschitz_bound = spec.K_W;
    r.lipschitz_ok = r.lipschitz_value <= spec.K_W + slack;
    return r;
}

WeightTensor random_member(const WeightClassSpec& spec, Rng& rng) {
    WeightTensor w = smooth_init(spec.L, spec.d, 0.1, rng.next_u64());
    const double norm = w.norm_11_inf();
    const double u = 1.0 - rng.uniform();   // (0, 1]
    if (norm > 0.0) {
        const double scale = spec.R_W * u / norm;
        for (std::size_t i = 0; i < w.storage_count(); ++i) w.storage(i) *= scale;
    }
    return w;
}

// ---- binary serialization ---------------------------------------------------

namespace {

constexpr char kMagic[4] = {'O', 'D', 'R', 'N'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& os, std::uint32_t v) {
    char buf[4];
    buf[0] = static_cast<char>(v & 0xff);
    buf[1] = static_cast<char>((v >> 8) & 0xff);
    buf[2] = static_cast<char>((v >> 16) & 0xff);
    buf[3] = static_cast<char>((v >> 24) & 0xff);
    os.write(buf, 4);
}

std::uint32_t read_u32(std::istream& is, std::size_t offset) {
    unsigned char buf[4];
    if (!is.read(reinterpret_cast<char*>(buf), 4)) {
        throw format_error("truncated weight file", offset);
    }
    return static_cast<std::uint32_t>(buf[0]) | (static_cast<std::uint32_t>(buf[1]) << 8) |
           (static_cast<std::uint32_t>(buf[2]) << 16) |
           (static_cast<std::uint32_t>(buf[3]) << 24);
}

void write_f64(std::ostream& os, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    char buf[8];
    for (int b = 0; b < 8; ++b) buf[b] = static_cast<char>((bits >> (8 * b)) & 0xff);
    os.write(buf, 8);
}

double read_f64(std::istream& is, std::size_t offset) {
    unsigned char buf[8];
    if (!is.read(reinterpret_cast<char*>(buf), 8)) {
        throw format_error("truncated weight payload", offset);
    }
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(buf[b]) << (8 * b);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

}  // namespace

void save_weights(std::ostream& os, const WeightTensor& w) {
    os.write(kMagic, 4);
    write_u32(os, kVersion);
    write_u32(os, static_cast<std::uint32_t>(w.depth()));
    write_u32(os, static_cast<std::uint32_t>(w.width()));
    for (std::size_t k = 0; k < w.depth(); ++k) {
        for (double v : w.layer(k).data) write_f64(os, v);
    }
}

WeightTensor load_weights(std::istream& is) {
    char magic[4];
    if (!is.read(magic, 4)) throw format_error("truncated weight file", 0);
    if (std::memcmp(magic, kMagic, 4) != 0) {
        throw format_error(
            "bad magic: expected 'ODRN', found '" + std::string(magic, 4) + "'", 0);
    }
    const std::uint32_t version = read_u32(is, 4);
    if (version != kVersion) {
        throw format_error("unsupported weight file version " + std::to_string(version), 4);
    }
    const std::uint32_t L = read_u32(is, 8);
    const std::uint32_t d = read_u32(is, 12);
    if (L == 0 || d == 0 || d > 100000u) {
        throw format_error("implausible weight file shape", 8);
    }
    std::vector<Matrix> layers(L, Matrix(d, d));
    std::size_t offset = 16;
    for (std::uint32_t k = 0; k < L; ++k) {
        for (double& v : layers[k].data) {
            v = read_f64(is, offset);
            offset += 8;
        }
    }
    return WeightTensor::from_layers(std::move(layers));
}

void save_weights_file(const std::string& path, const WeightTensor& w) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    save_weights(os, w);
}

WeightTensor load_weights_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    return load_weights(is);
}

}  // namespace odegen::resnet
