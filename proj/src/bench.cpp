#include "odegen/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "odegen/errors.hpp"

namespace odegen::bench {

void Dataset::validate() const {
    if (inputs.size() != labels.size())
        throw std::invalid_argument("dataset: inputs/labels length mismatch");
    if (inputs.empty()) throw std::invalid_argument("dataset: empty");
    const std::size_t d = inputs.front().size();
    for (const auto& row : inputs) {
        if (row.size() != d) throw std::invalid_argument("dataset: ragged inputs");
    }
    for (int label : labels) {
        if (label < 0 || static_cast<std::size_t>(label) >= num_classes)
            throw std::invalid_argument("dataset: label out of range");
    }
}

// ---- IDX parsing ------------------------------------------------------------

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::uint32_t read_u32_be(std::istream& is, std::size_t offset, const char* what) {
    unsigned char buf[4];
    if (!is.read(reinterpret_cast<char*>(buf), 4)) {
        throw format_error(std::string("truncated file while reading ") + what, offset);
    }
    return (static_cast<std::uint32_t>(buf[0]) << 24) |
           (static_cast<std::uint32_t>(buf[1]) << 16) |
           (static_cast<std::uint32_t>(buf[2]) << 8) | static_cast<std::uint32_t>(buf[3]);
}

std::string hex32(std::uint32_t v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "0x%08x", v);
    return buf;
}

}  // namespace

Dataset load_mnist(const std::string& images_path, const std::string& labels_path) {
    std::ifstream images(images_path, std::ios::binary);
    if (!images) throw std::runtime_error("cannot open " + images_path);
    std::ifstream labels(labels_path, std::ios::binary);
    if (!labels) throw std::runtime_error("cannot open " + labels_path);

    const std::uint32_t images_magic = read_u32_be(images, 0, "images magic");
    if (images_magic != kImagesMagic) {
        throw format_error("images file: expected magic " + hex32(kImagesMagic) +
                               ", found " + hex32(images_magic),
                           0);
    }
    const std::uint32_t image_count = read_u32_be(images, 4, "image count");
    const std::uint32_t rows = read_u32_be(images, 8, "row count");
    const std::uint32_t cols = read_u32_be(images, 12, "column count");

    const std::uint32_t labels_magic = read_u32_be(labels, 0, "labels magic");
    if (labels_magic != kLabelsMagic) {
        throw format_error("labels file: expected magic " + hex32(kLabelsMagic) +
                               ", found " + hex32(labels_magic),
                           0);
    }
    const std::uint32_t label_count = read_u32_be(labels, 4, "label count");
    if (label_count != image_count) {
        throw format_error("image count " + std::to_string(image_count) +
                               " != label count " + std::to_string(label_count),
                           4);
    }

    const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
    Dataset data;
    data.inputs.resize(image_count, std::vector<double>(pixels));
    data.labels.resize(image_count);

    std::vector<unsigned char> buf(pixels);
    std::size_t offset = 16;
    for (std::uint32_t i = 0; i < image_count; ++i) {
        if (!images.read(reinterpret_cast<char*>(buf.data()), pixels)) {
            const std::size_t got = static_cast<std::size_t>(images.gcount());
            throw format_error("truncated image payload", offset + got);
        }
        for (std::size_t p = 0; p < pixels; ++p) {
            data.inputs[i][p] = static_cast<double>(buf[p]) / 255.0;
        }
        offset += pixels;
    }

    offset = 8;
    int max_label = 0;
    for (std::uint32_t i = 0; i < label_count; ++i) {
        char c;
        if (!labels.read(&c, 1)) throw format_error("truncated label payload", offset);
        data.labels[i] = static_cast<unsigned char>(c);
        max_label = std::max(max_label, data.labels[i]);
        offset += 1;
    }

    data.num_classes = static_cast<std::size_t>(std::max(max_label + 1, 10));
    data.name = "mnist";
    data.validate();
    return data;
}

Dataset synth_dataset(std::size_t classes, std::size_t per_class, std::size_t dim,
                      double separation, std::uint64_t seed) {
    if (classes < 1 || per_class < 1 || dim < 1)
        throw std::invalid_argument("synth_dataset: counts must be >= 1");
    if (classes > dim)
        throw std::invalid_argument("synth_dataset: simplex means need classes <= dim");

    Rng rng(seed);
    Dataset data;
    data.num_classes = classes;
    data.name = "synth";
    data.inputs.reserve(classes * per_class);
    data.labels.reserve(classes * per_class);
    for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t i = 0; i < per_class; ++i) {
            std::vector<double> x(dim);
            for (double& v : x) v = rng.gaussian();
            x[c] += separation;
            data.inputs.push_back(std::move(x));
            data.labels.push_back(static_cast<int>(c));
        }
    }
    data.validate();
    return data;
}

// ---- loss -------------------------------------------------------------------

namespace {

double cross_entropy_from_logits(std::span<const double> logits, int label) {
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    double lse = 0.0;
    for (double v : logits) lse += std::exp(v - mx);
    return mx + std::log(lse) - logits[static_cast<std::size_t>(label)];
}

std::vector<double> softmax_minus_onehot(std::span<const double> logits, int label) {
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    std::vector<double> g(logits.size());
    double z = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        g[i] = std::exp(logits[i] - mx);
        z += g[i];
    }
    for (double& v : g) v /= z;
    g[static_cast<std::size_t>(label)] -= 1.0;
    return g;
}

}  // namespace

double mean_cross_entropy(const resnet::ResNetModel& model, const Dataset& data) {
    double acc = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const std::vector<double> logits = resnet::forward_output(model, data.inputs[i]);
        acc += cross_entropy_from_logits(logits, data.labels[i]);
    }
    return acc / static_cast<double>(data.size());
}

double generalization_gap(const resnet::ResNetModel& model, const Dataset& train_data,
                          const Dataset& test_data) {
    return mean_cross_entropy(model, test_data) - mean_cross_entropy(model, train_data);
}

BatchGradient batch_gradient(const resnet::ResNetModel& model, const Dataset& data,
                             std::span<const std::size_t> indices, double lambda,
                             resnet::PenaltyKind kind) {
    if (indices.empty()) throw std::invalid_argument("batch_gradient: empty batch");
    const std::size_t d = model.core.width();

    BatchGradient out;
    out.grads.layers.assign(model.core.storage_count(), Matrix(d, d));
    if (!model.input_proj.empty())
        out.grads.input_proj = Matrix(model.input_proj.rows, model.input_proj.cols);
    if (!model.output_proj.empty())
        out.grads.output_proj = Matrix(model.output_proj.rows, model.output_proj.cols);

    for (std::size_t idx : indices) {
        const std::vector<double>& x = data.inputs[idx];
        const resnet::ForwardResult fwd = resnet::forward(model, x);
        out.mean_loss += cross_entropy_from_logits(fwd.output, data.labels[idx]);
        const std::vector<double> upstream =
            softmax_minus_onehot(fwd.output, data.labels[idx]);
        const resnet::Gradients g = resnet::backward(model, x, upstream, fwd);
        for (std::size_t s = 0; s < out.grads.layers.size(); ++s) {
            out.grads.layers[s] += g.layers[s];
        }
        if (!out.grads.input_proj.empty()) out.grads.input_proj += g.input_proj;
        if (!out.grads.output_proj.empty()) out.grads.output_proj += g.output_proj;
    }

    const double inv = 1.0 / static_cast<double>(indices.size());
    for (Matrix& m : out.grads.layers) m *= inv;
    if (!out.grads.input_proj.empty()) out.grads.input_proj *= inv;
    if (!out.grads.output_proj.empty()) out.grads.output_proj *= inv;
    out.mean_loss *= inv;

    if (std::isfinite(lambda) && lambda > 0.0) {
        const std::vector<Matrix> pg = resnet::penalty_gradient(model.core, kind);
        for (std::size_t s = 0; s < out.grads.layers.size(); ++s) {
            for (std::size_t e = 0; e < pg[s].data.size(); ++e) {
                out.grads.layers[s].data[e] += lambda * pg[s].data[e];
            }
        }
    }
    return out;
}

// ---- Adam -------------------------------------------------------------------

void AdamState::update(std::vector<double>& param, const std::vector<double>& grad,
                       const TrainConfig& cfg, std::size_t t) {
    const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < param.size(); ++i) {
        m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * grad[i];
        v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * grad[i] * grad[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        param[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_eps);
    }
}

TrainResult train(resnet::ResNetModel model, const Dataset& train_data,
                  const TrainConfig& cfg, const Dataset* test_data) {
    model.validate();
    train_data.validate();
    if (cfg.epochs < 1 || cfg.batch_size < 1)
        throw std::invalid_argument("train: epochs and batch_size must be >= 1");
    if (cfg.lambda < 0.0) throw std::invalid_argument("train: lambda must be >= 0");
    if (model.input_dim() != train_data.dim())
        throw std::invalid_argument("train: model input dim != data dim");
    if (model.output_dim() != train_data.num_classes)
        throw std::invalid_argument("train: model output dim != class count");
    if (!std::isfinite(cfg.lambda) && !model.core.weight_tied())
        throw std::invalid_argument("train: lambda = infinity requires a weight-tied core");

    Rng shuffle_rng(cfg.seed);

    std::vector<AdamState> layer_states;
    layer_states.reserve(model.core.storage_count());
    const std::size_t d = model.core.width();
    for (std::size_t s = 0; s < model.core.storage_count(); ++s) {
        layer_states.emplace_back(d * d);
    }
    AdamState input_state(model.input_proj.data.size());
    AdamState output_state(model.output_proj.data.size());

    std::vector<std::size_t> order(train_data.size());
    std::iota(order.begin(), order.end(), 0);

    TrainResult result;
    std::size_t step = 0;
    const auto run_start = std::chrono::steady_clock::now();

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        // Fisher-Yates driven by the dedicated shuffle stream.
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[shuffle_rng.index(i)]);
        }

        for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
            const std::size_t end = std::min(begin + cfg.batch_size, order.size());
            const std::span<const std::size_t> batch(order.data() + begin, end - begin);
            BatchGradient bg =
                batch_gradient(model, train_data, batch, cfg.lambda, cfg.penalty_kind);
            if (!std::isfinite(bg.mean_loss)) {
                throw divergence_error("non-finite loss at epoch " + std::to_string(epoch) +
                                           ", batch " + std::to_string(begin / cfg.batch_size),
                                       step);
            }
            ++step;
            for (std::size_t s = 0; s < model.core.storage_count(); ++s) {
                layer_states[s].update(model.core.storage(s).data, bg.grads.layers[s].data,
                                       cfg, step);
            }
            if (cfg.train_projections) {
                if (!model.input_proj.empty()) {
                    input_state.update(model.input_proj.data, bg.grads.input_proj.data,
                                       cfg, step);
                }
                if (!model.output_proj.empty()) {
                    output_state.update(model.output_proj.data, bg.grads.output_proj.data,
                                        cfg, step);
                }
            }
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = mean_cross_entropy(model, train_data);
        rec.test_loss = test_data ? mean_cross_entropy(model, *test_data) : 0.0;
        rec.gap = test_data ? rec.test_loss - rec.train_loss : 0.0;
        rec.weight_lipschitz = resnet::weight_lipschitz(model.core);
        rec.penalty_value = resnet::penalty(model.core, cfg.penalty_kind);
        rec.wall_time_sec =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - run_start)
                .count();
        result.record.epochs.push_back(rec);

        if (cfg.epoch_callback) cfg.epoch_callback(epoch, model);
    }

    result.model = std::move(model);
    return result;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("pearson: need two equal-length samples");
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

// ---- experiment harness -----------------------------------------------------

ExperimentProfile ExperimentProfile::desk() { return ExperimentProfile{}; }

ExperimentProfile ExperimentProfile::paper() {
    ExperimentProfile p;
    p.name = "paper";
    p.d = 30;
    p.L = 1000;
    p.train_samples = 60000;
    p.test_samples = 10000;
    p.epochs = 30;
    p.runs = 10;
    return p;
}

namespace {

bool mnist_files_present(const std::string& dir) {
    namespace fs = std::filesystem;
    return fs::exists(fs::path(dir) / "train-images-idx3-ubyte") &&
           fs::exists(fs::path(dir) / "train-labels-idx1-ubyte") &&
           fs::exists(fs::path(dir) / "t10k-images-idx3-ubyte") &&
           fs::exists(fs::path(dir) / "t10k-labels-idx1-ubyte");
}

Dataset truncate(Dataset data, std::size_t n, Split split) {
    if (data.size() > n) {
        data.inputs.resize(n);
        data.labels.resize(n);
    }
    data.split = split;
    return data;
}

constexpr std::size_t kSynthDim = 64;
constexpr double kSynthSeparation = 2.0;

}  // namespace

std::pair<Dataset, Dataset> resolve_dataset(const ExperimentProfile& profile) {
    const bool want_mnist =
        profile.dataset == "mnist" ||
        (profile.dataset == "auto" && !profile.data_dir.empty() &&
         mnist_files_present(profile.data_dir));
    if (want_mnist) {
        namespace fs = std::filesystem;
        const fs::path dir(profile.data_dir);
        Dataset train_full = load_mnist((dir / "train-images-idx3-ubyte").string(),
                                        (dir / "train-labels-idx1-ubyte").string());
        Dataset test_full = load_mnist((dir / "t10k-images-idx3-ubyte").string(),
                                       (dir / "t10k-labels-idx1-ubyte").string());
        return {truncate(std::move(train_full), profile.train_samples, Split::train),
                truncate(std::move(test_full), profile.test_samples, Split::test)};
    }
    const std::size_t classes = 10;
    Dataset train_data = synth_dataset(classes, profile.train_samples / classes, kSynthDim,
                                       kSynthSeparation, profile.seed * 7919 + 11);
    Dataset test_data = synth_dataset(classes, profile.test_samples / classes, kSynthDim,
                                      kSynthSeparation, profile.seed * 7919 + 7777);
    train_data.split = Split::train;
    test_data.split = Split::test;
    return {train_data, test_data};
}

resnet::ResNetModel make_model(const ExperimentProfile& profile, std::size_t input_dim,
                               std::size_t classes, bool train_projections,
                               bool weight_tied, std::uint64_t seed) {
    Rng master(seed);
    resnet::ResNetModel model;
    if (weight_tied) {
        Matrix shared(profile.d, profile.d);
        const double scale = 1.0 / std::sqrt(static_cast<double>(profile.d));
        Rng core_rng(master.next_u64());
        for (double& v : shared.data) v = scale * core_rng.gaussian();
        model.core = resnet::WeightTensor::tied(profile.L, std::move(shared));
    } else {
        model.core =
            resnet::smooth_init(profile.L, profile.d, profile.gp_bandwidth, master.next_u64());
    }
    model.input_proj = Matrix(profile.d, input_dim);
    const double sd_in = 1.0 / std::sqrt(static_cast<double>(input_dim));
    for (double& v : model.input_proj.data) v = sd_in * master.gaussian();
    model.output_proj = Matrix(classes, profile.d);
    const double sd_out = 1.0 / std::sqrt(static_cast<double>(profile.d));
    for (double& v : model.output_proj.data) v = sd_out * master.gaussian();
    model.activation = Activation::relu;
    model.train_projections = train_projections;
    return model;
}

namespace {

void parallel_tasks(std::size_t count, std::size_t jobs,
                    const std::function<void(std::size_t)>& task) {
    jobs = std::max<std::size_t>(1, std::min(jobs, count));
    if (jobs == 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (std::size_t w = 0; w < jobs; ++w) {
        workers.emplace_back([&]() {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    task(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (std::thread& t : workers) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

TrainConfig profile_config(const ExperimentProfile& profile) {
    TrainConfig cfg;
    cfg.epochs = profile.epochs;
    cfg.batch_size = profile.batch_size;
    cfg.learning_rate = profile.learning_rate;
    return cfg;
}

std::function<void(std::size_t, const resnet::ResNetModel&)> checkpoint_hook(
    const ExperimentProfile& profile, const std::string& tag) {
    if (profile.checkpoint_dir.empty()) return {};
    const std::string dir = profile.checkpoint_dir;
    return [dir, tag](std::size_t epoch, const resnet::ResNetModel& model) {
        namespace fs = std::filesystem;
        fs::create_directories(dir);
        const std::string path =
            (fs::path(dir) / (tag + "_epoch" + std::to_string(epoch) + ".odrn")).string();
        const std::string tmp = path + ".tmp";
        resnet::save_weights_file(tmp, model.core);
        fs::rename(tmp, path);
    };
}

}  // namespace

Fig1Result run_fig1(const ExperimentProfile& profile) {
    if (profile.epochs < 1 || profile.runs < 1)
        throw std::invalid_argument("run_fig1: need at least one epoch and one run");
    const auto [train_data, test_data] = resolve_dataset(profile);

    struct Task {
        std::size_t run;
        bool projections_trained;
    };
    std::vector<Task> tasks;
    for (bool trained : {true, false}) {
        for (std::size_t r = 0; r < profile.runs; ++r) tasks.push_back({r, trained});
    }

    std::vector<std::vector<Fig1Row>> slots(tasks.size());
    parallel_tasks(tasks.size(), profile.jobs, [&](std::size_t i) {
        const Task& task = tasks[i];
        const std::uint64_t seed =
            profile.seed + 1000 * static_cast<std::uint64_t>(task.projections_trained) +
            task.run;
        resnet::ResNetModel model =
            make_model(profile, train_data.dim(), train_data.num_classes,
                       task.projections_trained, false, seed);
        TrainConfig cfg = profile_config(profile);
        cfg.train_projections = task.projections_trained;
        cfg.seed = seed;
        cfg.epoch_callback = checkpoint_hook(
            profile, std::string("fig1_") +
                         (task.projections_trained ? "trained" : "frozen") + "_run" +
                         std::to_string(task.run));
        const TrainResult result = train(std::move(model), train_data, cfg, &test_data);
        for (const EpochRecord& rec : result.record.epochs) {
            slots[i].push_back(Fig1Row{task.run, rec.epoch, rec.weight_lipschitz, rec.gap,
                                       task.projections_trained});
        }
    });

    Fig1Result out;
    for (const auto& rows : slots) out.rows.insert(out.rows.end(), rows.begin(), rows.end());

    std::vector<double> wl_all;
    std::vector<double> gap_all;
    std::vector<double> wl_t;
    std::vector<double> gap_t;
    std::vector<double> wl_f;
    std::vector<double> gap_f;
    for (const Fig1Row& row : out.rows) {
        wl_all.push_back(row.weight_lipschitz);
        gap_all.push_back(row.gap);
        if (row.projections_trained) {
            wl_t.push_back(row.weight_lipschitz);
            gap_t.push_back(row.gap);
        } else {
            wl_f.push_back(row.weight_lipschitz);
            gap_f.push_back(row.gap);
        }
    }
    out.pearson_all = pearson(wl_all, gap_all);
    out.pearson_trained = wl_t.size() > 1 ? pearson(wl_t, gap_t) : 0.0;
    out.pearson_frozen = wl_f.size() > 1 ? pearson(wl_f, gap_f) : 0.0;
    return out;
}

Fig2Result run_fig2(const ExperimentProfile& profile, const std::vector<double>& lambdas) {
    if (lambdas.empty()) throw std::invalid_argument("run_fig2: empty lambda grid");
    if (profile.epochs < 1 || profile.runs < 1)
        throw std::invalid_argument("run_fig2: need at least one epoch and one repeat");
    const auto [train_data, test_data] = resolve_dataset(profile);

    struct Task {
        double lambda;
        std::size_t repeat;
    };
    std::vector<Task> tasks;
    for (double lambda : lambdas) {
        for (std::size_t r = 0; r < profile.runs; ++r) tasks.push_back({lambda, r});
    }

    std::vector<Fig2Row> slots(tasks.size());
    parallel_tasks(tasks.size(), profile.jobs, [&](std::size_t i) {
        const Task& task = tasks[i];
        const bool tied = !std::isfinite(task.lambda);
        // Same seed across the lambda grid for a given repeat: identical data
        // order and initialization, so only the penalty differs.
        const std::uint64_t seed = profile.seed + task.repeat;
        resnet::ResNetModel model = make_model(profile, train_data.dim(),
                                               train_data.num_classes, false, tied, seed);
        TrainConfig cfg = profile_config(profile);
        cfg.train_projections = false;
        cfg.lambda = tied ? INFINITY : task.lambda;
        cfg.seed = seed;
        std::ostringstream tag;
        tag << "fig2_lambda";
        if (tied) {
            tag << "inf";
        } else {
            tag << task.lambda;
        }
        tag << "_rep" << task.repeat;
        cfg.epoch_callback = checkpoint_hook(profile, tag.str());
        const TrainResult result = train(std::move(model), train_data, cfg, &test_data);
        slots[i] = Fig2Row{task.lambda, task.repeat, result.record.final_epoch().gap};
    });

    Fig2Result out;
    out.rows = std::move(slots);
    for (double lambda : lambdas) {
        std::vector<double> gaps;
        for (const Fig2Row& row : out.rows) {
            const bool match = (std::isfinite(lambda) && row.lambda == lambda) ||
                               (!std::isfinite(lambda) && !std::isfinite(row.lambda));
            if (match) gaps.push_back(row.gap);
        }
        Fig2Summary s;
        s.lambda = lambda;
        for (double g : gaps) s.mean_gap += g;
        s.mean_gap /= static_cast<double>(gaps.size());
        if (gaps.size() > 1) {
            double acc = 0.0;
            for (double g : gaps) acc += (g - s.mean_gap) * (g - s.mean_gap);
            s.sd_gap = std::sqrt(acc / static_cast<double>(gaps.size() - 1));
        }
        out.summary.push_back(s);
    }
    return out;
}

// ---- output files -----------------------------------------------------------

void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw std::runtime_error("cannot open " + tmp + " for writing");
        os << content;
    }
    std::filesystem::rename(tmp, path);
}

namespace {

std::string lambda_label(double lambda) {
    if (!std::isfinite(lambda)) return "inf";
    std::ostringstream os;
    os.precision(17);
    os << lambda;
    return os.str();
}

}  // namespace

void write_fig1_csv(const std::string& path, const Fig1Result& result) {
    std::ostringstream os;
    os.precision(17);
    os << "run,epoch,weight_lipschitz,gap,projections_trained\n";
    for (const Fig1Row& row : result.rows) {
        os << row.run << ',' << row.epoch << ',' << row.weight_lipschitz << ','
           << row.gap << ',' << (row.projections_trained ? 1 : 0) << '\n';
    }
    write_text_atomic(path, os.str());
}

void write_fig2_csv(const std::string& rows_path, const std::string& summary_path,
                    const Fig2Result& result) {
    std::ostringstream os;
    os.precision(17);
    os << "lambda,repeat,gap\n";
    for (const Fig2Row& row : result.rows) {
        os << lambda_label(row.lambda) << ',' << row.repeat << ',' << row.gap << '\n';
    }
    write_text_atomic(rows_path, os.str());

    std::ostringstream sum;
    sum.precision(17);
    sum << "lambda,mean_gap,sd_gap\n";
    for (const Fig2Summary& s : result.summary) {
        sum << lambda_label(s.lambda) << ',' << s.mean_gap << ',' << s.sd_gap << '\n';
    }
    write_text_atomic(summary_path, sum.str());
}

void write_run_record_csv(const std::string& path, const RunRecord& record) {
    std::ostringstream os;
    os.precision(17);
    os << "epoch,train_loss,test_loss,gap,weight_lipschitz,penalty,wall_time_sec\n";
    for (const EpochRecord& rec : record.epochs) {
        os << rec.epoch << ',' << rec.train_loss << ',' << rec.test_loss << ',' << rec.gap
           << ',' << rec.weight_lipschitz << ',' << rec.penalty_value << ','
           << rec.wall_time_sec << '\n';
    }
    write_text_atomic(path, os.str());
}

}  // namespace odegen::bench
