#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "odegen/resnet.hpp"

namespace odegen::bench {

enum class Split { train, test };

struct Dataset {
    std::vector<std::vector<double>> inputs;
    std::vector<int> labels;
    std::size_t num_classes = 0;
    std::string name;
    Split split = Split::train;

    std::size_t size() const { return inputs.size(); }
    std::size_t dim() const { return inputs.empty() ? 0 : inputs.front().size(); }
    void validate() const;
};

// Big-endian IDX parser; pixels are divided by 255, images flattened row-major.
Dataset load_mnist(const std::string& images_path, const std::string& labels_path);

// Gaussian blobs with class means separation * e_c. Requires classes <= dim.
Dataset synth_dataset(std::size_t classes, std::size_t per_class, std::size_t dim,
                      double separation, std::uint64_t seed);

struct TrainConfig {
    std::size_t epochs = 10;
    std::size_t batch_size = 128;
    double learning_rate = 0.02;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    // Penalty factor; infinity selects the genuinely weight-tied parameterization.
    double lambda = 0.0;
    resnet::PenaltyKind penalty_kind = resnet::PenaltyKind::frob_l2;
    bool train_projections = false;
    std::uint64_t seed = 0;
    // Invoked after every epoch (checkpointing hook); may be empty.
    std::function<void(std::size_t, const resnet::ResNetModel&)> epoch_callback;
};

struct EpochRecord {
    std::size_t epoch = 0;           // 1-based
    double train_loss = 0.0;         // unpenalized mean cross-entropy
    double test_loss = 0.0;
    double gap = 0.0;                // test_loss - train_loss
    double weight_lipschitz = 0.0;
    double penalty_value = 0.0;
    double wall_time_sec = 0.0;
};

struct RunRecord {
    std::vector<EpochRecord> epochs;
    const EpochRecord& final_epoch() const { return epochs.back(); }
};

struct TrainResult {
    resnet::ResNetModel model;
    RunRecord record;
};

// Adam on mean cross-entropy + lambda * penalty. Deterministic given
// (config, seed): the shuffle order comes from a dedicated RNG.
TrainResult train(resnet::ResNetModel model, const Dataset& train_data,
                  const TrainConfig& cfg, const Dataset* test_data = nullptr);

double mean_cross_entropy(const resnet::ResNetModel& model, const Dataset& data);

// Mean cross-entropy on test minus mean on train (unpenalized).
double generalization_gap(const resnet::ResNetModel& model, const Dataset& train_data,
                          const Dataset& test_data);

struct BatchGradient {
    resnet::Gradients grads;   // mean loss gradient plus lambda * penalty subgradient
    double mean_loss = 0.0;    // unpenalized
};

// The exact gradient train() applies for one batch; exposed so the plumbing can
// be compared against a two-pass reference.
BatchGradient batch_gradient(const resnet::ResNetModel& model, const Dataset& data,
                             std::span<const std::size_t> indices, double lambda,
                             resnet::PenaltyKind kind);

// Bias-corrected Adam moments, one state per parameter tensor.
struct AdamState {
    std::vector<double> m;
    std::vector<double> v;

    explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
    void update(std::vector<double>& param, const std::vector<double>& grad,
                const TrainConfig& cfg, std::size_t t);
};

double pearson(std::span<const double> x, std::span<const double> y);

struct ExperimentProfile {
    std::string name = "desk";
    std::size_t d = 16;
    std::size_t L = 100;
    std::size_t train_samples = 10000;
    std::size_t test_samples = 2000;
    std::size_t epochs = 10;
    std::size_t runs = 3;            // seeds for fig1, repeats for fig2
    std::size_t batch_size = 128;
    double learning_rate = 0.02;
    double gp_bandwidth = 0.1;
    std::uint64_t seed = 1;
    std::string dataset = "auto";    // auto | synth | mnist
    std::string data_dir;            // where the IDX files live
    std::size_t jobs = 1;
    std::string checkpoint_dir;      // per-epoch ODRN checkpoints when nonempty

    static ExperimentProfile desk();
    static ExperimentProfile paper();
};

// Loads MNIST from data_dir when requested (or on auto when present), otherwise
// builds the synthetic fallback sized to the profile.
std::pair<Dataset, Dataset> resolve_dataset(const ExperimentProfile& profile);

// Residual model for the profile: smooth-in-depth core, Gaussian projections.
resnet::ResNetModel make_model(const ExperimentProfile& profile, std::size_t input_dim,
                               std::size_t classes, bool train_projections,
                               bool weight_tied, std::uint64_t seed);

struct Fig1Row {
    std::size_t run = 0;
    std::size_t epoch = 0;
    double weight_lipschitz = 0.0;
    double gap = 0.0;
    bool projections_trained = false;
};

struct Fig1Result {
    std::vector<Fig1Row> rows;
    double pearson_all = 0.0;
    double pearson_trained = 0.0;
    double pearson_frozen = 0.0;
};

// For each seed and epoch, the pair (weight Lipschitz constant, generalization
// gap), under both projection settings.
Fig1Result run_fig1(const ExperimentProfile& profile);

struct Fig2Row {
    double lambda = 0.0;   // +infinity = weight-tied
    std::size_t repeat = 0;
    double gap = 0.0;
};

struct Fig2Summary {
    double lambda = 0.0;
    double mean_gap = 0.0;
    double sd_gap = 0.0;
};

struct Fig2Result {
    std::vector<Fig2Row> rows;
    std::vector<Fig2Summary> summary;
};

// Final-epoch gap per (lambda, repeat) with frozen projections.
Fig2Result run_fig2(const ExperimentProfile& profile, const std::vector<double>& lambdas);

void write_fig1_csv(const std::string& path, const Fig1Result& result);
void write_fig2_csv(const std::string& rows_path, const std::string& summary_path,
                    const Fig2Result& result);
void write_run_record_csv(const std::string& path, const RunRecord& record);

// Writes via a temp file and rename.
void write_text_atomic(const std::string& path, const std::string& content);

}  // namespace odegen::bench
