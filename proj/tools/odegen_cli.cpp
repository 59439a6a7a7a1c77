// Command-line frontend: certificates, covers, property suites, experiments.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "odegen/bench.hpp"
#include "odegen/certify.hpp"
#include "odegen/errors.hpp"
#include "odegen/lipfun.hpp"
#include "odegen/resnet.hpp"
#include "odegen/svg.hpp"
#include "odegen/verify.hpp"
#include "odegen/version.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

std::string default_data_dir() {
    const char* env = std::getenv("ODEGEN_DATA_DIR");
    return env ? env : "";
}

void write_manifest(const std::string& out_dir, const std::string& command,
                    const json& config, const std::vector<std::string>& outputs) {
    json manifest;
    manifest["command"] = command;
    manifest["version"] = odegen::version_string();
    manifest["config"] = config;
    manifest["outputs"] = outputs;
    odegen::bench::write_text_atomic((fs::path(out_dir) / "manifest.json").string(),
                                     manifest.dump(2) + "\n");
}

std::vector<double> parse_lambda_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        if (item == "inf" || item == "Inf" || item == "INF") {
            out.push_back(INFINITY);
        } else {
            out.push_back(std::stod(item));
        }
    }
    if (out.empty()) throw std::invalid_argument("empty lambda list");
    return out;
}

double parse_lambda(const std::string& text) {
    if (text == "inf" || text == "Inf" || text == "INF") return INFINITY;
    return std::stod(text);
}

// ---- certify ----------------------------------------------------------------

struct CertifyOptions {
    std::string bound;
    std::string spec_path;
    std::string weights_path;
    std::string out_path;
    std::uint64_t n = 1000000;
    double delta = 0.1;
    double gamma = 1.0;
    double r_x = 1.0;
};

int run_certify(const CertifyOptions& opt) {
    bool k_loss_defaulted = false;
    odegen::certify::BoundReport report;

    if (opt.bound == "param-ode") {
        odegen::lipfun::ParamClassSpec spec;   // defaults: the all-ones spec
        spec.K_Theta = 1.0;
        if (!opt.spec_path.empty()) {
            spec = odegen::certify::param_spec_from_json_string(read_file(opt.spec_path),
                                                                &k_loss_defaulted);
        }
        report = odegen::certify::bound_param_ode(spec, opt.n, opt.delta);
    } else if (opt.bound == "neural-ode") {
        odegen::certify::NeuralOdeSpec spec;
        if (!opt.spec_path.empty()) {
            spec = odegen::certify::neural_spec_from_json_string(read_file(opt.spec_path),
                                                                 &k_loss_defaulted);
        }
        report = odegen::certify::bound_neural_ode(spec, opt.n, opt.delta);
    } else if (opt.bound == "resnet") {
        odegen::resnet::WeightClassSpec spec;
        spec.K_W = 1.0;
        if (!opt.spec_path.empty()) {
            spec = odegen::certify::weight_spec_from_json_string(read_file(opt.spec_path),
                                                                 &k_loss_defaulted);
        }
        report = odegen::certify::bound_resnet(spec, opt.n, opt.delta);
    } else if (opt.bound == "bartlett") {
        if (!opt.weights_path.empty()) {
            const odegen::resnet::WeightTensor w =
                odegen::resnet::load_weights_file(opt.weights_path);
            report = odegen::certify::bound_bartlett(w, opt.r_x, opt.gamma, opt.n,
                                                     opt.delta);
        } else {
            odegen::resnet::WeightClassSpec spec;
            if (!opt.spec_path.empty()) {
                spec = odegen::certify::weight_spec_from_json_string(
                    read_file(opt.spec_path), &k_loss_defaulted);
            }
            report = odegen::certify::bound_bartlett(spec, opt.gamma, opt.n, opt.delta);
        }
    } else {
        std::cerr << "unknown bound: " << opt.bound << "\n";
        return 2;
    }

    if (k_loss_defaulted) {
        report.notes.push_back(
            "K_loss defaulted to sqrt(2): softmax cross-entropy Lipschitz bound");
    }

    const std::string text = report.to_json_string();
    std::cout << text << "\n";
    if (!opt.out_path.empty()) {
        odegen::bench::write_text_atomic(opt.out_path, text + "\n");
        json cfg;
        cfg["bound"] = opt.bound;
        cfg["spec"] = opt.spec_path;
        cfg["weights"] = opt.weights_path;
        cfg["n"] = opt.n;
        cfg["delta"] = opt.delta;
        cfg["gamma"] = opt.gamma;
        write_manifest(fs::path(opt.out_path).parent_path().empty()
                           ? "."
                           : fs::path(opt.out_path).parent_path().string(),
                       "certify", cfg, {opt.out_path});
    }
    return report.valid() ? 0 : 1;
}

// ---- cover ------------------------------------------------------------------

struct CoverOptions {
    double R = 1.0;
    double K = 1.0;
    double eps = 1.0;
    std::size_t m = 1;
    std::size_t verify_samples = 0;
    std::uint64_t seed = 1;
    std::string out_path;
};

int run_product_cover_cmd(const CoverOptions& opt) {
    const odegen::lipfun::ProductCover pc =
        odegen::lipfun::build_product_cover(opt.m, opt.R, opt.K, opt.eps);
    const double log_bound =
        odegen::lipfun::cover_log_bound(opt.m, opt.R, opt.K, opt.eps);
    std::cout << "product cover(m=" << opt.m << ", R=" << opt.R << ", K=" << opt.K
              << ", eps=" << opt.eps << ")\n"
              << "  coordinate members: " << pc.coordinate_cover.size() << "\n"
              << "  log size:  " << pc.log_size() << "\n"
              << "  log bound: " << log_bound << "\n";
    bool ok = pc.log_size() <= log_bound;
    if (opt.verify_samples > 0) {
        odegen::Rng rng(opt.seed);
        odegen::lipfun::ParamClassSpec spec;
        spec.m = opt.m;
        spec.R_Theta = opt.R;
        spec.K_Theta = opt.K;
        std::size_t violations = 0;
        double worst = 0.0;
        for (std::size_t s = 0; s < opt.verify_samples; ++s) {
            const auto f = odegen::lipfun::random_member(spec, rng);
            const auto r = odegen::lipfun::nearest_product_member(pc, f);
            worst = std::max(worst, r.distance);
            if (r.distance > opt.eps) ++violations;
        }
        std::cout << "  verify: " << violations << "/" << opt.verify_samples
                  << " violations, worst distance " << worst << "\n";
        ok = ok && violations == 0;
    }
    return ok ? 0 : 1;
}

int run_cover_cmd(const CoverOptions& opt) {
    if (opt.m > 1) return run_product_cover_cmd(opt);
    const odegen::lipfun::Cover cover = odegen::lipfun::build_cover(opt.R, opt.K, opt.eps);
    const double log_bound = odegen::lipfun::cover_log_bound(1, opt.R, opt.K, opt.eps);
    const double log_size = std::log(static_cast<double>(cover.size()));

    std::cout << "cover(R=" << opt.R << ", K=" << opt.K << ", eps=" << opt.eps << ")\n"
              << "  members:   " << cover.size() << "\n"
              << "  |G_x|:     " << cover.grid_x.size() << "\n"
              << "  |G_y|:     " << cover.grid_y.size() << "\n"
              << "  log size:  " << log_size << "\n"
              << "  log bound: " << log_bound << "\n";

    bool ok = log_size <= log_bound;
    if (opt.verify_samples > 0) {
        const odegen::verify::SuiteResult result = odegen::verify::run_cover(
            opt.R, opt.K, opt.eps, opt.verify_samples, opt.seed);
        std::cout << "  " << result.summary() << "\n";
        ok = ok && result.passed();
    }
    if (!opt.out_path.empty()) {
        std::ostringstream os;
        odegen::lipfun::write_cover(os, cover);
        odegen::bench::write_text_atomic(opt.out_path, os.str());
        std::cout << "  wrote " << opt.out_path << "\n";
    }
    return ok ? 0 : 1;
}

// ---- verify-props -----------------------------------------------------------

struct VerifyOptions {
    std::string suite;
    std::size_t samples = 1000;
    std::uint64_t seed = 1;
};

int run_verify(const VerifyOptions& opt) {
    const odegen::verify::SuiteResult result =
        odegen::verify::run_suite_by_name(opt.suite, opt.samples, opt.seed);
    std::cout << result.summary() << "\n";
    for (const std::string& note : result.notes) std::cout << "  " << note << "\n";
    return result.passed() ? 0 : 1;
}

// ---- experiments ------------------------------------------------------------

struct ExperimentOptions {
    std::string profile = "desk";
    std::string out_dir;
    std::string dataset = "auto";
    std::string data_dir = default_data_dir();
    std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::size_t runs = 0;
    std::size_t epochs = 0;
    std::size_t train_samples = 0;
    std::size_t test_samples = 0;
    std::size_t d = 0;
    std::size_t L = 0;
    double learning_rate = 0.0;
    bool checkpoints = false;
    std::string lambdas = "0,0.01,0.1,1,inf";
};

odegen::bench::ExperimentProfile make_profile(const ExperimentOptions& opt,
                                              bool fig2_defaults) {
    odegen::bench::ExperimentProfile p =
        opt.profile == "paper" ? odegen::bench::ExperimentProfile::paper()
                               : odegen::bench::ExperimentProfile::desk();
    if (fig2_defaults) {
        // fig2 runs longer and repeats per lambda value.
        p.runs = opt.profile == "paper" ? 20 : 5;
        if (opt.profile == "paper") p.epochs = 50;
    }
    if (opt.runs > 0) p.runs = opt.runs;
    if (opt.epochs > 0) p.epochs = opt.epochs;
    if (opt.train_samples > 0) p.train_samples = opt.train_samples;
    if (opt.test_samples > 0) p.test_samples = opt.test_samples;
    if (opt.d > 0) p.d = opt.d;
    if (opt.L > 0) p.L = opt.L;
    if (opt.learning_rate > 0.0) p.learning_rate = opt.learning_rate;
    if (opt.seed_set) p.seed = opt.seed;
    p.dataset = opt.dataset;
    p.data_dir = opt.data_dir;
    p.jobs = opt.jobs;
    return p;
}

json profile_json(const odegen::bench::ExperimentProfile& p) {
    json j;
    j["name"] = p.name;
    j["d"] = p.d;
    j["L"] = p.L;
    j["train_samples"] = p.train_samples;
    j["test_samples"] = p.test_samples;
    j["epochs"] = p.epochs;
    j["runs"] = p.runs;
    j["batch_size"] = p.batch_size;
    j["learning_rate"] = p.learning_rate;
    j["gp_bandwidth"] = p.gp_bandwidth;
    j["seed"] = p.seed;
    j["dataset"] = p.dataset;
    j["data_dir"] = p.data_dir;
    j["jobs"] = p.jobs;
    return j;
}

int run_fig1_cmd(const ExperimentOptions& opt) {
    odegen::bench::ExperimentProfile profile = make_profile(opt, false);
    const std::string out_dir = opt.out_dir.empty() ? "fig1_out" : opt.out_dir;
    fs::create_directories(out_dir);
    if (opt.checkpoints) {
        profile.checkpoint_dir = (fs::path(out_dir) / "checkpoints").string();
    }

    const odegen::bench::Fig1Result result = odegen::bench::run_fig1(profile);
    const std::string csv_path = (fs::path(out_dir) / "fig1.csv").string();
    odegen::bench::write_fig1_csv(csv_path, result);

    json cfg = profile_json(profile);
    cfg["pearson_all"] = result.pearson_all;
    cfg["pearson_trained"] = result.pearson_trained;
    cfg["pearson_frozen"] = result.pearson_frozen;
    write_manifest(out_dir, "fig1", cfg, {csv_path});

    std::cout << "fig1: " << result.rows.size() << " rows -> " << csv_path << "\n"
              << "  pearson(all):     " << result.pearson_all << "\n"
              << "  pearson(trained): " << result.pearson_trained << "\n"
              << "  pearson(frozen):  " << result.pearson_frozen << "\n";
    return 0;
}

int run_fig2_cmd(const ExperimentOptions& opt) {
    odegen::bench::ExperimentProfile profile = make_profile(opt, true);
    const std::string out_dir = opt.out_dir.empty() ? "fig2_out" : opt.out_dir;
    fs::create_directories(out_dir);
    if (opt.checkpoints) {
        profile.checkpoint_dir = (fs::path(out_dir) / "checkpoints").string();
    }
    const std::vector<double> lambdas = parse_lambda_list(opt.lambdas);

    const odegen::bench::Fig2Result result = odegen::bench::run_fig2(profile, lambdas);
    const std::string rows_path = (fs::path(out_dir) / "fig2_runs.csv").string();
    const std::string summary_path = (fs::path(out_dir) / "fig2_summary.csv").string();
    odegen::bench::write_fig2_csv(rows_path, summary_path, result);

    json cfg = profile_json(profile);
    cfg["lambdas"] = opt.lambdas;
    write_manifest(out_dir, "fig2", cfg, {rows_path, summary_path});

    std::cout << "fig2: " << result.rows.size() << " rows -> " << rows_path << "\n";
    for (const odegen::bench::Fig2Summary& s : result.summary) {
        std::cout << "  lambda=" << (std::isfinite(s.lambda) ? std::to_string(s.lambda)
                                                             : std::string("inf"))
                  << " mean gap " << s.mean_gap << " (sd " << s.sd_gap << ")\n";
    }
    return 0;
}

struct TrainOptions {
    ExperimentOptions common;
    std::string lambda = "0";
    std::string penalty = "frob_l2";
    bool train_projections = false;
};

int run_train_cmd(const TrainOptions& opt) {
    odegen::bench::ExperimentProfile profile = make_profile(opt.common, false);
    const std::string out_dir =
        opt.common.out_dir.empty() ? "train_out" : opt.common.out_dir;
    fs::create_directories(out_dir);

    const auto [train_data, test_data] = odegen::bench::resolve_dataset(profile);
    const double lambda = parse_lambda(opt.lambda);
    odegen::resnet::ResNetModel model = odegen::bench::make_model(
        profile, train_data.dim(), train_data.num_classes, opt.train_projections,
        !std::isfinite(lambda), profile.seed);

    odegen::bench::TrainConfig cfg;
    cfg.epochs = profile.epochs;
    cfg.batch_size = profile.batch_size;
    cfg.learning_rate = profile.learning_rate;
    cfg.lambda = lambda;
    cfg.penalty_kind = odegen::resnet::penalty_kind_from_name(opt.penalty);
    cfg.train_projections = opt.train_projections;
    cfg.seed = profile.seed;
    if (opt.common.checkpoints) {
        profile.checkpoint_dir = (fs::path(out_dir) / "checkpoints").string();
        cfg.epoch_callback = [&profile](std::size_t epoch,
                                        const odegen::resnet::ResNetModel& m) {
            fs::create_directories(profile.checkpoint_dir);
            const std::string path =
                (fs::path(profile.checkpoint_dir) / ("epoch" + std::to_string(epoch) + ".odrn"))
                    .string();
            odegen::resnet::save_weights_file(path + ".tmp", m.core);
            fs::rename(path + ".tmp", path);
        };
    }

    const odegen::bench::TrainResult result =
        odegen::bench::train(std::move(model), train_data, cfg, &test_data);

    const std::string csv_path = (fs::path(out_dir) / "run.csv").string();
    odegen::bench::write_run_record_csv(csv_path, result.record);
    const std::string weights_path = (fs::path(out_dir) / "weights.odrn").string();
    odegen::resnet::save_weights_file(weights_path + ".tmp", result.model.core);
    fs::rename(weights_path + ".tmp", weights_path);

    json cfg_json = profile_json(profile);
    cfg_json["lambda"] = opt.lambda;
    cfg_json["penalty"] = opt.penalty;
    cfg_json["train_projections"] = opt.train_projections;
    write_manifest(out_dir, "train", cfg_json, {csv_path, weights_path});

    const odegen::bench::EpochRecord& last = result.record.final_epoch();
    std::cout << "train: " << profile.epochs << " epochs on " << train_data.name << "\n"
              << "  final train loss: " << last.train_loss << "\n"
              << "  final test loss:  " << last.test_loss << "\n"
              << "  final gap:        " << last.gap << "\n"
              << "  weight lipschitz: " << last.weight_lipschitz << "\n";
    return 0;
}

// ---- plot -------------------------------------------------------------------

struct PlotOptions {
    std::string csv_path;
    std::string x_col;
    std::string y_col;
    std::string group_col;
    std::string out_path = "plot.svg";
    std::string kind = "scatter";
};

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    if (rows.size() < 2) throw std::runtime_error("csv has no data rows: " + path);
    return rows;
}

int run_plot(const PlotOptions& opt) {
    const auto rows = read_csv(opt.csv_path);
    const auto& header = rows.front();
    auto column = [&](const std::string& name) -> std::size_t {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        throw std::invalid_argument("column not found: " + name);
    };
    const std::size_t xi = column(opt.x_col);
    const std::size_t yi = column(opt.y_col);
    const bool grouped = !opt.group_col.empty();
    const std::size_t gi = grouped ? column(opt.group_col) : 0;

    auto cell_value = [](const std::string& cell) {
        if (cell == "inf") return static_cast<double>(INFINITY);
        return std::stod(cell);
    };

    std::vector<odegen::svg::Series> series;
    auto series_for = [&](const std::string& label) -> odegen::svg::Series& {
        for (auto& s : series) {
            if (s.label == label) return s;
        }
        series.push_back(odegen::svg::Series{{}, {}, label});
        return series.back();
    };
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        odegen::svg::Series& s =
            grouped ? series_for(opt.group_col + "=" + row[gi]) : series_for("");
        s.x.push_back(cell_value(row[xi]));
        s.y.push_back(cell_value(row[yi]));
    }

    const std::string svg_text = odegen::svg::render(
        series,
        opt.kind == "line" ? odegen::svg::PlotKind::line : odegen::svg::PlotKind::scatter,
        fs::path(opt.csv_path).filename().string(), opt.x_col, opt.y_col);
    odegen::bench::write_text_atomic(opt.out_path, svg_text);
    std::cout << "wrote " << opt.out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Parameterized-ODE / residual-network generalization toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", odegen::version_string());

    CertifyOptions certify_opt;
    CLI::App* certify_cmd =
        app.add_subcommand("certify", "Evaluate a generalization-bound certificate");
    certify_cmd->add_option("--bound", certify_opt.bound, "param-ode|neural-ode|resnet|bartlett")
        ->required()
        ->check(CLI::IsMember({"param-ode", "neural-ode", "resnet", "bartlett"}));
    certify_cmd->add_option("--spec", certify_opt.spec_path, "JSON class-spec file");
    certify_cmd->add_option("--weights", certify_opt.weights_path,
                            "ODRN weight file (bartlett only)");
    certify_cmd->add_option("--n", certify_opt.n, "sample count");
    certify_cmd->add_option("--delta", certify_opt.delta, "confidence level");
    certify_cmd->add_option("--gamma", certify_opt.gamma, "margin (bartlett only)");
    certify_cmd->add_option("--r-x", certify_opt.r_x, "input radius (bartlett tensor route)");
    certify_cmd->add_option("--out", certify_opt.out_path, "write the report to a file");

    CoverOptions cover_opt;
    CLI::App* cover_cmd = app.add_subcommand("cover", "Build and verify an eps-net");
    cover_cmd->add_option("--R", cover_opt.R, "sup-norm bound")->required();
    cover_cmd->add_option("--K", cover_opt.K, "Lipschitz constant")->required();
    cover_cmd->add_option("--eps", cover_opt.eps, "covering radius")->required();
    cover_cmd->add_option("--m", cover_opt.m, "coordinate count (product cover, <= 2)");
    cover_cmd->add_option("--verify", cover_opt.verify_samples,
                          "check this many random admissible functions");
    cover_cmd->add_option("--seed", cover_opt.seed, "verification seed");
    cover_cmd->add_option("--out", cover_opt.out_path, "write cover in text format");

    VerifyOptions verify_opt;
    CLI::App* verify_cmd = app.add_subcommand("verify-props", "Run a property suite");
    verify_cmd->add_option("--suite", verify_opt.suite, "prop2|prop5|isometry|gradients")
        ->required()
        ->check(CLI::IsMember({"prop2", "prop5", "isometry", "gradients"}));
    verify_cmd->add_option("--samples", verify_opt.samples, "sample count");
    verify_cmd->add_option("--seed", verify_opt.seed, "RNG seed");

    auto add_common = [](CLI::App* cmd, ExperimentOptions& opt) {
        cmd->add_option("--profile", opt.profile, "desk|paper")
            ->check(CLI::IsMember({"desk", "paper"}));
        cmd->add_option("--out-dir", opt.out_dir, "output directory");
        cmd->add_option("--dataset", opt.dataset, "auto|synth|mnist")
            ->check(CLI::IsMember({"auto", "synth", "mnist"}));
        cmd->add_option("--data-dir", opt.data_dir, "directory with the IDX files");
        cmd->add_option("--jobs", opt.jobs, "parallel runs");
        cmd->add_option("--seed", opt.seed, "base seed")->each([&opt](const std::string&) {
            opt.seed_set = true;
        });
        cmd->add_option("--runs", opt.runs, "independent runs / repeats");
        cmd->add_option("--epochs", opt.epochs, "training epochs");
        cmd->add_option("--train-samples", opt.train_samples, "training sample cap");
        cmd->add_option("--test-samples", opt.test_samples, "test sample cap");
        cmd->add_option("--width", opt.d, "residual width d");
        cmd->add_option("--depth", opt.L, "residual depth L");
        cmd->add_option("--lr", opt.learning_rate, "learning rate");
        cmd->add_flag("--checkpoints", opt.checkpoints, "write per-epoch weight checkpoints");
    };

    ExperimentOptions fig1_opt;
    CLI::App* fig1_cmd = app.add_subcommand("fig1", "Weight-Lipschitz vs gap experiment");
    add_common(fig1_cmd, fig1_opt);

    ExperimentOptions fig2_opt;
    CLI::App* fig2_cmd = app.add_subcommand("fig2", "Penalty-factor sweep experiment");
    add_common(fig2_cmd, fig2_opt);
    fig2_cmd->add_option("--lambdas", fig2_opt.lambdas,
                         "comma-separated grid, inf allowed");

    TrainOptions train_opt;
    CLI::App* train_cmd = app.add_subcommand("train", "Train a single model");
    add_common(train_cmd, train_opt.common);
    train_cmd->add_option("--lambda", train_opt.lambda, "penalty factor, inf = weight-tied");
    train_cmd->add_option("--penalty", train_opt.penalty, "frob_l2|max_max|maxnorm_l2")
        ->check(CLI::IsMember({"frob_l2", "max_max", "maxnorm_l2"}));
    train_cmd->add_flag("--train-projections", train_opt.train_projections,
                        "also train the input/output projections");

    PlotOptions plot_opt;
    CLI::App* plot_cmd = app.add_subcommand("plot", "Render a CSV as an SVG plot");
    plot_cmd->add_option("--csv", plot_opt.csv_path, "input CSV")->required();
    plot_cmd->add_option("--x", plot_opt.x_col, "x column name")->required();
    plot_cmd->add_option("--y", plot_opt.y_col, "y column name")->required();
    plot_cmd->add_option("--group", plot_opt.group_col, "series-grouping column");
    plot_cmd->add_option("--out", plot_opt.out_path, "output SVG path");
    plot_cmd->add_option("--kind", plot_opt.kind, "scatter|line")
        ->check(CLI::IsMember({"scatter", "line"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (certify_cmd->parsed()) return run_certify(certify_opt);
        if (cover_cmd->parsed()) return run_cover_cmd(cover_opt);
        if (verify_cmd->parsed()) return run_verify(verify_opt);
        if (fig1_cmd->parsed()) return run_fig1_cmd(fig1_opt);
        if (fig2_cmd->parsed()) return run_fig2_cmd(fig2_opt);
        if (train_cmd->parsed()) return run_train_cmd(train_opt);
        if (plot_cmd->parsed()) return run_plot(plot_opt);
    } catch (const odegen::format_error& e) {
        std::cerr << "format error at byte " << e.byte_offset() << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
