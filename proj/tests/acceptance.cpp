// Acceptance suite: one check per criterion, each printing a pass/fail line.
// Run all with no arguments, or a single one with --only N.

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "odegen/bench.hpp"
#include "odegen/certify.hpp"
#include "odegen/lipfun.hpp"
#include "odegen/odeflow.hpp"
#include "odegen/resnet.hpp"
#include "odegen/verify.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::size_t worker_count() {
    return std::max(1u, std::thread::hardware_concurrency());
}

std::string env_data_dir() {
    const char* env = std::getenv("ODEGEN_DATA_DIR");
    return env ? env : "";
}

constexpr double kE = 2.7182818284590452354;
// Frozen by a 50-digit evaluation of the closed forms.
constexpr double kUnitParamOdeB = 76.953718535092444188;
constexpr double kUnitResnetB = 85.763606258414857917;

bool criterion_prop2(std::ostream& os) {
    const auto start = Clock::now();
    const odegen::verify::SuiteResult r = odegen::verify::run_prop2(1000, 20240801);
    const double elapsed = seconds_since(start);
    os << r.summary() << ", " << elapsed << "s";
    return r.passed() && elapsed < 60.0;
}

bool criterion_prop5(std::ostream& os) {
    const auto start = Clock::now();
    const odegen::verify::SuiteResult r = odegen::verify::run_prop5(1000, 20240802);
    const double elapsed = seconds_since(start);
    os << r.summary() << ", " << elapsed << "s";
    return r.passed() && elapsed < 60.0;
}

bool criterion_cover(std::ostream& os) {
    const auto start = Clock::now();
    bool ok = true;

    const odegen::verify::SuiteResult r =
        odegen::verify::run_cover(1.0, 2.0, 0.25, 200, 20240803);
    ok = ok && r.passed();
    os << r.summary();

    struct Triple {
        double R, K, eps;
    };
    for (const Triple& t : {Triple{1.0, 1.0, 1.0}, Triple{1.0, 0.0, 1.0},
                            Triple{1.0, 1.0, 0.5}, Triple{1.5, 1.0, 0.75}}) {
        const odegen::lipfun::Cover cover = odegen::lipfun::build_cover(t.R, t.K, t.eps);
        const double log_size = std::log(static_cast<double>(cover.size()));
        const double bound = odegen::lipfun::cover_log_bound(1, t.R, t.K, t.eps);
        if (log_size > bound) {
            ok = false;
            os << "; size bound violated at (R=" << t.R << ",K=" << t.K
               << ",eps=" << t.eps << ")";
        }
    }
    const double elapsed = seconds_since(start);
    os << ", " << elapsed << "s";
    return ok && elapsed < 30.0;
}

bool criterion_isometry(std::ostream& os) {
    const odegen::verify::SuiteResult r = odegen::verify::run_isometry(100, 20240804);
    os << r.summary();
    return r.passed();
}

bool criterion_certificates(std::ostream& os) {
    odegen::lipfun::ParamClassSpec pspec;
    pspec.K_Theta = 1.0;
    const double b_ode = odegen::certify::bound_param_ode(pspec, 1000000, 0.1).B;

    odegen::resnet::WeightClassSpec wspec;
    wspec.K_W = 1.0;
    const double b_resnet = odegen::certify::bound_resnet(wspec, 1000000, 0.1).B;

    const double ode_err = std::abs(b_ode - kUnitParamOdeB) / kUnitParamOdeB;
    const double resnet_err = std::abs(b_resnet - kUnitResnetB) / kUnitResnetB;
    os << "param-ode B = " << b_ode << " (rel err " << ode_err << "), resnet B = "
       << b_resnet << " (rel err " << resnet_err << ")";
    return ode_err <= 1e-9 && resnet_err <= 1e-9;
}

bool criterion_euler(std::ostream& os) {
    const odegen::odeflow::VectorField field = odegen::odeflow::linear_test_field();
    const odegen::lipfun::ParamFunction one =
        odegen::lipfun::ParamFunction::constant({1.0});
    bool ok = true;
    for (std::size_t L : {10u, 100u, 1000u}) {
        odegen::odeflow::IntegrationConfig cfg;
        cfg.steps = L;
        const double out =
            odegen::odeflow::integrate(field, one, std::vector<double>{1.0}, cfg).output[0];
        const double err = std::abs(out - kE);
        os << "L=" << L << " err " << err << " (<= " << 2.0 / L << "); ";
        ok = ok && err <= 2.0 / static_cast<double>(L);
    }
    return ok;
}

bool criterion_gradients(std::ostream& os) {
    const odegen::verify::SuiteResult r = odegen::verify::run_gradients(50, 20240807);
    os << r.summary();
    return r.passed();
}

odegen::bench::ExperimentProfile desk_profile() {
    odegen::bench::ExperimentProfile p = odegen::bench::ExperimentProfile::desk();
    p.jobs = worker_count();
    p.data_dir = env_data_dir();
    return p;
}

bool criterion_fig1(std::ostream& os) {
    const auto start = Clock::now();
    odegen::bench::ExperimentProfile p = desk_profile();
    p.runs = 3;
    p.epochs = 10;
    const odegen::bench::Fig1Result r = odegen::bench::run_fig1(p);
    const double elapsed = seconds_since(start);
    os << r.rows.size() << " rows, pearson(trained) = " << r.pearson_trained
       << ", pearson(frozen) = " << r.pearson_frozen
       << " [pooled " << r.pearson_all << "], " << elapsed << "s";
    // The correlation is per projection setting (the two settings sit in
    // different regions of the plane, so pooling them measures the offset
    // between the clusters, not the relationship).
    return r.pearson_trained > 0.0 && r.pearson_frozen > 0.0 && elapsed <= 900.0;
}

bool criterion_fig2(std::ostream& os) {
    const auto start = Clock::now();
    odegen::bench::ExperimentProfile p = desk_profile();
    p.runs = 5;
    p.epochs = 10;
    const std::vector<double> lambdas{0.0, 0.01, 0.1, 1.0, INFINITY};
    const odegen::bench::Fig2Result r = odegen::bench::run_fig2(p, lambdas);
    const double elapsed = seconds_since(start);

    double mean_zero = 0.0;
    double mean_inf = 0.0;
    double best_finite = std::numeric_limits<double>::infinity();
    for (const odegen::bench::Fig2Summary& s : r.summary) {
        os << "lambda=" << (std::isfinite(s.lambda) ? std::to_string(s.lambda) : "inf")
           << " mean " << s.mean_gap << " sd " << s.sd_gap << "; ";
        if (s.lambda == 0.0) mean_zero = s.mean_gap;
        if (!std::isfinite(s.lambda)) mean_inf = s.mean_gap;
        if (std::isfinite(s.lambda) && s.lambda > 0.0) {
            best_finite = std::min(best_finite, s.mean_gap);
        }
    }
    os << elapsed << "s";
    return best_finite <= mean_zero && mean_inf <= mean_zero && elapsed <= 1800.0;
}

bool criterion_scaling(std::ostream& os) {
    const std::size_t d = 16;
    const std::size_t seeds = 5;
    std::vector<double> smooth_scaled;
    std::vector<double> iid_scaled;
    for (std::size_t L : {64u, 128u, 256u}) {
        double smooth_acc = 0.0;
        double iid_acc = 0.0;
        for (std::uint64_t seed = 0; seed < seeds; ++seed) {
            smooth_acc += odegen::resnet::weight_lipschitz(
                              odegen::resnet::smooth_init(L, d, 0.1, seed)) *
                          static_cast<double>(L);
            iid_acc += odegen::resnet::weight_lipschitz(
                           odegen::resnet::iid_init(L, d, 1.0, seed)) *
                       static_cast<double>(L);
        }
        smooth_scaled.push_back(smooth_acc / seeds);
        iid_scaled.push_back(iid_acc / seeds);
    }
    const double smooth_ratio =
        std::max({smooth_scaled[0], smooth_scaled[1], smooth_scaled[2]}) /
        std::min({smooth_scaled[0], smooth_scaled[1], smooth_scaled[2]});
    const double iid_growth = iid_scaled[2] / iid_scaled[0];
    os << "smooth L*sup = {" << smooth_scaled[0] << ", " << smooth_scaled[1] << ", "
       << smooth_scaled[2] << "} ratio " << smooth_ratio << " (<= 2); iid L*sup = {"
       << iid_scaled[0] << ", " << iid_scaled[1] << ", " << iid_scaled[2] << "} growth "
       << iid_growth << " (>= 5)";
    return smooth_ratio <= 2.0 && iid_growth >= 5.0;
}

bool criterion_golowich(std::ostream& os) {
    odegen::Rng rng(20240811);
    odegen::resnet::WeightClassSpec spec;
    spec.d = 9;
    spec.L = 50;
    spec.R_W = 25.0;
    std::size_t violations = 0;
    double worst = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 100; ++trial) {
        const odegen::resnet::WeightTensor w = odegen::resnet::random_member(spec, rng);
        const odegen::certify::GolowichRecord rec = odegen::certify::golowich_product(w);
        if (!rec.lower_bound_defined) {
            ++violations;
            continue;
        }
        const double margin = rec.log_product - rec.lower_bound;
        worst = std::min(worst, margin);
        if (margin < 0.0) ++violations;
    }
    os << violations << "/100 violations, worst margin " << worst;
    return violations == 0;
}

bool criterion_paper_smoke(std::ostream& os) {
    namespace fs = std::filesystem;
    const auto start = Clock::now();
    odegen::bench::ExperimentProfile p = odegen::bench::ExperimentProfile::paper();
    // Paper model shape; reduced sample count and two epochs, as a launch-and-
    // checkpoint mechanics check rather than a full reproduction.
    p.train_samples = 2000;
    p.test_samples = 500;
    p.epochs = 2;
    p.runs = 1;
    p.jobs = worker_count();
    p.dataset = "synth";
    const fs::path dir = fs::temp_directory_path() / "odegen_paper_smoke";
    fs::remove_all(dir);
    p.checkpoint_dir = dir.string();

    const odegen::bench::Fig1Result r = odegen::bench::run_fig1(p);
    std::size_t checkpoints = 0;
    if (fs::exists(dir)) {
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.path().extension() == ".odrn") ++checkpoints;
        }
    }
    const double elapsed = seconds_since(start);
    os << r.rows.size() << " rows, " << checkpoints << " checkpoints, " << elapsed << "s";
    // Two settings x one run x two epochs.
    bool loadable = checkpoints == 4;
    if (loadable) {
        const odegen::resnet::WeightTensor w = odegen::resnet::load_weights_file(
            (dir / "fig1_trained_run0_epoch2.odrn").string());
        loadable = w.depth() == 1000 && w.width() == 30;
    }
    fs::remove_all(dir);
    return r.rows.size() == 4 && loadable;
}

struct Criterion {
    int id;
    std::string description;
    std::function<bool(std::ostream&)> run;
};

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
            only = std::atoi(argv[i + 1]);
        }
    }

    const std::vector<Criterion> criteria = {
        {1, "output/Lipschitz bounds of the ODE class (1000 samples, rk4@512)",
         criterion_prop2},
        {2, "output/Lipschitz bounds of the residual class (1000 samples)",
         criterion_prop5},
        {3, "cover coverage at (R=1, K=2, eps=0.25) and size bounds", criterion_cover},
        {4, "embedding isometry/linearity and Euler equivalence (100 tensors)",
         criterion_isometry},
        {5, "closed-form certificate constants to 1e-9", criterion_certificates},
        {6, "Euler error <= 2/L on the unit linear ODE", criterion_euler},
        {7, "tanh backward vs central differences (50 probes)", criterion_gradients},
        {8, "weight-Lipschitz vs gap correlation, desk scale", criterion_fig1},
        {9, "penalty sweep reduces the gap, desk scale", criterion_fig2},
        {10, "smooth vs iid initialization depth scaling", criterion_scaling},
        {11, "log-product lower bound (d=9, L=50, 100 tensors)", criterion_golowich},
        {12, "paper-profile launch and checkpoint smoke (non-gating in scope)",
         criterion_paper_smoke},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        if (only != 0 && c.id != only) continue;
        std::ostringstream detail;
        bool ok = false;
        try {
            ok = c.run(detail);
        } catch (const std::exception& e) {
            detail << "exception: " << e.what();
        }
        std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << c.id << ": "
                  << c.description << " -- " << detail.str() << "\n";
        if (!ok) ++failures;
    }
    return failures;
}
