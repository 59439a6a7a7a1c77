#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "odegen/errors.hpp"
#include "odegen/numerics.hpp"

using namespace odegen;

namespace {

Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m(rows.size(), rows.begin()->size());
    std::size_t i = 0;
    for (const auto& row : rows) {
        std::size_t j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

}  // namespace

TEST_CASE("norm_11") {
    CHECK(norm_11(from_rows({{1, -2}, {3, 0}})) == doctest::Approx(6.0));
    CHECK(norm_11(Matrix(3, 3)) == 0.0);
    CHECK(norm_11(Matrix::identity(7)) == doctest::Approx(7.0));
    CHECK_THROWS_AS(norm_11(Matrix()), std::invalid_argument);
}

TEST_CASE("norm_max") {
    CHECK(norm_max(from_rows({{1, -2}, {3, 0}})) == doctest::Approx(3.0));
    CHECK(norm_max(Matrix(2, 5)) == 0.0);
    CHECK(norm_max(Matrix::identity(4)) == 1.0);
    CHECK_THROWS_AS(norm_max(Matrix()), std::invalid_argument);
}

TEST_CASE("norm_21") {
    CHECK(norm_21(from_rows({{3, 4}, {0, 0}})) == doctest::Approx(7.0));
    CHECK(norm_21(Matrix::identity(5)) == doctest::Approx(5.0));
    CHECK(norm_21(from_rows({{0, 0}, {0, 0}})) == 0.0);
}

TEST_CASE("spectral norm basics") {
    CHECK(spectral_norm(Matrix::identity(2)) == doctest::Approx(1.0));

    Matrix diag(2, 2);
    diag(0, 0) = 3.0;
    diag(1, 1) = -1.0;
    CHECK(spectral_norm(diag) == doctest::Approx(3.0));

    // Nilpotent shift still has largest singular value 1.
    Matrix shift(2, 2);
    shift(0, 1) = 1.0;
    CHECK(spectral_norm(shift) == doctest::Approx(1.0));

    CHECK(spectral_norm(Matrix(3, 3)) == 0.0);
}

TEST_CASE("spectral norm convergence failure carries the last estimate") {
    // Nearly equal singular values cannot be separated in two iterations.
    Matrix m(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = 1.0 + 1e-4;
    m(0, 1) = 1e-5;
    try {
        spectral_norm(m, 1e-15, 2);
        FAIL("expected convergence_error");
    } catch (const convergence_error& e) {
        CHECK(e.last_estimate() == doctest::Approx(1.0).epsilon(1e-3));
    }
}

TEST_CASE("spectral norm restarts when e1 is in the null space") {
    // First column zero, so the canonical start vector maps to zero.
    Matrix m(2, 2);
    m(0, 1) = 2.0;
    m(1, 1) = 0.0;
    CHECK(spectral_norm(m) == doctest::Approx(2.0));
}

TEST_CASE("spectral norm is below the (1,1) norm on random matrices") {
    Rng rng(42);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t r = 1 + rng.index(5);
        const std::size_t c = 1 + rng.index(5);
        Matrix m(r, c);
        for (double& v : m.data) v = rng.uniform(-2.0, 2.0);
        const double sn = spectral_norm(m);
        CHECK(sn <= norm_11(m) + 1e-9);
    }
}

TEST_CASE("norm_21 of the transpose dominates the spectral norm") {
    Rng rng(7);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + rng.index(6);
        Matrix m(n, n);
        for (double& v : m.data) v = rng.gaussian();
        Matrix mt(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) mt(j, i) = m(i, j);
        }
        CHECK(norm_21(mt) >= spectral_norm(m) - 1e-9);
    }
}

TEST_CASE("gp kernel matrix") {
    const Matrix k = GpSampler::kernel_matrix(100, 0.1, 1e-8);
    // Adjacent knots are 0.01 apart: correlation exp(-0.005).
    CHECK(k(0, 1) == doctest::Approx(std::exp(-0.005)).epsilon(1e-12));
    CHECK(k(0, 0) == doctest::Approx(1.0 + 1e-8));
    CHECK(k(42, 42) == doctest::Approx(1.0 + 1e-8));
}

TEST_CASE("gp sample determinism") {
    GpPathSpec spec;
    spec.knot_count = 50;
    spec.seed = 123;
    const auto a = sample_gp_path(spec);
    const auto b = sample_gp_path(spec);
    REQUIRE(a.size() == 50);
    CHECK(a == b);

    spec.seed = 124;
    const auto c = sample_gp_path(spec);
    CHECK(a != c);
}

TEST_CASE("gp marginal variance near 1") {
    const std::size_t draws = 2000;
    std::vector<double> sums(50, 0.0);
    std::vector<double> sq(50, 0.0);
    GpPathSpec spec;
    spec.knot_count = 50;
    for (std::size_t s = 0; s < draws; ++s) {
        spec.seed = s;
        const auto path = sample_gp_path(spec);
        for (std::size_t k = 0; k < 50; ++k) {
            sums[k] += path[k];
            sq[k] += path[k] * path[k];
        }
    }
    for (std::size_t k = 0; k < 50; ++k) {
        const double mean = sums[k] / draws;
        const double var = sq[k] / draws - mean * mean;
        CHECK(var > 0.85);
        CHECK(var < 1.15);
    }
}

TEST_CASE("gp cholesky jitter escalation at singular scale") {
    // 1000 knots with bandwidth 0.1 make the Gram matrix numerically singular
    // at the starting jitter; the sampler must still factor it.
    GpSampler sampler(1000, 0.1, 1e-8);
    CHECK(sampler.applied_jitter() <= 1e-4);
    Rng rng(5);
    const auto path = sampler.sample(rng);
    CHECK(path.size() == 1000);
    for (double v : path) CHECK(std::isfinite(v));
}

TEST_CASE("gp spec validation") {
    CHECK_THROWS_AS(GpSampler(0, 0.1, 1e-8), std::invalid_argument);
    CHECK_THROWS_AS(GpSampler(10, 0.0, 1e-8), std::invalid_argument);
    CHECK_THROWS_AS(GpSampler(10, 0.1, 0.0), std::invalid_argument);
}

TEST_CASE("rng gaussian moments") {
    Rng rng(2024);
    double sum = 0.0;
    double sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double g = rng.gaussian();
        sum += g;
        sq += g * g;
    }
    CHECK(std::abs(sum / n) < 0.02);
    CHECK(sq / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("matvec and transpose") {
    const Matrix m = from_rows({{1, 2, 3}, {4, 5, 6}});
    const std::vector<double> x{1, 1, 1};
    const auto y = matvec(m, x);
    CHECK(y == std::vector<double>{6, 15});
    const std::vector<double> u{1, 1};
    const auto z = matvec_transposed(m, u);
    CHECK(z == std::vector<double>{5, 7, 9});
}
