#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "odegen/errors.hpp"
#include "odegen/lipfun.hpp"
#include "odegen/resnet.hpp"

using namespace odegen;
using namespace odegen::lipfun;

namespace {

ParamFunction make_fn(std::vector<double> knots, std::vector<std::vector<double>> values) {
    ParamFunction f;
    f.m = values.front().size();
    f.knots = std::move(knots);
    f.values = std::move(values);
    f.validate();
    return f;
}

ParamFunction scale_fn(ParamFunction f, double s) {
    for (auto& row : f.values) {
        for (double& v : row) v *= s;
    }
    return f;
}

ParamFunction add_fn(const ParamFunction& a, const ParamFunction& b) {
    return subtract(a, scale_fn(b, -1.0));
}

}  // namespace

TEST_CASE("eval") {
    const ParamFunction c = ParamFunction::constant({2.0, -1.0});
    CHECK(eval(c, 0.3) == std::vector<double>{2.0, -1.0});

    const ParamFunction f = make_fn({0.0, 1.0}, {{0.0}, {2.0}});
    CHECK(eval(f, 0.25)[0] == doctest::Approx(0.5));
    CHECK(eval(f, 0.0)[0] == 0.0);
    CHECK(eval(f, 1.0)[0] == 2.0);

    const ParamFunction g = make_fn({0.0, 0.5, 1.0}, {{1.0}, {-1.0}, {1.0}});
    CHECK(eval(g, 0.5)[0] == -1.0);   // stored knot value, exactly

    CHECK_THROWS_AS(eval(f, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(eval(f, 1.1), std::invalid_argument);
}

TEST_CASE("norm_1_inf") {
    CHECK(norm_1_inf(ParamFunction::constant({1.0, -2.0})) == doctest::Approx(3.0));

    const ParamFunction zigzag = make_fn({0.0, 0.5, 1.0}, {{1.0}, {-1.0}, {1.0}});
    CHECK(norm_1_inf(zigzag) == doctest::Approx(1.0));

    // theta(t) = (t, 1 - t): the l1 sum is identically 1.
    const ParamFunction cross = make_fn({0.0, 1.0}, {{0.0, 1.0}, {1.0, 0.0}});
    CHECK(norm_1_inf(cross) == doctest::Approx(1.0).epsilon(1e-12));

    // Dense-grid sup oracle.
    double dense = 0.0;
    for (int i = 0; i <= 10000; ++i) {
        const auto v = eval(cross, i / 10000.0);
        dense = std::max(dense, std::abs(v[0]) + std::abs(v[1]));
    }
    CHECK(std::abs(norm_1_inf(cross) - dense) < 1e-12);
}

TEST_CASE("norm_1_inf dense-grid oracle on random functions") {
    Rng rng(11);
    ParamClassSpec spec;
    spec.m = 3;
    spec.R_Theta = 2.0;
    spec.K_Theta = 3.0;
    for (int trial = 0; trial < 50; ++trial) {
        const ParamFunction f = random_member(spec, rng);
        double dense = 0.0;
        for (int i = 0; i <= 20000; ++i) {
            const auto v = eval(f, i / 20000.0);
            double acc = 0.0;
            for (double x : v) acc += std::abs(x);
            dense = std::max(dense, acc);
        }
        const double exact = norm_1_inf(f);
        CHECK(exact >= dense - 1e-9);
        CHECK(exact <= dense + 1e-6);
    }
}

TEST_CASE("lipschitz_constant") {
    CHECK(lipschitz_constant(ParamFunction::constant({4.0})) == 0.0);
    CHECK(lipschitz_constant(make_fn({0.0, 1.0}, {{0.0}, {3.0}})) == doctest::Approx(3.0));
    CHECK(lipschitz_constant(make_fn({0.0, 0.5, 1.0}, {{0.0}, {1.0}, {1.0}})) ==
          doctest::Approx(2.0));
}

TEST_CASE("check_membership") {
    ParamClassSpec spec;
    spec.m = 2;
    spec.R_Theta = 1.5;
    spec.K_Theta = 2.0;

    CHECK(check_membership(ParamFunction::constant({0.0, 0.0}), spec).member());

    // Boundary: constant (R_Theta, 0).
    const auto boundary = check_membership(ParamFunction::constant({1.5, 0.0}), spec);
    CHECK(boundary.member());
    CHECK(boundary.norm_value == doctest::Approx(1.5));

    // Slope above K_Theta trips only the Lipschitz flag.
    const ParamFunction steep =
        make_fn({0.0, 0.5, 1.0}, {{0.0, 0.0}, {1.5 + 0.25, 0.0}, {0.0, 0.0}});
    const auto report = check_membership(steep, spec);
    CHECK_FALSE(report.lipschitz_ok);
    CHECK(report.lipschitz_value > 2.0);

    CHECK_THROWS_AS(check_membership(ParamFunction::constant({1.0}), spec),
                    std::invalid_argument);
}

TEST_CASE("cover_log_bound") {
    CHECK(cover_log_bound(1, 1.0, 0.0, 1.0) == doctest::Approx(std::log(16.0)));
    CHECK(cover_log_bound(2, 1.0, 1.0, 0.5) ==
          doctest::Approx(2.0 * std::log(64.0) + 8.0 * std::log(4.0)));
    // eps equal to 16 m R collapses the log term with K = 0.
    CHECK(cover_log_bound(1, 1.0, 0.0, 16.0) == doctest::Approx(0.0));
    CHECK_THROWS_AS(cover_log_bound(1, 0.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(cover_log_bound(1, 1.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("build_cover grid sizes") {
    const Cover c = build_cover(1.0, 1.0, 1.0);
    CHECK(c.grid_y.size() == 4);
    CHECK(c.grid_x.size() == 3);
    CHECK(c.size() == 32);
    CHECK(static_cast<double>(c.size()) <= std::exp(cover_log_bound(1, 1.0, 1.0, 1.0)));

    const Cover constants = build_cover(1.0, 0.0, 1.0);
    CHECK(constants.size() == 4);
    for (const CoverMember& m : constants.members) {
        CHECK(m.sign_bits == 0);
    }

    const Cover fine = build_cover(1.0, 1.0, 0.5);
    CHECK(fine.grid_y.size() == 8);
    CHECK(fine.grid_x.size() == 5);
    CHECK(fine.size() == 256);

    CHECK_THROWS_AS(build_cover(1.0, 13.0, 1.0), capacity_error);
    CHECK_THROWS_AS(build_cover(-1.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("cover member realization") {
    const Cover c = build_cover(1.0, 1.0, 1.0);
    // Member 0: start -0.5, all slopes -K.
    CHECK(c.member_value(0, 0.0) == doctest::Approx(-0.5));
    CHECK(c.member_value(0, 0.5) == doctest::Approx(-1.0));
    CHECK(c.member_value(0, 1.0) == doctest::Approx(-1.5));

    for (std::size_t idx : {std::size_t{0}, std::size_t{5}, std::size_t{31}}) {
        const ParamFunction f = c.member_function(idx);
        f.validate();
        for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            CHECK(eval(f, t)[0] == doctest::Approx(c.member_value(idx, t)).epsilon(1e-12));
        }
    }
}

namespace {

// Brute-force oracle: scan every member, sup at the kink union.
std::pair<std::size_t, double> brute_force_nearest(const Cover& c, const ParamFunction& f) {
    std::vector<double> points = f.knots;
    for (double x : c.grid_x) {
        if (x > 0.0 && x < 1.0) points.push_back(x);
    }
    std::size_t best_idx = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t idx = 0; idx < c.size(); ++idx) {
        double dist = 0.0;
        for (double t : points) {
            dist = std::max(dist, std::abs(eval(f, t)[0] - c.member_value(idx, t)));
        }
        if (dist < best) {
            best = dist;
            best_idx = idx;
        }
    }
    return {best_idx, best};
}

}  // namespace

TEST_CASE("nearest_member agrees with brute force") {
    const Cover c = build_cover(1.0, 1.0, 0.5);
    Rng rng(3);
    ParamClassSpec spec;
    spec.m = 1;
    spec.R_Theta = 1.0;
    spec.K_Theta = 1.0;
    for (int trial = 0; trial < 40; ++trial) {
        const ParamFunction f = random_member(spec, rng);
        const NearestResult fast = nearest_member(c, f);
        const auto slow = brute_force_nearest(c, f);
        CHECK(fast.distance == doctest::Approx(slow.second).epsilon(1e-12));
        CHECK(fast.distance <= 0.5 + 1e-12);
    }
}

TEST_CASE("nearest_member exact self match") {
    const Cover c = build_cover(1.0, 1.0, 1.0);
    const ParamFunction member = c.member_function(17);
    const NearestResult r = nearest_member(c, member);
    CHECK(r.distance == doctest::Approx(0.0));
    CHECK(c.member_value(r.index, 0.0) == doctest::Approx(c.member_value(17, 0.0)));

    // Zero function sits within eps of the (R=1, K=1, eps=1) cover.
    const NearestResult zero = nearest_member(c, ParamFunction::constant({0.0}));
    CHECK(zero.distance <= 1.0 + 1e-12);

    CHECK_THROWS_AS(nearest_member(Cover{}, member), std::invalid_argument);
}

TEST_CASE("nearest_member on constant covers") {
    const Cover c = build_cover(1.0, 0.0, 0.5);
    const ParamFunction f = ParamFunction::constant({0.4});
    const NearestResult r = nearest_member(c, f);
    CHECK(r.distance <= 0.25 + 1e-12);
}

TEST_CASE("coverage: random admissible functions within eps") {
    const Cover c = build_cover(1.0, 2.0, 0.25);
    CHECK(c.grid_x.size() == 17);
    CHECK(c.grid_y.size() == 16);
    Rng rng(99);
    ParamClassSpec spec;
    spec.m = 1;
    spec.R_Theta = 1.0;
    spec.K_Theta = 2.0;
    for (int trial = 0; trial < 25; ++trial) {
        const ParamFunction f = random_member(spec, rng);
        CHECK(nearest_member(c, f).distance <= 0.25 + 1e-12);
    }
}

TEST_CASE("product cover for two coordinates") {
    const ProductCover pc = build_product_cover(2, 1.0, 1.0, 1.0);
    CHECK(pc.coordinate_cover.size() == 256);   // the eps/2 net
    CHECK(pc.log_size() == doctest::Approx(2.0 * std::log(256.0)));
    CHECK(pc.log_size() <= cover_log_bound(2, 1.0, 1.0, 1.0));

    Rng rng(404);
    ParamClassSpec spec;
    spec.m = 2;
    spec.R_Theta = 1.0;
    spec.K_Theta = 1.0;
    for (int trial = 0; trial < 50; ++trial) {
        const ParamFunction f = random_member(spec, rng);
        const ProductNearestResult r = nearest_product_member(pc, f);
        REQUIRE(r.indices.size() == 2);
        CHECK(r.distance <= 1.0 + 1e-12);
    }

    // m = 1 wraps the plain construction.
    const ProductCover single = build_product_cover(1, 1.0, 1.0, 1.0);
    CHECK(single.coordinate_cover.size() == 32);

    CHECK_THROWS_AS(build_product_cover(3, 1.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(build_product_cover(2, 1.0, 13.0, 2.0), capacity_error);
}

TEST_CASE("embed_weights") {
    // L = 2, d = 1, W = (2, -3).
    std::vector<Matrix> layers(2, Matrix(1, 1));
    layers[0](0, 0) = 2.0;
    layers[1](0, 0) = -3.0;
    const auto w = resnet::WeightTensor::from_layers(layers);
    const ParamFunction phi = embed_weights(w);
    phi.validate();
    CHECK(phi.m == 1);
    CHECK(eval(phi, 0.0)[0] == 2.0);
    CHECK(eval(phi, 0.5)[0] == 2.0);
    CHECK(eval(phi, 1.0)[0] == -3.0);
    CHECK(norm_1_inf(phi) == doctest::Approx(3.0));
    CHECK(w.norm_11_inf() == doctest::Approx(3.0));

    const auto zero = resnet::WeightTensor::zeros(3, 2);
    CHECK(norm_1_inf(embed_weights(zero)) == 0.0);

    Matrix shared(2, 2);
    shared(0, 1) = 1.5;
    const auto tied = resnet::WeightTensor::tied(4, shared);
    const ParamFunction tied_phi = embed_weights(tied);
    CHECK(lipschitz_constant(tied_phi) == 0.0);
    CHECK(norm_1_inf(tied_phi) == doctest::Approx(1.5));
}

TEST_CASE("embedding isometry and linearity on random tensors") {
    Rng rng(1234);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t d = 1 + rng.index(5);
        const std::size_t L = 2 + rng.index(20);
        const auto a = resnet::iid_init(L, d, 1.0, rng.next_u64());
        const auto b = resnet::iid_init(L, d, 0.5, rng.next_u64());
        CHECK(std::abs(norm_1_inf(embed_weights(a)) - a.norm_11_inf()) <= 1e-12);

        const ParamFunction sum = embed_weights(a + b);
        const ParamFunction ea = embed_weights(a);
        const ParamFunction eb = embed_weights(b);
        for (std::size_t k = 0; k < sum.values.size(); ++k) {
            for (std::size_t i = 0; i < sum.m; ++i) {
                CHECK(sum.values[k][i] == ea.values[k][i] + eb.values[k][i]);
            }
        }
    }
}

TEST_CASE("norm_1_inf is a norm") {
    Rng rng(77);
    ParamClassSpec spec;
    spec.m = 2;
    spec.R_Theta = 2.0;
    spec.K_Theta = 1.0;
    for (int trial = 0; trial < 100; ++trial) {
        const ParamFunction f = random_member(spec, rng);
        const ParamFunction g = random_member(spec, rng);
        const double nf = norm_1_inf(f);
        const double ng = norm_1_inf(g);
        CHECK(norm_1_inf(add_fn(f, g)) <= nf + ng + 1e-10);
        const double s = rng.uniform(-3.0, 3.0);
        CHECK(norm_1_inf(scale_fn(f, s)) == doctest::Approx(std::abs(s) * nf).epsilon(1e-10));
    }
}

TEST_CASE("random_member is admissible") {
    Rng rng(5);
    ParamClassSpec spec;
    spec.m = 3;
    spec.R_Theta = 1.5;
    spec.K_Theta = 2.5;
    for (int trial = 0; trial < 200; ++trial) {
        const ParamFunction f = random_member(spec, rng);
        CHECK(check_membership(f, spec).member());
    }
}

TEST_CASE("text round trips") {
    Rng rng(6);
    ParamClassSpec spec;
    spec.m = 2;
    spec.R_Theta = 1.0;
    spec.K_Theta = 1.0;
    const ParamFunction f = random_member(spec, rng);
    std::stringstream ss;
    write_function(ss, f);
    const ParamFunction g = read_function(ss);
    CHECK(g.m == f.m);
    CHECK(g.knots == f.knots);
    CHECK(g.values == f.values);

    const Cover c = build_cover(1.0, 1.0, 1.0);
    std::stringstream cs;
    write_cover(cs, c);
    const Cover c2 = read_cover(cs);
    CHECK(c2.size() == c.size());
    CHECK(c2.grid_x == c.grid_x);
    CHECK(c2.grid_y == c.grid_y);
    for (std::size_t i = 0; i < c.size(); ++i) {
        CHECK(c2.members[i].start_value == c.members[i].start_value);
        CHECK(c2.members[i].sign_bits == c.members[i].sign_bits);
    }

    std::stringstream bad("banana 1 2\n");
    CHECK_THROWS_AS(read_function(bad), format_error);
}

TEST_CASE("validation rejects broken functions") {
    ParamFunction f;
    f.m = 1;
    f.knots = {0.0, 0.5};   // does not end at 1
    f.values = {{0.0}, {0.0}};
    CHECK_THROWS_AS(f.validate(), std::invalid_argument);

    f.knots = {0.0, 0.5, 0.5, 1.0};
    f.values = {{0.0}, {0.0}, {0.0}, {0.0}};
    CHECK_THROWS_AS(f.validate(), std::invalid_argument);
}
