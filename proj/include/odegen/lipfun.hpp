#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "odegen/numerics.hpp"

namespace odegen::resnet {
struct WeightTensor;
}

namespace odegen::lipfun {

// Piecewise-linear path [0,1] -> R^m: values interpolated between strictly
// increasing knots, the first at 0 and the last at 1.
struct ParamFunction {
    std::size_t m = 0;
    std::vector<double> knots;
    std::vector<std::vector<double>> values;   // one length-m row per knot

    static ParamFunction constant(std::vector<double> value);
    void validate() const;   // throws std::invalid_argument on a broken invariant
};

// Constants defining the parameter class: bound R_Theta on the (1,inf)-norm,
// per-coordinate Lipschitz constant K_Theta, plus the problem constants carried
// along to the certificates.
struct ParamClassSpec {
    std::size_t m = 1;
    double R_Theta = 1.0;
    double K_Theta = 0.0;
    double K_f = 1.0;       // must be >= 1
    double M = 1.0;
    double R_X = 1.0;
    double R_Y = 1.0;
    double K_loss = 1.0;

    void validate() const;
};

struct MembershipReport {
    bool norm_ok = false;
    bool lipschitz_ok = false;
    double norm_value = 0.0;
    double norm_bound = 0.0;
    double lipschitz_value = 0.0;
    double lipschitz_bound = 0.0;

    bool member() const { return norm_ok && lipschitz_ok; }
};

// One cover member: a start value on the G_y grid and one slope sign per G_x
// grid point. Signs are packed in a bitmask (the enumeration guard keeps
// |G_x| <= 24); bit j set means slope +K on the piece starting at G_x[j].
struct CoverMember {
    double start_value = 0.0;
    std::uint32_t sign_bits = 0;

    int slope_sign(std::size_t piece) const {
        return (sign_bits >> piece) & 1u ? +1 : -1;
    }
};

struct Cover {
    double epsilon = 0.0;
    double R = 0.0;
    double K = 0.0;
    std::vector<double> grid_x;          // kink grid (empty when K == 0)
    std::vector<double> grid_y;          // start-value grid
    std::vector<CoverMember> members;

    std::size_t size() const { return members.size(); }
    // Member value at t in [0,1].
    double member_value(std::size_t index, double t) const;
    // Member realized as a ParamFunction on [0,1] (m = 1).
    ParamFunction member_function(std::size_t index) const;
};

struct NearestResult {
    std::size_t index = 0;
    double distance = 0.0;
};

// Linear interpolation of f at t in [0,1].
std::vector<double> eval(const ParamFunction& f, double t);

// sup_t sum_i |f_i(t)|, computed exactly at knots and coordinate zero crossings.
double norm_1_inf(const ParamFunction& f);

// Largest per-coordinate slope magnitude.
double lipschitz_constant(const ParamFunction& f);

MembershipReport check_membership(const ParamFunction& f, const ParamClassSpec& spec);

// log of the covering-number bound: m log(16 m R / eps) + m^2 K log(4) / eps.
double cover_log_bound(std::size_t m, double R, double K, double eps);

// Constructive eps-net for the one-dimensional class (bound R, Lipschitz K).
// Throws capacity_error when the kink grid would exceed the enumeration guard.
Cover build_cover(double R, double K, double eps);

// Member minimizing the exact sup distance to a one-dimensional f.
NearestResult nearest_member(const Cover& c, const ParamFunction& f);

// Cartesian product of eps/m one-dimensional nets; the coordinate net is
// shared since coordinates are exchangeable. Members are index tuples and are
// not materialized.
struct ProductCover {
    double epsilon = 0.0;
    std::size_t m = 1;
    Cover coordinate_cover;   // net at radius eps/m

    double log_size() const;
};

struct ProductNearestResult {
    std::vector<std::size_t> indices;   // one coordinate-cover index per coordinate
    double distance = 0.0;              // exact (1,inf) distance to that member
};

// Supported for m <= 2 under the same enumeration guard.
ProductCover build_product_cover(std::size_t m, double R, double K, double eps);

// Per-coordinate nearest members, then the exact (1,inf) distance to the
// resulting product member.
ProductNearestResult nearest_product_member(const ProductCover& c,
                                            const ParamFunction& f);

// phi: weight tensor -> piecewise-affine path with m = d*d, value at k/L the
// row-major flattening of layer k, and the value at 0 duplicating the one at 1/L.
ParamFunction embed_weights(const odegen::resnet::WeightTensor& w);

// Pointwise difference on the union of the two knot sets (exact for
// piecewise-linear inputs).
ParamFunction subtract(const ParamFunction& a, const ParamFunction& b);

// Random member of the class: 17-knot piecewise-linear path with per-coordinate
// slopes uniform in [-K,K], rescaled onto the (1,inf)-ball when needed.
ParamFunction random_member(const ParamClassSpec& spec, Rng& rng);

// Line-oriented text format (documented in the README).
void write_function(std::ostream& os, const ParamFunction& f);
ParamFunction read_function(std::istream& is);
void write_cover(std::ostream& os, const Cover& c);
Cover read_cover(std::istream& is);

}  // namespace odegen::lipfun
