#include "odegen/lipfun.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "odegen/errors.hpp"
#include "odegen/resnet.hpp"

namespace odegen::lipfun {

namespace {

constexpr double kMembershipSlack = 1e-12;
constexpr std::size_t kGridGuard = 24;   // max |G_x| the enumerator accepts

bool finite_row(const std::vector<double>& row) {
    return std::all_of(row.begin(), row.end(),
                       [](double v) { return std::isfinite(v); });
}

}  // namespace

ParamFunction ParamFunction::constant(std::vector<double> value) {
    ParamFunction f;
    f.m = value.size();
    f.knots = {0.0, 1.0};
    f.values.push_back(value);
    f.values.push_back(std::move(value));
    return f;
}

void ParamFunction::validate() const {
    if (m == 0) throw std::invalid_argument("ParamFunction: m must be positive");
    if (knots.size() < 2) throw std::invalid_argument("ParamFunction: need at least 2 knots");
    if (knots.front() != 0.0 || knots.back() != 1.0)
        throw std::invalid_argument("ParamFunction: knots must start at 0 and end at 1");
    for (std::size_t k = 1; k < knots.size(); ++k) {
        if (!(knots[k] > knots[k - 1]))
            throw std::invalid_argument("ParamFunction: knots must be strictly increasing");
    }
    if (values.size() != knots.size())
        throw std::invalid_argument("ParamFunction: one value row per knot required");
    for (const auto& row : values) {
        if (row.size() != m) throw std::invalid_argument("ParamFunction: value row length != m");
        if (!finite_row(row)) throw std::invalid_argument("ParamFunction: non-finite value");
    }
}

void ParamClassSpec::validate() const {
    if (m == 0) throw std::invalid_argument("ParamClassSpec: m must be positive");
    if (!(R_Theta >= 1.0)) throw std::invalid_argument("ParamClassSpec: R_Theta must be >= 1");
    if (K_Theta < 0.0) throw std::invalid_argument("ParamClassSpec: K_Theta must be >= 0");
    if (!(K_f >= 1.0)) throw std::invalid_argument("ParamClassSpec: K_f must be >= 1");
    if (M < 0.0) throw std::invalid_argument("ParamClassSpec: M must be >= 0");
    if (!(R_X > 0.0) || !(R_Y > 0.0) || !(K_loss > 0.0))
        throw std::invalid_argument("ParamClassSpec: R_X, R_Y, K_loss must be positive");
}

std::vector<double> eval(const ParamFunction& f, double t) {
    if (t < 0.0 || t > 1.0) throw std::invalid_argument("eval: t outside [0,1]");
    const auto it = std::upper_bound(f.knots.begin(), f.knots.end(), t);
    std::size_t hi = static_cast<std::size_t>(it - f.knots.begin());
    if (hi == f.knots.size()) return f.values.back();   // t == 1
    if (hi == 0) return f.values.front();
    const std::size_t lo = hi - 1;
    if (f.knots[lo] == t) return f.values[lo];
    const double w = (t - f.knots[lo]) / (f.knots[hi] - f.knots[lo]);
    std::vector<double> out(f.m);
    for (std::size_t i = 0; i < f.m; ++i) {
        out[i] = f.values[lo][i] + w * (f.values[hi][i] - f.values[lo][i]);
    }
    return out;
}

double norm_1_inf(const ParamFunction& f) {
    auto l1_at = [&](std::size_t seg, double t) {
        // l1 sum interpolated inside segment seg = [knots[seg], knots[seg+1]]
        const double w = (t - f.knots[seg]) / (f.knots[seg + 1] - f.knots[seg]);
        double acc = 0.0;
        for (std::size_t i = 0; i < f.m; ++i) {
            acc += std::abs(f.values[seg][i] + w * (f.values[seg + 1][i] - f.values[seg][i]));
        }
        return acc;
    };

    double best = 0.0;
    for (std::size_t k = 0; k < f.knots.size(); ++k) {
        double acc = 0.0;
        for (double v : f.values[k]) acc += std::abs(v);
        best = std::max(best, acc);
    }
    // The l1 sum is piecewise linear between coordinate sign changes, so the sup
    // can only be attained there or at knots.
    for (std::size_t seg = 0; seg + 1 < f.knots.size(); ++seg) {
        for (std::size_t i = 0; i < f.m; ++i) {
            const double a = f.values[seg][i];
            const double b = f.values[seg + 1][i];
            if ((a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0)) {
                const double root =
                    f.knots[seg] + (f.knots[seg + 1] - f.knots[seg]) * (a / (a - b));
                best = std::max(best, l1_at(seg, root));
            }
        }
    }
    return best;
}

double lipschitz_constant(const ParamFunction& f) {
    double best = 0.0;
    for (std::size_t seg = 0; seg + 1 < f.knots.size(); ++seg) {
        const double dt = f.knots[seg + 1] - f.knots[seg];
        for (std::size_t i = 0; i < f.m; ++i) {
            best = std::max(best, std::abs(f.values[seg + 1][i] - f.values[seg][i]) / dt);
        }
    }
    return best;
}

MembershipReport check_membership(const ParamFunction& f, const ParamClassSpec& spec) {
    if (f.m != spec.m) throw std::invalid_argument("check_membership: dimension mismatch");
    MembershipReport r;
    r.norm_value = norm_1_inf(f);
    r.norm_bound = spec.R_Theta;
    r.norm_ok = r.norm_value <= spec.R_Theta + kMembershipSlack;
    r.lipschitz_value = lipschitz_constant(f);
    r.lipschitz_bound = spec.K_Theta;
    r.lipschitz_ok = r.lipschitz_value <= spec.K_Theta + kMembershipSlack;
    return r;
}

double cover_log_bound(std::size_t m, double R, double K, double eps) {
    if (m == 0) throw std::invalid_argument("cover_log_bound: m must be >= 1");
    if (!(R > 0.0)) throw std::invalid_argument("cover_log_bound: R must be positive");
    if (!(eps > 0.0)) throw std::invalid_argument("cover_log_bound: eps must be positive");
    if (K < 0.0) throw std::invalid_argument("cover_log_bound: K must be >= 0");
    const double md = static_cast<double>(m);
    return md * std::log(16.0 * md * R / eps) + md * md * K * std::log(4.0) / eps;
}

namespace {

void make_grids(double R, double K, double eps,
                std::vector<double>& grid_x, std::vector<double>& grid_y) {
    grid_x.clear();
    grid_y.clear();
    if (K > 0.0) {
        const double q = 2.0 * K / eps;
        const auto k_max = static_cast<std::size_t>(std::ceil(q - 1e-12));
        for (std::size_t k = 0; k <= k_max; ++k) {
            grid_x.push_back(static_cast<double>(k) * eps / (2.0 * K));
        }
    }
    const auto y_count = static_cast<std::size_t>(std::floor(4.0 * R / eps + 1e-12));
    for (std::size_t k = 1; k <= y_count; ++k) {
        grid_y.push_back(-R + static_cast<double>(k) * eps / 2.0);
    }
}

}  // namespace

Cover build_cover(double R, double K, double eps) {
    if (!(R > 0.0)) throw std::invalid_argument("build_cover: R must be positive");
    if (!(eps > 0.0)) throw std::invalid_argument("build_cover: eps must be positive");
    if (K < 0.0) throw std::invalid_argument("build_cover: K must be >= 0");

    Cover c;
    c.epsilon = eps;
    c.R = R;
    c.K = K;
    make_grids(R, K, eps, c.grid_x, c.grid_y);

    if (K == 0.0) {
        c.members.reserve(c.grid_y.size());
        for (double y : c.grid_y) c.members.push_back(CoverMember{y, 0});
        return c;
    }

    if (c.grid_x.size() > kGridGuard) {
        throw capacity_error("build_cover: kink grid exceeds the enumeration guard");
    }
    const std::uint64_t sign_count = std::uint64_t{1} << c.grid_x.size();
    c.members.reserve(c.grid_y.size() * sign_count);
    for (double y : c.grid_y) {
        for (std::uint64_t bits = 0; bits < sign_count; ++bits) {
            c.members.push_back(CoverMember{y, static_cast<std::uint32_t>(bits)});
        }
    }
    return c;
}

double Cover::member_value(std::size_t index, double t) const {
    const CoverMember& mem = members.at(index);
    if (K == 0.0 || grid_x.size() < 2) return mem.start_value;
    const double spacing = epsilon / (2.0 * K);
    auto piece = static_cast<std::size_t>(t / spacing);
    piece = std::min(piece, grid_x.size() - 2);
    double v = mem.start_value;
    for (std::size_t j = 0; j < piece; ++j) {
        v += mem.slope_sign(j) * (epsilon / 2.0);
    }
    return v + mem.slope_sign(piece) * K * (t - grid_x[piece]);
}

ParamFunction Cover::member_function(std::size_t index) const {
    ParamFunction f;
    f.m = 1;
    if (K == 0.0 || grid_x.size() < 2) {
        return ParamFunction::constant({members.at(index).start_value});
    }
    f.knots.push_back(0.0);
    for (std::size_t j = 1; j < grid_x.size() && grid_x[j] < 1.0; ++j) {
        f.knots.push_back(grid_x[j]);
    }
    f.knots.push_back(1.0);
    for (double t : f.knots) f.values.push_back({member_value(index, t)});
    return f;
}

namespace {

double scalar_eval(const ParamFunction& f, double t) {
    return eval(f, t)[0];
}

// Exact nearest constant: sup|f - c| over [0,1] is attained at f's knots.
NearestResult nearest_constant(const Cover& c, const ParamFunction& f) {
    NearestResult best{0, std::numeric_limits<double>::infinity()};
    for (std::size_t idx = 0; idx < c.members.size(); ++idx) {
        double d = 0.0;
        for (std::size_t k = 0; k < f.knots.size(); ++k) {
            d = std::max(d, std::abs(f.values[k][0] - c.members[idx].start_value));
        }
        if (d < best.distance) best = {idx, d};
    }
    return best;
}

// Depth-first search over (start, sign-prefix) with sup-distance pruning. The
// distance restricted to the pieces seen so far lower-bounds the full sup, so a
// prefix already worse than the incumbent can be dropped wholesale.
class NearestSearch {
public:
    NearestSearch(const Cover& c, const ParamFunction& f) : cover_(c), f_(f) {
        const auto& gx = cover_.grid_x;
        piece_count_ = gx.size() - 1;
        pts_.resize(piece_count_);
        fvals_.resize(piece_count_);
        for (std::size_t j = 0; j < piece_count_; ++j) {
            const double left = gx[j];
            const double right = std::min(gx[j + 1], 1.0);
            for (double knot : f_.knots) {
                if (knot > left && knot < right) pts_[j].push_back(knot);
            }
            pts_[j].push_back(right);
            for (double t : pts_[j]) fvals_[j].push_back(scalar_eval(f_, t));
            if (right >= 1.0) {
                piece_count_ = j + 1;
                break;
            }
        }
        pts_.resize(piece_count_);
        fvals_.resize(piece_count_);
    }

    NearestResult run() {
        const double f0 = f_.values.front()[0];
        std::vector<std::size_t> order(cover_.grid_y.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return std::abs(cover_.grid_y[a] - f0) < std::abs(cover_.grid_y[b] - f0);
        });
        for (std::size_t yi : order) {
            const double start = cover_.grid_y[yi];
            const double d0 = std::abs(f0 - start);
            if (d0 >= best_dist_) continue;
            descend(yi, 0, start, 0u, d0);
        }
        return {best_index_, best_dist_};
    }

private:
    void descend(std::size_t yi, std::size_t piece, double left_value,
                 std::uint32_t bits, double dist_so_far) {
        if (piece == piece_count_) {
            if (dist_so_far < best_dist_) {
                best_dist_ = dist_so_far;
                best_index_ = yi * (std::uint64_t{1} << cover_.grid_x.size()) + bits;
            }
            return;
        }
        const double left = cover_.grid_x[piece];
        // Try the sign tracking f first so the incumbent tightens quickly.
        const double f_right = fvals_[piece].back();
        const int first_sign = (f_right >= left_value) ? +1 : -1;
        for (int attempt = 0; attempt < 2; ++attempt) {
            const int sign = attempt == 0 ? first_sign : -first_sign;
            double d = dist_so_far;
            for (std::size_t p = 0; p < pts_[piece].size(); ++p) {
                const double mv = left_value + sign * cover_.K * (pts_[piece][p] - left);
                d = std::max(d, std::abs(fvals_[piece][p] - mv));
                if (d >= best_dist_) break;
            }
            if (d >= best_dist_) continue;
            // Node values advance by eps/2 steps, matching member_value's
            // prefix sums exactly.
            const double next_left_value =
                left_value + sign * (cover_.epsilon / 2.0);
            const std::uint32_t next_bits =
                sign > 0 ? (bits | (1u << piece)) : bits;
            descend(yi, piece + 1, next_left_value, next_bits, d);
        }
    }

    const Cover& cover_;
    const ParamFunction& f_;
    std::size_t piece_count_ = 0;
    std::vector<std::vector<double>> pts_;     // evaluation points per piece
    std::vector<std::vector<double>> fvals_;   // f at those points
    double best_dist_ = std::numeric_limits<double>::infinity();
    std::uint64_t best_index_ = 0;
};

}  // namespace

NearestResult nearest_member(const Cover& c, const ParamFunction& f) {
    if (c.members.empty()) throw std::invalid_argument("nearest_member: empty cover");
    if (f.m != 1) throw std::invalid_argument("nearest_member: f must be one-dimensional");
    f.validate();
    if (c.K == 0.0 || c.grid_x.size() < 2) return nearest_constant(c, f);
    NearestSearch search(c, f);
    NearestResult r = search.run();
    return {static_cast<std::size_t>(r.index), r.distance};
}

double ProductCover::log_size() const {
    return static_cast<double>(m) * std::log(static_cast<double>(coordinate_cover.size()));
}

ProductCover build_product_cover(std::size_t m, double R, double K, double eps) {
    if (m < 1 || m > 2)
        throw std::invalid_argument("build_product_cover: only m in {1, 2} is enumerable");
    ProductCover pc;
    pc.epsilon = eps;
    pc.m = m;
    pc.coordinate_cover = build_cover(R, K, eps / static_cast<double>(m));
    return pc;
}

namespace {

ParamFunction extract_coordinate(const ParamFunction& f, std::size_t i) {
    ParamFunction out;
    out.m = 1;
    out.knots = f.knots;
    out.values.reserve(f.values.size());
    for (const auto& row : f.values) out.values.push_back({row[i]});
    return out;
}

}  // namespace

ProductNearestResult nearest_product_member(const ProductCover& c,
                                            const ParamFunction& f) {
    if (f.m != c.m) throw std::invalid_argument("nearest_product_member: dimension mismatch");
    f.validate();

    ProductNearestResult result;
    result.indices.reserve(c.m);
    for (std::size_t i = 0; i < c.m; ++i) {
        result.indices.push_back(
            nearest_member(c.coordinate_cover, extract_coordinate(f, i)).index);
    }

    // |f_i - g_i| is convex between breakpoints, so the sup of the sum sits at
    // the union of f's knots and the coordinate net's kinks.
    std::vector<double> points = f.knots;
    for (double x : c.coordinate_cover.grid_x) {
        if (x > 0.0 && x < 1.0) points.push_back(x);
    }
    for (double t : points) {
        const std::vector<double> ft = eval(f, t);
        double acc = 0.0;
        for (std::size_t i = 0; i < c.m; ++i) {
            acc += std::abs(ft[i] - c.coordinate_cover.member_value(result.indices[i], t));
        }
        result.distance = std::max(result.distance, acc);
    }
    return result;
}

ParamFunction embed_weights(const odegen::resnet::WeightTensor& w) {
    const std::size_t L = w.depth();
    const std::size_t d = w.width();
    if (L < 1 || d < 1) throw std::invalid_argument("embed_weights: empty tensor");
    ParamFunction f;
    f.m = d * d;
    f.knots.resize(L + 1);
    f.values.resize(L + 1);
    for (std::size_t k = 0; k <= L; ++k) {
        f.knots[k] = static_cast<double>(k) / static_cast<double>(L);
        const Matrix& layer = w.layer(k == 0 ? 0 : k - 1);   // value at 0 duplicates 1/L
        f.values[k] = layer.data;
    }
    f.knots.back() = 1.0;
    return f;
}

ParamFunction subtract(const ParamFunction& a, const ParamFunction& b) {
    if (a.m != b.m) throw std::invalid_argument("subtract: dimension mismatch");
    std::vector<double> knots;
    knots.reserve(a.knots.size() + b.knots.size());
    std::merge(a.knots.begin(), a.knots.end(), b.knots.begin(), b.knots.end(),
               std::back_inserter(knots));
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

    ParamFunction out;
    out.m = a.m;
    out.knots = std::move(knots);
    out.values.reserve(out.knots.size());
    for (double t : out.knots) {
        std::vector<double> va = eval(a, t);
        const std::vector<double> vb = eval(b, t);
        for (std::size_t i = 0; i < va.size(); ++i) va[i] -= vb[i];
        out.values.push_back(std::move(va));
    }
    return out;
}

ParamFunction random_member(const ParamClassSpec& spec, Rng& rng) {
    constexpr std::size_t kKnots = 17;
    ParamFunction f;
    f.m = spec.m;
    f.knots.resize(kKnots);
    f.values.assign(kKnots, std::vector<double>(spec.m, 0.0));
    for (std::size_t k = 0; k < kKnots; ++k) {
        f.knots[k] = static_cast<double>(k) / static_cast<double>(kKnots - 1);
    }
    f.knots.back() = 1.0;
    const double md = static_cast<double>(spec.m);
    for (std::size_t i = 0; i < spec.m; ++i) {
        f.values[0][i] = rng.uniform(-spec.R_Theta / md, spec.R_Theta / md);
    }
    for (std::size_t k = 1; k < kKnots; ++k) {
        const double dt = f.knots[k] - f.knots[k - 1];
        for (std::size_t i = 0; i < spec.m; ++i) {
            const double slope = rng.uniform(-spec.K_Theta, spec.K_Theta);
            f.values[k][i] = f.values[k - 1][i] + slope * dt;
        }
    }
    const double norm = norm_1_inf(f);
    if (norm > spec.R_Theta && norm > 0.0) {
        const double scale = spec.R_Theta / norm;
        for (auto& row : f.values) {
            for (double& v : row) v *= scale;
        }
    }
    return f;
}

// ---- text serialization ----------------------------------------------------

void write_function(std::ostream& os, const ParamFunction& f) {
    os.precision(17);
    os << "paramfn " << f.m << ' ' << f.knots.size() << '\n';
    for (std::size_t k = 0; k < f.knots.size(); ++k) {
        os << f.knots[k];
        for (double v : f.values[k]) os << ' ' << v;
        os << '\n';
    }
}

ParamFunction read_function(std::istream& is) {
    std::string tag;
    std::size_t m = 0;
    std::size_t knot_count = 0;
    if (!(is >> tag >> m >> knot_count) || tag != "paramfn") {
        throw format_error("expected 'paramfn <m> <knots>' header", 0);
    }
    ParamFunction f;
    f.m = m;
    f.knots.resize(knot_count);
    f.values.assign(knot_count, std::vector<double>(m, 0.0));
    for (std::size_t k = 0; k < knot_count; ++k) {
        if (!(is >> f.knots[k])) throw format_error("truncated knot row", 0);
        for (std::size_t i = 0; i < m; ++i) {
            if (!(is >> f.values[k][i])) throw format_error("truncated value row", 0);
        }
    }
    f.validate();
    return f;
}

void write_cover(std::ostream& os, const Cover& c) {
    os.precision(17);
    os << "cover " << c.epsilon << ' ' << c.R << ' ' << c.K << ' '
       << c.grid_x.size() << ' ' << c.grid_y.size() << ' ' << c.members.size() << '\n';
    for (const CoverMember& mem : c.members) {
        os << mem.start_value << ' ';
        if (c.grid_x.empty()) {
            os << '-';
        } else {
            for (std::size_t j = 0; j < c.grid_x.size(); ++j) {
                os << (mem.slope_sign(j) > 0 ? '+' : '-');
            }
        }
        os << '\n';
    }
}

Cover read_cover(std::istream& is) {
    std::string tag;
    Cover c;
    std::size_t gx = 0;
    std::size_t gy = 0;
    std::size_t count = 0;
    if (!(is >> tag >> c.epsilon >> c.R >> c.K >> gx >> gy >> count) || tag != "cover") {
        throw format_error("expected 'cover <eps> <R> <K> <|Gx|> <|Gy|> <n>' header", 0);
    }
    make_grids(c.R, c.K, c.epsilon, c.grid_x, c.grid_y);
    if (c.grid_x.size() != gx || c.grid_y.size() != gy) {
        throw format_error("cover header grids inconsistent with (R, K, eps)", 0);
    }
    c.members.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        CoverMember mem;
        std::string signs;
        if (!(is >> mem.start_value >> signs)) throw format_error("truncated member row", 0);
        if (!c.grid_x.empty()) {
            if (signs.size() != c.grid_x.size())
                throw format_error("member sign string has wrong length", 0);
            for (std::size_t j = 0; j < signs.size(); ++j) {
                if (signs[j] == '+') mem.sign_bits |= (1u << j);
            }
        }
        c.members.push_back(mem);
    }
    return c;
}

}  // namespace odegen::lipfun
