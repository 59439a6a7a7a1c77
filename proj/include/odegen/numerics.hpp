#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace odegen {

// Dense row-major matrix of doubles. All kernels in the project run on this type.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    static Matrix identity(std::size_t n);

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    bool empty() const { return rows == 0 || cols == 0; }
    bool same_shape(const Matrix& other) const {
        return rows == other.rows && cols == other.cols;
    }
    bool all_finite() const;
};

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(const Matrix& m, double s);
Matrix& operator+=(Matrix& a, const Matrix& b);
Matrix& operator*=(Matrix& m, double s);

// y = m x
std::vector<double> matvec(const Matrix& m, std::span<const double> x);
// y = m^T x
std::vector<double> matvec_transposed(const Matrix& m, std::span<const double> x);
// rank-one update: m += s * u v^T
void add_outer(Matrix& m, double s, std::span<const double> u, std::span<const double> v);

double dot(std::span<const double> a, std::span<const double> b);
double norm_l2(std::span<const double> v);

// Sum of absolute values of all entries.
double norm_11(const Matrix& m);
// Element-wise maximum norm.
double norm_max(const Matrix& m);
// l1 norm of the l2 norms of the columns.
double norm_21(const Matrix& m);
double frobenius_norm(const Matrix& m);

// Largest singular value via power iteration on m^T m. The start vector is the first
// canonical basis vector; a seeded random restart kicks in if the iterate collapses.
// Throws convergence_error (carrying the last estimate) after max_iters.
double spectral_norm(const Matrix& m, double tol = 1e-9, std::size_t max_iters = 1000);

// Deterministic RNG. Gaussians come from an explicit Box-Muller transform so that
// streams are reproducible across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform();                       // [0, 1)
    double uniform(double a, double b);     // [a, b)
    double gaussian();                      // standard normal
    std::uint64_t next_u64() { return gen_(); }
    std::size_t index(std::size_t n);       // uniform in [0, n)

private:
    std::mt19937_64 gen_;
};

struct GpPathSpec {
    std::size_t knot_count = 1;   // L; knots sit at k/L for k = 1..L
    double bandwidth = 0.1;       // RBF length-scale
    double jitter = 1e-8;         // initial diagonal jitter
    std::uint64_t seed = 0;
};

// Factors the RBF Gram matrix on the knots once, then draws any number of paths.
// Jitter escalates x10 up to 1e-4 before giving up with numerical_error.
class GpSampler {
public:
    GpSampler(std::size_t knot_count, double bandwidth, double jitter);

    std::size_t knot_count() const { return chol_.rows; }
    double applied_jitter() const { return jitter_; }
    std::vector<double> sample(Rng& rng) const;

    static Matrix kernel_matrix(std::size_t knot_count, double bandwidth, double jitter);

private:
    Matrix chol_;   // lower-triangular factor
    double jitter_;
};

// One zero-mean GP sample at the knots, deterministic given spec.seed.
std::vector<double> sample_gp_path(const GpPathSpec& spec);

}  // namespace odegen
