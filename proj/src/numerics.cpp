#include "odegen/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "odegen/errors.hpp"

namespace odegen {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

bool Matrix::all_finite() const {
    return std::all_of(data.begin(), data.end(),
                       [](double v) { return std::isfinite(v); });
}

Matrix operator+(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("matrix shape mismatch in +");
    Matrix out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
    return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("matrix shape mismatch in -");
    Matrix out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= b.data[i];
    return out;
}

Matrix operator*(const Matrix& m, double s) {
    Matrix out = m;
    for (double& v : out.data) v *= s;
    return out;
}

Matrix& operator+=(Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("matrix shape mismatch in +=");
    for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i];
    return a;
}

Matrix& operator*=(Matrix& m, double s) {
    for (double& v : m.data) v *= s;
    return m;
}

std::vector<double> matvec(const Matrix& m, std::span<const double> x) {
    if (x.size() != m.cols) throw std::invalid_argument("matvec size mismatch");
    std::vector<double> y(m.rows, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        double acc = 0.0;
        const double* row = m.data.data() + i * m.cols;
        for (std::size_t j = 0; j < m.cols; ++j) acc += row[j] * x[j];
        y[i] = acc;
    }
    return y;
}

std::vector<double> matvec_transposed(const Matrix& m, std::span<const double> x) {
    if (x.size() != m.rows) throw std::invalid_argument("matvec_transposed size mismatch");
    std::vector<double> y(m.cols, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double* row = m.data.data() + i * m.cols;
        const double xi = x[i];
        for (std::size_t j = 0; j < m.cols; ++j) y[j] += row[j] * xi;
    }
    return y;
}

void add_outer(Matrix& m, double s, std::span<const double> u, std::span<const double> v) {
    if (u.size() != m.rows || v.size() != m.cols)
        throw std::invalid_argument("add_outer size mismatch");
    for (std::size_t i = 0; i < m.rows; ++i) {
        double* row = m.data.data() + i * m.cols;
        const double su = s * u[i];
        for (std::size_t j = 0; j < m.cols; ++j) row[j] += su * v[j];
    }
}

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double norm_l2(std::span<const double> v) {
    return std::sqrt(dot(v, v));
}

double norm_11(const Matrix& m) {
    if (m.empty()) throw std::invalid_argument("norm_11 of empty matrix");
    double acc = 0.0;
    for (double v : m.data) acc += std::abs(v);
    return acc;
}

double norm_max(const Matrix& m) {
    if (m.empty()) throw std::invalid_argument("norm_max of empty matrix");
    double acc = 0.0;
    for (double v : m.data) acc = std::max(acc, std::abs(v));
    return acc;
}

double norm_21(const Matrix& m) {
    if (m.empty()) throw std::invalid_argument("norm_21 of empty matrix");
    double acc = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < m.rows; ++i) col += m(i, j) * m(i, j);
        acc += std::sqrt(col);
    }
    return acc;
}

double frobenius_norm(const Matrix& m) {
    double acc = 0.0;
    for (double v : m.data) acc += v * v;
    return std::sqrt(acc);
}

double spectral_norm(const Matrix& m, double tol, std::size_t max_iters) {
    if (m.empty()) throw std::invalid_argument("spectral_norm of empty matrix");
    if (!m.all_finite()) throw std::invalid_argument("spectral_norm of non-finite matrix");
    if (norm_max(m) == 0.0) return 0.0;

    std::vector<double> v(m.cols, 0.0);
    v[0] = 1.0;

    double sigma_prev = -1.0;
    double sigma = 0.0;
    bool restarted = false;
    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        std::vector<double> u = matvec(m, v);
        sigma = norm_l2(u);
        std::vector<double> w = matvec_transposed(m, u);
        const double wn = norm_l2(w);
        if (wn < 1e-300) {
            // Start vector fell in the null space; restart once from a seeded direction.
            if (restarted) return 0.0;
            restarted = true;
            Rng rng(0x9e3779b97f4a7c15ull);
            double vn = 0.0;
            while (vn == 0.0) {
                for (double& c : v) c = rng.gaussian();
                vn = norm_l2(v);
            }
            for (double& c : v) c /= vn;
            sigma_prev = -1.0;
            continue;
        }
        for (std::size_t j = 0; j < v.size(); ++j) v[j] = w[j] / wn;
        if (sigma_prev >= 0.0 &&
            std::abs(sigma - sigma_prev) <= tol * std::max(sigma, 1e-300)) {
            return sigma;
        }
        sigma_prev = sigma;
    }
    throw convergence_error("power iteration did not converge", sigma);
}

double Rng::uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double a, double b) {
    return a + (b - a) * uniform();
}

double Rng::gaussian() {
    // Box-Muller; u1 bounded away from 0 so the log is finite.
    double u1 = 0.0;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

std::size_t Rng::index(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
}

namespace {

// In-place lower Cholesky; false on a non-positive pivot.
bool cholesky(Matrix& a) {
    const std::size_t n = a.rows;
    for (std::size_t j = 0; j < n; ++j) {
        double diag = a(j, j);
        for (std::size_t k = 0; k < j; ++k) diag -= a(j, k) * a(j, k);
        if (diag <= 0.0 || !std::isfinite(diag)) return false;
        const double ljj = std::sqrt(diag);
        a(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double acc = a(i, j);
            for (std::size_t k = 0; k < j; ++k) acc -= a(i, k) * a(j, k);
            a(i, j) = acc / ljj;
        }
        for (std::size_t k = j + 1; k < n; ++k) a(j, k) = 0.0;
    }
    return true;
}

}  // namespace

Matrix GpSampler::kernel_matrix(std::size_t knot_count, double bandwidth, double jitter) {
    if (knot_count < 1) throw std::invalid_argument("knot_count must be >= 1");
    if (bandwidth <= 0.0) throw std::invalid_argument("bandwidth must be positive");
    if (jitter <= 0.0) throw std::invalid_argument("jitter must be positive");
    const double L = static_cast<double>(knot_count);
    Matrix k(knot_count, knot_count);
    for (std::size_t a = 0; a < knot_count; ++a) {
        const double ta = static_cast<double>(a + 1) / L;
        for (std::size_t b = 0; b < knot_count; ++b) {
            const double tb = static_cast<double>(b + 1) / L;
            const double d = ta - tb;
            k(a, b) = std::exp(-d * d / (2.0 * bandwidth * bandwidth));
        }
        k(a, a) += jitter;
    }
    return k;
}

GpSampler::GpSampler(std::size_t knot_count, double bandwidth, double jitter) {
    double j = jitter;
    while (true) {
        Matrix k = kernel_matrix(knot_count, bandwidth, j);
        if (cholesky(k)) {
            chol_ = std::move(k);
            jitter_ = j;
            return;
        }
        if (j >= 1e-4) {
            throw numerical_error("RBF Gram matrix is not positive definite after jitter escalation");
        }
        j *= 10.0;
    }
}

std::vector<double> GpSampler::sample(Rng& rng) const {
    const std::size_t n = chol_.rows;
    std::vector<double> z(n);
    for (double& v : z) v = rng.gaussian();
    std::vector<double> path(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k <= i; ++k) acc += chol_(i, k) * z[k];
        path[i] = acc;
    }
    return path;
}

std::vector<double> sample_gp_path(const GpPathSpec& spec) {
    GpSampler sampler(spec.knot_count, spec.bandwidth, spec.jitter);
    Rng rng(spec.seed);
    return sampler.sample(rng);
}

}  // namespace odegen
