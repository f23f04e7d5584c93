#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace flipofdm {

/// Thrown when an iterative numeric routine exhausts its budget. Carries the
/// best estimate reached so far so callers can decide whether to proceed.
class numeric_error : public std::runtime_error {
public:
    numeric_error(const std::string& what, double best_estimate)
        : std::runtime_error(what), best_estimate_(best_estimate) {}

    double best_estimate() const noexcept { return best_estimate_; }

private:
    double best_estimate_;
};

namespace numerics {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double sqrt2 = 1.41421356237309504880;
inline constexpr double sqrt_2pi = 2.50662827463100050242;
inline constexpr double inf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Random numbers
// ---------------------------------------------------------------------------

/// splitmix64 finalizer; used to derive independent stream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic random stream addressed by (seed, stream_id). Streams with
/// distinct ids are derived through splitmix64 mixing, so a simulation can
/// hand stream k to worker k and get results independent of scheduling.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream_id = 0)
        : seed_(seed), stream_id_(stream_id), engine_(mix(seed, stream_id)) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    /// One sample of N(0, sigma^2). sigma = 0 degenerates to 0.
    double gaussian(double sigma) {
        if (!(sigma >= 0.0))
            throw std::domain_error("Rng::gaussian: sigma must be >= 0");
        if (sigma == 0.0) return 0.0;
        return sigma * normal_(engine_);
    }

    /// Uniform double in [0, 1).
    double uniform() {
        return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
    }

    /// One equiprobable bit.
    int bit() { return static_cast<int>(engine_() & 1u); }

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream_id) {
        std::uint64_t s = seed;
        std::uint64_t a = splitmix64(s);
        s ^= 0x9e3779b97f4a7c15ULL * (stream_id + 1);
        std::uint64_t b = splitmix64(s);
        return a ^ (b << 32 | b >> 32);
    }

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Free function form of Rng::gaussian.
inline double gaussian_sample(Rng& rng, double sigma) { return rng.gaussian(sigma); }

// ---------------------------------------------------------------------------
// erfc
// ---------------------------------------------------------------------------

namespace detail {

// Maclaurin series for erf, adequate below the continued-fraction cutoff.
inline double erf_series(double x) {
    const double x2 = x * x;
    double term = x;
    double sum = x;
    for (int j = 1; j < 300; ++j) {
        term *= -x2 / j;
        const double add = term / (2 * j + 1);
        sum += add;
        if (std::abs(add) < std::abs(sum) * 1e-17) break;
    }
    return sum * 1.12837916709551257390;  // 2/sqrt(pi)
}

// Legendre continued fraction for erfc evaluated through its convergents.
// Converges quickly for x >= 2; paired with the series below that point.
inline double erfc_fraction(double x) {
    double a = 1.0, b = x;
    double c = x, d = x * x + 0.5;
    double q1 = 0.0, q2 = b / d;
    double n = 1.0;
    for (int it = 0; it < 400; ++it) {
        double t = a * n + b * x;
        a = b;
        b = t;
        t = c * n + d * x;
        c = d;
        d = t;
        n += 0.5;
        q1 = q2;
        q2 = b / d;
        if (std::abs(q1 - q2) <= std::abs(q2) * 1e-17) break;
        if (std::abs(b) > 1e250) {  // rescale convergent pair to avoid overflow
            a *= 1e-250;
            b *= 1e-250;
            c *= 1e-250;
            d *= 1e-250;
        }
    }
    return q2 * std::exp(-x * x) * 0.56418958354775628695;  // 1/sqrt(pi)
}

}  // namespace detail

/// Complementary error function, relative error below 1e-12 over |u| <= 10.
inline double erfc(double u) {
    if (!std::isfinite(u)) throw std::domain_error("erfc: argument must be finite");
    if (u < 0.0) return 2.0 - erfc(-u);
    if (u < 2.2) return 1.0 - detail::erf_series(u);
    if (u > 26.5) return 0.0;  // value underflows past ~1e-308
    return detail::erfc_fraction(u);
}

// ---------------------------------------------------------------------------
// Adaptive quadrature (Gauss-Kronrod 7-15 with bisection refinement)
// ---------------------------------------------------------------------------

/// Accuracy/truncation policy shared by every quadrature-backed routine.
struct QuadratureSpec {
    double relative_tolerance = 1e-6;
    double truncation_sigmas = 10.0;  // half-infinite integrals cut at lo + this * scale

    void validate() const {
        if (!(relative_tolerance > 0.0))
            throw std::domain_error("QuadratureSpec: relative_tolerance must be > 0");
        if (!(truncation_sigmas >= 8.0))
            throw std::domain_error("QuadratureSpec: truncation_sigmas must be >= 8");
    }
};

namespace detail {

// Kronrod-15 abscissae (positive half) and weights; the odd-indexed
// abscissae form the embedded Gauss-7 rule.
inline constexpr double kron_x[8] = {
    0.0,
    0.2077849550078985, 0.4058451513773972, 0.5860872354676911,
    0.7415311855993945, 0.8648644233597691, 0.9491079123427585,
    0.9914553711208126};
inline constexpr double kron_w[8] = {
    0.2094821410847278,
    0.2044329400752989, 0.1903505780647854, 0.1690047266392679,
    0.1406532597155259, 0.1047900103222502, 0.0630920926299785,
    0.0229353220105292};
inline constexpr double gauss_w[4] = {
    0.4179591836734694, 0.3818300505051189, 0.2797053914892767,
    0.1294849661688697};

struct Panel {
    double a, b, integral, error;
};

template <class F>
Panel eval_panel(F&& f, double a, double b) {
    const double h = 0.5 * (b - a);
    const double m = 0.5 * (a + b);
    double ik = 0.0, ig = 0.0;
    {
        const double fm = f(m);
        ik += kron_w[0] * fm;
        ig += gauss_w[0] * fm;
    }
    for (int i = 1; i < 8; ++i) {
        const double dx = h * kron_x[i];
        const double fs = f(m - dx) + f(m + dx);
        ik += kron_w[i] * fs;
        if (i % 2 == 0) ig += gauss_w[i / 2] * fs;
    }
    ik *= h;
    ig *= h;
    return Panel{a, b, ik, std::abs(ik - ig)};
}

}  // namespace detail

/// Integrate f over [lower, upper]. upper may be +infinity, in which case the
/// domain is truncated at lower + truncation_sigmas * scale_hint. A positive
/// scale_hint also seeds the initial subdivision so features of that width
/// cannot slip between quadrature nodes.
template <class F>
double integrate_1d(F&& f, double lower, double upper,
                    const QuadratureSpec& spec = {}, double scale_hint = 0.0) {
    spec.validate();
    if (std::isnan(lower) || std::isnan(upper) || std::isinf(lower))
        throw std::domain_error("integrate_1d: bad bounds");
    if (std::isinf(upper)) {
        const double s = scale_hint > 0.0 ? scale_hint : 1.0;
        upper = lower + spec.truncation_sigmas * s;
    }
    if (!(lower <= upper)) throw std::domain_error("integrate_1d: lower > upper");
    if (lower == upper) return 0.0;

    constexpr std::size_t max_panels = 4000;
    std::size_t initial = 1;
    if (scale_hint > 0.0) {
        const double want = (upper - lower) / (4.0 * scale_hint);
        initial = static_cast<std::size_t>(std::clamp(std::ceil(want), 1.0, 64.0));
    }

    std::vector<detail::Panel> panels;
    panels.reserve(256);
    for (std::size_t i = 0; i < initial; ++i) {
        const double a = lower + (upper - lower) * static_cast<double>(i) / initial;
        const double b = lower + (upper - lower) * static_cast<double>(i + 1) / initial;
        panels.push_back(detail::eval_panel(f, a, b));
    }

    auto by_error = [](const detail::Panel& p, const detail::Panel& q) {
        return p.error < q.error;
    };
    std::make_heap(panels.begin(), panels.end(), by_error);

    double total = 0.0, err = 0.0;
    for (const auto& p : panels) {
        total += p.integral;
        err += p.error;
    }
    if (!std::isfinite(total))
        throw numeric_error("integrate_1d: integrand produced non-finite values", total);

    while (err > spec.relative_tolerance * std::max(std::abs(total), 1e-300)) {
        if (panels.size() >= max_panels)
            throw numeric_error("integrate_1d: panel budget exhausted", total);
        std::pop_heap(panels.begin(), panels.end(), by_error);
        detail::Panel worst = panels.back();
        panels.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b)
            throw numeric_error("integrate_1d: interval underflow", total);
        detail::Panel left = detail::eval_panel(f, worst.a, mid);
        detail::Panel right = detail::eval_panel(f, mid, worst.b);
        total += left.integral + right.integral - worst.integral;
        err += left.error + right.error - worst.error;
        if (!std::isfinite(total))
            throw numeric_error("integrate_1d: integrand produced non-finite values", total);
        panels.push_back(left);
        std::push_heap(panels.begin(), panels.end(), by_error);
        panels.push_back(right);
        std::push_heap(panels.begin(), panels.end(), by_error);
    }
    // Drift-free final sum; the incremental updates above only steer refinement.
    total = 0.0;
    for (const auto& p : panels) total += p.integral;
    return total;
}

// ---------------------------------------------------------------------------
// Scalar minimization (golden section)
// ---------------------------------------------------------------------------

struct MinimizeResult {
    double argmin = 0.0;
    double value = 0.0;
    bool at_boundary = false;
};

/// Golden-section search on [lower, upper]. Assumes unimodality; a monotone f
/// resolves to the corresponding endpoint with at_boundary set. tol is
/// relative to the bracket width.
template <class F>
MinimizeResult minimize_scalar(F&& f, double lower, double upper, double tol = 1e-4) {
    if (!(lower < upper)) throw std::domain_error("minimize_scalar: need lower < upper");
    if (!(tol > 0.0)) throw std::domain_error("minimize_scalar: tol must be > 0");

    const double invphi = 0.61803398874989484820;
    const double width = upper - lower;
    double a = lower, b = upper;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol * width) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    double xm = fc < fd ? c : d;
    double fm = std::min(fc, fd);

    const double flo = f(lower);
    const double fhi = f(upper);
    if (fhi <= fm && fhi <= flo) return {upper, fhi, true};
    if (flo <= fm) return {lower, flo, true};
    const bool near_edge = (xm - lower) <= tol * width || (upper - xm) <= tol * width;
    return {xm, fm, near_edge};
}

}  // namespace numerics
}  // namespace flipofdm
