#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "flipofdm/numerics.hpp"
#include "flipofdm/qam.hpp"

using namespace flipofdm;

namespace {

std::vector<int> random_bits(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    std::vector<int> bits(n);
    for (auto& b : bits) b = static_cast<int>(eng() & 1);
    return bits;
}

std::vector<int> label_bits(int label, int width) {
    std::vector<int> bits(width);
    for (int b = 0; b < width; ++b) bits[b] = (label >> (width - 1 - b)) & 1;
    return bits;
}

// Exhaustive minimum-distance reference, breaking ties toward the lower label.
int nearest_label(const qam::Constellation& c, std::complex<double> s) {
    int best = 0;
    double best_d = std::norm(s - c.points[0]);
    for (int l = 1; l < c.order; ++l) {
        const double d = std::norm(s - c.points[l]);
        if (d < best_d - 1e-15) {
            best = l;
            best_d = d;
        } else if (std::abs(d - best_d) <= 1e-15 && l < best) {
            best = l;
        }
    }
    return best;
}

}  // namespace

TEST_CASE("constellations have unit average energy", "[qam]") {
    for (int order : {4, 16, 64, 256}) {
        auto c = qam::Constellation::make(order);
        double e = 0.0;
        for (const auto& p : c.points) e += std::norm(p);
        REQUIRE_THAT(e / order, Catch::Matchers::WithinAbs(1.0, 1e-12));
    }
    // Monte Carlo over random bit patterns reaches the same average.
    auto c16 = qam::Constellation::make(16);
    auto syms = qam::modulate(random_bits(400'000, 5), c16);
    double e = 0.0;
    for (const auto& s : syms) e += std::norm(s);
    e /= static_cast<double>(syms.size());
    REQUIRE_THAT(e, Catch::Matchers::WithinAbs(1.0, 0.01));
}

TEST_CASE("qpsk maps two-bit labels to unit-magnitude points", "[qam]") {
    auto c = qam::Constellation::make(4);
    std::vector<int> bits = {0, 0, 0, 1, 1, 1, 1, 0};
    auto syms = qam::modulate(bits, c);
    REQUIRE(syms.size() == 4);
    for (const auto& s : syms) REQUIRE_THAT(std::abs(s), Catch::Matchers::WithinAbs(1.0, 1e-12));
    // All four points distinct.
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) REQUIRE(std::abs(syms[i] - syms[j]) > 0.5);
}

TEST_CASE("modulate and demodulate are inverse on every label", "[qam]") {
    for (int order : {4, 16, 64, 256}) {
        auto c = qam::Constellation::make(order);
        for (int label = 0; label < order; ++label) {
            auto bits = label_bits(label, c.bits_per_symbol);
            auto syms = qam::modulate(bits, c);
            REQUIRE(qam::demodulate(syms, c) == bits);
        }
    }
}

TEST_CASE("random bit stream round trip", "[qam]") {
    for (int order : {4, 16, 64, 256}) {
        auto c = qam::Constellation::make(order);
        auto bits = random_bits(static_cast<std::size_t>(c.bits_per_symbol) * 1000, order);
        REQUIRE(qam::demodulate(qam::modulate(bits, c), c) == bits);
    }
}

TEST_CASE("nearest neighbors differ in exactly one bit", "[qam]") {
    for (int order : {4, 16, 64, 256}) {
        auto c = qam::Constellation::make(order);
        const double step = 2.0 * c.scale;
        for (int a = 0; a < order; ++a) {
            for (int b = a + 1; b < order; ++b) {
                if (std::abs(std::abs(c.points[a] - c.points[b]) - step) < 1e-9 &&
                    (std::abs(c.points[a].real() - c.points[b].real()) < 1e-9 ||
                     std::abs(c.points[a].imag() - c.points[b].imag()) < 1e-9)) {
                    const int diff = a ^ b;
                    REQUIRE(diff != 0);
                    REQUIRE((diff & (diff - 1)) == 0);  // single bit
                }
            }
        }
    }
}

TEST_CASE("demodulation agrees with exhaustive minimum distance", "[qam]") {
    std::mt19937_64 eng(77);
    std::normal_distribution<double> norm(0.0, 0.35);
    for (int order : {4, 16, 64}) {
        auto c = qam::Constellation::make(order);
        std::uniform_int_distribution<int> pick(0, order - 1);
        for (int trial = 0; trial < 4000; ++trial) {
            const int label = pick(eng);
            const std::complex<double> noisy =
                c.points[label] + std::complex<double>(norm(eng), norm(eng));
            auto got = qam::demodulate({noisy}, c);
            auto expect = label_bits(nearest_label(c, noisy), c.bits_per_symbol);
            REQUIRE(got == expect);
        }
    }
}

TEST_CASE("midway symbols break ties toward the lower label", "[qam]") {
    for (int order : {4, 16, 64}) {
        auto c = qam::Constellation::make(order);
        // Midpoint on the in-phase axis between adjacent levels, quadrature
        // pinned on a valid level.
        for (int idx = 0; idx + 1 < c.levels_per_axis; ++idx) {
            const double x_lo = c.scale * (2 * idx - (c.levels_per_axis - 1));
            const double mid = x_lo + c.scale;
            const double q = c.scale * (1 - c.levels_per_axis + 2 * 0);
            auto bits = qam::demodulate({{mid, q}}, c);
            const int glo = qam::Constellation::binary_to_gray(idx);
            const int ghi = qam::Constellation::binary_to_gray(idx + 1);
            const int want_axis = glo < ghi ? glo : ghi;
            int label = 0;
            for (int b : bits) label = (label << 1) | b;
            REQUIRE((label >> c.bits_per_axis) == want_axis);
        }
    }
}

TEST_CASE("analytic ber formula checks", "[qam]") {
    REQUIRE_THAT(qam::analytic_ber(4, 0.0), Catch::Matchers::WithinRel(0.5, 1e-12));

    // 0.375 * erfc(sqrt(10)), erfc via the quadrature oracle.
    numerics::QuadratureSpec tight;
    tight.relative_tolerance = 1e-13;
    const double u = std::sqrt(10.0);
    const double erfc_oracle =
        1.1283791670955126 *
        numerics::integrate_1d([](double t) { return std::exp(-t * t); }, u,
                               numerics::inf, tight, 1.0);
    REQUIRE_THAT(qam::analytic_ber(16, 100.0),
                 Catch::Matchers::WithinRel(0.375 * erfc_oracle, 1e-10));

    // Multi-term region: every order degrades to coin flipping at snr 0, and
    // the low-snr values match an independent evaluation of the per-axis sum.
    for (int order : {4, 16, 64, 256})
        REQUIRE_THAT(qam::analytic_ber(order, 0.0),
                     Catch::Matchers::WithinRel(0.5, 1e-12));
    REQUIRE_THAT(qam::analytic_ber(16, 1.0),
                 Catch::Matchers::WithinRel(0.28728002614203281, 1e-10));
    REQUIRE_THAT(qam::analytic_ber(64, 10.0),
                 Catch::Matchers::WithinRel(0.15254643327547163, 1e-10));
    REQUIRE_THAT(qam::analytic_ber(256, 50.0),
                 Catch::Matchers::WithinRel(0.10853086387330561, 1e-10));

    // Monotone decreasing in snr for every order.
    for (int order : {4, 16, 64, 256}) {
        double prev = 1.0;
        for (double snr = 0.0; snr <= 1000.0; snr += 50.0) {
            const double p = qam::analytic_ber(order, snr);
            REQUIRE(p <= prev);
            prev = p;
        }
    }
    REQUIRE(qam::analytic_ber(16, numerics::inf) == 0.0);
    REQUIRE_THROWS_AS(qam::analytic_ber(8, 1.0), std::domain_error);
    REQUIRE_THROWS_AS(qam::analytic_ber(16, -1.0), std::domain_error);
}

TEST_CASE("symbol-level awgn ber matches the analytic curve", "[qam]") {
    // Direct constellation-plus-noise simulation; per-symbol snr equals
    // 1/(2 sigma^2) with unit symbol energy and complex noise of variance
    // 2 sigma^2.
    std::mt19937_64 eng(2025);
    std::normal_distribution<double> norm(0.0, 1.0);
    struct Case {
        int order;
        double snr_db;
    };
    for (const Case& tc : {Case{4, 7.0}, Case{16, 2.0}, Case{16, 12.0}, Case{64, 4.0}}) {
        auto c = qam::Constellation::make(tc.order);
        const double snr = std::pow(10.0, tc.snr_db / 10.0);
        const double sigma = std::sqrt(1.0 / (2.0 * snr));
        long long errors = 0, bits_sent = 0;
        while (errors < 400) {
            auto bits = random_bits(static_cast<std::size_t>(c.bits_per_symbol) * 500,
                                    eng());
            auto syms = qam::modulate(bits, c);
            for (auto& s : syms) s += std::complex<double>(sigma * norm(eng), sigma * norm(eng));
            auto got = qam::demodulate(syms, c);
            for (std::size_t i = 0; i < bits.size(); ++i) errors += bits[i] != got[i];
            bits_sent += static_cast<long long>(bits.size());
        }
        const double p = static_cast<double>(errors) / static_cast<double>(bits_sent);
        const double expect = qam::analytic_ber(tc.order, snr);
        const double se = std::sqrt(expect * (1.0 - expect) / static_cast<double>(bits_sent));
        REQUIRE(std::abs(p - expect) < 3.0 * se);
    }
}

TEST_CASE("modulate input validation", "[qam]") {
    auto c = qam::Constellation::make(16);
    REQUIRE_THROWS_AS(qam::modulate({1, 0, 1}, c), std::domain_error);
    REQUIRE_THROWS_AS(qam::modulate({1, 0, 2, 0}, c), std::domain_error);
    REQUIRE_THROWS_AS(qam::Constellation::make(32), std::domain_error);
}
