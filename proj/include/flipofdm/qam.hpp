#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "flipofdm/numerics.hpp"

namespace flipofdm::qam {

/// Square M-QAM with per-axis Gray labeling, normalized to unit average
/// symbol energy. A symbol label packs the in-phase axis bits in the high
/// half and the quadrature axis bits in the low half, MSB first.
struct Constellation {
    int order = 0;
    int bits_per_symbol = 0;
    int levels_per_axis = 0;
    int bits_per_axis = 0;
    double scale = 0.0;  // spacing factor giving E[|s|^2] = 1
    std::vector<std::complex<double>> points;  // indexed by symbol label

    static Constellation make(int order) {
        if (order != 4 && order != 16 && order != 64 && order != 256)
            throw std::domain_error("qam: order must be one of 4, 16, 64, 256");
        Constellation c;
        c.order = order;
        c.bits_per_symbol = static_cast<int>(std::lround(std::log2(order)));
        c.bits_per_axis = c.bits_per_symbol / 2;
        c.levels_per_axis = 1 << c.bits_per_axis;
        c.scale = std::sqrt(3.0 / (2.0 * (order - 1)));
        c.points.resize(order);
        for (int label = 0; label < order; ++label) {
            const int gi = label >> c.bits_per_axis;
            const int gq = label & (c.levels_per_axis - 1);
            c.points[label] = {c.axis_level(gi), c.axis_level(gq)};
        }
        return c;
    }

    /// Coordinate carried by a per-axis Gray label.
    double axis_level(int gray_label) const {
        const int idx = gray_to_binary(gray_label);
        return scale * (2 * idx - (levels_per_axis - 1));
    }

    static int binary_to_gray(int b) { return b ^ (b >> 1); }

    static int gray_to_binary(int g) {
        int b = g;
        for (int shift = 1; shift < 16; shift <<= 1) b ^= b >> shift;
        return b;
    }
};

namespace detail {

/// Nearest-level decision on one axis, returning the Gray label. A midpoint
/// (up to a few ulps, so rounding noise cannot flip the rule) resolves to
/// the candidate with the smaller label.
inline int slice_axis(double coord, const Constellation& c) {
    const int levels = c.levels_per_axis;
    const double u = (coord / c.scale + (levels - 1)) / 2.0;  // fractional level index
    if (u <= 0.0) return Constellation::binary_to_gray(0);
    if (u >= levels - 1) return Constellation::binary_to_gray(levels - 1);
    const double fl = std::floor(u);
    if (std::abs((u - fl) - 0.5) <= 1e-9) {
        const int lo = static_cast<int>(fl);
        const int glo = Constellation::binary_to_gray(lo);
        const int ghi = Constellation::binary_to_gray(lo + 1);
        return glo < ghi ? glo : ghi;
    }
    const int idx = static_cast<int>(std::lround(u));
    return Constellation::binary_to_gray(idx);
}

}  // namespace detail

/// Map a bit sequence (length divisible by log2 M) to symbols.
inline std::vector<std::complex<double>> modulate(const std::vector<int>& bits,
                                                  const Constellation& c) {
    if (bits.size() % static_cast<std::size_t>(c.bits_per_symbol) != 0)
        throw std::domain_error("qam::modulate: bit count not divisible by bits per symbol");
    std::vector<std::complex<double>> out;
    out.reserve(bits.size() / c.bits_per_symbol);
    for (std::size_t i = 0; i < bits.size(); i += c.bits_per_symbol) {
        int label = 0;
        for (int b = 0; b < c.bits_per_symbol; ++b) {
            const int bit = bits[i + b];
            if (bit != 0 && bit != 1)
                throw std::domain_error("qam::modulate: bits must be 0 or 1");
            label = (label << 1) | bit;
        }
        out.push_back(c.points[label]);
    }
    return out;
}

/// Minimum-distance demapping back to bits; exact inverse of modulate in the
/// noiseless case.
inline std::vector<int> demodulate(const std::vector<std::complex<double>>& symbols,
                                   const Constellation& c) {
    std::vector<int> bits;
    bits.reserve(symbols.size() * c.bits_per_symbol);
    for (const auto& s : symbols) {
        const int gi = detail::slice_axis(s.real(), c);
        const int gq = detail::slice_axis(s.imag(), c);
        const int label = (gi << c.bits_per_axis) | gq;
        for (int b = c.bits_per_symbol - 1; b >= 0; --b) bits.push_back((label >> b) & 1);
    }
    return bits;
}

/// Exact Gray-coded square M-QAM bit error rate in AWGN, snr linear
/// (per-symbol energy over complex noise power). Per-axis erfc sum over the
/// PAM error distances of every bit position; reduces to Q(sqrt(snr)) for
/// order 4 and to 0.5 at snr 0.
inline double analytic_ber(int order, double snr) {
    if (order != 4 && order != 16 && order != 64 && order != 256)
        throw std::domain_error("qam::analytic_ber: unsupported order");
    if (!(snr >= 0.0)) throw std::domain_error("qam::analytic_ber: snr must be >= 0");
    if (std::isinf(snr)) return 0.0;
    const int levels = static_cast<int>(std::lround(std::sqrt(order)));
    const int bits_per_axis = static_cast<int>(std::lround(std::log2(levels)));
    const double a = std::sqrt(1.5 * snr / (order - 1));
    double total = 0.0;
    for (int k = 1; k <= bits_per_axis; ++k) {
        double pk = 0.0;
        for (int i = 0; i < levels - (levels >> k); ++i) {
            const int shifted = i << (k - 1);
            const int sign = ((shifted / levels) & 1) ? -1 : 1;
            const int weight = (1 << (k - 1)) - (2 * shifted + levels) / (2 * levels);
            pk += sign * weight * numerics::erfc((2.0 * i + 1.0) * a);
        }
        total += pk / levels;
    }
    return total / bits_per_axis;
}

}  // namespace flipofdm::qam
