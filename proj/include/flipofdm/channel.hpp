#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "flipofdm/numerics.hpp"
#include "flipofdm/spectral.hpp"

namespace flipofdm::channel {

/// Nonnegative FIR taps with unit energy plus the AWGN level. Taps are
/// renormalized on construction; was_renormalized lets a caller surface a
/// warning when the input energy was off by more than 1e-9.
struct ChannelModel {
    std::vector<double> taps;
    double sigma_z = 0.0;
    bool was_renormalized = false;

    static ChannelModel make(std::vector<double> taps, double sigma_z) {
        if (taps.empty()) throw std::domain_error("ChannelModel: need at least one tap");
        if (!(sigma_z >= 0.0)) throw std::domain_error("ChannelModel: sigma_z must be >= 0");
        double energy = 0.0;
        for (double t : taps) {
            if (!(t >= 0.0)) throw std::domain_error("ChannelModel: taps must be >= 0");
            energy += t * t;
        }
        if (energy <= 0.0) throw std::domain_error("ChannelModel: taps must carry energy");
        ChannelModel ch;
        ch.was_renormalized = std::abs(energy - 1.0) > 1e-9;
        const double scale = 1.0 / std::sqrt(energy);
        for (double& t : taps) t *= scale;
        ch.taps = std::move(taps);
        ch.sigma_z = sigma_z;
        return ch;
    }
};

/// Linear convolution with the taps (same-length output, so the leading
/// transient falls inside the cyclic prefix region) plus per-sample AWGN.
inline std::vector<double> apply(const ChannelModel& ch, const std::vector<double>& x,
                                 numerics::Rng& rng) {
    std::vector<double> y(x.size());
    const std::size_t nt = ch.taps.size();
    for (std::size_t i = 0; i < x.size(); ++i) {
        double acc = 0.0;
        const std::size_t mmax = std::min(nt - 1, i);
        for (std::size_t m = 0; m <= mmax; ++m) acc += ch.taps[m] * x[i - m];
        y[i] = acc + rng.gaussian(ch.sigma_z);
    }
    return y;
}

/// Equivalent electrical SNR sigma_x^2 / (2 sigma_z^2); +infinity when
/// noiseless.
inline double equivalent_snr(double sigma_x, double sigma_z) {
    if (!(sigma_x >= 0.0) || !(sigma_z >= 0.0))
        throw std::domain_error("equivalent_snr: sigmas must be >= 0");
    if (sigma_z == 0.0) return numerics::inf;
    return (sigma_x * sigma_x) / (2.0 * sigma_z * sigma_z);
}

/// H_n = sum_m taps[m] exp(-j 2 pi n m / N); the transfer function seen by
/// bin n after cyclic-prefix removal (no 1/N factor).
inline spectral::ComplexVector frequency_response(const ChannelModel& ch, std::size_t n_fft) {
    if (!spectral::is_power_of_two(n_fft))
        throw std::domain_error("frequency_response: fft size must be a power of two");
    spectral::ComplexVector h(n_fft);
    for (std::size_t n = 0; n < n_fft; ++n) {
        std::complex<double> acc = 0.0;
        for (std::size_t m = 0; m < ch.taps.size(); ++m) {
            const double ang = -2.0 * numerics::pi * static_cast<double>(n) *
                               static_cast<double>(m) / static_cast<double>(n_fft);
            acc += ch.taps[m] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        h[n] = acc;
    }
    return h;
}

}  // namespace flipofdm::channel
