#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "flipofdm/channel.hpp"
#include "flipofdm/detection.hpp"
#include "flipofdm/numerics.hpp"
#include "flipofdm/spectral.hpp"

namespace flipofdm::flip {

using spectral::ComplexVector;

struct FlipConfig {
    std::size_t fft_size = 0;
    std::size_t cp_len = 0;

    void validate() const {
        if (!spectral::is_power_of_two(fft_size) || fft_size < 4)
            throw std::domain_error("FlipConfig: fft_size must be a power of two >= 4");
        if (cp_len > fft_size)
            throw std::domain_error("FlipConfig: cp_len must not exceed fft_size");
    }
};

/// Payload symbols carried by one frame of size N: bins 1 .. N/2-1.
inline std::size_t subcarrier_count(std::size_t fft_size) { return fft_size / 2 - 1; }

/// Hermitian frame spectrum: DC and Nyquist forced to zero, payload on the
/// lower bins, complex conjugates mirrored onto the upper bins so the time
/// signal is real.
inline ComplexVector build_frame(const ComplexVector& payload, std::size_t fft_size) {
    if (!spectral::is_power_of_two(fft_size) || fft_size < 4)
        throw std::domain_error("build_frame: fft_size must be a power of two >= 4");
    if (payload.size() != subcarrier_count(fft_size))
        throw std::domain_error("build_frame: payload must hold fft_size/2 - 1 symbols");
    ComplexVector spectrum(fft_size, {0.0, 0.0});
    for (std::size_t n = 1; n < fft_size / 2; ++n) {
        spectrum[n] = payload[n - 1];
        spectrum[fft_size - n] = std::conj(payload[n - 1]);
    }
    return spectrum;
}

inline ComplexVector extract_payload(const ComplexVector& spectrum) {
    if (!spectral::is_power_of_two(spectrum.size()))
        throw std::domain_error("extract_payload: size must be a power of two");
    ComplexVector payload(subcarrier_count(spectrum.size()));
    for (std::size_t n = 1; n < spectrum.size() / 2; ++n) payload[n - 1] = spectrum[n];
    return payload;
}

/// Real bipolar time signal of a Hermitian spectrum (unscaled inverse
/// transform). Rejects spectra whose inverse has a non-negligible imaginary
/// part instead of silently dropping it.
inline std::vector<double> to_bipolar(const ComplexVector& spectrum) {
    const ComplexVector t = spectral::inverse_dft(spectrum);
    double scale = 0.0;
    for (const auto& v : t) scale = std::max(scale, std::abs(v.real()));
    std::vector<double> x(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (std::abs(t[k].imag()) > 1e-9 * (1.0 + scale))
            throw std::domain_error("to_bipolar: spectrum is not Hermitian");
        x[k] = t[k].real();
    }
    return x;
}

/// One unipolar half of a frame: a cyclic prefix copied from the body tail,
/// then the body itself. negative marks the flipped half.
struct UnipolarSubframe {
    std::vector<double> cp;
    std::vector<double> body;
    bool negative = false;

    std::vector<double> wire() const {
        std::vector<double> w;
        w.reserve(cp.size() + body.size());
        w.insert(w.end(), cp.begin(), cp.end());
        w.insert(w.end(), body.begin(), body.end());
        return w;
    }
};

struct FramePair {
    UnipolarSubframe positive;  // max(x, 0)
    UnipolarSubframe flipped;   // max(-x, 0), transmitted second
};

/// Polarity split x = xp - xn with xp, xn >= 0 and xp * xn = 0 samplewise.
inline std::pair<std::vector<double>, std::vector<double>> split_flip(
    const std::vector<double>& x) {
    std::vector<double> xp(x.size()), xn(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        xp[k] = x[k] > 0.0 ? x[k] : 0.0;
        xn[k] = x[k] < 0.0 ? -x[k] : 0.0;
    }
    return {std::move(xp), std::move(xn)};
}

inline UnipolarSubframe make_subframe(std::vector<double> body, std::size_t cp_len,
                                      bool negative) {
    if (cp_len > body.size())
        throw std::domain_error("make_subframe: cp_len exceeds body length");
    UnipolarSubframe sf;
    sf.cp.assign(body.end() - static_cast<std::ptrdiff_t>(cp_len), body.end());
    sf.body = std::move(body);
    sf.negative = negative;
    return sf;
}

inline FramePair make_frame_pair(const std::vector<double>& x, std::size_t cp_len) {
    auto [xp, xn] = split_flip(x);
    FramePair pair;
    pair.positive = make_subframe(std::move(xp), cp_len, false);
    pair.flipped = make_subframe(std::move(xn), cp_len, true);
    return pair;
}

/// Full transmit chain: payload symbols -> Hermitian spectrum -> bipolar
/// signal -> two unipolar subframes with cyclic prefixes, concatenated on
/// the wire (positive half first).
inline std::vector<double> flip_transmit(const ComplexVector& payload,
                                         const FlipConfig& cfg) {
    cfg.validate();
    const ComplexVector spectrum = build_frame(payload, cfg.fft_size);
    const std::vector<double> x = to_bipolar(spectrum);
    const FramePair pair = make_frame_pair(x, cfg.cp_len);
    std::vector<double> wire = pair.positive.wire();
    const std::vector<double> second = pair.flipped.wire();
    wire.insert(wire.end(), second.begin(), second.end());
    return wire;
}

inline std::vector<double> recombine(const std::vector<double>& y1,
                                     const std::vector<double>& y2) {
    if (y1.size() != y2.size()) throw std::domain_error("recombine: length mismatch");
    std::vector<double> y(y1.size());
    for (std::size_t k = 0; k < y.size(); ++k) y[k] = y1[k] - y2[k];
    return y;
}

/// Recombination with the configured detector stage applied to the received
/// subframe pair. Received samples can be negative because of noise; the
/// clipper stages restore nonnegativity before combining.
inline std::vector<double> detect_recombine(const std::vector<double>& y1,
                                            const std::vector<double>& y2,
                                            const detection::ResolvedDetector& det) {
    switch (det.stages) {
        case detection::DetectorStage::plain:
            return recombine(y1, y2);
        case detection::DetectorStage::clipper:
            return recombine(detection::negative_clip(y1), detection::negative_clip(y2));
        case detection::DetectorStage::clipper_plus_threshold:
            return detection::apply_threshold_filter(detection::negative_clip(y1),
                                                     detection::negative_clip(y2),
                                                     det.threshold);
    }
    throw std::domain_error("detect_recombine: unknown detector stage");
}

/// Full receive chain for one frame: slice the two subframes off the wire,
/// drop the prefixes, recombine through the detector, take one forward
/// transform, and zero-force the payload bins against the channel response.
inline ComplexVector flip_receive(const std::vector<double>& wire, const FlipConfig& cfg,
                                  const channel::ChannelModel& ch,
                                  const detection::ResolvedDetector& det) {
    cfg.validate();
    const std::size_t n = cfg.fft_size;
    const std::size_t stride = n + cfg.cp_len;
    if (wire.size() != 2 * stride)
        throw std::domain_error("flip_receive: wire must hold two prefixed subframes");

    std::vector<double> y1(wire.begin() + static_cast<std::ptrdiff_t>(cfg.cp_len),
                           wire.begin() + static_cast<std::ptrdiff_t>(stride));
    std::vector<double> y2(wire.begin() + static_cast<std::ptrdiff_t>(stride + cfg.cp_len),
                           wire.begin() + static_cast<std::ptrdiff_t>(2 * stride));

    const std::vector<double> y = detect_recombine(y1, y2, det);
    const ComplexVector spectrum = spectral::forward_dft(y);
    const ComplexVector h = channel::frequency_response(ch, n);

    ComplexVector payload(subcarrier_count(n));
    for (std::size_t bin = 1; bin < n / 2; ++bin) {
        if (std::abs(h[bin]) < 1e-12)
            throw numeric_error("flip_receive: channel null on a payload bin", 0.0);
        payload[bin - 1] = spectrum[bin] / h[bin];
    }
    return payload;
}

}  // namespace flipofdm::flip
