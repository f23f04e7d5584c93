#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "flipofdm/channel.hpp"
#include "flipofdm/detection.hpp"
#include "flipofdm/flip_ofdm.hpp"
#include "flipofdm/numerics.hpp"
#include "flipofdm/spectral.hpp"

namespace flipofdm::aco {

using spectral::ComplexVector;

struct AcoConfig {
    std::size_t fft_size = 0;
    std::size_t cp_len = 0;

    void validate() const {
        if (!spectral::is_power_of_two(fft_size) || fft_size < 4)
            throw std::domain_error("AcoConfig: fft_size must be a power of two >= 4");
        if (cp_len > fft_size)
            throw std::domain_error("AcoConfig: cp_len must not exceed fft_size");
    }
};

/// Payload symbols per frame of size N: the odd bins 1, 3, ..., N/2 - 1.
inline std::size_t subcarrier_count(std::size_t fft_size) { return fft_size / 4; }

/// Hermitian spectrum with payload on odd bins only. The resulting time
/// signal obeys x(k) = -x(k + N/2), so clipping the negative half discards
/// no information, it only halves the odd-bin amplitudes.
inline ComplexVector build_aco_frame(const ComplexVector& payload,
                                     std::size_t fft_size) {
    if (!spectral::is_power_of_two(fft_size) || fft_size < 4)
        throw std::domain_error("build_aco_frame: fft_size must be a power of two >= 4");
    if (payload.size() != subcarrier_count(fft_size))
        throw std::domain_error("build_aco_frame: payload must hold fft_size/4 symbols");
    ComplexVector spectrum(fft_size, {0.0, 0.0});
    for (std::size_t i = 0; i < payload.size(); ++i) {
        const std::size_t n = 2 * i + 1;
        spectrum[n] = payload[i];
        spectrum[fft_size - n] = std::conj(payload[i]);
    }
    return spectrum;
}

inline ComplexVector extract_aco_payload(const ComplexVector& spectrum) {
    if (!spectral::is_power_of_two(spectrum.size()))
        throw std::domain_error("extract_aco_payload: size must be a power of two");
    ComplexVector payload(subcarrier_count(spectrum.size()));
    for (std::size_t i = 0; i < payload.size(); ++i) payload[i] = spectrum[2 * i + 1];
    return payload;
}

/// Bipolar time signal before the transmitter clipper.
inline std::vector<double> pre_clip_signal(const ComplexVector& payload,
                                           std::size_t fft_size) {
    return flip::to_bipolar(build_aco_frame(payload, fft_size));
}

/// Transmit chain: odd-bin frame -> bipolar signal -> clip negatives ->
/// prefixed single subframe on the wire.
inline std::vector<double> aco_transmit(const ComplexVector& payload,
                                        const AcoConfig& cfg) {
    cfg.validate();
    std::vector<double> x = pre_clip_signal(payload, cfg.fft_size);
    for (auto& v : x) v = v > 0.0 ? v : 0.0;
    return flip::make_subframe(std::move(x), cfg.cp_len, false).wire();
}

/// Receive chain: strip the prefix, optionally clip reintroduced negative
/// noise, one forward transform, zero-force the odd bins and undo the
/// transmitter clipper's halving. The threshold filter stage needs a
/// subframe pair and cannot apply here.
inline ComplexVector aco_receive(const std::vector<double>& wire, const AcoConfig& cfg,
                                 const channel::ChannelModel& ch,
                                 const detection::ResolvedDetector& det) {
    cfg.validate();
    if (det.stages == detection::DetectorStage::clipper_plus_threshold)
        throw std::domain_error("aco_receive: threshold filtering needs subframe pairs");
    const std::size_t n = cfg.fft_size;
    if (wire.size() != n + cfg.cp_len)
        throw std::domain_error("aco_receive: wire must hold one prefixed subframe");

    std::vector<double> y(wire.begin() + static_cast<std::ptrdiff_t>(cfg.cp_len),
                          wire.end());
    if (det.stages == detection::DetectorStage::clipper) y = detection::negative_clip(y);

    const ComplexVector spectrum = spectral::forward_dft(y);
    const ComplexVector h = channel::frequency_response(ch, n);

    ComplexVector payload(subcarrier_count(n));
    for (std::size_t i = 0; i < payload.size(); ++i) {
        const std::size_t bin = 2 * i + 1;
        if (std::abs(h[bin]) < 1e-12)
            throw numeric_error("aco_receive: channel null on a payload bin", 0.0);
        payload[i] = 2.0 * spectrum[bin] / h[bin];
    }
    return payload;
}

}  // namespace flipofdm::aco
