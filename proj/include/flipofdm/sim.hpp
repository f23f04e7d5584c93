#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "flipofdm/aco_ofdm.hpp"
#include "flipofdm/channel.hpp"
#include "flipofdm/detection.hpp"
#include "flipofdm/flip_ofdm.hpp"
#include "flipofdm/numerics.hpp"
#include "flipofdm/qam.hpp"

namespace flipofdm::sim {

enum class Scheme { flip, aco };

/// Detector request for a sweep. A fixed threshold is given in units of
/// sigma_z so one value stays meaningful across snr points.
struct DetectorSpec {
    detection::DetectorStage stages = detection::DetectorStage::plain;
    detection::ThresholdPolicy policy = detection::ThresholdPolicy::disabled;
    double fixed_over_sigma_z = 0.0;
};

struct SweepConfig {
    Scheme scheme = Scheme::flip;
    std::size_t mod_order = 4;
    std::size_t fft_size = 512;
    std::size_t cp_len = 0;
    std::vector<double> snr_db_points;
    std::size_t min_bit_errors = 200;
    std::size_t max_bits = 20'000'000;
    DetectorSpec detector;
    std::vector<double> taps{1.0};
    std::uint64_t seed = 1;
    numerics::QuadratureSpec quad{};
    std::size_t max_workers = 0;  // 0 picks the hardware concurrency

    /// Throws on hard errors, returns human-readable warnings otherwise.
    std::vector<std::string> validate() const {
        (void)qam::Constellation::make(mod_order);
        if (!spectral::is_power_of_two(fft_size) || fft_size < 8)
            throw std::domain_error("SweepConfig: fft_size must be a power of two >= 8");
        if (cp_len > fft_size)
            throw std::domain_error("SweepConfig: cp_len must not exceed fft_size");
        if (snr_db_points.empty())
            throw std::domain_error("SweepConfig: snr_db_points must not be empty");
        for (const double s : snr_db_points)
            if (!std::isfinite(s))
                throw std::domain_error("SweepConfig: snr points must be finite");
        if (min_bit_errors < 100)
            throw std::domain_error(
                "SweepConfig: min_bit_errors below 100 gives meaningless estimates");
        if (max_bits == 0) throw std::domain_error("SweepConfig: max_bits must be > 0");
        if (scheme == Scheme::aco &&
            detector.stages == detection::DetectorStage::clipper_plus_threshold)
            throw std::domain_error(
                "SweepConfig: threshold filtering needs flip subframe pairs");
        quad.validate();
        std::vector<std::string> warnings;
        if (taps.size() > 1 && cp_len + 1 < taps.size())
            warnings.push_back(
                "cp_len shorter than the channel memory; intersymbol interference "
                "will not be absorbed");
        return warnings;
    }
};

/// One sweep point. threshold_over_sigma_z is the resolved filter threshold
/// (+infinity whenever the filter is off or inapplicable).
struct BerRecord {
    double snr_db = 0.0;
    std::size_t bits_sent = 0;
    std::size_t bit_errors = 0;
    double ber_sim = 0.0;
    double ber_analytic = 0.0;
    double ci95 = 0.0;
    double threshold_over_sigma_z = numerics::inf;
};

struct SweepResult {
    SweepConfig config;
    std::vector<BerRecord> records;
};

namespace detail {

/// Per-sample power of the bipolar frame signal with unit-energy symbols.
inline double signal_sigma2(Scheme scheme, std::size_t fft_size) {
    const double n = static_cast<double>(fft_size);
    return scheme == Scheme::flip ? n - 2.0 : n / 2.0;
}

/// Symbol snr on a payload bin for the resolved detector stage. The flip
/// bins run slightly hot because the empty DC and Nyquist bins do not spend
/// transmit power; aco bins sit exactly at the equivalent snr.
inline double bin_snr(const SweepConfig& cfg, double sigma_z, double sigma_x,
                      const detection::ResolvedDetector& det) {
    const double sigma_x2 = sigma_x * sigma_x;
    if (cfg.scheme == Scheme::aco) return sigma_x2 / (2.0 * sigma_z * sigma_z);

    double noise2 = sigma_z * sigma_z;  // plain recombination, per subframe
    if (det.stages == detection::DetectorStage::clipper)
        noise2 = detection::sigma2_nc(sigma_z, sigma_x, cfg.quad);
    else if (det.stages == detection::DetectorStage::clipper_plus_threshold)
        noise2 = std::isinf(det.threshold)
                     ? detection::sigma2_nc(sigma_z, sigma_x, cfg.quad)
                     : detection::sigma2_eq(det.threshold, sigma_z, sigma_x, cfg.quad);
    const double n = static_cast<double>(cfg.fft_size);
    return sigma_x2 / (2.0 * noise2) * n / sigma_x2;
}

inline BerRecord simulate_point(const SweepConfig& cfg, std::size_t point_index) {
    const double snr_db = cfg.snr_db_points[point_index];
    const double snr = std::pow(10.0, snr_db / 10.0);
    const double sigma_x = std::sqrt(signal_sigma2(cfg.scheme, cfg.fft_size));
    const double sigma_z = sigma_x / std::sqrt(2.0 * snr);

    const auto constellation = qam::Constellation::make(cfg.mod_order);
    const auto ch = channel::ChannelModel::make(cfg.taps, sigma_z);

    detection::DetectorConfig dcfg;
    dcfg.stages = cfg.detector.stages;
    dcfg.policy = cfg.detector.policy;
    dcfg.fixed_value = cfg.detector.fixed_over_sigma_z * sigma_z;
    dcfg.sigma_z = sigma_z;
    dcfg.sigma_x = sigma_x;
    dcfg.quad = cfg.quad;
    const detection::ResolvedDetector det = detection::resolve_detector(dcfg);

    const std::size_t symbols = cfg.scheme == Scheme::flip
                                    ? flip::subcarrier_count(cfg.fft_size)
                                    : aco::subcarrier_count(cfg.fft_size);
    const std::size_t frame_bits = symbols * constellation.bits_per_symbol;

    numerics::Rng rng(cfg.seed, point_index);
    std::vector<int> bits(frame_bits);
    BerRecord rec;
    rec.snr_db = snr_db;
    rec.threshold_over_sigma_z = sigma_z > 0.0 ? det.threshold / sigma_z : numerics::inf;

    const flip::FlipConfig fcfg{cfg.fft_size, cfg.cp_len};
    const aco::AcoConfig acfg{cfg.fft_size, cfg.cp_len};
    while (rec.bit_errors < cfg.min_bit_errors && rec.bits_sent < cfg.max_bits) {
        for (auto& b : bits) b = rng.bit();
        const auto payload = qam::modulate(bits, constellation);
        std::vector<int> decoded;
        if (cfg.scheme == Scheme::flip) {
            const auto wire = flip::flip_transmit(payload, fcfg);
            const auto rx = channel::apply(ch, wire, rng);
            decoded = qam::demodulate(flip::flip_receive(rx, fcfg, ch, det), constellation);
        } else {
            const auto wire = aco::aco_transmit(payload, acfg);
            const auto rx = channel::apply(ch, wire, rng);
            decoded = qam::demodulate(aco::aco_receive(rx, acfg, ch, det), constellation);
        }
        for (std::size_t i = 0; i < frame_bits; ++i)
            rec.bit_errors += decoded[i] != bits[i];
        rec.bits_sent += frame_bits;
    }

    const double n = static_cast<double>(rec.bits_sent);
    rec.ber_sim = static_cast<double>(rec.bit_errors) / n;
    rec.ber_analytic = qam::analytic_ber(cfg.mod_order, bin_snr(cfg, sigma_z, sigma_x, det));
    rec.ci95 = 1.96 * std::sqrt(rec.ber_sim * (1.0 - rec.ber_sim) / n);
    return rec;
}

}  // namespace detail

/// Runs every snr point of the sweep, splitting points across worker
/// threads. Results are independent of the worker count: each point draws
/// from its own deterministic stream keyed by (seed, point index).
inline SweepResult run_sweep(const SweepConfig& cfg) {
    (void)cfg.validate();
    SweepResult result;
    result.config = cfg;
    result.records.resize(cfg.snr_db_points.size());

    std::size_t workers = cfg.max_workers != 0
                              ? cfg.max_workers
                              : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, cfg.snr_db_points.size());

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cfg.snr_db_points.size()) return;
            try {
                result.records[i] = detail::simulate_point(cfg, i);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    return result;
}

// ---------------------------------------------------------------------------
// Complexity accounting
// ---------------------------------------------------------------------------

/// Transform work per frame, counted as N log2 N per full-size transform.
/// The aco transmitter can run two half-size transforms; the aco receiver
/// needs a transform per subframe while flip recombines first and transforms
/// once, which is where its factor-two receiver saving comes from.
struct ComplexityTable {
    std::size_t fft_size = 0;
    double aco_tx = 0.0;
    double flip_tx = 0.0;
    double aco_rx = 0.0;
    double flip_rx = 0.0;
    double flip_rx_saving = 0.0;  // 1 - flip_rx / aco_rx
};

inline ComplexityTable complexity_table(std::size_t fft_size) {
    if (!spectral::is_power_of_two(fft_size))
        throw std::domain_error("complexity_table: fft_size must be a power of two");
    const double n = static_cast<double>(fft_size);
    const double lg = std::log2(n);
    ComplexityTable t;
    t.fft_size = fft_size;
    t.aco_tx = n * (lg - 1.0);  // two transforms of size N/2
    t.flip_tx = n * lg;
    t.aco_rx = 2.0 * n * lg;
    t.flip_rx = n * lg;
    t.flip_rx_saving = 1.0 - t.flip_rx / t.aco_rx;
    return t;
}

// ---------------------------------------------------------------------------
// Horizontal gain between two ber curves
// ---------------------------------------------------------------------------

namespace detail {

/// snr_db at which a curve crosses the target ber, interpolated linearly in
/// snr against log10(ber). Points with zero simulated errors cannot be
/// placed on the log scale and are skipped.
inline double snr_at_ber(const std::vector<BerRecord>& records, double target_ber) {
    if (!(target_ber > 0.0))
        throw std::domain_error("gain_at_ber: target ber must be > 0");
    for (std::size_t i = 0; i + 1 < records.size(); ++i) {
        const BerRecord& a = records[i];
        const BerRecord& b = records[i + 1];
        if (a.ber_sim <= 0.0 || b.ber_sim <= 0.0) continue;
        if (a.ber_sim >= target_ber && target_ber >= b.ber_sim) {
            const double la = std::log10(a.ber_sim);
            const double lb = std::log10(b.ber_sim);
            const double lt = std::log10(target_ber);
            if (la == lb) return a.snr_db;
            return a.snr_db + (b.snr_db - a.snr_db) * (lt - la) / (lb - la);
        }
    }
    throw std::out_of_range("gain_at_ber: curve does not bracket the target ber");
}

}  // namespace detail

/// How many dB less snr the test curve needs than the reference to reach
/// target_ber. Positive means the test scheme is better.
inline double gain_at_ber(const std::vector<BerRecord>& test,
                          const std::vector<BerRecord>& reference, double target_ber) {
    return detail::snr_at_ber(reference, target_ber) -
           detail::snr_at_ber(test, target_ber);
}

}  // namespace flipofdm::sim
