// Acceptance checks for the headline claims of the library. Each check
// prints exactly one [PASS]/[FAIL] line with its measured numbers; the exit
// code is the number of failed checks. Expect a runtime around a minute.

#include <flipofdm/aco_ofdm.hpp>
#include <flipofdm/channel.hpp>
#include <flipofdm/detection.hpp>
#include <flipofdm/flip_ofdm.hpp>
#include <flipofdm/numerics.hpp>
#include <flipofdm/qam.hpp>
#include <flipofdm/sim.hpp>
#include <flipofdm/spectral.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

namespace det = flipofdm::detection;
namespace num = flipofdm::numerics;
namespace sim = flipofdm::sim;
namespace spc = flipofdm::spectral;
using flipofdm::channel::ChannelModel;

struct Outcome {
    bool ok = false;
    std::string detail;
};

std::string fmt(double v, int prec = 3) {
    std::ostringstream ss;
    ss << std::setprecision(prec) << v;
    return ss.str();
}

double sigma_x_at(double snr_db) {
    return std::sqrt(2.0 * std::pow(10.0, snr_db / 10.0));
}

std::vector<double> snr_grid(double lo, double hi, double step) {
    std::vector<double> g;
    for (double s = lo; s <= hi + 1e-9; s += step) g.push_back(s);
    return g;
}

sim::SweepConfig base_sweep(std::size_t order, std::uint64_t seed) {
    sim::SweepConfig cfg;
    cfg.scheme = sim::Scheme::flip;
    cfg.mod_order = order;
    cfg.fft_size = 512;
    cfg.cp_len = 0;
    cfg.snr_db_points = snr_grid(0.0, 24.0, 2.0);
    cfg.min_bit_errors = 200;
    cfg.max_bits = 20'000'000;
    cfg.seed = seed;
    return cfg;
}

// Monte carlo estimate of the clipper-stage equivalent noise power per
// subframe: half the mean squared recombination error over a gaussian
// signal ensemble.
struct NcPoint {
    double snr_db = 0.0;
    double mc = 0.0;
    double se = 0.0;
    double quad = 0.0;
};

NcPoint mc_sigma2_nc(double snr_db, std::size_t trials, std::uint64_t stream) {
    const double sx = sigma_x_at(snr_db);
    num::Rng rng(4242, stream);
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < trials; ++i) {
        const double x = rng.gaussian(sx);
        const double xp = x > 0.0 ? x : 0.0;
        const double xn = x > 0.0 ? 0.0 : -x;
        const double y1 = std::max(xp + rng.gaussian(1.0), 0.0);
        const double y2 = std::max(xn + rng.gaussian(1.0), 0.0);
        const double e = y1 - y2 - x;
        const double u = 0.5 * e * e;
        sum += u;
        sum2 += u * u;
    }
    const double n = static_cast<double>(trials);
    NcPoint p;
    p.snr_db = snr_db;
    p.mc = sum / n;
    p.se = std::sqrt((sum2 / n - p.mc * p.mc) / n);
    p.quad = det::sigma2_nc(1.0, sx);
    return p;
}

}  // namespace

int main() {
    int failures = 0;
    int idx = 0;
    auto run = [&](const std::string& name, const std::function<Outcome()>& body) {
        ++idx;
        std::fprintf(stderr, "running %d: %s\n", idx, name.c_str());
        Outcome oc;
        try {
            oc = body();
        } catch (const std::exception& e) {
            oc = {false, std::string("threw: ") + e.what()};
        }
        std::printf("[%s] %d %s | %s\n", oc.ok ? "PASS" : "FAIL", idx, name.c_str(),
                    oc.detail.c_str());
        std::fflush(stdout);
        if (!oc.ok) ++failures;
    };

    // Shared expensive results, built on first use.
    std::optional<sim::SweepResult> flip4, flip16, aco16;
    auto sweep = [&](std::optional<sim::SweepResult>& slot,
                     const sim::SweepConfig& cfg) -> const sim::SweepResult& {
        if (!slot) slot = sim::run_sweep(cfg);
        return *slot;
    };
    std::optional<std::vector<NcPoint>> nc;
    auto nc_points = [&]() -> const std::vector<NcPoint>& {
        if (!nc) {
            nc.emplace();
            std::uint64_t stream = 0;
            for (double s : {5.0, 10.0, 20.0, 30.0})
                nc->push_back(mc_sigma2_nc(s, 2'000'000, ++stream));
        }
        return *nc;
    };
    std::map<double, double> copt;
    auto copt_at = [&](double snr_db) {
        auto it = copt.find(snr_db);
        if (it == copt.end())
            it = copt.emplace(snr_db,
                              det::optimal_threshold(snr_db, 1.0, sigma_x_at(snr_db)))
                     .first;
        return it->second;
    };

    run("flip plain ber tracks the exact qam awgn reference", [&] {
        const auto& m4 = sweep(flip4, base_sweep(4, 101));
        const auto& m16 = sweep(flip16, base_sweep(16, 102));
        int gated = 0;
        double worst = 0.0;
        bool ok = true;
        std::string bad;
        for (const auto* res : {&m4, &m16})
            for (const auto& r : res->records) {
                if (r.ber_analytic < 1e-5) continue;
                ++gated;
                const double n = static_cast<double>(r.bits_sent);
                const double se =
                    std::sqrt(r.ber_analytic * (1.0 - r.ber_analytic) / n);
                const double z = std::abs(r.ber_sim - r.ber_analytic) / se;
                worst = std::max(worst, z);
                if (z > 3.0 || r.bit_errors < 200) {
                    ok = false;
                    bad = " offender: m=" +
                          std::to_string(res->config.mod_order) + " snr=" +
                          fmt(r.snr_db) + " z=" + fmt(z) + " errors=" +
                          std::to_string(r.bit_errors);
                }
            }
        return Outcome{ok && gated >= 15, std::to_string(gated) +
                                              " points gated at 3 se, worst |z| " +
                                              fmt(worst) + bad};
    });

    run("aco and flip reach the same ber at matched snr", [&] {
        const auto& f = sweep(flip16, base_sweep(16, 102));
        sim::SweepConfig acfg = base_sweep(16, 103);
        acfg.scheme = sim::Scheme::aco;
        const auto& a = sweep(aco16, acfg);
        double worst = 0.0;
        bool ok = a.records.size() == f.records.size();
        for (std::size_t i = 0; ok && i < f.records.size(); ++i) {
            const auto& rf = f.records[i];
            const auto& ra = a.records[i];
            ok = rf.snr_db == ra.snr_db;
            const double nf = static_cast<double>(rf.bits_sent);
            const double na = static_cast<double>(ra.bits_sent);
            const double pooled =
                static_cast<double>(rf.bit_errors + ra.bit_errors) / (nf + na);
            if (pooled == 0.0) continue;
            const double sd =
                std::sqrt(pooled * (1.0 - pooled) * (1.0 / nf + 1.0 / na));
            worst = std::max(worst, std::abs(rf.ber_sim - ra.ber_sim) / sd);
        }
        ok = ok && worst <= 3.0;
        return Outcome{ok, std::to_string(f.records.size()) +
                               " snr points, worst pooled |z| " + fmt(worst)};
    });

    run("aco clipping halves odd bins and keeps antisymmetry", [&] {
        const std::size_t n_fft = 512, frames = 1000, half = n_fft / 2;
        const auto c = flipofdm::qam::Constellation::make(16);
        num::Rng rng(310, 0);
        double worst_sym = 0.0, worst_half = 0.0;
        for (std::size_t f = 0; f < frames; ++f) {
            std::vector<int> bits(4 * flipofdm::aco::subcarrier_count(n_fft));
            for (auto& b : bits) b = rng.bit();
            const auto payload = flipofdm::qam::modulate(bits, c);
            const auto x = flipofdm::aco::pre_clip_signal(payload, n_fft);
            double scale_t = 0.0, err_t = 0.0;
            for (std::size_t k = 0; k < half; ++k) {
                scale_t = std::max({scale_t, std::abs(x[k]), std::abs(x[k + half])});
                err_t = std::max(err_t, std::abs(x[k] + x[k + half]));
            }
            worst_sym = std::max(worst_sym, err_t / scale_t);
            const auto s_full = spc::forward_dft(x);
            const auto s_clip = spc::forward_dft(det::negative_clip(x));
            double scale_f = 0.0, err_f = 0.0;
            for (std::size_t b = 1; b < n_fft; b += 2) {
                scale_f = std::max(scale_f, std::abs(s_full[b]));
                err_f = std::max(err_f, std::abs(s_clip[b] - 0.5 * s_full[b]));
            }
            worst_half = std::max(worst_half, err_f / scale_f);
        }
        const bool ok = worst_sym <= 1e-10 && worst_half <= 1e-10;
        return Outcome{ok, std::to_string(frames) +
                               " frames: worst antisymmetry residue " +
                               fmt(worst_sym) + ", worst odd-bin halving residue " +
                               fmt(worst_half)};
    });

    run("recombining a subframe pair doubles the noise variance", [&] {
        const double sz = 0.8;
        const std::size_t n = 1'000'000;
        num::Rng rng(411, 0);
        std::vector<double> y1(n), y2(n);
        for (std::size_t i = 0; i < n; ++i) {
            y1[i] = rng.gaussian(sz);
            y2[i] = rng.gaussian(sz);
        }
        const auto y = flipofdm::flip::detect_recombine(y1, y2, {});
        double mean = 0.0, meansq = 0.0;
        for (double v : y) {
            mean += v;
            meansq += v * v;
        }
        mean /= static_cast<double>(n);
        meansq /= static_cast<double>(n);
        const double ratio = (meansq - mean * mean) / (2.0 * sz * sz);
        return Outcome{std::abs(ratio - 1.0) <= 0.01,
                       "sample variance over 2 sigma_z^2 = " + fmt(ratio, 5) +
                           " (1e6 samples, band 1 +- 0.01)"};
    });

    run("negative clipping recovers about 1.25 db at high snr", [&] {
        bool ok = true;
        std::string gains;
        for (double s : {20.0, 25.0, 30.0, 60.0}) {
            const double g = -10.0 * std::log10(det::sigma2_nc(1.0, sigma_x_at(s)));
            ok = ok && std::abs(g - 1.25) <= 0.15;
            gains += (gains.empty() ? "" : "/") + fmt(g);
        }
        double worst_z = 0.0;
        for (const auto& p : nc_points())
            worst_z = std::max(worst_z, std::abs(p.quad - p.mc) / p.se);
        ok = ok && worst_z <= 3.0;
        return Outcome{ok, "gain " + gains +
                               " db at 20/25/30/60 db (band 1.25 +- 0.15); "
                               "noise power within 3 se of simulation, worst |z| " +
                               fmt(worst_z)};
    });

    run("optimal threshold turns on near 5 db and tracks the fitted curve", [&] {
        bool ok = true;
        for (double s : {2.0, 3.0, 4.0}) ok = ok && std::isinf(copt_at(s));
        double worst = 0.0;
        for (double s : {5.5, 7.0, 10.0, 15.0, 20.0, 25.0, 30.0}) {
            const double c = copt_at(s);
            const double ratio = c / det::approx_threshold(s);
            ok = ok && std::isfinite(c);
            worst = std::max(worst, std::abs(ratio - 1.0));
        }
        ok = ok && worst <= 0.10;
        return Outcome{ok, "disabled at 2/3/4 db, finite from 5.5 db, worst "
                           "deviation from the fitted curve " +
                               fmt(100.0 * worst) + "% (band 10%)"};
    });

    run("threshold filtering is worth about 3 db of equivalent snr", [&] {
        bool ok = true;
        std::string gains;
        for (double s : {25.0, 30.0}) {
            const double s2 = det::sigma2_eq(copt_at(s), 1.0, sigma_x_at(s));
            const double g = -10.0 * std::log10(s2);
            ok = ok && std::abs(g - 3.0) <= 0.5;
            gains += (gains.empty() ? "" : "/") + fmt(g);
        }
        sim::SweepConfig plain = base_sweep(16, 701);
        plain.snr_db_points = {16.0, 17.0, 18.0, 19.0};
        sim::SweepConfig filt = base_sweep(16, 702);
        filt.snr_db_points = {13.0, 14.0, 15.0, 16.0};
        filt.detector.stages = det::DetectorStage::clipper_plus_threshold;
        filt.detector.policy = det::ThresholdPolicy::approximate;
        const double hg = sim::gain_at_ber(sim::run_sweep(filt).records,
                                           sim::run_sweep(plain).records, 1e-4);
        ok = ok && std::abs(hg - 2.5) <= 0.5;
        return Outcome{ok, "equivalent-snr gain " + gains +
                               " db at 25/30 db (band 3 +- 0.5); simulated "
                               "horizontal gain at ber 1e-4 = " +
                               fmt(hg) + " db (band 2.5 +- 0.5)"};
    });

    run("flip receiver spends half the aco transform budget", [&] {
        const auto t = sim::complexity_table(1024);
        bool ok = t.aco_tx == 9216.0 && t.flip_tx == 10240.0 && t.aco_rx == 20480.0 &&
                  t.flip_rx == 10240.0 && t.flip_rx_saving == 0.5;
        flipofdm::flip::FlipConfig fc;
        fc.fft_size = 512;
        fc.cp_len = 32;
        const auto c = flipofdm::qam::Constellation::make(4);
        num::Rng rng(808, 0);
        std::vector<int> bits(2 * flipofdm::flip::subcarrier_count(fc.fft_size));
        for (auto& b : bits) b = rng.bit();
        const auto payload = flipofdm::qam::modulate(bits, c);
        spc::reset_transform_counters();
        const auto wire = flipofdm::flip::flip_transmit(payload, fc);
        const auto tx = spc::transform_counters();
        ok = ok && tx.inverse == 1 && tx.forward == 0;
        const auto ch = ChannelModel::make({1.0}, 0.0);
        (void)flipofdm::flip::flip_receive(wire, fc, ch, {});
        const auto rx = spc::transform_counters();
        ok = ok && rx.forward == 1 && rx.inverse == 1;
        return Outcome{ok, "n=1024 cost units " + fmt(t.aco_tx, 6) + "/" +
                               fmt(t.flip_tx, 6) + "/" + fmt(t.aco_rx, 6) + "/" +
                               fmt(t.flip_rx, 6) +
                               " (aco tx / flip tx / aco rx / flip rx), saving " +
                               fmt(t.flip_rx_saving) +
                               "; one forward transform per received pair"};
    });

    run("clipped-noise quadrature agrees with simulation", [&] {
        bool ok = true;
        double worst_z = 0.0, gap_lo = 0.0, gap_hi = -1.0;
        for (const auto& p : nc_points()) {
            const auto cmp = det::compare_sigma2_nc(1.0, sigma_x_at(p.snr_db));
            worst_z = std::max(worst_z, std::abs(cmp.quadrature - p.mc) / p.se);
            if (gap_hi < gap_lo) {
                gap_lo = gap_hi = cmp.relative_gap;
            } else {
                gap_lo = std::min(gap_lo, cmp.relative_gap);
                gap_hi = std::max(gap_hi, cmp.relative_gap);
            }
        }
        ok = worst_z <= 3.0;
        return Outcome{ok, "worst |z| " + fmt(worst_z) +
                               " vs 2e6-sample simulation at 5/10/20/30 db; "
                               "printed closed form sits " +
                               fmt(100.0 * gap_lo) + "% to " + fmt(100.0 * gap_hi) +
                               "% away and is reported, not used"};
    });

    std::printf("acceptance: %d/%d passed\n", idx - failures, idx);
    return failures;
}
