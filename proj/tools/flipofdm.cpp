// Batch front end for the unipolar ofdm library: ber sweeps, detector
// threshold tables, waveform dumps and transform-cost tables, with pinned
// CSV/JSON schemas and a sidecar manifest per file artifact.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "flipofdm/aco_ofdm.hpp"
#include "flipofdm/flip_ofdm.hpp"
#include "flipofdm/numerics.hpp"
#include "flipofdm/qam.hpp"
#include "flipofdm/report.hpp"
#include "flipofdm/sim.hpp"
#include "flipofdm/version.hpp"

namespace {

using namespace flipofdm;
using nlohmann::json;

// "a:b:step" inclusive, or a comma separated list, or a single value.
std::vector<double> parse_snr_points(const std::string& text) {
    std::vector<double> points;
    if (text.find(':') != std::string::npos) {
        double a = 0, b = 0, step = 0;
        char c1 = 0, c2 = 0;
        std::istringstream in(text);
        if (!(in >> a >> c1 >> b >> c2 >> step) || c1 != ':' || c2 != ':' ||
            !(in >> std::ws).eof())
            throw std::domain_error("bad snr range (want start:stop:step): " + text);
        if (!(step > 0) || b < a)
            throw std::domain_error("bad snr range (need step > 0, stop >= start): " + text);
        for (double v = a; v <= b + 1e-9; v += step) points.push_back(v);
        return points;
    }
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) throw std::domain_error("bad snr list: " + text);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw std::domain_error("bad snr value: " + item);
        }
        if (used != item.size()) throw std::domain_error("bad snr value: " + item);
        points.push_back(v);
    }
    if (points.empty()) throw std::domain_error("empty snr list");
    return points;
}

std::string join_command(int argc, char** argv) {
    std::string cmd;
    for (int i = 0; i < argc; ++i) {
        if (i) cmd += ' ';
        cmd += argv[i];
    }
    return cmd;
}

json load_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::domain_error("cannot read config file: " + path);
    json j;
    f >> j;
    return j;
}

struct OutputSpec {
    std::string csv_path;   // empty: stdout (unless json_path set)
    std::string json_path;  // empty: no json artifact
};

void emit(const OutputSpec& out, const std::string& csv, const json& as_json,
          const std::string& command, std::uint64_t seed, const json& config_echo) {
    std::vector<std::string> outputs;
    if (!out.csv_path.empty()) outputs.push_back(out.csv_path);
    if (!out.json_path.empty()) outputs.push_back(out.json_path);
    if (!out.csv_path.empty()) report::write_text_file(out.csv_path, csv);
    if (!out.json_path.empty())
        report::write_text_file(out.json_path, as_json.dump(2) + "\n");
    for (const auto& path : outputs)
        report::write_manifest(path, command, seed, config_echo, outputs);
    if (outputs.empty()) std::cout << csv;
}

int run(int argc, char** argv) {
    CLI::App app{"unipolar ofdm simulation toolkit"};
    app.set_version_flag("--version", std::string(version));
    app.require_subcommand(1);
    const std::string command = join_command(argc, argv);

    // The sweep config may arrive from --config json; command line flags
    // override individual fields, so scan for the file first and bind the
    // options to the merged struct.
    sim::SweepConfig sweep_cfg;
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--config")
            sweep_cfg = report::config_from_json(load_json_file(argv[i + 1]), sweep_cfg);

    std::string scheme = report::scheme_name(sweep_cfg.scheme);
    std::string detector = report::stage_name(sweep_cfg.detector.stages);
    std::string policy = report::policy_name(sweep_cfg.detector.policy);
    std::string snr_text;
    double threshold = sweep_cfg.detector.fixed_over_sigma_z;
    OutputSpec out;
    std::string config_path;

    auto* sweep = app.add_subcommand("ber-sweep", "simulate ber over an snr grid");
    sweep->add_option("--config", config_path, "json file with sweep defaults");
    sweep->add_option("--scheme", scheme, "flip or aco");
    sweep->add_option("--order", sweep_cfg.mod_order, "qam order: 4, 16, 64, 256");
    sweep->add_option("--fft", sweep_cfg.fft_size, "frame size, power of two");
    sweep->add_option("--cp", sweep_cfg.cp_len, "cyclic prefix length");
    sweep->add_option("--snr", snr_text, "snr points, start:stop:step or comma list");
    sweep->add_option("--detector", detector, "plain, clipper or clipper+threshold");
    sweep->add_option("--policy", policy, "disabled, optimal, approximate or fixed");
    sweep->add_option("--threshold", threshold,
                      "fixed filter threshold in sigma_z units (implies --policy fixed)");
    sweep->add_option("--min-errors", sweep_cfg.min_bit_errors,
                      "bit errors to collect per point");
    sweep->add_option("--max-bits", sweep_cfg.max_bits, "bit budget per point");
    sweep->add_option("--taps", sweep_cfg.taps, "channel impulse response taps")
        ->delimiter(',');
    sweep->add_option("--seed", sweep_cfg.seed, "rng seed");
    sweep->add_option("--workers", sweep_cfg.max_workers, "worker threads, 0 = auto");
    sweep->add_option("--out", out.csv_path, "csv artifact path (default: stdout)");
    sweep->add_option("--json", out.json_path, "json artifact path");

    std::vector<double> table_snr;
    std::string table_snr_text = "5:30:1";
    double table_tol = 1e-6;
    auto* table = app.add_subcommand("threshold-table",
                                     "detector noise analysis over an snr grid");
    table->add_option("--snr", table_snr_text, "snr points, start:stop:step or comma list");
    table->add_option("--tol", table_tol, "quadrature relative tolerance");
    table->add_option("--out", out.csv_path, "csv artifact path (default: stdout)");
    table->add_option("--json", out.json_path, "json artifact path");

    std::size_t wave_fft = 64, wave_cp = 8, wave_order = 4;
    std::string wave_scheme = "flip";
    std::uint64_t wave_seed = 1;
    bool zero_payload = false;
    std::string wave_out;
    auto* wave = app.add_subcommand("waveform", "dump one transmitted frame");
    wave->add_option("--scheme", wave_scheme, "flip or aco");
    wave->add_option("--fft", wave_fft, "frame size, power of two");
    wave->add_option("--cp", wave_cp, "cyclic prefix length");
    wave->add_option("--order", wave_order, "qam order for the random payload");
    wave->add_option("--seed", wave_seed, "rng seed");
    wave->add_flag("--zero-payload", zero_payload, "transmit an empty frame");
    wave->add_option("--out", wave_out, "artifact path (default: stdout)");

    std::size_t cx_fft = 1024;
    auto* cx = app.add_subcommand("complexity", "transform work per frame");
    cx->add_option("--fft", cx_fft, "frame size, power of two");
    cx->add_option("--out", out.csv_path, "csv artifact path (default: stdout)");
    cx->add_option("--json", out.json_path, "json artifact path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the message
        return 2;
    }

    if (sweep->parsed()) {
        sweep_cfg.scheme = report::parse_scheme(scheme);
        sweep_cfg.detector.stages = report::parse_stage(detector);
        sweep_cfg.detector.policy = report::parse_policy(policy);
        if (sweep->count("--threshold")) {
            if (sweep_cfg.detector.stages !=
                detection::DetectorStage::clipper_plus_threshold)
                throw std::domain_error(
                    "--threshold needs --detector clipper+threshold");
            sweep_cfg.detector.policy = detection::ThresholdPolicy::fixed;
            sweep_cfg.detector.fixed_over_sigma_z = threshold;
        }
        if (sweep_cfg.detector.policy == detection::ThresholdPolicy::fixed &&
            !sweep->count("--threshold") && sweep_cfg.detector.fixed_over_sigma_z <= 0.0)
            throw std::domain_error("--policy fixed needs --threshold");
        if (!snr_text.empty()) sweep_cfg.snr_db_points = parse_snr_points(snr_text);

        for (const auto& w : sweep_cfg.validate()) std::cerr << "warning: " << w << "\n";
        const auto result = sim::run_sweep(sweep_cfg);
        emit(out, report::ber_csv(result), report::ber_json(result), command,
             sweep_cfg.seed, report::config_json(sweep_cfg));
        return 0;
    }

    if (table->parsed()) {
        table_snr = parse_snr_points(table_snr_text);
        numerics::QuadratureSpec quad;
        quad.relative_tolerance = table_tol;
        quad.validate();
        const auto rows = report::threshold_table(table_snr, quad);
        json config_echo = {{"snr_db_points", table_snr},
                            {"quad",
                             {{"relative_tolerance", quad.relative_tolerance},
                              {"truncation_sigmas", quad.truncation_sigmas}}}};
        emit(out, report::threshold_csv(rows), report::threshold_json(rows), command, 0,
             config_echo);
        return 0;
    }

    if (wave->parsed()) {
        const auto sch = report::parse_scheme(wave_scheme);
        const auto constellation = qam::Constellation::make(wave_order);
        const std::size_t symbols = sch == sim::Scheme::flip
                                        ? flip::subcarrier_count(wave_fft)
                                        : aco::subcarrier_count(wave_fft);
        spectral::ComplexVector payload(symbols, {0.0, 0.0});
        if (!zero_payload) {
            numerics::Rng rng(wave_seed, 0);
            std::vector<int> bits(symbols * constellation.bits_per_symbol);
            for (auto& b : bits) b = rng.bit();
            payload = qam::modulate(bits, constellation);
        }
        std::string text;
        if (sch == sim::Scheme::flip) {
            const flip::FlipConfig cfg{wave_fft, wave_cp};
            cfg.validate();
            const auto wire = flip::flip_transmit(payload, cfg);
            const std::size_t stride = wave_fft + wave_cp;
            for (std::size_t k = 0; k < wire.size(); ++k) {
                if (k == stride) text += "#\n";
                text += report::format_double(wire[k]) + "\n";
            }
        } else {
            const aco::AcoConfig cfg{wave_fft, wave_cp};
            cfg.validate();
            for (const double v : aco::aco_transmit(payload, cfg))
                text += report::format_double(v) + "\n";
        }
        if (wave_out.empty()) {
            std::cout << text;
        } else {
            report::write_text_file(wave_out, text);
            json config_echo = {{"scheme", wave_scheme}, {"fft_size", wave_fft},
                                {"cp_len", wave_cp},     {"mod_order", wave_order},
                                {"seed", wave_seed},     {"zero_payload", zero_payload}};
            report::write_manifest(wave_out, command, wave_seed, config_echo, {wave_out});
        }
        return 0;
    }

    const auto t = sim::complexity_table(cx_fft);
    std::string csv =
        "fft_size,aco_tx,flip_tx,aco_rx,flip_rx,flip_rx_saving\n" +
        std::to_string(t.fft_size) + ',' + report::format_double(t.aco_tx) + ',' +
        report::format_double(t.flip_tx) + ',' + report::format_double(t.aco_rx) + ',' +
        report::format_double(t.flip_rx) + ',' +
        report::format_double(t.flip_rx_saving) + "\n";
    json j = {{"schema", "complexity/1"},
              {"fft_size", t.fft_size},
              {"aco_tx", t.aco_tx},
              {"flip_tx", t.flip_tx},
              {"aco_rx", t.aco_rx},
              {"flip_rx", t.flip_rx},
              {"flip_rx_saving", t.flip_rx_saving}};
    emit(out, csv, j, command, 0, json{{"fft_size", cx_fft}});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
