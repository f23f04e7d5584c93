#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "flipofdm/detection.hpp"
#include "flipofdm/numerics.hpp"
#include "flipofdm/sim.hpp"

namespace flipofdm::report {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Enum names shared by CSV, JSON and the command line
// ---------------------------------------------------------------------------

inline std::string scheme_name(sim::Scheme s) {
    return s == sim::Scheme::flip ? "flip" : "aco";
}

inline sim::Scheme parse_scheme(const std::string& name) {
    if (name == "flip") return sim::Scheme::flip;
    if (name == "aco") return sim::Scheme::aco;
    throw std::domain_error("unknown scheme: " + name);
}

inline std::string stage_name(detection::DetectorStage s) {
    switch (s) {
        case detection::DetectorStage::plain: return "plain";
        case detection::DetectorStage::clipper: return "clipper";
        case detection::DetectorStage::clipper_plus_threshold: return "clipper+threshold";
    }
    throw std::domain_error("unknown detector stage");
}

inline detection::DetectorStage parse_stage(const std::string& name) {
    if (name == "plain") return detection::DetectorStage::plain;
    if (name == "clipper") return detection::DetectorStage::clipper;
    if (name == "clipper+threshold")
        return detection::DetectorStage::clipper_plus_threshold;
    throw std::domain_error("unknown detector stage: " + name);
}

inline std::string policy_name(detection::ThresholdPolicy p) {
    switch (p) {
        case detection::ThresholdPolicy::disabled: return "disabled";
        case detection::ThresholdPolicy::optimal: return "optimal";
        case detection::ThresholdPolicy::approximate: return "approximate";
        case detection::ThresholdPolicy::fixed: return "fixed";
    }
    throw std::domain_error("unknown threshold policy");
}

inline detection::ThresholdPolicy parse_policy(const std::string& name) {
    if (name == "disabled") return detection::ThresholdPolicy::disabled;
    if (name == "optimal") return detection::ThresholdPolicy::optimal;
    if (name == "approximate") return detection::ThresholdPolicy::approximate;
    if (name == "fixed") return detection::ThresholdPolicy::fixed;
    throw std::domain_error("unknown threshold policy: " + name);
}

// ---------------------------------------------------------------------------
// Formatting
// ---------------------------------------------------------------------------

/// Compact decimal form; infinities become the literal "inf" in both CSV
/// and JSON because JSON numbers cannot carry them.
inline std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline json json_double(double v) {
    if (std::isinf(v)) return format_double(v);
    return v;
}

// ---------------------------------------------------------------------------
// Ber sweep artifacts
// ---------------------------------------------------------------------------

inline json config_json(const sim::SweepConfig& cfg) {
    json j;
    j["scheme"] = scheme_name(cfg.scheme);
    j["mod_order"] = cfg.mod_order;
    j["fft_size"] = cfg.fft_size;
    j["cp_len"] = cfg.cp_len;
    j["snr_db_points"] = cfg.snr_db_points;
    j["min_bit_errors"] = cfg.min_bit_errors;
    j["max_bits"] = cfg.max_bits;
    j["detector"] = {{"stages", stage_name(cfg.detector.stages)},
                     {"policy", policy_name(cfg.detector.policy)},
                     {"fixed_over_sigma_z", cfg.detector.fixed_over_sigma_z}};
    j["taps"] = cfg.taps;
    j["seed"] = cfg.seed;
    j["quad"] = {{"relative_tolerance", cfg.quad.relative_tolerance},
                 {"truncation_sigmas", cfg.quad.truncation_sigmas}};
    j["max_workers"] = cfg.max_workers;
    return j;
}

/// Applies the keys present in j onto cfg, leaving the rest untouched.
inline sim::SweepConfig config_from_json(const json& j, sim::SweepConfig cfg = {}) {
    if (j.contains("scheme")) cfg.scheme = parse_scheme(j.at("scheme").get<std::string>());
    cfg.mod_order = j.value("mod_order", cfg.mod_order);
    cfg.fft_size = j.value("fft_size", cfg.fft_size);
    cfg.cp_len = j.value("cp_len", cfg.cp_len);
    if (j.contains("snr_db_points"))
        cfg.snr_db_points = j.at("snr_db_points").get<std::vector<double>>();
    cfg.min_bit_errors = j.value("min_bit_errors", cfg.min_bit_errors);
    cfg.max_bits = j.value("max_bits", cfg.max_bits);
    if (j.contains("detector")) {
        const json& d = j.at("detector");
        if (d.contains("stages"))
            cfg.detector.stages = parse_stage(d.at("stages").get<std::string>());
        if (d.contains("policy"))
            cfg.detector.policy = parse_policy(d.at("policy").get<std::string>());
        cfg.detector.fixed_over_sigma_z =
            d.value("fixed_over_sigma_z", cfg.detector.fixed_over_sigma_z);
    }
    if (j.contains("taps")) cfg.taps = j.at("taps").get<std::vector<double>>();
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("quad")) {
        const json& q = j.at("quad");
        cfg.quad.relative_tolerance =
            q.value("relative_tolerance", cfg.quad.relative_tolerance);
        cfg.quad.truncation_sigmas =
            q.value("truncation_sigmas", cfg.quad.truncation_sigmas);
    }
    cfg.max_workers = j.value("max_workers", cfg.max_workers);
    return cfg;
}

inline std::string ber_csv(const sim::SweepResult& result) {
    std::string out =
        "snr_db,scheme,detector,bits_sent,bit_errors,ber_sim,ber_analytic,ci95\n";
    for (const auto& r : result.records) {
        out += format_double(r.snr_db);
        out += ',' + scheme_name(result.config.scheme);
        out += ',' + stage_name(result.config.detector.stages);
        out += ',' + std::to_string(r.bits_sent);
        out += ',' + std::to_string(r.bit_errors);
        out += ',' + format_double(r.ber_sim);
        out += ',' + format_double(r.ber_analytic);
        out += ',' + format_double(r.ci95);
        out += '\n';
    }
    return out;
}

inline json ber_json(const sim::SweepResult& result) {
    json j;
    j["schema"] = "ber-sweep/1";
    j["config"] = config_json(result.config);
    j["records"] = json::array();
    for (const auto& r : result.records) {
        j["records"].push_back({{"snr_db", r.snr_db},
                                {"scheme", scheme_name(result.config.scheme)},
                                {"detector", stage_name(result.config.detector.stages)},
                                {"bits_sent", r.bits_sent},
                                {"bit_errors", r.bit_errors},
                                {"ber_sim", r.ber_sim},
                                {"ber_analytic", r.ber_analytic},
                                {"ci95", r.ci95},
                                {"threshold_over_sigma_z",
                                 json_double(r.threshold_over_sigma_z)}});
    }
    return j;
}

// ---------------------------------------------------------------------------
// Threshold table artifacts
// ---------------------------------------------------------------------------

/// One operating point of the detector noise analysis, in sigma_z = 1 units.
struct ThresholdRow {
    double snr_db = 0.0;
    double c_opt_over_sigma_z = 0.0;
    double c_approx_over_sigma_z = 0.0;
    double sigma2_nc = 0.0;
    double sigma2_eq_opt = 0.0;
    double gain_clipper_db = 0.0;
    double gain_total_db = 0.0;
    double sigma2_nc_printed = 0.0;  // companion closed form, reported only
};

inline std::vector<ThresholdRow> threshold_table(const std::vector<double>& snr_db_points,
                                                 const numerics::QuadratureSpec& quad = {}) {
    std::vector<ThresholdRow> rows;
    rows.reserve(snr_db_points.size());
    for (const double snr_db : snr_db_points) {
        const double sigma_x = std::sqrt(2.0 * std::pow(10.0, snr_db / 10.0));
        const auto rep = detection::analyze_detection(1.0, sigma_x, quad);
        ThresholdRow row;
        row.snr_db = snr_db;
        row.c_opt_over_sigma_z = rep.c_opt;
        row.c_approx_over_sigma_z = detection::approx_threshold(snr_db);
        row.sigma2_nc = rep.sigma2_nc;
        row.sigma2_eq_opt = rep.sigma2_eq;
        row.gain_clipper_db = -10.0 * std::log10(rep.sigma2_nc);
        row.gain_total_db = -10.0 * std::log10(rep.sigma2_eq);
        row.sigma2_nc_printed = detection::sigma2_nc_printed(1.0, sigma_x);
        rows.push_back(row);
    }
    return rows;
}

inline std::string threshold_csv(const std::vector<ThresholdRow>& rows) {
    std::string out =
        "# thresholds and noise powers in sigma_z = 1 units\n"
        "# clipper noise closed-form comparison (quadrature is authoritative):\n";
    for (const auto& r : rows) {
        out += "#   snr_db=" + format_double(r.snr_db) +
               " quadrature=" + format_double(r.sigma2_nc) +
               " closed_form=" + format_double(r.sigma2_nc_printed) + " rel_gap=" +
               format_double((r.sigma2_nc - r.sigma2_nc_printed) / r.sigma2_nc) + "\n";
    }
    out +=
        "snr_db,c_opt_over_sigma_z,c_approx_over_sigma_z,sigma2_nc,sigma2_eq_opt,"
        "gain_clipper_db,gain_total_db\n";
    for (const auto& r : rows) {
        out += format_double(r.snr_db);
        out += ',' + format_double(r.c_opt_over_sigma_z);
        out += ',' + format_double(r.c_approx_over_sigma_z);
        out += ',' + format_double(r.sigma2_nc);
        out += ',' + format_double(r.sigma2_eq_opt);
        out += ',' + format_double(r.gain_clipper_db);
        out += ',' + format_double(r.gain_total_db);
        out += '\n';
    }
    return out;
}

inline json threshold_json(const std::vector<ThresholdRow>& rows) {
    json j;
    j["schema"] = "threshold-table/1";
    j["sigma_z"] = 1.0;
    j["rows"] = json::array();
    for (const auto& r : rows) {
        j["rows"].push_back({{"snr_db", r.snr_db},
                             {"c_opt_over_sigma_z", json_double(r.c_opt_over_sigma_z)},
                             {"c_approx_over_sigma_z",
                              json_double(r.c_approx_over_sigma_z)},
                             {"sigma2_nc", r.sigma2_nc},
                             {"sigma2_eq_opt", r.sigma2_eq_opt},
                             {"gain_clipper_db", r.gain_clipper_db},
                             {"gain_total_db", r.gain_total_db},
                             {"sigma2_nc_printed", r.sigma2_nc_printed}});
    }
    return j;
}

// ---------------------------------------------------------------------------
// Files and manifests
// ---------------------------------------------------------------------------

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << content;
    if (!f) throw std::runtime_error("write failed: " + path);
}

inline std::string utc_timestamp() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Sidecar manifest describing how an artifact was produced. Written next
/// to the artifact as <out>.manifest.json.
inline void write_manifest(const std::string& out_path, const std::string& command,
                           std::uint64_t seed, const json& config,
                           const std::vector<std::string>& outputs) {
    json m;
    m["artifact_version"] = "1";
    m["command"] = command;
    m["timestamp"] = utc_timestamp();
    m["seed"] = seed;
    m["config"] = config;
    m["outputs"] = outputs;
    write_text_file(out_path + ".manifest.json", m.dump(2) + "\n");
}

}  // namespace flipofdm::report
