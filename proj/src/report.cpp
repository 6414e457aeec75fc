#include "timing/report.hpp"

#include <cstdio>

namespace timing {

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    std::FILE* f = std::fopen(tmp.c_str(), "wb");
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    const std::size_t written = std::fwrite(content.data(), 1, content.size(), f);
    const bool flushed = std::fflush(f) == 0;
    std::fclose(f);
    if (written != content.size() || !flushed) {
        std::remove(tmp.c_str());
        throw IoError("short write to '" + path + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw IoError("cannot move output into place at '" + path + "'");
    }
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string report_to_csv(const UtilityReport& report) {
    std::string out = "validator,tag,leaderships,reward,time_share,utility,utility_stderr\n";
    for (const auto& v : report.validators) {
        const double share = report.total_time > 0.0 ? v.led_time / report.total_time : 0.0;
        out += std::to_string(v.id);
        out += ',';
        out += v.tag;
        out += ',';
        out += std::to_string(v.leaderships);
        out += ',';
        out += format_double(v.reward);
        out += ',';
        out += format_double(share);
        out += ',';
        out += format_double(v.utility);
        out += ',';
        out += format_double(v.utility_stderr);
        out += '\n';
    }
    return out;
}

std::string report_summary_text(const UtilityReport& report) {
    std::string out;
    out += "rounds=" + std::to_string(report.rounds) + "\n";
    out += "replications=" + std::to_string(report.replications) + "\n";
    out += "burn_in_rounds=" + std::to_string(report.burn_in_rounds) + "\n";
    out += "total_time_ms=" + format_double(report.total_time) + "\n";
    out += "advantage=" + format_double(report.advantage) + "\n";
    out += "degenerate_zero_time=" + std::to_string(report.degenerate_zero_time ? 1 : 0) + "\n";
    out += "violations.max_delay_clamped=" + std::to_string(report.violations.max_delay_clamped) + "\n";
    out += "violations.reward_out_of_domain=" + std::to_string(report.violations.reward_out_of_domain) + "\n";
    out += "violations.negative_aggregate=" + std::to_string(report.violations.negative_aggregate) + "\n";
    out += "violations.missing_quorum=" + std::to_string(report.violations.missing_quorum) + "\n";
    if (report.late_identity_tracked)
        out += "late_identity_max_err=" + format_double(report.late_identity_max_err) + "\n";
    return out;
}

std::string weight_distribution_to_csv(const WeightDistribution& dist) {
    std::string out =
        "validator,elections,elections_low_weight,p_hat,nu_low_hat,nu_low_stderr,nu_high_hat\n";
    for (const auto& v : dist.validators) {
        out += std::to_string(v.id);
        out += ',';
        out += std::to_string(v.elections);
        out += ',';
        out += std::to_string(v.elections_low_weight);
        out += ',';
        out += format_double(v.p_hat);
        out += ',';
        out += format_double(v.nu_low_hat);
        out += ',';
        out += format_double(v.nu_low_stderr);
        out += ',';
        out += format_double(v.nu_high_hat);
        out += '\n';
    }
    return out;
}

} // namespace timing
