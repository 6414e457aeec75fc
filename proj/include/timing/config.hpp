#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "timing/simulator.hpp"

namespace timing {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Closed-form advantage sweep request.
struct OracleSpec {
    enum class Family { FairnessLine, FairnessCluster };
    Family family = Family::FairnessLine;
    double kappa = 1.5;   // slope ratio of the dynamic-reward run
    double d = 5.0;       // timeout slack
    double mu = 6e-6;     // MEV slope per ms
    double mu0 = 0.005;   // MEV intercept
    double b0_static = 0.038; // flat block reward of the static baseline
    double eps = 0.1;     // cluster intra latency
    double x_frac = 0.67; // cluster majority fraction
    std::vector<double> grid; // n values (line) or inter latencies (cluster)
};

struct CompareSpec {
    enum class Baseline { Honest, Late, Coalition };
    Baseline baseline = Baseline::Honest;
    double tolerance = 0.01; // max relative utility error
};

/// One experiment: a named, versioned, self-validating bundle of parameters.
struct ExperimentConfig {
    int schema_version = 1;
    std::string name;
    std::string mode = "simulate"; // simulate | oracle | compare
    std::string output;            // base path for emitted files
    std::optional<SimConfig> sim;
    std::optional<OracleSpec> oracle;
    CompareSpec compare;
    std::vector<std::string> warnings; // non-fatal regime flags collected at load
    std::string canonical_text;        // normalized document, overrides folded in

    /// Canonical serialized form (sorted keys); load/serialize round-trips.
    std::string canonical() const;
};

/// Optional command-line overrides applied while loading.
struct ConfigOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<long long> rounds;
    std::optional<int> normalize_weights;
    std::optional<std::string> output;
};

/// Parse and fully validate a config. Hard violations throw ConfigError with
/// the offending key and invariant; regimes the model merely flags (e.g.
/// non-time-decreasing rewards) are appended to warnings.
ExperimentConfig parse_config(const std::string& json_text, const std::string& base_dir,
                              const ConfigOverrides& overrides = {});

ExperimentConfig load_config(const std::string& path, const ConfigOverrides& overrides = {});

} // namespace timing
