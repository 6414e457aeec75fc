#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "timing/rng.hpp"

namespace timing {

// All times are milliseconds.
using Time = double;

/// Evenly spaced validators on a number line; latency between i and j is |i-j|.
struct LineModel {
    int n = 0;
};

/// Two clusters X (nodes [0, size_x)) and Y (the rest); latency is intra_eps
/// within a cluster and inter_l across, with inter_l > intra_eps > 0.
struct ClusterModel {
    int size_x = 0;
    int size_y = 0;
    double intra_eps = 0.0;
    double inter_l = 0.0;

    bool same_cluster(int i, int j) const { return (i < size_x) == (j < size_x); }
};

/// Directional city-to-city ping table with per-city node weights.
struct PingTable {
    std::vector<std::string> cities;
    std::vector<std::vector<double>> ms; // row = from-city, col = to-city
    std::vector<int> weights;            // nodes per city

    int city_count() const { return static_cast<int>(cities.size()); }
    int total_weight() const;

    static PingTable parse_csv(const std::string& text);
    static PingTable load_file(const std::string& path);
};

/// The bundled ping table (same content as data/world_pings.csv).
const PingTable& bundled_world_table();

/// Raw CSV text behind bundled_world_table(), for round-trip checks.
const char* bundled_world_csv();

/// Scale integer weights to sum to `target` by largest-remainder rounding.
std::vector<int> normalize_weights(const std::vector<int>& weights, int target);

struct WorldOptions {
    std::optional<int> normalize_to; // rescale total node count
    double intra_mean_log = 1.0;     // underlying normal mean within a city
    double intra_sigma = 0.5;
    double inter_sigma = 0.8;        // underlying normal stddev across cities
};

struct WorldModel {
    std::vector<std::string> cities;
    std::vector<int> city_of_node;
    std::vector<std::vector<double>> mean_log; // ln(ping ms), from-city x to-city
    double intra_mean_log = 1.0;
    double intra_sigma = 0.5;
    double inter_sigma = 0.8;
};

/// One cell of an explicit latency matrix.
struct MatrixEntry {
    enum class Kind { Constant, Lognormal, TwoPoint, SharedTwoPoint };
    Kind kind = Kind::Constant;
    double a = 0.0; // Constant: value; Lognormal: underlying mean; TwoPoint: low value
    double b = 0.0; // Lognormal: underlying sigma; TwoPoint: high value
    double p = 0.0; // TwoPoint: probability of the high value
    int group = 0;  // SharedTwoPoint: entries in one group consume one shared draw per round
};

struct ExplicitModel {
    int n = 0;
    std::vector<MatrixEntry> entries; // n*n, row-major, diagonal ignored
};

/// A realized latency matrix for one round. Nonnegative, zero diagonal.
struct LatencyDraw {
    std::uint64_t round = 0;
    int n = 0;
    std::vector<Time> values; // row-major, from * n + to

    Time operator()(int from, int to) const { return values[static_cast<std::size_t>(from) * n + to]; }
};

/// Pairwise latency generator. Immutable after construction; entries are pure
/// functions of (stream seed, round, from, to), so draws are reproducible and
/// safe to share across parallel simulation workers.
class LatencyModel {
public:
    LatencyModel() : model_(LineModel{2}) {} // placeholder; experiments set a real model

    static LatencyModel line(int n);
    static LatencyModel cluster(int size_x, int size_y, double intra_eps, double inter_l);
    static LatencyModel world(const PingTable& table, const WorldOptions& options = {});
    static LatencyModel explicit_matrix(int n, std::vector<MatrixEntry> entries);

    int n() const;
    bool deterministic() const;

    /// Realized latency for one ordered pair in one round.
    Time entry(std::uint64_t stream, std::uint64_t round, int from, int to) const;

    /// Full realized matrix; identical (model, seed, round) yield identical draws.
    LatencyDraw draw(std::uint64_t seed, std::uint64_t round) const;

    /// Short per-node label for reports: city name, cluster X/Y, or line position.
    std::string node_tag(int i) const;

    const LineModel* as_line() const { return std::get_if<LineModel>(&model_); }
    const ClusterModel* as_cluster() const { return std::get_if<ClusterModel>(&model_); }
    const WorldModel* as_world() const { return std::get_if<WorldModel>(&model_); }
    const ExplicitModel* as_explicit() const { return std::get_if<ExplicitModel>(&model_); }

private:
    using Variant = std::variant<LineModel, ClusterModel, WorldModel, ExplicitModel>;
    explicit LatencyModel(Variant m) : model_(std::move(m)) {}

    Variant model_;
};

/// sample_draw(model, seed, round): free-function spelling of LatencyModel::draw.
inline LatencyDraw sample_draw(const LatencyModel& model, std::uint64_t seed, std::uint64_t round) {
    return model.draw(seed, round);
}

/// world_model_from_table: build the lognormal world model from a ping table.
inline LatencyModel world_model_from_table(const PingTable& table, const WorldOptions& options = {}) {
    return LatencyModel::world(table, options);
}

/// r-th smallest element (1-based, counting multiplicity). Throws on bad rank.
double order_statistic(std::vector<double> values, int r);

/// In-place variant for hot paths; reorders `values`.
double order_statistic_inplace(std::span<double> values, int r);

} // namespace timing
