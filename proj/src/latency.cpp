#include "timing/latency.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace timing {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
        std::size_t start = 0;
        while (start < field.size() && field[start] == ' ') ++start;
        out.push_back(field.substr(start));
    }
    return out;
}

} // namespace

int PingTable::total_weight() const { return std::accumulate(weights.begin(), weights.end(), 0); }

PingTable PingTable::parse_csv(const std::string& text) {
    std::stringstream ss(text);
    std::string line;
    if (!std::getline(ss, line)) fail("ping table: empty input");
    auto header = split_csv_line(line);
    if (header.size() < 3 || header.front() != "city" || header.back() != "weight")
        fail("ping table: header must be 'city,<city names...>,weight'");

    PingTable t;
    t.cities.assign(header.begin() + 1, header.end() - 1);
    const int k = t.city_count();

    int row = 0;
    while (std::getline(ss, line)) {
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_line(line);
        if (static_cast<int>(fields.size()) != k + 2)
            fail("ping table: row " + std::to_string(row + 1) + " has " + std::to_string(fields.size()) +
                 " fields, expected " + std::to_string(k + 2));
        if (row >= k) fail("ping table: more rows than header cities");
        if (fields[0] != t.cities[row])
            fail("ping table: row order must match header (got '" + fields[0] + "', expected '" +
                 t.cities[row] + "')");
        std::vector<double> ms(k);
        for (int j = 0; j < k; ++j) ms[j] = std::stod(fields[j + 1]);
        t.ms.push_back(std::move(ms));
        t.weights.push_back(std::stoi(fields[k + 1]));
        ++row;
    }
    if (row != k) fail("ping table: expected " + std::to_string(k) + " rows, got " + std::to_string(row));

    for (int i = 0; i < k; ++i) {
        if (t.weights[i] <= 0) fail("ping table: weight for " + t.cities[i] + " must be positive");
        for (int j = 0; j < k; ++j) {
            const double v = t.ms[i][j];
            if (i == j) {
                if (v != 0.0) fail("ping table: diagonal entry for " + t.cities[i] + " must be 0");
                continue;
            }
            if (!(v > 0.0)) fail("ping table: nonpositive ping " + t.cities[i] + "->" + t.cities[j]);
            const double rev = t.ms[j][i];
            if (std::abs(v - rev) > 0.25 * std::max(v, rev))
                fail("ping table: " + t.cities[i] + "<->" + t.cities[j] +
                     " is not symmetric within measurement noise");
        }
    }
    return t;
}

PingTable PingTable::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("ping table: cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str());
}

std::vector<int> normalize_weights(const std::vector<int>& weights, int target) {
    if (target <= 0) fail("normalize_weights: target must be positive");
    const long long total = std::accumulate(weights.begin(), weights.end(), 0LL);
    if (total <= 0) fail("normalize_weights: weights must sum to a positive value");

    const int k = static_cast<int>(weights.size());
    std::vector<int> out(k);
    std::vector<std::pair<long long, int>> remainders(k); // (remainder numerator, index)
    int assigned = 0;
    for (int i = 0; i < k; ++i) {
        const long long num = static_cast<long long>(weights[i]) * target;
        out[i] = static_cast<int>(num / total);
        remainders[i] = {num % total, i};
        assigned += out[i];
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (int i = 0; i < target - assigned; ++i) out[remainders[i].second] += 1;
    return out;
}

LatencyModel LatencyModel::line(int n) {
    if (n < 2) fail("line model: need at least 2 validators");
    return LatencyModel(LineModel{n});
}

LatencyModel LatencyModel::cluster(int size_x, int size_y, double intra_eps, double inter_l) {
    if (size_x <= 0 || size_y <= 0) fail("cluster model: cluster sizes must be positive");
    if (!(intra_eps > 0.0)) fail("cluster model: intra-cluster latency must be positive");
    if (!(inter_l > intra_eps)) fail("cluster model: inter-cluster latency must exceed intra-cluster");
    return LatencyModel(ClusterModel{size_x, size_y, intra_eps, inter_l});
}

LatencyModel LatencyModel::world(const PingTable& table, const WorldOptions& options) {
    if (table.city_count() == 0) fail("world model: empty ping table");
    if (!(options.intra_sigma >= 0.0) || !(options.inter_sigma >= 0.0))
        fail("world model: sigmas must be nonnegative");

    WorldModel w;
    w.cities = table.cities;
    w.intra_mean_log = options.intra_mean_log;
    w.intra_sigma = options.intra_sigma;
    w.inter_sigma = options.inter_sigma;

    const int k = table.city_count();
    w.mean_log.assign(k, std::vector<double>(k, 0.0));
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            if (i != j) w.mean_log[i][j] = std::log(table.ms[i][j]);

    std::vector<int> weights = table.weights;
    if (options.normalize_to) weights = normalize_weights(weights, *options.normalize_to);
    for (int city = 0; city < k; ++city)
        for (int rep = 0; rep < weights[city]; ++rep) w.city_of_node.push_back(city);
    if (w.city_of_node.empty()) fail("world model: no nodes");
    return LatencyModel(std::move(w));
}

LatencyModel LatencyModel::explicit_matrix(int n, std::vector<MatrixEntry> entries) {
    if (n < 2) fail("explicit model: need at least 2 validators");
    if (entries.size() != static_cast<std::size_t>(n) * n)
        fail("explicit model: expected n*n entries");
    for (const auto& e : entries) {
        switch (e.kind) {
        case MatrixEntry::Kind::Constant:
            if (e.a < 0.0) fail("explicit model: negative constant latency");
            break;
        case MatrixEntry::Kind::Lognormal:
            if (e.b < 0.0) fail("explicit model: negative lognormal sigma");
            break;
        case MatrixEntry::Kind::TwoPoint:
        case MatrixEntry::Kind::SharedTwoPoint:
            if (e.a < 0.0 || e.b < e.a) fail("explicit model: two-point needs 0 <= low <= high");
            if (e.p < 0.0 || e.p > 1.0) fail("explicit model: two-point probability outside [0,1]");
            break;
        }
    }
    return LatencyModel(ExplicitModel{n, std::move(entries)});
}

int LatencyModel::n() const {
    return std::visit(
        [](const auto& m) -> int {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, LineModel>) return m.n;
            else if constexpr (std::is_same_v<T, ClusterModel>) return m.size_x + m.size_y;
            else if constexpr (std::is_same_v<T, WorldModel>) return static_cast<int>(m.city_of_node.size());
            else return m.n;
        },
        model_);
}

bool LatencyModel::deterministic() const {
    if (std::holds_alternative<LineModel>(model_) || std::holds_alternative<ClusterModel>(model_))
        return true;
    if (const auto* e = std::get_if<ExplicitModel>(&model_)) {
        for (const auto& entry : e->entries)
            if (entry.kind != MatrixEntry::Kind::Constant &&
                !(entry.kind == MatrixEntry::Kind::Lognormal && entry.b == 0.0))
                return false;
        return true;
    }
    return false;
}

Time LatencyModel::entry(std::uint64_t stream, std::uint64_t round, int from, int to) const {
    if (from == to) return 0.0;
    return std::visit(
        [&](const auto& m) -> Time {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, LineModel>) {
                return static_cast<Time>(std::abs(from - to));
            } else if constexpr (std::is_same_v<T, ClusterModel>) {
                return m.same_cluster(from, to) ? m.intra_eps : m.inter_l;
            } else if constexpr (std::is_same_v<T, WorldModel>) {
                const int cf = m.city_of_node[from];
                const int ct = m.city_of_node[to];
                const double mu = (cf == ct) ? m.intra_mean_log : m.mean_log[cf][ct];
                const double sigma = (cf == ct) ? m.intra_sigma : m.inter_sigma;
                const std::uint64_t k1 = entry_key(stream, round, static_cast<std::uint32_t>(from),
                                                   static_cast<std::uint32_t>(to));
                const double z = standard_normal(k1, splitmix64(k1));
                return std::exp(mu + sigma * z);
            } else {
                const MatrixEntry& e = m.entries[static_cast<std::size_t>(from) * m.n + to];
                switch (e.kind) {
                case MatrixEntry::Kind::Constant:
                    return e.a;
                case MatrixEntry::Kind::Lognormal: {
                    const std::uint64_t k1 = entry_key(stream, round, static_cast<std::uint32_t>(from),
                                                       static_cast<std::uint32_t>(to));
                    return std::exp(e.a + e.b * standard_normal(k1, splitmix64(k1)));
                }
                case MatrixEntry::Kind::TwoPoint: {
                    const std::uint64_t k1 = entry_key(stream, round, static_cast<std::uint32_t>(from),
                                                       static_cast<std::uint32_t>(to));
                    return SplitMix::u01(k1) < e.p ? e.b : e.a;
                }
                case MatrixEntry::Kind::SharedTwoPoint: {
                    const std::uint64_t k1 =
                        entry_key(stream, round, 0xffffffffu, static_cast<std::uint32_t>(e.group));
                    return SplitMix::u01(k1) < e.p ? e.b : e.a;
                }
                }
                return 0.0;
            }
        },
        model_);
}

LatencyDraw LatencyModel::draw(std::uint64_t seed, std::uint64_t round) const {
    const int size = n();
    LatencyDraw d;
    d.round = round;
    d.n = size;
    d.values.resize(static_cast<std::size_t>(size) * size);
    for (int i = 0; i < size; ++i)
        for (int j = 0; j < size; ++j)
            d.values[static_cast<std::size_t>(i) * size + j] = entry(seed, round, i, j);
    return d;
}

std::string LatencyModel::node_tag(int i) const {
    return std::visit(
        [&](const auto& m) -> std::string {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, LineModel>) return std::to_string(i);
            else if constexpr (std::is_same_v<T, ClusterModel>) return i < m.size_x ? "X" : "Y";
            else if constexpr (std::is_same_v<T, WorldModel>) return m.cities[m.city_of_node[i]];
            else return "-";
        },
        model_);
}

double order_statistic(std::vector<double> values, int r) {
    return order_statistic_inplace(values, r);
}

double order_statistic_inplace(std::span<double> values, int r) {
    if (r < 1 || static_cast<std::size_t>(r) > values.size())
        fail("order_statistic: rank " + std::to_string(r) + " out of range for " +
             std::to_string(values.size()) + " values");
    std::nth_element(values.begin(), values.begin() + (r - 1), values.end());
    return values[static_cast<std::size_t>(r - 1)];
}

} // namespace timing
