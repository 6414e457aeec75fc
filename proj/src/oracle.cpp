#include "timing/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "timing/strategies.hpp"

namespace timing::oracle {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

void require_divisible(int n, int by, const char* what) {
    if (n <= 0 || n % by != 0)
        fail(std::string(what) + ": n must be a positive multiple of " + std::to_string(by));
}

} // namespace

RatMatrix line_matrix(int n) {
    RatMatrix m(n, std::vector<Rat>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m[i][j] = Rat(std::abs(i - j));
    return m;
}

RatMatrix cluster_matrix(int size_x, int size_y, const Rat& eps, const Rat& l) {
    const int n = size_x + size_y;
    RatMatrix m(n, std::vector<Rat>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            m[i][j] = ((i < size_x) == (j < size_x)) ? eps : l;
        }
    return m;
}

Rat order_statistic_exact(std::vector<Rat> values, int r) {
    if (r < 1 || static_cast<std::size_t>(r) > values.size())
        fail("order_statistic_exact: rank out of range");
    std::sort(values.begin(), values.end());
    return values[static_cast<std::size_t>(r - 1)];
}

Rat quorum_time_exact(const RatMatrix& latency, int j, int i, int c) {
    const int n = static_cast<int>(latency.size());
    std::vector<Rat> sums(n);
    for (int k = 0; k < n; ++k) sums[k] = latency[j][k] + latency[k][i];
    return order_statistic_exact(std::move(sums), c);
}

Rat start_time_exact(const RatMatrix& latency, int j, int i, int c) {
    return std::max(quorum_time_exact(latency, j, i, c), latency[j][i]);
}

Rat latency_error_exact(const RatMatrix& latency, int i, int j, int r) {
    const int n = static_cast<int>(latency.size());
    std::vector<Rat> diffs(n);
    for (int k = 0; k < n; ++k) diffs[k] = latency[i][k] - latency[j][k];
    return order_statistic_exact(std::move(diffs), r);
}

Rat mean_start_exact(const RatMatrix& latency, int i, int c) {
    const int n = static_cast<int>(latency.size());
    Rat sum = 0;
    for (int j = 0; j < n; ++j) sum += start_time_exact(latency, j, i, c);
    return sum / n;
}

Rat mean_error_exact(const RatMatrix& latency, int i, int r) {
    const int n = static_cast<int>(latency.size());
    Rat sum = 0;
    for (int j = 0; j < n; ++j) sum += latency_error_exact(latency, i, j, r);
    return sum / n;
}

Rat line_quorum_closed_form(int n, int i, int j) {
    require_divisible(n, 3, "line_quorum_closed_form");
    if (i < 0 || j < 0 || i >= n || j >= n) fail("line_quorum_closed_form: index out of range");
    if (i > j) std::swap(i, j);
    const int quorum = 2 * n / 3;
    const int span = j - i;
    if (span + 1 >= quorum) return Rat(span);
    const int w = std::min(n - j - 1, i);
    if (span + 1 + 2 * w >= quorum) {
        const int kappa = (quorum - (span + 1)) % 2 == 1 ? 1 : 0;
        return Rat(quorum - 1 + kappa);
    }
    return Rat(4 * n / 3 - 2 * w - span - 2);
}

Rat line_mean_start(int n, LinePosition which) {
    require_divisible(n, 6, "line_mean_start");
    if (which == LinePosition::Endpoint) return Rat(17 * n, 18) - Rat(7, 6);
    return Rat(25 * n, 36) - Rat(2, 3);
}

Rat line_mean_error(int n, LinePosition which) {
    require_divisible(n, 6, "line_mean_error");
    if (which == LinePosition::Endpoint) return Rat(7 * n - 15, 18);
    return Rat(n, 36) - Rat(2, 3);
}

ClusterParams::ClusterParams(int sx, int sy, Rat e, Rat ll)
    : size_x(sx), size_y(sy), eps(std::move(e)), l(std::move(ll)) {
    if (size_x <= 0 || size_y <= 0) fail("cluster: cluster sizes must be positive");
    if (size_x < size_y) fail("cluster: |X| must be at least |Y|");
    if (!(eps > 0)) fail("cluster: eps must be positive");
    if (!(l > eps)) fail("cluster: l must exceed eps");
}

ClusterMeans cluster_means(const ClusterParams& p, int c, int m) {
    // Ranks 1, n and quorums of 2 hit the zero diagonal instead of the
    // lemma's two-value structure; the closed forms hold outside those corners.
    if (c < 3 || c > p.n()) fail("cluster_means: closed form needs 3 <= c <= n");
    if (m < 2 || m > p.n() - 1) fail("cluster_means: closed form needs 2 <= m <= n-1");
    const Rat xf = p.x_frac();
    const Rat yf = p.y_frac();
    ClusterMeans out;
    out.start_y = xf * (p.eps + p.l) + 2 * yf * p.l;
    out.start_x = (p.size_x >= c) ? 2 * xf * p.eps + yf * (p.eps + p.l)
                                  : 2 * xf * p.l + yf * (p.eps + p.l);
    out.error_y = (p.size_y >= m) ? xf * (p.eps - p.l) : xf * (p.l - p.eps);
    out.error_x = (p.size_x >= m) ? yf * (p.eps - p.l) : yf * (p.l - p.eps);
    return out;
}

ClusterMeans cluster_means_enumerated(const ClusterParams& p, int c, int m) {
    const RatMatrix latency = cluster_matrix(p.size_x, p.size_y, p.eps, p.l);
    // node 0 is in X, node n-1 in Y
    ClusterMeans out;
    out.start_x = mean_start_exact(latency, 0, c);
    out.start_y = mean_start_exact(latency, p.n() - 1, c);
    out.error_x = mean_error_exact(latency, 0, m);
    out.error_y = mean_error_exact(latency, p.n() - 1, m);
    return out;
}

namespace {

// Shared shape of the early-advantage fractions: numerator and denominator of
// the displayed theorem expressions, kept verbatim.
template <typename T>
T line_early_fraction(T n, T kappa, T d, T mu, T mu0, bool* bad_denominator = nullptr) {
    const T lead = d + mu0 / (kappa * n * mu);
    const T ratio = (kappa - 1) / kappa;
    const T numer = lead - ratio * (T(25) / 36 - 2 / (3 * n)) - T(1) / 36 - 2 / (3 * n);
    const T denom = lead - ratio * (T(17) / 18 - 7 / (6 * n)) - T(7) / 18 - 5 / (6 * n);
    if (denom <= 0) {
        if (bad_denominator) *bad_denominator = true;
        return T(0);
    }
    return numer / denom - 1;
}

} // namespace

double advantage_line_early(double n, double kappa, double d, double mu, double mu0) {
    if (!(kappa > 1.0)) fail("advantage_line_early: kappa must exceed 1");
    if (!(n > 0.0) || !(mu > 0.0)) fail("advantage_line_early: need positive n and mu");
    bool bad = false;
    const double adv = line_early_fraction<double>(n, kappa, d, mu, mu0, &bad);
    if (bad) throw std::domain_error("advantage_line_early: denominator <= 0, invalid parameter regime");
    return adv;
}

double advantage_line_early_limit(double kappa, double d) {
    return to_double(advantage_line_early_limit_exact(Rat(kappa), Rat(d)));
}

Rat advantage_line_early_limit_exact(const Rat& kappa, const Rat& d) {
    if (!(kappa > 1)) fail("advantage_line_early_limit: kappa must exceed 1");
    const Rat ratio = (kappa - 1) / kappa;
    const Rat numer = d - ratio * Rat(25, 36) - Rat(1, 36);
    const Rat denom = d - ratio * Rat(17, 18) - Rat(7, 18);
    if (denom <= 0) throw std::domain_error("advantage_line_early_limit: denominator <= 0");
    return numer / denom - 1;
}

double advantage_line_late(double n, double b0, double mu0, double d, double mu) {
    if (!(n > 0.0) || !(mu > 0.0)) fail("advantage_line_late: need positive n and mu");
    const double lead = (b0 + mu0) / (mu * n) + d;
    const double numer = lead - (1.0 / 36 - 2 / (3 * n));
    const double denom = lead - (7.0 / 18 - 5 / (6 * n));
    if (denom <= 0) throw std::domain_error("advantage_line_late: denominator <= 0");
    return numer / denom - 1;
}

double advantage_cluster_early(double x_frac, double eps, double l, double kappa, double d, double mu,
                               double mu0) {
    if (!(kappa > 1.0)) fail("advantage_cluster_early: kappa must exceed 1");
    if (!(x_frac > 2.0 / 3.0)) fail("advantage_cluster_early: requires |X| > c = m = 2n/3");
    if (!(l > eps && eps > 0.0)) fail("advantage_cluster_early: need l > eps > 0");
    const double lead = 2 * d * l + mu0 / (kappa * mu);
    const double ratio = (kappa - 1) / kappa;
    const double numer = lead - ratio * (2 * x_frac * eps + (1 - x_frac) * (eps + l)) -
                         (1 - x_frac) * (eps - l);
    const double denom = lead - ratio * (x_frac * (eps + l) + 2 * (1 - x_frac) * l) -
                         x_frac * (l - eps);
    if (denom <= 0) throw std::domain_error("advantage_cluster_early: denominator <= 0");
    return numer / denom - 1;
}

double advantage_cluster_early(const ClusterParams& p, double kappa, double d, double mu, double mu0) {
    return advantage_cluster_early(to_double(p.x_frac()), to_double(p.eps), to_double(p.l), kappa, d,
                                   mu, mu0);
}

double advantage_cluster_late(double x_frac, double eps, double l, double b0, double mu0, double d,
                              double mu) {
    if (!(x_frac > 2.0 / 3.0)) fail("advantage_cluster_late: requires |X| > c");
    if (!(l > eps && eps > 0.0)) fail("advantage_cluster_late: need l > eps > 0");
    const double lead = (b0 + mu0) + 2 * d * l * mu;
    const double numer = lead - mu * ((1 - x_frac) * (eps - l));
    const double denom = lead - mu * (x_frac * (l - eps));
    if (denom <= 0) throw std::domain_error("advantage_cluster_late: denominator <= 0");
    return numer / denom - 1;
}

double advantage_cluster_late(const ClusterParams& p, double b0, double mu0, double d, double mu) {
    return advantage_cluster_late(to_double(p.x_frac()), to_double(p.eps), to_double(p.l), b0, mu0, d,
                                  mu);
}

Rat advantage_line_early_enumerated_exact(int n, const Rat& kappa, const Rat& d, const Rat& mu,
                                          const Rat& mu0) {
    require_divisible(n, 6, "advantage_line_early_enumerated_exact");
    const int c = 2 * n / 3;
    const RatMatrix latency = line_matrix(n);
    const Rat b = kappa * mu;
    const Rat b0 = b * d * n; // tau = d*n
    const Rat s_center = mean_start_exact(latency, n / 2, c);
    const Rat s_end = mean_start_exact(latency, 0, c);
    const Rat e_center = mean_error_exact(latency, n / 2, c);
    const Rat e_end = mean_error_exact(latency, 0, c);
    const Rat numer = b0 + mu0 - (b - mu) * s_center - b * e_center;
    const Rat denom = b0 + mu0 - (b - mu) * s_end - b * e_end;
    if (denom <= 0) throw std::domain_error("advantage_line_early_enumerated_exact: denominator <= 0");
    return numer / denom - 1;
}

AdvantageConsistency line_early_consistency(int n, const Rat& kappa, const Rat& d, const Rat& mu,
                                            const Rat& mu0) {
    const Rat formula = line_early_fraction<Rat>(Rat(n), kappa, d, mu, mu0);
    const Rat enumerated = advantage_line_early_enumerated_exact(n, kappa, d, mu, mu0);
    AdvantageConsistency out;
    out.formula = to_double(formula);
    out.enumerated = to_double(enumerated);
    out.exact_match = (formula == enumerated);
    out.abs_gap = std::abs(to_double(formula - enumerated));
    return out;
}

namespace {

struct PairTables {
    int n = 0;
    std::vector<double> start;   // S^{j,i}, indexed j*n+i
    std::vector<double> error_m; // E^{i-j}_m, indexed i*n+j
    std::vector<double> error_c; // E^{i-j}_c, indexed i*n+j
    double total_start = 0.0;    // sum over all (j, i)
};

PairTables pair_tables(const ProtocolParams& protocol, const LatencyModel& model) {
    if (!model.deterministic()) fail("oracle: utilities need a deterministic latency model");
    if (model.n() != protocol.n) fail("oracle: model size does not match protocol n");
    const LatencyDraw d = model.draw(0, 0);
    const int n = d.n;

    PairTables t;
    t.n = n;
    t.start.resize(static_cast<std::size_t>(n) * n);
    t.error_m.resize(static_cast<std::size_t>(n) * n);
    t.error_c.resize(static_cast<std::size_t>(n) * n);
    std::vector<double> scratch(n), prev(n), cur(n), col(n);
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) prev[k] = d(j, k);
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < n; ++k) {
                cur[k] = d(i, k);
                col[k] = d(k, i);
            }
            const double q = quorum_time_kernel(prev, col, protocol.c, scratch);
            const double s = std::max(q, d(j, i));
            t.start[static_cast<std::size_t>(j) * n + i] = s;
            t.total_start += s;
            t.error_m[static_cast<std::size_t>(i) * n + j] =
                latency_error_kernel(cur, prev, protocol.m, scratch);
            t.error_c[static_cast<std::size_t>(i) * n + j] =
                latency_error_kernel(cur, prev, protocol.c, scratch);
        }
    }
    return t;
}

} // namespace

UtilityVector honest_utility_closed_form(const ProtocolParams& protocol, const RewardParams& rewards,
                                         const LatencyModel& model) {
    const PairTables t = pair_tables(protocol, model);
    UtilityVector out;
    out.degenerate_zero_time = (t.total_start == 0.0);
    out.utility.resize(t.n);
    for (int i = 0; i < t.n; ++i) {
        double numer = 0.0;
        for (int j = 0; j < t.n; ++j) {
            const double s = t.start[static_cast<std::size_t>(j) * t.n + i];
            const double e = t.error_m[static_cast<std::size_t>(i) * t.n + j];
            numer += mev(rewards, s) + block_reward(rewards, s + e);
        }
        out.utility[i] = out.degenerate_zero_time ? std::numeric_limits<double>::infinity()
                                                  : numer / t.total_start;
    }
    return out;
}

UtilityVector coalition_utility_closed_form(const ProtocolParams& protocol, const RewardParams& rewards,
                                            const LatencyModel& model,
                                            const std::vector<int>& coalition) {
    const int size = static_cast<int>(coalition.size());
    const int rank = coalition_latency_penalty_rank(size, protocol); // validates size <= k
    const PairTables t = pair_tables(protocol, model);
    const LatencyDraw d = model.draw(0, 0);

    std::vector<bool> in_coalition(t.n, false);
    for (int v : coalition) in_coalition.at(v) = true;

    UtilityVector out;
    out.degenerate_zero_time = (t.total_start == 0.0);
    out.utility.resize(t.n);
    std::vector<double> diffs;
    diffs.reserve(t.n);
    for (int i = 0; i < t.n; ++i) {
        double numer = 0.0;
        for (int j = 0; j < t.n; ++j) {
            const double s = t.start[static_cast<std::size_t>(j) * t.n + i];
            double e;
            if (in_coalition[i]) {
                // Coalition votes of 0 never exceed an honest vote here (votes
                // are nonnegative under early proposing on these models), so
                // the aggregate is the rank-(m-|C|) error over outsiders.
                diffs.clear();
                for (int k = 0; k < t.n; ++k)
                    if (!in_coalition[k]) diffs.push_back(d(i, k) - d(j, k));
                e = order_statistic_inplace(diffs, rank);
            } else {
                e = t.error_m[static_cast<std::size_t>(i) * t.n + j];
            }
            numer += mev(rewards, s) + block_reward(rewards, s + e);
        }
        out.utility[i] = out.degenerate_zero_time ? std::numeric_limits<double>::infinity()
                                                  : numer / t.total_start;
    }
    return out;
}

UtilityVector late_utility_closed_form(const ProtocolParams& protocol, const RewardParams& rewards,
                                       const LatencyModel& model, bool static_rewards) {
    const PairTables t = pair_tables(protocol, model);
    // All leaders delay to Delta*, so the round led by i after j lasts
    // tau - E^{i-j}_c and the aggregated vote is tau - E^{i-j}_c + E^{i-j}_m.
    double total = 0.0;
    for (int i = 0; i < t.n; ++i)
        for (int j = 0; j < t.n; ++j) total += protocol.tau - t.error_c[static_cast<std::size_t>(i) * t.n + j];

    UtilityVector out;
    out.degenerate_zero_time = (total == 0.0);
    out.utility.resize(t.n);
    for (int i = 0; i < t.n; ++i) {
        double numer = 0.0;
        for (int j = 0; j < t.n; ++j) {
            const double e_c = t.error_c[static_cast<std::size_t>(i) * t.n + j];
            const double e_m = t.error_m[static_cast<std::size_t>(i) * t.n + j];
            const double duration = protocol.tau - e_c;
            numer += mev(rewards, duration) +
                     (static_rewards ? rewards.b0 : block_reward(rewards, duration + e_m));
        }
        out.utility[i] = out.degenerate_zero_time ? std::numeric_limits<double>::infinity() : numer / total;
    }
    return out;
}

LowLatencyReport z_low_latency_check(const LatencyModel& model, const ProtocolParams& protocol,
                                     double z) {
    if (z < 0.0 || z > 1.0) fail("z_low_latency_check: z must lie in [0,1]");
    const PairTables t = pair_tables(protocol, model);
    const int r_off = std::min(protocol.c, protocol.m);

    LowLatencyReport out;
    out.mean_reported.resize(t.n);
    const LatencyDraw d = model.draw(0, 0);
    std::vector<double> cur(t.n), prev(t.n), scratch(t.n);
    for (int i = 0; i < t.n; ++i) {
        double sum = 0.0;
        for (int j = 0; j < t.n; ++j) {
            for (int k = 0; k < t.n; ++k) {
                cur[k] = d(i, k);
                prev[k] = d(j, k);
            }
            sum += t.start[static_cast<std::size_t>(j) * t.n + i] +
                   latency_error_kernel(cur, prev, r_off, scratch);
        }
        out.mean_reported[i] = sum / t.n;
        if (out.mean_reported[i] > z * protocol.tau) out.offenders += 1;
    }
    out.satisfied = out.offenders <= protocol.k_small();
    return out;
}

bool large_coalition_defection_bound(const ProtocolParams& protocol, double z, int coalition_size) {
    if (coalition_size < protocol.m)
        fail("large_coalition_defection_bound: coalition must be large (|C| >= m)");
    const double k = protocol.k_small();
    return z <= (coalition_size - k) / (2.0 * protocol.n + coalition_size - k);
}

StationaryWeights binary_decay_stationary(double p, double rho) {
    if (p < 0.0 || p > 1.0) fail("binary_decay_stationary: p must lie in [0,1]");
    if (!(rho > 0.0 && rho < 1.0)) fail("binary_decay_stationary: rho must lie in (0,1)");
    const double denom = 1.0 - rho * (1.0 - p);
    StationaryWeights w;
    w.nu_low = p / denom;
    w.nu_high = (1.0 - rho) * (1.0 - p) / denom;
    return w;
}

} // namespace timing::oracle
