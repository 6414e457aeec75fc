#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <vector>

#include "timing/latency.hpp"
#include "timing/protocol.hpp"
#include "timing/rewards.hpp"

namespace timing::oracle {

// Exact rational arithmetic for the deterministic-model results; doubles only
// appear at the reporting boundary.
using Rat = boost::multiprecision::cpp_rational;

inline double to_double(const Rat& r) { return r.convert_to<double>(); }

using RatMatrix = std::vector<std::vector<Rat>>;

enum class LinePosition { Endpoint, Center };

// ---- Exact enumeration toolkit (the independent oracle path) ----

RatMatrix line_matrix(int n);
RatMatrix cluster_matrix(int size_x, int size_y, const Rat& eps, const Rat& l);

Rat order_statistic_exact(std::vector<Rat> values, int r);

/// c-th smallest of { L[j][k] + L[k][i] } over all k.
Rat quorum_time_exact(const RatMatrix& latency, int j, int i, int c);

/// max(quorum time, L[j][i]).
Rat start_time_exact(const RatMatrix& latency, int j, int i, int c);

/// r-th smallest of { L[i][k] - L[j][k] } over all k.
Rat latency_error_exact(const RatMatrix& latency, int i, int j, int r);

/// (1/n) * sum_j start_time(j, i).
Rat mean_start_exact(const RatMatrix& latency, int i, int c);

/// (1/n) * sum_j latency_error(i, j, r).
Rat mean_error_exact(const RatMatrix& latency, int i, int r);

// ---- Deterministic line closed forms (c = m = 2n/3) ----

/// Three-case quorum-time formula on the line; symmetric in (i, j).
Rat line_quorum_closed_form(int n, int i, int j);

/// Mean start time: endpoint 17n/18 - 7/6, center 25n/36 - 2/3. Needs 6 | n.
Rat line_mean_start(int n, LinePosition which);

/// Mean m-th latency error: endpoint (7n-15)/18, center n/36 - 2/3. Needs 6 | n.
Rat line_mean_error(int n, LinePosition which);

// ---- Two-cluster closed forms ----

struct ClusterParams {
    int size_x = 0; // |X| >= |Y|
    int size_y = 0;
    Rat eps;        // intra-cluster latency
    Rat l;          // inter-cluster latency, l > eps > 0

    ClusterParams(int size_x, int size_y, Rat eps, Rat l);
    int n() const { return size_x + size_y; }
    Rat x_frac() const { return Rat(size_x, n()); }
    Rat y_frac() const { return Rat(size_y, n()); }
};

struct ClusterMeans {
    Rat start_x, start_y;  // E[S-bar] for a node in X / in Y
    Rat error_x, error_y;  // E[E-bar_m]
};

/// Lemma case split on |X| vs c (start) and |X| vs m (error).
ClusterMeans cluster_means(const ClusterParams& p, int c, int m);

/// Same quantities by brute-force enumeration over all leader pairs.
ClusterMeans cluster_means_enumerated(const ClusterParams& p, int c, int m);

// ---- Advantage formulas ----
// The theorem-level expressions are implemented verbatim. Where the displayed
// expression disagrees with its own derivation (the line early case, on the
// O(1/n) terms), the mismatch against the enumeration path is reported by
// line_early_consistency, never auto-resolved.

/// Early (dynamic-reward) advantage on the line; tau = d*n, b0 = kappa*mu*d*n.
double advantage_line_early(double n, double kappa, double d, double mu, double mu0);

/// n -> infinity limit of the early line advantage.
double advantage_line_early_limit(double kappa, double d);
Rat advantage_line_early_limit_exact(const Rat& kappa, const Rat& d);

/// Late (static-reward) advantage on the line; tau = d*n, b0 free.
double advantage_line_late(double n, double b0, double mu0, double d, double mu);

/// Early advantage in the two-cluster model; requires |X| > c = m (x_frac > 2/3).
double advantage_cluster_early(double x_frac, double eps, double l, double kappa, double d, double mu,
                               double mu0);
double advantage_cluster_early(const ClusterParams& p, double kappa, double d, double mu, double mu0);

/// Late advantage in the two-cluster model; requires |X| > c.
double advantage_cluster_late(double x_frac, double eps, double l, double b0, double mu0, double d,
                              double mu);
double advantage_cluster_late(const ClusterParams& p, double b0, double mu0, double d, double mu);

/// Verbatim line early formula vs. exact enumeration at finite n.
struct AdvantageConsistency {
    double formula = 0.0;
    double enumerated = 0.0;
    bool exact_match = false;
    double abs_gap = 0.0;
};
AdvantageConsistency line_early_consistency(int n, const Rat& kappa, const Rat& d, const Rat& mu,
                                            const Rat& mu0);

/// Early line advantage from the enumeration path (utility ratio center/endpoint).
Rat advantage_line_early_enumerated_exact(int n, const Rat& kappa, const Rat& d, const Rat& mu,
                                          const Rat& mu0);

// ---- Deterministic honest/late utilities by enumeration over leader pairs ----

struct UtilityVector {
    std::vector<double> utility;
    bool degenerate_zero_time = false; // total expected duration is 0; utilities are +inf
};

/// U_i = sum_j [M(S^{j,i}) + B(S^{j,i} + E^{i-j}_m)] / sum_{j,k} S^{j,k}
/// for a deterministic latency model.
UtilityVector honest_utility_closed_form(const ProtocolParams& protocol, const RewardParams& rewards,
                                         const LatencyModel& model);

/// Per-validator utilities when a 0-voting coalition of size |C| <= k proposes
/// early: members' aggregated vote drops to the (m-|C|)-th error over
/// non-members; everyone else is unchanged.
UtilityVector coalition_utility_closed_form(const ProtocolParams& protocol, const RewardParams& rewards,
                                            const LatencyModel& model,
                                            const std::vector<int>& coalition);

/// Utilities in the all-late profile (static rewards pay b0 flat; dynamic
/// rewards evaluate B at tau - e_c + e_m).
UtilityVector late_utility_closed_form(const ProtocolParams& protocol, const RewardParams& rewards,
                                       const LatencyModel& model, bool static_rewards);

// ---- Low-latency condition and coalition defection ----

struct LowLatencyReport {
    bool satisfied = false;
    int offenders = 0;                 // validators with mean reported duration > z*tau
    std::vector<double> mean_reported; // S-bar^i + E-bar^i_{min(c,m)}
};

/// At most k validators may exceed z*tau in mean reported duration.
LowLatencyReport z_low_latency_check(const LatencyModel& model, const ProtocolParams& protocol,
                                     double z);

/// True iff z <= (|C|-k)/(2n+|C|-k); the |C|=m worst case gives (n-c)/(3n-c).
bool large_coalition_defection_bound(const ProtocolParams& protocol, double z, int coalition_size);

// ---- Binary weight decay ----

struct StationaryWeights {
    double nu_low = 0.0;  // weight 1-rho
    double nu_high = 0.0; // weight 1
};

/// Stationary distribution of the two-state weight chain for penalty
/// probability p: nu_low = p / (1 - rho(1-p)).
StationaryWeights binary_decay_stationary(double p, double rho);

} // namespace timing::oracle
