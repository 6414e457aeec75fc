#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "timing/latency.hpp"
#include "timing/protocol.hpp"
#include "timing/rewards.hpp"
#include "timing/rng.hpp"
#include "timing/strategies.hpp"

namespace timing {

enum class RewardMode {
    Dynamic, // B evaluated at the aggregated vote
    Static   // B == b0 regardless of votes (late-equilibrium baseline)
};

enum class ElectionMode { Uniform, BinaryDecay };

struct LeaderElection {
    ElectionMode mode = ElectionMode::Uniform;
    double rho = 0.0;      // binary-decay step, in (0,1)
    Time threshold = 0.0;  // binary-decay target time, in (0, tau)
};

struct SimConfig {
    long long rounds = 1;     // per replication
    int replications = 1;
    std::uint64_t seed = 0;
    ProtocolParams protocol;
    RewardParams rewards;
    RewardMode reward_mode = RewardMode::Dynamic;
    LatencyModel model;       // no default: every experiment names its model
    StrategyProfile profile;
    LeaderElection election;
    double burn_in_fraction = 0.01; // rounds dropped from utility sums
    int threads = 1;                // replications run in parallel when > 1

    void validate() const;
    long long burn_in_rounds() const;
};

struct ValidatorResult {
    int id = 0;
    std::string tag;
    long long leaderships = 0;   // across all rounds and replications
    double reward = 0.0;         // pooled post-burn-in reward
    double led_time = 0.0;       // pooled duration of own led rounds
    double utility = 0.0;        // mean of per-replication reward/time ratios
    double utility_stderr = 0.0; // standard error across replications
};

struct UtilityReport {
    long long rounds = 0;
    int replications = 1;
    long long burn_in_rounds = 0;
    double total_time = 0.0; // pooled post-burn-in chain time
    std::vector<ValidatorResult> validators;
    double advantage = 0.0;  // max utility / min utility - 1
    bool degenerate_zero_time = false;
    ViolationCounters violations;
    // Max |c-th perceived duration - tau| over rounds, tracked when every
    // proposal rule is Late and the raw maximum delay was nonnegative.
    double late_identity_max_err = 0.0;
    bool late_identity_tracked = false;
};

/// Internal per-replication state, exposed so single rounds can be driven in
/// tests. Round r+1 depends on round r's leader and draw, so rounds within a
/// replication are strictly sequential.
struct SimState {
    std::uint64_t round = 0;
    int prev_leader = -1;
    std::uint64_t latency_stream = 0;
    SplitMix election_rng{0};
    std::vector<Time> prev_block; // realized latencies previous-leader -> k
    std::vector<std::uint8_t> weight_low;
    ViolationCounters violations;

    // accumulators
    double total_time = 0.0;
    std::vector<double> reward;
    std::vector<double> led_time;
    std::vector<long long> leaderships;
    std::vector<long long> elections;     // binary-decay bookkeeping
    std::vector<long long> elections_low; // elected while at weight 1-rho
    std::vector<long long> penalized;     // v* above threshold when leading
    double late_identity_max_err = 0.0;

    // scratch buffers reused across rounds
    std::vector<Time> cur_block, vote_col, diffs, scratch;
    std::vector<Vote> votes;
    std::vector<double> weights_scratch;
};

SimState make_state(const SimConfig& config, std::uint64_t replication);

/// Executes one round: election, draw, start time, delay, votes, aggregation,
/// reward credit, weight update.
RoundOutcome run_round(SimState& state, const SimConfig& config);

/// Samples the next leader. Uniform ignores weights; BinaryDecay samples
/// proportionally to them.
int elect_leader(std::span<const double> weights, ElectionMode mode, SplitMix& rng);

/// Binary weight update: +rho at or below the threshold, -rho above, clamped
/// to [1-rho, 1].
double update_weight(double w, Time aggregated_vote, double rho, Time threshold);

/// Runs replications (in parallel when configured), pools them, and reports
/// per-validator utilities with standard errors plus the Advantage statistic.
UtilityReport run_experiment(const SimConfig& config);

// ---- Binary-decay weight distribution ----

struct WeightValidatorStats {
    int id = 0;
    long long elections = 0;
    long long elections_low_weight = 0;
    double p_hat = 0.0;        // empirical Pr[v* > threshold] at own rounds
    double nu_low_hat = 0.0;   // election-conditioned estimate of nu_{1-rho}
    double nu_low_stderr = 0.0;
    double nu_high_hat = 0.0;
};

struct WeightDistribution {
    std::vector<WeightValidatorStats> validators;
    bool horizon_warning = false; // some validator saw fewer than 1000 elections
    bool all_weights_stayed_high = true;
};

/// Long-run weight-state frequencies per validator under binary decay,
/// estimated by conditioning on that validator's elections: each
/// inter-election sojourn at weight w counts 1/w, mirroring the two-state
/// chain in which other validators' turns are skips.
WeightDistribution empirical_weight_distribution(const SimConfig& config, long long horizon_rounds);

} // namespace timing
