#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "timing/latency.hpp"

namespace timing {

/// Consensus-side parameters of the round game.
///
/// Invariants enforced at construction: n >= 3, n/2 < c <= n, n-c < m <= n,
/// tau > 0. Under these, k_small = m + c - n >= 1.
struct ProtocolParams {
    int n = 0;    // validator count
    int c = 0;    // quorum threshold (count of votes)
    int m = 0;    // aggregation rank of the timeliness vote
    Time tau = 0; // timeout

    ProtocolParams() = default;
    ProtocolParams(int n, int c, int m, Time tau);

    int k_small() const { return m + c - n; }
};

/// A timeliness vote; absent reports aggregate as +infinity.
struct Vote {
    Time value = 0.0;
    bool absent = false;

    static Vote present(Time v) { return Vote{v, false}; }
    static Vote missing() { return Vote{0.0, true}; }
};

inline constexpr Time kInfiniteVote = std::numeric_limits<Time>::infinity();

/// Counters for configurations that break the model's assumptions. The model
/// requires the raw maximum delay to be nonnegative and aggregated votes to
/// land in [0, tau]; violations are counted, never silently absorbed.
struct ViolationCounters {
    long long max_delay_clamped = 0;       // tau - s - e_c was negative
    long long reward_out_of_domain = 0;    // block reward evaluated outside [0, tau]
    long long negative_aggregate = 0;      // aggregated vote below 0
    long long missing_quorum = 0;          // fewer than m votes present

    ViolationCounters& operator+=(const ViolationCounters& o) {
        max_delay_clamped += o.max_delay_clamped;
        reward_out_of_domain += o.reward_out_of_domain;
        negative_aggregate += o.negative_aggregate;
        missing_quorum += o.missing_quorum;
        return *this;
    }
    long long total() const {
        return max_delay_clamped + reward_out_of_domain + negative_aggregate + missing_quorum;
    }
};

/// Everything observable about one executed round.
struct RoundOutcome {
    std::uint64_t round = 0;
    int leader = -1;
    int prev_leader = -1;
    Time start_time = 0.0;      // realized S^{j,i}
    Time max_delay = 0.0;       // Delta*, clamped at 0
    Time delay = 0.0;           // chosen Delta
    std::vector<Vote> votes;    // one per validator
    Time aggregated_vote = 0.0; // v*, +inf when fewer than m votes present
    Time duration = 0.0;        // start_time + delay
    Time reward = 0.0;          // leader's M + B for this round
};

// Span-based kernels. prev_block[k] holds the realized latency from the
// previous leader j to k (its block propagation), vote_col[k] the latency from
// k to the current leader i (its vote), cur_block[k] the latency from i to k.

/// c-th smallest of { prev_block[k] + vote_col[k] } over all n validators.
Time quorum_time_kernel(std::span<const Time> prev_block, std::span<const Time> vote_col, int c,
                        std::span<Time> scratch);

/// r-th smallest of { cur_block[k] - prev_block[k] }; may be negative.
Time latency_error_kernel(std::span<const Time> cur_block, std::span<const Time> prev_block, int r,
                          std::span<Time> scratch);

// Draw-based operations matching the round definitions.

/// Time until leader i holds both j's block and a c-quorum of votes.
Time quorum_time(const LatencyDraw& draw_prev, const LatencyDraw& draw_votes, int j, int i, int c);

/// S^{j,i} = max(quorum time, l_{j->i}).
Time start_time(const LatencyDraw& draw_prev, const LatencyDraw& draw_votes, int j, int i, int c);

/// E^{i-j}_r over the realized draws of leader i's and leader j's rounds.
Time latency_error(const LatencyDraw& draw_i, const LatencyDraw& draw_j, int i, int j, int r);

/// Delta* = max(0, tau - s - e_c); a negative raw value is counted as a
/// model violation before clamping.
Time compute_max_delay(Time s, Time e_c, Time tau, ViolationCounters* violations = nullptr);

/// Honest report of validator k for leader i after previous leader j.
inline Time honest_vote(Time delay, Time s, Time l_ik, Time l_jk) { return delay + s + l_ik - l_jk; }

/// m-th smallest vote, with absent votes treated as +infinity. Returns +inf
/// when fewer than m votes are present (the block reward is then zero).
Time aggregate_votes(std::span<const Vote> votes, int m, int n);

} // namespace timing
