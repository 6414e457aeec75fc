#pragma once

#include <optional>

#include "timing/protocol.hpp"

namespace timing {

using Reward = double;

/// Linear MEV and block-reward curves.
///
/// M(x) = mu*x + mu0 and B(x) = b0 - b*x with b0 = b*tau, so B reaches 0 at
/// the timeout. The slope ratio kappa = b/mu; time-decreasing requires
/// kappa > 1 (equivalently b0 > mu*tau).
struct RewardParams {
    Reward mu = 0.0;    // MEV slope per ms
    Reward mu0 = 0.0;   // MEV intercept
    Reward b = 0.0;     // block-reward slope per ms
    Reward b0 = 0.0;    // block-reward intercept, = b * tau
    Time tau = 0.0;     // timeout the curve is anchored to
    double d = 0.0;     // timeout slack (tau / slowest start time), informational
    std::optional<Time> target_duration; // target-duration reward variant

    RewardParams() = default;

    /// Build from slopes; b0 is derived as b*tau so the anchor is exact.
    static RewardParams from_slopes(Reward mu, Reward mu0, Reward b, Time tau, double d = 0.0);

    /// Build from the slope ratio kappa (b = kappa * mu).
    static RewardParams from_ratio(Reward mu, Reward mu0, double kappa, Time tau, double d = 0.0);

    /// Build from an explicit intercept; b is derived as b0/tau.
    static RewardParams from_intercept(Reward mu, Reward mu0, Reward b0, Time tau, double d = 0.0);

    double kappa() const { return mu > 0.0 ? b / mu : 0.0; }

    /// Checks b0 = b*tau against a protocol timeout; throws with the violated
    /// relation spelled out.
    void validate(const ProtocolParams& protocol) const;
};

/// MEV extracted for a proposal duration x.
inline Reward mev(const RewardParams& p, Time x) { return p.mu * x + p.mu0; }

/// Block reward for an aggregated vote v.
///
/// v = +inf (fewer than m votes) pays 0. v > tau pays 0 and is flagged:
/// the curve is only defined on [0, tau] and rewards never go negative.
/// v < 0 evaluates the line as written but is flagged; the model declares
/// utilities undefined there, so the caller must see it.
Reward block_reward(const RewardParams& p, Time v, ViolationCounters* violations = nullptr);

/// True iff M(x) + B(x) is strictly decreasing, i.e. b > mu.
/// With b0 = b*tau this is equivalent to b0 > mu*tau.
inline bool is_time_decreasing(const RewardParams& p) { return p.b > p.mu; }

/// Same condition stated on the intercept: b0 > mu*tau for B(x) = b0 - (b0/tau)x.
inline bool is_time_decreasing(Reward mu, Reward b0, Time tau) { return b0 > mu * tau; }

/// Reward curve with a target duration: 0 at v=0, rising linearly to
/// b*(tau-target) at v=target, then falling with slope b to 0 at v=tau.
/// The descending leg keeps the time-decreasing slope; the rising slope is
/// b*(tau-target)/target.
Reward target_block_reward(const RewardParams& p, Time v, ViolationCounters* violations = nullptr);

} // namespace timing
