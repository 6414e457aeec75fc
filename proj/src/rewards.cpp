#include "timing/rewards.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace timing {

RewardParams RewardParams::from_slopes(Reward mu, Reward mu0, Reward b, Time tau, double d) {
    if (mu < 0.0 || mu0 < 0.0 || b < 0.0) throw std::invalid_argument("rewards: slopes must be nonnegative");
    if (!(tau > 0.0)) throw std::invalid_argument("rewards: tau must be positive");
    RewardParams p;
    p.mu = mu;
    p.mu0 = mu0;
    p.b = b;
    p.b0 = b * tau;
    p.tau = tau;
    p.d = d;
    return p;
}

RewardParams RewardParams::from_ratio(Reward mu, Reward mu0, double kappa, Time tau, double d) {
    if (kappa < 0.0) throw std::invalid_argument("rewards: kappa must be nonnegative");
    return from_slopes(mu, mu0, kappa * mu, tau, d);
}

RewardParams RewardParams::from_intercept(Reward mu, Reward mu0, Reward b0, Time tau, double d) {
    if (b0 < 0.0) throw std::invalid_argument("rewards: b0 must be nonnegative");
    if (!(tau > 0.0)) throw std::invalid_argument("rewards: tau must be positive");
    return from_slopes(mu, mu0, b0 / tau, tau, d);
}

void RewardParams::validate(const ProtocolParams& protocol) const {
    if (tau != protocol.tau)
        throw std::invalid_argument("rewards: curve anchored to tau=" + std::to_string(tau) +
                                    " but protocol timeout is " + std::to_string(protocol.tau));
    const double expect = b * tau;
    const double err = std::abs(b0 - expect);
    if (err > 1e-9 * std::max(1.0, std::abs(expect)))
        throw std::invalid_argument("rewards: b0 != b*tau (b0=" + std::to_string(b0) +
                                    ", b*tau=" + std::to_string(expect) + ")");
    if (target_duration && !(*target_duration > 0.0 && *target_duration < tau))
        throw std::invalid_argument("rewards: target duration must lie in (0, tau)");
}

Reward block_reward(const RewardParams& p, Time v, ViolationCounters* violations) {
    if (std::isinf(v)) {
        if (violations) violations->missing_quorum += 1;
        return 0.0;
    }
    if (v > p.tau) {
        if (violations) violations->reward_out_of_domain += 1;
        return 0.0;
    }
    if (v < 0.0) {
        if (violations) {
            violations->reward_out_of_domain += 1;
            violations->negative_aggregate += 1;
        }
    }
    return p.b0 - p.b * v;
}

Reward target_block_reward(const RewardParams& p, Time v, ViolationCounters* violations) {
    if (!p.target_duration) throw std::invalid_argument("rewards: no target duration configured");
    const Time target = *p.target_duration;
    if (!(target > 0.0 && target < p.tau))
        throw std::invalid_argument("rewards: target duration must lie in (0, tau)");
    if (std::isinf(v)) {
        if (violations) violations->missing_quorum += 1;
        return 0.0;
    }
    if (v < 0.0 || v > p.tau) {
        if (violations) violations->reward_out_of_domain += 1;
        if (v < 0.0 && violations) violations->negative_aggregate += 1;
        return 0.0;
    }
    const Reward peak = p.b * (p.tau - target);
    if (v <= target) return peak * (v / target);
    return p.b * (p.tau - v);
}

} // namespace timing
